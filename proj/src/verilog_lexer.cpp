// Copyright 2026 The UVMarvel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "verilog_lexer.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

#include "uvmarvel/error.hpp"

namespace uvmarvel::detail {

namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> kWords = {
      "always", "always_comb", "always_ff", "always_latch", "and", "assign",
      "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex", "casez",
      "cmos", "deassign", "default", "defparam", "disable", "edge", "else",
      "end", "endcase", "endfunction", "endgenerate", "endmodule",
      "endprimitive", "endspecify", "endtable", "endtask", "event", "for",
      "force", "forever", "fork", "function", "generate", "genvar", "highz0",
      "highz1", "if", "ifnone", "initial", "inout", "input", "integer", "join",
      "large", "localparam", "logic", "macromodule", "medium", "module", "nand",
      "negedge", "nmos", "nor", "not", "notif0", "notif1", "or", "output",
      "parameter", "pmos", "posedge", "primitive", "pull0", "pull1",
      "pulldown", "pullup", "rcmos", "real", "realtime", "reg", "release",
      "repeat", "rnmos", "rpmos", "rtran", "rtranif0", "rtranif1", "scalared",
      "signed", "small", "specify", "specparam", "strong0", "strong1",
      "supply0", "supply1", "table", "task", "time", "tran", "tranif0",
      "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned",
      "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor",
      "xnor", "xor"};
  return kWords;
}

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool based_digit(char c) {
  return std::isxdigit(static_cast<unsigned char>(c)) || c == '_' || c == 'x' ||
         c == 'X' || c == 'z' || c == 'Z' || c == '?';
}

constexpr std::array<std::string_view, 27> kPuncts = {
    "<<<", ">>>", "===", "!==", "==", "!=", "<=", ">=", "&&", "||", "**",
    "<<", ">>", "->", "~&", "~|", "~^", "^~", "+:", "-:", "::", "++", "--",
    "+=", "-=", "|=", "&="};

class Lexer {
 public:
  Lexer(std::string_view src, std::string_view file) : src_(src), file_(file) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.kind = TokenKind::End;
    end.begin = end.end = src_.size();
    end.line = end.end_line = line_;
    out.push_back(end);
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, int line) const {
    throw Error(ErrorCode::SyntaxError, msg, ErrorLocation{std::string(file_), line});
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') ++line_;
    ++pos_;
  }

  void skip_line() {
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      // backslash-newline continues a macro definition
      if (src_[pos_] == '\\' && peek(1) == '\n') advance();
      advance();
    }
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        skip_line();
      } else if (c == '/' && peek(1) == '*') {
        int start = line_;
        pos_ += 2;
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) fail("unterminated block comment", start);
        pos_ += 2;
      } else if (c == '(' && peek(1) == '*' && peek(2) != ')') {
        // attribute instance (* ... *)
        int start = line_;
        pos_ += 2;
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == ')')) advance();
        if (pos_ >= src_.size()) fail("unterminated attribute", start);
        pos_ += 2;
      } else if (c == '`') {
        std::size_t p = pos_ + 1;
        while (p < src_.size() && ident_char(src_[p])) ++p;
        std::string_view name = src_.substr(pos_ + 1, p - pos_ - 1);
        if (name == "timescale" || name == "define" || name == "include" ||
            name == "ifdef" || name == "ifndef" || name == "else" ||
            name == "elsif" || name == "endif" || name == "undef" ||
            name == "default_nettype" || name == "resetall" ||
            name == "celldefine" || name == "endcelldefine") {
          skip_line();
        } else {
          return;  // macro usage, tokenized by next()
        }
      } else {
        return;
      }
    }
  }

  Token make(TokenKind kind, std::size_t begin, int line) {
    Token t;
    t.kind = kind;
    t.begin = begin;
    t.end = pos_;
    t.text = src_.substr(begin, pos_ - begin);
    t.line = line;
    t.end_line = line_;
    return t;
  }

  void lex_based_tail() {
    // at '\''
    advance();
    if (peek() == 's' || peek() == 'S') advance();
    char base = peek();
    if (std::string_view("bBoOdDhH").find(base) != std::string_view::npos && base != '\0') {
      advance();
      while (std::isspace(static_cast<unsigned char>(peek())) && peek() != '\n') advance();
      while (based_digit(peek())) advance();
    } else if (base == '0' || base == '1' || base == 'x' || base == 'X' ||
               base == 'z' || base == 'Z') {
      advance();  // unbased unsized literal '0 '1 'x 'z
    }
  }

  Token next() {
    std::size_t begin = pos_;
    int line = line_;
    char c = peek();

    if (ident_start(c)) {
      while (ident_char(peek())) advance();
      Token t = make(TokenKind::Identifier, begin, line);
      if (keywords().count(t.text)) t.kind = TokenKind::Keyword;
      return t;
    }
    if (c == '\\') {
      while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(peek()))) advance();
      return make(TokenKind::Identifier, begin, line);
    }
    if (c == '$') {
      advance();
      while (ident_char(peek())) advance();
      return make(TokenKind::SystemName, begin, line);
    }
    if (c == '`') {
      advance();
      while (ident_char(peek())) advance();
      return make(TokenKind::Macro, begin, line);
    }
    if (c == '"') {
      advance();
      while (pos_ < src_.size() && peek() != '"') {
        if (peek() == '\n') fail("unterminated string literal", line);
        if (peek() == '\\') advance();
        advance();
      }
      if (pos_ >= src_.size()) fail("unterminated string literal", line);
      advance();
      return make(TokenKind::String, begin, line);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
      }
      if ((peek() == 'e' || peek() == 'E') &&
          (std::isdigit(static_cast<unsigned char>(peek(1))) ||
           ((peek(1) == '-' || peek(1) == '+') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
        advance();
        if (peek() == '-' || peek() == '+') advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
      // size followed by a base: 4'b1010, 8 'hFF
      std::size_t save = pos_;
      int save_line = line_;
      while (peek() == ' ' || peek() == '\t') advance();
      if (peek() == '\'') {
        lex_based_tail();
      } else {
        pos_ = save;
        line_ = save_line;
      }
      return make(TokenKind::Number, begin, line);
    }
    if (c == '\'') {
      lex_based_tail();
      if (pos_ == begin + 1) fail("stray apostrophe", line);
      return make(TokenKind::Number, begin, line);
    }
    for (std::string_view p : kPuncts) {
      if (src_.substr(pos_, p.size()) == p) {
        for (std::size_t i = 0; i < p.size(); ++i) advance();
        return make(TokenKind::Punct, begin, line);
      }
    }
    advance();
    return make(TokenKind::Punct, begin, line);
  }

  std::string_view src_;
  std::string_view file_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

bool is_verilog_keyword(std::string_view word) { return keywords().count(word) > 0; }

std::vector<Token> tokenize(std::string_view source, std::string_view file_name) {
  return Lexer(source, file_name).run();
}

}  // namespace uvmarvel::detail
