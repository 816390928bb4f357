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

#include "const_eval.hpp"

#include <cctype>

#include "uvmarvel/error.hpp"
#include "verilog_lexer.hpp"

namespace uvmarvel {

namespace {

using detail::Token;
using detail::TokenKind;

std::optional<long long> parse_number(std::string_view text) {
  std::string digits;
  int base = 10;
  auto tick = text.find('\'');
  if (tick == std::string_view::npos) {
    for (char c : text) {
      if (c == '_') continue;
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      digits += c;
    }
  } else {
    std::size_t i = tick + 1;
    if (i < text.size() && (text[i] == 's' || text[i] == 'S')) ++i;
    if (i >= text.size()) return std::nullopt;
    switch (std::tolower(static_cast<unsigned char>(text[i]))) {
      case 'b': base = 2; break;
      case 'o': base = 8; break;
      case 'd': base = 10; break;
      case 'h': base = 16; break;
      default: return std::nullopt;
    }
    for (++i; i < text.size(); ++i) {
      char c = text[i];
      if (c == '_' || std::isspace(static_cast<unsigned char>(c))) continue;
      if (!std::isxdigit(static_cast<unsigned char>(c))) return std::nullopt;
      digits += c;
    }
  }
  if (digits.empty()) return std::nullopt;
  try {
    return std::stoll(digits, nullptr, base);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

class Evaluator {
 public:
  Evaluator(const std::vector<Token>& toks, const ParameterTable& params)
      : toks_(toks), params_(params) {}

  std::optional<long long> run() {
    auto v = shift();
    if (!v || toks_[pos_].kind != TokenKind::End) return std::nullopt;
    return v;
  }

 private:
  bool at(std::string_view s) const { return toks_[pos_].is(s); }

  std::optional<long long> shift() {
    auto lhs = additive();
    while (lhs && (at("<<") || at(">>"))) {
      bool left = at("<<");
      ++pos_;
      auto rhs = additive();
      if (!rhs || *rhs < 0 || *rhs > 62) return std::nullopt;
      lhs = left ? (*lhs << *rhs) : (*lhs >> *rhs);
    }
    return lhs;
  }

  std::optional<long long> additive() {
    auto lhs = multiplicative();
    while (lhs && (at("+") || at("-"))) {
      bool plus = at("+");
      ++pos_;
      auto rhs = multiplicative();
      if (!rhs) return std::nullopt;
      lhs = plus ? *lhs + *rhs : *lhs - *rhs;
    }
    return lhs;
  }

  std::optional<long long> multiplicative() {
    auto lhs = unary();
    while (lhs && (at("*") || at("/") || at("%"))) {
      char op = toks_[pos_].text[0];
      ++pos_;
      auto rhs = unary();
      if (!rhs) return std::nullopt;
      if (op == '*') {
        lhs = *lhs * *rhs;
      } else {
        if (*rhs == 0) return std::nullopt;
        lhs = op == '/' ? *lhs / *rhs : *lhs % *rhs;
      }
    }
    return lhs;
  }

  std::optional<long long> unary() {
    if (at("-")) {
      ++pos_;
      auto v = unary();
      if (!v) return std::nullopt;
      return -*v;
    }
    if (at("+")) {
      ++pos_;
      return unary();
    }
    return primary();
  }

  std::optional<long long> primary() {
    const Token& t = toks_[pos_];
    if (t.is("(")) {
      ++pos_;
      auto v = shift();
      if (!at(")")) return std::nullopt;
      ++pos_;
      return v;
    }
    if (t.kind == TokenKind::Number) {
      ++pos_;
      return parse_number(t.text);
    }
    if (t.kind == TokenKind::Identifier) {
      ++pos_;
      auto it = params_.find(t.text);
      if (it == params_.end()) return std::nullopt;
      return it->second;
    }
    if (t.kind == TokenKind::SystemName && t.text == "$clog2") {
      ++pos_;
      if (!at("(")) return std::nullopt;
      ++pos_;
      auto v = shift();
      if (!v || !at(")")) return std::nullopt;
      ++pos_;
      long long r = 0;
      while ((1LL << r) < *v) ++r;
      return r;
    }
    return std::nullopt;
  }

  const std::vector<Token>& toks_;
  const ParameterTable& params_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<long long> evaluate_constant(std::string_view expr, const ParameterTable& params) {
  try {
    auto toks = detail::tokenize(expr, "<constant>");
    return Evaluator(toks, params).run();
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace uvmarvel
