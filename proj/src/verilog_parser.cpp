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

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "const_eval.hpp"
#include "uvmarvel/error.hpp"
#include "uvmarvel/verilog_model.hpp"
#include "verilog_lexer.hpp"

namespace uvmarvel {

using detail::Token;
using detail::TokenKind;

namespace {

bool is_net_type(const Token& t) {
  static const std::set<std::string_view> kNets = {
      "wire", "reg", "logic", "integer", "tri", "tri0", "tri1", "triand",
      "trior", "trireg", "wand", "wor", "supply0", "supply1", "real",
      "realtime", "time", "event"};
  return t.kind == TokenKind::Keyword && kNets.count(t.text) > 0;
}

bool is_direction(const Token& t) {
  return t.is_keyword("input") || t.is_keyword("output") || t.is_keyword("inout");
}

bool is_gate_primitive(const Token& t) {
  static const std::set<std::string_view> kGates = {
      "and", "nand", "or", "nor", "xor", "xnor", "not", "buf", "bufif0",
      "bufif1", "notif0", "notif1", "pullup", "pulldown", "nmos", "pmos",
      "cmos", "rnmos", "rpmos", "rcmos", "tran", "tranif0", "tranif1",
      "rtran", "rtranif0", "rtranif1"};
  return t.kind == TokenKind::Keyword && kGates.count(t.text) > 0;
}

// Keywords that can never occur inside an expression; hitting one means a
// ';' or closing bracket is missing.
bool ends_expression(std::string_view kw) {
  static const std::set<std::string_view> kEnds = {
      "endmodule", "module", "end", "endcase", "begin", "always", "always_ff",
      "always_comb", "always_latch", "assign", "initial", "endgenerate",
      "endfunction", "endtask", "input", "output", "inout", "wire", "reg"};
  return kEnds.count(kw) > 0;
}

PortDirection direction_of(const Token& t) {
  if (t.text == "input") return PortDirection::Input;
  if (t.text == "output") return PortDirection::Output;
  return PortDirection::Inout;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
           return std::isdigit(static_cast<unsigned char>(c));
         });
}

// Parses the token stream of one file into modules, appending statements to
// the design-wide statement table.
class FileParser {
 public:
  FileParser(const SourceInput& input, std::vector<Token> tokens,
             DesignModel& design)
      : input_(input), toks_(std::move(tokens)), design_(design) {}

  void run() {
    DesignFile file;
    file.path = input_.path;
    file.source = input_.text;
    while (cur().kind != TokenKind::End) {
      if (cur().is_keyword("module") || cur().is_keyword("macromodule")) {
        parse_module();
        file.modules.push_back(design_.modules.back().name);
      } else if (cur().is_keyword("primitive")) {
        skip_to_keyword("endprimitive");
        advance();
      } else {
        fail("expected 'module' but found '" + std::string(cur().text) + "'");
      }
    }
    design_.files.push_back(std::move(file));
  }

 private:
  // --- token cursor -------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& at(std::size_t i) const { return toks_[std::min(i, toks_.size() - 1)]; }
  const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
  void advance() {
    if (toks_[pos_].kind != TokenKind::End) ++pos_;
  }
  bool accept(std::string_view s) {
    if (cur().is(s)) {
      advance();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, cur().line); }
  [[noreturn]] void fail_at(const std::string& msg, int line) const {
    throw Error(ErrorCode::SyntaxError, msg, ErrorLocation{input_.path, line});
  }

  void expect(std::string_view s) {
    if (!accept(s)) {
      if (cur().kind == TokenKind::End) fail("expected '" + std::string(s) + "' before end of file");
      fail("expected '" + std::string(s) + "' but found '" + std::string(cur().text) + "'");
    }
  }

  std::string expect_identifier(std::string_view what) {
    if (cur().kind != TokenKind::Identifier) {
      fail("expected " + std::string(what) + " but found '" + std::string(cur().text) + "'");
    }
    std::string name(cur().text);
    advance();
    return name;
  }

  std::string_view text_between(std::size_t first_tok, std::size_t last_tok_exclusive) const {
    if (last_tok_exclusive <= first_tok) return {};
    std::size_t b = toks_[first_tok].begin;
    std::size_t e = toks_[last_tok_exclusive - 1].end;
    return std::string_view(input_.text).substr(b, e - b);
  }

  // Moves past a bracketed group starting at the current opening token and
  // returns the index of the closing token.
  std::size_t skip_balanced() {
    std::string_view open = cur().text;
    std::string_view close = open == "(" ? ")" : open == "[" ? "]" : "}";
    int depth = 0;
    int start_line = cur().line;
    while (cur().kind != TokenKind::End) {
      if (cur().is(open)) ++depth;
      if (cur().is(close)) {
        --depth;
        if (depth == 0) {
          std::size_t idx = pos_;
          advance();
          return idx;
        }
      }
      advance();
    }
    fail_at("unbalanced '" + std::string(open) + "'", start_line);
  }

  // Index of the first token at bracket depth 0 matching one of `stops`,
  // searching from the cursor without consuming. Stops at ';' regardless.
  std::size_t find_at_depth0(std::initializer_list<std::string_view> stops) const {
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::End) return i;
      if (t.is("(") || t.is("[") || t.is("{")) ++depth;
      else if (t.is(")") || t.is("]") || t.is("}")) --depth;
      if (depth < 0) return i;
      if (t.kind == TokenKind::Keyword && ends_expression(t.text)) return i;
      if (depth == 0) {
        for (auto s : stops) {
          if (t.is(s)) return i;
        }
        if (t.is(";")) return i;
      }
    }
    return toks_.size() - 1;
  }

  void skip_to_keyword(std::string_view kw) {
    int line = cur().line;
    while (cur().kind != TokenKind::End && !cur().is_keyword(kw)) advance();
    if (cur().kind == TokenKind::End) fail_at("missing '" + std::string(kw) + "'", line);
  }

  // --- identifier collection ---------------------------------------------

  // Collects signal references in tokens [from, to). Identifiers that are
  // hierarchical components or function names are skipped; constants are
  // removed later once the whole module is known.
  void collect_refs(std::size_t from, std::size_t to, std::set<SignalRef>& out) const {
    for (std::size_t i = from; i < to; ++i) {
      const Token& t = toks_[i];
      if (t.kind != TokenKind::Identifier) continue;
      if (i > 0 && toks_[i - 1].is(".")) continue;
      if (i + 1 < to && (at(i + 1).is(".") || at(i + 1).is("("))) continue;
      SignalRef ref{module_->name, std::string(t.text), std::nullopt};
      if (i + 3 < to + 1 && at(i + 1).is("[") && at(i + 2).kind == TokenKind::Number &&
          all_digits(at(i + 2).text)) {
        int a = std::stoi(std::string(at(i + 2).text));
        if (at(i + 3).is("]")) {
          ref.bit_range = BitRange{a, a};
        } else if (at(i + 3).is(":") && at(i + 4).kind == TokenKind::Number &&
                   all_digits(at(i + 4).text) && at(i + 5).is("]")) {
          int b = std::stoi(std::string(at(i + 4).text));
          ref.bit_range = BitRange{std::max(a, b), std::min(a, b)};
        }
      }
      out.insert(std::move(ref));
    }
  }

  // Base identifiers of an lvalue (outside index brackets) go to `writes`;
  // identifiers used as indices go to `reads`.
  void collect_lvalue(std::size_t from, std::size_t to, std::set<SignalRef>& writes,
                      std::set<SignalRef>& reads) const {
    int bracket = 0;
    for (std::size_t i = from; i < to; ++i) {
      const Token& t = toks_[i];
      if (t.is("[")) {
        std::size_t j = i;
        int d = 0;
        for (; j < to; ++j) {
          if (at(j).is("[")) ++d;
          if (at(j).is("]") && --d == 0) break;
        }
        collect_refs(i + 1, j, reads);
        i = j;
        continue;
      }
      (void)bracket;
      if (t.kind == TokenKind::Identifier && !(i > 0 && toks_[i - 1].is("."))) {
        std::set<SignalRef> one;
        collect_refs(i, std::min(to, i + 6), one);
        for (const auto& r : one) {
          if (r.signal_name == t.text) writes.insert(r);
        }
      }
    }
  }

  // --- statements ---------------------------------------------------------

  StatementId open_statement(StatementKind kind, std::size_t first_tok,
                             std::optional<StatementId> parent, int branch = 0) {
    Statement s;
    s.id = static_cast<StatementId>(design_.statements.size());
    s.kind = kind;
    s.module_name = module_->name;
    s.span.file = input_.path;
    s.span.line_start = toks_[first_tok].line;
    s.span.offset_begin = toks_[first_tok].begin;
    s.parent_id = parent;
    s.branch = branch;
    if (parent) design_.statements[*parent].children.push_back(s.id);
    design_.statements.push_back(std::move(s));
    module_->statements.push_back(design_.statements.back().id);
    return design_.statements.back().id;
  }

  void close_statement(StatementId id, std::size_t last_tok) {
    Statement& s = design_.statements[id];
    s.span.line_end = toks_[last_tok].end_line;
    s.span.offset_end = toks_[last_tok].end;
    s.raw_text = input_.text.substr(s.span.offset_begin, s.span.offset_end - s.span.offset_begin);
  }

  Statement& stmt(StatementId id) { return design_.statements[id]; }

  // --- module -------------------------------------------------------------

  void parse_module() {
    std::size_t module_tok = pos_;
    advance();
    design_.modules.emplace_back();
    module_ = &design_.modules.back();
    module_->file = input_.path;
    module_->name = expect_identifier("module name");
    module_->span.file = input_.path;
    module_->span.line_start = toks_[module_tok].line;
    module_->span.offset_begin = toks_[module_tok].begin;

    if (cur().is("#")) {
      std::size_t hash = pos_;
      advance();
      if (!cur().is("(")) fail("expected '(' after '#'");
      std::size_t open = pos_;
      std::size_t close = skip_balanced();
      module_->header_parameter_text = std::string(text_between(hash, close + 1));
      parse_parameter_list(open + 1, close, /*local=*/false);
    }
    if (cur().is("(")) parse_port_list();
    expect(";");

    while (!cur().is_keyword("endmodule")) {
      if (cur().kind == TokenKind::End) {
        fail_at("module '" + module_->name + "' is missing 'endmodule'", module_->span.line_start);
      }
      parse_module_item();
    }
    module_->span.line_end = cur().end_line;
    module_->span.offset_end = cur().end;
    advance();

    for (const auto& name : pending_ports_) {
      if (!declared_ports_.count(name)) {
        fail_at("port '" + name + "' of module '" + module_->name +
                    "' has no direction declaration",
                module_->span.line_start);
      }
    }
    pending_ports_.clear();
    declared_ports_.clear();
  }

  // Splits "parameter A = 1, B = 2" style lists in tokens [from, to).
  void parse_parameter_list(std::size_t from, std::size_t to, bool local) {
    std::size_t i = from;
    while (i < to) {
      std::size_t j = i;
      int depth = 0;
      for (; j < to; ++j) {
        const Token& t = toks_[j];
        if (t.is("(") || t.is("[") || t.is("{")) ++depth;
        if (t.is(")") || t.is("]") || t.is("}")) --depth;
        if (depth == 0 && t.is(",")) break;
      }
      // within [i, j): find identifier before '='
      for (std::size_t k = i; k < j; ++k) {
        if (toks_[k].is("=") && k > i && toks_[k - 1].kind == TokenKind::Identifier) {
          Parameter p;
          p.name = std::string(toks_[k - 1].text);
          p.value_text = std::string(text_between(k + 1, j));
          bool is_local = local;
          for (std::size_t m = i; m < k; ++m) {
            if (toks_[m].is_keyword("localparam")) is_local = true;
          }
          p.local = is_local;
          module_->constants.insert(p.name);
          module_->parameters.push_back(std::move(p));
          break;
        }
      }
      i = j + 1;
    }
  }

  void add_port(const std::string& name, PortDirection dir, std::string net_type,
                bool is_signed, std::string range) {
    if (module_->find_port(name)) fail("duplicate port '" + name + "'");
    PortDecl p;
    p.name = name;
    p.direction = dir;
    p.net_type = std::move(net_type);
    p.is_signed = is_signed;
    p.range_text = std::move(range);
    module_->ports.push_back(std::move(p));
    declared_ports_.insert(name);
  }

  // [wire|reg] [signed] [range] prefix shared by port and net declarations.
  struct TypePrefix {
    std::string net_type;
    bool is_signed = false;
    std::string range;
  };

  TypePrefix parse_type_prefix() {
    TypePrefix tp;
    if (is_net_type(cur())) {
      tp.net_type = std::string(cur().text);
      advance();
    }
    if (cur().is_keyword("signed")) {
      tp.is_signed = true;
      advance();
    } else if (cur().is_keyword("unsigned")) {
      advance();
    }
    if (cur().is("[")) {
      std::size_t open = pos_;
      std::size_t close = skip_balanced();
      tp.range = std::string(text_between(open, close + 1));
    }
    return tp;
  }

  void parse_port_list() {
    std::size_t open = pos_;
    advance();
    if (accept(")")) return;
    if (is_direction(cur())) {
      PortDirection dir = PortDirection::Input;
      TypePrefix tp;
      while (true) {
        if (is_direction(cur())) {
          dir = direction_of(cur());
          advance();
          tp = parse_type_prefix();
        }
        std::string name = expect_identifier("port name");
        add_port(name, dir, tp.net_type, tp.is_signed, tp.range);
        while (cur().is("[")) skip_balanced();
        if (accept(",")) continue;
        expect(")");
        break;
      }
    } else {
      while (true) {
        if (cur().is(".")) fail("port expressions in module headers are not supported");
        std::string name = expect_identifier("port name");
        if (module_->find_port(name)) fail("duplicate port '" + name + "'");
        PortDecl p;
        p.name = name;
        module_->ports.push_back(std::move(p));
        pending_ports_.push_back(name);
        if (accept(",")) continue;
        expect(")");
        break;
      }
    }
    (void)open;
  }

  void parse_module_item() {
    const Token& t = cur();
    if (t.is(";")) {
      advance();
      return;
    }
    if (is_direction(t)) return parse_direction_decl();
    if (is_net_type(t)) return parse_net_decl();
    if (t.is_keyword("genvar")) {
      advance();
      while (!cur().is(";")) {
        if (cur().kind == TokenKind::Identifier) module_->constants.insert(std::string(cur().text));
        if (cur().kind == TokenKind::End) fail("missing ';'");
        advance();
      }
      advance();
      return;
    }
    if (t.is_keyword("parameter") || t.is_keyword("localparam")) return parse_parameter_decl();
    if (t.is_keyword("assign")) return parse_continuous_assign();
    if (t.is_keyword("always") || t.is_keyword("always_ff") ||
        t.is_keyword("always_comb") || t.is_keyword("always_latch")) {
      return parse_always();
    }
    if (t.is_keyword("initial")) {
      std::size_t first = pos_;
      advance();
      skip_statement();
      make_opaque(first, pos_ - 1, std::nullopt);
      return;
    }
    if (t.is_keyword("generate")) {
      std::size_t first = pos_;
      skip_to_keyword("endgenerate");
      advance();
      make_opaque(first, pos_ - 1, std::nullopt);
      return;
    }
    if (t.is_keyword("function") || t.is_keyword("task")) return parse_subroutine();
    if (t.is_keyword("for") || t.is_keyword("if") || t.is_keyword("case") ||
        t.is_keyword("casez") || t.is_keyword("casex")) {
      // generate construct without the generate keyword
      std::size_t first = pos_;
      skip_statement();
      make_opaque(first, pos_ - 1, std::nullopt);
      return;
    }
    if (t.is_keyword("specify")) {
      std::size_t first = pos_;
      skip_to_keyword("endspecify");
      advance();
      make_opaque(first, pos_ - 1, std::nullopt);
      return;
    }
    if (t.is_keyword("defparam") || t.is_keyword("specparam") || is_gate_primitive(t)) {
      std::size_t first = pos_;
      while (!cur().is(";")) {
        if (cur().kind == TokenKind::End) fail("missing ';'");
        advance();
      }
      advance();
      StatementId id = make_opaque(first, pos_ - 1, std::nullopt);
      if (is_gate_primitive(toks_[first])) {
        // first terminal of each gate instance is its output
        for (std::size_t i = first; i + 1 < pos_; ++i) {
          if (toks_[i].is("(") && toks_[i + 1].kind == TokenKind::Identifier) {
            stmt(id).writes.insert(SignalRef{module_->name, std::string(toks_[i + 1].text), {}});
          }
        }
      }
      return;
    }
    if (t.kind == TokenKind::Identifier) return parse_instantiation();
    fail("unexpected '" + std::string(t.text) + "' in module body");
  }

  void parse_direction_decl() {
    PortDirection dir = direction_of(cur());
    advance();
    TypePrefix tp = parse_type_prefix();
    while (true) {
      std::string name = expect_identifier("port name");
      PortDecl* existing = nullptr;
      for (auto& p : module_->ports) {
        if (p.name == name) existing = &p;
      }
      if (existing) {
        if (declared_ports_.count(name)) fail("port '" + name + "' declared twice");
        existing->direction = dir;
        if (!tp.net_type.empty()) existing->net_type = tp.net_type;
        existing->is_signed = tp.is_signed;
        existing->range_text = tp.range;
        declared_ports_.insert(name);
      } else {
        fail("'" + name + "' is not in the port list of module '" + module_->name + "'");
      }
      while (cur().is("[")) skip_balanced();
      if (accept(",")) continue;
      expect(";");
      break;
    }
  }

  void parse_net_decl() {
    std::size_t first = pos_;
    TypePrefix tp = parse_type_prefix();
    if (tp.net_type == "integer" && tp.range.empty()) tp.range = "";
    std::vector<std::string> names;
    std::vector<std::pair<std::size_t, std::size_t>> inits;  // token ranges
    std::vector<std::string> init_names;
    std::vector<std::string> dims;
    while (true) {
      std::string name = expect_identifier("signal name");
      std::string unpacked;
      while (cur().is("[")) {
        std::size_t o = pos_;
        std::size_t c = skip_balanced();
        unpacked += std::string(text_between(o, c + 1));
      }
      names.push_back(name);
      dims.push_back(unpacked);
      if (accept("=")) {
        std::size_t b = pos_;
        std::size_t e = find_at_depth0({","});
        pos_ = e;
        inits.emplace_back(b, e);
        init_names.push_back(name);
      }
      if (accept(",")) continue;
      expect(";");
      break;
    }
    std::optional<StatementId> sid;
    if (!inits.empty()) {
      sid = open_statement(StatementKind::Declaration, first, std::nullopt);
      Statement& s = stmt(*sid);
      s.header = std::string(text_between(first, pos_ - 1));
      for (auto [b, e] : inits) collect_refs(b, e, s.reads);
      for (const auto& n : init_names) s.writes.insert(SignalRef{module_->name, n, {}});
      close_statement(*sid, pos_ - 1);
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      const std::string& name = names[i];
      if (PortDecl* port = mutable_port(name)) {
        // non-ANSI "reg q;" after "output q;"
        if (!tp.net_type.empty()) port->net_type = tp.net_type;
        if (tp.is_signed) port->is_signed = true;
        if (port->range_text.empty()) port->range_text = tp.range;
        continue;
      }
      if (module_->find_signal(name)) fail("signal '" + name + "' declared twice");
      SignalDecl d;
      d.name = name;
      d.net_type = tp.net_type;
      d.is_signed = tp.is_signed;
      d.range_text = tp.range;
      d.unpacked_text = dims[i];
      d.line = toks_[first].line;
      // every name of an initialized declaration lives in that statement's text
      d.declared_by = sid;
      module_->signals.push_back(std::move(d));
    }
  }

  PortDecl* mutable_port(std::string_view name) {
    for (auto& p : module_->ports) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  void parse_parameter_decl() {
    std::size_t first = pos_;
    bool local = cur().is_keyword("localparam");
    advance();
    std::size_t body = pos_;
    while (!cur().is(";")) {
      if (cur().kind == TokenKind::End) fail("missing ';' after parameter declaration");
      advance();
    }
    parse_parameter_list(body, pos_, local);
    advance();
    module_->parameter_declarations.emplace_back(text_between(first, pos_));
  }

  void parse_continuous_assign() {
    std::size_t first = pos_;
    advance();
    if (cur().is("(")) skip_balanced();  // drive strength
    if (accept("#")) skip_delay_value();
    std::size_t body_begin = pos_;
    StatementId id = open_statement(StatementKind::ContinuousAssign, first, std::nullopt);
    while (true) {
      std::size_t lhs_b = pos_;
      std::size_t eq = find_at_depth0({"="});
      if (!at(eq).is("=")) fail("expected '=' in continuous assignment");
      collect_lvalue(lhs_b, eq, stmt(id).writes, stmt(id).reads);
      pos_ = eq + 1;
      std::size_t rhs_b = pos_;
      std::size_t end = find_at_depth0({","});
      if (end == rhs_b) fail("missing expression in continuous assignment");
      collect_refs(rhs_b, end, stmt(id).reads);
      pos_ = end;
      if (accept(",")) continue;
      if (!cur().is(";")) fail("expected ';' after continuous assignment");
      break;
    }
    stmt(id).header = std::string(text_between(body_begin, pos_));
    close_statement(id, pos_);
    advance();
  }

  void skip_delay_value() {
    if (cur().is("(")) {
      skip_balanced();
    } else {
      advance();
    }
  }

  void parse_always() {
    std::size_t first = pos_;
    StatementId id = open_statement(StatementKind::AlwaysBlock, first, std::nullopt);
    advance();
    if (cur().is("@")) {
      std::size_t at_tok = pos_;
      advance();
      std::size_t last;
      if (cur().is("*")) {
        last = pos_;
        advance();
      } else if (cur().is("(")) {
        std::size_t open = pos_;
        last = skip_balanced();
        parse_sensitivity(id, open + 1, last);
      } else if (cur().kind == TokenKind::Identifier) {
        last = pos_;
        stmt(id).sensitivity.push_back({Edge::None, std::string(cur().text)});
        advance();
      } else {
        fail("malformed sensitivity list");
      }
      stmt(id).header = std::string(text_between(at_tok, last + 1));
      for (const auto& item : stmt(id).sensitivity) {
        stmt(id).reads.insert(SignalRef{module_->name, item.signal, {}});
      }
    }
    parse_statement(id, 0);
    close_statement(id, pos_ - 1);
  }

  void parse_sensitivity(StatementId id, std::size_t from, std::size_t to) {
    std::size_t i = from;
    if (i + 1 == to && toks_[i].is("*")) return;
    while (i < to) {
      Edge edge = Edge::None;
      if (toks_[i].is_keyword("posedge")) {
        edge = Edge::Posedge;
        ++i;
      } else if (toks_[i].is_keyword("negedge")) {
        edge = Edge::Negedge;
        ++i;
      }
      std::size_t j = i;
      int depth = 0;
      for (; j < to; ++j) {
        if (toks_[j].is("(") || toks_[j].is("[")) ++depth;
        if (toks_[j].is(")") || toks_[j].is("]")) --depth;
        if (depth == 0 && (toks_[j].is_keyword("or") || toks_[j].is(","))) break;
      }
      std::set<SignalRef> refs;
      collect_refs(i, j, refs);
      for (const auto& r : refs) stmt(id).sensitivity.push_back({edge, r.signal_name});
      if (refs.empty()) fail_at("malformed sensitivity list", toks_[i].line);
      i = j + 1;
    }
  }

  void parse_subroutine() {
    std::size_t first = pos_;
    bool is_function = cur().is_keyword("function");
    advance();
    if (cur().is_keyword("automatic")) advance();
    // function name is the identifier before ';' or '('
    std::string name;
    while (!cur().is(";") && !cur().is("(")) {
      if (cur().kind == TokenKind::End) fail("malformed subroutine header");
      if (cur().kind == TokenKind::Identifier) name = std::string(cur().text);
      advance();
    }
    if (name.empty()) fail("missing subroutine name");
    module_->constants.insert(name);
    skip_to_keyword(is_function ? "endfunction" : "endtask");
    advance();
    std::size_t last = pos_ - 1;
    // locals declared inside the subroutine are not module signals
    std::set<std::string> locals{name};
    for (std::size_t i = first; i < last; ++i) {
      const Token& t = toks_[i];
      if (is_direction(t) || is_net_type(t)) {
        for (std::size_t k = i + 1; k < last && !toks_[k].is(";") && !toks_[k].is(")"); ++k) {
          if (toks_[k].is("[")) {
            while (k < last && !toks_[k].is("]")) ++k;
            continue;
          }
          if (toks_[k].kind == TokenKind::Identifier) locals.insert(std::string(toks_[k].text));
        }
      }
    }
    StatementId id = make_opaque(first, last, std::nullopt);
    std::erase_if(stmt(id).reads, [&](const SignalRef& r) { return locals.count(r.signal_name) > 0; });
    std::erase_if(stmt(id).writes, [&](const SignalRef& r) { return locals.count(r.signal_name) > 0; });
  }

  void parse_instantiation() {
    std::size_t first = pos_;
    std::string child(cur().text);
    advance();
    std::string param_text;
    if (cur().is("#")) {
      std::size_t hash = pos_;
      advance();
      if (cur().is("(")) {
        std::size_t close = skip_balanced();
        param_text = std::string(text_between(hash, close + 1));
      } else {
        advance();
        param_text = std::string(text_between(hash, pos_));
      }
    }
    if (cur().kind != TokenKind::Identifier) {
      fail("unexpected '" + std::string(toks_[first].text) + "' in module body");
    }
    while (true) {
      std::size_t inst_first = pos_;
      Instance inst;
      inst.child_module = child;
      inst.parameter_text = param_text;
      inst.instance_name = expect_identifier("instance name");
      while (cur().is("[")) skip_balanced();
      if (!cur().is("(")) fail("expected '(' after instance name '" + inst.instance_name + "'");
      std::size_t instance_index = module_->instances.size();
      advance();
      parse_bindings(inst, instance_index);
      expect(")");
      inst.span.file = input_.path;
      inst.span.line_start = toks_[inst_first == first ? first : inst_first].line;
      inst.span.offset_begin = toks_[first].begin;
      inst.span.line_end = prev().end_line;
      inst.span.offset_end = prev().end;
      inst.span.line_start = toks_[first].line;
      module_->instances.push_back(std::move(inst));
      if (accept(",")) continue;
      expect(";");
      break;
    }
  }

  void parse_bindings(Instance& inst, std::size_t instance_index) {
    if (cur().is(")")) return;
    if (cur().is(".")) {
      while (true) {
        std::size_t dot = pos_;
        expect(".");
        if (cur().is("*")) fail("'.*' port connections are not supported");
        std::string formal = expect_identifier("port name");
        PortBinding b;
        b.formal = formal;
        StatementId id = open_statement(StatementKind::InstanceConnection, dot, std::nullopt);
        stmt(id).header = formal;
        stmt(id).instance_index = instance_index;
        if (cur().is("(")) {
          std::size_t open = pos_;
          std::size_t close = skip_balanced();
          b.actual_text = std::string(text_between(open + 1, close));
          std::set<SignalRef> refs;
          collect_refs(open + 1, close, refs);
          b.actuals.assign(refs.begin(), refs.end());
        } else {
          // .name shorthand binds the same-named signal
          b.actual_text = formal;
          b.actuals.push_back(SignalRef{module_->name, formal, {}});
        }
        close_statement(id, pos_ - 1);
        b.statement = id;
        inst.bindings.push_back(std::move(b));
        if (accept(",")) continue;
        break;
      }
      return;
    }
    std::size_t index = 0;
    while (true) {
      std::size_t b_first = pos_;
      std::size_t end = find_at_depth0({","});
      if (at(end).is(";")) fail("missing ')' in instance port list");
      // find_at_depth0 stops at the closing ')' (depth < 0) or ','
      if (end > b_first) {
        PortBinding b;
        b.positional = true;
        b.formal = "#" + std::to_string(index);  // resolved after all files parse
        b.actual_text = std::string(text_between(b_first, end));
        StatementId id = open_statement(StatementKind::InstanceConnection, b_first, std::nullopt);
        stmt(id).instance_index = instance_index;
        std::set<SignalRef> refs;
        collect_refs(b_first, end, refs);
        b.actuals.assign(refs.begin(), refs.end());
        close_statement(id, end - 1);
        b.statement = id;
        inst.bindings.push_back(std::move(b));
      }
      pos_ = end;
      ++index;
      if (accept(",")) continue;
      break;
    }
  }

  // --- procedural statements ----------------------------------------------

  void parse_statement(std::optional<StatementId> parent, int branch) {
    const Token& t = cur();
    if (t.is_keyword("begin") || t.is_keyword("fork")) {
      bool fork = t.is_keyword("fork");
      int line = t.line;
      advance();
      if (accept(":")) expect_identifier("block name");
      while (true) {
        if (cur().kind == TokenKind::End) fail_at("unterminated 'begin' block", line);
        if (!fork && cur().is_keyword("end")) break;
        if (fork && cur().kind == TokenKind::Keyword && cur().text == "join") break;
        if (fork && cur().kind == TokenKind::Identifier &&
            (cur().text == "join_any" || cur().text == "join_none")) {
          break;
        }
        if (cur().is_keyword("endmodule") || cur().is_keyword("endcase")) {
          fail_at("'begin' without matching 'end'", line);
        }
        parse_statement(parent, branch);
      }
      advance();
      if (accept(":")) expect_identifier("block name");
      return;
    }
    if (t.is_keyword("if")) {
      std::size_t first = pos_;
      StatementId id = open_statement(StatementKind::IfBlock, first, parent, branch);
      advance();
      if (!cur().is("(")) fail("expected '(' after 'if'");
      std::size_t open = pos_;
      std::size_t close = skip_balanced();
      collect_refs(open + 1, close, stmt(id).reads);
      stmt(id).header = std::string(text_between(first, close + 1));
      parse_statement(id, 0);
      if (cur().is_keyword("else")) {
        advance();
        parse_statement(id, 1);
      }
      close_statement(id, pos_ - 1);
      return;
    }
    if (t.is_keyword("case") || t.is_keyword("casez") || t.is_keyword("casex")) {
      std::size_t first = pos_;
      int line = t.line;
      StatementId id = open_statement(StatementKind::CaseBlock, first, parent, branch);
      advance();
      if (!cur().is("(")) fail("expected '(' after 'case'");
      std::size_t open = pos_;
      std::size_t close = skip_balanced();
      collect_refs(open + 1, close, stmt(id).reads);
      stmt(id).header = std::string(text_between(first, close + 1));
      while (!cur().is_keyword("endcase")) {
        if (cur().kind == TokenKind::End || cur().is_keyword("endmodule") ||
            cur().is_keyword("end")) {
          fail_at("'case' without matching 'endcase'", line);
        }
        std::size_t item_first = pos_;
        StatementId bid = open_statement(StatementKind::CaseBranch, item_first, id);
        if (cur().is_keyword("default")) {
          advance();
          accept(":");
          stmt(bid).header = "default";
        } else {
          std::size_t colon = find_at_depth0({":"});
          if (!at(colon).is(":")) fail("expected ':' after case item label");
          collect_refs(item_first, colon, stmt(bid).reads);
          stmt(bid).header = std::string(text_between(item_first, colon));
          pos_ = colon + 1;
        }
        parse_statement(bid, 0);
        close_statement(bid, pos_ - 1);
      }
      advance();
      close_statement(id, pos_ - 1);
      return;
    }
    if (t.is("#")) {
      advance();
      skip_delay_value();
      return parse_statement(parent, branch);
    }
    if (t.is("@")) {
      advance();
      if (cur().is("(")) {
        skip_balanced();
      } else {
        advance();
      }
      return parse_statement(parent, branch);
    }
    if (t.is(";")) {
      advance();
      return;
    }
    if (t.kind == TokenKind::Identifier || t.is("{")) {
      std::size_t first = pos_;
      std::size_t op = find_at_depth0({"=", "<="});
      if (at(op).is("=") || at(op).is("<=")) {
        StatementId id = open_statement(StatementKind::ProceduralAssign, first, parent, branch);
        stmt(id).nonblocking = at(op).is("<=");
        collect_lvalue(first, op, stmt(id).writes, stmt(id).reads);
        pos_ = op + 1;
        if (cur().is("#")) {
          advance();
          skip_delay_value();
        } else if (cur().is("@")) {
          advance();
          if (cur().is("(")) skip_balanced(); else advance();
        }
        std::size_t rhs = pos_;
        std::size_t end = find_at_depth0({});
        if (!at(end).is(";")) fail_at("expected ';' after assignment", at(end).line);
        if (end == rhs) fail("missing expression in assignment");
        collect_refs(rhs, end, stmt(id).reads);
        pos_ = end;
        close_statement(id, pos_);
        advance();
        return;
      }
    }
    // loops, system tasks, task calls, event triggers and the like
    if (t.kind == TokenKind::Keyword || t.kind == TokenKind::Identifier ||
        t.kind == TokenKind::SystemName || t.is("->") || t.is("{")) {
      if (t.is_keyword("end") || t.is_keyword("endcase") || t.is_keyword("endmodule") ||
          t.is_keyword("else")) {
        fail("unexpected '" + std::string(t.text) + "'");
      }
      std::size_t first = pos_;
      skip_statement();
      make_opaque(first, pos_ - 1, parent, branch);
      return;
    }
    fail("unexpected '" + std::string(t.text) + "' in procedural code");
  }

  // Skips one procedural statement without producing statements.
  void skip_statement() {
    const Token& t = cur();
    int line = t.line;
    if (t.is_keyword("begin") || t.is_keyword("fork")) {
      int depth = 0;
      while (cur().kind != TokenKind::End) {
        if (cur().is_keyword("begin") || cur().is_keyword("fork")) ++depth;
        if (cur().is_keyword("end") || cur().is_keyword("join") ||
            (cur().kind == TokenKind::Identifier &&
             (cur().text == "join_any" || cur().text == "join_none"))) {
          if (--depth == 0) {
            advance();
            if (accept(":")) advance();
            return;
          }
        }
        if (cur().is_keyword("endmodule")) break;
        advance();
      }
      fail_at("'begin' without matching 'end'", line);
    }
    if (t.is_keyword("if")) {
      advance();
      if (cur().is("(")) skip_balanced(); else fail("expected '(' after 'if'");
      skip_statement();
      if (cur().is_keyword("else")) {
        advance();
        skip_statement();
      }
      return;
    }
    if (t.is_keyword("case") || t.is_keyword("casez") || t.is_keyword("casex")) {
      int depth = 0;
      while (cur().kind != TokenKind::End) {
        if (cur().is_keyword("case") || cur().is_keyword("casez") || cur().is_keyword("casex")) ++depth;
        if (cur().is_keyword("endcase") && --depth == 0) {
          advance();
          return;
        }
        if (cur().is_keyword("endmodule")) break;
        advance();
      }
      fail_at("'case' without matching 'endcase'", line);
    }
    if (t.is_keyword("for") || t.is_keyword("while") || t.is_keyword("repeat") ||
        t.is_keyword("wait")) {
      advance();
      if (cur().is("(")) skip_balanced(); else fail("expected '('");
      skip_statement();
      return;
    }
    if (t.is_keyword("forever")) {
      advance();
      skip_statement();
      return;
    }
    if (t.is("#")) {
      advance();
      skip_delay_value();
      skip_statement();
      return;
    }
    if (t.is("@")) {
      advance();
      if (cur().is("(")) skip_balanced(); else advance();
      skip_statement();
      return;
    }
    std::size_t end = find_at_depth0({});
    if (!at(end).is(";")) fail_at("missing ';'", at(end).line);
    pos_ = end + 1;
  }

  // An unsupported construct kept as one statement whose read/write sets
  // come from identifier scanning.
  StatementId make_opaque(std::size_t first, std::size_t last,
                          std::optional<StatementId> parent, int branch = 0) {
    StatementId id = open_statement(StatementKind::Declaration, first, parent, branch);
    Statement& s = stmt(id);
    collect_refs(first, last + 1, s.reads);
    for (std::size_t i = first; i <= last; ++i) {
      if (toks_[i].kind != TokenKind::Identifier || (i > 0 && toks_[i - 1].is("."))) continue;
      std::size_t j = i + 1;
      while (at(j).is("[")) {
        int d = 0;
        for (; j <= last; ++j) {
          if (at(j).is("[")) ++d;
          if (at(j).is("]") && --d == 0) break;
        }
        ++j;
      }
      if (at(j).is("=") || at(j).is("<=")) {
        s.writes.insert(SignalRef{module_->name, std::string(toks_[i].text), {}});
      }
    }
    s.header = std::string(toks_[first].text);
    close_statement(id, last);
    return id;
  }

  const SourceInput& input_;
  std::vector<Token> toks_;
  DesignModel& design_;
  std::size_t pos_ = 0;
  ModuleDef* module_ = nullptr;
  std::vector<std::string> pending_ports_;
  std::set<std::string> declared_ports_;
};

std::optional<int> width_of(const std::string& range_text, const ParameterTable& params) {
  if (range_text.empty()) return 1;
  // "[msb:lsb]"
  std::string inner = range_text.substr(1, range_text.size() - 2);
  int depth = 0;
  std::size_t colon = std::string::npos;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i] == '(' || inner[i] == '[') ++depth;
    if (inner[i] == ')' || inner[i] == ']') --depth;
    if (inner[i] == ':' && depth == 0) {
      colon = i;
      break;
    }
  }
  if (colon == std::string::npos) return std::nullopt;
  auto msb = evaluate_constant(inner.substr(0, colon), params);
  auto lsb = evaluate_constant(inner.substr(colon + 1), params);
  if (!msb || !lsb) return std::nullopt;
  long long w = (*msb > *lsb ? *msb - *lsb : *lsb - *msb) + 1;
  return static_cast<int>(w);
}

void finalize(DesignModel& design) {
  std::map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < design.modules.size(); ++i) {
    auto [it, inserted] = by_name.emplace(design.modules[i].name, i);
    if (!inserted) {
      throw Error(ErrorCode::SyntaxError, "module '" + design.modules[i].name + "' defined twice",
                  ErrorLocation{design.modules[i].file, design.modules[i].span.line_start});
    }
  }

  for (auto& mod : design.modules) {
    // constants evaluated in declaration order
    ParameterTable params;
    for (auto& p : mod.parameters) {
      p.value = evaluate_constant(p.value_text, params);
      if (p.value) params[p.name] = *p.value;
    }
    for (auto& port : mod.ports) port.width = width_of(port.range_text, params);
    for (auto& sig : mod.signals) {
      sig.width = sig.net_type == "integer" && sig.range_text.empty()
                      ? std::optional<int>(32)
                      : width_of(sig.range_text, params);
    }

    for (auto& inst : mod.instances) {
      auto child_it = by_name.find(inst.child_module);
      const ModuleDef* child = child_it == by_name.end() ? nullptr : &design.modules[child_it->second];
      if (!child) design.black_boxes.insert(inst.child_module);
      for (auto& b : inst.bindings) {
        Statement& s = design.statements[b.statement];
        if (b.positional) {
          std::size_t index = std::stoul(b.formal.substr(1));
          if (child && index < child->ports.size()) {
            b.formal = child->ports[index].name;
          } else if (child) {
            throw Error(ErrorCode::SyntaxError,
                        "instance '" + inst.instance_name + "' has more connections than module '" +
                            child->name + "' has ports",
                        ErrorLocation{mod.file, s.span.line_start});
          } else {
            b.formal.clear();
          }
          s.header = b.formal;
        }
        const PortDecl* port = child ? child->find_port(b.formal) : nullptr;
        std::set<SignalRef> refs(b.actuals.begin(), b.actuals.end());
        if (port && port->direction == PortDirection::Output) {
          s.writes = refs;
        } else if (port && port->direction == PortDirection::Inout) {
          s.writes = refs;
          s.reads = refs;
        } else {
          s.reads = refs;
        }
      }
    }

    for (StatementId id : mod.statements) {
      Statement& s = design.statements[id];
      std::erase_if(s.reads, [&](const SignalRef& r) { return mod.constants.count(r.signal_name) > 0; });
      std::erase_if(s.writes, [&](const SignalRef& r) { return mod.constants.count(r.signal_name) > 0; });
      std::erase_if(s.sensitivity, [&](const SensitivityItem& r) { return mod.constants.count(r.signal) > 0; });
    }
    for (auto& inst : mod.instances) {
      for (auto& b : inst.bindings) {
        std::erase_if(b.actuals, [&](const SignalRef& r) { return mod.constants.count(r.signal_name) > 0; });
      }
    }
  }

  // children always carry larger ids than their parents
  for (auto it = design.statements.rbegin(); it != design.statements.rend(); ++it) {
    if (it->parent_id) {
      Statement& parent = design.statements[*it->parent_id];
      parent.writes.insert(it->writes.begin(), it->writes.end());
    }
  }
}

}  // namespace

DesignModel parse_sources(const std::vector<SourceInput>& sources, std::string_view top) {
  DesignModel design;
  for (const auto& src : sources) {
    FileParser parser(src, detail::tokenize(src.text, src.path), design);
    parser.run();
  }
  finalize(design);
  if (!top.empty()) {
    if (!design.find_module(top)) {
      throw Error(ErrorCode::TopModuleNotFound,
                  "top module '" + std::string(top) + "' is not defined in the design");
    }
    design.top_module = std::string(top);
  }
  return design;
}

DesignModel parse_design(const std::vector<std::filesystem::path>& file_paths,
                         std::string_view top) {
  if (top.empty()) throw Error(ErrorCode::InvalidArgument, "top module name is empty");
  std::vector<SourceInput> sources;
  for (const auto& path : file_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotReadable, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    sources.push_back({path.string(), ss.str()});
  }
  if (sources.empty()) {
    throw Error(ErrorCode::TopModuleNotFound,
                "top module '" + std::string(top) + "' not found: no design files given");
  }
  return parse_sources(sources, top);
}

std::vector<std::string> scan_identifiers(std::string_view expression) {
  auto toks = detail::tokenize(expression, "<expression>");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != TokenKind::Identifier) continue;
    if (i > 0 && toks[i - 1].is(".")) continue;
    if (i + 1 < toks.size() && (toks[i + 1].is("(") || toks[i + 1].is("."))) continue;
    if (seen.insert(std::string(t.text)).second) out.emplace_back(t.text);
  }
  return out;
}

}  // namespace uvmarvel
