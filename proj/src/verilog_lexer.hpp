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

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace uvmarvel::detail {

enum class TokenKind {
  Identifier,
  Keyword,
  Number,
  String,
  SystemName,  // $display, $clog2
  Macro,       // `FOO usage
  Punct,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string_view text;
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 1;
  int end_line = 1;

  bool is(std::string_view s) const {
    return (kind == TokenKind::Punct || kind == TokenKind::Keyword) && text == s;
  }
  bool is_keyword(std::string_view s) const {
    return kind == TokenKind::Keyword && text == s;
  }
};

bool is_verilog_keyword(std::string_view word);

/// Tokenizes `source`. Comments, attributes and compiler directive lines are
/// skipped. The returned vector always ends with an End token. Throws
/// Error(SyntaxError) on unterminated comments or strings.
std::vector<Token> tokenize(std::string_view source, std::string_view file_name);

}  // namespace uvmarvel::detail
