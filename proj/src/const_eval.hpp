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

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace uvmarvel {

using ParameterTable = std::map<std::string, long long, std::less<>>;

/// Evaluates a constant Verilog expression: integer literals (sized or not,
/// without x/z digits), known parameters, + - * / % << >>, unary minus,
/// parentheses and $clog2. Returns nullopt for anything else.
std::optional<long long> evaluate_constant(std::string_view expr, const ParameterTable& params);

}  // namespace uvmarvel
