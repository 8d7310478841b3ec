/*
 * Copyright 2026 The llsc-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llsc/isa.hpp"

namespace llsc {

enum class LintRule : std::uint8_t {
  RegCompare,       // LL/SC result compared against a register, not a constant
  MissingLlBranch,  // LDREX value never tested before its STREX
  MissingScBranch,  // STREX status never tested before leaving the retry loop
  OrphanLdrex,
  OrphanStrex,
};

enum class Severity : std::uint8_t { Warning, Error };

std::string_view to_string(LintRule rule);  // "REG_COMPARE", ...
std::optional<LintRule> parse_rule(std::string_view name);
std::string_view to_string(Severity severity);

struct Finding {
  LintRule rule;
  std::size_t pc = 0;
  std::size_t source_line = 0;
  std::string message;
  Severity severity = Severity::Warning;
  friend bool operator==(const Finding&, const Finding&) = default;
};

/// Syntactic hardening checks over the listing. Findings are sorted by pc;
/// an empty result means the routine conforms.
std::vector<Finding> lint(const Program& program);

/// `line 6 (pc 3): error REG_COMPARE: ...`
std::string format_finding(const Finding& finding);
/// One JSON object per line: {"rule":..,"line":..,"pc":..,"severity":..,"message":..}
std::string format_finding_record(const Finding& finding);

bool has_errors(const std::vector<Finding>& findings);

}  // namespace llsc
