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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "llsc/sched.hpp"
#include "llsc/tamper.hpp"

namespace llsc {

struct Expectations {
  std::map<std::string, std::uint32_t> memory;
  std::optional<std::size_t> violations;
  friend bool operator==(const Expectations&, const Expectations&) = default;
};

/// A self-contained experiment: which program, how many threads, how they
/// are scheduled, which registers get tampered with, and optionally what the
/// run must produce. Stored as JSON (see README for the schema).
struct Scenario {
  std::string program;  // path as written in the file; informational for `run`
  std::size_t threads = 1;
  ExecutionMode mode = ExecutionMode::Hardware;
  bool clrex_on_switch = false;
  std::map<std::string, std::uint32_t> overrides;
  std::optional<ScheduleScript> script;  // empty script when neither is set
  std::optional<RandomSchedule> random;
  std::vector<TamperSpec> tampers;
  std::optional<Expectations> expect;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::string& path);
std::string format_scenario(const Scenario& scenario);

/// Checks that threads, symbols and tamper locations resolve against
/// `program`. Throws ScenarioError.
void validate_scenario(const Scenario& scenario, const Program& program);

RunResult run_scenario(const Scenario& scenario, std::shared_ptr<const Program> program,
                       const RunOptions& options = {});

/// Copy of the scenario without tampers (the A/B control run).
Scenario without_tampers(Scenario scenario);

struct ExpectationCheck {
  bool met = true;
  std::vector<std::string> mismatches;
};

ExpectationCheck check_expectations(const Expectations& expect, const RunResult& result);

}  // namespace llsc
