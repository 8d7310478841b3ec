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
#include <iosfwd>
#include <optional>
#include <string>

#include "llsc/machine.hpp"

namespace llsc::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kMismatch = 2,
  kTruncated = 3,
  kLintErrors = 4,
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

int cmd_run(const std::string& program_path, const std::string& scenario_path,
            const std::optional<std::string>& trace_path, const Streams& io);

int cmd_explore(const std::string& program_path, std::size_t threads, std::uint64_t max_steps,
                std::uint64_t max_states, const Streams& io);

int cmd_lint(const std::string& program_path, const std::string& format, const Streams& io);

int cmd_debug(const std::string& program_path, std::size_t threads, ExecutionMode mode, bool prompt,
              const Streams& io);

/// Re-runs the schedule recorded in a trace header and diffs the result
/// against the file byte for byte.
int cmd_replay(const std::string& program_path, const std::string& trace_path, const Streams& io);

/// Full command line, including argv[0].
int run_cli(int argc, const char* const* argv, const Streams& io);

}  // namespace llsc::cli
