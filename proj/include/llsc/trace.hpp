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
#include <string>
#include <utility>
#include <vector>

#include "llsc/sched.hpp"

namespace llsc {

inline constexpr std::string_view kTraceFormat = "llsc-trace";
inline constexpr int kTraceVersion = 1;
inline constexpr std::string_view kToolVersion = "llsc 0.1.0";

/// Writes the header line then one JSON record per event. Output is a pure
/// function of the RunResult. Throws std::runtime_error if the stream fails.
void emit_trace(const RunResult& result, std::ostream& out);
std::string trace_to_string(const RunResult& result);

/// Digest over the schedule and tampers of a run.
std::string schedule_digest(const RunProvenance& provenance);

/// Parses the header line of a trace back into the provenance it records.
RunProvenance read_trace_header(std::string_view header_line);

/// Regenerates a run from a trace header and the program it names. Throws
/// std::invalid_argument if the program hash does not match.
RunResult replay(const RunProvenance& provenance, std::shared_ptr<const Program> program);

struct Report {
  std::vector<std::pair<std::string, std::uint32_t>> final_memory;
  std::vector<ThreadStatus> thread_statuses;
  std::size_t violation_count = 0;
  std::uint64_t steps = 0;
  bool truncated = false;

  /// "lockVar = 0; accountBalance = 115; violations: 0"
  std::string headline() const;
  /// Multi-line form: one line per symbol, per thread, then the verdict.
  std::string to_text() const;
};

Report summarize(const RunResult& result);

}  // namespace llsc
