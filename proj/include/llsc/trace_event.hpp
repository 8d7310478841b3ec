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
#include <vector>

namespace llsc {

struct RegisterWrite {
  std::uint8_t reg = 0;
  std::uint32_t old_value = 0;
  std::uint32_t new_value = 0;
  friend bool operator==(const RegisterWrite&, const RegisterWrite&) = default;
};

struct MemoryWrite {
  std::string symbol;
  std::uint32_t address = 0;
  std::uint32_t old_value = 0;
  std::uint32_t new_value = 0;
  friend bool operator==(const MemoryWrite&, const MemoryWrite&) = default;
};

struct MonitorTransition {
  std::string from;
  std::string to;
  friend bool operator==(const MonitorTransition&, const MonitorTransition&) = default;
};

enum class EventKind : std::uint8_t {
  Retire,     // an instruction retired (or faulted, see `fault`)
  Tamper,     // a register edit was applied before the instruction at `pc`
  Violation,  // a run-level invariant broke after this step
  Noop,       // the scheduler picked a thread that was not Runnable
};

std::string_view to_string(EventKind kind);

/// One line of the trace. `step_index` is the position of the event in its
/// trace; `sched_step` is the scheduler step (one step() call) it belongs to.
struct TraceEvent {
  EventKind kind = EventKind::Retire;
  std::uint64_t step_index = 0;
  std::uint64_t sched_step = 0;
  std::size_t thread_id = 0;
  std::size_t pc = 0;
  std::string label_context;
  std::string instruction;
  std::vector<RegisterWrite> register_writes;
  std::vector<MemoryWrite> memory_writes;
  std::optional<MonitorTransition> monitor_transition;
  std::optional<std::string> flags;  // "Z=1 N=0" when a CMP changed them
  std::optional<std::string> tamper;
  std::optional<std::string> violation;
  std::vector<std::size_t> violation_threads;
  std::optional<std::string> fault;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

}  // namespace llsc
