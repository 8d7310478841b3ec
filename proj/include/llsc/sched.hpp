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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "llsc/machine.hpp"
#include "llsc/tamper.hpp"
#include "llsc/trace_event.hpp"

namespace llsc {

struct ScheduleEntry {
  std::size_t thread_id = 1;
  std::uint64_t steps = 1;
  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Which thread steps when. After the entries run out, remaining Runnable
/// threads are stepped round-robin (lowest id first) unless `halt` is set.
struct ScheduleScript {
  std::vector<ScheduleEntry> entries;
  bool halt = false;
  bool clrex_on_switch = false;

  /// One-step-per-entry script, merged into runs; used for explorer witnesses.
  static ScheduleScript from_choices(std::span<const std::size_t> thread_ids, bool halt = true);
  friend bool operator==(const ScheduleScript&, const ScheduleScript&) = default;
};

struct RandomSchedule {
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 0;
  friend bool operator==(const RandomSchedule&, const RandomSchedule&) = default;
};

inline constexpr std::string_view kPrngName = "mt19937_64";

class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string kind;  // "mutual_exclusion"
  std::uint64_t step_index = 0;  // scheduler step after which it was observed
  std::vector<std::size_t> threads;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Everything needed to regenerate a run besides the program text itself.
struct RunProvenance {
  std::string program_hash;
  ExecutionMode mode = ExecutionMode::Hardware;
  std::size_t thread_count = 0;
  std::vector<std::pair<std::string, std::uint32_t>> initial_memory;
  std::optional<ScheduleScript> script;
  std::optional<RandomSchedule> random;
  std::vector<TamperSpec> tampers;
  friend bool operator==(const RunProvenance&, const RunProvenance&) = default;
};

struct RunResult {
  std::vector<std::pair<std::string, std::uint32_t>> final_memory;
  std::vector<ThreadStatus> thread_statuses;
  std::vector<Violation> violations;
  std::vector<TraceEvent> trace;
  std::vector<AppliedTamper> tamper_log;
  std::uint64_t steps_taken = 0;
  bool truncated = false;
  RunProvenance provenance;

  std::uint32_t final_value(std::string_view symbol) const;
  friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct RunOptions {
  bool record_trace = true;
  /// Cap on round-robin completion steps after the script; hitting it sets
  /// `truncated`.
  std::uint64_t completion_limit = 1'000'000;
};

/// Single-threaded stepping engine shared by every driver (scripted,
/// random, interactive). Owns the machine, the tamper hooks, the trace and
/// the violation tracker.
class Engine {
 public:
  Engine(MachineState machine, CompiledTampers tampers = {}, bool clrex_on_switch = false,
         bool record_trace = true);

  /// One scheduler step of `thread_id`; a non-Runnable thread yields a
  /// recorded no-op.
  StepOutcome step(std::size_t thread_id);

  /// Applies a register edit to `thread_id` at its current stop, outside
  /// the hook mechanism. Returns the recorded application.
  AppliedTamper edit_register(std::size_t thread_id, std::uint8_t reg, const TamperAction& action);

  const MachineState& machine() const { return machine_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  const std::vector<Violation>& violations() const { return violations_; }
  const std::vector<AppliedTamper>& tamper_log() const { return tamper_log_; }
  std::uint64_t steps_taken() const { return steps_; }
  const std::vector<std::pair<std::string, std::uint32_t>>& initial_memory() const { return initial_; }

  /// Threads currently inside a `critical` region.
  std::vector<std::size_t> critical_occupants() const;

  RunResult result(RunProvenance provenance, bool truncated) const;

 private:
  void append(TraceEvent ev);
  void check_invariants(std::size_t thread_id);

  MachineState machine_;
  CompiledTampers tampers_;
  bool clrex_on_switch_;
  bool record_trace_;
  std::vector<Region> critical_;
  std::vector<std::pair<std::string, std::uint32_t>> initial_;
  std::vector<TraceEvent> trace_;
  std::vector<Violation> violations_;
  std::vector<AppliedTamper> tamper_log_;
  std::uint64_t steps_ = 0;
  std::uint64_t next_event_ = 0;
  std::size_t last_thread_ = 0;
  std::size_t occupancy_ = 0;
};

/// Throws ScheduleError for invalid thread ids or zero step counts, and
/// TamperError if a tamper cannot be compiled for the machine's mode; both
/// before any step runs.
RunResult run_schedule(MachineState machine, const ScheduleScript& script,
                       std::span<const TamperSpec> tampers = {}, const RunOptions& options = {});

/// Picks a Runnable thread uniformly per step with mt19937_64(seed). Hitting
/// `max_steps` sets `truncated`.
RunResult run_random(MachineState machine, std::uint64_t seed, std::uint64_t max_steps,
                     std::span<const TamperSpec> tampers = {}, const RunOptions& options = {},
                     bool clrex_on_switch = false);

struct ExploreBounds {
  std::uint64_t max_steps = 10'000;     // depth of any one schedule
  std::uint64_t max_states = 2'000'000;  // distinct machine states
};

struct FinalState {
  std::vector<std::pair<std::string, std::uint32_t>> memory;
  std::vector<std::size_t> witness;  // thread id per Hardware step
};

struct ViolationWitness {
  std::vector<std::size_t> threads;
  std::vector<std::size_t> witness;
};

struct ExploreReport {
  std::vector<FinalState> final_states;  // sorted by memory, distinct
  std::uint64_t schedules_explored = 0;  // DFS leaves: terminal, memoised or cut
  std::uint64_t states_visited = 0;
  std::vector<ViolationWitness> mutual_exclusion_violations;
  bool truncated = false;

  std::set<std::uint32_t> final_values(std::string_view symbol) const;
};

/// Depth-first enumeration of every Hardware-mode interleaving with
/// memoisation on the full machine state.
ExploreReport explore(std::shared_ptr<const Program> program, std::size_t thread_count,
                      const ExploreBounds& bounds = {},
                      const std::map<std::string, std::uint32_t>& overrides = {});

/// Byte encoding of everything that determines future behaviour: registers,
/// flags, pcs, statuses, monitors, memory and versions. Step counters are
/// excluded.
std::string encode_state(const MachineState& machine);

}  // namespace llsc
