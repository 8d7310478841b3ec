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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llsc/isa.hpp"
#include "llsc/trace_event.hpp"

namespace llsc {

/// Hardware retires one instruction per step. GdbFidelity reproduces a
/// debugger that cannot stop between an LDREX and its STREX: stepping from
/// an LDREX runs the whole window in one step.
enum class ExecutionMode : std::uint8_t { GdbFidelity, Hardware };

std::string_view to_string(ExecutionMode mode);
std::optional<ExecutionMode> parse_mode(std::string_view text);  // "gdb" | "hw"

/// Bytes covered by one reservation.
inline constexpr std::uint32_t kGranuleBytes = 4;

/// Upper bound on instructions retired by one GdbFidelity step.
inline constexpr std::size_t kMaxAtomicRun = 4096;

struct Reservation {
  std::uint32_t granule = 0;
  std::uint64_t observed_version = 0;
  friend bool operator==(const Reservation&, const Reservation&) = default;
};

struct ExclusiveMonitor {
  std::optional<Reservation> reservation;  // nullopt == Open

  bool is_open() const { return !reservation.has_value(); }
  friend bool operator==(const ExclusiveMonitor&, const ExclusiveMonitor&) = default;
};

struct ThreadStatus {
  enum class Kind : std::uint8_t { Runnable, Exited, Faulted };
  Kind kind = Kind::Runnable;
  std::string reason;  // set for Faulted

  bool runnable() const { return kind == Kind::Runnable; }
  std::string describe() const;  // "runnable", "exited", "faulted(bus error)"
  friend bool operator==(const ThreadStatus&, const ThreadStatus&) = default;
};

struct ThreadState {
  std::array<std::uint32_t, kRegisterCount> regs{};
  bool z = false;
  bool n = false;
  std::size_t pc = 0;
  ExclusiveMonitor monitor;
  ThreadStatus status;

  friend bool operator==(const ThreadState&, const ThreadState&) = default;
};

/// Identity on word-aligned addresses.
constexpr std::uint32_t granule(std::uint32_t address) { return address & ~(kGranuleBytes - 1); }

/// Complete simulated machine. Threads are numbered from 1; `threads[0]` is
/// thread 1. Memory holds exactly the `.data` words, in declaration order.
struct MachineState {
  std::shared_ptr<const Program> program;
  std::vector<std::uint32_t> memory;
  std::vector<std::uint64_t> versions;  // per word == per granule
  std::vector<ThreadState> threads;
  std::uint64_t step_count = 0;
  ExecutionMode mode = ExecutionMode::Hardware;
  std::vector<ExclusiveRange> ranges;  // cached program->exclusive_ranges()

  std::size_t thread_count() const { return threads.size(); }
  ThreadState& thread(std::size_t thread_id);
  const ThreadState& thread(std::size_t thread_id) const;

  /// Index of the word at `address`, if it is mapped and word-aligned.
  std::optional<std::size_t> word_index(std::uint32_t address) const;
  std::uint32_t read_symbol(std::string_view symbol) const;

  /// Exclusive range whose interior contains `pc`, if any.
  const ExclusiveRange* interior_range(std::size_t pc) const;
  /// Exclusive range starting at the LDREX at `pc`, if any.
  const ExclusiveRange* range_at(std::size_t pc) const;

  bool any_runnable() const;
  std::string describe_monitor(const ExclusiveMonitor& monitor) const;

  /// Symbol/value pairs in declaration order.
  std::vector<std::pair<std::string, std::uint32_t>> symbol_values() const;
};

struct StepOutcome {
  std::vector<std::pair<std::size_t, Instruction>> executed;
  std::vector<TraceEvent> events;
  ThreadStatus new_status;
};

/// Called immediately before each instruction retires; returns trace events
/// for any register edits it made. Used by the tamper engine.
using PreRetireHook =
    std::function<std::vector<TraceEvent>(MachineState&, std::size_t thread_id, std::size_t pc)>;

/// Throws std::invalid_argument for thread_count == 0 or an override
/// naming an undeclared symbol.
MachineState init_machine(std::shared_ptr<const Program> program, std::size_t thread_count,
                          ExecutionMode mode,
                          const std::map<std::string, std::uint32_t>& overrides = {});

/// Advances one thread by one step (one instruction in Hardware mode, one
/// debugger stop-to-stop step in GdbFidelity mode). A non-Runnable thread
/// is left untouched and the outcome is empty. Throws std::out_of_range for
/// an invalid thread id.
StepOutcome step(MachineState& machine, std::size_t thread_id, const PreRetireHook& hook = {});

}  // namespace llsc
