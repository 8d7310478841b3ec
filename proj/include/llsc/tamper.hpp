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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "llsc/isa.hpp"
#include "llsc/machine.hpp"

namespace llsc {

/// `label` or `label+offset`.
struct TamperLocation {
  std::string label;
  std::size_t offset = 0;

  static TamperLocation parse(std::string_view text);  // throws TamperError
  std::string to_string() const;
  friend bool operator==(const TamperLocation&, const TamperLocation&) = default;
};

/// k-th arrival (1-based) or every arrival when `nth` is empty.
struct Occurrence {
  std::optional<std::uint64_t> nth;

  static Occurrence every() { return {}; }
  static Occurrence at(std::uint64_t k) { return {k}; }
  bool matches(std::uint64_t arrival) const { return !nth || *nth == arrival; }
  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

struct TamperAction {
  enum class Kind : std::uint8_t { Set, Add, FlipBit };
  Kind kind = Kind::Set;
  std::uint32_t value = 0;  // value, delta (wrapping), or bit position

  std::uint32_t apply(std::uint32_t reg) const;
  std::string describe(std::uint8_t reg) const;  // "R7 += 1", "R7 = 0", "R7 ^= bit 3"
  friend bool operator==(const TamperAction&, const TamperAction&) = default;
};

struct TamperSpec {
  std::size_t thread_id = 1;
  TamperLocation location;
  Occurrence occurrence = Occurrence::at(1);
  std::uint8_t reg = 0;
  TamperAction action;
  friend bool operator==(const TamperSpec&, const TamperSpec&) = default;
};

struct AppliedTamper {
  std::size_t spec_index = 0;
  std::size_t thread_id = 0;
  std::size_t pc = 0;
  std::uint64_t arrival = 0;
  std::uint8_t reg = 0;
  std::uint32_t old_value = 0;
  std::uint32_t new_value = 0;
  std::string description;
  friend bool operator==(const AppliedTamper&, const AppliedTamper&) = default;
};

class TamperError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hooks keyed by (thread, pc). Immutable after compilation apart from the
/// arrival counters and the fire log.
class CompiledTampers {
 public:
  struct Hook {
    std::size_t spec_index;
    Occurrence occurrence;
    std::uint8_t reg;
    TamperAction action;
  };

  bool empty() const { return hooks_.empty(); }
  const std::vector<AppliedTamper>& fire_log() const { return fire_log_; }
  const std::vector<TamperSpec>& specs() const { return specs_; }
  /// Hooks installed at (thread, pc); empty if none.
  std::span<const Hook> hooks_at(std::size_t thread_id, std::size_t pc) const;
  /// Largest thread id named by any spec (0 when there are none).
  std::size_t max_thread_id() const;

 private:
  friend CompiledTampers compile_tampers(std::span<const TamperSpec>, const Program&, ExecutionMode);
  friend std::vector<AppliedTamper> apply_tampers(CompiledTampers&, MachineState&, std::size_t,
                                                  std::size_t);

  std::vector<TamperSpec> specs_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Hook>> hooks_;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> arrivals_;
  std::vector<AppliedTamper> fire_log_;
};

/// Resolves `location` to a pc; throws TamperError if the label is unknown
/// or the pc lies past the last instruction.
std::size_t resolve_location(const TamperLocation& location, const Program& program);

/// In GdbFidelity mode a hook strictly inside an LDREX..STREX window is
/// rejected: a debugger can never be stopped there.
CompiledTampers compile_tampers(std::span<const TamperSpec> specs, const Program& program,
                                ExecutionMode mode);

/// Fires the hooks for (thread_id, pc), in spec order, and records each
/// application. Only general registers are ever touched.
std::vector<AppliedTamper> apply_tampers(CompiledTampers& compiled, MachineState& machine,
                                         std::size_t thread_id, std::size_t pc);

/// Explains why a register edit at `pc` is illegal in GdbFidelity mode, or
/// nullopt if it is allowed.
std::optional<std::string> gdb_stop_restriction(const Program& program, std::size_t pc);

}  // namespace llsc
