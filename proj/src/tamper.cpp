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

#include "llsc/tamper.hpp"

#include <algorithm>
#include <charconv>

namespace llsc {

TamperLocation TamperLocation::parse(std::string_view text) {
  TamperLocation loc;
  auto plus = text.find('+');
  loc.label = std::string(text.substr(0, plus));
  if (loc.label.empty()) throw TamperError("empty tamper location");
  if (plus != std::string_view::npos) {
    auto digits = text.substr(plus + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), loc.offset);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw TamperError("bad tamper location '" + std::string(text) + "'");
    }
  }
  return loc;
}

std::string TamperLocation::to_string() const {
  return offset == 0 ? label : label + "+" + std::to_string(offset);
}

std::uint32_t TamperAction::apply(std::uint32_t reg) const {
  switch (kind) {
    case Kind::Set: return value;
    case Kind::Add: return reg + value;
    case Kind::FlipBit: return reg ^ (1u << value);
  }
  return reg;
}

std::string TamperAction::describe(std::uint8_t reg) const {
  const std::string r = "R" + std::to_string(reg);
  switch (kind) {
    case Kind::Set: return r + " = " + std::to_string(static_cast<std::int32_t>(value));
    case Kind::Add: return r + " += " + std::to_string(static_cast<std::int32_t>(value));
    case Kind::FlipBit: return r + " ^= bit " + std::to_string(value);
  }
  return r;
}

std::span<const CompiledTampers::Hook> CompiledTampers::hooks_at(std::size_t thread_id,
                                                                 std::size_t pc) const {
  auto it = hooks_.find({thread_id, pc});
  if (it == hooks_.end()) return {};
  return it->second;
}

std::size_t CompiledTampers::max_thread_id() const {
  std::size_t out = 0;
  for (const auto& s : specs_) out = std::max(out, s.thread_id);
  return out;
}

std::size_t resolve_location(const TamperLocation& location, const Program& program) {
  auto base = program.find_label(location.label);
  if (!base) throw TamperError("tamper location names unknown label '" + location.label + "'");
  const std::size_t pc = *base + location.offset;
  if (pc >= program.size()) {
    throw TamperError("tamper location " + location.to_string() + " is past the last instruction");
  }
  return pc;
}

std::optional<std::string> gdb_stop_restriction(const Program& program, std::size_t pc) {
  for (const auto& r : program.exclusive_ranges()) {
    if (r.interior(pc)) {
      return "pc " + std::to_string(pc) + " (" + program.label_context(pc) +
             ") lies inside the exclusive range " + program.label_context(r.ldrex) + ".." +
             program.label_context(r.strex) + " (pc " + std::to_string(r.ldrex) + ".." +
             std::to_string(r.strex) +
             "); a debugger cannot stop between LDREX and STREX, only at the LDREX itself";
    }
  }
  return std::nullopt;
}

CompiledTampers compile_tampers(std::span<const TamperSpec> specs, const Program& program,
                                ExecutionMode mode) {
  CompiledTampers out;
  out.specs_.assign(specs.begin(), specs.end());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (s.thread_id == 0) throw TamperError("tamper thread ids start at 1");
    if (s.reg >= kRegisterCount) throw TamperError("tamper register out of range R0..R12");
    if (s.occurrence.nth && *s.occurrence.nth == 0) throw TamperError("tamper occurrence starts at 1");
    if (s.action.kind == TamperAction::Kind::FlipBit && s.action.value > 31) {
      throw TamperError("flip_bit position must be 0..31");
    }
    const std::size_t pc = resolve_location(s.location, program);
    if (mode == ExecutionMode::GdbFidelity) {
      if (auto why = gdb_stop_restriction(program, pc)) {
        throw TamperError("tamper " + std::to_string(i + 1) + " at " + s.location.to_string() + ": " + *why);
      }
    }
    out.hooks_[{s.thread_id, pc}].push_back({i, s.occurrence, s.reg, s.action});
  }
  return out;
}

std::vector<AppliedTamper> apply_tampers(CompiledTampers& compiled, MachineState& machine,
                                         std::size_t thread_id, std::size_t pc) {
  std::vector<AppliedTamper> applied;
  auto it = compiled.hooks_.find({thread_id, pc});
  if (it == compiled.hooks_.end()) return applied;
  const std::uint64_t arrival = ++compiled.arrivals_[{thread_id, pc}];
  auto& regs = machine.thread(thread_id).regs;
  for (const auto& hook : it->second) {
    if (!hook.occurrence.matches(arrival)) continue;
    AppliedTamper a;
    a.spec_index = hook.spec_index;
    a.thread_id = thread_id;
    a.pc = pc;
    a.arrival = arrival;
    a.reg = hook.reg;
    a.old_value = regs[hook.reg];
    a.new_value = hook.action.apply(a.old_value);
    a.description = hook.action.describe(hook.reg);
    regs[hook.reg] = a.new_value;
    compiled.fire_log_.push_back(a);
    applied.push_back(std::move(a));
  }
  return applied;
}

}  // namespace llsc
