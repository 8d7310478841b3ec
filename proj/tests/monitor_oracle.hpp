// SPDX-License-Identifier: Apache-2.0
// Independent oracle for exclusive-monitor soundness. It rebuilds each
// thread's reservation from the instructions retired so far and never reads
// the machine's own monitor state.
#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>

#include "llsc/machine.hpp"

namespace llsc::testing {

// Straight-line body over two words a (R1) and b (R2). Stored values come from R5.
inline const char* const kMonitorPool[] = {
    "LDREX R3, [R1]", "LDREX R3, [R2]", "STREX R4, R5, [R1]", "STREX R4, R5, [R2]",
    "STR R5, [R1]",   "STR R5, [R2]",   "CLREX",              "ADD R5, R5, #1",
    "LDR R6, [R1]",   "NOP",
};

inline std::string random_monitor_program(std::mt19937_64& rng) {
  std::string text = ".data a 0\n.data b 0\nLDR R1, =a\nLDR R2, =b\nMOV R5, #10\n";
  const std::size_t n = 4 + rng() % 12;
  for (std::size_t i = 0; i < n; ++i) {
    // Bias towards LDREX/STREX so pairs are common.
    const std::size_t pick = rng() % 3 == 0 ? rng() % 4 : rng() % std::size(kMonitorPool);
    text += kMonitorPool[pick];
    text += '\n';
  }
  return text;
}

/// Runs one random 2-thread case in Hardware mode. Returns a description of
/// the first counterexample, or nullopt if both soundness properties held.
inline std::optional<std::string> check_monitor_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto program = std::make_shared<const Program>(parse_program(random_monitor_program(rng)));
  MachineState m = init_machine(program, 2, ExecutionMode::Hardware);

  struct Reservation {
    std::optional<std::uint32_t> address;
    std::uint64_t since = 0;  // global store count at the LDREX
  };
  std::map<std::size_t, Reservation> held;
  std::map<std::uint32_t, std::uint64_t> last_store;  // address -> store ordinal
  std::uint64_t stores = 0;

  auto fail = [&](const std::string& what, std::size_t tid, std::size_t pc) {
    return "seed " + std::to_string(seed) + ", thread " + std::to_string(tid) + ", pc " + std::to_string(pc) +
           ": " + what;
  };

  while (m.any_runnable()) {
    std::size_t tid = 1 + rng() % 2;
    if (!m.thread(tid).status.runnable()) tid = 3 - tid;
    const std::size_t pc = m.thread(tid).pc;
    const Instruction insn = program->instructions[pc];
    const auto& regs = m.thread(tid).regs;
    auto& r = held[tid];

    bool expect_success = false;
    std::uint32_t addr = 0, value = 0;
    if (insn.opcode == Opcode::Strex) {
      addr = regs[insn.reg(2).id];
      value = regs[insn.reg(1).id];
      const auto it = last_store.find(addr);
      const bool touched = it != last_store.end() && it->second > r.since;
      expect_success = r.address == addr && !touched;
    }
    const auto memory_before = m.memory;

    StepOutcome out = step(m, tid);
    if (out.executed.size() != 1) return fail("expected one retired instruction", tid, pc);

    switch (insn.opcode) {
      case Opcode::Ldrex:
        r.address = m.thread(tid).regs[insn.reg(1).id];
        r.since = stores;
        break;
      case Opcode::Clrex:
        r.address.reset();
        break;
      case Opcode::Str:
        last_store[m.thread(tid).regs[insn.reg(1).id]] = ++stores;
        break;
      case Opcode::Strex: {
        const std::uint32_t status = m.thread(tid).regs[insn.reg(0).id];
        const auto& writes = out.events.back().memory_writes;
        if (expect_success) {
          if (status != 0) return fail("STREX failed with an intact reservation", tid, pc);
          if (writes.size() != 1 || writes[0].address != addr) return fail("successful STREX did not store", tid, pc);
          if (m.memory[*m.word_index(addr)] != value) return fail("stored value not visible", tid, pc);
          last_store[addr] = ++stores;
        } else {
          if (status != 1) return fail("STREX succeeded without a valid reservation", tid, pc);
          if (!writes.empty() || m.memory != memory_before) return fail("failed STREX wrote memory", tid, pc);
        }
        r.address.reset();
        if (!m.thread(tid).monitor.is_open()) return fail("monitor not Open after STREX", tid, pc);
        break;
      }
      default:
        break;
    }
    if (!m.thread(tid).status.runnable()) r.address.reset();
  }
  return std::nullopt;
}

}  // namespace llsc::testing
