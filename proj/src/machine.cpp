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

#include "llsc/machine.hpp"

#include <sstream>
#include <stdexcept>

namespace llsc {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Retire: return "retire";
    case EventKind::Tamper: return "tamper";
    case EventKind::Violation: return "violation";
    case EventKind::Noop: return "noop";
  }
  return "?";
}

std::string_view to_string(ExecutionMode mode) {
  return mode == ExecutionMode::GdbFidelity ? "gdb" : "hw";
}

std::optional<ExecutionMode> parse_mode(std::string_view text) {
  if (text == "gdb") return ExecutionMode::GdbFidelity;
  if (text == "hw") return ExecutionMode::Hardware;
  return std::nullopt;
}

std::string ThreadStatus::describe() const {
  switch (kind) {
    case Kind::Runnable: return "runnable";
    case Kind::Exited: return "exited";
    case Kind::Faulted: return "faulted(" + reason + ")";
  }
  return "?";
}

ThreadState& MachineState::thread(std::size_t thread_id) {
  if (thread_id == 0 || thread_id > threads.size()) {
    throw std::out_of_range("no thread " + std::to_string(thread_id));
  }
  return threads[thread_id - 1];
}

const ThreadState& MachineState::thread(std::size_t thread_id) const {
  return const_cast<MachineState&>(*this).thread(thread_id);
}

std::optional<std::size_t> MachineState::word_index(std::uint32_t address) const {
  if (address % kGranuleBytes != 0 || address < kDataBase) return std::nullopt;
  std::size_t idx = (address - kDataBase) / kGranuleBytes;
  if (idx >= memory.size()) return std::nullopt;
  return idx;
}

std::uint32_t MachineState::read_symbol(std::string_view symbol) const {
  auto idx = program->find_symbol(symbol);
  if (!idx) throw std::invalid_argument("unknown symbol '" + std::string(symbol) + "'");
  return memory[*idx];
}

const ExclusiveRange* MachineState::interior_range(std::size_t pc) const {
  for (const auto& r : ranges) {
    if (r.interior(pc)) return &r;
  }
  return nullptr;
}

const ExclusiveRange* MachineState::range_at(std::size_t pc) const {
  for (const auto& r : ranges) {
    if (r.ldrex == pc) return &r;
  }
  return nullptr;
}

bool MachineState::any_runnable() const {
  for (const auto& t : threads) {
    if (t.status.runnable()) return true;
  }
  return false;
}

std::string MachineState::describe_monitor(const ExclusiveMonitor& monitor) const {
  if (monitor.is_open()) return "open";
  const auto& r = *monitor.reservation;
  std::string where;
  if (auto idx = word_index(r.granule)) {
    where = program->data[*idx].name;
  } else {
    std::ostringstream os;
    os << "0x" << std::hex << r.granule;
    where = os.str();
  }
  return "exclusive(" + where + "@" + std::to_string(r.observed_version) + ")";
}

std::vector<std::pair<std::string, std::uint32_t>> MachineState::symbol_values() const {
  std::vector<std::pair<std::string, std::uint32_t>> out;
  for (std::size_t i = 0; i < memory.size(); ++i) out.emplace_back(program->data[i].name, memory[i]);
  return out;
}

MachineState init_machine(std::shared_ptr<const Program> program, std::size_t thread_count,
                          ExecutionMode mode, const std::map<std::string, std::uint32_t>& overrides) {
  if (!program) throw std::invalid_argument("null program");
  if (thread_count == 0) throw std::invalid_argument("thread count must be at least 1");
  MachineState m;
  m.mode = mode;
  m.memory.reserve(program->data.size());
  for (const auto& d : program->data) m.memory.push_back(d.initial);
  m.versions.assign(program->data.size(), 0);
  for (const auto& [name, value] : overrides) {
    auto idx = program->find_symbol(name);
    if (!idx) throw std::invalid_argument("override names undeclared symbol '" + name + "'");
    m.memory[*idx] = value;
  }
  ThreadState t;
  t.pc = program->entry;
  m.threads.assign(thread_count, t);
  m.ranges = program->exclusive_ranges();
  m.program = std::move(program);
  return m;
}

namespace {

class Executor {
 public:
  Executor(MachineState& m, std::size_t thread_id, StepOutcome& out)
      : m_(m), tid_(thread_id), t_(m.thread(thread_id)), out_(out) {}

  // Retires the instruction at the current pc.
  void retire_one() {
    const std::size_t pc = t_.pc;
    const Instruction& insn = m_.program->instructions[pc];
    out_.executed.emplace_back(pc, insn);

    TraceEvent ev;
    ev.kind = EventKind::Retire;
    ev.thread_id = tid_;
    ev.pc = pc;
    ev.label_context = m_.program->label_context(pc);
    ev.instruction = format_instruction(insn);
    event_ = &ev;
    const ExclusiveMonitor before = t_.monitor;
    const bool z0 = t_.z, n0 = t_.n;

    std::size_t next = pc + 1;
    switch (insn.opcode) {
      case Opcode::Mov:
        write_reg(insn.reg(0).id, value_of(insn.operands[1]));
        break;
      case Opcode::LdrAddr:
        write_reg(insn.reg(0).id, m_.program->address_of(std::get<SymbolRef>(insn.operands[1]).index));
        break;
      case Opcode::LdrMem: {
        auto idx = access(insn.reg(1).id);
        if (!idx) break;
        write_reg(insn.reg(0).id, m_.memory[*idx]);
        break;
      }
      case Opcode::Str: {
        auto idx = access(insn.reg(1).id);
        if (!idx) break;
        store(*idx, t_.regs[insn.reg(0).id]);
        break;
      }
      case Opcode::Ldrex: {
        auto idx = access(insn.reg(1).id);
        if (!idx) break;
        write_reg(insn.reg(0).id, m_.memory[*idx]);
        t_.monitor.reservation = Reservation{m_.program->address_of(*idx), m_.versions[*idx]};
        break;
      }
      case Opcode::Strex: {
        auto idx = access(insn.reg(2).id);
        if (!idx) break;
        const std::uint32_t g = granule(m_.program->address_of(*idx));
        const auto& res = t_.monitor.reservation;
        const bool ok = res && res->granule == g && m_.versions[*idx] == res->observed_version;
        if (ok) store(*idx, t_.regs[insn.reg(1).id]);
        write_reg(insn.reg(0).id, ok ? 0u : 1u);
        t_.monitor.reservation.reset();
        break;
      }
      case Opcode::Clrex:
        t_.monitor.reservation.reset();
        break;
      case Opcode::Cmp: {
        const std::uint32_t d = t_.regs[insn.reg(0).id] - value_of(insn.operands[1]);
        t_.z = d == 0;
        t_.n = static_cast<std::int32_t>(d) < 0;
        break;
      }
      case Opcode::Add:
        write_reg(insn.reg(0).id, t_.regs[insn.reg(1).id] + value_of(insn.operands[2]));
        break;
      case Opcode::B:
      case Opcode::Bne:
      case Opcode::Beq: {
        const bool taken = insn.opcode == Opcode::B || (insn.opcode == Opcode::Bne && !t_.z) ||
                           (insn.opcode == Opcode::Beq && t_.z);
        if (taken) next = std::get<LabelRef>(insn.operands[0]).target;
        break;
      }
      case Opcode::Nop:
        break;
    }

    if (t_.status.runnable()) {
      if (next > m_.program->size()) {
        fault("bad branch");
      } else {
        t_.pc = next;
        if (t_.pc == m_.program->size()) {
          t_.status = {ThreadStatus::Kind::Exited, {}};
          t_.monitor.reservation.reset();
        }
      }
    }

    if (t_.z != z0 || t_.n != n0) {
      ev.flags = std::string("Z=") + (t_.z ? "1" : "0") + " N=" + (t_.n ? "1" : "0");
    }
    if (!(t_.monitor == before)) {
      ev.monitor_transition = MonitorTransition{m_.describe_monitor(before), m_.describe_monitor(t_.monitor)};
    }
    event_ = nullptr;
    out_.events.push_back(std::move(ev));
  }

  ThreadState& thread() { return t_; }

 private:
  std::uint32_t value_of(const Operand& op) const {
    if (const auto* r = std::get_if<Reg>(&op)) return t_.regs[r->id];
    return static_cast<std::uint32_t>(std::get<Imm>(op).value);
  }

  void write_reg(std::uint8_t reg, std::uint32_t value) {
    event_->register_writes.push_back({reg, t_.regs[reg], value});
    t_.regs[reg] = value;
  }

  void store(std::size_t idx, std::uint32_t value) {
    event_->memory_writes.push_back(
        {m_.program->data[idx].name, m_.program->address_of(idx), m_.memory[idx], value});
    m_.memory[idx] = value;
    ++m_.versions[idx];
  }

  std::optional<std::size_t> access(std::uint8_t address_reg) {
    auto idx = m_.word_index(t_.regs[address_reg]);
    if (!idx) fault("bus error");
    return idx;
  }

  void fault(std::string reason) {
    event_->fault = reason;
    t_.status = {ThreadStatus::Kind::Faulted, std::move(reason)};
    t_.monitor.reservation.reset();
  }

  MachineState& m_;
  std::size_t tid_;
  ThreadState& t_;
  StepOutcome& out_;
  TraceEvent* event_ = nullptr;
};

}  // namespace

StepOutcome step(MachineState& machine, std::size_t thread_id, const PreRetireHook& hook) {
  StepOutcome out;
  ThreadState& t = machine.thread(thread_id);
  out.new_status = t.status;
  if (!t.status.runnable()) return out;

  Executor exec(machine, thread_id, out);
  auto retire = [&] {
    if (hook) {
      auto tamper_events = hook(machine, thread_id, t.pc);
      for (auto& e : tamper_events) out.events.push_back(std::move(e));
    }
    exec.retire_one();
  };

  const ExclusiveRange* window =
      machine.mode == ExecutionMode::GdbFidelity ? machine.range_at(t.pc) : nullptr;
  if (window == nullptr) {
    retire();
  } else {
    std::size_t retired = 0;
    do {
      retire();
      ++retired;
    } while (t.status.runnable() && t.pc >= window->ldrex && t.pc <= window->strex &&
             retired < kMaxAtomicRun);
  }
  ++machine.step_count;
  out.new_status = t.status;
  return out;
}

}  // namespace llsc
