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

#include "llsc/sched.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

namespace llsc {

ScheduleScript ScheduleScript::from_choices(std::span<const std::size_t> thread_ids, bool halt) {
  ScheduleScript s;
  s.halt = halt;
  for (auto tid : thread_ids) {
    if (!s.entries.empty() && s.entries.back().thread_id == tid) {
      ++s.entries.back().steps;
    } else {
      s.entries.push_back({tid, 1});
    }
  }
  return s;
}

std::uint32_t RunResult::final_value(std::string_view symbol) const {
  for (const auto& [name, value] : final_memory) {
    if (name == symbol) return value;
  }
  throw std::invalid_argument("unknown symbol '" + std::string(symbol) + "'");
}

Engine::Engine(MachineState machine, CompiledTampers tampers, bool clrex_on_switch, bool record_trace)
    : machine_(std::move(machine)),
      tampers_(std::move(tampers)),
      clrex_on_switch_(clrex_on_switch),
      record_trace_(record_trace),
      critical_(machine_.program->critical_regions()),
      initial_(machine_.symbol_values()) {
  if (tampers_.max_thread_id() > machine_.thread_count()) {
    throw ScheduleError("tamper names thread " + std::to_string(tampers_.max_thread_id()) + " but only " +
                        std::to_string(machine_.thread_count()) + " threads exist");
  }
  check_invariants(0);
}

std::vector<std::size_t> Engine::critical_occupants() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < machine_.threads.size(); ++i) {
    const auto& t = machine_.threads[i];
    if (!t.status.runnable()) continue;
    for (const auto& r : critical_) {
      if (r.contains(t.pc)) {
        out.push_back(i + 1);
        break;
      }
    }
  }
  return out;
}

void Engine::append(TraceEvent ev) {
  ev.step_index = next_event_++;
  ev.sched_step = steps_;
  if (record_trace_) trace_.push_back(std::move(ev));
}

void Engine::check_invariants(std::size_t thread_id) {
  auto occupants = critical_occupants();
  if (occupants.size() >= 2 && occupancy_ < 2) {
    violations_.push_back({"mutual_exclusion", steps_, occupants});
    TraceEvent ev;
    ev.kind = EventKind::Violation;
    ev.thread_id = thread_id;
    if (thread_id != 0) {
      ev.pc = machine_.thread(thread_id).pc;
      ev.label_context = machine_.program->label_context(ev.pc);
    }
    ev.violation = "mutual_exclusion";
    ev.violation_threads = occupants;
    append(std::move(ev));
  }
  occupancy_ = occupants.size();
}

StepOutcome Engine::step(std::size_t thread_id) {
  ThreadState& t = machine_.thread(thread_id);
  ++steps_;
  if (clrex_on_switch_ && last_thread_ != 0 && last_thread_ != thread_id) {
    auto& prev = machine_.thread(last_thread_);
    if (!prev.monitor.is_open()) {
      TraceEvent ev;
      ev.kind = EventKind::Noop;
      ev.thread_id = last_thread_;
      ev.pc = prev.pc;
      ev.label_context = machine_.program->label_context(prev.pc);
      ev.instruction = "context switch (CLREX)";
      ev.monitor_transition = MonitorTransition{machine_.describe_monitor(prev.monitor), "open"};
      prev.monitor.reservation.reset();
      append(std::move(ev));
    }
  }
  last_thread_ = thread_id;

  if (!t.status.runnable()) {
    TraceEvent ev;
    ev.kind = EventKind::Noop;
    ev.thread_id = thread_id;
    ev.pc = t.pc;
    ev.label_context = machine_.program->label_context(t.pc);
    ev.instruction = "(" + t.status.describe() + ")";
    append(std::move(ev));
    StepOutcome out;
    out.new_status = t.status;
    return out;
  }

  PreRetireHook hook;
  if (!tampers_.empty()) {
    hook = [this](MachineState& m, std::size_t tid, std::size_t pc) {
      std::vector<TraceEvent> events;
      for (auto& a : apply_tampers(tampers_, m, tid, pc)) {
        TraceEvent ev;
        ev.kind = EventKind::Tamper;
        ev.thread_id = tid;
        ev.pc = pc;
        ev.label_context = m.program->label_context(pc);
        ev.instruction = format_instruction(m.program->instructions[pc]);
        ev.register_writes.push_back({a.reg, a.old_value, a.new_value});
        ev.tamper = a.description;
        events.push_back(std::move(ev));
        tamper_log_.push_back(std::move(a));
      }
      return events;
    };
  }
  StepOutcome out = llsc::step(machine_, thread_id, hook);
  for (const auto& ev : out.events) append(ev);
  check_invariants(thread_id);
  return out;
}

AppliedTamper Engine::edit_register(std::size_t thread_id, std::uint8_t reg, const TamperAction& action) {
  if (reg >= kRegisterCount) throw TamperError("register out of range R0..R12");
  ThreadState& t = machine_.thread(thread_id);
  AppliedTamper a;
  a.thread_id = thread_id;
  a.pc = t.pc;
  a.reg = reg;
  a.old_value = t.regs[reg];
  a.new_value = action.apply(a.old_value);
  a.description = action.describe(reg);
  t.regs[reg] = a.new_value;

  TraceEvent ev;
  ev.kind = EventKind::Tamper;
  ev.thread_id = thread_id;
  ev.pc = t.pc;
  ev.label_context = machine_.program->label_context(t.pc);
  if (t.pc < machine_.program->size()) ev.instruction = format_instruction(machine_.program->instructions[t.pc]);
  ev.register_writes.push_back({reg, a.old_value, a.new_value});
  ev.tamper = a.description;
  append(std::move(ev));
  tamper_log_.push_back(a);
  return a;
}

RunResult Engine::result(RunProvenance provenance, bool truncated) const {
  RunResult r;
  r.final_memory = machine_.symbol_values();
  for (const auto& t : machine_.threads) r.thread_statuses.push_back(t.status);
  r.violations = violations_;
  r.trace = trace_;
  r.tamper_log = tamper_log_;
  r.steps_taken = steps_;
  r.truncated = truncated;
  provenance.program_hash = program_hash(*machine_.program);
  provenance.mode = machine_.mode;
  provenance.thread_count = machine_.thread_count();
  provenance.initial_memory = initial_;
  r.provenance = std::move(provenance);
  return r;
}

namespace {

// Round-robin completion, lowest Runnable id first. Returns false if the
// limit was hit with threads still Runnable.
bool complete_round_robin(Engine& engine, std::uint64_t limit) {
  std::uint64_t used = 0;
  const std::size_t n = engine.machine().thread_count();
  while (engine.machine().any_runnable()) {
    for (std::size_t tid = 1; tid <= n; ++tid) {
      if (!engine.machine().thread(tid).status.runnable()) continue;
      if (used == limit) return false;
      engine.step(tid);
      ++used;
    }
  }
  return true;
}

}  // namespace

RunResult run_schedule(MachineState machine, const ScheduleScript& script,
                       std::span<const TamperSpec> tampers, const RunOptions& options) {
  for (const auto& e : script.entries) {
    if (e.thread_id == 0 || e.thread_id > machine.thread_count()) {
      throw ScheduleError("schedule names thread " + std::to_string(e.thread_id) + " but only " +
                          std::to_string(machine.thread_count()) + " threads exist");
    }
    if (e.steps == 0) throw ScheduleError("schedule entry step count must be at least 1");
  }
  CompiledTampers compiled = compile_tampers(tampers, *machine.program, machine.mode);
  Engine engine(std::move(machine), std::move(compiled), script.clrex_on_switch, options.record_trace);
  for (const auto& e : script.entries) {
    for (std::uint64_t i = 0; i < e.steps; ++i) engine.step(e.thread_id);
  }
  bool truncated = false;
  if (!script.halt) truncated = !complete_round_robin(engine, options.completion_limit);

  RunProvenance prov;
  prov.script = script;
  prov.tampers.assign(tampers.begin(), tampers.end());
  return engine.result(std::move(prov), truncated);
}

RunResult run_random(MachineState machine, std::uint64_t seed, std::uint64_t max_steps,
                     std::span<const TamperSpec> tampers, const RunOptions& options,
                     bool clrex_on_switch) {
  if (max_steps == 0) throw ScheduleError("max_steps must be at least 1");
  CompiledTampers compiled = compile_tampers(tampers, *machine.program, machine.mode);
  Engine engine(std::move(machine), std::move(compiled), clrex_on_switch, options.record_trace);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> runnable;
  bool truncated = false;
  while (true) {
    runnable.clear();
    const auto& threads = engine.machine().threads;
    for (std::size_t i = 0; i < threads.size(); ++i) {
      if (threads[i].status.runnable()) runnable.push_back(i + 1);
    }
    if (runnable.empty()) break;
    if (engine.steps_taken() == max_steps) {
      truncated = true;
      break;
    }
    engine.step(runnable[rng() % runnable.size()]);
  }
  RunProvenance prov;
  prov.random = RandomSchedule{seed, max_steps};
  if (clrex_on_switch) {
    ScheduleScript flags;
    flags.clrex_on_switch = true;
    prov.script = flags;
  }
  prov.tampers.assign(tampers.begin(), tampers.end());
  return engine.result(std::move(prov), truncated);
}

std::set<std::uint32_t> ExploreReport::final_values(std::string_view symbol) const {
  std::set<std::uint32_t> out;
  for (const auto& f : final_states) {
    for (const auto& [name, value] : f.memory) {
      if (name == symbol) out.insert(value);
    }
  }
  return out;
}

std::string encode_state(const MachineState& m) {
  std::string out;
  auto put = [&out](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  for (const auto& t : m.threads) {
    for (auto r : t.regs) put(r, 4);
    put(static_cast<std::uint64_t>(t.z) | (static_cast<std::uint64_t>(t.n) << 1) |
            (static_cast<std::uint64_t>(t.status.kind) << 2),
        1);
    put(t.pc, 4);
    if (t.monitor.reservation) {
      put(1, 1);
      put(t.monitor.reservation->granule, 4);
      put(t.monitor.reservation->observed_version, 8);
    } else {
      put(0, 1);
    }
  }
  for (auto w : m.memory) put(w, 4);
  for (auto v : m.versions) put(v, 8);
  return out;
}

ExploreReport explore(std::shared_ptr<const Program> program, std::size_t thread_count,
                      const ExploreBounds& bounds, const std::map<std::string, std::uint32_t>& overrides) {
  ExploreReport report;
  const auto critical = program->critical_regions();
  const std::shared_ptr<const Program> prog = program;
  MachineState root = init_machine(std::move(program), thread_count, ExecutionMode::Hardware, overrides);

  std::unordered_map<std::string, std::uint64_t> memo;  // state -> shallowest depth
  std::map<std::vector<std::uint32_t>, std::vector<std::size_t>> finals;
  std::vector<std::size_t> path;
  bool cut = false;

  auto occupants = [&](const MachineState& m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.threads.size(); ++i) {
      if (!m.threads[i].status.runnable()) continue;
      for (const auto& r : critical) {
        if (r.contains(m.threads[i].pc)) {
          out.push_back(i + 1);
          break;
        }
      }
    }
    return out;
  };

  // Returns true if the state should be expanded.
  auto admit = [&](const MachineState& m) -> bool {
    const std::uint64_t depth = path.size();
    if (!m.any_runnable()) {
      ++report.schedules_explored;
      finals.try_emplace(m.memory, path);
      return false;
    }
    std::string key = encode_state(m);
    auto [it, inserted] = memo.try_emplace(std::move(key), depth);
    if (!inserted) {
      if (!cut || it->second <= depth) {
        ++report.schedules_explored;
        return false;
      }
      it->second = depth;
    } else {
      ++report.states_visited;
      if (auto occ = occupants(m); occ.size() >= 2) {
        report.mutual_exclusion_violations.push_back({std::move(occ), path});
      }
    }
    if (memo.size() > bounds.max_states || depth >= bounds.max_steps) {
      report.truncated = true;
      cut = true;
      ++report.schedules_explored;
      return false;
    }
    return true;
  };

  struct Frame {
    MachineState state;
    std::vector<std::size_t> choices;
    std::size_t next = 0;
  };
  auto runnable_ids = [](const MachineState& m) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < m.threads.size(); ++i) {
      if (m.threads[i].status.runnable()) ids.push_back(i + 1);
    }
    return ids;
  };

  std::vector<Frame> stack;
  if (admit(root)) {
    auto ids = runnable_ids(root);
    stack.push_back({std::move(root), std::move(ids)});
  }
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == top.choices.size()) {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const std::size_t tid = top.choices[top.next++];
    MachineState child = top.state;
    step(child, tid);
    path.push_back(tid);
    if (admit(child)) {
      auto ids = runnable_ids(child);
      stack.push_back({std::move(child), std::move(ids)});
    } else {
      path.pop_back();
    }
  }

  for (auto& [memory, witness] : finals) {
    FinalState f;
    for (std::size_t i = 0; i < memory.size(); ++i) f.memory.emplace_back(prog->data[i].name, memory[i]);
    f.witness = std::move(witness);
    report.final_states.push_back(std::move(f));
  }
  return report;
}

}  // namespace llsc
