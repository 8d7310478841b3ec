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

#include "llsc/debugger.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include "llsc/trace.hpp"

namespace llsc {

namespace {

constexpr std::uint64_t kContinueLimit = 1'000'000;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::pair<std::string_view, std::string_view> split_word(std::string_view s) {
  s = trim(s);
  auto sp = s.find_first_of(" \t");
  if (sp == std::string_view::npos) return {s, {}};
  return {s.substr(0, sp), trim(s.substr(sp + 1))};
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::string text(trim(s));
  if (text.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    auto v = std::stoll(text, &used, 0);
    if (used != text.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

// Nearest label at or before pc, as a tamper location.
std::optional<TamperLocation> location_of(const Program& p, std::size_t pc) {
  const Label* best = nullptr;
  for (const auto& l : p.labels) {
    if (l.index <= pc && (best == nullptr || l.index >= best->index)) best = &l;
  }
  if (best == nullptr) return std::nullopt;
  return TamperLocation{best->name, pc - best->index};
}

}  // namespace

Debugger::Debugger(std::shared_ptr<const Program> program, std::string program_path, std::size_t threads,
                   ExecutionMode mode, std::ostream& out)
    : program_(program),
      program_path_(std::move(program_path)),
      mode_(mode),
      out_(out),
      engine_(init_machine(program, threads, mode)) {}

void Debugger::run(std::istream& in, bool prompt) {
  std::string line;
  while (true) {
    if (prompt) out_ << "(llsc) " << std::flush;
    if (!std::getline(in, line)) break;
    if (!execute(line)) return;
  }
  flush_trace();
}

bool Debugger::execute(std::string_view line) {
  auto [cmd, rest] = split_word(line);
  if (cmd.empty()) return true;
  try {
    if (cmd == "quit" || cmd == "q") {
      flush_trace();
      return false;
    } else if (cmd == "thread") {
      cmd_thread(rest);
    } else if (cmd == "step" || cmd == "s" || cmd == "stepi" || cmd == "si") {
      cmd_step(rest);
    } else if (cmd == "set") {
      cmd_set(rest);
    } else if (cmd == "info" || cmd == "i") {
      cmd_info(rest);
    } else if (cmd == "x") {
      cmd_examine(rest);
    } else if (cmd == "break" || cmd == "b") {
      cmd_break(rest);
    } else if (cmd == "delete") {
      breakpoints_.clear();
      out_ << "Deleted all breakpoints.\n";
    } else if (cmd == "continue" || cmd == "c") {
      cmd_continue();
    } else if (cmd == "trace") {
      cmd_trace(rest);
    } else if (cmd == "export") {
      cmd_export(rest);
    } else if (cmd == "help") {
      help();
    } else {
      out_ << "Undefined command: \"" << cmd << "\".\n";
      help();
    }
  } catch (const std::exception& e) {
    out_ << "error: " << e.what() << '\n';
  }
  return true;
}

void Debugger::help() {
  out_ << "Commands:\n"
          "  thread <n>                     switch focus to thread n\n"
          "  step [k]                       step the focused thread k times\n"
          "  set $R<j> = v | set $R<j> += v edit a register of the focused thread\n"
          "  set scheduler-locking step|off step only the focused thread, or all threads\n"
          "  info registers | info threads  show state\n"
          "  x <symbol>                     examine a data word\n"
          "  break <label[+off]> | delete   manage breakpoints\n"
          "  continue                       run round-robin to the next breakpoint\n"
          "  trace on <path> | trace off    write the session trace on quit\n"
          "  export <path>                  save the session as a replayable scenario\n"
          "  quit\n";
}

void Debugger::cmd_thread(std::string_view arg) {
  auto id = parse_int(arg);
  if (!id || *id < 1 || static_cast<std::size_t>(*id) > engine_.machine().thread_count()) {
    out_ << "Invalid thread ID: " << arg << '\n';
    return;
  }
  focus_ = static_cast<std::size_t>(*id);
  out_ << "[Switching to thread " << focus_ << "]\n";
  print_stop(focus_);
}

void Debugger::do_step(std::size_t tid, bool verbose) {
  const std::size_t before = engine_.violations().size();
  StepOutcome outcome = engine_.step(tid);
  choices_.push_back(tid);
  for (const auto& [pc, insn] : outcome.executed) {
    ++arrivals_[{tid, pc}];
    if (verbose) out_ << "    " << std::setw(3) << pc << "  " << format_instruction(insn) << '\n';
  }
  for (const auto& ev : outcome.events) {
    if (ev.fault) out_ << "Thread " << tid << " received fault: " << *ev.fault << '\n';
  }
  for (std::size_t i = before; i < engine_.violations().size(); ++i) {
    out_ << "!! mutual exclusion violated: threads";
    for (auto t : engine_.violations()[i].threads) out_ << ' ' << t;
    out_ << " are all inside the critical region\n";
  }
}

void Debugger::cmd_step(std::string_view arg) {
  std::int64_t count = 1;
  if (!trim(arg).empty()) {
    auto v = parse_int(arg);
    if (!v || *v < 1) {
      out_ << "step count must be a positive integer\n";
      return;
    }
    count = *v;
  }
  const std::size_t n = engine_.machine().thread_count();
  for (std::int64_t i = 0; i < count; ++i) {
    if (!engine_.machine().thread(focus_).status.runnable()) {
      out_ << "Thread " << focus_ << " is " << engine_.machine().thread(focus_).status.describe() << ".\n";
      break;
    }
    do_step(focus_, true);
    if (!scheduler_locking_) {
      for (std::size_t tid = 1; tid <= n; ++tid) {
        if (tid != focus_ && engine_.machine().thread(tid).status.runnable()) do_step(tid, false);
      }
    }
  }
  print_stop(focus_);
  print_summary_if_done();
}

void Debugger::cmd_set(std::string_view arg) {
  auto [what, rest] = split_word(arg);
  if (what == "scheduler-locking") {
    if (rest == "step" || rest == "on") {
      scheduler_locking_ = true;
    } else if (rest == "off") {
      scheduler_locking_ = false;
    } else {
      out_ << "scheduler-locking must be 'step' or 'off'\n";
      return;
    }
    out_ << "scheduler-locking " << (scheduler_locking_ ? "step" : "off") << '\n';
    return;
  }
  static const std::regex re(R"(^\s*\$[Rr](\d+)\s*(\+=|-=|=)\s*(\S+)\s*$)");
  std::cmatch m;
  const std::string text(arg);
  if (!std::regex_match(text.c_str(), m, re)) {
    out_ << "usage: set $R<j> = <value> | set $R<j> += <delta> | set scheduler-locking step|off\n";
    return;
  }
  auto reg = parse_int(m[1].str());
  auto value = parse_int(m[3].str());
  if (!reg || *reg < 0 || *reg >= static_cast<std::int64_t>(kRegisterCount)) {
    out_ << "Invalid register R" << m[1].str() << " (R0..R12)\n";
    return;
  }
  if (!value) {
    out_ << "Invalid value '" << m[3].str() << "'\n";
    return;
  }
  const auto& t = engine_.machine().thread(focus_);
  if (!t.status.runnable()) {
    out_ << "Thread " << focus_ << " is " << t.status.describe() << "; nothing to modify.\n";
    return;
  }
  if (mode_ == ExecutionMode::GdbFidelity) {
    if (auto why = gdb_stop_restriction(*program_, t.pc)) {
      out_ << "Refusing to modify R" << *reg << ": " << *why << ".\n";
      return;
    }
  }
  auto loc = location_of(*program_, t.pc);
  if (!loc) {
    out_ << "Refusing to modify registers: pc " << t.pc << " has no preceding label to anchor the edit\n";
    return;
  }
  TamperAction action;
  const auto op = m[2].str();
  if (op == "=") {
    action = {TamperAction::Kind::Set, static_cast<std::uint32_t>(*value)};
  } else {
    const std::int64_t delta = op == "+=" ? *value : -*value;
    action = {TamperAction::Kind::Add, static_cast<std::uint32_t>(delta)};
  }
  const auto reg_id = static_cast<std::uint8_t>(*reg);
  auto applied = engine_.edit_register(focus_, reg_id, action);
  TamperSpec spec;
  spec.thread_id = focus_;
  spec.location = *loc;
  spec.occurrence = Occurrence::at(arrivals_[{focus_, t.pc}] + 1);
  spec.reg = reg_id;
  spec.action = action;
  tampers_.push_back(spec);
  out_ << "R" << int(reg_id) << ": " << applied.old_value << " -> " << applied.new_value << '\n';
}

void Debugger::cmd_info(std::string_view arg) {
  const auto& m = engine_.machine();
  if (arg == "registers" || arg == "reg" || arg == "r") {
    const auto& t = m.thread(focus_);
    for (std::size_t r = 0; r < kRegisterCount; ++r) {
      out_ << std::left << std::setw(6) << ("R" + std::to_string(r)) << std::setw(12) << hex(t.regs[r])
           << static_cast<std::int32_t>(t.regs[r]) << '\n';
    }
    out_ << std::left << std::setw(6) << "flags" << "Z=" << t.z << " N=" << t.n << '\n';
    out_ << std::left << std::setw(6) << "pc" << t.pc << " <" << program_->label_context(t.pc) << ">\n";
    out_ << std::left << std::setw(6) << "mon" << m.describe_monitor(t.monitor) << '\n';
    out_ << std::right;
  } else if (arg == "threads") {
    out_ << "  Id   Status       PC   Location             Instruction\n";
    for (std::size_t tid = 1; tid <= m.thread_count(); ++tid) {
      const auto& t = m.thread(tid);
      std::string insn = t.pc < program_->size() ? format_instruction(program_->instructions[t.pc]) : "";
      out_ << (tid == focus_ ? "* " : "  ") << std::left << std::setw(5) << tid << std::setw(13)
           << t.status.describe() << std::setw(5) << t.pc << std::setw(21) << program_->label_context(t.pc)
           << insn << '\n';
    }
    out_ << std::right;
  } else if (arg == "breakpoints") {
    if (breakpoints_.empty()) out_ << "No breakpoints.\n";
    for (auto pc : breakpoints_) out_ << "breakpoint at pc " << pc << " <" << program_->label_context(pc) << ">\n";
  } else {
    out_ << "info registers | info threads | info breakpoints\n";
  }
}

void Debugger::cmd_examine(std::string_view arg) {
  std::string name(trim(arg));
  if (name.rfind("&", 0) == 0) name.erase(0, 1);
  auto idx = program_->find_symbol(name);
  if (!idx) {
    out_ << "No symbol \"" << name << "\" in current program.\n";
    return;
  }
  const auto addr = program_->address_of(*idx);
  out_ << name << " (" << hex(addr) << ") = " << engine_.machine().memory[*idx] << '\n';
}

void Debugger::cmd_break(std::string_view arg) {
  auto loc = TamperLocation::parse(trim(arg));
  const std::size_t pc = resolve_location(loc, *program_);
  breakpoints_.insert(pc);
  out_ << "Breakpoint at pc " << pc << " <" << program_->label_context(pc) << ">\n";
}

void Debugger::cmd_continue() {
  const auto& m = engine_.machine();
  const std::size_t n = m.thread_count();
  std::set<std::size_t> leaving;  // threads currently sitting on a breakpoint
  for (std::size_t tid = 1; tid <= n; ++tid) {
    if (breakpoints_.count(m.thread(tid).pc)) leaving.insert(tid);
  }
  std::uint64_t used = 0;
  while (m.any_runnable()) {
    for (std::size_t tid = 1; tid <= n; ++tid) {
      const auto& t = m.thread(tid);
      if (!t.status.runnable()) continue;
      if (breakpoints_.count(t.pc) && !leaving.count(tid)) {
        focus_ = tid;
        out_ << "Thread " << tid << " hit breakpoint at <" << program_->label_context(t.pc) << ">\n";
        print_stop(tid);
        return;
      }
      if (used == kContinueLimit) {
        out_ << "Stopped after " << kContinueLimit << " steps without reaching a breakpoint.\n";
        return;
      }
      do_step(tid, false);
      leaving.erase(tid);
      ++used;
    }
  }
  print_summary_if_done();
}

void Debugger::cmd_trace(std::string_view arg) {
  auto [what, path] = split_word(arg);
  if (what == "on" && !path.empty()) {
    trace_path_ = std::string(path);
    out_ << "Trace will be written to " << path << " on quit.\n";
  } else if (what == "off") {
    trace_path_.reset();
    out_ << "Trace disabled.\n";
  } else {
    out_ << "usage: trace on <path> | trace off\n";
  }
}

void Debugger::cmd_export(std::string_view arg) {
  std::string path(trim(arg));
  if (path.empty()) {
    out_ << "usage: export <path>\n";
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << format_scenario(export_scenario());
  if (!f) {
    out_ << "error: cannot write " << path << '\n';
    return;
  }
  out_ << "Session exported to " << path << '\n';
}

Scenario Debugger::export_scenario() const {
  Scenario s;
  s.program = program_path_;
  s.threads = engine_.machine().thread_count();
  s.mode = mode_;
  s.script = ScheduleScript::from_choices(choices_, true);
  s.tampers = tampers_;
  Expectations e;
  for (const auto& [name, value] : engine_.machine().symbol_values()) e.memory[name] = value;
  e.violations = engine_.violations().size();
  s.expect = e;
  return s;
}

RunResult Debugger::session_result() const {
  RunProvenance p;
  p.script = ScheduleScript::from_choices(choices_, true);
  p.tampers = tampers_;
  return engine_.result(std::move(p), false);
}

void Debugger::print_stop(std::size_t tid) {
  const auto& t = engine_.machine().thread(tid);
  if (!t.status.runnable()) {
    out_ << "Thread " << tid << " " << t.status.describe() << ".\n";
    return;
  }
  out_ << "Thread " << tid << " stopped at pc " << t.pc << " <" << program_->label_context(t.pc)
       << ">: " << format_instruction(program_->instructions[t.pc]) << '\n';
}

void Debugger::print_summary_if_done() {
  if (engine_.machine().any_runnable() || finished_reported_) return;
  finished_reported_ = true;
  out_ << "All threads have finished.\n" << summarize(session_result()).headline() << '\n';
}

void Debugger::flush_trace() {
  if (!trace_path_) return;
  std::ofstream f(*trace_path_, std::ios::binary);
  emit_trace(session_result(), f);
  trace_path_.reset();
}

}  // namespace llsc
