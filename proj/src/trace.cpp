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

#include "llsc/trace.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include "llsc/json_io.hpp"

namespace llsc {

ordered_json tamper_to_json(const TamperSpec& s) {
  ordered_json j;
  j["thread"] = s.thread_id;
  j["at"] = s.location.to_string();
  if (s.occurrence.nth) {
    j["occurrence"] = *s.occurrence.nth;
  } else {
    j["occurrence"] = "every";
  }
  j["register"] = "R" + std::to_string(s.reg);
  switch (s.action.kind) {
    case TamperAction::Kind::Set:
      j["action"] = "set";
      j["value"] = static_cast<std::int32_t>(s.action.value);
      break;
    case TamperAction::Kind::Add:
      j["action"] = "add";
      j["value"] = static_cast<std::int32_t>(s.action.value);
      break;
    case TamperAction::Kind::FlipBit:
      j["action"] = "flip_bit";
      j["value"] = s.action.value;
      break;
  }
  return j;
}

std::uint8_t register_from_json(const ordered_json& j) {
  if (j.is_number_unsigned()) {
    auto v = j.get<std::uint64_t>();
    if (v < kRegisterCount) return static_cast<std::uint8_t>(v);
  } else if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s.size() >= 2 && (s[0] == 'R' || s[0] == 'r')) {
      try {
        std::size_t used = 0;
        auto v = std::stoul(s.substr(1), &used);
        if (used == s.size() - 1 && v < kRegisterCount) return static_cast<std::uint8_t>(v);
      } catch (const std::exception&) {
      }
    }
  }
  throw std::invalid_argument("bad register " + j.dump() + " (expected R0..R12)");
}

namespace {

std::uint32_t word_from_json(const ordered_json& j, const char* what) {
  if (j.is_number_integer()) {
    auto v = j.get<std::int64_t>();
    if (v >= -2147483648LL && v <= 4294967295LL) return static_cast<std::uint32_t>(v);
  }
  throw std::invalid_argument(std::string("bad ") + what + " " + j.dump());
}

const ordered_json& require(const ordered_json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

TamperSpec tamper_from_json(const ordered_json& j) {
  TamperSpec s;
  const auto& tid = require(j, "thread");
  if (!tid.is_number_unsigned() || tid.get<std::uint64_t>() == 0) {
    throw std::invalid_argument("tamper thread must be a positive integer");
  }
  s.thread_id = tid.get<std::size_t>();
  const auto& at = require(j, "at");
  if (!at.is_string()) throw std::invalid_argument("tamper 'at' must be a string");
  s.location = TamperLocation::parse(at.get<std::string>());
  if (j.contains("occurrence")) {
    const auto& occ = j.at("occurrence");
    if (occ.is_string() && occ.get<std::string>() == "every") {
      s.occurrence = Occurrence::every();
    } else if (occ.is_number_unsigned() && occ.get<std::uint64_t>() >= 1) {
      s.occurrence = Occurrence::at(occ.get<std::uint64_t>());
    } else {
      throw std::invalid_argument("tamper occurrence must be a positive integer or \"every\"");
    }
  }
  s.reg = register_from_json(require(j, "register"));
  const auto& action = require(j, "action");
  const std::string name = action.is_string() ? action.get<std::string>() : "";
  if (name == "set") {
    s.action = {TamperAction::Kind::Set, word_from_json(require(j, "value"), "tamper value")};
  } else if (name == "add") {
    s.action = {TamperAction::Kind::Add, word_from_json(require(j, "value"), "tamper value")};
  } else if (name == "flip_bit") {
    auto bit = word_from_json(require(j, "value"), "bit position");
    if (bit > 31) throw std::invalid_argument("flip_bit position must be 0..31");
    s.action = {TamperAction::Kind::FlipBit, bit};
  } else {
    throw std::invalid_argument("tamper action must be set, add or flip_bit");
  }
  return s;
}

ordered_json entries_to_json(const std::vector<ScheduleEntry>& entries) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : entries) arr.push_back({{"thread", e.thread_id}, {"steps", e.steps}});
  return arr;
}

std::vector<ScheduleEntry> entries_from_json(const ordered_json& j) {
  if (!j.is_array()) throw std::invalid_argument("schedule script must be an array");
  std::vector<ScheduleEntry> out;
  for (const auto& e : j) {
    const auto& t = require(e, "thread");
    const auto& n = require(e, "steps");
    if (!t.is_number_unsigned() || !n.is_number_unsigned()) {
      throw std::invalid_argument("schedule entry fields must be non-negative integers");
    }
    out.push_back({t.get<std::size_t>(), n.get<std::uint64_t>()});
  }
  return out;
}

namespace {

ordered_json schedule_json(const RunProvenance& p) {
  ordered_json s;
  const bool clrex = p.script && p.script->clrex_on_switch;
  if (p.random) {
    s["kind"] = "random";
    s["prng"] = kPrngName;
    s["seed"] = p.random->seed;
    s["max_steps"] = p.random->max_steps;
  } else {
    s["kind"] = "script";
    s["entries"] = entries_to_json(p.script ? p.script->entries : std::vector<ScheduleEntry>{});
    s["halt"] = p.script && p.script->halt;
  }
  s["clrex_on_switch"] = clrex;
  return s;
}

ordered_json tampers_json(const RunProvenance& p) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : p.tampers) arr.push_back(tamper_to_json(t));
  return arr;
}

std::string hex_digest(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string("fnv1a64:") + buf;
}

ordered_json event_json(const TraceEvent& e) {
  ordered_json j;
  j["record"] = "event";
  j["step"] = e.step_index;
  j["sched_step"] = e.sched_step;
  j["kind"] = to_string(e.kind);
  j["thread"] = e.thread_id;
  j["pc"] = e.pc;
  j["label"] = e.label_context;
  if (!e.instruction.empty()) j["insn"] = e.instruction;
  if (!e.register_writes.empty()) {
    auto& arr = j["reg_writes"] = ordered_json::array();
    for (const auto& w : e.register_writes) {
      arr.push_back({{"reg", "R" + std::to_string(w.reg)}, {"old", w.old_value}, {"new", w.new_value}});
    }
  }
  if (!e.memory_writes.empty()) {
    auto& arr = j["mem_writes"] = ordered_json::array();
    for (const auto& w : e.memory_writes) {
      arr.push_back({{"symbol", w.symbol}, {"address", w.address}, {"old", w.old_value}, {"new", w.new_value}});
    }
  }
  if (e.monitor_transition) {
    j["monitor"] = {{"from", e.monitor_transition->from}, {"to", e.monitor_transition->to}};
  }
  if (e.flags) j["flags"] = *e.flags;
  if (e.tamper) j["tamper"] = *e.tamper;
  if (e.violation) {
    j["violation"] = *e.violation;
    j["threads"] = e.violation_threads;
  }
  if (e.fault) j["fault"] = *e.fault;
  return j;
}

}  // namespace

std::string schedule_digest(const RunProvenance& p) {
  ordered_json j;
  j["schedule"] = schedule_json(p);
  j["tampers"] = tampers_json(p);
  return hex_digest(j.dump());
}

void emit_trace(const RunResult& result, std::ostream& out) {
  const auto& p = result.provenance;
  ordered_json h;
  h["record"] = "header";
  h["format"] = kTraceFormat;
  h["version"] = kTraceVersion;
  h["tool"] = kToolVersion;
  h["program_hash"] = p.program_hash;
  h["mode"] = to_string(p.mode);
  h["threads"] = p.thread_count;
  ordered_json init = ordered_json::object();
  for (const auto& [name, value] : p.initial_memory) init[name] = value;
  h["initial_memory"] = init;
  h["schedule"] = schedule_json(p);
  h["tampers"] = tampers_json(p);
  h["schedule_digest"] = schedule_digest(p);
  out << h.dump() << '\n';
  for (const auto& e : result.trace) out << event_json(e).dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("failed to write trace");
}

std::string trace_to_string(const RunResult& result) {
  std::ostringstream os;
  emit_trace(result, os);
  return os.str();
}

RunProvenance read_trace_header(std::string_view header_line) {
  auto h = ordered_json::parse(header_line);
  if (require(h, "record") != "header" || require(h, "format") != kTraceFormat) {
    throw std::invalid_argument("not a trace header");
  }
  RunProvenance p;
  p.program_hash = require(h, "program_hash").get<std::string>();
  auto mode = parse_mode(require(h, "mode").get<std::string>());
  if (!mode) throw std::invalid_argument("bad mode in trace header");
  p.mode = *mode;
  p.thread_count = require(h, "threads").get<std::size_t>();
  for (const auto& [name, value] : require(h, "initial_memory").items()) {
    p.initial_memory.emplace_back(name, value.get<std::uint32_t>());
  }
  const auto& s = require(h, "schedule");
  const bool clrex = require(s, "clrex_on_switch").get<bool>();
  if (require(s, "kind") == "random") {
    p.random = RandomSchedule{require(s, "seed").get<std::uint64_t>(), require(s, "max_steps").get<std::uint64_t>()};
    if (clrex) {
      ScheduleScript flags;
      flags.clrex_on_switch = true;
      p.script = flags;
    }
  } else {
    ScheduleScript script;
    script.entries = entries_from_json(require(s, "entries"));
    script.halt = require(s, "halt").get<bool>();
    script.clrex_on_switch = clrex;
    p.script = script;
  }
  for (const auto& t : require(h, "tampers")) p.tampers.push_back(tamper_from_json(t));
  return p;
}

RunResult replay(const RunProvenance& p, std::shared_ptr<const Program> program) {
  if (program_hash(*program) != p.program_hash) {
    throw std::invalid_argument("program hash " + program_hash(*program) + " does not match trace " +
                                p.program_hash);
  }
  std::map<std::string, std::uint32_t> overrides(p.initial_memory.begin(), p.initial_memory.end());
  MachineState m = init_machine(std::move(program), p.thread_count, p.mode, overrides);
  if (p.random) {
    return run_random(std::move(m), p.random->seed, p.random->max_steps, p.tampers, {},
                      p.script && p.script->clrex_on_switch);
  }
  return run_schedule(std::move(m), p.script.value_or(ScheduleScript{}), p.tampers);
}

std::string Report::headline() const {
  std::string out;
  for (const auto& [name, value] : final_memory) {
    out += name + " = " + std::to_string(value) + "; ";
  }
  out += "violations: " + std::to_string(violation_count);
  return out;
}

std::string Report::to_text() const {
  std::ostringstream os;
  for (const auto& [name, value] : final_memory) os << name << " = " << value << '\n';
  for (std::size_t i = 0; i < thread_statuses.size(); ++i) {
    os << "thread " << (i + 1) << ": " << thread_statuses[i].describe() << '\n';
  }
  os << "steps: " << steps << (truncated ? " (truncated)" : "") << '\n';
  os << headline() << '\n';
  return os.str();
}

Report summarize(const RunResult& result) {
  Report r;
  r.final_memory = result.final_memory;
  r.thread_statuses = result.thread_statuses;
  r.violation_count = result.violations.size();
  r.steps = result.steps_taken;
  r.truncated = result.truncated;
  return r;
}

}  // namespace llsc
