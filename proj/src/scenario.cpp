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

#include "llsc/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "llsc/json_io.hpp"

namespace llsc {

namespace {

const std::set<std::string> kTopLevelKeys = {"program", "threads",  "mode",    "clrex_on_switch",
                                             "overrides", "schedule", "tampers", "expect"};

std::uint32_t word(const ordered_json& j, const std::string& what) {
  if (j.is_number_integer()) {
    auto v = j.get<std::int64_t>();
    if (v >= -2147483648LL && v <= 4294967295LL) return static_cast<std::uint32_t>(v);
  }
  throw ScenarioError(what + " must be a 32-bit integer, got " + j.dump());
}

std::map<std::string, std::uint32_t> word_map(const ordered_json& j, const std::string& what) {
  if (!j.is_object()) throw ScenarioError(what + " must be an object");
  std::map<std::string, std::uint32_t> out;
  for (const auto& [k, v] : j.items()) out[k] = word(v, what + "." + k);
  return out;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kTopLevelKeys.count(k)) throw ScenarioError("unknown scenario field '" + k + "'");
  }
  Scenario s;
  try {
    if (j.contains("program")) s.program = j.at("program").get<std::string>();
    if (j.contains("threads")) {
      const auto& t = j.at("threads");
      if (!t.is_number_unsigned() || t.get<std::uint64_t>() == 0) {
        throw ScenarioError("threads must be a positive integer");
      }
      s.threads = t.get<std::size_t>();
    }
    if (j.contains("mode")) {
      auto m = parse_mode(j.at("mode").get<std::string>());
      if (!m) throw ScenarioError("mode must be \"gdb\" or \"hw\"");
      s.mode = *m;
    }
    if (j.contains("clrex_on_switch")) s.clrex_on_switch = j.at("clrex_on_switch").get<bool>();
    if (j.contains("overrides")) s.overrides = word_map(j.at("overrides"), "overrides");
    if (j.contains("schedule")) {
      const auto& sch = j.at("schedule");
      if (!sch.is_object()) throw ScenarioError("schedule must be an object");
      if (sch.contains("random") == sch.contains("script")) {
        throw ScenarioError("schedule needs exactly one of \"script\" or \"random\"");
      }
      if (sch.contains("random")) {
        const auto& r = sch.at("random");
        RandomSchedule rs;
        rs.seed = r.at("seed").get<std::uint64_t>();
        rs.max_steps = r.at("max_steps").get<std::uint64_t>();
        if (rs.max_steps == 0) throw ScenarioError("random.max_steps must be at least 1");
        s.random = rs;
      } else {
        ScheduleScript script;
        script.entries = entries_from_json(sch.at("script"));
        if (sch.contains("halt")) script.halt = sch.at("halt").get<bool>();
        s.script = script;
      }
    }
    if (j.contains("tampers")) {
      if (!j.at("tampers").is_array()) throw ScenarioError("tampers must be an array");
      for (const auto& t : j.at("tampers")) s.tampers.push_back(tamper_from_json(t));
    }
    if (j.contains("expect")) {
      const auto& e = j.at("expect");
      Expectations ex;
      if (e.contains("memory")) ex.memory = word_map(e.at("memory"), "expect.memory");
      if (e.contains("violations")) ex.violations = e.at("violations").get<std::size_t>();
      s.expect = ex;
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("bad scenario: ") + e.what());
  }
  if (s.script) s.script->clrex_on_switch = s.clrex_on_switch;
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

std::string format_scenario(const Scenario& s) {
  ordered_json j;
  if (!s.program.empty()) j["program"] = s.program;
  j["threads"] = s.threads;
  j["mode"] = to_string(s.mode);
  j["clrex_on_switch"] = s.clrex_on_switch;
  j["overrides"] = ordered_json::object();
  for (const auto& [k, v] : s.overrides) j["overrides"][k] = v;
  if (s.random) {
    j["schedule"] = {{"random", {{"seed", s.random->seed}, {"max_steps", s.random->max_steps}}}};
  } else if (s.script) {
    j["schedule"] = {{"script", entries_to_json(s.script->entries)}, {"halt", s.script->halt}};
  }
  j["tampers"] = ordered_json::array();
  for (const auto& t : s.tampers) j["tampers"].push_back(tamper_to_json(t));
  if (s.expect) {
    ordered_json e;
    e["memory"] = ordered_json::object();
    for (const auto& [k, v] : s.expect->memory) e["memory"][k] = v;
    if (s.expect->violations) e["violations"] = *s.expect->violations;
    j["expect"] = e;
  }
  return j.dump(2) + "\n";
}

void validate_scenario(const Scenario& s, const Program& program) {
  for (const auto& [name, value] : s.overrides) {
    if (!program.find_symbol(name)) throw ScenarioError("override names undeclared symbol '" + name + "'");
  }
  if (s.expect) {
    for (const auto& [name, value] : s.expect->memory) {
      if (!program.find_symbol(name)) throw ScenarioError("expectation names undeclared symbol '" + name + "'");
    }
  }
  if (s.script) {
    for (const auto& e : s.script->entries) {
      if (e.thread_id == 0 || e.thread_id > s.threads) {
        throw ScenarioError("schedule names thread " + std::to_string(e.thread_id) + " of " +
                            std::to_string(s.threads));
      }
      if (e.steps == 0) throw ScenarioError("schedule entry step count must be at least 1");
    }
  }
  for (const auto& t : s.tampers) {
    if (t.thread_id > s.threads) {
      throw ScenarioError("tamper names thread " + std::to_string(t.thread_id) + " of " + std::to_string(s.threads));
    }
  }
  try {
    compile_tampers(s.tampers, program, s.mode);
  } catch (const TamperError& e) {
    throw ScenarioError(e.what());
  }
}

RunResult run_scenario(const Scenario& s, std::shared_ptr<const Program> program, const RunOptions& options) {
  validate_scenario(s, *program);
  MachineState m = init_machine(std::move(program), s.threads, s.mode, s.overrides);
  if (s.random) {
    return run_random(std::move(m), s.random->seed, s.random->max_steps, s.tampers, options, s.clrex_on_switch);
  }
  ScheduleScript script = s.script.value_or(ScheduleScript{});
  script.clrex_on_switch = s.clrex_on_switch;
  return run_schedule(std::move(m), script, s.tampers, options);
}

Scenario without_tampers(Scenario scenario) {
  scenario.tampers.clear();
  return scenario;
}

ExpectationCheck check_expectations(const Expectations& expect, const RunResult& result) {
  ExpectationCheck check;
  for (const auto& [name, want] : expect.memory) {
    const auto got = result.final_value(name);
    if (got != want) {
      check.met = false;
      check.mismatches.push_back(name + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
    }
  }
  if (expect.violations && *expect.violations != result.violations.size()) {
    check.met = false;
    check.mismatches.push_back("violations: expected " + std::to_string(*expect.violations) + ", got " +
                               std::to_string(result.violations.size()));
  }
  return check;
}

}  // namespace llsc
