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

#include "llsc/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "llsc/debugger.hpp"
#include "llsc/lint.hpp"
#include "llsc/scenario.hpp"
#include "llsc/trace.hpp"

namespace llsc::cli {

namespace {

std::shared_ptr<const Program> load(const std::string& path) {
  try {
    return std::make_shared<const Program>(load_program(path));
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string render_schedule(const std::vector<std::size_t>& witness) {
  if (witness.empty()) return "(initial state)";
  std::ostringstream os;
  const auto script = ScheduleScript::from_choices(witness);
  for (std::size_t i = 0; i < script.entries.size(); ++i) {
    if (i) os << ' ';
    os << 'T' << script.entries[i].thread_id << 'x' << script.entries[i].steps;
  }
  return os.str();
}

std::string render_memory(const std::vector<std::pair<std::string, std::uint32_t>>& memory) {
  std::string s;
  for (const auto& [name, value] : memory) {
    if (!s.empty()) s += "; ";
    s += name + " = " + std::to_string(value);
  }
  return s;
}

}  // namespace

int cmd_run(const std::string& program_path, const std::string& scenario_path,
            const std::optional<std::string>& trace_path, const Streams& io) {
  RunResult result;
  Scenario scenario;
  try {
    auto program = load(program_path);
    scenario = load_scenario(scenario_path);
    result = run_scenario(scenario, program);
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  }
  io.out << summarize(result).to_text();
  for (const auto& v : result.violations) {
    io.out << "violation: " << v.kind << " after step " << v.step_index << " (threads";
    for (auto t : v.threads) io.out << ' ' << t;
    io.out << ")\n";
  }
  for (const auto& t : result.tamper_log) {
    io.out << "tamper: thread " << t.thread_id << " at pc " << t.pc << ": " << t.description << " ("
           << t.old_value << " -> " << t.new_value << ")\n";
  }
  if (trace_path) {
    std::ofstream f(*trace_path, std::ios::binary);
    if (!f) {
      io.err << "error: cannot write trace '" << *trace_path << "'\n";
      return kUsage;
    }
    emit_trace(result, f);
  }
  if (scenario.expect) {
    const auto check = check_expectations(*scenario.expect, result);
    for (const auto& m : check.mismatches) io.out << "expectation failed: " << m << '\n';
    io.out << (check.met ? "expectations met\n" : "expectations NOT met\n");
    return check.met ? kOk : kMismatch;
  }
  if (!result.violations.empty() || result.truncated) return kMismatch;
  return kOk;
}

int cmd_explore(const std::string& program_path, std::size_t threads, std::uint64_t max_steps,
                std::uint64_t max_states, const Streams& io) {
  if (threads == 0) {
    io.err << "error: --threads must be at least 1\n";
    return kUsage;
  }
  ExploreReport report;
  try {
    report = explore(load(program_path), threads, ExploreBounds{max_steps, max_states});
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  }
  io.out << "threads: " << threads << '\n'
         << "states visited: " << report.states_visited << '\n'
         << "schedules explored: " << report.schedules_explored << '\n'
         << "truncated: " << (report.truncated ? "true" : "false") << '\n'
         << "final states (" << report.final_states.size() << "):\n";
  for (const auto& f : report.final_states) {
    io.out << "  " << render_memory(f.memory) << "\n    witness: " << render_schedule(f.witness) << '\n';
  }
  io.out << "mutual exclusion violations: " << report.mutual_exclusion_violations.size() << '\n';
  constexpr std::size_t kShown = 5;
  for (std::size_t i = 0; i < report.mutual_exclusion_violations.size(); ++i) {
    if (i == kShown) {
      io.out << "  ... " << report.mutual_exclusion_violations.size() - kShown << " more\n";
      break;
    }
    const auto& v = report.mutual_exclusion_violations[i];
    io.out << "  threads";
    for (auto t : v.threads) io.out << ' ' << t;
    io.out << "\n    witness: " << render_schedule(v.witness) << '\n';
  }
  if (report.truncated) return kTruncated;
  if (!report.mutual_exclusion_violations.empty()) return kMismatch;
  return kOk;
}

int cmd_lint(const std::string& program_path, const std::string& format, const Streams& io) {
  std::vector<Finding> findings;
  try {
    findings = lint(*load(program_path));
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  }
  for (const auto& f : findings) {
    io.out << (format == "records" ? format_finding_record(f) : format_finding(f)) << '\n';
  }
  if (format != "records") {
    io.out << findings.size() << (findings.size() == 1 ? " finding\n" : " findings\n");
  }
  return has_errors(findings) ? kLintErrors : kOk;
}

int cmd_debug(const std::string& program_path, std::size_t threads, ExecutionMode mode, bool prompt,
              const Streams& io) {
  if (threads == 0) {
    io.err << "error: --threads must be at least 1\n";
    return kUsage;
  }
  std::shared_ptr<const Program> program;
  try {
    program = load(program_path);
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  }
  Debugger dbg(program, program_path, threads, mode, io.out);
  io.out << "llsc debugger: " << program->size() << " instructions, " << threads << " threads, mode "
         << to_string(mode) << ". Type 'help' for commands.\n";
  dbg.run(io.in, prompt);
  return kOk;
}

int cmd_replay(const std::string& program_path, const std::string& trace_path, const Streams& io) {
  std::string recorded;
  RunResult result;
  try {
    std::ifstream f(trace_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open trace '" + trace_path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    recorded = buf.str();
    const auto header = recorded.substr(0, recorded.find('\n'));
    result = replay(read_trace_header(header), load(program_path));
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  }
  io.out << summarize(result).headline() << '\n';
  if (trace_to_string(result) != recorded) {
    io.out << "replay differs from recorded trace\n";
    return kMismatch;
  }
  io.out << "replay identical to recorded trace\n";
  return kOk;
}

int run_cli(int argc, const char* const* argv, const Streams& io) {
  CLI::App app{"LL/SC spinlock simulator: run, explore, lint and debug ARM-style lock routines", "llsc"};
  app.require_subcommand(1);

  std::string program, scenario, trace, format = "text", mode_text = "gdb";
  std::size_t threads = 2;
  std::uint64_t max_steps = ExploreBounds{}.max_steps;
  std::uint64_t max_states = ExploreBounds{}.max_states;
  bool no_prompt = false;

  auto* run = app.add_subcommand("run", "Run a scenario and print the final state");
  run->add_option("program", program, "Assembly file")->required();
  run->add_option("scenario", scenario, "Scenario file (JSON)")->required();
  run->add_option("--trace", trace, "Write a JSON Lines trace here");

  auto* exp = app.add_subcommand("explore", "Enumerate every interleaving");
  exp->add_option("program", program, "Assembly file")->required();
  exp->add_option("--threads", threads, "Thread count")->capture_default_str();
  exp->add_option("--max-steps", max_steps, "Depth bound per schedule")->capture_default_str();
  exp->add_option("--max-states", max_states, "Distinct state bound")->capture_default_str();

  auto* lnt = app.add_subcommand("lint", "Check a routine against the hardening rules");
  lnt->add_option("program", program, "Assembly file")->required();
  lnt->add_option("--format", format, "text or records")->check(CLI::IsMember({"text", "records"}));

  auto* dbg = app.add_subcommand("debug", "Interactive GDB-style session");
  dbg->add_option("program", program, "Assembly file")->required();
  dbg->add_option("--threads", threads, "Thread count")->capture_default_str();
  dbg->add_option("--mode", mode_text, "gdb or hw")->check(CLI::IsMember({"gdb", "hw"}));
  dbg->add_flag("--no-prompt", no_prompt, "Do not print a prompt (for scripted input)");

  auto* rep = app.add_subcommand("replay", "Regenerate a run from its trace and compare");
  rep->add_option("program", program, "Assembly file")->required();
  rep->add_option("trace", trace, "Trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? kOk : kUsage;
  }

  if (run->parsed()) {
    return cmd_run(program, scenario, trace.empty() ? std::nullopt : std::optional(trace), io);
  }
  if (exp->parsed()) return cmd_explore(program, threads, max_steps, max_states, io);
  if (lnt->parsed()) return cmd_lint(program, format, io);
  if (dbg->parsed()) return cmd_debug(program, threads, *parse_mode(mode_text), !no_prompt, io);
  return cmd_replay(program, trace, io);
}

}  // namespace llsc::cli
