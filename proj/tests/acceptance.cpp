// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "llsc/lint.hpp"
#include "llsc/scenario.hpp"
#include "llsc/trace.hpp"
#include "monitor_oracle.hpp"
#include "test_support.hpp"

namespace {

using namespace llsc;
namespace fs = std::filesystem;
using testing::corpus;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string set_str(const std::set<std::uint32_t>& s) {
  std::string out = "{";
  for (auto v : s) out += (out.size() > 1 ? ", " : "") + std::to_string(v);
  return out + "}";
}

Scenario scenario(const std::string& name) { return load_scenario(testing::source_path("scenarios/" + name)); }

Verdict normal_run_value() {
  auto p = corpus("hacker.s");
  std::size_t good = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto m = init_machine(p, 3, ExecutionMode::Hardware, {{"accountBalance", 100}});
    auto r = run_random(std::move(m), seed, 1'000'000, {}, {.record_trace = false});
    good += !r.truncated && r.final_value("accountBalance") == 115;
  }
  auto scripted = run_scenario(scenario("normal3.scn"), p);
  const auto v = scripted.final_value("accountBalance");
  return {good == 50 && v == 115,
          std::to_string(good) + "/50 random seeds at 115; scripted normal schedule " + std::to_string(v)};
}

Verdict attack_replay() {
  auto r = run_scenario(scenario("fig9_attack.scn"), corpus("hacker.s"));
  const auto v = r.final_value("accountBalance");
  return {v == 110 && r.violations.size() == 1,
          "accountBalance " + std::to_string(v) + ", violations " + std::to_string(r.violations.size())};
}

Verdict monitor_soundness() {
  constexpr int kCases = 10'000;
  int failures = 0;
  std::string first;
  for (int c = 0; c < kCases; ++c) {
    if (auto f = testing::check_monitor_case(0xacce97ULL + c)) {
      if (failures++ == 0) first = *f;
    }
  }
  return {failures == 0, std::to_string(kCases) + " cases, " + std::to_string(failures) + " counterexamples" +
                             (first.empty() ? "" : " (first: " + first + ")")};
}

Verdict exhaustive_mutual_exclusion() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (const char* name : {"fig2_lock.s", "fig13_nobranch.s"}) {
    auto rep = explore(corpus(name), 2);
    const auto finals = rep.final_values("accountBalance");
    const bool ok = finals == std::set<std::uint32_t>{110} && rep.mutual_exclusion_violations.empty() && !rep.truncated;
    pass &= ok;
    detail += std::string(detail.empty() ? "" : "; ") + name + " finals " + set_str(finals) + ", violations " +
              std::to_string(rep.mutual_exclusion_violations.size()) + ", truncated " +
              (rep.truncated ? "true" : "false");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  pass &= secs < 30.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "; %.2f s", secs);
  return {pass, detail + buf};
}

Verdict lost_update_witness() {
  auto p = corpus("unlocked_inc.s");
  auto rep = explore(p, 2);
  const auto finals = rep.final_values("accountBalance");
  bool replayed = false;
  for (const auto& f : rep.final_states) {
    if (f.memory.front().second != 105) continue;
    auto r = run_schedule(init_machine(p, 2, ExecutionMode::Hardware), ScheduleScript::from_choices(f.witness));
    replayed = r.final_memory == f.memory && r.final_value("accountBalance") == 105;
  }
  return {finals == std::set<std::uint32_t>{105, 110} && replayed && !rep.truncated,
          "finals " + set_str(finals) + ", 105 witness " + (replayed ? "replays" : "does not replay")};
}

Verdict gdb_stepping() {
  auto p = corpus("fig7_modified.s");
  const auto ranges = p->exclusive_ranges();
  Engine e(init_machine(p, 2, ExecutionMode::GdbFidelity));
  for (int i = 0; i < 5; ++i) e.step(1);
  const bool holder_ready = e.machine().read_symbol("lockVar") == 1 && e.machine().thread(1).pc == 9;

  constexpr int kCycles = 12;
  std::vector<std::size_t> stops;
  for (int i = 0; i < 3 * kCycles; ++i) {
    e.step(2);
    stops.push_back(e.machine().thread(2).pc);
  }
  int cycles = 0;
  for (int c = 0; c < kCycles; ++c) {
    if (stops[3 * c] == 1 && stops[3 * c + 1] == 2 && stops[3 * c + 2] == 0) ++cycles;
  }
  // From the trace: the first retire of every scheduler step is a stop point.
  std::uint64_t last_step = 0;
  std::size_t checked = 0, inside = 0;
  for (const auto& ev : e.trace()) {
    if (ev.kind != EventKind::Retire || ev.sched_step == last_step) continue;
    last_step = ev.sched_step;
    ++checked;
    for (const auto& r : ranges) inside += r.interior(ev.pc);
  }
  return {holder_ready && cycles == kCycles && inside == 0,
          std::to_string(cycles) + "/" + std::to_string(kCycles) + " cycles LDR -> MOV -> LDREX; " +
              std::to_string(inside) + " of " + std::to_string(checked) + " traced stops inside a window"};
}

Verdict lint_conformance() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"fig2_lock", "fig7_modified", "fig13_nobranch"}) {
    auto findings = lint(*corpus(std::string(name) + ".s"));
    std::string got;
    for (const auto& f : findings) got += std::string(to_string(f.rule)) + " " + std::to_string(f.source_line) + "\n";
    const std::string want = testing::slurp(testing::source_path(std::string("corpus/") + name + ".lint"));
    pass &= got == want;
    detail += std::string(detail.empty() ? "" : "; ") + name + " " + std::to_string(findings.size()) +
              (got == want ? " (matches)" : " (MISMATCH)");
  }
  return {pass, detail};
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "llsc_acceptance";
  fs::create_directories(dir);
  std::size_t total = 0, identical = 0;
  for (const auto& entry : fs::directory_iterator(testing::source_path("scenarios"))) {
    Scenario s = load_scenario(entry.path().string());
    auto program = std::make_shared<const Program>(load_program(testing::source_path(s.program)));
    std::string bytes[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir / (entry.path().stem().string() + "." + std::to_string(run) + ".jsonl");
      {
        std::ofstream f(out, std::ios::binary);
        emit_trace(run_scenario(s, program), f);
      }
      bytes[run] = testing::slurp(out.string());
    }
    ++total;
    identical += !bytes[0].empty() && bytes[0] == bytes[1];
  }
  fs::remove_all(dir);
  return {total > 0 && identical == total,
          std::to_string(identical) + "/" + std::to_string(total) + " scenarios byte-identical"};
}

Verdict tamper_ab() {
  auto r = run_scenario(without_tampers(scenario("fig9_attack.scn")), corpus("hacker.s"));
  const auto v = r.final_value("accountBalance");
  return {v == 115 && r.violations.empty(),
          "tampers stripped: accountBalance " + std::to_string(v) + ", violations " +
              std::to_string(r.violations.size())};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*check)();
  };
  const Criterion criteria[] = {
      {"normal-run value", normal_run_value},
      {"attack replay", attack_replay},
      {"monitor soundness", monitor_soundness},
      {"exhaustive mutual exclusion", exhaustive_mutual_exclusion},
      {"lost-update witness", lost_update_witness},
      {"gdb-fidelity stepping", gdb_stepping},
      {"lint conformance", lint_conformance},
      {"trace determinism", determinism},
      {"tamper A/B", tamper_ab},
  };
  int failed = 0;
  int n = 0;
  for (const auto& c : criteria) {
    ++n;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << c.name << "): " << v.detail << '\n';
  }
  std::cout << (n - failed) << "/" << n << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
