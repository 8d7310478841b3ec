// SPDX-License-Identifier: Apache-2.0
// Trace format, determinism, replay and the run summary.

#include <gtest/gtest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "llsc/scenario.hpp"
#include "llsc/trace.hpp"
#include "test_support.hpp"

namespace llsc {
namespace {
using namespace llsc::testing;

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<json> records(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

RunResult run_file(const std::string& scn) {
  Scenario s = load_scenario(testing::source_path("scenarios/" + scn));
  return run_scenario(s, testing::corpus(fs::path(s.program).filename().string()));
}

TEST(Emit, AttackTraceHasTwoTampersAndOneViolation) {
  auto recs = records(trace_to_string(run_file("fig9_attack.scn")));
  ASSERT_FALSE(recs.empty());
  EXPECT_EQ(recs[0]["record"], "header");
  std::size_t tampers = 0, violations = 0;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const auto& r = recs[i];
    EXPECT_EQ(r["record"], "event");
    if (r["kind"] == "tamper") {
      ++tampers;
      EXPECT_EQ(r["thread"], 2);
      EXPECT_TRUE(r.contains("tamper"));
    }
    if (r["kind"] == "violation") {
      ++violations;
      EXPECT_EQ(r["violation"], "mutual_exclusion");
      EXPECT_EQ(r["threads"], json::array({1, 2}));
    }
  }
  EXPECT_EQ(tampers, 2u);
  EXPECT_EQ(violations, 1u);
}

TEST(Emit, HeaderFields) {
  auto r = run_file("fig9_attack.scn");
  auto h = records(trace_to_string(r))[0];
  EXPECT_EQ(h["format"], "llsc-trace");
  EXPECT_EQ(h["version"], 1);
  EXPECT_EQ(h["tool"], "llsc 0.1.0");
  EXPECT_EQ(h["program_hash"], program_hash(*testing::corpus("hacker.s")));
  EXPECT_EQ(h["mode"], "gdb");
  EXPECT_EQ(h["threads"], 3);
  EXPECT_EQ(h["initial_memory"]["accountBalance"], 100);
  EXPECT_EQ(h["schedule"]["kind"], "script");
  EXPECT_EQ(h["tampers"].size(), 2u);
  EXPECT_EQ(h["schedule_digest"], schedule_digest(r.provenance));
}

TEST(Emit, StepIndexStrictlyIncreasesAndWritesAreMapped) {
  for (const char* scn : {"fig9_attack.scn", "random3.scn", "counter3.scn"}) {
    auto recs = records(trace_to_string(run_file(scn)));
    for (std::size_t i = 1; i < recs.size(); ++i) {
      EXPECT_EQ(recs[i]["step"].get<std::uint64_t>(), i - 1);
      if (recs[i].contains("mem_writes")) {
        for (const auto& w : recs[i]["mem_writes"]) {
          const auto addr = w["address"].get<std::uint32_t>();
          EXPECT_GE(addr, kDataBase);
          EXPECT_EQ(addr % 4, 0u);
        }
      }
    }
  }
}

TEST(Emit, EmptyRunIsHeaderOnly) {
  ScheduleScript s;
  s.halt = true;
  auto r = run_schedule(init_machine(testing::corpus("hacker.s"), 2, ExecutionMode::Hardware), s);
  EXPECT_EQ(r.steps_taken, 0u);
  auto text = trace_to_string(r);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(records(text)[0]["record"], "header");
}

TEST(Emit, StreamFailureThrows) {
  std::ostringstream bad;
  bad.setstate(std::ios::badbit);
  EXPECT_THROW(emit_trace(run_file("single.scn"), bad), std::runtime_error);
}

TEST(Determinism, EveryShippedScenarioTracesIdentically) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(testing::source_path("scenarios"))) {
    const auto name = entry.path().filename().string();
    EXPECT_EQ(trace_to_string(run_file(name)), trace_to_string(run_file(name))) << name;
    ++n;
  }
  EXPECT_GE(n, 10u);
}

TEST(Replay, HeaderRegeneratesTheTrace) {
  for (const auto& entry : fs::directory_iterator(testing::source_path("scenarios"))) {
    const auto name = entry.path().filename().string();
    Scenario s = load_scenario(entry.path().string());
    auto program = testing::corpus(fs::path(s.program).filename().string());
    const std::string text = trace_to_string(run_scenario(s, program));
    auto prov = read_trace_header(text.substr(0, text.find('\n')));
    EXPECT_EQ(trace_to_string(replay(prov, program)), text) << name;
  }
}

TEST(Replay, RejectsTheWrongProgram) {
  const std::string text = trace_to_string(run_file("fig9_attack.scn"));
  auto prov = read_trace_header(text.substr(0, text.find('\n')));
  EXPECT_THROW(replay(prov, testing::corpus("fig2_lock.s")), std::invalid_argument);
  EXPECT_THROW(read_trace_header(R"({"record":"event"})"), std::invalid_argument);
}

// Sum of write deltas on a word equals its net change.
TEST(Conservation, WriteDeltasSumToNetChange) {
  for (const auto& entry : fs::directory_iterator(testing::source_path("scenarios"))) {
    auto r = run_file(entry.path().filename().string());
    std::map<std::string, std::uint32_t> net;
    for (const auto& e : r.trace) {
      for (const auto& w : e.memory_writes) net[w.symbol] += w.new_value - w.old_value;
    }
    for (std::size_t i = 0; i < r.final_memory.size(); ++i) {
      const auto& [name, final_value] = r.final_memory[i];
      EXPECT_EQ(net[name], final_value - r.provenance.initial_memory[i].second) << entry.path() << " " << name;
    }
  }
}

TEST(Summary, Headlines) {
  EXPECT_EQ(summarize(run_file("normal3.scn")).headline(), "lockVar = 0; accountBalance = 115; violations: 0");
  EXPECT_EQ(summarize(run_file("fig9_attack.scn")).headline(), "lockVar = 0; accountBalance = 110; violations: 1");
}

TEST(Summary, FaultedThreadIsListed) {
  auto p = testing::program_from(".data x 0\nMOV R1, #3\nLDR R2, [R1]\n");
  auto r = run_schedule(init_machine(p, 1, ExecutionMode::Hardware), ScheduleScript{});
  const auto text = summarize(r).to_text();
  EXPECT_NE(text.find("thread 1: faulted(bus error)"), std::string::npos) << text;
}

}  // namespace
}  // namespace llsc
