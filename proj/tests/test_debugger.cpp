// SPDX-License-Identifier: Apache-2.0
// Interactive session: the manual attack, refusals, breakpoints, export.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "llsc/debugger.hpp"
#include "llsc/trace.hpp"
#include "test_support.hpp"

namespace llsc {
namespace {
using namespace llsc::testing;

namespace fs = std::filesystem;

struct Session {
  explicit Session(const char* program = "hacker.s", std::size_t threads = 3,
                   ExecutionMode mode = ExecutionMode::GdbFidelity)
      : dbg(testing::corpus(program), std::string("corpus/") + program, threads, mode, out) {}

  std::string run(const std::string& line) {
    out.str("");
    dbg.execute(line);
    return out.str();
  }

  std::ostringstream out;
  Debugger dbg;
};

std::string temp_path(const std::string& name) { return (fs::temp_directory_path() / name).string(); }

TEST(Debugger, ManualAttackReaches110) {
  Session s;
  s.run("step 8");
  s.run("thread 2");
  s.run("step 2");
  EXPECT_NE(s.run("set $R7 += 1").find("R7: 0 -> 1"), std::string::npos);
  EXPECT_NE(s.run("step").find("pc 9"), std::string::npos);
  s.run("set $R7 = 0");
  s.run("step 6");  // through the retry test and into the balance read
  s.run("set scheduler-locking off");
  const std::string done = s.run("continue");
  EXPECT_NE(done.find("accountBalance = 110; violations: 1"), std::string::npos) << done;
  EXPECT_NE(s.run("x accountBalance").find("= 110"), std::string::npos);
}

TEST(Debugger, RefusesEditsInsideTheWindow) {
  // In gdb mode the focused thread can only be at a legal stop, so force a
  // hardware-mode machine to the window interior and compare the refusal in
  // a gdb-mode session set to the same program. The refusal path is the
  // same check the tamper compiler uses.
  Session s;
  const auto& t = s.dbg.engine().machine().thread(1);
  EXPECT_EQ(t.pc, 0u);
  s.run("step 2");  // at the LDREX: allowed
  EXPECT_NE(s.run("set $R7 = 3").find("R7: 0 -> 3"), std::string::npos);
  s.run("step");
  EXPECT_EQ(t.pc, 0u);  // lock compare failed, back at the top

  auto why = gdb_stop_restriction(*testing::corpus("hacker.s"), 4);
  ASSERT_TRUE(why);
  EXPECT_NE(why->find("between LDREX and STREX"), std::string::npos);
}

TEST(Debugger, StopsNeverLandInsideTheWindow) {
  Session s;
  for (int i = 0; i < 40; ++i) {
    s.run("step");
    EXPECT_FALSE(gdb_stop_restriction(*testing::corpus("hacker.s"), s.dbg.engine().machine().thread(1).pc));
  }
}

TEST(Debugger, HardwareModeAllowsInteriorEdits) {
  Session s("hacker.s", 2, ExecutionMode::Hardware);
  s.run("step 4");
  EXPECT_EQ(s.dbg.engine().machine().thread(1).pc, 4u);
  EXPECT_NE(s.run("set $R8 = 0").find("R8: 0 -> 0"), std::string::npos);
}

TEST(Debugger, InfoThreadsShowsLosersCycling) {
  Session s;
  s.run("step 5");  // thread 1 now holds the lock
  s.run("thread 2");
  std::vector<std::size_t> stops;
  for (int i = 0; i < 6; ++i) {
    s.run("step");
    stops.push_back(s.dbg.engine().machine().thread(2).pc);
  }
  EXPECT_EQ(stops, (std::vector<std::size_t>{1, 2, 0, 1, 2, 0}));
  const std::string info = s.run("info threads");
  EXPECT_NE(info.find("* 2"), std::string::npos) << info;
  EXPECT_NE(info.find("try_again"), std::string::npos);
  EXPECT_NE(info.find("critical_section"), std::string::npos);
}

TEST(Debugger, SchedulerLockingOffStepsEveryone) {
  Session s;
  s.run("set scheduler-locking off");
  s.run("step");
  for (std::size_t t = 1; t <= 3; ++t) EXPECT_EQ(s.dbg.engine().machine().thread(t).pc, 1u);
}

TEST(Debugger, BreakAndContinue) {
  Session s;
  EXPECT_NE(s.run("break unlock").find("pc 16"), std::string::npos);
  const std::string hit = s.run("continue");
  EXPECT_NE(hit.find("hit breakpoint"), std::string::npos) << hit;
  EXPECT_EQ(s.dbg.engine().machine().thread(s.dbg.focus()).pc, 16u);
  // Continuing moves past the breakpoint the thread is sitting on.
  s.run("continue");
  s.run("delete");
  EXPECT_NE(s.run("continue").find("All threads have finished"), std::string::npos);
  EXPECT_EQ(s.dbg.engine().machine().read_symbol("accountBalance"), 115u);
}

TEST(Debugger, UsageErrors) {
  Session s;
  EXPECT_NE(s.run("frobnicate").find("Commands:"), std::string::npos);
  EXPECT_NE(s.run("thread 9").find("Invalid thread"), std::string::npos);
  EXPECT_NE(s.run("set $R13 = 1").find("Invalid register"), std::string::npos);
  EXPECT_NE(s.run("set $R1 = zz").find("Invalid value"), std::string::npos);
  EXPECT_NE(s.run("x ghost").find("No symbol"), std::string::npos);
  EXPECT_NE(s.run("break ghost").find("error"), std::string::npos);
  EXPECT_NE(s.run("step -1").find("positive"), std::string::npos);
  EXPECT_TRUE(s.dbg.execute(""));
  EXPECT_FALSE(s.dbg.execute("quit"));
}

TEST(Debugger, InfoRegisters) {
  Session s;
  s.run("step 2");
  const std::string regs = s.run("info registers");
  EXPECT_NE(regs.find("R10   0x1000"), std::string::npos) << regs;
  EXPECT_NE(regs.find("pc    2 <try_again+2>"), std::string::npos) << regs;
}

TEST(Debugger, ExportedSessionReplaysExactly) {
  Session s;
  std::istringstream script(R"(step 8
thread 2
step 2
set $R7 += 1
step
set $R7 = 0
step 3
thread 3
step 3
set $R7 -= 4
step 2
set scheduler-locking off
step 4
)");
  s.dbg.run(script, false);
  const std::string path = temp_path("llsc_export_test.scn");
  s.run("export " + path);
  Scenario exported = load_scenario(path);
  auto r = run_scenario(exported, testing::corpus("hacker.s"));
  ASSERT_TRUE(exported.expect);
  EXPECT_TRUE(check_expectations(*exported.expect, r).met);
  EXPECT_EQ(r.final_memory, s.dbg.engine().machine().symbol_values());
  EXPECT_EQ(r.violations.size(), s.dbg.engine().violations().size());
  EXPECT_EQ(r.violations, s.dbg.engine().violations());
  std::remove(path.c_str());
}

TEST(Debugger, TraceWrittenOnQuit) {
  Session s;
  const std::string path = temp_path("llsc_debug_trace.jsonl");
  s.run("trace on " + path);
  s.run("step 3");
  s.dbg.execute("quit");
  const std::string text = testing::slurp(path);
  ASSERT_FALSE(text.empty());
  auto prov = read_trace_header(text.substr(0, text.find('\n')));
  EXPECT_EQ(trace_to_string(replay(prov, testing::corpus("hacker.s"))), text);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace llsc
