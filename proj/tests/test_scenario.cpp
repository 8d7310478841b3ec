// SPDX-License-Identifier: Apache-2.0
// Scenario file parsing, validation and expectation checks.

#include <gtest/gtest.h>

#include <filesystem>

#include "llsc/scenario.hpp"
#include "test_support.hpp"

namespace llsc {
namespace {
using namespace llsc::testing;

namespace fs = std::filesystem;

constexpr const char* kFull = R"({
  "program": "corpus/hacker.s",
  "threads": 3,
  "mode": "gdb",
  "clrex_on_switch": true,
  "overrides": {"accountBalance": 100},
  "schedule": {"script": [{"thread": 1, "steps": 8}, {"thread": 2, "steps": 8}], "halt": true},
  "tampers": [{"thread": 2, "at": "try_again+2", "occurrence": "every", "register": "R7", "action": "flip_bit", "value": 0}],
  "expect": {"memory": {"accountBalance": 110}, "violations": 1}
})";

TEST(Parse, AllFields) {
  Scenario s = parse_scenario(kFull);
  EXPECT_EQ(s.program, "corpus/hacker.s");
  EXPECT_EQ(s.threads, 3u);
  EXPECT_EQ(s.mode, ExecutionMode::GdbFidelity);
  EXPECT_TRUE(s.clrex_on_switch);
  EXPECT_EQ(s.overrides.at("accountBalance"), 100u);
  ASSERT_TRUE(s.script);
  EXPECT_TRUE(s.script->halt);
  EXPECT_TRUE(s.script->clrex_on_switch);
  EXPECT_EQ(s.script->entries.size(), 2u);
  ASSERT_EQ(s.tampers.size(), 1u);
  EXPECT_EQ(s.tampers[0].occurrence, Occurrence::every());
  EXPECT_EQ(s.tampers[0].reg, 7);
  EXPECT_EQ(s.tampers[0].action.kind, TamperAction::Kind::FlipBit);
  ASSERT_TRUE(s.expect);
  EXPECT_EQ(s.expect->violations, 1u);
}

TEST(Parse, FormatRoundTrip) {
  Scenario s = parse_scenario(kFull);
  EXPECT_EQ(parse_scenario(format_scenario(s)), s);
  for (const auto& entry : fs::directory_iterator(testing::source_path("scenarios"))) {
    Scenario f = load_scenario(entry.path().string());
    EXPECT_EQ(parse_scenario(format_scenario(f)), f) << entry.path();
  }
}

TEST(Parse, Defaults) {
  Scenario s = parse_scenario(R"({"threads": 2})");
  EXPECT_EQ(s.mode, ExecutionMode::Hardware);
  EXPECT_FALSE(s.script);
  EXPECT_FALSE(s.random);
  EXPECT_FALSE(s.expect);
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_scenario("{"), ScenarioError);
  EXPECT_THROW(parse_scenario("[]"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"thread": 2})"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"threads": 0})"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"mode": "fast"})"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"schedule": {}})"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"schedule": {"script": [], "random": {"seed": 1, "max_steps": 2}}})"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"schedule": {"random": {"seed": 1, "max_steps": 0}}})"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"overrides": {"x": "one"}})"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"tampers": [{"thread": 1}]})"), ScenarioError);
  EXPECT_THROW(load_scenario("/nonexistent/x.scn"), ScenarioError);
}

TEST(Validate, ReferencesMustResolve) {
  auto p = testing::corpus("hacker.s");
  auto bad = [&](const char* text) {
    EXPECT_THROW(validate_scenario(parse_scenario(text), *p), ScenarioError) << text;
  };
  bad(R"({"threads": 2, "overrides": {"ghost": 1}})");
  bad(R"({"threads": 2, "expect": {"memory": {"ghost": 1}}})");
  bad(R"({"threads": 2, "schedule": {"script": [{"thread": 3, "steps": 1}]}})");
  bad(R"({"threads": 2, "schedule": {"script": [{"thread": 1, "steps": 0}]}})");
  bad(R"({"threads": 2, "tampers": [{"thread": 3, "at": "lock", "register": "R1", "action": "set", "value": 0}]})");
  bad(R"({"threads": 2, "tampers": [{"thread": 1, "at": "nowhere", "register": "R1", "action": "set", "value": 0}]})");
  bad(R"({"threads": 2, "mode": "gdb", "tampers": [{"thread": 1, "at": "try_again+4", "register": "R7", "action": "set", "value": 0}]})");
  EXPECT_NO_THROW(validate_scenario(parse_scenario(R"({"threads": 2, "mode": "hw", "tampers": [{"thread": 1, "at": "try_again+4", "register": "R7", "action": "set", "value": 0}]})"), *p));
}

TEST(Expectations, MismatchesAreListed) {
  auto p = testing::corpus("hacker.s");
  auto s = parse_scenario(R"({"threads": 3, "expect": {"memory": {"accountBalance": 110, "lockVar": 0}, "violations": 1}})");
  auto r = run_scenario(s, p);
  auto c = check_expectations(*s.expect, r);
  EXPECT_FALSE(c.met);
  ASSERT_EQ(c.mismatches.size(), 2u);
  EXPECT_EQ(c.mismatches[0], "accountBalance: expected 110, got 115");
  EXPECT_EQ(c.mismatches[1], "violations: expected 1, got 0");
}

// Every shipped scenario is self-checking and passes.
TEST(Corpus, AllShippedScenariosMeetTheirExpectations) {
  for (const auto& entry : fs::directory_iterator(testing::source_path("scenarios"))) {
    Scenario s = load_scenario(entry.path().string());
    ASSERT_TRUE(s.expect) << entry.path();
    ASSERT_TRUE(fs::exists(testing::source_path(s.program))) << s.program;
    auto r = run_scenario(s, std::make_shared<const Program>(load_program(testing::source_path(s.program))));
    auto c = check_expectations(*s.expect, r);
    EXPECT_TRUE(c.met) << entry.path() << ": " << (c.mismatches.empty() ? "" : c.mismatches[0]);
  }
}

TEST(Corpus, StrippingTampersRestoresTheLock) {
  for (const auto& entry : fs::directory_iterator(testing::source_path("scenarios"))) {
    Scenario s = load_scenario(entry.path().string());
    if (s.tampers.empty()) continue;
    auto program = std::make_shared<const Program>(load_program(testing::source_path(s.program)));
    auto r = run_scenario(without_tampers(s), program);
    EXPECT_TRUE(r.violations.empty()) << entry.path();
    EXPECT_EQ(r.final_value("accountBalance"), 100u + 5u * s.threads) << entry.path();
  }
}

}  // namespace
}  // namespace llsc
