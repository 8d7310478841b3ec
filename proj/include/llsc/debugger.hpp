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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llsc/scenario.hpp"
#include "llsc/sched.hpp"

namespace llsc {

/// GDB-flavoured interactive session over one machine. Every step and
/// register edit is recorded so the session can be exported as a Scenario
/// that replays to the same final memory and violations.
class Debugger {
 public:
  Debugger(std::shared_ptr<const Program> program, std::string program_path, std::size_t threads,
           ExecutionMode mode, std::ostream& out);

  /// Executes one command line. Returns false after `quit`.
  bool execute(std::string_view line);

  /// Reads commands until `quit` or end of input, printing a prompt.
  void run(std::istream& in, bool prompt = true);

  Scenario export_scenario() const;
  RunResult session_result() const;

  const Engine& engine() const { return engine_; }
  std::size_t focus() const { return focus_; }

 private:
  void cmd_thread(std::string_view arg);
  void cmd_step(std::string_view arg);
  void cmd_set(std::string_view arg);
  void cmd_info(std::string_view arg);
  void cmd_examine(std::string_view arg);
  void cmd_break(std::string_view arg);
  void cmd_continue();
  void cmd_trace(std::string_view arg);
  void cmd_export(std::string_view arg);
  void help();

  void do_step(std::size_t tid, bool verbose);
  void print_stop(std::size_t tid);
  void print_summary_if_done();
  void flush_trace();

  std::shared_ptr<const Program> program_;
  std::string program_path_;
  ExecutionMode mode_;
  std::ostream& out_;
  Engine engine_;
  std::size_t focus_ = 1;
  bool scheduler_locking_ = true;
  std::set<std::size_t> breakpoints_;
  std::vector<std::size_t> choices_;
  std::vector<TamperSpec> tampers_;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> arrivals_;
  std::optional<std::string> trace_path_;
  bool finished_reported_ = false;
};

}  // namespace llsc
