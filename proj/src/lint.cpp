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

#include "llsc/lint.hpp"

#include <algorithm>
#include <json.hpp>

namespace llsc {

namespace {

bool reads_register(const Instruction& insn, std::uint8_t reg) {
  if (insn.opcode != Opcode::Cmp) return false;
  if (insn.reg(0).id == reg) return true;
  const auto* rhs = std::get_if<Reg>(&insn.operands[1]);
  return rhs != nullptr && rhs->id == reg;
}

bool writes_register(const Instruction& insn, std::uint8_t reg) {
  auto d = insn.destination();
  return d && *d == reg;
}

class Linter {
 public:
  explicit Linter(const Program& p) : p_(p), regions_(p.critical_regions()) {}

  std::vector<Finding> run() {
    pair_exclusives();
    check_register_compares();
    check_ll_branches();
    check_sc_branches();
    std::sort(findings_.begin(), findings_.end(), [](const Finding& a, const Finding& b) {
      return a.pc != b.pc ? a.pc < b.pc : a.rule < b.rule;
    });
    return std::move(findings_);
  }

 private:
  const Instruction& at(std::size_t pc) const { return p_.instructions[pc]; }

  void add(LintRule rule, std::size_t pc, Severity sev, std::string message) {
    findings_.push_back({rule, pc, at(pc).source_line, std::move(message), sev});
  }

  // Listing-order pairing: an LDREX is closed by the next STREX; a second
  // LDREX before that orphans the first.
  void pair_exclusives() {
    std::optional<std::size_t> open;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (at(i).opcode == Opcode::Ldrex) {
        if (open) orphan_ldrex(*open);
        open = i;
      } else if (at(i).opcode == Opcode::Strex) {
        if (open) {
          pairs_.push_back({*open, i});
          open.reset();
        } else {
          add(LintRule::OrphanStrex, i, Severity::Warning,
              format_instruction(at(i)) + " has no preceding LDREX; the store can never succeed");
        }
      }
    }
    if (open) orphan_ldrex(*open);
  }

  void orphan_ldrex(std::size_t pc) {
    add(LintRule::OrphanLdrex, pc, Severity::Warning,
        format_instruction(at(pc)) + " is not followed by a matching STREX");
  }

  // First CMP testing an LDREX/STREX destination must use an immediate.
  void check_register_compares() {
    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      const auto op = at(i).opcode;
      if (op != Opcode::Ldrex && op != Opcode::Strex) continue;
      const std::uint8_t dest = at(i).reg(0).id;
      for (std::size_t j = i + 1; j < p_.size(); ++j) {
        const Instruction& insn = at(j);
        if (insn.opcode == Opcode::Cmp && insn.reg(0).id == dest) {
          if (const auto* rhs = std::get_if<Reg>(&insn.operands[1]);
              rhs != nullptr && std::find(flagged.begin(), flagged.end(), j) == flagged.end()) {
            flagged.push_back(j);
            add(LintRule::RegCompare, j, Severity::Error,
                format_instruction(insn) + " compares the " + std::string(mnemonic(op)) + " result R" +
                    std::to_string(dest) + " against register R" + std::to_string(rhs->id) +
                    ", which can be modified before the exclusive pair runs; compare against an immediate");
          }
          break;
        }
        if (writes_register(insn, dest) || insn.opcode == Opcode::B) break;
      }
    }
  }

  void check_ll_branches() {
    for (const auto& [ld, st] : pairs_) {
      const std::uint8_t dest = at(ld).reg(0).id;
      bool tested = false;
      bool compared = false;
      for (std::size_t j = ld + 1; j < st && !tested; ++j) {
        const Instruction& insn = at(j);
        if (insn.opcode == Opcode::Cmp) {
          compared = reads_register(insn, dest);
        } else if (insn.is_conditional_branch() && compared) {
          tested = true;
        } else if (writes_register(insn, dest)) {
          break;
        }
      }
      if (!tested) {
        add(LintRule::MissingLlBranch, ld, Severity::Warning,
            "value loaded by " + format_instruction(at(ld)) +
                " is never compared and branched on before " + format_instruction(at(st)));
      }
    }
  }

  bool starts_critical_region(std::size_t pc) const {
    return std::any_of(regions_.begin(), regions_.end(), [pc](const Region& r) { return r.start == pc; });
  }

  void check_sc_branches() {
    for (std::size_t s = 0; s < p_.size(); ++s) {
      if (at(s).opcode != Opcode::Strex) continue;
      const std::uint8_t status = at(s).reg(0).id;
      bool tested = false;
      bool compared = false;
      for (std::size_t j = s + 1; j < p_.size() && !tested; ++j) {
        if (starts_critical_region(j)) break;
        const Instruction& insn = at(j);
        if (insn.opcode == Opcode::Cmp) {
          compared = reads_register(insn, status);
        } else if (insn.is_conditional_branch()) {
          tested = compared;
        } else if (insn.opcode == Opcode::B || insn.accesses_memory() || writes_register(insn, status)) {
          break;
        }
      }
      if (!tested) {
        add(LintRule::MissingScBranch, s, Severity::Error,
            "status of " + format_instruction(at(s)) +
                " is never compared and branched on; a failed store-conditional is not retried");
      }
    }
  }

  const Program& p_;
  std::vector<Region> regions_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<Finding> findings_;
};

}  // namespace

std::string_view to_string(LintRule rule) {
  switch (rule) {
    case LintRule::RegCompare: return "REG_COMPARE";
    case LintRule::MissingLlBranch: return "MISSING_LL_BRANCH";
    case LintRule::MissingScBranch: return "MISSING_SC_BRANCH";
    case LintRule::OrphanLdrex: return "ORPHAN_LDREX";
    case LintRule::OrphanStrex: return "ORPHAN_STREX";
  }
  return "?";
}

std::optional<LintRule> parse_rule(std::string_view name) {
  for (auto r : {LintRule::RegCompare, LintRule::MissingLlBranch, LintRule::MissingScBranch,
                 LintRule::OrphanLdrex, LintRule::OrphanStrex}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "error" : "warning";
}

std::vector<Finding> lint(const Program& program) { return Linter(program).run(); }

std::string format_finding(const Finding& f) {
  return "line " + std::to_string(f.source_line) + " (pc " + std::to_string(f.pc) + "): " +
         std::string(to_string(f.severity)) + " " + std::string(to_string(f.rule)) + ": " + f.message;
}

std::string format_finding_record(const Finding& f) {
  nlohmann::ordered_json j;
  j["rule"] = to_string(f.rule);
  j["line"] = f.source_line;
  j["pc"] = f.pc;
  j["severity"] = to_string(f.severity);
  j["message"] = f.message;
  return j.dump();
}

bool has_errors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::Error; });
}

}  // namespace llsc
