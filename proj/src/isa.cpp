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

#include "llsc/isa.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace llsc {

namespace {

struct OpInfo {
  std::string_view name;
  Opcode opcode;
};

// LDR is split into LdrAddr / LdrMem by operand syntax.
constexpr OpInfo kMnemonics[] = {
    {"MOV", Opcode::Mov},     {"LDR", Opcode::LdrMem}, {"STR", Opcode::Str},
    {"LDREX", Opcode::Ldrex}, {"STREX", Opcode::Strex}, {"CLREX", Opcode::Clrex},
    {"CMP", Opcode::Cmp},     {"ADD", Opcode::Add},     {"B", Opcode::B},
    {"BNE", Opcode::Bne},     {"BEQ", Opcode::Beq},     {"NOP", Opcode::Nop},
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.')) return false;
  return std::all_of(s.begin() + 1, s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '$';
  });
}

std::string strip_comment(std::string_view line) {
  std::size_t cut = line.size();
  if (auto p = line.find("//"); p != std::string_view::npos) cut = std::min(cut, p);
  if (auto p = line.find('@'); p != std::string_view::npos) cut = std::min(cut, p);
  return std::string(line.substr(0, cut));
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail(ParseError::Kind kind, std::size_t line, const std::string& msg) {
  throw ParseError(kind, line, msg);
}

// Decimal integer with optional sign, fitting a 32-bit word either as
// signed or unsigned. Returns the two's-complement bit pattern.
std::optional<std::uint32_t> parse_word(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool negative = false;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;
  std::uint64_t magnitude = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), magnitude);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (negative) {
    if (magnitude > 0x80000000ull) return std::nullopt;
    return static_cast<std::uint32_t>(-static_cast<std::int64_t>(magnitude));
  }
  if (magnitude > 0xFFFFFFFFull) return std::nullopt;
  return static_cast<std::uint32_t>(magnitude);
}

std::optional<std::uint8_t> parse_register(std::string_view s) {
  if (s.size() < 2 || (s[0] != 'R' && s[0] != 'r')) return std::nullopt;
  unsigned id = 0;
  auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), id);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (id >= kRegisterCount) return std::nullopt;
  return static_cast<std::uint8_t>(id);
}

enum class RawKind { Register, Immediate, Symbol, Memory, Name };

struct RawOperand {
  RawKind kind;
  std::string text;
  std::uint32_t value = 0;  // register id or immediate bits
};

RawOperand parse_raw_operand(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  if (tok.empty()) fail(ParseError::Kind::Syntax, line, "empty operand");
  std::string text(tok);
  if (tok.front() == '#') {
    auto v = parse_word(tok.substr(1));
    if (!v) fail(ParseError::Kind::Syntax, line, "bad immediate '" + text + "'");
    return {RawKind::Immediate, text, *v};
  }
  if (tok.front() == '=') {
    auto name = trim(tok.substr(1));
    if (!is_identifier(name)) fail(ParseError::Kind::Syntax, line, "bad symbol reference '" + text + "'");
    return {RawKind::Symbol, std::string(name)};
  }
  if (tok.front() == '[') {
    if (tok.back() != ']') fail(ParseError::Kind::Syntax, line, "unterminated memory operand '" + text + "'");
    auto inner = trim(tok.substr(1, tok.size() - 2));
    auto r = parse_register(inner);
    if (!r) {
      fail(ParseError::Kind::Syntax, line,
           "unsupported addressing mode '" + text + "' (only [Rn] is modeled)");
    }
    return {RawKind::Memory, text, *r};
  }
  if (auto r = parse_register(tok)) return {RawKind::Register, text, *r};
  if ((tok[0] == 'R' || tok[0] == 'r') && tok.size() > 1 &&
      std::all_of(tok.begin() + 1, tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
    fail(ParseError::Kind::Syntax, line, "register '" + text + "' out of range R0..R12");
  }
  if (is_identifier(tok)) return {RawKind::Name, text};
  fail(ParseError::Kind::Syntax, line, "unrecognised operand '" + text + "'");
}

std::vector<RawOperand> split_operands(std::string_view rest, std::size_t line) {
  std::vector<RawOperand> out;
  rest = trim(rest);
  if (rest.empty()) return out;
  std::size_t depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= rest.size(); ++i) {
    if (i < rest.size() && rest[i] == '[') ++depth;
    if (i < rest.size() && rest[i] == ']' && depth > 0) --depth;
    if (i == rest.size() || (rest[i] == ',' && depth == 0)) {
      out.push_back(parse_raw_operand(rest.substr(start, i - start), line));
      start = i + 1;
    } else if (rest[i] == ',' && depth > 0) {
      fail(ParseError::Kind::Syntax, line,
           "unsupported addressing mode in '" + std::string(rest) + "' (only [Rn] is modeled)");
    }
  }
  return out;
}

struct PendingLabel {
  std::string name;
  std::size_t line;
};

struct PendingRef {
  std::size_t insn;
  std::size_t operand;
  std::size_t line;
};

struct PendingRegion {
  std::string name, start, end;
  std::size_t line;
};

class Parser {
 public:
  Program run(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      ++line_no;
      parse_line(text.substr(pos, nl - pos), line_no);
      pos = nl + 1;
    }
    if (program_.instructions.empty()) {
      fail(ParseError::Kind::Empty, std::max<std::size_t>(line_no, 1), "no instructions");
    }
    resolve();
    return std::move(program_);
  }

 private:
  void parse_line(std::string_view raw, std::size_t line) {
    std::string stripped = strip_comment(raw);
    std::string_view s = trim(stripped);
    // Leading labels: `name:` possibly followed by more labels or an instruction.
    while (!s.empty()) {
      auto colon = s.find(':');
      if (colon == std::string_view::npos) break;
      auto head = trim(s.substr(0, colon));
      if (!is_identifier(head) || head.front() == '.') break;
      define_label(std::string(head), line);
      s = trim(s.substr(colon + 1));
    }
    if (s.empty()) return;
    if (s.front() == '.') {
      parse_directive(s, line);
      return;
    }
    parse_instruction(s, line);
  }

  void define_label(const std::string& name, std::size_t line) {
    for (const auto& l : program_.labels) {
      if (l.name == name) fail(ParseError::Kind::Duplicate, line, "duplicate label '" + name + "'");
    }
    program_.labels.push_back({name, program_.instructions.size()});
  }

  void parse_directive(std::string_view s, std::size_t line) {
    auto words = split_ws(s);
    const std::string dir(words[0]);
    if (dir == ".data") {
      if (words.size() != 3 || !is_identifier(words[1])) {
        fail(ParseError::Kind::MalformedDirective, line, "expected '.data <symbol> <value>'");
      }
      auto v = parse_word(words[2].front() == '#' ? words[2].substr(1) : words[2]);
      if (!v) fail(ParseError::Kind::MalformedDirective, line, "bad .data value '" + std::string(words[2]) + "'");
      std::string name(words[1]);
      if (program_.find_symbol(name)) fail(ParseError::Kind::Duplicate, line, "duplicate symbol '" + name + "'");
      program_.data.push_back({name, *v});
    } else if (dir == ".region") {
      if (words.size() != 4 || !is_identifier(words[1]) || !is_identifier(words[2]) ||
          !is_identifier(words[3])) {
        fail(ParseError::Kind::MalformedDirective, line, "expected '.region <name> <start-label> <end-label>'");
      }
      regions_.push_back({std::string(words[1]), std::string(words[2]), std::string(words[3]), line});
    } else if (dir == ".entry") {
      if (words.size() != 2 || !is_identifier(words[1])) {
        fail(ParseError::Kind::MalformedDirective, line, "expected '.entry <label>'");
      }
      if (entry_) fail(ParseError::Kind::Duplicate, line, "duplicate .entry");
      entry_ = PendingLabel{std::string(words[1]), line};
    } else {
      fail(ParseError::Kind::MalformedDirective, line, "unknown directive '" + dir + "'");
    }
  }

  void parse_instruction(std::string_view s, std::size_t line) {
    std::size_t cut = 0;
    while (cut < s.size() && !std::isspace(static_cast<unsigned char>(s[cut]))) ++cut;
    const std::string word(s.substr(0, cut));
    const std::string name = upper(word);
    const OpInfo* info = nullptr;
    for (const auto& m : kMnemonics) {
      if (m.name == name) info = &m;
    }
    if (info == nullptr) {
      fail(ParseError::Kind::UnknownOpcode, line, "unknown opcode '" + word + "'");
    }
    auto raw = split_operands(s.substr(cut), line);

    Instruction insn;
    insn.opcode = info->opcode;
    insn.source_line = line;

    auto expect_count = [&](std::size_t n) {
      if (raw.size() != n) {
        fail(ParseError::Kind::Syntax, line,
             name + " expects " + std::to_string(n) + " operand" + (n == 1 ? "" : "s") + ", got " +
                 std::to_string(raw.size()));
      }
    };
    auto want = [&](std::size_t i, std::initializer_list<RawKind> kinds, const char* what) {
      if (std::find(kinds.begin(), kinds.end(), raw[i].kind) == kinds.end()) {
        fail(ParseError::Kind::Syntax, line,
             name + " operand " + std::to_string(i + 1) + " must be " + what + ", got '" + raw[i].text + "'");
      }
    };
    auto reg = [&](std::size_t i) -> Operand { return Reg{static_cast<std::uint8_t>(raw[i].value)}; };
    auto reg_or_imm = [&](std::size_t i) -> Operand {
      if (raw[i].kind == RawKind::Register) return Reg{static_cast<std::uint8_t>(raw[i].value)};
      return Imm{static_cast<std::int32_t>(raw[i].value)};
    };

    switch (info->opcode) {
      case Opcode::Mov:
        expect_count(2);
        want(0, {RawKind::Register}, "a register");
        want(1, {RawKind::Register, RawKind::Immediate}, "a register or #immediate");
        insn.operands = {reg(0), reg_or_imm(1)};
        break;
      case Opcode::LdrMem:  // covers both LDR forms
        expect_count(2);
        want(0, {RawKind::Register}, "a register");
        want(1, {RawKind::Symbol, RawKind::Memory}, "=symbol or [Rn]");
        if (raw[1].kind == RawKind::Symbol) {
          insn.opcode = Opcode::LdrAddr;
          insn.operands = {reg(0), SymbolRef{raw[1].text, 0}};
          refs_.push_back({program_.instructions.size(), 1, line});
        } else {
          insn.operands = {reg(0), reg(1)};
        }
        break;
      case Opcode::Str:
      case Opcode::Ldrex:
        expect_count(2);
        want(0, {RawKind::Register}, "a register");
        want(1, {RawKind::Memory}, "[Rn]");
        insn.operands = {reg(0), reg(1)};
        break;
      case Opcode::Strex:
        expect_count(3);
        want(0, {RawKind::Register}, "a register");
        want(1, {RawKind::Register}, "a register");
        want(2, {RawKind::Memory}, "[Rn]");
        insn.operands = {reg(0), reg(1), reg(2)};
        break;
      case Opcode::Cmp:
        expect_count(2);
        want(0, {RawKind::Register}, "a register");
        want(1, {RawKind::Register, RawKind::Immediate}, "a register or #immediate");
        insn.operands = {reg(0), reg_or_imm(1)};
        break;
      case Opcode::Add:
        expect_count(3);
        want(0, {RawKind::Register}, "a register");
        want(1, {RawKind::Register}, "a register");
        want(2, {RawKind::Register, RawKind::Immediate}, "a register or #immediate");
        insn.operands = {reg(0), reg(1), reg_or_imm(2)};
        break;
      case Opcode::B:
      case Opcode::Bne:
      case Opcode::Beq:
        expect_count(1);
        want(0, {RawKind::Name}, "a label");
        insn.operands = {LabelRef{raw[0].text, 0}};
        refs_.push_back({program_.instructions.size(), 0, line});
        break;
      case Opcode::Clrex:
      case Opcode::Nop:
        expect_count(0);
        break;
      case Opcode::LdrAddr:
        break;
    }
    program_.instructions.push_back(std::move(insn));
  }

  void resolve() {
    for (const auto& ref : refs_) {
      auto& op = program_.instructions[ref.insn].operands[ref.operand];
      if (auto* sym = std::get_if<SymbolRef>(&op)) {
        auto idx = program_.find_symbol(sym->name);
        if (!idx) fail(ParseError::Kind::Unresolved, ref.line, "unresolved symbol '" + sym->name + "'");
        sym->index = *idx;
      } else if (auto* lab = std::get_if<LabelRef>(&op)) {
        auto idx = program_.find_label(lab->name);
        if (!idx) fail(ParseError::Kind::Unresolved, ref.line, "unresolved label '" + lab->name + "'");
        lab->target = *idx;
      }
    }
    for (const auto& r : regions_) {
      auto start = program_.find_label(r.start);
      auto end = program_.find_label(r.end);
      if (!start) fail(ParseError::Kind::Unresolved, r.line, "unresolved label '" + r.start + "'");
      if (!end) fail(ParseError::Kind::Unresolved, r.line, "unresolved label '" + r.end + "'");
      if (*start > *end) {
        fail(ParseError::Kind::MalformedDirective, r.line,
             "region '" + r.name + "' starts after it ends");
      }
      Region region{r.name, r.start, r.end, *start, *end};
      for (const auto& other : program_.regions) {
        bool disjoint = region.end <= other.start || other.end <= region.start;
        bool nested = (region.start >= other.start && region.end <= other.end) ||
                      (other.start >= region.start && other.end <= region.end);
        if (!disjoint && !nested) {
          fail(ParseError::Kind::MalformedDirective, r.line,
               "region '" + r.name + "' partially overlaps region '" + other.name + "'");
        }
      }
      program_.regions.push_back(std::move(region));
    }
    if (entry_) {
      auto idx = program_.find_label(entry_->name);
      if (!idx) fail(ParseError::Kind::Unresolved, entry_->line, "unresolved label '" + entry_->name + "'");
      if (*idx >= program_.instructions.size()) {
        fail(ParseError::Kind::MalformedDirective, entry_->line, "entry label has no instruction");
      }
      program_.entry = *idx;
      program_.entry_label = entry_->name;
    }
  }

  Program program_;
  std::vector<PendingRef> refs_;
  std::vector<PendingRegion> regions_;
  std::optional<PendingLabel> entry_;
};

}  // namespace

ParseError::ParseError(Kind kind, std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

std::string_view mnemonic(Opcode op) {
  switch (op) {
    case Opcode::Mov: return "MOV";
    case Opcode::LdrAddr:
    case Opcode::LdrMem: return "LDR";
    case Opcode::Str: return "STR";
    case Opcode::Ldrex: return "LDREX";
    case Opcode::Strex: return "STREX";
    case Opcode::Clrex: return "CLREX";
    case Opcode::Cmp: return "CMP";
    case Opcode::Add: return "ADD";
    case Opcode::B: return "B";
    case Opcode::Bne: return "BNE";
    case Opcode::Beq: return "BEQ";
    case Opcode::Nop: return "NOP";
  }
  return "?";
}

std::optional<std::uint8_t> Instruction::destination() const {
  switch (opcode) {
    case Opcode::Mov:
    case Opcode::LdrAddr:
    case Opcode::LdrMem:
    case Opcode::Ldrex:
    case Opcode::Strex:
    case Opcode::Add:
      return reg(0).id;
    default:
      return std::nullopt;
  }
}

std::optional<std::size_t> Program::find_label(std::string_view name) const {
  for (const auto& l : labels) {
    if (l.name == name) return l.index;
  }
  return std::nullopt;
}

std::optional<std::size_t> Program::find_symbol(std::string_view name) const {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].name == name) return i;
  }
  return std::nullopt;
}

std::string Program::label_context(std::size_t pc) const {
  const Label* best = nullptr;
  for (const auto& l : labels) {
    if (l.index <= pc && (best == nullptr || l.index >= best->index)) best = &l;
  }
  if (best == nullptr) return "+" + std::to_string(pc);
  if (best->index == pc) return best->name;
  return best->name + "+" + std::to_string(pc - best->index);
}

std::vector<ExclusiveRange> Program::exclusive_ranges() const {
  std::vector<ExclusiveRange> out;
  for (std::size_t i = 0; i < instructions.size(); ++i) {
    if (instructions[i].opcode != Opcode::Ldrex) continue;
    for (std::size_t j = i + 1; j < instructions.size(); ++j) {
      if (instructions[j].opcode == Opcode::Strex) {
        out.push_back({i, j});
        break;
      }
    }
  }
  return out;
}

std::vector<Region> Program::critical_regions() const {
  std::vector<Region> out;
  for (const auto& r : regions) {
    if (r.name == kCriticalRegion) out.push_back(r);
  }
  return out;
}

std::string format_operand(const Instruction& insn, std::size_t i) {
  const auto& op = insn.operands.at(i);
  const bool memory = (insn.opcode == Opcode::LdrMem || insn.opcode == Opcode::Str ||
                       insn.opcode == Opcode::Ldrex) ? i == 1
                      : insn.opcode == Opcode::Strex ? i == 2
                                                     : false;
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Reg>) {
          std::string r = "R" + std::to_string(v.id);
          return memory ? "[" + r + "]" : r;
        } else if constexpr (std::is_same_v<T, Imm>) {
          return "#" + std::to_string(v.value);
        } else if constexpr (std::is_same_v<T, SymbolRef>) {
          return "=" + v.name;
        } else {
          return v.name;
        }
      },
      op);
}

std::string format_instruction(const Instruction& insn) {
  std::string out(mnemonic(insn.opcode));
  for (std::size_t i = 0; i < insn.operands.size(); ++i) {
    out += i == 0 ? " " : ", ";
    out += format_operand(insn, i);
  }
  return out;
}

std::string format_program(const Program& program) {
  std::ostringstream os;
  for (const auto& d : program.data) os << ".data " << d.name << ' ' << d.initial << '\n';
  std::multimap<std::size_t, const Label*> by_index;
  for (const auto& l : program.labels) by_index.emplace(l.index, &l);
  for (std::size_t i = 0; i <= program.size(); ++i) {
    auto [lo, hi] = by_index.equal_range(i);
    for (auto it = lo; it != hi; ++it) os << it->second->name << ":\n";
    if (i < program.size()) os << "    " << format_instruction(program.instructions[i]) << '\n';
  }
  for (const auto& r : program.regions) {
    os << ".region " << r.name << ' ' << r.start_label << ' ' << r.end_label << '\n';
  }
  if (program.entry_label) os << ".entry " << *program.entry_label << '\n';
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string program_hash(const Program& program) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(format_program(program))));
  return std::string("fnv1a64:") + buf;
}

Program load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open program '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str());
}

Program parse_program(std::string_view text) { return Parser{}.run(text); }

}  // namespace llsc
