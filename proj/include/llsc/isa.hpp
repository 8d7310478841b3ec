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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace llsc {

/// Number of general registers (R0..R12). SP/LR/PC are not modeled.
inline constexpr std::size_t kRegisterCount = 13;

/// Address of the first `.data` word; words follow at 4-byte strides.
inline constexpr std::uint32_t kDataBase = 0x1000;

enum class Opcode : std::uint8_t {
  Mov,
  LdrAddr,  // LDR Rd, =symbol
  LdrMem,   // LDR Rd, [Rn]
  Str,
  Ldrex,
  Strex,
  Clrex,
  Cmp,
  Add,
  B,
  Bne,
  Beq,
  Nop,
};

std::string_view mnemonic(Opcode op);

struct Reg {
  std::uint8_t id = 0;
  friend bool operator==(const Reg&, const Reg&) = default;
};

struct Imm {
  std::int32_t value = 0;
  friend bool operator==(const Imm&, const Imm&) = default;
};

/// `=symbol` reference, resolved to the index of the `.data` word.
struct SymbolRef {
  std::string name;
  std::size_t index = 0;
  friend bool operator==(const SymbolRef&, const SymbolRef&) = default;
};

/// Branch target, resolved to an instruction index (may equal the program
/// length, which means "fall off the end").
struct LabelRef {
  std::string name;
  std::size_t target = 0;
  friend bool operator==(const LabelRef&, const LabelRef&) = default;
};

using Operand = std::variant<Reg, Imm, SymbolRef, LabelRef>;

/// One instruction of the modeled subset. Memory operands (`[Rn]`) are
/// stored as plain `Reg`; the opcode says which operand is an address.
///
/// Operand layout per opcode:
///   MOV    Rd, Rm|#imm          LDR_ADDR Rd, =sym      LDR_MEM Rd, [Rn]
///   STR    Rt, [Rn]             LDREX    Rd, [Rn]      STREX   Rd, Rt, [Rn]
///   CMP    Ra, Rb|#imm          ADD      Rd, Rn, Rm|#imm
///   B/BNE/BEQ label             CLREX, NOP             (no operands)
struct Instruction {
  Opcode opcode = Opcode::Nop;
  std::vector<Operand> operands;
  std::size_t source_line = 0;

  /// Register written by this instruction, if any.
  std::optional<std::uint8_t> destination() const;
  bool is_branch() const {
    return opcode == Opcode::B || opcode == Opcode::Bne || opcode == Opcode::Beq;
  }
  bool is_conditional_branch() const {
    return opcode == Opcode::Bne || opcode == Opcode::Beq;
  }
  bool accesses_memory() const {
    return opcode == Opcode::LdrMem || opcode == Opcode::Str || opcode == Opcode::Ldrex ||
           opcode == Opcode::Strex;
  }

  const Reg& reg(std::size_t i) const { return std::get<Reg>(operands.at(i)); }

  // source_line is provenance only; it does not take part in equality.
  friend bool operator==(const Instruction& a, const Instruction& b) {
    return a.opcode == b.opcode && a.operands == b.operands;
  }
};

struct Label {
  std::string name;
  std::size_t index = 0;
  friend bool operator==(const Label&, const Label&) = default;
};

struct DataWord {
  std::string name;
  std::uint32_t initial = 0;
  friend bool operator==(const DataWord&, const DataWord&) = default;
};

/// Half-open PC range [start, end) between two labels.
struct Region {
  std::string name;
  std::string start_label;
  std::string end_label;
  std::size_t start = 0;
  std::size_t end = 0;

  bool contains(std::size_t pc) const { return pc >= start && pc < end; }
  friend bool operator==(const Region&, const Region&) = default;
};

/// Static LDREX..STREX window: `ldrex` and its nearest following STREX.
struct ExclusiveRange {
  std::size_t ldrex = 0;
  std::size_t strex = 0;

  /// True for PCs after the LDREX up to and including the STREX: the
  /// points a debugger can never stop at.
  bool interior(std::size_t pc) const { return pc > ldrex && pc <= strex; }
  friend bool operator==(const ExclusiveRange&, const ExclusiveRange&) = default;
};

inline constexpr std::string_view kCriticalRegion = "critical";

struct Program {
  std::vector<Instruction> instructions;
  std::vector<Label> labels;  // source order
  std::vector<DataWord> data;  // declaration order == address order
  std::vector<Region> regions;
  std::size_t entry = 0;
  std::optional<std::string> entry_label;

  std::size_t size() const { return instructions.size(); }

  std::optional<std::size_t> find_label(std::string_view name) const;
  std::optional<std::size_t> find_symbol(std::string_view name) const;
  std::uint32_t address_of(std::size_t data_index) const {
    return kDataBase + static_cast<std::uint32_t>(4 * data_index);
  }

  /// Nearest label at or before `pc`, as "label" or "label+off". When
  /// several labels share an index the last declared one wins.
  std::string label_context(std::size_t pc) const;

  /// Every LDREX paired with the nearest following STREX in listing order.
  std::vector<ExclusiveRange> exclusive_ranges() const;

  /// Regions named `critical`.
  std::vector<Region> critical_regions() const;

  friend bool operator==(const Program&, const Program&) = default;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    Syntax,
    UnknownOpcode,
    Unresolved,
    Duplicate,
    MalformedDirective,
    Empty,
  };

  ParseError(Kind kind, std::size_t line, const std::string& what);

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// Parses the assembly text format. Throws ParseError naming the line.
Program parse_program(std::string_view text);

/// Reads and parses a file; I/O failures throw std::runtime_error.
Program load_program(const std::string& path);

std::string format_operand(const Instruction& insn, std::size_t i);
std::string format_instruction(const Instruction& insn);

/// Canonical listing; parse_program(format_program(p)) == p.
std::string format_program(const Program& program);

/// FNV-1a 64 of the canonical listing, as "fnv1a64:<16 hex digits>".
std::string program_hash(const Program& program);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace llsc
