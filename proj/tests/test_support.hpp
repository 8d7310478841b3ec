// SPDX-License-Identifier: Apache-2.0
// Shared helpers for the test binaries.
#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "llsc/isa.hpp"

namespace llsc::testing {

inline std::string source_path(const std::string& rel) { return std::string(LLSC_SOURCE_DIR) + "/" + rel; }

inline std::shared_ptr<const Program> corpus(const std::string& name) {
  return std::make_shared<const Program>(load_program(source_path("corpus/" + name)));
}

inline std::shared_ptr<const Program> program_from(const std::string& text) {
  return std::make_shared<const Program>(parse_program(text));
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace llsc::testing
