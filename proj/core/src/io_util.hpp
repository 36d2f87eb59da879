#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "reuseplan/error.hpp"

namespace reuseplan::detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace reuseplan::detail
