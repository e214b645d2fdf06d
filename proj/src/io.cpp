#include "plasmasym/io.hpp"

#include <fstream>
#include <sstream>

#include "plasmasym/error.hpp"

namespace plasmasym {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file '" + path.string() + "'");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

}  // namespace plasmasym
