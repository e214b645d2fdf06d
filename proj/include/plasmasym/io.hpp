#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace plasmasym {

/// Whole-file read; throws ValidationError naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed; throws ValidationError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace plasmasym
