#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace bcall {

/// Shortest round-trippable text is not needed for reproduction checks; all
/// numeric output uses 12 significant digits so reruns compare byte-for-byte.
std::string format_number(double v);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace bcall
