#pragma once

#include <filesystem>
#include <string>

namespace ylr {

std::string read_text_file(const std::filesystem::path& path);

// Write to a sibling temp file, then rename over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ylr
