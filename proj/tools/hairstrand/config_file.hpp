#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hairstrand::cli {

/// `key = value` lines; `#` starts a comment. Keys keep file order.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace hairstrand::cli
