#include "config_file.hpp"

#include "hairstrand/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace hairstrand::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError(FormatErrorKind::Io, path.string(), 0, FormatError::Unit::Line, "cannot open config file");
  }
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::uint64_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(FormatErrorKind::Parse, path.string(), number, FormatError::Unit::Line,
                        "expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw FormatError(FormatErrorKind::Parse, path.string(), number, FormatError::Unit::Line, "empty key");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) {
      throw FormatError(FormatErrorKind::Io, path.string(), 0, FormatError::Unit::Byte, "write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError(FormatErrorKind::Io, path.string(), 0, FormatError::Unit::Byte, "cannot rename into place");
  }
}

}  // namespace hairstrand::cli
