#include "binary_io.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace hairstrand::detail {

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(FormatErrorKind::Io, path.string(), 0, FormatError::Unit::Byte,
                      "cannot open file for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::random_device{}() % 1000000);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw FormatError(FormatErrorKind::Io, path.string(), 0, FormatError::Unit::Byte,
                        "cannot open file for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw FormatError(FormatErrorKind::Io, path.string(), 0, FormatError::Unit::Byte, "write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError(FormatErrorKind::Io, path.string(), 0, FormatError::Unit::Byte,
                      "cannot move temporary file into place");
  }
}

}  // namespace hairstrand::detail
