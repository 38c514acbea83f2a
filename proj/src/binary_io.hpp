#pragma once

// Internal helpers for little-endian binary files.

#include "hairstrand/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hairstrand::detail {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

std::string read_file_bytes(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string path) : bytes_(bytes), path_(std::move(path)) {}

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  template <typename T>
  T read(const char* what) {
    T value;
    require(sizeof(T), what);
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view read_bytes(std::size_t n, const char* what) {
    require(n, what);
    auto v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
  }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(FormatErrorKind::Truncated, path_, pos_, FormatError::Unit::Byte,
                        std::string("unexpected end of file reading ") + what);
    }
  }

  [[noreturn]] void fail(FormatErrorKind kind, const std::string& detail) const {
    throw FormatError(kind, path_, pos_, FormatError::Unit::Byte, detail);
  }

 private:
  std::string_view bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

class ByteWriter {
 public:
  template <typename T>
  void write(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }
  void write_bytes(std::string_view b) { bytes_.append(b); }
  const std::string& bytes() const noexcept { return bytes_; }

 private:
  std::string bytes_;
};

}  // namespace hairstrand::detail
