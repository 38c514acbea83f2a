#include "hairstrand/error.hpp"

#include <fmt/format.h>

namespace hairstrand {

std::string to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::BadMagic: return "BadMagic";
    case FormatErrorKind::Truncated: return "TruncatedFile";
    case FormatErrorKind::FlagMismatch: return "FlagMismatch";
    case FormatErrorKind::CountMismatch: return "CountMismatch";
    case FormatErrorKind::Parse: return "ParseError";
    case FormatErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

FormatError::FormatError(FormatErrorKind kind, std::string path, std::uint64_t position,
                         Unit unit, const std::string& detail)
    : Error(fmt::format("{}: {} at {} {}: {}", to_string(kind), path,
                        unit == Unit::Byte ? "byte" : "line", position, detail)),
      kind_(kind),
      path_(std::move(path)),
      position_(position),
      unit_(unit) {}

}  // namespace hairstrand
