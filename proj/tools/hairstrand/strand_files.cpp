#include "strand_files.hpp"

#include "hairstrand/error.hpp"

#include <algorithm>
#include <cctype>

namespace hairstrand::cli {

StrandFormat format_of(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".hair") return StrandFormat::Hair;
  if (ext == ".data") return StrandFormat::Usc;
  return StrandFormat::Native;
}

LoadedStrands load_strands(const std::filesystem::path& path, std::optional<double> unit_scale) {
  switch (format_of(path)) {
    case StrandFormat::Hair:
      return read_hair(path, unit_scale.value_or(1.0));
    case StrandFormat::Usc:
      if (!unit_scale) throw InvalidArgument("USC files carry no units; pass --unit-scale (mm per file unit)");
      return read_usc(path, *unit_scale);
    case StrandFormat::Native:
      break;
  }
  if (unit_scale) throw InvalidArgument("native files record their own unit; --unit-scale does not apply");
  return LoadedStrands{read_native(path), 0, 0};
}

void save_strands(const std::filesystem::path& path, const StrandSet& set) {
  switch (format_of(path)) {
    case StrandFormat::Hair:
      write_hair(path, set);
      return;
    case StrandFormat::Usc:
      write_usc(path, set);
      return;
    case StrandFormat::Native:
      write_native(path, set);
      return;
  }
}

}  // namespace hairstrand::cli
