#pragma once

#include "hairstrand/io.hpp"

#include <filesystem>
#include <optional>

namespace hairstrand::cli {

enum class StrandFormat { Hair, Usc, Native };

/// `.hair` is cyHair, `.data` is USC-HairSalon, anything else is native text.
StrandFormat format_of(const std::filesystem::path& path);

/// USC input needs `unit_scale`; InvalidArgument otherwise.
LoadedStrands load_strands(const std::filesystem::path& path, std::optional<double> unit_scale = std::nullopt);
void save_strands(const std::filesystem::path& path, const StrandSet& set);

}  // namespace hairstrand::cli
