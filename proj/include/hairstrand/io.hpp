#pragma once

#include "hairstrand/refine.hpp"
#include "hairstrand/strand.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace hairstrand {

/// Bits of HairFileHeader::flags.
enum HairFlag : std::uint32_t {
  kHairHasSegments = 1u << 0,
  kHairHasPoints = 1u << 1,
  kHairHasThickness = 1u << 2,
  kHairHasTransparency = 1u << 3,
  kHairHasColor = 1u << 4,
};

/// 128-byte little-endian header of a cyHair `.hair` file.
struct HairFileHeader {
  std::uint32_t strand_count = 0;
  std::uint32_t point_count = 0;
  std::uint32_t flags = 0;
  std::uint32_t default_segments = 0;
  float default_thickness = 0.0f;
  float default_transparency = 0.0f;
  std::array<float, 3> default_color{};
  std::array<char, 88> info{};
};

inline constexpr std::size_t kHairHeaderSize = 128;

/// A loaded strand set plus what the loader had to discard.
struct LoadedStrands {
  StrandSet strands;
  std::size_t dropped_strands = 0;  ///< fewer than two distinct points
  std::size_t dropped_joints = 0;   ///< repeated consecutive points
};

/// Strand ids are the strand's index in the file. Coordinates are multiplied
/// by `unit_scale` (mm per file unit).
LoadedStrands read_hair(const std::filesystem::path& path, double unit_scale = 1.0);
HairFileHeader read_hair_header(const std::filesystem::path& path);
/// Writes every optional array. Thickness is stored per point: each point
/// takes its outgoing segment's thickness and the last point repeats the
/// previous one.
void write_hair(const std::filesystem::path& path, const StrandSet& set);

/// USC-HairSalon `.data` files carry no units, so `unit_scale` is required.
LoadedStrands read_usc(const std::filesystem::path& path, double unit_scale);
void write_usc(const std::filesystem::path& path, const StrandSet& set);

/// Line-oriented text; see docs/native-format.md.
StrandSet read_native(const std::filesystem::path& path);
void write_native(const std::filesystem::path& path, const StrandSet& set);
std::string format_native(const StrandSet& set);
StrandSet parse_native(const std::string& text, const std::string& path = "<memory>");

/// One `x y z dx dy dz` sample per line; directions are renormalized.
OrientedPointCloud read_oriented_cloud(const std::filesystem::path& path);
void write_oriented_cloud(const std::filesystem::path& path, const OrientedPointCloud& cloud);

}  // namespace hairstrand
