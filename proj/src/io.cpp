#include "hairstrand/io.hpp"

#include "binary_io.hpp"
#include "hairstrand/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <optional>
#include <string_view>

namespace hairstrand {

namespace {

constexpr double kLogitClamp = 15.0;
constexpr std::uint32_t kAllHairArrays =
    kHairHasSegments | kHairHasPoints | kHairHasThickness | kHairHasTransparency | kHairHasColor;

struct RawStrand {
  std::vector<Point3> points;
  std::vector<double> thickness;  // per point
  StrandAttributes attributes;
};

// Removes repeated consecutive points and turns per-point thickness into
// per-segment thickness. Returns nullopt when fewer than two points remain.
std::optional<Strand> clean_strand(StrandId id, RawStrand raw, LoadedStrands& report) {
  std::vector<Point3> joints;
  std::vector<double> thickness;
  for (std::size_t i = 0; i < raw.points.size(); ++i) {
    if (!joints.empty() && (raw.points[i] - joints.back()).norm() <= kMinSegmentLength) {
      ++report.dropped_joints;
      continue;
    }
    joints.push_back(raw.points[i]);
    const double t = raw.thickness[i];
    thickness.push_back(std::isfinite(t) && t > 0.0 ? t : kDefaultThickness);
  }
  if (joints.size() < 2) {
    ++report.dropped_strands;
    return std::nullopt;
  }
  thickness.pop_back();
  return Strand(id, std::move(joints), std::move(thickness), raw.attributes);
}

double opacity_logit_from_transparency(double transparency) {
  return std::clamp(logit(1.0 - transparency), -kLogitClamp, kLogitClamp);
}

void check_unit_scale(double unit_scale) {
  if (!(unit_scale > 0.0) || !std::isfinite(unit_scale)) {
    throw InvalidArgument(fmt::format("unit scale must be positive and finite, got {}", unit_scale));
  }
}

HairFileHeader parse_header(detail::ByteReader& r, const std::string& path) {
  if (r.read_bytes(4, "magic") != "HAIR") {
    throw FormatError(FormatErrorKind::BadMagic, path, 0, FormatError::Unit::Byte, "expected \"HAIR\"");
  }
  HairFileHeader h;
  h.strand_count = r.read<std::uint32_t>("strand count");
  h.point_count = r.read<std::uint32_t>("point count");
  h.flags = r.read<std::uint32_t>("flags");
  h.default_segments = r.read<std::uint32_t>("default segment count");
  h.default_thickness = r.read<float>("default thickness");
  h.default_transparency = r.read<float>("default transparency");
  for (auto& c : h.default_color) c = r.read<float>("default color");
  const auto info = r.read_bytes(88, "info string");
  std::memcpy(h.info.data(), info.data(), 88);
  return h;
}

}  // namespace

HairFileHeader read_hair_header(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader r(bytes, path.string());
  return parse_header(r, path.string());
}

LoadedStrands read_hair(const std::filesystem::path& path, double unit_scale) {
  check_unit_scale(unit_scale);
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader r(bytes, path.string());
  const auto h = parse_header(r, path.string());
  if (!(h.flags & kHairHasPoints)) r.fail(FormatErrorKind::FlagMismatch, "points array flag (bit 1) not set");

  std::vector<std::uint32_t> segments;
  std::uint64_t expected = 0;
  if (h.flags & kHairHasSegments) {
    r.require(static_cast<std::size_t>(h.strand_count) * 2, "segments array");
    segments.resize(h.strand_count);
    for (auto& s : segments) {
      s = r.read<std::uint16_t>("segments array");
      expected += static_cast<std::uint64_t>(s) + 1;
    }
  } else {
    expected = static_cast<std::uint64_t>(h.strand_count) * (static_cast<std::uint64_t>(h.default_segments) + 1);
  }
  if (expected != h.point_count) {
    r.fail(FormatErrorKind::CountMismatch,
           fmt::format("segment counts imply {} points but the header declares {}", expected, h.point_count));
  }
  const std::size_t n = h.point_count;
  const std::size_t points_at = r.position();
  r.require(n * 12, "points array");
  std::vector<float> xyz(n * 3);
  for (auto& v : xyz) v = r.read<float>("points array");
  // The points array bounds the strand count, so this allocation is safe.
  if (!(h.flags & kHairHasSegments)) segments.assign(h.strand_count, h.default_segments);
  std::vector<float> thickness(n, h.default_thickness);
  if (h.flags & kHairHasThickness) {
    r.require(n * 4, "thickness array");
    for (auto& v : thickness) v = r.read<float>("thickness array");
  }
  std::vector<float> transparency(n, h.default_transparency);
  if (h.flags & kHairHasTransparency) {
    r.require(n * 4, "transparency array");
    for (auto& v : transparency) v = r.read<float>("transparency array");
  }
  std::vector<float> color(n * 3);
  for (std::size_t i = 0; i < n; ++i) std::copy(h.default_color.begin(), h.default_color.end(), color.begin() + 3 * i);
  if (h.flags & kHairHasColor) {
    r.require(n * 12, "color array");
    for (auto& v : color) v = r.read<float>("color array");
  }
  if (r.remaining() != 0) {
    r.fail(FormatErrorKind::CountMismatch, fmt::format("{} trailing bytes after the last array", r.remaining()));
  }

  LoadedStrands out;
  std::vector<Strand> strands;
  std::size_t p = 0;
  for (std::uint32_t s = 0; s < h.strand_count; ++s) {
    RawStrand raw;
    const std::size_t count = segments[s] + 1;
    for (std::size_t k = 0; k < count; ++k, ++p) {
      const Point3 q(xyz[3 * p], xyz[3 * p + 1], xyz[3 * p + 2]);
      if (!q.allFinite()) {
        throw FormatError(FormatErrorKind::Parse, path.string(), points_at + 12 * p, FormatError::Unit::Byte,
                          "non-finite point coordinate");
      }
      raw.points.push_back(unit_scale * q);
      raw.thickness.push_back(unit_scale * thickness[p]);
    }
    const std::size_t first = p - count;
    const double t = transparency[first];
    raw.attributes.opacity_logit = std::isfinite(t) ? opacity_logit_from_transparency(t) : kDefaultOpacityLogit;
    raw.attributes.color = Eigen::Vector3d(color[3 * first], color[3 * first + 1], color[3 * first + 2]);
    if (!raw.attributes.color.allFinite()) raw.attributes.color = Eigen::Vector3d::Constant(0.5);
    if (auto strand = clean_strand(s, std::move(raw), out)) strands.push_back(std::move(*strand));
  }
  out.strands = StrandSet(std::move(strands), unit_scale);
  return out;
}

void write_hair(const std::filesystem::path& path, const StrandSet& set) {
  const double scale = set.unit_scale();
  std::uint64_t points = 0;
  for (const auto& s : set.strands()) {
    if (s.segment_count() > 0xffff) {
      throw InvalidArgument(fmt::format("strand {} has {} segments; HAIR stores at most 65535", s.id(),
                                        s.segment_count()));
    }
    points += s.joint_count();
  }
  if (set.size() > 0xffffffffULL || points > 0xffffffffULL) throw InvalidArgument("too many points for HAIR");

  detail::ByteWriter w;
  w.write_bytes("HAIR");
  w.write(static_cast<std::uint32_t>(set.size()));
  w.write(static_cast<std::uint32_t>(points));
  w.write(kAllHairArrays);
  w.write(std::uint32_t{0});
  w.write(static_cast<float>(kDefaultThickness));
  w.write(0.0f);
  for (int c = 0; c < 3; ++c) w.write(0.5f);
  char info[88] = {};
  std::strncpy(info, "hairstrand", sizeof info - 1);
  w.write_bytes(std::string_view(info, sizeof info));

  for (const auto& s : set.strands()) w.write(static_cast<std::uint16_t>(s.segment_count()));
  for (const auto& s : set.strands())
    for (const auto& p : s.joints())
      for (int c = 0; c < 3; ++c) w.write(static_cast<float>(p[c] / scale));
  for (const auto& s : set.strands()) {
    const auto t = s.thickness();
    for (std::size_t j = 0; j < s.joint_count(); ++j) {
      w.write(static_cast<float>(t[std::min(j, t.size() - 1)] / scale));
    }
  }
  for (const auto& s : set.strands()) {
    const auto transparency =
        static_cast<float>(1.0 - sigmoid(std::clamp(s.opacity_logit(), -kLogitClamp, kLogitClamp)));
    for (std::size_t j = 0; j < s.joint_count(); ++j) w.write(transparency);
  }
  for (const auto& s : set.strands())
    for (std::size_t j = 0; j < s.joint_count(); ++j)
      for (int c = 0; c < 3; ++c) w.write(static_cast<float>(s.color()[c]));
  detail::write_file_atomic(path, w.bytes());
}

LoadedStrands read_usc(const std::filesystem::path& path, double unit_scale) {
  check_unit_scale(unit_scale);
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader r(bytes, path.string());
  const auto strand_count = r.read<std::uint32_t>("strand count");
  LoadedStrands out;
  std::vector<Strand> strands;
  for (std::uint32_t s = 0; s < strand_count; ++s) {
    const auto count = r.read<std::uint32_t>("strand point count");
    r.require(static_cast<std::size_t>(count) * 12, "strand points");
    RawStrand raw;
    for (std::uint32_t k = 0; k < count; ++k) {
      const std::size_t at = r.position();
      Point3 q;
      for (int c = 0; c < 3; ++c) q[c] = r.read<float>("strand points");
      if (!q.allFinite()) {
        throw FormatError(FormatErrorKind::Parse, path.string(), at, FormatError::Unit::Byte,
                          "non-finite point coordinate");
      }
      raw.points.push_back(unit_scale * q);
      raw.thickness.push_back(kDefaultThickness);
    }
    if (auto strand = clean_strand(s, std::move(raw), out)) strands.push_back(std::move(*strand));
  }
  if (r.remaining() != 0) {
    r.fail(FormatErrorKind::CountMismatch, fmt::format("{} trailing bytes after the last strand", r.remaining()));
  }
  out.strands = StrandSet(std::move(strands), unit_scale);
  return out;
}

void write_usc(const std::filesystem::path& path, const StrandSet& set) {
  detail::ByteWriter w;
  w.write(static_cast<std::uint32_t>(set.size()));
  for (const auto& s : set.strands()) {
    w.write(static_cast<std::uint32_t>(s.joint_count()));
    for (const auto& p : s.joints())
      for (int c = 0; c < 3; ++c) w.write(static_cast<float>(p[c] / set.unit_scale()));
  }
  detail::write_file_atomic(path, w.bytes());
}

namespace {

// Splits text into lines, tracking 1-based line numbers. Blank lines and
// lines starting with '#' are skipped.
class LineReader {
 public:
  LineReader(std::string_view text, std::string path) : text_(text), path_(std::move(path)) {
    if (!text_.empty() && text_.back() != '\n') {
      const auto lines = static_cast<std::uint64_t>(std::count(text_.begin(), text_.end(), '\n')) + 1;
      throw FormatError(FormatErrorKind::Truncated, path_, lines, FormatError::Unit::Line,
                        "file does not end with a newline");
    }
  }

  /// Next content line split into tokens; nullopt at end of file.
  std::optional<std::vector<std::string_view>> next() {
    while (pos_ < text_.size()) {
      const auto end = text_.find('\n', pos_);
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      auto tokens = split(line);
      if (tokens.empty() || tokens.front().front() == '#') continue;
      return tokens;
    }
    return std::nullopt;
  }

  std::vector<std::string_view> expect(const char* what) {
    auto t = next();
    if (!t) {
      throw FormatError(FormatErrorKind::Truncated, path_, line_ + 1, FormatError::Unit::Line,
                        fmt::format("unexpected end of file, expected {}", what));
    }
    return *t;
  }

  [[noreturn]] void fail(const std::string& detail) const {
    throw FormatError(FormatErrorKind::Parse, path_, line_, FormatError::Unit::Line, detail);
  }

  double number(std::string_view token) const {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || end != token.data() + token.size() || !std::isfinite(v)) {
      fail(fmt::format("expected a finite number, got '{}'", token));
    }
    return v;
  }

  std::int64_t integer(std::string_view token) const {
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || end != token.data() + token.size()) {
      fail(fmt::format("expected an integer, got '{}'", token));
    }
    return v;
  }

  std::uint64_t line() const noexcept { return line_; }

 private:
  static std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      const auto start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
  }

  std::string_view text_;
  std::string path_;
  std::size_t pos_ = 0;
  std::uint64_t line_ = 0;
};

}  // namespace

StrandSet parse_native(const std::string& text, const std::string& path) {
  LineReader in(text, path);
  const auto header = in.expect("header line");
  if (header.size() != 4 || header[0] != "strands" || header[2] != "unit_mm") {
    in.fail("header must read 'strands N unit_mm S'");
  }
  const auto n = in.integer(header[1]);
  const double unit = in.number(header[3]);
  if (n < 0) in.fail("strand count must be non-negative");
  if (!(unit > 0.0)) in.fail("unit_mm must be positive");

  std::vector<Strand> strands;
  for (std::int64_t s = 0; s < n; ++s) {
    const auto head = in.expect("strand line");
    if (head.size() != 8 || head[0] != "strand") in.fail("strand line must read 'strand id J m a r g b'");
    const auto strand_line = in.line();
    const auto id = in.integer(head[1]);
    const auto joints_count = in.integer(head[2]);
    if (joints_count < 2) in.fail("a strand needs at least 2 joints");
    StrandAttributes attributes;
    attributes.mask_logit = in.number(head[3]);
    attributes.opacity_logit = in.number(head[4]);
    attributes.color = Eigen::Vector3d(in.number(head[5]), in.number(head[6]), in.number(head[7]));

    std::vector<Point3> joints;
    std::vector<double> thickness;
    for (std::int64_t j = 0; j < joints_count; ++j) {
      const auto t = in.expect("joint line");
      if (t.size() != 3 && t.size() != 4) in.fail("joint line must read 'x y z [t]'");
      joints.emplace_back(unit * in.number(t[0]), unit * in.number(t[1]), unit * in.number(t[2]));
      double th = kDefaultThickness;
      if (t.size() == 4) {
        th = unit * in.number(t[3]);
        if (!(th > 0.0)) in.fail("thickness must be positive");
      }
      if (j + 1 < joints_count) thickness.push_back(th);
    }
    try {
      strands.emplace_back(id, std::move(joints), std::move(thickness), attributes);
    } catch (const Error& e) {
      throw FormatError(FormatErrorKind::Parse, path, strand_line, FormatError::Unit::Line, e.what());
    }
  }
  if (in.next()) in.fail(fmt::format("content after the declared {} strands", n));
  try {
    return StrandSet(std::move(strands), unit);
  } catch (const InvalidArgument& e) {
    throw FormatError(FormatErrorKind::Parse, path, 1, FormatError::Unit::Line, e.what());
  }
}

StrandSet read_native(const std::filesystem::path& path) {
  return parse_native(detail::read_file_bytes(path), path.string());
}

std::string format_native(const StrandSet& set) {
  const double unit = set.unit_scale();
  std::string out = fmt::format("strands {} unit_mm {:.9g}\n", set.size(), unit);
  for (const auto& s : set.strands()) {
    const auto& c = s.color();
    fmt::format_to(std::back_inserter(out), "strand {} {} {:.9g} {:.9g} {:.9g} {:.9g} {:.9g}\n", s.id(),
                   s.joint_count(), s.mask_logit(), s.opacity_logit(), c.x(), c.y(), c.z());
    const auto joints = s.joints();
    const auto thickness = s.thickness();
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const auto& p = joints[j];
      fmt::format_to(std::back_inserter(out), "{:.9g} {:.9g} {:.9g} {:.9g}\n", p.x() / unit, p.y() / unit,
                     p.z() / unit, thickness[std::min(j, thickness.size() - 1)] / unit);
    }
  }
  return out;
}

void write_native(const std::filesystem::path& path, const StrandSet& set) {
  detail::write_file_atomic(path, format_native(set));
}

OrientedPointCloud read_oriented_cloud(const std::filesystem::path& path) {
  const auto text = detail::read_file_bytes(path);
  LineReader in(text, path.string());
  std::vector<Point3> points;
  std::vector<Dir3> directions;
  while (const auto t = in.next()) {
    if (t->size() != 6) in.fail("sample line must read 'x y z dx dy dz'");
    double v[6];
    for (int i = 0; i < 6; ++i) v[i] = in.number((*t)[i]);
    const auto d = Dir3::try_normalized(Eigen::Vector3d(v[3], v[4], v[5]));
    if (!d) in.fail("zero-length direction");
    points.emplace_back(v[0], v[1], v[2]);
    directions.push_back(*d);
  }
  return OrientedPointCloud(std::move(points), std::move(directions));
}

void write_oriented_cloud(const std::filesystem::path& path, const OrientedPointCloud& cloud) {
  std::string out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points()[i];
    const auto& d = cloud.directions()[i];
    fmt::format_to(std::back_inserter(out), "{:.9g} {:.9g} {:.9g} {:.9g} {:.9g} {:.9g}\n", p.x(), p.y(), p.z(),
                   d.x(), d.y(), d.z());
  }
  detail::write_file_atomic(path, out);
}

}  // namespace hairstrand
