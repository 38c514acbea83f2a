#include "hairstrand/orientation.hpp"

#include "binary_io.hpp"
#include "hairstrand/error.hpp"

#include <fmt/format.h>
#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

namespace hairstrand {

ImagePlane::ImagePlane(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw InvalidArgument(fmt::format("image dimensions must be positive, got {}x{}", width, height));
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Kernel gabor_kernel(double theta, double sigma, double wavelength, double aspect, int size) {
  if (size < 1 || size % 2 == 0 || !(sigma > 0.0) || !(wavelength > 0.0) || !(aspect > 0.0)) {
    throw InvalidArgument(fmt::format(
        "BadKernelParams: size {} (odd, positive), sigma {}, wavelength {}, aspect {} (positive)",
        size, sigma, wavelength, aspect));
  }
  Kernel k{size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int half = size / 2;
  const double c = std::cos(theta), s = std::sin(theta);
  double mean = 0.0;
  for (int y = -half; y <= half; ++y) {
    for (int x = -half; x <= half; ++x) {
      const double xr = x * c + y * s;
      const double yr = -x * s + y * c;
      const double envelope = std::exp(-(xr * xr + aspect * aspect * yr * yr) / (2.0 * sigma * sigma));
      const double v = envelope * std::cos(2.0 * std::numbers::pi * xr / wavelength);
      k.values[static_cast<std::size_t>(y + half) * size + (x + half)] = v;
      mean += v;
    }
  }
  mean /= static_cast<double>(k.values.size());
  for (auto& v : k.values) v -= mean;
  return k;
}

ImagePlane convolve(const ImagePlane& image, const Kernel& kernel) {
  const int w = image.width(), h = image.height(), half = kernel.size / 2;
  ImagePlane out(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kernel.size; ++ky) {
        const int sy = std::clamp(y + ky - half, 0, h - 1);
        for (int kx = 0; kx < kernel.size; ++kx) {
          const int sx = std::clamp(x + kx - half, 0, w - 1);
          acc += kernel.at(kx, ky) * image.at(sx, sy);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

double wrap_pi(double angle) {
  double a = std::fmod(angle, std::numbers::pi);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a = 0.0;
  return a;
}

double delta_theta(double a, double b) {
  const double d = std::abs(wrap_pi(a) - wrap_pi(b));
  return std::min(d, std::numbers::pi - d);
}

OrientationMap orient_map(const GrayImage& image, const GaborParams& params) {
  if (params.num_angles < 4) throw InvalidArgument("orient_map needs at least 4 filter angles");
  const int w = image.width(), h = image.height();
  const auto n = params.num_angles;

  std::vector<ImagePlane> responses;
  responses.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double angle = std::numbers::pi * k / n;
    responses.push_back(convolve(image, gabor_kernel(angle, params.sigma, params.wavelength,
                                                     params.aspect, params.size)));
  }

  OrientationMap map{ImagePlane(w, h), ImagePlane(w, h)};
  double max_variance = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best = 0;
      double best_mag = -1.0, sum = 0.0, sum_sq = 0.0;
      for (int k = 0; k < n; ++k) {
        const double mag = std::abs(responses[k].at(x, y));
        if (mag > best_mag) {
          best_mag = mag;
          best = k;
        }
        sum += mag;
        sum_sq += mag * mag;
      }
      const double mean = sum / n;
      const double variance = std::max(0.0, sum_sq / n - mean * mean);
      // The strongest carrier runs across the lines, so the line is a quarter turn away.
      map.theta.at(x, y) = wrap_pi(std::numbers::pi * best / n + 0.5 * std::numbers::pi);
      map.confidence.at(x, y) = variance;
      max_variance = std::max(max_variance, variance);
    }
  }
  // Below this the image carries no oriented structure at all.
  constexpr double kFlatVariance = 1e-20;
  for (auto& c : map.confidence.values()) {
    c = max_variance > kFlatVariance ? c / max_variance : 0.0;
  }
  return map;
}

double orientation_loss(const OrientationMap& pred, const OrientationMap& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw DimensionMismatch(fmt::format("orientation maps differ: {}x{} vs {}x{}", pred.width(),
                                        pred.height(), gt.width(), gt.height()));
  }
  double sum = 0.0;
  const auto pt = pred.theta.values();
  const auto gtv = gt.theta.values();
  const auto gc = gt.confidence.values();
  for (std::size_t i = 0; i < pt.size(); ++i) sum += delta_theta(pt[i], gtv[i]) * gc[i];
  return sum / static_cast<double>(pt.size());
}

double mask_loss(const MaskImage& pred, const MaskImage& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw DimensionMismatch(fmt::format("masks differ: {}x{} vs {}x{}", pred.width(), pred.height(),
                                        gt.width(), gt.height()));
  }
  double sum = 0.0;
  const auto p = pred.values();
  const auto m = gt.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kMaskEpsilon, 1.0 - kMaskEpsilon);
    sum += m[i] * std::log(q) + (1.0 - m[i]) * std::log(1.0 - q);
  }
  return -sum / static_cast<double>(p.size());
}

namespace {

GrayImage read_pgm(const std::string& bytes, const std::string& path) {
  std::size_t pos = 2;
  const bool binary = bytes[1] == '5';
  auto fail = [&](const std::string& what) -> void {
    throw FormatError(FormatErrorKind::Parse, path, pos, FormatError::Unit::Byte, what);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> long {
    skip_space();
    if (pos >= bytes.size()) {
      throw FormatError(FormatErrorKind::Truncated, path, pos, FormatError::Unit::Byte, "PGM header");
    }
    if (!std::isdigit(static_cast<unsigned char>(bytes[pos]))) fail("expected a number");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1'000'000) fail("number too large");
    }
    return v;
  };
  const long w = number(), h = number(), maxval = number();
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) fail("bad PGM header values");
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  const auto count = static_cast<std::size_t>(w * h);
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + count * bpp) {
      throw FormatError(FormatErrorKind::Truncated, path, bytes.size(), FormatError::Unit::Byte,
                        "PGM pixel data");
    }
    for (std::size_t i = 0; i < count; ++i) {
      const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * bpp);
      const unsigned v = bpp == 2 ? (b[0] << 8 | b[1]) : b[0];
      img.values()[i] = static_cast<double>(v) / maxval;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      img.values()[i] = std::min(1.0, static_cast<double>(number()) / maxval);
    }
  }
  return img;
}

GrayImage read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw FormatError(FormatErrorKind::Parse, path.string(), 0, FormatError::Unit::Byte,
                      fmt::format("PNG: {}", png.message));
  }
  png.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw FormatError(FormatErrorKind::Parse, path.string(), 0, FormatError::Unit::Byte,
                      fmt::format("PNG: {}", msg));
  }
  GrayImage img(static_cast<int>(png.width), static_cast<int>(png.height));
  for (std::size_t i = 0; i < buf.size(); ++i) img.values()[i] = buf[i] / 255.0;
  return img;
}

}  // namespace

GrayImage read_gray_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) {
    return read_pgm(bytes, path.string());
  }
  if (bytes.size() >= 8 && static_cast<unsigned char>(bytes[0]) == 0x89 && bytes.substr(1, 3) == "PNG") {
    return read_png(path);
  }
  throw FormatError(FormatErrorKind::BadMagic, path.string(), 0, FormatError::Unit::Byte,
                    "expected a PGM (P2/P5) or PNG image");
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::string bytes = fmt::format("P5\n{} {}\n255\n", image.width(), image.height());
  for (const double v : image.values()) {
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  }
  detail::write_file_atomic(path, bytes);
}

void write_orientation_map(const std::filesystem::path& path, const OrientationMap& map) {
  detail::ByteWriter w;
  w.write_bytes("ORI1");
  w.write(static_cast<std::uint32_t>(map.width()));
  w.write(static_cast<std::uint32_t>(map.height()));
  for (const double v : map.theta.values()) w.write(static_cast<float>(v));
  for (const double v : map.confidence.values()) w.write(static_cast<float>(v));
  detail::write_file_atomic(path, w.bytes());
}

OrientationMap read_orientation_map(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader r(bytes, path.string());
  if (r.read_bytes(4, "magic") != "ORI1") {
    throw FormatError(FormatErrorKind::BadMagic, path.string(), 0, FormatError::Unit::Byte,
                      "expected ORI1");
  }
  const auto w = r.read<std::uint32_t>("width");
  const auto h = r.read<std::uint32_t>("height");
  if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16) r.fail(FormatErrorKind::Parse, "bad dimensions");
  r.require(static_cast<std::size_t>(w) * h * 8, "map planes");
  OrientationMap map{ImagePlane(static_cast<int>(w), static_cast<int>(h)),
                     ImagePlane(static_cast<int>(w), static_cast<int>(h))};
  for (auto& v : map.theta.values()) v = r.read<float>("theta");
  for (auto& v : map.confidence.values()) v = r.read<float>("confidence");
  return map;
}

}  // namespace hairstrand
