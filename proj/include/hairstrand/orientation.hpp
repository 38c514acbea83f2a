#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace hairstrand {

/// Row-major H×W buffer of doubles.
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Intensities in [0, 1].
using GrayImage = ImagePlane;
/// Mask probabilities in [0, 1].
using MaskImage = ImagePlane;

/// Per-pixel undirected line angle in [0, π) and confidence in [0, 1].
/// Angles are measured in pixel coordinates: x to the right, y down.
struct OrientationMap {
  ImagePlane theta;
  ImagePlane confidence;

  int width() const noexcept { return theta.width(); }
  int height() const noexcept { return theta.height(); }
};

struct GaborParams {
  int num_angles = 32;
  double sigma = 2.0;       ///< px
  double wavelength = 4.0;  ///< px
  double aspect = 0.5;
  int size = 9;  ///< odd kernel side, px
};

/// Square kernel, row-major, side `size`.
struct Kernel {
  int size = 0;
  std::vector<double> values;
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * size + x]; }
};

/// Real Gabor kernel whose carrier oscillates along direction `theta`
/// (so it responds to stripes running perpendicular to `theta`), with its
/// mean removed. Throws InvalidArgument (BadKernelParams) on bad parameters.
Kernel gabor_kernel(double theta, double sigma, double wavelength, double aspect, int size);

/// Correlation with replicated borders; rows are processed in parallel.
ImagePlane convolve(const ImagePlane& image, const Kernel& kernel);

/// Wraps an angle into [0, π).
double wrap_pi(double angle);

/// min(|a − b|, π − |a − b|) after wrapping both into [0, π).
double delta_theta(double a, double b);

/// Dominant line orientation per pixel from a Gabor filter bank. Confidence is
/// the variance of the response magnitudes across angles divided by its
/// image-wide maximum.
OrientationMap orient_map(const GrayImage& image, const GaborParams& params = {});

/// Σ Δθ(pred, gt)·C_gt / (H·W). Throws DimensionMismatch.
double orientation_loss(const OrientationMap& pred, const OrientationMap& gt);

inline constexpr double kMaskEpsilon = 1e-7;

/// Mean binary cross-entropy with predictions clamped to [ε, 1 − ε].
double mask_loss(const MaskImage& pred, const MaskImage& gt);

/// 8/16-bit PGM (P2/P5) or PNG, converted to gray in [0, 1].
GrayImage read_gray_image(const std::filesystem::path& path);
/// 8-bit binary PGM.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// "ORI1", u32 width, u32 height (little-endian), then H×W float32 theta and
/// H×W float32 confidence, row-major.
void write_orientation_map(const std::filesystem::path& path, const OrientationMap& map);
OrientationMap read_orientation_map(const std::filesystem::path& path);

}  // namespace hairstrand
