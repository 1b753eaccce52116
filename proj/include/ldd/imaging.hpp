#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace ldd {

/// Row-major raster; rows index y, columns index x.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Single-channel image with luminance in [0,1].
class GrayImage {
 public:
  GrayImage() = default;
  /// Takes ownership of `pixels`; throws InvalidArgument on empty data or
  /// values outside [0,1].
  explicit GrayImage(Raster<float> pixels);
  GrayImage(int width, int height, float fill);

  int width() const { return static_cast<int>(pixels_.cols()); }
  int height() const { return static_cast<int>(pixels_.rows()); }
  bool empty() const { return pixels_.size() == 0; }

  float operator()(int x, int y) const { return pixels_(y, x); }
  const Raster<float>& pixels() const { return pixels_; }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.pixels_.rows() == b.pixels_.rows() && a.pixels_.cols() == b.pixels_.cols() &&
           (a.pixels_ == b.pixels_).all();
  }

 private:
  Raster<float> pixels_;
};

/// 8-bit interleaved RGB, used where color has to survive (region crops for
/// the external feature exporter).
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width*height*3, row-major

  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

/// Per-pixel Sobel response. Orientation is folded into [0, pi).
struct GradientMap {
  Raster<float> magnitude;
  Raster<float> orientation;

  int width() const { return static_cast<int>(magnitude.cols()); }
  int height() const { return static_cast<int>(magnitude.rows()); }
};

/// ITU-R 601 luminance of an 8-bit RGB triple, in [0,1].
inline float luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<float>((0.299 * r + 0.587 * g + 0.114 * b) / 255.0);
}

/// Decodes a PNG or JPEG file (format sniffed from the leading bytes).
RgbImage load_rgb(const std::filesystem::path& path);
GrayImage to_gray(const RgbImage& rgb);
GrayImage load_image(const std::filesystem::path& path);

/// Writes 8-bit RGB PNG. Used only for exporting region crops.
void write_png(const RgbImage& img, const std::filesystem::path& path);

/// Corner-aligned bilinear resampling of a raster to `width` x `height`.
template <typename Scalar>
Raster<Scalar> resample_bilinear(const Raster<Scalar>& src, int width, int height);

GrayImage resize_bilinear(const GrayImage& img, int width, int height);
RgbImage resize_bilinear(const RgbImage& img, int width, int height);

/// Copies the sub-rectangle [x1,x2) x [y1,y2).
GrayImage crop(const GrayImage& img, int x1, int y1, int x2, int y2);
RgbImage crop(const RgbImage& img, int x1, int y1, int x2, int y2);

GrayImage mirror_horizontal(const GrayImage& img);

/// 3x3 Sobel gradients; the one-pixel border has zero magnitude.
GradientMap gradient_map(const GrayImage& img);

// ---------------------------------------------------------------------------

template <typename Scalar>
Raster<Scalar> resample_bilinear(const Raster<Scalar>& src, int width, int height) {
  const auto src_w = static_cast<int>(src.cols());
  const auto src_h = static_cast<int>(src.rows());
  if (width == src_w && height == src_h) return src;

  // Corner-aligned: output sample 0 maps to input 0 and the last output
  // sample maps to the last input sample. A single output sample takes the
  // centre of the input.
  auto source_coord = [](int i, int out_n, int in_n) {
    if (out_n == 1) return 0.5 * (in_n - 1);
    return static_cast<double>(i) * (in_n - 1) / (out_n - 1);
  };

  Raster<Scalar> out(height, width);
  for (int y = 0; y < height; ++y) {
    const double sy = source_coord(y, height, src_h);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double fy = sy - y0;
    for (int x = 0; x < width; ++x) {
      const double sx = source_coord(x, width, src_w);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double fx = sx - x0;
      const double top = (1.0 - fx) * src(y0, x0) + fx * src(y0, x1);
      const double bottom = (1.0 - fx) * src(y1, x0) + fx * src(y1, x1);
      out(y, x) = static_cast<Scalar>((1.0 - fy) * top + fy * bottom);
    }
  }
  return out;
}

}  // namespace ldd
