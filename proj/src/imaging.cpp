#include "ldd/imaging.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ldd/error.hpp"

namespace ldd {

GrayImage::GrayImage(Raster<float> pixels) : pixels_(std::move(pixels)) {
  if (pixels_.size() == 0) throw InvalidArgument("GrayImage: zero-dimension image");
  if (!((pixels_ >= 0.0f) && (pixels_ <= 1.0f)).all())
    throw InvalidArgument("GrayImage: luminance outside [0,1]");
}

namespace {

Raster<float> filled(int width, int height, float fill) {
  if (width <= 0 || height <= 0) throw InvalidArgument("GrayImage: zero-dimension image");
  return Raster<float>::Constant(height, width, fill);
}

}  // namespace

GrayImage::GrayImage(int width, int height, float fill) : GrayImage(filled(width, height, fill)) {}

GrayImage to_gray(const RgbImage& rgb) {
  if (rgb.width <= 0 || rgb.height <= 0) throw InvalidArgument("to_gray: zero-dimension image");
  Raster<float> px(rgb.height, rgb.width);
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x)
      px(y, x) = luminance(rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2));
  return GrayImage(std::move(px));
}

GrayImage load_image(const std::filesystem::path& path) { return to_gray(load_rgb(path)); }

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  if (width < 1 || height < 1)
    throw InvalidArgument("resize_bilinear: zero target dimension");
  if (img.empty()) throw InvalidArgument("resize_bilinear: empty image");
  Raster<float> out = resample_bilinear(img.pixels(), width, height);
  // Interpolation is convex, but guard against float rounding at the ends.
  return GrayImage(out.cwiseMax(0.0f).cwiseMin(1.0f));
}

RgbImage resize_bilinear(const RgbImage& img, int width, int height) {
  if (width < 1 || height < 1)
    throw InvalidArgument("resize_bilinear: zero target dimension");
  if (img.width == width && img.height == height) return img;
  RgbImage out{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3)};
  for (int c = 0; c < 3; ++c) {
    Raster<float> channel(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) channel(y, x) = img.at(x, y, c);
    const Raster<float> scaled = resample_bilinear(channel, width, height);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        out.data[(static_cast<std::size_t>(y) * width + x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(scaled(y, x)), 0L, 255L));
  }
  return out;
}

namespace {

void check_crop(int w, int h, int x1, int y1, int x2, int y2) {
  if (x1 < 0 || y1 < 0 || x2 > w || y2 > h || x1 >= x2 || y1 >= y2)
    throw InvalidArgument("crop: rectangle [" + std::to_string(x1) + "," + std::to_string(y1) +
                          ")-(" + std::to_string(x2) + "," + std::to_string(y2) +
                          ") is degenerate or outside the image");
}

}  // namespace

GrayImage crop(const GrayImage& img, int x1, int y1, int x2, int y2) {
  check_crop(img.width(), img.height(), x1, y1, x2, y2);
  return GrayImage(Raster<float>(img.pixels().block(y1, x1, y2 - y1, x2 - x1)));
}

RgbImage crop(const RgbImage& img, int x1, int y1, int x2, int y2) {
  check_crop(img.width, img.height, x1, y1, x2, y2);
  RgbImage out{x2 - x1, y2 - y1, {}};
  out.data.reserve(static_cast<std::size_t>(out.width) * out.height * 3);
  for (int y = y1; y < y2; ++y)
    for (int x = x1; x < x2; ++x)
      for (int c = 0; c < 3; ++c) out.data.push_back(img.at(x, y, c));
  return out;
}

GrayImage mirror_horizontal(const GrayImage& img) {
  return GrayImage(Raster<float>(img.pixels().rowwise().reverse()));
}

GradientMap gradient_map(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) throw InvalidArgument("gradient_map: image smaller than 3x3");

  GradientMap g{Raster<float>::Zero(h, w), Raster<float>::Zero(h, w)};
  const auto& p = img.pixels();
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const float gx = (p(y - 1, x + 1) + 2.0f * p(y, x + 1) + p(y + 1, x + 1)) -
                       (p(y - 1, x - 1) + 2.0f * p(y, x - 1) + p(y + 1, x - 1));
      const float gy = (p(y + 1, x - 1) + 2.0f * p(y + 1, x) + p(y + 1, x + 1)) -
                       (p(y - 1, x - 1) + 2.0f * p(y - 1, x) + p(y - 1, x + 1));
      const float mag = std::sqrt(gx * gx + gy * gy);
      g.magnitude(y, x) = mag;
      if (mag > 0.0f) {
        float theta = std::atan2(gy, gx);
        if (theta < 0.0f) theta += std::numbers::pi_v<float>;
        if (theta >= std::numbers::pi_v<float>) theta -= std::numbers::pi_v<float>;
        g.orientation(y, x) = theta;
      }
    }
  }
  return g;
}

}  // namespace ldd
