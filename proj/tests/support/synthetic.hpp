#pragma once

// Procedural test scenes: textured rectangles on a shaded background,
// viewed through horizontally shifted windows.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ldd/imaging.hpp"

namespace ldd::testing {

struct SceneOptions {
  int view_width = 640;
  int view_height = 480;
  int max_shift = 96;  // 15% of 640
  int min_rectangles = 7;
  int max_rectangles = 11;
};

/// World raster wider than a view by `max_shift`.
Raster<float> render_scene(std::uint64_t seed, const SceneOptions& opts = {});

/// Window of the world starting at `offset_x`, brightness scaled by `gain`
/// and clamped to [0,1].
GrayImage view_of(const Raster<float>& world, int offset_x, double gain, int width);

struct ViewPair {
  GrayImage reference;
  GrayImage test;
  int shift = 0;
  double gain = 1.0;
};

/// Reference and test views of scene `seed`: test shifted 5-15% of the view
/// width and brightness perturbed by up to +-10%.
ViewPair make_view_pair(std::uint64_t seed, const SceneOptions& opts = {});

struct RectSpec {
  int x1, y1, x2, y2;
};

/// Image with a single filled rectangle of intensity `fg` on `bg`.
GrayImage rectangle_image(int width, int height, const RectSpec& r, float fg, float bg);

/// 8-bit RGB copy of a gray image (all channels equal).
RgbImage to_rgb(const GrayImage& img);

/// Writes scene<i>_reference.png / scene<i>_test.png for scenes
/// first_seed .. first_seed + count - 1 and a manifest listing them with
/// ids "scene<i>". Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, int count,
                                              std::uint64_t first_seed = 1000,
                                              const SceneOptions& opts = {});

}  // namespace ldd::testing
