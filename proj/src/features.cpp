#include "ldd/features.hpp"

#include <numbers>

namespace ldd {

ProjectionMatrix::ProjectionMatrix(std::uint64_t seed, Eigen::Index d_in, Eigen::Index d_out)
    : seed_(seed), d_in_(d_in), d_out_(d_out) {
  if (d_out < 1) throw InvalidArgument("make_projection: d_out must be at least 1");
  if (d_out >= d_in)
    throw InvalidArgument("make_projection: d_out (" + std::to_string(d_out) +
                          ") must be smaller than d_in (" + std::to_string(d_in) + ")");
}

ProjectionMatrix make_projection(std::uint64_t seed, Eigen::Index d_in, Eigen::Index d_out) {
  return ProjectionMatrix(seed, d_in, d_out);
}

FeatureVector project(const ProjectionMatrix& m, const FeatureVector& v) {
  if (v.kind != FeatureKind::kRaw) throw InvalidArgument("project: feature is already projected");
  if (v.dim() != m.d_in())
    throw InvalidArgument("project: feature dim " + std::to_string(v.dim()) +
                          " does not match projection d_in " + std::to_string(m.d_in()));
  return {project_columns(m, v.values), FeatureKind::kProjected};
}

namespace {

constexpr int kPatch = 32;
constexpr int kGrid = 4;
constexpr int kCell = kPatch / kGrid;
constexpr int kBins = 8;

}  // namespace

FeatureVector builtin_descriptor(const GrayImage& img, const Box& b) {
  if (!b.valid() || b.x1 < 0 || b.y1 < 0 || b.x2 > img.width() || b.y2 > img.height())
    throw InvalidArgument("builtin_descriptor: degenerate box or box outside the image");
  const GrayImage patch = resize_bilinear(crop(img, b.x1, b.y1, b.x2, b.y2), kPatch, kPatch);
  const GradientMap g = gradient_map(patch);

  Eigen::VectorXf out = Eigen::VectorXf::Zero(kBuiltinDescriptorDim);
  auto hist = out.head(kGrid * kGrid * kBins);
  constexpr double kBinWidth = std::numbers::pi / kBins;
  for (int y = 0; y < kPatch; ++y) {
    for (int x = 0; x < kPatch; ++x) {
      const float mag = g.magnitude(y, x);
      if (mag <= 0.0f) continue;
      // Linear vote between the two nearest bin centres, wrapping at pi.
      const double pos = g.orientation(y, x) / kBinWidth - 0.5;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      const int b0 = (static_cast<int>(lower) + kBins) % kBins;
      const int b1 = (b0 + 1) % kBins;
      const int cell = (y / kCell) * kGrid + (x / kCell);
      hist(cell * kBins + b0) += static_cast<float>(mag * (1.0 - frac));
      hist(cell * kBins + b1) += static_cast<float>(mag * frac);
    }
  }
  const float norm = hist.norm();
  if (norm > 0.0f) hist /= norm;

  auto intensity = out.tail(kGrid * kGrid);
  for (int cy = 0; cy < kGrid; ++cy)
    for (int cx = 0; cx < kGrid; ++cx)
      intensity(cy * kGrid + cx) =
          patch.pixels().block(cy * kCell, cx * kCell, kCell, kCell).mean();
  return {std::move(out), FeatureKind::kRaw};
}

}  // namespace ldd
