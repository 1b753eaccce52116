#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <Eigen/Core>

#include "ldd/error.hpp"
#include "ldd/imaging.hpp"
#include "ldd/proposals.hpp"

namespace ldd {

enum class FeatureKind : std::uint8_t { kRaw = 0, kProjected = 1 };

struct FeatureVector {
  Eigen::VectorXf values;
  FeatureKind kind = FeatureKind::kRaw;

  Eigen::Index dim() const { return values.size(); }
  bool operator==(const FeatureVector& o) const {
    return kind == o.kind && values.size() == o.values.size() && values == o.values;
  }
};

/// SplitMix64, addressed by counter: the n-th output of a generator seeded
/// with `seed`. Every projection entry is a pure function of
/// (seed, row * d_in + col), so rows can be regenerated in any order.
constexpr std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Sparse random projection with entries in {+sqrt3, 0, -sqrt3} drawn with
/// probabilities (1/6, 2/3, 1/6). Entries are generated on demand from the
/// seed; nothing of size d_in x d_out is kept.
class ProjectionMatrix {
 public:
  ProjectionMatrix(std::uint64_t seed, Eigen::Index d_in, Eigen::Index d_out);

  std::uint64_t seed() const { return seed_; }
  Eigen::Index d_in() const { return d_in_; }
  Eigen::Index d_out() const { return d_out_; }

  /// -1, 0 or +1; the entry is this times sqrt(3).
  int sign(Eigen::Index row, Eigen::Index col) const {
    const std::uint64_t u = splitmix64(seed_, static_cast<std::uint64_t>(row) * d_in_ + col);
    const std::uint64_t bucket = ((u >> 32) * 6u) >> 32;  // uniform over 0..5
    return bucket == 0 ? 1 : (bucket == 1 ? -1 : 0);
  }
  double entry(Eigen::Index row, Eigen::Index col) const { return std::sqrt(3.0) * sign(row, col); }

  /// Writes rows [first_row, first_row + block.rows()) into `block`.
  template <typename Derived>
  void fill_rows(Eigen::Index first_row, Eigen::DenseBase<Derived>& block) const;

  bool operator==(const ProjectionMatrix&) const = default;

 private:
  std::uint64_t seed_;
  Eigen::Index d_in_;
  Eigen::Index d_out_;
};

ProjectionMatrix make_projection(std::uint64_t seed, Eigen::Index d_in, Eigen::Index d_out);

/// (1/sqrt(d_out)) * M * X for every column of X (d_in x n).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> project_columns(
    const ProjectionMatrix& m, const Eigen::MatrixBase<Derived>& columns);

FeatureVector project(const ProjectionMatrix& m, const FeatureVector& v);

/// Built-in region descriptor (dim 144): the region resampled to 32x32,
/// a 4x4 grid of 8-bin unsigned gradient-orientation histograms
/// (L2-normalised as one 128-d block) followed by 4x4 mean intensities.
FeatureVector builtin_descriptor(const GrayImage& img, const Box& b);

inline constexpr Eigen::Index kBuiltinDescriptorDim = 144;

using FeatureTable = std::map<Box, FeatureVector>;

/// LDDF reader/writer. Little-endian: "LDDF", u32 version (1), u32 count,
/// u32 dim, then per record four u16 box coordinates and dim f32 values.
FeatureTable load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const FeatureTable& features);

// ---------------------------------------------------------------------------

template <typename Derived>
void ProjectionMatrix::fill_rows(Eigen::Index first_row, Eigen::DenseBase<Derived>& block) const {
  using Scalar = typename Derived::Scalar;
  const Scalar magnitude = static_cast<Scalar>(std::sqrt(3.0));
  for (Eigen::Index r = 0; r < block.rows(); ++r)
    for (Eigen::Index c = 0; c < d_in_; ++c)
      block(r, c) = magnitude * static_cast<Scalar>(sign(first_row + r, c));
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> project_columns(
    const ProjectionMatrix& m, const Eigen::MatrixBase<Derived>& columns) {
  using Scalar = typename Derived::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (columns.rows() != m.d_in())
    throw InvalidArgument("project: input dimension " + std::to_string(columns.rows()) +
                          " does not match projection d_in " + std::to_string(m.d_in()));
  // Rows are generated in blocks so memory stays O(block * d_in).
  constexpr Eigen::Index kBlockRows = 64;
  Dense out(m.d_out(), columns.cols());
  Dense rows(std::min(kBlockRows, m.d_out()), m.d_in());
  for (Eigen::Index first = 0; first < m.d_out(); first += kBlockRows) {
    const Eigen::Index n = std::min(kBlockRows, m.d_out() - first);
    auto block = rows.topRows(n);
    m.fill_rows(first, block);
    out.middleRows(first, n).noalias() = block * columns;
  }
  out /= static_cast<Scalar>(std::sqrt(static_cast<double>(m.d_out())));
  return out;
}

}  // namespace ldd
