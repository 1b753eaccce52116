#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ldd/descriptor.hpp"
#include "ldd/error.hpp"

namespace ldd {

/// Cosine similarity u.v / (|u||v|), accumulated in double and clamped to
/// [-1, 1]. Identical nonzero vectors give exactly 1.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  if (u.size() != v.size())
    throw InvalidArgument("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()) + ")");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u.coeff(i));
    const double b = static_cast<double>(v.coeff(i));
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) throw InvalidArgument("cosine: zero-norm vector");
  // sqrt(uu * vv) rather than sqrt(uu) * sqrt(vv): for u == v the product
  // is uu * uu and its square root is exactly uu.
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

inline double cosine(const FeatureVector& u, const FeatureVector& v) {
  return cosine(u.values, v.values);
}

/// One matched landmark pair of section `section`.
struct SectionMatch {
  std::size_t section = 0;
  std::size_t entry_a = 0;  // index into a.entries
  std::size_t entry_b = 0;  // index into b.entries
  double similarity = 0.0;

  bool operator==(const SectionMatch&) const = default;
};

struct MatchResult {
  double score = 0.0;
  std::vector<SectionMatch> pairs;  // ordered by section index
};

enum class MatchStrategy {
  /// Sections resolved in descending order of their best unconstrained
  /// similarity; each takes its best pair among unused landmarks.
  kGreedy,
  /// Highest total over all conflict-free assignments; a section may stay
  /// unpaired.
  kExhaustive,
};

/// Section-wise best-pair similarity between two descriptors. A landmark
/// takes part in at most one pair. Sections with no eligible landmark on
/// either side contribute nothing.
MatchResult match_ldd(const ViewDescriptor& a, const ViewDescriptor& b,
                      MatchStrategy strategy = MatchStrategy::kGreedy);

/// 1 - (|w1-w2|/max(w1,w2) + |h1-h2|/max(h1,h2)) / 2.
double shape_similarity(const Box& b1, const Box& b2);

/// Landmark-matching baseline without spatial order: mutual nearest
/// neighbours by cosine, each weighted by shape similarity, summed and
/// divided by n_a * n_b.
double clm_score(std::span<const LandmarkEntry> a, std::span<const LandmarkEntry> b);
inline double clm_score(const ViewDescriptor& a, const ViewDescriptor& b) {
  return clm_score(a.entries, b.entries);
}

/// Whole-image baseline: cosine of the two full-frame features.
inline double cwi_score(const FeatureVector& f1, const FeatureVector& f2) { return cosine(f1, f2); }
double cwi_score(const ViewDescriptor& a, const ViewDescriptor& b);

}  // namespace ldd
