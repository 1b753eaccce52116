#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ldd/descriptor.hpp"
#include "ldd/matching.hpp"

namespace ldd {

enum class Method { kLdd, kClm, kCwi };

/// "ldd", "clm" or "cwi" (case-insensitive); throws InvalidArgument otherwise.
Method parse_method(std::string_view name);
std::string_view method_name(Method m);

/// Similarity of a query view to a reference view under `method`. For the
/// landmark baseline an empty side scores 0.
double score_views(const ViewDescriptor& query, const ViewDescriptor& reference, Method method);

/// Offset added to both scores before the ratio test so they are
/// nonnegative: S for LDD (scores lie in [-S, S]), 1 for the cosine-based
/// baselines.
double ratio_shift(Method method, std::size_t sections);

struct Location {
  std::string id;
  std::filesystem::path reference;
  std::filesystem::path test;
  std::optional<double> reference_vp_x;
  std::optional<double> test_vp_x;
};

struct DatasetManifest {
  std::string name;
  std::vector<Location> locations;
};

/// `{"name": str, "locations": [{"id": str, "reference": path, "test": path,
/// "vp_x": number | {"reference": number, "test": number}}]}`. Relative
/// paths resolve against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path, bool verify_paths = true);

struct RankedQueryResult {
  std::string query_id;
  std::vector<std::pair<std::string, double>> ranked;  // descending score, ties by id

  double best() const { return ranked.front().second; }
  /// Absent when the database holds a single reference.
  std::optional<double> second_best() const {
    if (ranked.size() < 2) return std::nullopt;
    return ranked[1].second;
  }
  const std::string& top_id() const { return ranked.front().first; }
};

RankedQueryResult rank_references(const ViewDescriptor& query, const DescriptorDB& db,
                                  Method method);

/// Accept iff (second + shift) / (best + shift) <= tau. A missing second
/// score is always accepted.
bool ratio_accept(double best, std::optional<double> second, double tau, double shift = 0.0);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  /// False when nothing was accepted (tp + fp == 0); precision is then
  /// reported as 1.
  bool precision_defined = true;
  /// False when nothing was missed or correctly found (tp + fn == 0);
  /// recall is then reported as 1.
  bool recall_defined = true;
};

PrecisionRecall precision_recall(long tp, long fp, long fn);

struct PrPoint {
  double tau = 1.0;
  long tp = 0, fp = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
};

/// One point per tau, in descending tau order; tau = 1 is always included.
/// `ground_truth[q]` is the correct reference id of `results[q]`.
std::vector<PrPoint> pr_curve(std::span<const RankedQueryResult> results,
                              std::span<const std::string> ground_truth,
                              std::span<const double> tau_grid, double shift);

/// Evenly spaced grid 1, 1 - 1/(n-1), ..., 0 with `n` points.
std::vector<double> default_tau_grid(int n = 21);

/// M(i, j) = score of queries[i] against the j-th reference, restricted to
/// the first `limit` queries and references (all when `limit` is 0).
Eigen::MatrixXd confusion_matrix(std::span<const ViewDescriptor> queries, const DescriptorDB& db,
                                 Method method, std::size_t limit = 0);

struct EvalReport {
  Method method = Method::kLdd;
  std::string dataset;
  long tp = 0, fp = 0, fn = 0;  // at tau = 1
  double precision = 0.0;
  double recall = 0.0;
  std::vector<PrPoint> curve;
  Eigen::MatrixXd confusion;
  std::vector<RankedQueryResult> results;
};

/// Ranks every query (query i belongs to location i, whose reference is the
/// i-th view of `db`), sweeps the ratio test and builds the confusion matrix
/// over the first `confusion_size` locations.
EvalReport evaluate(std::span<const ViewDescriptor> queries, const DescriptorDB& db, Method method,
                    std::span<const double> tau_grid, std::size_t confusion_size = 30,
                    int jobs = 1);

void write_pr_csv(const std::filesystem::path& path, std::span<const PrPoint> curve);
void write_confusion_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
/// Summary JSON: {"dataset": .., "methods": {"ldd": {"tp":..,"fp":..,"fn":..,"precision":..,"recall":..}}}
void write_summary_json(const std::filesystem::path& path, std::span<const EvalReport> reports);

}  // namespace ldd
