#include "ldd/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "json.hpp"
#include "ldd/parallel.hpp"

namespace ldd {

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ldd") return Method::kLdd;
  if (lower == "clm") return Method::kClm;
  if (lower == "cwi") return Method::kCwi;
  throw InvalidArgument("unknown method '" + std::string(name) + "' (expected ldd, clm or cwi)");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kLdd:
      return "ldd";
    case Method::kClm:
      return "clm";
    case Method::kCwi:
      return "cwi";
  }
  return "?";
}

double score_views(const ViewDescriptor& query, const ViewDescriptor& reference, Method method) {
  switch (method) {
    case Method::kLdd:
      return match_ldd(query, reference).score;
    case Method::kClm:
      if (query.entries.empty() || reference.entries.empty()) return 0.0;
      return clm_score(query, reference);
    case Method::kCwi:
      return cwi_score(query, reference);
  }
  return 0.0;
}

double ratio_shift(Method method, std::size_t sections) {
  return method == Method::kLdd ? static_cast<double>(sections) : 1.0;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path, bool verify_paths) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest '" + path.string() + "': " + e.what());
  }
  const std::filesystem::path base = path.parent_path();
  DatasetManifest m;
  std::set<std::string> seen;
  try {
    m.name = doc.value("name", path.stem().string());
    for (const auto& rec : doc.at("locations")) {
      Location loc;
      loc.id = rec.at("id").get<std::string>();
      loc.reference = resolve(base, rec.at("reference").get<std::string>());
      loc.test = resolve(base, rec.at("test").get<std::string>());
      if (rec.contains("vp_x")) {
        const auto& vp = rec.at("vp_x");
        if (vp.is_number()) {
          loc.reference_vp_x = loc.test_vp_x = vp.get<double>();
        } else {
          if (vp.contains("reference")) loc.reference_vp_x = vp.at("reference").get<double>();
          if (vp.contains("test")) loc.test_vp_x = vp.at("test").get<double>();
        }
      }
      if (!seen.insert(loc.id).second)
        throw FormatError("manifest '" + path.string() + "': duplicate location id '" + loc.id + "'");
      m.locations.push_back(std::move(loc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest '" + path.string() + "': " + e.what());
  }
  if (m.locations.empty()) throw FormatError("manifest '" + path.string() + "' has no locations");
  if (verify_paths) {
    for (const Location& loc : m.locations)
      for (const auto& p : {loc.reference, loc.test})
        if (!std::filesystem::exists(p))
          throw IoError("manifest location '" + loc.id + "': missing image '" + p.string() + "'");
  }
  return m;
}

RankedQueryResult rank_references(const ViewDescriptor& query, const DescriptorDB& db,
                                  Method method) {
  if (db.empty()) throw InvalidArgument("rank_references: empty database");
  db.check_query(query);
  RankedQueryResult r;
  r.query_id = query.view_id;
  r.ranked.reserve(db.size());
  for (const ViewDescriptor& ref : db.views())
    r.ranked.emplace_back(ref.view_id, score_views(query, ref, method));
  std::sort(r.ranked.begin(), r.ranked.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return r;
}

bool ratio_accept(double best, std::optional<double> second, double tau, double shift) {
  if (!second) return true;
  const double b = best + shift;
  const double s = *second + shift;
  if (b <= 0.0) return tau >= 1.0;  // both at the floor: fully ambiguous
  return s / b <= tau;
}

PrecisionRecall precision_recall(long tp, long fp, long fn) {
  if (tp < 0 || fp < 0 || fn < 0) throw InvalidArgument("precision_recall: negative count");
  if (tp + fp + fn == 0) throw InvalidArgument("precision_recall: all counts are zero");
  PrecisionRecall pr;
  if (tp + fp == 0) {
    pr.precision = 1.0;
    pr.precision_defined = false;
  } else {
    pr.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    pr.recall = 1.0;
    pr.recall_defined = false;
  } else {
    pr.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  return pr;
}

std::vector<PrPoint> pr_curve(std::span<const RankedQueryResult> results,
                              std::span<const std::string> ground_truth,
                              std::span<const double> tau_grid, double shift) {
  if (ground_truth.size() != results.size())
    throw InvalidArgument("pr_curve: ground truth missing for some queries");
  if (tau_grid.empty()) throw InvalidArgument("pr_curve: empty tau grid");
  if (results.empty()) throw InvalidArgument("pr_curve: no queries");
  std::vector<double> taus(tau_grid.begin(), tau_grid.end());
  for (double t : taus)
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("pr_curve: tau outside [0,1]");
  if (std::find(taus.begin(), taus.end(), 1.0) == taus.end()) taus.push_back(1.0);
  std::sort(taus.begin(), taus.end(), std::greater<>());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  std::vector<PrPoint> curve;
  for (double tau : taus) {
    PrPoint pt;
    pt.tau = tau;
    for (std::size_t q = 0; q < results.size(); ++q) {
      const RankedQueryResult& r = results[q];
      if (!ratio_accept(r.best(), r.second_best(), tau, shift))
        ++pt.fn;
      else if (r.top_id() == ground_truth[q])
        ++pt.tp;
      else
        ++pt.fp;
    }
    const PrecisionRecall pr = precision_recall(pt.tp, pt.fp, pt.fn);
    pt.precision = pr.precision;
    pt.recall = pr.recall;
    curve.push_back(pt);
  }
  return curve;
}

std::vector<double> default_tau_grid(int n) {
  if (n < 2) return {1.0};
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(1.0 - static_cast<double>(i) / (n - 1));
  return g;
}

Eigen::MatrixXd confusion_matrix(std::span<const ViewDescriptor> queries, const DescriptorDB& db,
                                 Method method, std::size_t limit) {
  const std::size_t rows = limit ? std::min(limit, queries.size()) : queries.size();
  const std::size_t cols = limit ? std::min(limit, db.size()) : db.size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    db.check_query(queries[i]);
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = score_views(queries[i], db.views()[j], method);
  }
  return m;
}

EvalReport evaluate(std::span<const ViewDescriptor> queries, const DescriptorDB& db, Method method,
                    std::span<const double> tau_grid, std::size_t confusion_size, int jobs) {
  if (queries.size() != db.size())
    throw InvalidArgument("evaluate: " + std::to_string(queries.size()) + " queries for " +
                          std::to_string(db.size()) + " references");
  EvalReport report;
  report.method = method;
  report.results.resize(queries.size());
  parallel_for(queries.size(), jobs,
               [&](std::size_t q) { report.results[q] = rank_references(queries[q], db, method); });

  std::vector<std::string> truth;
  for (const ViewDescriptor& ref : db.views()) truth.push_back(ref.view_id);
  report.curve = pr_curve(report.results, truth, tau_grid, ratio_shift(method, db.meta().section_count()));
  const PrPoint& full = report.curve.front();  // descending order starts at tau = 1
  report.tp = full.tp;
  report.fp = full.fp;
  report.fn = full.fn;
  report.precision = full.precision;
  report.recall = full.recall;
  report.confusion = confusion_matrix(queries, db, method, confusion_size);
  return report;
}

}  // namespace ldd
