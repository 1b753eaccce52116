#include <fstream>
#include <iomanip>

#include "json.hpp"
#include "ldd/evaluation.hpp"

namespace ldd {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_pr_csv(const std::filesystem::path& path, std::span<const PrPoint> curve) {
  auto out = open_for_write(path);
  out << "tau,precision,recall\n";
  for (const PrPoint& p : curve) out << p.tau << ',' << p.precision << ',' << p.recall << '\n';
}

void write_confusion_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_for_write(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

void write_summary_json(const std::filesystem::path& path, std::span<const EvalReport> reports) {
  nlohmann::ordered_json doc;
  doc["dataset"] = reports.empty() ? "" : reports.front().dataset;
  nlohmann::ordered_json methods = nlohmann::ordered_json::object();
  for (const EvalReport& r : reports) {
    methods[std::string(method_name(r.method))] = {
        {"queries", r.results.size()}, {"tp", r.tp},
        {"fp", r.fp},                  {"fn", r.fn},
        {"precision", r.precision},    {"recall", r.recall}};
  }
  doc["methods"] = methods;
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
}

}  // namespace ldd
