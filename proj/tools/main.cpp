// ldd: command-line front end for building landmark descriptor databases,
// evaluating place recognition and inspecting single image pairs.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ldd/descriptor.hpp"
#include "ldd/evaluation.hpp"
#include "ldd/matching.hpp"
#include "ldd/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Options {
  int proposals = 50;
  std::string budgets;
  std::uint64_t seed = 1;
  int dim = 1024;
  std::string features = "builtin";
  int section_width = 320;
  double overlap = 0.5;
  double kappa = 1.5;
  double nms_iou = 0.7;
  std::string proposals_from;
  int jobs = 1;
};

void add_pipeline_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--proposals", o.proposals, "Landmark proposals per view")
      ->check(CLI::IsMember({25, 50}))
      ->capture_default_str();
  cmd.add_option("--budgets", o.budgets,
                 "Per-section budgets, left to right (default 5,15,5 for 25 and 10,30,10 for 50)");
  cmd.add_option("--seed", o.seed, "Random projection seed")->capture_default_str();
  cmd.add_option("--dim", o.dim, "Projected feature dimension")->capture_default_str();
  cmd.add_option("--features", o.features, "Feature source: builtin or lddf:DIR")->capture_default_str();
  cmd.add_option("--section-width", o.section_width, "Panoramic section width in pixels")
      ->capture_default_str();
  cmd.add_option("--overlap", o.overlap, "Overlap fraction between adjacent sections")
      ->capture_default_str();
  cmd.add_option("--kappa", o.kappa, "Box perimeter normalisation exponent")->capture_default_str();
  cmd.add_option("--nms-iou", o.nms_iou, "Non-maximum suppression IoU threshold")->capture_default_str();
  cmd.add_option("--proposals-from", o.proposals_from,
                 "Directory of <view>.json proposal files replacing the built-in generator");
  cmd.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ldd::InvalidArgument("bad integer list '" + s + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ldd::InvalidArgument("bad number list '" + s + "'");
    out.push_back(v);
  }
  return out;
}

ldd::PipelineConfig make_config(const Options& o) {
  ldd::PipelineConfig c;
  c.proposals_per_view = o.proposals;
  if (!o.budgets.empty())
    c.budgets = parse_int_list(o.budgets);
  else
    c.budgets = o.proposals == 25 ? std::vector<int>{5, 15, 5} : std::vector<int>{10, 30, 10};
  c.seed = o.seed;
  c.projected_dim = o.dim;
  c.features = ldd::FeatureSource::parse(o.features);
  c.section_width = o.section_width;
  c.overlap = o.overlap;
  c.proposals.kappa = o.kappa;
  c.proposals.nms_iou = o.nms_iou;
  if (!o.proposals_from.empty()) c.proposal_dir = o.proposals_from;
  c.validate();
  return c;
}

ordered_json box_json(const ldd::Box& b) {
  return {{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}};
}

int run_build(const std::string& manifest_path, const Options& o, const std::string& out_db) {
  const ldd::PipelineConfig config = make_config(o);
  const ldd::DatasetManifest manifest = ldd::load_manifest(manifest_path);
  std::cerr << "building descriptors for " << manifest.locations.size() << " reference views\n";
  const ldd::DescriptorDB db = ldd::build_database(manifest, config, o.jobs, &std::cerr);
  ldd::save_db(db, out_db);
  std::size_t entries = 0;
  for (const auto& v : db.views()) entries += v.entries.size();
  std::cerr << "wrote " << db.size() << " descriptors (" << entries << " landmarks) to " << out_db << '\n';
  return 0;
}

int run_evaluate(const std::string& manifest_path, const Options& o, const std::string& db_path,
                 const std::vector<std::string>& method_names, const std::string& tau_grid,
                 const std::string& out_dir, int confusion_size) {
  const ldd::PipelineConfig config = make_config(o);
  std::vector<ldd::Method> methods;
  for (const auto& name : method_names) methods.push_back(ldd::parse_method(name));
  const std::vector<double> taus = tau_grid.empty() ? ldd::default_tau_grid() : parse_double_list(tau_grid);

  const ldd::DescriptorDB db = ldd::load_db(db_path);
  ldd::require_compatible(config.meta(), db.meta());
  const ldd::DatasetManifest manifest = ldd::load_manifest(manifest_path);
  if (manifest.locations.size() != db.size())
    throw ldd::MetaMismatch("manifest has " + std::to_string(manifest.locations.size()) +
                            " locations but the database holds " + std::to_string(db.size()));
  for (std::size_t i = 0; i < db.size(); ++i)
    if (db.views()[i].view_id != manifest.locations[i].id)
      throw ldd::MetaMismatch("database view " + std::to_string(i) + " is '" + db.views()[i].view_id +
                              "', manifest expects '" + manifest.locations[i].id + "'");

  std::cerr << "describing " << manifest.locations.size() << " test views\n";
  const auto queries = ldd::describe_views(manifest, ldd::ViewRole::kTest, config, o.jobs, &std::cerr);

  fs::create_directories(out_dir);
  std::vector<ldd::EvalReport> reports;
  for (ldd::Method m : methods) {
    ldd::EvalReport r = ldd::evaluate(queries, db, m, taus, static_cast<std::size_t>(confusion_size), o.jobs);
    r.dataset = manifest.name;
    const std::string name(ldd::method_name(m));
    ldd::write_pr_csv(fs::path(out_dir) / ("pr_" + name + ".csv"), r.curve);
    ldd::write_confusion_csv(fs::path(out_dir) / ("confusion_" + name + ".csv"), r.confusion);
    std::cout << name << ": precision at full recall " << std::fixed << std::setprecision(3)
              << r.precision << " (tp=" << r.tp << " fp=" << r.fp << " fn=" << r.fn << ")\n";
    reports.push_back(std::move(r));
  }
  ldd::write_summary_json(fs::path(out_dir) / "summary.json", reports);
  return 0;
}

int run_match(const std::string& image_a, const std::string& image_b, const Options& o) {
  const ldd::PipelineConfig config = make_config(o);
  const auto a = ldd::describe_view(ldd::load_image(image_a), "a", fs::path(image_a).stem().string(), config);
  const auto b = ldd::describe_view(ldd::load_image(image_b), "b", fs::path(image_b).stem().string(), config);
  const ldd::MatchResult r = ldd::match_ldd(a, b);
  ordered_json doc;
  doc["score"] = r.score;
  doc["pairs"] = ordered_json::array();
  for (const auto& p : r.pairs)
    doc["pairs"].push_back({{"section", p.section},
                            {"similarity", p.similarity},
                            {"box_a", box_json(a.entries[p.entry_a].box)},
                            {"box_b", box_json(b.entries[p.entry_b].box)}});
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int run_propose(const std::string& image_path, const Options& o, std::optional<double> vp_x) {
  const ldd::PipelineConfig config = make_config(o);
  const ldd::GrayImage source = ldd::load_image(image_path);
  const ldd::GrayImage working =
      source.width() == config.image_width && source.height() == config.image_height
          ? source
          : ldd::resize_bilinear(source, config.image_width, config.image_height);
  if (vp_x) *vp_x = *vp_x * config.image_width / source.width();
  const ldd::SectionLayout layout = config.layout(vp_x);
  const auto ranked = ldd::view_proposals(working, fs::path(image_path).stem().string(), config, layout);
  ordered_json doc = ordered_json::array();
  for (const auto& p : ranked) {
    ordered_json rec = box_json(p.box);
    rec["score"] = p.score;
    rec["sections"] = ordered_json::array();
    for (std::size_t s = 0; s < layout.size(); ++s)
      if (p.in_section(s)) rec["sections"].push_back(s);
    doc.push_back(std::move(rec));
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landmark distribution descriptors for visual place recognition"};
  app.require_subcommand(1);

  Options opts;
  std::string manifest, out, db_path, tau_grid, image_a, image_b;
  std::vector<std::string> methods{"ldd"};
  int confusion_size = 30;
  std::optional<double> vp_x;

  auto* build = app.add_subcommand("build", "Build a reference descriptor database");
  build->add_option("manifest", manifest, "Dataset manifest (JSON)")->required();
  build->add_option("--out", out, "Output database file")->required();
  add_pipeline_options(*build, opts);

  auto* evaluate = app.add_subcommand("evaluate", "Rank test views against a database");
  evaluate->add_option("manifest", manifest, "Dataset manifest (JSON)")->required();
  evaluate->add_option("--db", db_path, "Reference database built by 'build'")->required();
  evaluate->add_option("--method", methods, "ldd, clm or cwi (repeatable)")
      ->check(CLI::IsMember({"ldd", "clm", "cwi"}, CLI::ignore_case))
      ->capture_default_str();
  evaluate->add_option("--tau-grid", tau_grid, "Comma-separated ratio thresholds in [0,1]");
  evaluate->add_option("--confusion-size", confusion_size, "Locations in the confusion matrix")
      ->capture_default_str();
  evaluate->add_option("--out", out, "Output directory")->required();
  add_pipeline_options(*evaluate, opts);

  auto* match = app.add_subcommand("match", "Compare two images and print matched landmarks");
  match->add_option("image_a", image_a)->required();
  match->add_option("image_b", image_b)->required();
  add_pipeline_options(*match, opts);

  auto* propose = app.add_subcommand("propose", "Print ranked landmark proposals of an image");
  propose->add_option("image", image_a)->required();
  propose->add_option("--vp-x", vp_x, "Vanishing point x used to centre the sections");
  add_pipeline_options(*propose, opts);

  auto* exporter = app.add_subcommand("export-regions", "Write region crops for external feature extraction");
  exporter->add_option("manifest", manifest, "Dataset manifest (JSON)")->required();
  exporter->add_option("--out", out, "Output directory")->required();
  add_pipeline_options(*exporter, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return run_build(manifest, opts, out);
    if (*evaluate) return run_evaluate(manifest, opts, db_path, methods, tau_grid, out, confusion_size);
    if (*match) return run_match(image_a, image_b, opts);
    if (*propose) return run_propose(image_a, opts, vp_x);
    if (*exporter) {
      const ldd::PipelineConfig config = make_config(opts);
      ldd::export_regions(ldd::load_manifest(manifest), config, out, opts.jobs, &std::cerr);
      return 0;
    }
  } catch (const ldd::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
