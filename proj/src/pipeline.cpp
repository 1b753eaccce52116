#include "ldd/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "ldd/parallel.hpp"

namespace ldd {

FeatureSource FeatureSource::parse(const std::string& spec) {
  if (spec == "builtin") return {};
  if (spec.rfind("lddf:", 0) == 0 && spec.size() > 5) return {Kind::kLddf, spec.substr(5)};
  throw InvalidArgument("feature source must be 'builtin' or 'lddf:DIR', got '" + spec + "'");
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("config: " + msg); };
  if (budgets.empty() || budgets.size() > 8) fail("between 1 and 8 section budgets required");
  for (int b : budgets)
    if (b < 0) fail("section budgets must be nonnegative");
  if (proposals_per_view < 1) fail("proposals per view must be positive");
  const int total = std::accumulate(budgets.begin(), budgets.end(), 0);
  if (total != proposals_per_view)
    fail("budgets sum to " + std::to_string(total) + " but proposals per view is " +
         std::to_string(proposals_per_view));
  if (image_width < 3 || image_height < 3) fail("working image must be at least 3x3");
  if (!(overlap >= 0.0 && overlap < 1.0)) fail("overlap must lie in [0,1)");
  if (section_width < 1 || section_width > image_width) fail("section width must lie in [1, image width]");
  if (projected_dim < 1) fail("projected dimension must be positive");
  if (!(proposals.kappa > 0.0)) fail("kappa must be positive");
  if (!(proposals.nms_iou > 0.0 && proposals.nms_iou <= 1.0)) fail("NMS IoU must lie in (0,1]");
  if (proposals.scales.empty() || proposals.aspect_ratios.empty()) fail("window scales and aspect ratios required");
  try {
    layout();
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
}

DescriptorMeta PipelineConfig::meta() const {
  DescriptorMeta m;
  const bool builtin = features.kind == FeatureSource::Kind::kBuiltin;
  m.dim = static_cast<std::uint32_t>(builtin ? kBuiltinDescriptorDim : projected_dim);
  m.feature_kind = builtin ? FeatureKind::kRaw : FeatureKind::kProjected;
  m.seed = seed;
  m.budgets = budgets;
  m.layout = layout();
  return m;
}

SectionLayout PipelineConfig::layout(std::optional<double> center_x) const {
  return section_layout(image_width, section_width, static_cast<int>(sections()), center_x, overlap);
}

std::string view_key(const std::string& location_id, ViewRole role) {
  return location_id + (role == ViewRole::kReference ? "_reference" : "_test");
}

std::vector<LandmarkProposal> view_proposals(const GrayImage& working, const std::string& key,
                                             const PipelineConfig& config,
                                             const SectionLayout& layout) {
  std::vector<LandmarkProposal> ranked =
      config.proposal_dir ? load_proposals_json(*config.proposal_dir / (key + ".json"))
                          : generate_proposals(working, config.proposals);
  assign_sections(ranked, layout);
  return ranked;
}

namespace {

GrayImage to_working_size(const GrayImage& image, const PipelineConfig& config) {
  if (image.width() == config.image_width && image.height() == config.image_height) return image;
  return resize_bilinear(image, config.image_width, config.image_height);
}

std::optional<double> scale_vp(std::optional<double> vp_x, int source_width, int working_width) {
  if (!vp_x) return std::nullopt;
  return *vp_x * working_width / source_width;
}

// Projected features for `boxes` (plus the full frame when present) read
// from the view's LDDF file.
FeatureTable lddf_features(const std::vector<Box>& boxes, const Box& frame, const std::string& key,
                           const PipelineConfig& config) {
  const std::filesystem::path path = config.features.directory / (key + ".lddf");
  const FeatureTable raw = load_features(path);
  std::vector<Box> wanted = boxes;
  if (raw.count(frame)) wanted.push_back(frame);
  if (wanted.empty()) return {};
  if (raw.empty())
    throw InvalidArgument("'" + path.string() + "' holds no records but " + std::to_string(boxes.size()) +
                          " regions were selected");

  const Eigen::Index d_in = raw.begin()->second.dim();
  const ProjectionMatrix m = make_projection(config.seed, d_in, config.projected_dim);
  Eigen::MatrixXf columns(d_in, static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    const auto it = raw.find(wanted[k]);
    if (it == raw.end())
      throw InvalidArgument("'" + path.string() + "' has no record for box (" +
                            std::to_string(wanted[k].x1) + "," + std::to_string(wanted[k].y1) + ")-(" +
                            std::to_string(wanted[k].x2) + "," + std::to_string(wanted[k].y2) + ")");
    columns.col(static_cast<Eigen::Index>(k)) = it->second.values;
  }
  const Eigen::MatrixXf projected = project_columns(m, columns);
  FeatureTable out;
  for (std::size_t k = 0; k < wanted.size(); ++k)
    out.emplace(wanted[k], FeatureVector{projected.col(static_cast<Eigen::Index>(k)), FeatureKind::kProjected});
  return out;
}

}  // namespace

ViewDescriptor describe_view(const GrayImage& image, const std::string& view_id,
                             const std::string& key, const PipelineConfig& config,
                             std::optional<double> vp_x) {
  const GrayImage working = to_working_size(image, config);
  const SectionLayout layout = config.layout(scale_vp(vp_x, image.width(), working.width()));
  const std::vector<LandmarkProposal> ranked = view_proposals(working, key, config, layout);
  const auto selections = select_per_section(ranked, layout, config.budgets);

  std::vector<Box> boxes;
  for (const auto& section : selections)
    for (const LandmarkProposal& p : section) boxes.push_back(p.box);
  std::sort(boxes.begin(), boxes.end());
  boxes.erase(std::unique(boxes.begin(), boxes.end()), boxes.end());
  const Box frame{0, 0, working.width(), working.height()};

  FeatureTable features;
  std::optional<FeatureVector> whole;
  if (config.features.kind == FeatureSource::Kind::kBuiltin) {
    for (const Box& b : boxes) features.emplace(b, builtin_descriptor(working, b));
    whole = builtin_descriptor(working, frame);
  } else {
    features = lddf_features(boxes, frame, key, config);
    if (const auto it = features.find(frame); it != features.end()) {
      whole = it->second;
      if (!std::binary_search(boxes.begin(), boxes.end(), frame)) features.erase(it);
    }
  }
  return build_ldd(view_id, selections, features, layout, std::move(whole));
}

std::vector<ViewDescriptor> describe_views(const DatasetManifest& manifest, ViewRole role,
                                           const PipelineConfig& config, int jobs,
                                           std::ostream* log) {
  config.validate();
  std::vector<ViewDescriptor> out(manifest.locations.size());
  std::mutex log_mutex;
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const Location& loc = manifest.locations[i];
    const bool ref = role == ViewRole::kReference;
    const GrayImage image = load_image(ref ? loc.reference : loc.test);
    out[i] = describe_view(image, loc.id, view_key(loc.id, role), config,
                           ref ? loc.reference_vp_x : loc.test_vp_x);
    if (log) {
      std::lock_guard lock(log_mutex);
      *log << (ref ? "reference " : "test ") << loc.id << ": " << out[i].entries.size()
           << " landmarks\n";
    }
  });
  return out;
}

DescriptorDB build_database(const DatasetManifest& manifest, const PipelineConfig& config,
                            int jobs, std::ostream* log) {
  config.validate();
  DescriptorDB db(config.meta());
  for (ViewDescriptor& v : describe_views(manifest, ViewRole::kReference, config, jobs, log))
    db.add(std::move(v));
  return db;
}

void export_regions(const DatasetManifest& manifest, const PipelineConfig& config,
                    const std::filesystem::path& out_dir, int jobs, std::ostream* log) {
  config.validate();
  struct Job {
    const Location* loc;
    ViewRole role;
  };
  std::vector<Job> jobs_list;
  for (const Location& loc : manifest.locations)
    for (ViewRole role : {ViewRole::kReference, ViewRole::kTest}) jobs_list.push_back({&loc, role});

  std::filesystem::create_directories(out_dir);
  std::mutex log_mutex;
  parallel_for(jobs_list.size(), jobs, [&](std::size_t n) {
    const Location& loc = *jobs_list[n].loc;
    const ViewRole role = jobs_list[n].role;
    const bool ref = role == ViewRole::kReference;
    const std::filesystem::path& source = ref ? loc.reference : loc.test;
    const RgbImage original = load_rgb(source);
    const RgbImage rgb = resize_bilinear(original, config.image_width, config.image_height);
    // Boxes must match describe_view exactly, so the gray working image is
    // derived the same way; colour is kept only for the crops.
    const GrayImage working = to_working_size(to_gray(original), config);
    const auto vp = scale_vp(ref ? loc.reference_vp_x : loc.test_vp_x, original.width, config.image_width);
    const SectionLayout layout = config.layout(vp);
    const std::string key = view_key(loc.id, role);
    const auto selections = select_per_section(view_proposals(working, key, config, layout), layout,
                                               config.budgets);
    std::vector<Box> boxes;
    for (const auto& section : selections)
      for (const LandmarkProposal& p : section) boxes.push_back(p.box);
    std::sort(boxes.begin(), boxes.end());
    boxes.erase(std::unique(boxes.begin(), boxes.end()), boxes.end());

    const std::filesystem::path dir = out_dir / key;
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json doc;
    doc["view"] = key;
    doc["location"] = loc.id;
    doc["role"] = ref ? "reference" : "test";
    doc["source"] = source.string();
    doc["width"] = config.image_width;
    doc["height"] = config.image_height;
    doc["regions"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const Box& b = boxes[k];
      char name[32];
      std::snprintf(name, sizeof name, "region_%03zu.png", k);
      write_png(crop(rgb, b.x1, b.y1, b.x2, b.y2), dir / name);
      doc["regions"].push_back({{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}, {"crop", name}});
    }
    write_png(rgb, dir / "whole.png");
    doc["whole_image"] = {{"x1", 0}, {"y1", 0}, {"x2", config.image_width},
                          {"y2", config.image_height}, {"crop", "whole.png"}};
    std::ofstream out(dir / "boxes.json", std::ios::trunc);
    if (!out) throw IoError("cannot write '" + (dir / "boxes.json").string() + "'");
    out << doc.dump(2) << '\n';
    if (log) {
      std::lock_guard lock(log_mutex);
      *log << key << ": " << boxes.size() << " regions\n";
    }
  });
}

}  // namespace ldd
