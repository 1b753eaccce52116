#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ldd/descriptor.hpp"
#include "ldd/evaluation.hpp"
#include "ldd/features.hpp"
#include "ldd/imaging.hpp"
#include "ldd/proposals.hpp"

namespace ldd {

/// Where region features come from.
struct FeatureSource {
  enum class Kind { kBuiltin, kLddf };
  Kind kind = Kind::kBuiltin;
  std::filesystem::path directory;  // for kLddf: holds <view key>.lddf

  /// "builtin" or "lddf:DIR".
  static FeatureSource parse(const std::string& spec);
};

struct PipelineConfig {
  int proposals_per_view = 50;
  std::vector<int> budgets{10, 30, 10};  // left to right; sums to proposals_per_view
  int image_width = 640;                 // views are resampled to this size
  int image_height = 480;
  int section_width = 320;
  double overlap = 0.5;
  std::uint64_t seed = 1;
  int projected_dim = 1024;
  ProposalConfig proposals;
  FeatureSource features;
  /// Optional directory of <view key>.json proposal files used instead of
  /// the built-in proposal generator.
  std::optional<std::filesystem::path> proposal_dir;

  std::size_t sections() const { return budgets.size(); }
  /// Throws InvalidArgument on the first violated constraint.
  void validate() const;
  /// Database settings implied by this configuration.
  DescriptorMeta meta() const;
  SectionLayout layout(std::optional<double> center_x = std::nullopt) const;
};

enum class ViewRole { kReference, kTest };

/// File stem used for per-view side files ("<id>_reference", "<id>_test").
std::string view_key(const std::string& location_id, ViewRole role);

/// Proposals of a view, ranked, with section membership filled in.
std::vector<LandmarkProposal> view_proposals(const GrayImage& working, const std::string& key,
                                             const PipelineConfig& config,
                                             const SectionLayout& layout);

/// Full pipeline for one view: resample, lay out sections, propose, select
/// per section, describe and stack. `vp_x` is in source-image pixels.
ViewDescriptor describe_view(const GrayImage& image, const std::string& view_id,
                             const std::string& key, const PipelineConfig& config,
                             std::optional<double> vp_x = std::nullopt);

/// One descriptor per location for the given role, in manifest order.
std::vector<ViewDescriptor> describe_views(const DatasetManifest& manifest, ViewRole role,
                                           const PipelineConfig& config, int jobs = 1,
                                           std::ostream* log = nullptr);

DescriptorDB build_database(const DatasetManifest& manifest, const PipelineConfig& config,
                            int jobs = 1, std::ostream* log = nullptr);

/// Writes <out>/<view key>/boxes.json plus one PNG crop per selected region
/// and whole.png for the full frame, for every view of the manifest.
void export_regions(const DatasetManifest& manifest, const PipelineConfig& config,
                    const std::filesystem::path& out_dir, int jobs = 1,
                    std::ostream* log = nullptr);

}  // namespace ldd
