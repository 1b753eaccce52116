#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "ldd/imaging.hpp"

namespace ldd {

/// Axis-aligned pixel rectangle [x1,x2) x [y1,y2).
struct Box {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  long area() const { return static_cast<long>(width()) * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  bool valid() const { return x1 < x2 && y1 < y2; }
  bool contains(int x, int y) const { return x >= x1 && x < x2 && y >= y1 && y < y2; }
  bool contains(const Box& o) const {
    return o.x1 >= x1 && o.x2 <= x2 && o.y1 >= y1 && o.y2 <= y2;
  }

  auto operator<=>(const Box&) const = default;
};

double intersection_over_union(const Box& a, const Box& b);

/// Horizontal extent [start, end) of one panoramic section.
struct Interval {
  int start = 0;
  int end = 0;

  bool contains(const Box& b) const { return b.x1 >= start && b.x2 <= end; }
  auto operator<=>(const Interval&) const = default;
};

/// S overlapping vertical strips covering the image width.
struct SectionLayout {
  std::vector<Interval> intervals;
  int image_width = 0;

  std::size_t size() const { return intervals.size(); }
  /// Bit s set iff the box lies wholly inside interval s.
  std::uint32_t membership(const Box& b) const;

  bool operator==(const SectionLayout&) const = default;
};

/// Intervals of width `section_width` spaced `section_width * (1 - overlap)`
/// apart. The group is centred on `center_x` (image centre by default); the
/// outermost intervals are then stretched or clipped to the image borders.
SectionLayout section_layout(int image_width, int section_width, int sections,
                             std::optional<double> center_x = std::nullopt,
                             double overlap = 0.5);

/// 8-connected group of edge pixels with consistent orientation.
struct Contour {
  std::vector<std::pair<int, int>> pixels;  // (x, y)
  double weight = 0.0;                      // sum of member magnitudes
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  Box bounds;  // tight bounding box of `pixels`
};

using ContourSet = std::vector<Contour>;

/// Partitions pixels with magnitude > `magnitude_threshold` into 8-connected
/// chains. A chain stops growing where the orientation change accumulated
/// from its seed would exceed `max_orientation_change`.
ContourSet group_contours(const GradientMap& g, double magnitude_threshold,
                          double max_orientation_change = std::numbers::pi / 4);

/// Total weight of wholly enclosed contours over (2(w+h))^kappa.
double score_box(const Box& b, const ContourSet& contours, double kappa);

struct LandmarkProposal {
  Box box;
  double score = 0.0;
  std::uint32_t sections = 0;  // bitmask over SectionLayout intervals

  bool in_section(std::size_t s) const { return (sections >> s) & 1u; }
};

struct ProposalConfig {
  std::vector<int> scales{32, 64, 128, 256};
  std::vector<double> aspect_ratios{0.5, 1.0, 2.0};  // width / height
  double step_fraction = 0.25;                       // window step = scale * step_fraction
  double nms_iou = 0.7;
  std::size_t max_candidates = 2000;
  double kappa = 1.5;
  double edge_threshold = 0.1;
  double max_orientation_change = std::numbers::pi / 4;
};

/// Strict weak order used for every ranked list: score descending, then
/// lower x1, lower y1, smaller area.
bool ranks_before(const LandmarkProposal& a, const LandmarkProposal& b);

/// Greedy non-maximum suppression over an already ranked list.
std::vector<LandmarkProposal> non_maximum_suppression(std::span<const LandmarkProposal> ranked,
                                                      double iou_threshold,
                                                      std::size_t max_keep);

/// Sliding-window candidates scored by contour enclosure, zero scores
/// dropped, suppressed and ranked. `sections` is left empty.
std::vector<LandmarkProposal> generate_proposals(const GrayImage& img,
                                                 const ProposalConfig& config);

/// Fills in `sections` for every proposal.
void assign_sections(std::span<LandmarkProposal> proposals, const SectionLayout& layout);

/// Per-section top-ranked subsets. `ranked` must already be in rank order;
/// section membership is recomputed from `layout`.
std::vector<std::vector<LandmarkProposal>> select_per_section(
    std::span<const LandmarkProposal> ranked, const SectionLayout& layout,
    std::span<const int> budget);

/// Reads `[{"x1":..,"y1":..,"x2":..,"y2":..,"score":..}, ...]` and returns
/// the boxes in rank order.
std::vector<LandmarkProposal> load_proposals_json(const std::filesystem::path& path);

}  // namespace ldd
