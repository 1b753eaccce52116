#include "ldd/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"

#include "ldd/error.hpp"

namespace ldd {

double intersection_over_union(const Box& a, const Box& b) {
  const long iw = std::max(0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const long ih = std::max(0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const long inter = iw * ih;
  const long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::uint32_t SectionLayout::membership(const Box& b) const {
  std::uint32_t mask = 0;
  for (std::size_t s = 0; s < intervals.size(); ++s)
    if (intervals[s].contains(b)) mask |= 1u << s;
  return mask;
}

SectionLayout section_layout(int image_width, int section_width, int sections,
                             std::optional<double> center_x, double overlap) {
  if (sections < 1) throw InvalidArgument("section_layout: need at least one section");
  if (sections > 8) throw InvalidArgument("section_layout: at most 8 sections are supported");
  if (image_width < 1 || section_width < 1)
    throw InvalidArgument("section_layout: widths must be positive");
  if (section_width > image_width)
    throw InvalidArgument("section_layout: section wider than the image");
  if (!(overlap >= 0.0 && overlap < 1.0))
    throw InvalidArgument("section_layout: overlap must lie in [0,1)");

  const double stride = section_width * (1.0 - overlap);
  const double span = section_width + (sections - 1) * stride;
  if (span < image_width)
    throw InvalidArgument("section_layout: " + std::to_string(sections) + " sections of width " +
                          std::to_string(section_width) + " cannot cover an image of width " +
                          std::to_string(image_width));

  // The middle section is kept whole inside the image; a centre closer to
  // the border than half a section is pulled inwards.
  const double half = 0.5 * section_width;
  double centre = center_x.value_or(0.5 * image_width);
  centre = std::clamp(centre, half, image_width - half);

  double first = centre - 0.5 * span;
  // Every section keeps at least one column of the image.
  const double lo = 1.0 - section_width;
  const double hi = image_width - 1.0 - (sections - 1) * stride;
  if (lo > hi)
    throw InvalidArgument("section_layout: " + std::to_string(sections) + " sections of width " +
                          std::to_string(section_width) + " overhang an image of width " +
                          std::to_string(image_width));
  first = std::clamp(first, lo, hi);
  SectionLayout layout;
  layout.image_width = image_width;
  for (int s = 0; s < sections; ++s) {
    const double start = first + s * stride;
    int a = static_cast<int>(std::lround(start));
    int b = static_cast<int>(std::lround(start + section_width));
    a = std::clamp(a, 0, image_width);
    b = std::clamp(b, 0, image_width);
    layout.intervals.push_back({a, b});
  }
  // Outer sections absorb whatever the shift uncovered.
  layout.intervals.front().start = 0;
  layout.intervals.back().end = image_width;
  for (std::size_t s = 0; s < layout.intervals.size(); ++s) {
    const Interval& iv = layout.intervals[s];
    if (iv.start >= iv.end || (s > 0 && iv.start > layout.intervals[s - 1].end))
      throw InvalidArgument("section_layout: centre " + std::to_string(centre) +
                            " leaves a gap or an empty section");
  }
  return layout;
}

bool ranks_before(const LandmarkProposal& a, const LandmarkProposal& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.box.x1 != b.box.x1) return a.box.x1 < b.box.x1;
  if (a.box.y1 != b.box.y1) return a.box.y1 < b.box.y1;
  if (a.box.area() != b.box.area()) return a.box.area() < b.box.area();
  return a.box < b.box;
}

std::vector<LandmarkProposal> non_maximum_suppression(std::span<const LandmarkProposal> ranked,
                                                      double iou_threshold,
                                                      std::size_t max_keep) {
  std::vector<LandmarkProposal> kept;
  for (const LandmarkProposal& p : ranked) {
    if (kept.size() >= max_keep) break;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const LandmarkProposal& k) {
      return intersection_over_union(k.box, p.box) > iou_threshold;
    });
    if (!suppressed) kept.push_back(p);
  }
  return kept;
}

namespace {

// Enclosed contour weight for every placement of a fixed-size window.
// A contour with bounds [cx1,cx2) x [cy1,cy2) is enclosed by the window at
// top-left (x,y) iff x in [cx2-w, cx1] and y in [cy2-h, cy1], so each
// contour adds its weight to one rectangle of placements. Two prefix sums
// over a difference array then give every placement at once.
struct PlacementSums {
  Raster<double> weight;
  Raster<long> count;
};

PlacementSums enclosed_weight_per_placement(const ContourSet& contours, int image_w, int image_h,
                                            int w, int h) {
  const int nx = image_w - w + 1;
  const int ny = image_h - h + 1;
  Raster<double> dw = Raster<double>::Zero(ny + 1, nx + 1);
  Raster<long> dc = Raster<long>::Zero(ny + 1, nx + 1);
  for (const Contour& c : contours) {
    if (c.bounds.width() > w || c.bounds.height() > h) continue;
    const int xa = std::max(0, c.bounds.x2 - w);
    const int xb = std::min(nx - 1, c.bounds.x1);
    const int ya = std::max(0, c.bounds.y2 - h);
    const int yb = std::min(ny - 1, c.bounds.y1);
    if (xa > xb || ya > yb) continue;
    dw(ya, xa) += c.weight;
    dw(ya, xb + 1) -= c.weight;
    dw(yb + 1, xa) -= c.weight;
    dw(yb + 1, xb + 1) += c.weight;
    dc(ya, xa) += 1;
    dc(ya, xb + 1) -= 1;
    dc(yb + 1, xa) -= 1;
    dc(yb + 1, xb + 1) += 1;
  }
  for (int y = 0; y <= ny; ++y)
    for (int x = 1; x <= nx; ++x) {
      dw(y, x) += dw(y, x - 1);
      dc(y, x) += dc(y, x - 1);
    }
  for (int y = 1; y <= ny; ++y)
    for (int x = 0; x <= nx; ++x) {
      dw(y, x) += dw(y - 1, x);
      dc(y, x) += dc(y - 1, x);
    }
  return {std::move(dw), std::move(dc)};
}

}  // namespace

std::vector<LandmarkProposal> generate_proposals(const GrayImage& img,
                                                 const ProposalConfig& config) {
  if (!(config.kappa > 0.0)) throw InvalidArgument("generate_proposals: kappa must be positive");
  if (!(config.step_fraction > 0.0))
    throw InvalidArgument("generate_proposals: step fraction must be positive");
  const ContourSet contours =
      group_contours(gradient_map(img), config.edge_threshold, config.max_orientation_change);
  if (contours.empty()) return {};

  const int iw = img.width();
  const int ih = img.height();
  std::vector<LandmarkProposal> candidates;
  for (int scale : config.scales) {
    const int step = std::max(1, static_cast<int>(std::lround(scale * config.step_fraction)));
    for (double aspect : config.aspect_ratios) {
      const int w = static_cast<int>(std::lround(scale * std::sqrt(aspect)));
      const int h = static_cast<int>(std::lround(scale / std::sqrt(aspect)));
      if (w < 1 || h < 1 || w > iw || h > ih) continue;
      const PlacementSums sums = enclosed_weight_per_placement(contours, iw, ih, w, h);
      const double norm = std::pow(2.0 * (w + h), config.kappa);
      for (int y = 0; y + h <= ih; y += step) {
        for (int x = 0; x + w <= iw; x += step) {
          if (sums.count(y, x) == 0) continue;
          candidates.push_back({{x, y, x + w, y + h}, sums.weight(y, x) / norm, 0});
        }
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), ranks_before);
  // Identical windows can arise from different (scale, aspect) pairs.
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const LandmarkProposal& a, const LandmarkProposal& b) {
                                 return a.box == b.box;
                               }),
                   candidates.end());
  return non_maximum_suppression(candidates, config.nms_iou, config.max_candidates);
}

void assign_sections(std::span<LandmarkProposal> proposals, const SectionLayout& layout) {
  for (LandmarkProposal& p : proposals) p.sections = layout.membership(p.box);
}

std::vector<std::vector<LandmarkProposal>> select_per_section(
    std::span<const LandmarkProposal> ranked, const SectionLayout& layout,
    std::span<const int> budget) {
  if (budget.size() != layout.size())
    throw InvalidArgument("select_per_section: budget has " + std::to_string(budget.size()) +
                          " entries for " + std::to_string(layout.size()) + " sections");
  std::vector<std::vector<LandmarkProposal>> selected(layout.size());
  for (const LandmarkProposal& p : ranked) {
    const std::uint32_t mask = layout.membership(p.box);
    for (std::size_t s = 0; s < layout.size(); ++s) {
      if (!((mask >> s) & 1u)) continue;
      if (static_cast<int>(selected[s].size()) >= budget[s]) continue;
      LandmarkProposal q = p;
      q.sections = mask;
      selected[s].push_back(q);
    }
  }
  return selected;
}

std::vector<LandmarkProposal> load_proposals_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open proposal file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed proposal file '" + path.string() + "': " + e.what());
  }
  if (!doc.is_array()) throw FormatError("proposal file must hold a JSON array");
  std::vector<LandmarkProposal> out;
  out.reserve(doc.size());
  try {
    for (const auto& rec : doc) {
      LandmarkProposal p;
      p.box = {rec.at("x1").get<int>(), rec.at("y1").get<int>(), rec.at("x2").get<int>(),
               rec.at("y2").get<int>()};
      p.score = rec.at("score").get<double>();
      if (!p.box.valid() || p.box.x1 < 0 || p.box.y1 < 0)
        throw FormatError("invalid box in proposal file '" + path.string() + "'");
      if (!(p.score >= 0.0)) throw FormatError("negative score in proposal file");
      out.push_back(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad proposal record in '" + path.string() + "': " + e.what());
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

}  // namespace ldd
