#include "ldd/descriptor.hpp"

#include <algorithm>

namespace ldd {

std::vector<std::size_t> ViewDescriptor::members(std::size_t s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].in_section(s)) out.push_back(i);
  return out;
}

Eigen::Index ViewDescriptor::dim() const {
  if (!entries.empty()) return entries.front().feature.dim();
  if (whole_image) return whole_image->dim();
  return 0;
}

namespace {

bool stacks_before(const LandmarkEntry& a, const LandmarkEntry& b) {
  if (a.order_key() != b.order_key()) return a.order_key() < b.order_key();
  return a.box < b.box;  // x1 first, then y1, x2, y2
}

}  // namespace

ViewDescriptor build_ldd(std::string view_id,
                         std::span<const std::vector<LandmarkProposal>> selections,
                         const FeatureTable& features, SectionLayout layout,
                         std::optional<FeatureVector> whole_image) {
  if (selections.size() != layout.size())
    throw InvalidArgument("build_ldd: " + std::to_string(selections.size()) +
                          " selections for " + std::to_string(layout.size()) + " sections");
  std::map<Box, std::uint32_t> membership;
  for (std::size_t s = 0; s < selections.size(); ++s)
    for (const LandmarkProposal& p : selections[s]) membership[p.box] |= 1u << s;

  ViewDescriptor out{std::move(view_id), std::move(layout), {}, std::move(whole_image)};
  out.entries.reserve(membership.size());
  Eigen::Index dim = -1;
  for (const auto& [box, mask] : membership) {
    const auto it = features.find(box);
    if (it == features.end())
      throw InvalidArgument("build_ldd: no feature for box (" + std::to_string(box.x1) + "," +
                            std::to_string(box.y1) + ")-(" + std::to_string(box.x2) + "," +
                            std::to_string(box.y2) + ") of view '" + out.view_id + "'");
    if (dim >= 0 && it->second.dim() != dim)
      throw InvalidArgument("build_ldd: feature dims differ within view '" + out.view_id + "'");
    dim = it->second.dim();
    out.entries.push_back({box, it->second, mask});
  }
  if (out.whole_image && dim >= 0 && out.whole_image->dim() != dim)
    throw InvalidArgument("build_ldd: whole-image feature dim differs from landmark dim");
  std::sort(out.entries.begin(), out.entries.end(), stacks_before);
  return out;
}

void require_compatible(const DescriptorMeta& expected, const DescriptorMeta& actual) {
  if (expected.dim != actual.dim)
    throw MetaMismatch("feature dim " + std::to_string(actual.dim) + " != expected " +
                       std::to_string(expected.dim));
  if (expected.seed != actual.seed)
    throw MetaMismatch("projection seed " + std::to_string(actual.seed) + " != expected " +
                       std::to_string(expected.seed));
  if (expected.budgets != actual.budgets) throw MetaMismatch("section count or budgets differ");
  if (expected.layout != actual.layout) throw MetaMismatch("section geometry differs");
  if (expected.feature_kind != actual.feature_kind) throw MetaMismatch("feature kind differs");
}

DescriptorDB::DescriptorDB(DescriptorMeta meta) : meta_(std::move(meta)) {
  if (meta_.budgets.size() != meta_.layout.size())
    throw InvalidArgument("DescriptorDB: budgets and layout disagree on the section count");
  if (meta_.section_count() < 1 || meta_.section_count() > 8)
    throw InvalidArgument("DescriptorDB: section count must lie in [1,8]");
}

void DescriptorDB::check_query(const ViewDescriptor& query) const {
  if (query.section_count() != meta_.section_count())
    throw MetaMismatch("view '" + query.view_id + "' has " + std::to_string(query.section_count()) +
                       " sections, database has " + std::to_string(meta_.section_count()));
  const Eigen::Index d = query.dim();
  if (d != 0 && d != static_cast<Eigen::Index>(meta_.dim))
    throw MetaMismatch("view '" + query.view_id + "' has feature dim " + std::to_string(d) +
                       ", database has " + std::to_string(meta_.dim));
}

void DescriptorDB::add(ViewDescriptor view) {
  check_query(view);
  const std::uint32_t all_sections = (1u << meta_.section_count()) - 1u;
  for (const LandmarkEntry& e : view.entries) {
    if (e.feature.dim() != static_cast<Eigen::Index>(meta_.dim))
      throw MetaMismatch("view '" + view.view_id + "': entry dim differs from database dim");
    if (e.sections == 0 || (e.sections & ~all_sections) != 0)
      throw InvalidArgument("view '" + view.view_id + "': entry with invalid section set");
  }
  if (view.whole_image && view.whole_image->dim() != static_cast<Eigen::Index>(meta_.dim))
    throw MetaMismatch("view '" + view.view_id + "': whole-image dim differs from database dim");
  if (index_.count(view.view_id)) throw InvalidArgument("duplicate view id '" + view.view_id + "'");
  index_.emplace(view.view_id, views_.size());
  views_.push_back(std::move(view));
}

const ViewDescriptor* DescriptorDB::find(const std::string& view_id) const {
  const auto it = index_.find(view_id);
  return it == index_.end() ? nullptr : &views_[it->second];
}

}  // namespace ldd
