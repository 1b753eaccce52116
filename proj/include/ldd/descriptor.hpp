#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "ldd/features.hpp"
#include "ldd/proposals.hpp"

namespace ldd {

/// One landmark of a view: its box, its feature and the sections whose
/// top-ranked subset it was selected into.
struct LandmarkEntry {
  Box box;
  FeatureVector feature;
  std::uint32_t sections = 0;

  double order_key() const { return box.center_x(); }
  bool in_section(std::size_t s) const { return (sections >> s) & 1u; }
  bool operator==(const LandmarkEntry&) const = default;
};

/// Landmark distribution descriptor of a single view: entries stacked in
/// left-to-right order of their box centres.
struct ViewDescriptor {
  std::string view_id;
  SectionLayout layout;
  std::vector<LandmarkEntry> entries;
  /// Feature of the full frame; used by the whole-image baseline.
  std::optional<FeatureVector> whole_image;

  std::size_t section_count() const { return layout.size(); }
  /// Indices of the entries selected into section `s`, in stacking order.
  std::vector<std::size_t> members(std::size_t s) const;
  /// Feature dimension, or 0 for a descriptor with no features at all.
  Eigen::Index dim() const;

  bool operator==(const ViewDescriptor&) const = default;
};

/// Stacks the union of the per-section selections into a descriptor.
/// `selections[s]` is the subset chosen for section s; a box chosen for
/// several sections becomes one entry carrying all of them.
ViewDescriptor build_ldd(std::string view_id,
                         std::span<const std::vector<LandmarkProposal>> selections,
                         const FeatureTable& features, SectionLayout layout,
                         std::optional<FeatureVector> whole_image = std::nullopt);

/// Settings every descriptor of a database shares.
struct DescriptorMeta {
  std::uint32_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<int> budgets;  // one per section
  SectionLayout layout;      // default (image-centred) geometry
  FeatureKind feature_kind = FeatureKind::kRaw;

  std::size_t section_count() const { return budgets.size(); }
  bool operator==(const DescriptorMeta&) const = default;
};

/// Throws MetaMismatch naming the first differing field.
void require_compatible(const DescriptorMeta& expected, const DescriptorMeta& actual);

/// Reference database. Views keep insertion order.
class DescriptorDB {
 public:
  DescriptorDB() = default;
  explicit DescriptorDB(DescriptorMeta meta);

  const DescriptorMeta& meta() const { return meta_; }
  const std::vector<ViewDescriptor>& views() const { return views_; }
  std::size_t size() const { return views_.size(); }
  bool empty() const { return views_.empty(); }

  /// Throws on duplicate id or on a descriptor inconsistent with meta().
  void add(ViewDescriptor view);
  const ViewDescriptor* find(const std::string& view_id) const;

  /// Checks a query descriptor against meta() (section count and dim).
  void check_query(const ViewDescriptor& query) const;

  bool operator==(const DescriptorDB& o) const { return meta_ == o.meta_ && views_ == o.views_; }

 private:
  DescriptorMeta meta_;
  std::vector<ViewDescriptor> views_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// LDDB binary database, little-endian, CRC32-terminated.
void save_db(const DescriptorDB& db, const std::filesystem::path& path);
DescriptorDB load_db(const std::filesystem::path& path);

/// Encoded form used by save_db; exposed for size and checksum tests.
std::vector<char> encode_db(const DescriptorDB& db);
DescriptorDB decode_db(std::span<const char> bytes, const std::string& origin = "LDDB");

}  // namespace ldd
