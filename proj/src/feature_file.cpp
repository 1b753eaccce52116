#include <limits>

#include "binary_io.hpp"
#include "ldd/features.hpp"

namespace ldd {
namespace {

constexpr std::string_view kMagic = "LDDF";
constexpr std::uint32_t kVersion = 1;

std::uint16_t to_u16(int v, const char* what) {
  if (v < 0 || v > std::numeric_limits<std::uint16_t>::max())
    throw InvalidArgument(std::string("LDDF: ") + what + " coordinate out of u16 range");
  return static_cast<std::uint16_t>(v);
}

}  // namespace

FeatureTable load_features(const std::filesystem::path& path) {
  const std::vector<char> data = detail::read_file(path);
  detail::ByteReader in(data, "LDDF '" + path.string() + "'");
  if (in.remaining() < 4 || in.bytes(4) != kMagic)
    throw FormatError("LDDF '" + path.string() + "': bad magic");
  const std::uint32_t version = in.u32();
  if (version != kVersion)
    throw FormatError("LDDF '" + path.string() + "': unsupported version " + std::to_string(version));
  const std::uint32_t count = in.u32();
  const std::uint32_t dim = in.u32();
  const std::size_t record_bytes = 8 + static_cast<std::size_t>(dim) * 4;
  if (in.remaining() != record_bytes * count)
    throw FormatError("LDDF '" + path.string() + "': payload holds " +
                      std::to_string(in.remaining()) + " bytes, header implies " +
                      std::to_string(record_bytes * count) +
                      (in.remaining() < record_bytes * count ? " (truncated file)" : ""));
  FeatureTable table;
  for (std::uint32_t i = 0; i < count; ++i) {
    Box b;
    b.x1 = in.u16();
    b.y1 = in.u16();
    b.x2 = in.u16();
    b.y2 = in.u16();
    if (!b.valid()) throw FormatError("LDDF '" + path.string() + "': degenerate box in record " + std::to_string(i));
    FeatureVector v{Eigen::VectorXf(dim), FeatureKind::kRaw};
    for (std::uint32_t k = 0; k < dim; ++k) v.values(k) = in.f32();
    if (!v.values.allFinite())
      throw FormatError("LDDF '" + path.string() + "': non-finite value in record " + std::to_string(i));
    if (!table.emplace(b, std::move(v)).second)
      throw FormatError("LDDF '" + path.string() + "': duplicate box in record " + std::to_string(i));
  }
  return table;
}

void save_features(const std::filesystem::path& path, const FeatureTable& features) {
  const Eigen::Index dim = features.empty() ? 0 : features.begin()->second.dim();
  detail::ByteWriter out;
  out.bytes(kMagic);
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(features.size()));
  out.u32(static_cast<std::uint32_t>(dim));
  for (const auto& [box, feature] : features) {
    if (feature.dim() != dim) throw InvalidArgument("save_features: nonuniform feature dims");
    out.u16(to_u16(box.x1, "x1"));
    out.u16(to_u16(box.y1, "y1"));
    out.u16(to_u16(box.x2, "x2"));
    out.u16(to_u16(box.y2, "y2"));
    for (Eigen::Index k = 0; k < dim; ++k) out.f32(feature.values(k));
  }
  detail::write_file_atomic(path, out.buffer());
}

}  // namespace ldd
