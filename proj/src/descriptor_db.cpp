#include <limits>

#include <zlib.h>

#include "binary_io.hpp"
#include "ldd/descriptor.hpp"

namespace ldd {
namespace {

constexpr std::string_view kMagic = "LDDB";
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc32_of(std::span<const char> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large databases.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), n);
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint16_t coord(int v) {
  if (v < 0 || v > std::numeric_limits<std::uint16_t>::max())
    throw InvalidArgument("LDDB: box coordinate out of u16 range");
  return static_cast<std::uint16_t>(v);
}

void put_intervals(detail::ByteWriter& out, const SectionLayout& layout) {
  for (const Interval& iv : layout.intervals) {
    out.u32(static_cast<std::uint32_t>(iv.start));
    out.u32(static_cast<std::uint32_t>(iv.end));
  }
}

SectionLayout get_intervals(detail::ByteReader& in, std::size_t sections, int image_width) {
  SectionLayout layout;
  layout.image_width = image_width;
  for (std::size_t s = 0; s < sections; ++s) {
    Interval iv;
    iv.start = static_cast<int>(in.u32());
    iv.end = static_cast<int>(in.u32());
    if (iv.start >= iv.end || iv.end > image_width) throw FormatError("LDDB: invalid section interval");
    layout.intervals.push_back(iv);
  }
  return layout;
}

void put_values(detail::ByteWriter& out, const FeatureVector& v) {
  for (Eigen::Index k = 0; k < v.dim(); ++k) out.f32(v.values(k));
}

FeatureVector get_values(detail::ByteReader& in, std::uint32_t dim, FeatureKind kind) {
  in.need(static_cast<std::size_t>(dim) * 4);
  FeatureVector v{Eigen::VectorXf(dim), kind};
  for (std::uint32_t k = 0; k < dim; ++k) v.values(k) = in.f32();
  return v;
}

}  // namespace

std::vector<char> encode_db(const DescriptorDB& db) {
  const DescriptorMeta& meta = db.meta();
  detail::ByteWriter out;
  out.bytes(kMagic);
  out.u32(kVersion);
  out.u32(meta.dim);
  out.u64(meta.seed);
  out.u8(static_cast<std::uint8_t>(meta.section_count()));
  for (int b : meta.budgets) out.u32(static_cast<std::uint32_t>(b));
  out.u32(static_cast<std::uint32_t>(meta.layout.image_width));
  put_intervals(out, meta.layout);
  out.u8(static_cast<std::uint8_t>(meta.feature_kind));

  out.u32(static_cast<std::uint32_t>(db.size()));
  for (const ViewDescriptor& view : db.views()) {
    out.u32(static_cast<std::uint32_t>(view.view_id.size()));
    out.bytes(view.view_id);
    put_intervals(out, view.layout);
    out.u32(static_cast<std::uint32_t>(view.entries.size()));
    for (const LandmarkEntry& e : view.entries) {
      out.u16(coord(e.box.x1));
      out.u16(coord(e.box.y1));
      out.u16(coord(e.box.x2));
      out.u16(coord(e.box.y2));
      out.u8(static_cast<std::uint8_t>(e.sections));
      put_values(out, e.feature);
    }
    out.u8(view.whole_image ? 1 : 0);
    if (view.whole_image) put_values(out, *view.whole_image);
  }
  std::vector<char> bytes = out.buffer();
  detail::ByteWriter tail;
  tail.u32(crc32_of(bytes));
  bytes.insert(bytes.end(), tail.buffer().begin(), tail.buffer().end());
  return bytes;
}

DescriptorDB decode_db(std::span<const char> bytes, const std::string& origin) {
  if (bytes.size() < 4 || std::string_view(bytes.data(), 4) != kMagic)
    throw FormatError(origin + ": bad magic");
  if (bytes.size() < 12) throw FormatError(origin + ": truncated file");
  const auto body = bytes.first(bytes.size() - 4);
  detail::ByteReader crc_in(bytes.last(4), origin);
  if (crc_in.u32() != crc32_of(body)) throw FormatError(origin + ": checksum failure");

  detail::ByteReader in(body, origin);
  in.bytes(4);
  const std::uint32_t version = in.u32();
  if (version != kVersion)
    throw FormatError(origin + ": unsupported version " + std::to_string(version));

  DescriptorMeta meta;
  meta.dim = in.u32();
  meta.seed = in.u64();
  const std::size_t sections = in.u8();
  if (sections < 1 || sections > 8) throw FormatError(origin + ": section count out of range");
  for (std::size_t s = 0; s < sections; ++s) meta.budgets.push_back(static_cast<int>(in.u32()));
  const int image_width = static_cast<int>(in.u32());
  meta.layout = get_intervals(in, sections, image_width);
  const std::uint8_t kind = in.u8();
  if (kind > 1) throw FormatError(origin + ": unknown feature kind");
  meta.feature_kind = static_cast<FeatureKind>(kind);

  DescriptorDB db(meta);
  const std::uint32_t views = in.u32();
  for (std::uint32_t v = 0; v < views; ++v) {
    ViewDescriptor view;
    view.view_id = in.bytes(in.u32());
    view.layout = get_intervals(in, sections, image_width);
    const std::uint32_t entries = in.u32();
    in.need(static_cast<std::size_t>(entries) * (9 + static_cast<std::size_t>(meta.dim) * 4));
    view.entries.reserve(entries);
    for (std::uint32_t i = 0; i < entries; ++i) {
      LandmarkEntry e;
      e.box.x1 = in.u16();
      e.box.y1 = in.u16();
      e.box.x2 = in.u16();
      e.box.y2 = in.u16();
      e.sections = in.u8();
      e.feature = get_values(in, meta.dim, meta.feature_kind);
      view.entries.push_back(std::move(e));
    }
    if (in.u8()) view.whole_image = get_values(in, meta.dim, meta.feature_kind);
    try {
      db.add(std::move(view));
    } catch (const Error& e) {
      throw FormatError(origin + ": " + e.what());
    }
  }
  if (in.remaining() != 0) throw FormatError(origin + ": trailing bytes after last view");
  return db;
}

void save_db(const DescriptorDB& db, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_db(db));
}

DescriptorDB load_db(const std::filesystem::path& path) {
  const std::vector<char> bytes = detail::read_file(path);
  return decode_db(bytes, "LDDB '" + path.string() + "'");
}

}  // namespace ldd
