#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <tuple>

namespace ldd::testing {

double score_box_by_pixels(const Box& b, const ContourSet& contours, double kappa) {
  double enclosed = 0.0;
  for (const Contour& c : contours) {
    bool inside = true;
    for (const auto& [x, y] : c.pixels)
      if (x < b.x1 || x >= b.x2 || y < b.y1 || y >= b.y2) {
        inside = false;
        break;
      }
    if (inside) enclosed += c.weight;
  }
  if (enclosed == 0.0) return 0.0;
  return enclosed / std::pow(2.0 * (b.width() + b.height()), kappa);
}

std::uint32_t membership_by_columns(const Box& b, const SectionLayout& layout) {
  std::uint32_t mask = 0;
  for (std::size_t s = 0; s < layout.size(); ++s) {
    bool all = true;
    for (int x = b.x1; x < b.x2; ++x)
      if (x < layout.intervals[s].start || x >= layout.intervals[s].end) all = false;
    if (all) mask |= 1u << s;
  }
  return mask;
}

std::vector<std::vector<Box>> select_by_scan(std::span<const LandmarkProposal> ranked,
                                             const SectionLayout& layout,
                                             std::span<const int> budget) {
  std::vector<std::vector<Box>> out(layout.size());
  for (std::size_t s = 0; s < layout.size(); ++s)
    for (const LandmarkProposal& p : ranked) {
      if (static_cast<int>(out[s].size()) == budget[s]) break;
      if ((membership_by_columns(p.box, layout) >> s) & 1u) out[s].push_back(p.box);
    }
  return out;
}

namespace {

std::vector<std::size_t> section_members(const ViewDescriptor& v, std::size_t s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.entries.size(); ++i)
    if ((v.entries[i].sections >> s) & 1u) out.push_back(i);
  return out;
}

}  // namespace

MatchResult greedy_match_oracle(const ViewDescriptor& a, const ViewDescriptor& b) {
  const std::size_t S = a.section_count();
  std::vector<double> best(S, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> pending(S, false);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t i : section_members(a, s))
      for (std::size_t j : section_members(b, s)) {
        const double c = cosine(a.entries[i].feature, b.entries[j].feature);
        if (!pending[s] || c > best[s]) best[s] = c;
        pending[s] = true;
      }

  std::set<std::size_t> used_a, used_b;
  std::vector<SectionMatch> pairs;
  while (true) {
    std::size_t next = S;
    for (std::size_t s = 0; s < S; ++s)
      if (pending[s] && (next == S || best[s] > best[next])) next = s;
    if (next == S) break;
    pending[next] = false;

    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t i : section_members(a, next))
      for (std::size_t j : section_members(b, next))
        if (!used_a.count(i) && !used_b.count(j))
          candidates.emplace_back(-cosine(a.entries[i].feature, b.entries[j].feature), i, j);
    if (candidates.empty()) continue;
    std::sort(candidates.begin(), candidates.end());
    const auto [neg, i, j] = candidates.front();
    used_a.insert(i);
    used_b.insert(j);
    pairs.push_back({next, i, j, -neg});
  }

  MatchResult r;
  std::sort(pairs.begin(), pairs.end(),
            [](const SectionMatch& x, const SectionMatch& y) { return x.section < y.section; });
  for (const SectionMatch& p : pairs) r.score += p.similarity;
  r.pairs = std::move(pairs);
  return r;
}

double exhaustive_optimum(const ViewDescriptor& a, const ViewDescriptor& b) {
  const std::size_t S = a.section_count();
  std::vector<bool> used_a(a.entries.size()), used_b(b.entries.size());
  double best = -std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> visit = [&](std::size_t s, double acc) {
    if (s == S) {
      best = std::max(best, acc);
      return;
    }
    for (std::size_t i : section_members(a, s))
      for (std::size_t j : section_members(b, s)) {
        if (used_a[i] || used_b[j]) continue;
        used_a[i] = used_b[j] = true;
        visit(s + 1, acc + cosine(a.entries[i].feature, b.entries[j].feature));
        used_a[i] = used_b[j] = false;
      }
    visit(s + 1, acc);
  };
  visit(0, 0.0);
  return best;
}

bool pairs_are_disjoint(const MatchResult& r) {
  std::set<std::size_t> seen_a, seen_b;
  for (const SectionMatch& p : r.pairs)
    if (!seen_a.insert(p.entry_a).second || !seen_b.insert(p.entry_b).second) return false;
  return true;
}

}  // namespace ldd::testing
