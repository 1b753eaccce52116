#include "ldd/matching.hpp"

#include <limits>
#include <numeric>

namespace ldd {
namespace {

void check_comparable(const ViewDescriptor& a, const ViewDescriptor& b) {
  if (a.section_count() != b.section_count())
    throw MetaMismatch("match: section counts differ (" + std::to_string(a.section_count()) +
                       " vs " + std::to_string(b.section_count()) + ")");
  if (a.dim() != 0 && b.dim() != 0 && a.dim() != b.dim())
    throw MetaMismatch("match: feature dims differ (" + std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()) + ")");
}

// Cosines of every pair that shares at least one section.
struct PairTable {
  std::size_t cols = 0;
  std::vector<double> sim;
  double operator()(std::size_t i, std::size_t j) const { return sim[i * cols + j]; }
};

PairTable pair_similarities(const ViewDescriptor& a, const ViewDescriptor& b) {
  PairTable t{b.entries.size(), std::vector<double>(a.entries.size() * b.entries.size(),
                                                    std::numeric_limits<double>::quiet_NaN())};
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    for (std::size_t j = 0; j < b.entries.size(); ++j)
      if (a.entries[i].sections & b.entries[j].sections)
        t.sim[i * t.cols + j] = cosine(a.entries[i].feature, b.entries[j].feature);
  return t;
}

double total(const std::vector<SectionMatch>& pairs) {
  double s = 0.0;
  for (const SectionMatch& p : pairs) s += p.similarity;
  return s;
}

MatchResult match_greedy(const ViewDescriptor& a, const ViewDescriptor& b, const PairTable& sim) {
  const std::size_t S = a.section_count();
  std::vector<std::vector<std::size_t>> ma(S), mb(S);
  std::vector<double> best(S, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < S; ++s) {
    ma[s] = a.members(s);
    mb[s] = b.members(s);
    if (ma[s].empty() || mb[s].empty()) continue;
    for (std::size_t i : ma[s])
      for (std::size_t j : mb[s]) best[s] = std::max(best[s], sim(i, j));
    order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return best[x] > best[y]; });

  std::vector<bool> used_a(a.entries.size(), false), used_b(b.entries.size(), false);
  MatchResult result;
  for (std::size_t s : order) {
    bool found = false;
    SectionMatch m{s, 0, 0, 0.0};
    for (std::size_t i : ma[s]) {
      if (used_a[i]) continue;
      for (std::size_t j : mb[s]) {
        if (used_b[j]) continue;
        if (!found || sim(i, j) > m.similarity) {
          m.entry_a = i;
          m.entry_b = j;
          m.similarity = sim(i, j);
          found = true;
        }
      }
    }
    if (!found) continue;
    used_a[m.entry_a] = true;
    used_b[m.entry_b] = true;
    result.pairs.push_back(m);
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const SectionMatch& x, const SectionMatch& y) { return x.section < y.section; });
  result.score = total(result.pairs);
  return result;
}

class ExhaustiveSearch {
 public:
  ExhaustiveSearch(const ViewDescriptor& a, const ViewDescriptor& b, const PairTable& sim)
      : sim_(sim), used_a_(a.entries.size(), false), used_b_(b.entries.size(), false) {
    for (std::size_t s = 0; s < a.section_count(); ++s) {
      ma_.push_back(a.members(s));
      mb_.push_back(b.members(s));
    }
  }

  MatchResult run() {
    visit(0, 0.0);
    MatchResult r;
    r.pairs = best_;
    r.score = total(best_);
    return r;
  }

 private:
  void visit(std::size_t s, double acc) {
    if (s == ma_.size()) {
      if (!have_best_ || acc > best_score_) {
        best_score_ = acc;
        best_ = current_;
        have_best_ = true;
      }
      return;
    }
    for (std::size_t i : ma_[s]) {
      if (used_a_[i]) continue;
      for (std::size_t j : mb_[s]) {
        if (used_b_[j]) continue;
        used_a_[i] = used_b_[j] = true;
        current_.push_back({s, i, j, sim_(i, j)});
        visit(s + 1, acc + sim_(i, j));
        current_.pop_back();
        used_a_[i] = used_b_[j] = false;
      }
    }
    visit(s + 1, acc);
  }

  const PairTable& sim_;
  std::vector<std::vector<std::size_t>> ma_, mb_;
  std::vector<bool> used_a_, used_b_;
  std::vector<SectionMatch> current_, best_;
  double best_score_ = 0.0;
  bool have_best_ = false;
};

}  // namespace

MatchResult match_ldd(const ViewDescriptor& a, const ViewDescriptor& b, MatchStrategy strategy) {
  check_comparable(a, b);
  const PairTable sim = pair_similarities(a, b);
  if (strategy == MatchStrategy::kExhaustive) return ExhaustiveSearch(a, b, sim).run();
  return match_greedy(a, b, sim);
}

double shape_similarity(const Box& b1, const Box& b2) {
  if (!b1.valid() || !b2.valid()) throw InvalidArgument("shape_similarity: degenerate box");
  const double w1 = b1.width(), w2 = b2.width(), h1 = b1.height(), h2 = b2.height();
  return 1.0 - 0.5 * (std::abs(w1 - w2) / std::max(w1, w2) + std::abs(h1 - h2) / std::max(h1, h2));
}

double clm_score(std::span<const LandmarkEntry> a, std::span<const LandmarkEntry> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("clm_score: empty landmark set");
  const std::size_t na = a.size(), nb = b.size();
  std::vector<double> d(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) d[i * nb + j] = cosine(a[i].feature, b[j].feature);

  std::vector<std::size_t> best_for_a(na, 0), best_for_b(nb, 0);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 1; j < nb; ++j)
      if (d[i * nb + j] > d[i * nb + best_for_a[i]]) best_for_a[i] = j;
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t i = 1; i < na; ++i)
      if (d[i * nb + j] > d[best_for_b[j] * nb + j]) best_for_b[j] = i;

  double sum = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const std::size_t j = best_for_a[i];
    if (best_for_b[j] == i) sum += d[i * nb + j] * shape_similarity(a[i].box, b[j].box);
  }
  return sum / (static_cast<double>(na) * static_cast<double>(nb));
}

double cwi_score(const ViewDescriptor& a, const ViewDescriptor& b) {
  if (!a.whole_image || !b.whole_image)
    throw InvalidArgument("cwi_score: descriptor '" + (a.whole_image ? b.view_id : a.view_id) +
                          "' has no whole-image feature");
  return cwi_score(*a.whole_image, *b.whole_image);
}

}  // namespace ldd
