#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "generators.hpp"
#include "ldd/error.hpp"
#include "ldd/proposals.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

namespace {

using ldd::Box;
using ldd::GrayImage;
using ldd::Interval;
using ldd::LandmarkProposal;
using ldd::Raster;
using ldd::testing::Rng;

std::vector<Interval> iv(std::initializer_list<std::pair<int, int>> xs) {
  std::vector<Interval> out;
  for (auto [a, b] : xs) out.push_back({a, b});
  return out;
}

// Random binary edge map: a few rectangles and line segments.
GrayImage random_edge_scene(Rng& rng, int w, int h) {
  Raster<float> px = Raster<float>::Constant(h, w, 0.5f);
  const int shapes = ldd::testing::uniform_int(rng, 1, 6);
  for (int k = 0; k < shapes; ++k) {
    const Box b = ldd::testing::random_box(rng, w, h, 2);
    const auto level = static_cast<float>(ldd::testing::uniform_real(rng, 0.0, 1.0));
    px.block(b.y1, b.x1, b.height(), b.width()).setConstant(level);
  }
  return GrayImage(std::move(px));
}

TEST(SectionLayout, ThreeSectionsHalfOverlap) {
  const auto l = ldd::section_layout(640, 320, 3);
  EXPECT_EQ(l.intervals, iv({{0, 320}, {160, 480}, {320, 640}}));
  EXPECT_EQ(l.image_width, 640);
}

TEST(SectionLayout, SingleFullWidthSection) {
  EXPECT_EQ(ldd::section_layout(640, 640, 1).intervals, iv({{0, 640}}));
}

TEST(SectionLayout, CentredOnVanishingPoint) {
  const auto l = ldd::section_layout(640, 320, 3, 400.0);
  EXPECT_EQ(l.intervals[1], (Interval{240, 560}));
  EXPECT_EQ(l.intervals, iv({{0, 400}, {240, 560}, {400, 640}}));
}

TEST(SectionLayout, CentreNearBorderKeepsMiddleWhole) {
  const auto l = ldd::section_layout(640, 320, 3, 10.0);
  EXPECT_EQ(l.intervals[1], (Interval{0, 320}));
  EXPECT_EQ(l.intervals.front().start, 0);
  EXPECT_EQ(l.intervals.back().end, 640);
}

TEST(SectionLayout, UnionCoversImage) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int S = ldd::testing::uniform_int(rng, 1, 5);
    const int sw = ldd::testing::uniform_int(rng, 20, 400);
    const int span = sw + (S - 1) * (sw / 2);
    const int W = ldd::testing::uniform_int(rng, std::max(sw, span - sw + 2), span);
    const auto l = ldd::section_layout(W, sw, S, ldd::testing::uniform_real(rng, -50, W + 50));
    ASSERT_EQ(l.size(), static_cast<std::size_t>(S));
    for (int x = 0; x < W; ++x) {
      bool covered = false;
      for (const auto& i : l.intervals) covered |= (x >= i.start && x < i.end);
      ASSERT_TRUE(covered) << "x=" << x;
    }
  }
}

TEST(SectionLayout, Errors) {
  EXPECT_THROW(ldd::section_layout(640, 200, 3), ldd::InvalidArgument);
  EXPECT_THROW(ldd::section_layout(640, 700, 1), ldd::InvalidArgument);
  EXPECT_THROW(ldd::section_layout(640, 320, 0), ldd::InvalidArgument);
  EXPECT_THROW(ldd::section_layout(65, 64, 5), ldd::InvalidArgument);
}

TEST(SectionMembership, OverlapBoxBelongsToTwoSections) {
  const auto l = ldd::section_layout(640, 320, 3);
  EXPECT_EQ(l.membership({200, 50, 300, 200}), 0b011u);
  EXPECT_EQ(l.membership({100, 0, 400, 10}), 0u);
  EXPECT_EQ(l.membership({0, 0, 640, 10}), 0u);
  EXPECT_EQ(l.membership({330, 0, 470, 10}), 0b110u);
  EXPECT_EQ(l.membership({500, 0, 640, 10}), 0b100u);
}

TEST(SectionMembership, MatchesColumnOracle) {
  Rng rng(5);
  const auto l = ldd::section_layout(640, 320, 3, 380.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const Box b = ldd::testing::random_box(rng, 640, 480);
    ASSERT_EQ(l.membership(b), ldd::testing::membership_by_columns(b, l));
  }
}

TEST(SelectPerSection, BudgetCapsMiddle) {
  const auto l = ldd::section_layout(640, 320, 3);
  std::vector<LandmarkProposal> ranked;
  for (int k = 0; k < 100; ++k) ranked.push_back({{200, k, 440, k + 20}, 100.0 - k, 0});
  const std::vector<int> budget{5, 15, 5};
  const auto sel = ldd::select_per_section(ranked, l, budget);
  ASSERT_EQ(sel.size(), 3u);
  EXPECT_TRUE(sel[0].empty());
  EXPECT_TRUE(sel[2].empty());
  ASSERT_EQ(sel[1].size(), 15u);
  for (int k = 0; k < 15; ++k) EXPECT_EQ(sel[1][k].box, ranked[k].box);
}

TEST(SelectPerSection, DiscardsBoxesInNoSection) {
  const auto l = ldd::section_layout(640, 320, 3);
  const std::vector<LandmarkProposal> ranked{{{100, 0, 400, 50}, 1.0, 0}};
  const std::vector<int> budget{10, 30, 10};
  for (const auto& s : ldd::select_per_section(ranked, l, budget)) EXPECT_TRUE(s.empty());
}

TEST(SelectPerSection, BudgetLengthMismatch) {
  const auto l = ldd::section_layout(640, 320, 3);
  const std::vector<int> budget{10, 30};
  EXPECT_THROW(ldd::select_per_section({}, l, budget), ldd::InvalidArgument);
}

TEST(SelectPerSection, MatchesScanOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int W = 640;
    const auto l = ldd::section_layout(W, 320, 3, ldd::testing::uniform_real(rng, 0, W));
    std::vector<LandmarkProposal> ranked;
    const int n = ldd::testing::uniform_int(rng, 0, 120);
    for (int k = 0; k < n; ++k)
      ranked.push_back({ldd::testing::random_box(rng, W, 480, 8), ldd::testing::uniform_real(rng, 0, 1), 0});
    std::sort(ranked.begin(), ranked.end(), ldd::ranks_before);
    const std::vector<int> budget{ldd::testing::uniform_int(rng, 0, 12), ldd::testing::uniform_int(rng, 0, 30),
                                  ldd::testing::uniform_int(rng, 0, 12)};
    const auto sel = ldd::select_per_section(ranked, l, budget);
    const auto expect = ldd::testing::select_by_scan(ranked, l, budget);
    for (std::size_t s = 0; s < 3; ++s) {
      ASSERT_LE(static_cast<int>(sel[s].size()), budget[s]);
      ASSERT_EQ(sel[s].size(), expect[s].size());
      for (std::size_t k = 0; k < sel[s].size(); ++k) {
        EXPECT_EQ(sel[s][k].box, expect[s][k]);
        EXPECT_EQ(sel[s][k].sections, ldd::testing::membership_by_columns(sel[s][k].box, l));
      }
    }
  }
}

TEST(Contours, ConstantImageHasNone) {
  EXPECT_TRUE(ldd::group_contours(ldd::gradient_map(GrayImage(16, 16, 0.4f)), 0.1).empty());
}

TEST(Contours, StepEdgeIsOneContour) {
  Raster<float> px = Raster<float>::Zero(12, 12);
  px.rightCols(6).setConstant(1.0f);
  const auto contours = ldd::group_contours(ldd::gradient_map(GrayImage(px)), 0.1);
  ASSERT_EQ(contours.size(), 1u);
  const auto& c = contours.front();
  EXPECT_EQ(c.bounds, (Box{5, 1, 7, 11}));
  EXPECT_EQ(c.pixels.size(), 20u);
  EXPECT_GT(c.weight, 0.0);
}

TEST(Contours, DisjointSquaresDoNotMerge) {
  Raster<float> px = Raster<float>::Zero(40, 60);
  px.block(5, 5, 10, 10).setConstant(1.0f);
  px.block(20, 35, 12, 12).setConstant(1.0f);
  const auto contours = ldd::group_contours(ldd::gradient_map(GrayImage(px)), 0.1);
  ASSERT_GE(contours.size(), 2u);
  const Box left{0, 0, 25, 25}, right{25, 10, 60, 40};
  for (const auto& c : contours) EXPECT_TRUE(left.contains(c.bounds) != right.contains(c.bounds));
}

TEST(Contours, PartitionEdgePixels) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = ldd::gradient_map(random_edge_scene(rng, 48, 40));
    const auto contours = ldd::group_contours(g, 0.1);
    Raster<int> owner = Raster<int>::Zero(g.height(), g.width());
    for (const auto& c : contours) {
      double w = 0.0;
      int x1 = 1 << 30, y1 = 1 << 30, x2 = -1, y2 = -1;
      for (auto [x, y] : c.pixels) {
        ++owner(y, x);
        w += g.magnitude(y, x);
        x1 = std::min(x1, x), y1 = std::min(y1, y), x2 = std::max(x2, x + 1), y2 = std::max(y2, y + 1);
      }
      EXPECT_NEAR(c.weight, w, 1e-9 * std::max(1.0, w));
      EXPECT_EQ(c.bounds, (Box{x1, y1, x2, y2}));
    }
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) EXPECT_EQ(owner(y, x), g.magnitude(y, x) > 0.1f ? 1 : 0);
  }
}

TEST(ScoreBox, EmptyEnclosureScoresZero) {
  ldd::ContourSet contours(1);
  contours[0].pixels = {{10, 10}};
  contours[0].weight = 2.0;
  contours[0].bounds = {10, 10, 11, 11};
  EXPECT_EQ(ldd::score_box({0, 0, 5, 5}, contours, 1.5), 0.0);
  EXPECT_EQ(ldd::score_box({0, 0, 5, 5}, {}, 1.5), 0.0);
}

TEST(ScoreBox, SingleEnclosedContour) {
  ldd::ContourSet contours(1);
  contours[0].pixels = {{3, 4}, {4, 4}};
  contours[0].weight = 7.0;
  contours[0].bounds = {3, 4, 5, 5};
  EXPECT_DOUBLE_EQ(ldd::score_box({0, 0, 10, 6}, contours, 1.5), 7.0 / std::pow(32.0, 1.5));
  EXPECT_EQ(ldd::score_box({0, 0, 4, 6}, contours, 1.5), 0.0);
}

TEST(ScoreBox, GrowingAroundSameContoursDecreasesScore) {
  ldd::ContourSet contours(1);
  contours[0].pixels = {{20, 20}};
  contours[0].weight = 1.0;
  contours[0].bounds = {20, 20, 21, 21};
  double prev = ldd::score_box({19, 19, 22, 22}, contours, 1.5);
  for (int grow = 1; grow < 15; ++grow) {
    const double s = ldd::score_box({19 - grow, 19 - grow, 22 + grow, 22 + grow}, contours, 1.5);
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(ScoreBox, MatchesPixelOracle) {
  Rng rng(29);
  for (int map = 0; map < 10; ++map) {
    const auto contours = ldd::group_contours(ldd::gradient_map(random_edge_scene(rng, 64, 64)), 0.1);
    for (int k = 0; k < 100; ++k) {
      const Box b = ldd::testing::random_box(rng, 64, 64);
      ASSERT_EQ(ldd::score_box(b, contours, 1.5), ldd::testing::score_box_by_pixels(b, contours, 1.5));
    }
  }
}

TEST(ScoreBox, RejectsDegenerateBox) {
  EXPECT_THROW(ldd::score_box({5, 5, 5, 9}, {}, 1.5), ldd::InvalidArgument);
}

TEST(Proposals, ConstantImageGivesNone) {
  EXPECT_TRUE(ldd::generate_proposals(GrayImage(320, 240, 0.5f), {}).empty());
}

TEST(Proposals, TopBoxFindsSingleRectangle) {
  const ldd::testing::RectSpec r{210, 150, 310, 250};
  const GrayImage img = ldd::testing::rectangle_image(640, 480, r, 0.9f, 0.1f);
  const auto props = ldd::generate_proposals(img, {});
  ASSERT_FALSE(props.empty());
  EXPECT_GE(ldd::intersection_over_union(props.front().box, {r.x1, r.y1, r.x2, r.y2}), 0.5);
}

TEST(Proposals, DeterministicRankedAndSuppressed) {
  const auto pair = ldd::testing::make_view_pair(42);
  const ldd::ProposalConfig config;
  const auto a = ldd::generate_proposals(pair.reference, config);
  const auto b = ldd::generate_proposals(pair.reference, config);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_LE(a.size(), config.max_candidates);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].box, b[i].box);
    EXPECT_EQ(a[i].score, b[i].score);
    EXPECT_GT(a[i].score, 0.0);
    if (i > 0) EXPECT_FALSE(ldd::ranks_before(a[i], a[i - 1]));
  }
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      ASSERT_LE(ldd::intersection_over_union(a[i].box, a[j].box), config.nms_iou);
}

TEST(Proposals, ScoresAgreeWithScoreBox) {
  const auto pair = ldd::testing::make_view_pair(7);
  const ldd::ProposalConfig config;
  const auto contours =
      ldd::group_contours(ldd::gradient_map(pair.test), config.edge_threshold, config.max_orientation_change);
  const auto props = ldd::generate_proposals(pair.test, config);
  for (std::size_t i = 0; i < props.size(); i += 7) {
    const double expect = ldd::score_box(props[i].box, contours, config.kappa);
    EXPECT_NEAR(props[i].score, expect, 1e-9 * expect);
  }
}

TEST(Proposals, WindowGeometry) {
  const auto pair = ldd::testing::make_view_pair(3);
  const auto props = ldd::generate_proposals(pair.reference, {});
  for (const auto& p : props) {
    const bool known = (p.box.width() == p.box.height() &&
                        (p.box.width() == 32 || p.box.width() == 64 || p.box.width() == 128 ||
                         p.box.width() == 256)) ||
                       std::abs(p.box.width() * 2 - p.box.height()) <= 1 ||
                       std::abs(p.box.height() * 2 - p.box.width()) <= 1;
    ASSERT_TRUE(known) << p.box.width() << "x" << p.box.height();
    ASSERT_GE(p.box.x1, 0);
    ASSERT_LE(p.box.x2, 640);
    ASSERT_LE(p.box.y2, 480);
  }
}

TEST(Nms, NoSurvivingPairAboveThreshold) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LandmarkProposal> ranked;
    for (int k = 0; k < 80; ++k)
      ranked.push_back({ldd::testing::random_box(rng, 100, 100, 5), ldd::testing::uniform_real(rng, 0, 1), 0});
    std::sort(ranked.begin(), ranked.end(), ldd::ranks_before);
    const double t = ldd::testing::uniform_real(rng, 0.1, 0.9);
    const auto kept = ldd::non_maximum_suppression(ranked, t, 30);
    ASSERT_LE(kept.size(), 30u);
    ASSERT_FALSE(kept.empty());
    EXPECT_EQ(kept.front().box, ranked.front().box);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j)
        ASSERT_LE(ldd::intersection_over_union(kept[i].box, kept[j].box), t);
  }
}

TEST(Ranking, TieBreakOrder) {
  const LandmarkProposal a{{0, 5, 10, 10}, 1.0, 0}, b{{1, 0, 10, 10}, 1.0, 0}, c{{0, 6, 10, 10}, 1.0, 0},
      d{{0, 5, 5, 10}, 1.0, 0}, e{{9, 9, 10, 10}, 2.0, 0};
  EXPECT_TRUE(ldd::ranks_before(e, a));
  EXPECT_TRUE(ldd::ranks_before(a, b));
  EXPECT_TRUE(ldd::ranks_before(a, c));
  EXPECT_TRUE(ldd::ranks_before(d, a));
}

TEST(Iou, Basics) {
  EXPECT_DOUBLE_EQ(ldd::intersection_over_union({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(ldd::intersection_over_union({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
  EXPECT_DOUBLE_EQ(ldd::intersection_over_union({0, 0, 10, 10}, {5, 0, 15, 10}), 50.0 / 150.0);
}

TEST(ProposalFile, LoadsAndRanks) {
  ldd::testing::TempDir dir;
  std::ofstream(dir / "p.json") << R"([{"x1":0,"y1":0,"x2":10,"y2":10,"score":0.5},
                                       {"x1":5,"y1":5,"x2":20,"y2":30,"score":0.9}])";
  const auto props = ldd::load_proposals_json(dir / "p.json");
  ASSERT_EQ(props.size(), 2u);
  EXPECT_EQ(props[0].box, (Box{5, 5, 20, 30}));
  EXPECT_EQ(props[1].score, 0.5);
}

TEST(ProposalFile, Errors) {
  ldd::testing::TempDir dir;
  EXPECT_THROW(ldd::load_proposals_json(dir / "missing.json"), ldd::IoError);
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_THROW(ldd::load_proposals_json(dir / "bad.json"), ldd::FormatError);
  std::ofstream(dir / "obj.json") << R"({"x1":0})";
  EXPECT_THROW(ldd::load_proposals_json(dir / "obj.json"), ldd::FormatError);
  std::ofstream(dir / "degenerate.json") << R"([{"x1":4,"y1":0,"x2":4,"y2":10,"score":1}])";
  EXPECT_THROW(ldd::load_proposals_json(dir / "degenerate.json"), ldd::FormatError);
}

}  // namespace
