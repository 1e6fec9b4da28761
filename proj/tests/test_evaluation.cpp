#include <algorithm>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "synaptik/evaluation.hpp"
#include "synaptik/groundtruth.hpp"
#include "synaptik/splitmix64.hpp"

using namespace synaptik;
using fixture::kEm;

namespace {

// n predictions on a fixed scene, each either correct for some synapse,
// flipped, or off-span. Scores are drawn from a small grid so ties occur.
fixture::MatchScene random_scene(std::uint64_t seed, std::size_t n) {
  SplitMix64 rng(seed);
  fixture::MatchScene s;
  s.gt = {fixture::connection(1, 1, 2, {10, 11, 20, 21}),
          fixture::connection(2, 3, 4, {30, 31, 40, 41}),
          fixture::connection(3, 5, 6, {50, 51, 60, 61})};
  s.seg_map = fixture::identity_map(6);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = s.gt[rng.below(s.gt.size())];
    const double score = double(rng.below(5)) / 4.0;
    const std::uint64_t kind = rng.below(3);
    if (kind == 0) {
      s.predictions.push_back(fixture::prediction(
          i, score, fixture::component({g.span[0]}, Polarity::pre), g.pre_cell,
          fixture::component({g.span[3]}, Polarity::post), g.post_cell));
    } else if (kind == 1) {
      s.predictions.push_back(fixture::prediction(
          i, score, fixture::component({g.span[3]}, Polarity::pre), g.post_cell,
          fixture::component({g.span[0]}, Polarity::post), g.pre_cell));
    } else {
      s.predictions.push_back(fixture::prediction(
          i, score, fixture::component({900 + i}, Polarity::pre), g.pre_cell,
          fixture::component({950 + i}, Polarity::post), g.post_cell));
    }
  }
  return s;
}

bool same_counts(const MatchReport& a, const MatchReport& b) {
  return a.tp == b.tp && a.fp == b.fp && a.fn == b.fn;
}

}  // namespace

TEST_CASE("map_segments: identity, doubled ids, brute force argmax") {
  const auto t = fixture::three_cells();
  const auto id = map_segments(t.seg, t.seg);
  CHECK(id == fixture::identity_map(3));

  auto doubled = t.seg;
  for (std::size_t i = 0; i < doubled.size(); ++i) doubled[i] *= 2;
  CHECK(map_segments(doubled, t.seg) == SegmentMap{{2, 1}, {4, 2}, {6, 3}});

  // Random S and G on a small grid compared with explicit counting.
  SplitMix64 rng(3);
  const Shape sh{3, 7, 9};
  SegmentationVolume s(sh, kEm, 0u), g(sh, kEm, 0u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::uint32_t(rng.below(5));
    g[i] = std::uint32_t(rng.below(4));
  }
  const auto m = map_segments(s, g);
  for (std::uint32_t seg = 1; seg < 5; ++seg) {
    std::map<std::uint32_t, std::size_t> counts;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == seg && g[i] != 0) ++counts[g[i]];
    }
    std::uint32_t best = 0;
    std::size_t best_n = 0;
    for (const auto& [cell, n] : counts) {
      if (n > best_n) best = cell, best_n = n;
    }
    CHECK(m.at(seg) == best);
  }
  CHECK(m.count(0) == 0);
}

TEST_CASE("map_segments: segment over background only maps to 0") {
  const Shape sh{1, 1, 4};
  SegmentationVolume s(sh, kEm, std::vector<std::uint32_t>{1, 1, 2, 2});
  SegmentationVolume g(sh, kEm, std::vector<std::uint32_t>{0, 0, 0, 5});
  CHECK(map_segments(s, g) == SegmentMap{{1, 0}, {2, 5}});
}

TEST_CASE("orientation flip is a wrong-pair false positive") {
  const auto s = fixture::orientation_flip();
  const auto r = match_predictions(s.predictions, s.gt, s.seg_map);
  CHECK(r.tp == 0);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.predictions[0].verdict == Verdict::fp_wrong_pair);
}

TEST_CASE("second hit on a matched synapse is a duplicate") {
  const auto s = fixture::duplicate();
  const auto r = match_predictions(s.predictions, s.gt, s.seg_map);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 0);
  REQUIRE(r.predictions.size() == 2);
  CHECK(r.predictions[0].candidate_id == 1);  // higher score first
  CHECK(r.predictions[0].verdict == Verdict::tp);
  CHECK(r.predictions[1].verdict == Verdict::fp_duplicate);
  CHECK(r.predictions[1].synapse_id == 1u);
  CHECK(r.ground_truth[0].candidate_id == 1u);
}

TEST_CASE("overlap with two spans matches the synapse whose cells agree") {
  const auto s = fixture::two_spans();
  const auto r = match_predictions(s.predictions, s.gt, s.seg_map);
  CHECK(r.tp == 1);
  CHECK(r.fn == 1);
  CHECK(r.predictions[0].synapse_id == 2u);
  CHECK_FALSE(r.ground_truth[0].matched);
  CHECK(r.ground_truth[1].matched);
}

TEST_CASE("prediction off every span is a no-overlap false positive") {
  auto s = fixture::duplicate();
  s.predictions = {fixture::prediction(4, 0.5, fixture::component({99}, Polarity::pre), 1,
                                       fixture::component({98}, Polarity::post), 2)};
  const auto r = match_predictions(s.predictions, s.gt, s.seg_map);
  CHECK(r.predictions[0].verdict == Verdict::fp_no_overlap);
  CHECK(to_string(Verdict::fp_no_overlap) == "FP-no-overlap");
}

TEST_CASE("unknown segment raises an evaluation error") {
  auto s = fixture::duplicate();
  s.seg_map.erase(2);
  CHECK_THROWS_AS(match_predictions(s.predictions, s.gt, s.seg_map), EvaluationError);
}

TEST_CASE("pr_point conventions") {
  MatchReport r;
  r.tp = 9;
  r.fp = 1;
  r.fn = 1;
  auto p = pr_point(r);
  CHECK(p.precision == doctest::Approx(0.9));
  CHECK(p.recall == doctest::Approx(0.9));
  CHECK(p.f_score == doctest::Approx(0.9));

  r = MatchReport{};
  r.fn = 4;
  p = pr_point(r);
  CHECK(p.precision == 1.0);
  CHECK(p.recall == 0.0);
  CHECK(p.f_score == 0.0);

  CHECK_THROWS_AS(pr_point(MatchReport{}), ParameterError);
}

TEST_CASE("pr_sweep: theta 0 uses every candidate; recall never rises with theta") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = random_scene(seed, 12);
    const std::vector<double> thetas{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto curve = pr_sweep(s.predictions, s.gt, s.seg_map, thetas);
    REQUIRE(curve.size() == thetas.size());
    const auto all = pr_point(match_predictions(s.predictions, s.gt, s.seg_map));
    CHECK(curve[0].precision == all.precision);
    CHECK(curve[0].recall == all.recall);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      CHECK(curve[i].theta == thetas[i]);
      CHECK(curve[i].recall <= curve[i - 1].recall);
    }
    const auto b = best_f(curve);
    for (const auto& p : curve) CHECK(p.f_score <= b.f_score);
  }
  const auto s = random_scene(1, 4);
  CHECK_THROWS_AS(pr_sweep(s.predictions, s.gt, s.seg_map, {0.5, 0.5}), ParameterError);
  CHECK_THROWS_AS(pr_sweep(s.predictions, s.gt, s.seg_map, {0.5, 0.2}), ParameterError);
}

TEST_CASE("matching ignores input order and consistent relabeling") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto s = random_scene(seed, 10);
    const auto base = match_predictions(s.predictions, s.gt, s.seg_map);

    auto shuffled = s.predictions;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto r1 = match_predictions(shuffled, s.gt, s.seg_map);
    CHECK(same_counts(base, r1));
    REQUIRE(r1.predictions.size() == base.predictions.size());
    for (std::size_t i = 0; i < base.predictions.size(); ++i) {
      CHECK(r1.predictions[i].candidate_id == base.predictions[i].candidate_id);
      CHECK(r1.predictions[i].verdict == base.predictions[i].verdict);
    }

    // Rename segments and cells with different bijections.
    auto renamed = s.predictions;
    for (auto& p : renamed) {
      p.pre_site.segment_id += 100;
      p.post_site.segment_id += 100;
    }
    SegmentMap m;
    for (const auto& [seg, cell] : s.seg_map) m[seg + 100] = 70 - cell;
    auto gt = s.gt;
    for (auto& g : gt) {
      g.pre_cell = 70 - g.pre_cell;
      g.post_cell = 70 - g.post_cell;
    }
    CHECK(same_counts(base, match_predictions(renamed, gt, m)));
  }
}

TEST_CASE("unscored predictions sort last in matching and are refused by the sweep") {
  auto s = fixture::duplicate();
  s.predictions[1].score.reset();
  const auto r = match_predictions(s.predictions, s.gt, s.seg_map);
  CHECK(r.predictions[0].candidate_id == 0);
  CHECK(r.predictions[1].verdict == Verdict::fp_duplicate);
  CHECK_THROWS_AS(pr_sweep(s.predictions, s.gt, s.seg_map, {0.0}), ParameterError);
}
