#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "synaptik/parallel.hpp"
#include "synaptik/pruning.hpp"
#include "synaptik/splitmix64.hpp"
#include "synaptik/target.hpp"

using namespace synaptik;
using fixture::kEm;

namespace {

// 8^3 scene: cells split at x = 4, a 4-voxel pre component in cell 1 and a
// 5-voxel post component with one voxel straying into cell 1.
struct HandScene {
  ImageVolume image;
  ProximityVolume prox;
  SegmentationVolume seg;
  Candidate cand;
};

HandScene hand_scene() {
  const Shape s{8, 8, 8};
  HandScene h{ImageVolume(s, kEm, 0), ProximityVolume(s, kEm, 0.0f), SegmentationVolume(s, kEm, 0u),
              {}};
  for (std::size_t z = 0; z < 8; ++z)
    for (std::size_t y = 0; y < 8; ++y)
      for (std::size_t x = 0; x < 8; ++x) {
        h.seg.at(z, y, x) = x < 4 ? 1 : 2;
        h.image.at(z, y, x) = static_cast<std::uint8_t>(10 * x + z);
      }
  auto pre = fixture::component(
      {s.index(3, 3, 2), s.index(3, 3, 3), s.index(3, 4, 2), s.index(3, 4, 3)}, Polarity::pre);
  auto post = fixture::component({s.index(3, 3, 4), s.index(3, 3, 5), s.index(3, 4, 4),
                                  s.index(3, 4, 5), s.index(3, 5, 3)},
                                 Polarity::post);
  h.prox.at(3, 3, 2) = 0.5f;
  h.prox.at(3, 3, 3) = 0.5f;
  h.prox.at(3, 4, 2) = 0.75f;
  h.prox.at(3, 4, 3) = 0.75f;
  for (auto v : post->voxels) h.prox[v] = -0.25f;
  h.prox.at(3, 5, 3) = -0.5f;
  h.cand.pre_site = {pre, 1, 4};
  h.cand.post_site = {post, 2, 4};
  h.cand.anchor_zyx = {3, 3, 3};
  h.cand.anchor_dist_nm = 4.0;
  return h;
}

std::vector<Candidate> scored(const std::vector<double>& scores) {
  std::vector<Candidate> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i].id = i;
    out[i].score = scores[i];
  }
  return out;
}

}  // namespace

TEST_CASE("window: default extent inside the volume, clipping at borders") {
  const Shape s{32, 192, 192};
  const WindowSpec spec;
  CHECK(window_around({16, 96, 96}, spec, s).voxels() == 16u * 160u * 160u);

  const Window corner = window_around({0, 0, 0}, spec, s);
  CHECK(corner.lo.z == 0);
  CHECK(corner.hi.z == 8);
  CHECK(corner.hi.y == 80);
  CHECK(corner.voxels() == 8u * 80u * 80u);

  CHECK_THROWS_AS(WindowSpec({0, 4, 4}).validate(s), ParameterError);
  CHECK_THROWS_AS(WindowSpec({33, 4, 4}).validate(s), ParameterError);
  CHECK_THROWS_AS(window_around({32, 0, 0}, spec, s), ParameterError);
}

TEST_CASE("features of the hand-built scene") {
  const auto h = hand_scene();
  const FeatureVector f = extract_features(h.cand, h.image, h.prox, h.seg, WindowSpec{2, 4, 4});
  // Window: z [2,4), y [1,5), x [1,5).
  CHECK(f[0] == 4);
  CHECK(f[1] == 5);
  CHECK(f[2] == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(f[3] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f[4] == 4);
  CHECK(f[5] == 4);
  CHECK(f[6] == 4.0);
  CHECK(f[7] == 8);  // x=3|4 faces for z in {2,3}, y in 1..4
  CHECK(f[8] == 1.0);
  CHECK(f[9] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(f[10] == doctest::Approx(27.5).epsilon(1e-12));  // mean of 10x + z
  CHECK(f[11] == 1.0);
  CHECK(std::string(kFeatureNames.back()) == "bias");

  const SegmentationVolume bad(Shape{8, 8, 7}, kEm, 0u);
  CHECK_THROWS_AS(extract_features(h.cand, h.image, h.prox, bad, WindowSpec{2, 4, 4}), ShapeError);
}

TEST_CASE("features from an exact target keep mean |proximity| at or above tau") {
  const auto t = fixture::three_cells();
  const auto prox = make_target(t.ann, TargetParams{});
  CandidateParams params;
  params.omega = 1;
  const auto cs = generate_candidates(prox, t.seg, params);
  REQUIRE(cs.candidates.size() == 2);
  const ImageVolume image(t.seg.shape(), kEm, 100);
  const WindowSpec w{4, 8, 8};
  for (const auto& f : extract_all_features(cs.candidates, image, prox, t.seg, w)) {
    CHECK(f[2] >= 0.3);
    CHECK(f[3] >= 0.3);
  }
}

TEST_CASE("label_candidates: planted, flipped, relabeled") {
  const auto t = fixture::three_cells();
  const auto prox = make_target(t.ann, TargetParams{});
  CandidateParams params;
  params.omega = 1;
  const auto cs = generate_candidates(prox, t.seg, params);
  CHECK(label_candidates(cs.candidates, t.seg, t.seg, t.gt) == std::vector<int>{1, 1});

  auto flipped = t.gt;
  for (auto& g : flipped) std::swap(g.pre_cell, g.post_cell);
  CHECK(label_candidates(cs.candidates, t.seg, t.seg, flipped) == std::vector<int>{0, 0});

  // Permute S ids and G ids independently.
  const std::map<std::uint32_t, std::uint32_t> ps{{1, 30}, {2, 10}, {3, 20}};
  const std::map<std::uint32_t, std::uint32_t> pg{{1, 7}, {2, 5}, {3, 6}};
  auto s = t.seg, g = t.seg;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = ps.at(t.seg[i]);
    g[i] = pg.at(t.seg[i]);
  }
  auto gt = t.gt;
  for (auto& c : gt) {
    c.pre_cell = pg.at(c.pre_cell);
    c.post_cell = pg.at(c.post_cell);
  }
  const auto relabeled = generate_candidates(prox, s, params);
  CHECK(label_candidates(relabeled.candidates, s, g, gt) == std::vector<int>{1, 1});
}

TEST_CASE("train config validation and single-class rejection") {
  CHECK_THROWS_AS((TrainConfig{0.0}.validate()), ParameterError);
  CHECK_THROWS_AS((TrainConfig{0.1, 0}.validate()), ParameterError);
  CHECK_THROWS_AS((TrainConfig{0.1, 10, -1.0}.validate()), ParameterError);
  std::vector<FeatureVector> x(3, FeatureVector{});
  CHECK_THROWS_AS(train_scorer(x, {1, 1, 1}, TrainConfig{}), TrainingError);
  CHECK_THROWS_AS(train_scorer(x, {0, 0, 0}, TrainConfig{}), TrainingError);
  CHECK_THROWS_AS(train_scorer(x, {0, 1}, TrainConfig{}), TrainingError);
}

TEST_CASE("zero-weight scorer gives 0.5") {
  LogisticScorer s;
  FeatureVector f{};
  f.fill(3.0);
  CHECK(s.score(f) == 0.5);
}

TEST_CASE("separable toy set is fit perfectly") {
  std::vector<FeatureVector> x;
  std::vector<int> y;
  for (int i = -5; i <= 5; ++i) {
    if (i == 0) continue;
    FeatureVector f{};
    f[0] = i;
    f[6] = 100.0 - 3.0 * i;
    f[kFeatureCount - 1] = 1.0;
    x.push_back(f);
    y.push_back(i > 0 ? 1 : 0);
  }
  const auto r = train_scorer(x, y, TrainConfig{0.1, 500}, "toy");
  CHECK(r.scorer.trained_on == "toy");
  for (std::size_t i = 0; i < x.size(); ++i) CHECK((r.scorer.score(x[i]) >= 0.5) == (y[i] == 1));
  // Constant columns standardize with unit std.
  CHECK(r.scorer.stds[3] == 1.0);
}

TEST_CASE("two-point problem: loss never increases") {
  FeatureVector a{}, b{};
  a[0] = 1.0;
  b[0] = 2.0;
  a[11] = b[11] = 1.0;
  const auto r = train_scorer({a, b}, {0, 1}, TrainConfig{0.1, 300, 0.0});
  REQUIRE(r.loss_history.size() == 301);
  CHECK(r.loss_history.front() == doctest::Approx(std::log(2.0)));
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) {
    CHECK(r.loss_history[i] <= r.loss_history[i - 1]);
  }
}

TEST_CASE("logistic gradient matches central finite differences") {
  SplitMix64 rng(99);
  std::vector<FeatureVector> x(40);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j + 1 < kFeatureCount; ++j) x[i][j] = rng.normal();
    x[i][kFeatureCount - 1] = 1.0;
    y[i] = rng.uniform() < 0.4 ? 1 : 0;
  }
  const double h = 1e-5, l2 = 1e-2;
  for (int trial = 0; trial < 20; ++trial) {
    FeatureVector w;
    for (auto& v : w) v = rng.normal();
    const FeatureVector g = logistic_gradient(w, x, y, l2);
    double diff = 0, norm = 0;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      FeatureVector up = w, down = w;
      up[j] += h;
      down[j] -= h;
      const double fd = (logistic_loss(up, x, y, l2) - logistic_loss(down, x, y, l2)) / (2 * h);
      diff += (fd - g[j]) * (fd - g[j]);
      norm += g[j] * g[j];
    }
    CHECK(std::sqrt(diff / norm) < 1e-5);
  }
}

TEST_CASE("scoring is thread-count independent") {
  std::vector<Candidate> cands(50);
  std::vector<FeatureVector> feats(50);
  SplitMix64 rng(5);
  for (std::size_t i = 0; i < 50; ++i) {
    cands[i].id = i;
    for (auto& v : feats[i]) v = rng.normal();
  }
  LogisticScorer s;
  for (auto& w : s.weights) w = rng.normal();
  auto a = cands, b = cands;
  set_thread_count(1);
  score_candidates(a, feats, s);
  set_thread_count(4);
  score_candidates(b, feats, s);
  set_thread_count(0);
  for (std::size_t i = 0; i < 50; ++i) {
    REQUIRE(a[i].score);
    CHECK(*a[i].score == *b[i].score);
    CHECK(*a[i].score >= 0.0);
    CHECK(*a[i].score <= 1.0);
  }
}

TEST_CASE("external scores: exact values, missing, out of range, unknown") {
  auto cands = scored({0, 0, 0});
  for (auto& c : cands) c.score.reset();
  apply_external_scores(cands, {{0, 1.0}, {1, 1.0}, {2, 1.0}});
  for (const auto& c : cands) CHECK(*c.score == 1.0);

  auto missing = scored({0, 0});
  try {
    apply_external_scores(missing, {{0, 0.5}});
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("candidate 1") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_external_scores(missing, {{0, 0.5}, {1, 1.5}}), IngestionError);
  CHECK_THROWS_AS(apply_external_scores(missing, {{0, 0.5}, {1, 0.5}, {7, 0.5}}), IngestionError);
}

TEST_CASE("prune: theta bounds, nesting, unscored") {
  const auto c = scored({0.1, 0.9, 0.5, 0.3, 0.7});
  CHECK(prune(c, 0.0).size() == 5);
  CHECK(prune(c, 0.9).size() == 1);
  CHECK(prune(c, std::nextafter(0.9, 1.0)).empty());
  CHECK_THROWS_AS(prune(c, 1.5), ParameterError);

  std::vector<std::uint64_t> previous;
  for (double theta = 0.0; theta <= 1.0; theta += 0.05) {
    std::vector<std::uint64_t> ids;
    for (const auto& k : prune(c, theta)) ids.push_back(k.id);
    if (theta > 0) CHECK(std::includes(previous.begin(), previous.end(), ids.begin(), ids.end()));
    previous = ids;
  }

  auto partial = c;
  partial[2].score.reset();
  CHECK_THROWS_AS(prune(partial, 0.5), ParameterError);
}
