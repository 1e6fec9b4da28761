#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "synaptik/candidates.hpp"
#include "synaptik/target.hpp"

using namespace synaptik;

namespace {

const Spacing kEm{4.0, 4.0, 30.0};

Component make_component(std::vector<std::uint64_t> voxels, Polarity pol = Polarity::pre) {
  std::sort(voxels.begin(), voxels.end());
  Component c;
  c.id = voxels.front();
  c.polarity = pol;
  c.voxels = std::move(voxels);
  return c;
}

ComponentSet single_component_set(const Shape& s, const Component& c) {
  ComponentSet set{c.polarity, LabelVolume(s, kEm, 0u), {std::make_shared<const Component>(c)}};
  for (auto v : c.voxels) set.labels[v] = std::uint32_t(c.id + 1);
  return set;
}

// Two cells split at x = 8; pre band on the left, post band on the right.
struct SlabPhantom {
  AnnotationVolume ann;
  SegmentationVolume seg;
};

SlabPhantom slab_phantom(const Shape& s) {
  SlabPhantom p{AnnotationVolume(s, kEm, 0u), SegmentationVolume(s, kEm, 0u)};
  for (std::size_t z = 0; z < s.z; ++z)
    for (std::size_t y = 0; y < s.y; ++y)
      for (std::size_t x = 0; x < s.x; ++x) {
        p.seg.at(z, y, x) = x < 8 ? 1 : 2;
        if (z >= 1 && z + 1 < s.z && y >= 3 && y < 13 && x >= 6 && x < 10) {
          p.ann.at(z, y, x) = x < 8 ? 1 : 2;
        }
      }
  return p;
}

}  // namespace

TEST_CASE("candidate params validation") {
  CHECK_THROWS_AS((CandidateParams{0.0}.validate()), ParameterError);
  CHECK_THROWS_AS((CandidateParams{1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((CandidateParams{0.3, 0}.validate()), ParameterError);
  CHECK_NOTHROW(CandidateParams{}.validate());
}

TEST_CASE("polar components: empty, exact target, negation") {
  const Shape s{5, 16, 16};
  const auto none = polar_components(ProximityVolume(s, kEm, 0.0f), 0.3);
  CHECK(none.pre.components.empty());
  CHECK(none.post.components.empty());

  const auto ph = slab_phantom(s);
  const auto target = make_target(ph.ann, TargetParams{});
  const auto pc = polar_components(target, 0.3);
  REQUIRE(pc.pre.components.size() == 1);
  REQUIRE(pc.post.components.size() == 1);
  for (auto v : pc.pre.components[0]->voxels) CHECK(coord_of(s, v).x < 8);
  for (auto v : pc.post.components[0]->voxels) CHECK(coord_of(s, v).x >= 8);

  ProximityVolume neg = target;
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
  const auto swapped = polar_components(neg, 0.3);
  CHECK(swapped.pre.components[0]->voxels == pc.post.components[0]->voxels);
  CHECK(swapped.post.components[0]->voxels == pc.pre.components[0]->voxels);

  // Inclusive thresholds.
  ProximityVolume edge(Shape{1, 1, 3}, kEm, 0.0f);
  edge[0] = 0.3f;
  edge[2] = -0.3f;
  const auto e = polar_components(edge, 0.3);
  CHECK(e.pre.components.size() == 1);
  CHECK(e.post.components.size() == 1);
}

TEST_CASE("site candidates: overlap threshold semantics") {
  const Shape s{1, 10, 20};
  SegmentationVolume seg(s, kEm, 1u);
  std::vector<std::uint64_t> vox;
  for (std::uint64_t i = 0; i < 150; ++i) vox.push_back(i);
  const auto set = single_component_set(s, make_component(vox));
  auto sites = site_candidates(set, seg, 100);
  REQUIRE(sites.size() == 1);
  CHECK(sites[0].segment_id == 1);
  CHECK(sites[0].overlap_voxels == 150);

  for (std::uint64_t i = 90; i < 150; ++i) seg[i] = 2;
  CHECK(site_candidates(set, seg, 100).empty());
  CHECK(site_candidates(set, seg, 60).size() == 2);

  for (std::uint64_t i = 0; i < 150; ++i) seg[i] = 0;
  CHECK(site_candidates(set, seg, 1).empty());

  CHECK_THROWS_AS(site_candidates(set, SegmentationVolume(Shape{1, 10, 21}, kEm, 1u), 1),
                  ShapeError);
}

TEST_CASE("site candidates match brute-force overlap counting") {
  SplitMix64 rng(21);
  for (int t = 0; t < 5; ++t) {
    const Shape s{16, 16, 16};
    ProximityVolume prox(s, kEm, 0.0f);
    SegmentationVolume seg(s, kEm, 0u);
    for (std::size_t i = 0; i < prox.size(); ++i) {
      prox[i] = float(rng.uniform() * 2 - 1);
      seg[i] = std::uint32_t(rng.below(4));
    }
    const auto pc = polar_components(prox, 0.3);
    const auto sites = site_candidates(pc.pre, seg, 5);
    std::vector<std::tuple<std::uint64_t, std::uint32_t, std::uint64_t>> ref;
    for (const auto& c : pc.pre.components) {
      for (std::uint32_t sid = 1; sid < 4; ++sid) {
        std::uint64_t n = 0;
        for (std::size_t i = 0; i < seg.size(); ++i) {
          if (pc.pre.labels[i] == c->id + 1 && seg[i] == sid) ++n;
        }
        if (n >= 5) ref.emplace_back(c->id, sid, n);
      }
    }
    REQUIRE(sites.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(sites[i].component->id == std::get<0>(ref[i]));
      CHECK(sites[i].segment_id == std::get<1>(ref[i]));
      CHECK(sites[i].overlap_voxels == std::get<2>(ref[i]));
    }
  }
}

TEST_CASE("anchor point: shared face, tie rule, brute force") {
  const Shape s{4, 6, 8};
  const auto e = make_component({s.index(1, 2, 3)});
  const auto o = make_component({s.index(1, 2, 4)}, Polarity::post);
  auto a = anchor_point(e, o, s, kEm);
  CHECK(a.voxel == Coord{1, 2, 3});
  CHECK(a.distance_nm == doctest::Approx(4.0));

  const auto oz = make_component({s.index(2, 2, 3)}, Polarity::post);
  a = anchor_point(e, oz, s, kEm);
  CHECK(a.voxel == Coord{1, 2, 3});
  CHECK(a.distance_nm == doctest::Approx(30.0));

  // Two equally close pairs: the smallest (pre, post) index pair wins and
  // the midpoint rounds toward the pre voxel.
  const auto e2 = make_component({s.index(0, 0, 0), s.index(0, 0, 6)});
  const auto o2 = make_component({s.index(0, 0, 3)}, Polarity::post);
  a = anchor_point(e2, o2, s, kEm);
  CHECK(a.pre_voxel == s.index(0, 0, 0));
  CHECK(a.post_voxel == s.index(0, 0, 3));
  CHECK(a.voxel == Coord{0, 0, 1});
  CHECK(a.distance_nm == doctest::Approx(12.0));

  SplitMix64 rng(8);
  for (int t = 0; t < 30; ++t) {
    std::set<std::uint64_t> pv, qv;
    const auto np = 1 + rng.below(6), nq = 1 + rng.below(6);
    while (pv.size() < np) pv.insert(rng.below(s.voxels()));
    while (qv.size() < nq) {
      const auto v = rng.below(s.voxels());
      if (!pv.count(v)) qv.insert(v);
    }
    const auto ce = make_component({pv.begin(), pv.end()});
    const auto co = make_component({qv.begin(), qv.end()}, Polarity::post);
    double best = 1e300;
    std::uint64_t bp = 0, bq = 0;
    for (auto p : pv)
      for (auto q : qv) {
        const double d = distance_sq_nm(coord_of(s, p), coord_of(s, q), kEm);
        if (d < best) {
          best = d;
          bp = p;
          bq = q;
        }
      }
    a = anchor_point(ce, co, s, kEm);
    CHECK(a.pre_voxel == bp);
    CHECK(a.post_voxel == bq);
    CHECK(a.distance_nm == doctest::Approx(std::sqrt(best)));
  }
}

TEST_CASE("pair candidates: adjacency requirement and literal enumeration") {
  const Shape s{3, 8, 8};
  auto site = [&](std::uint64_t voxel, std::uint32_t seg, Polarity pol) {
    return SiteCandidate{std::make_shared<const Component>(make_component({voxel}, pol)), seg, 1};
  };
  const auto e = site(s.index(1, 1, 1), 1, Polarity::pre);
  const auto o = site(s.index(1, 1, 2), 2, Polarity::post);
  CandidateParams p;
  AdjacencyMap adj{{{1, 2}, 10}};
  CHECK(pair_candidates({e}, {o}, adj, s, kEm, p).size() == 1);
  CHECK(pair_candidates({e}, {o}, AdjacencyMap{{{1, 3}, 10}}, s, kEm, p).empty());
  p.min_contact_area = 11;
  CHECK(pair_candidates({e}, {o}, adj, s, kEm, p).empty());
  p = CandidateParams{};
  CHECK(pair_candidates({e}, {site(s.index(2, 2, 2), 1, Polarity::post)}, adj, s, kEm, p).empty());

  // 2 pre sites x 3 post sites over a fully connected segment graph.
  const std::vector<SiteCandidate> pres{site(s.index(0, 0, 0), 1, Polarity::pre),
                                        site(s.index(2, 7, 7), 2, Polarity::pre)};
  const std::vector<SiteCandidate> posts{site(s.index(0, 3, 3), 3, Polarity::post),
                                         site(s.index(1, 4, 4), 4, Polarity::post),
                                         site(s.index(2, 5, 0), 5, Polarity::post)};
  AdjacencyMap full;
  for (std::uint32_t a = 1; a <= 5; ++a)
    for (std::uint32_t b = a + 1; b <= 5; ++b) full[{a, b}] = 1;
  const auto cands = pair_candidates(pres, posts, full, s, kEm, p);
  std::size_t literal = 0;
  for (const auto& pe : pres)
    for (const auto& po : posts)
      if (pe.segment_id != po.segment_id && full.count(make_segment_pair(pe.segment_id, po.segment_id)))
        ++literal;
  CHECK(literal == 6);
  REQUIRE(cands.size() == literal);
  for (std::size_t i = 0; i < cands.size(); ++i) CHECK(cands[i].id == i);
  CHECK(std::is_sorted(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.pre_site.component->id, a.post_site.component->id) <
           std::tie(b.pre_site.component->id, b.post_site.component->id);
  }));

  p.max_anchor_nm = 60.0;
  const auto near = pair_candidates(pres, posts, full, s, kEm, p);
  CHECK(near.size() < cands.size());
  for (const auto& c : near) CHECK(c.anchor_dist_nm <= 60.0);
}

TEST_CASE("candidate generation on a slab phantom and monotonicity in tau") {
  const Shape s{5, 16, 16};
  const auto ph = slab_phantom(s);
  const auto target = make_target(ph.ann, TargetParams{});
  CandidateParams p;
  p.omega = 20;
  const auto set = generate_candidates(target, ph.seg, p);
  REQUIRE(set.candidates.size() == 1);
  CHECK(set.candidates[0].pre_site.segment_id == 1);
  CHECK(set.candidates[0].post_site.segment_id == 2);
  CHECK(set.candidates[0].anchor_dist_nm == doctest::Approx(4.0));

  SplitMix64 rng(3);
  ProximityVolume noisy = target;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    noisy[i] = std::clamp(noisy[i] + float(0.4 * (rng.uniform() - 0.5)), -1.0f, 1.0f);
  }
  p.omega = 5;
  std::size_t prev = SIZE_MAX;
  for (double tau : {0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
    p.tau = tau;
    const auto n = generate_candidates(noisy, ph.seg, p).candidates.size();
    CHECK(n <= prev);
    prev = n;
  }
}
