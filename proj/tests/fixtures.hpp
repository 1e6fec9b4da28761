#pragma once

// Small hand-built scenes shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <memory>
#include <vector>

#include "synaptik/candidates.hpp"
#include "synaptik/evaluation.hpp"
#include "synaptik/groundtruth.hpp"
#include "synaptik/volume.hpp"

namespace fixture {

using namespace synaptik;

inline const Spacing kEm{4.0, 4.0, 30.0};

inline ComponentPtr component(std::vector<std::uint64_t> voxels, Polarity pol) {
  std::sort(voxels.begin(), voxels.end());
  auto c = std::make_shared<Component>();
  c->id = voxels.front();
  c->polarity = pol;
  c->voxels = std::move(voxels);
  return c;
}

inline Candidate prediction(std::uint64_t id, double score, ComponentPtr pre, std::uint32_t pre_seg,
                            ComponentPtr post, std::uint32_t post_seg) {
  Candidate c;
  c.id = id;
  c.pre_site = {std::move(pre), pre_seg, 1};
  c.post_site = {std::move(post), post_seg, 1};
  c.score = score;
  return c;
}

inline GroundTruthConnection connection(std::uint32_t k, std::uint32_t pre, std::uint32_t post,
                                        std::vector<std::uint64_t> span) {
  std::sort(span.begin(), span.end());
  return {k, pre, post, std::move(span)};
}

inline SegmentMap identity_map(std::uint32_t n) {
  SegmentMap m;
  for (std::uint32_t i = 1; i <= n; ++i) m[i] = i;
  return m;
}

// Matching scenes. Voxel indices are abstract; only set overlaps matter.
struct MatchScene {
  std::vector<Candidate> predictions;
  std::vector<GroundTruthConnection> gt;
  SegmentMap seg_map;
};

// One synapse 1 -> 2; the only prediction links 2 -> 1 over the same span.
inline MatchScene orientation_flip() {
  MatchScene s;
  s.gt = {connection(1, 1, 2, {10, 11, 20, 21})};
  s.predictions = {prediction(0, 0.9, component({20, 21}, Polarity::pre), 2,
                              component({10, 11}, Polarity::post), 1)};
  s.seg_map = identity_map(2);
  return s;
}

// Two correct predictions on the same synapse.
inline MatchScene duplicate() {
  MatchScene s;
  s.gt = {connection(1, 1, 2, {10, 11, 20, 21})};
  s.predictions = {
      prediction(0, 0.8, component({10}, Polarity::pre), 1, component({20}, Polarity::post), 2),
      prediction(1, 0.9, component({11}, Polarity::pre), 1, component({21}, Polarity::post), 2)};
  s.seg_map = identity_map(2);
  return s;
}

// g1 = 1 -> 2 and g2 = 3 -> 4. The prediction's pre component touches g1's
// span, its post component touches g2's, and it links 3 -> 4.
inline MatchScene two_spans() {
  MatchScene s;
  s.gt = {connection(1, 1, 2, {10, 11, 20, 21}), connection(2, 3, 4, {30, 31, 40, 41})};
  s.predictions = {prediction(0, 0.7, component({11, 50}, Polarity::pre), 3,
                              component({40, 60}, Polarity::post), 4)};
  s.seg_map = identity_map(4);
  return s;
}

// Three cells side by side along x (1 | 2 | 3) with two synapses on the
// interfaces: 1 -> 2 and 2 -> 3.
struct ThreeCells {
  SegmentationVolume seg;
  AnnotationVolume ann;
  std::vector<GroundTruthConnection> gt;
};

inline ThreeCells three_cells() {
  const Shape s{4, 16, 18};
  ThreeCells t{SegmentationVolume(s, kEm, 0u), AnnotationVolume(s, kEm, 0u), {}};
  for (std::size_t z = 0; z < s.z; ++z)
    for (std::size_t y = 0; y < s.y; ++y)
      for (std::size_t x = 0; x < s.x; ++x) {
        t.seg.at(z, y, x) = x < 6 ? 1 : x < 12 ? 2 : 3;
        const bool rows = z >= 1 && z < 3 && y >= 3 && y < 13;
        if (rows && x >= 4 && x < 8) t.ann.at(z, y, x) = x < 6 ? 1 : 2;
        if (rows && x >= 10 && x < 14) t.ann.at(z, y, x) = x < 12 ? 3 : 4;
      }
  t.gt = {{1, 1, 2, {}}, {2, 2, 3, {}}};
  attach_spans(t.gt, t.ann);
  return t;
}

}  // namespace fixture
