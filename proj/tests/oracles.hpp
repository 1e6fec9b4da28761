#pragma once

// Brute-force reference implementations used only by tests. Each one takes
// the most literal route to the answer so it shares no code path with the
// library function it checks.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <vector>

#include "synaptik/adjacency.hpp"
#include "synaptik/distance_transform.hpp"
#include "synaptik/splitmix64.hpp"
#include "synaptik/volume.hpp"

namespace oracle {

using namespace synaptik;

inline MaskVolume random_mask(const Shape& s, double density, std::uint64_t seed) {
  SplitMix64 rng(seed);
  MaskVolume m(s, Spacing{}, 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform() < density ? 1 : 0;
  return m;
}

// Breadth-first flood fill. Returns, per voxel, the smallest linear index of
// its component (or -1 for background).
inline std::vector<std::int64_t> flood_fill(const MaskVolume& m, int connectivity) {
  const Shape s = m.shape();
  std::vector<std::int64_t> comp(m.size(), -1);
  for (std::size_t seed = 0; seed < m.size(); ++seed) {
    if (!m[seed] || comp[seed] != -1) continue;
    std::deque<std::size_t> queue{seed};
    comp[seed] = static_cast<std::int64_t>(seed);
    while (!queue.empty()) {
      const Coord c = coord_of(s, queue.front());
      queue.pop_front();
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nz = (dz != 0) + (dy != 0) + (dx != 0);
            if (nz == 0 || nz > (connectivity == 6 ? 1 : connectivity == 18 ? 2 : 3)) continue;
            const Coord n{c.z + dz, c.y + dy, c.x + dx};
            if (!contains(s, n)) continue;
            const std::size_t j = s.index(n.z, n.y, n.x);
            if (m[j] && comp[j] == -1) {
              comp[j] = static_cast<std::int64_t>(seed);
              queue.push_back(j);
            }
          }
    }
  }
  return comp;
}

struct BruteDistance {
  std::vector<double> dist_nm;
  std::vector<std::uint32_t> id;
};

// O(N*M) nearest site with (distance, id) lexicographic tie-breaking.
inline BruteDistance brute_feature_transform(const Shape& s, const std::vector<Site>& sites,
                                             const Spacing& sp) {
  BruteDistance out{std::vector<double>(s.voxels()), std::vector<std::uint32_t>(s.voxels())};
  for (std::size_t i = 0; i < s.voxels(); ++i) {
    const Coord c = coord_of(s, i);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_id = 0;
    for (const Site& site : sites) {
      const double dz = double(c.z - site.coord.z) * sp.z;
      const double dy = double(c.y - site.coord.y) * sp.y;
      const double dx = double(c.x - site.coord.x) * sp.x;
      const double d = dz * dz + dy * dy + dx * dx;
      if (d < best || (d == best && site.id < best_id)) {
        best = d;
        best_id = site.id;
      }
    }
    out.dist_nm[i] = std::sqrt(best);
    out.id[i] = best_id;
  }
  return out;
}

// Triple loop over every voxel and each of its six neighbors, halved.
inline std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> naive_adjacency(
    const SegmentationVolume& seg) {
  const Shape s = seg.shape();
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> twice;
  const int d6[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (std::size_t z = 0; z < s.z; ++z)
    for (std::size_t y = 0; y < s.y; ++y)
      for (std::size_t x = 0; x < s.x; ++x)
        for (const auto& d : d6) {
          const Coord n{std::int64_t(z) + d[0], std::int64_t(y) + d[1], std::int64_t(x) + d[2]};
          if (!contains(s, n)) continue;
          const auto a = seg.at(z, y, x);
          const auto b = seg.at(n);
          if (a == 0 || b == 0 || a == b) continue;
          ++twice[{std::min(a, b), std::max(a, b)}];
        }
  for (auto& [k, v] : twice) v /= 2;
  return twice;
}

}  // namespace oracle
