#include "synaptik/adjacency.hpp"

#include <vector>

#include "synaptik/parallel.hpp"

namespace synaptik {

AdjacencyMap segment_adjacency(const SegmentationVolume& seg) {
  const Shape s = seg.shape();
  std::vector<AdjacencyMap> partial(chunk_count(s.z));
  // Each chunk owns the +z/+y/+x faces of its own planes.
  parallel_chunks(s.z, [&](std::size_t c, std::size_t z0, std::size_t z1) {
    AdjacencyMap& local = partial[c];
    auto visit = [&](std::uint32_t a, std::uint32_t b) {
      if (a != 0 && b != 0 && a != b) ++local[make_segment_pair(a, b)];
    };
    for (std::size_t z = z0; z < z1; ++z) {
      for (std::size_t y = 0; y < s.y; ++y) {
        for (std::size_t x = 0; x < s.x; ++x) {
          const std::uint32_t v = seg.at(z, y, x);
          if (v == 0) continue;
          if (x + 1 < s.x) visit(v, seg.at(z, y, x + 1));
          if (y + 1 < s.y) visit(v, seg.at(z, y + 1, x));
          if (z + 1 < s.z) visit(v, seg.at(z + 1, y, x));
        }
      }
    }
  });
  AdjacencyMap out;
  for (const auto& local : partial) {
    for (const auto& [pair, area] : local) out[pair] += area;
  }
  return out;
}

std::uint64_t contact_area_in_box(const SegmentationVolume& seg, std::uint32_t a, std::uint32_t b,
                                  const Coord& lo, const Coord& hi) {
  if (a == b || a == 0 || b == 0) return 0;
  std::uint64_t area = 0;
  auto matches = [&](std::uint32_t u, std::uint32_t v) {
    return (u == a && v == b) || (u == b && v == a);
  };
  for (std::int64_t z = lo.z; z < hi.z; ++z) {
    for (std::int64_t y = lo.y; y < hi.y; ++y) {
      for (std::int64_t x = lo.x; x < hi.x; ++x) {
        const auto zz = static_cast<std::size_t>(z);
        const auto yy = static_cast<std::size_t>(y);
        const auto xx = static_cast<std::size_t>(x);
        const std::uint32_t v = seg.at(zz, yy, xx);
        if (v != a && v != b) continue;
        if (x + 1 < hi.x && matches(v, seg.at(zz, yy, xx + 1))) ++area;
        if (y + 1 < hi.y && matches(v, seg.at(zz, yy + 1, xx))) ++area;
        if (z + 1 < hi.z && matches(v, seg.at(zz + 1, yy, xx))) ++area;
      }
    }
  }
  return area;
}

}  // namespace synaptik
