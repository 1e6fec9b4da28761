#include "synaptik/connected_components.hpp"

#include <array>
#include <limits>

#include "synaptik/parallel.hpp"

namespace synaptik {

namespace {

struct Offset {
  int dz, dy, dx;
};

// Neighbors already visited by a raster scan (z, then y, then x).
std::vector<Offset> backward_offsets(int connectivity) {
  std::vector<Offset> out;
  for (int dz = -1; dz <= 0; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dz == 0 && (dy > 0 || (dy == 0 && dx >= 0))) continue;
        const int nonzero = (dz != 0) + (dy != 0) + (dx != 0);
        if ((connectivity == 6 && nonzero > 1) || (connectivity == 18 && nonzero > 2)) continue;
        out.push_back({dz, dy, dx});
      }
    }
  }
  return out;
}

// Union-find where the root is always the smallest index in its set, so
// parent[i] <= i holds at all times.
class MinUnionFind {
 public:
  explicit MinUnionFind(std::vector<std::uint32_t>& parent) : parent_(parent) {}

  std::uint32_t find(std::uint32_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

 private:
  std::vector<std::uint32_t>& parent_;
};

}  // namespace

Labeling connected_components(const MaskVolume& mask, int connectivity, Polarity polarity) {
  if (connectivity != 6 && connectivity != 18 && connectivity != 26) {
    throw ParameterError("connectivity must be 6, 18 or 26, got " + std::to_string(connectivity));
  }
  const Shape s = mask.shape();
  const std::size_t n = s.voxels();
  if (n >= std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("volume too large for 32-bit component labels");
  }
  const auto offsets = backward_offsets(connectivity);
  constexpr std::uint32_t kBackground = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> parent(n, kBackground);

  auto link_voxel = [&](MinUnionFind& uf, std::size_t z, std::size_t y, std::size_t x,
                        std::size_t z_floor) {
    const auto i = static_cast<std::uint32_t>(s.index(z, y, x));
    for (const Offset& o : offsets) {
      const auto nz = static_cast<std::int64_t>(z) + o.dz;
      const auto ny = static_cast<std::int64_t>(y) + o.dy;
      const auto nx = static_cast<std::int64_t>(x) + o.dx;
      if (nz < static_cast<std::int64_t>(z_floor) || ny < 0 || nx < 0 ||
          ny >= static_cast<std::int64_t>(s.y) || nx >= static_cast<std::int64_t>(s.x)) {
        continue;
      }
      const auto j = static_cast<std::uint32_t>(s.index(static_cast<std::size_t>(nz),
                                                        static_cast<std::size_t>(ny),
                                                        static_cast<std::size_t>(nx)));
      if (parent[j] != kBackground) uf.unite(i, j);
    }
  };

  // Pass 1: label z-slabs independently. Each slab only touches parent
  // entries inside itself.
  const std::size_t chunks = chunk_count(s.z);
  parallel_chunks(s.z, [&](std::size_t, std::size_t z0, std::size_t z1) {
    MinUnionFind uf(parent);
    for (std::size_t z = z0; z < z1; ++z) {
      for (std::size_t y = 0; y < s.y; ++y) {
        for (std::size_t x = 0; x < s.x; ++x) {
          const std::size_t i = s.index(z, y, x);
          if (!mask[i]) continue;
          parent[i] = static_cast<std::uint32_t>(i);
          link_voxel(uf, z, y, x, z0);
        }
      }
    }
  });

  // Pass 2: stitch slab seams.
  MinUnionFind uf(parent);
  for (std::size_t c = 1; c < chunks; ++c) {
    const std::size_t z = s.z * c / chunks;
    for (std::size_t y = 0; y < s.y; ++y) {
      for (std::size_t x = 0; x < s.x; ++x) {
        if (parent[s.index(z, y, x)] != kBackground) link_voxel(uf, z, y, x, z - 1);
      }
    }
  }

  // Pass 3: flatten in index order; parent[i] <= i makes one sweep enough.
  Labeling out{LabelVolume(s, mask.spacing(), 0u), {}};
  std::vector<std::uint32_t> ordinal(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (parent[i] == kBackground) continue;
    const std::uint32_t root = parent[parent[i]];
    parent[i] = root;
    out.labels[i] = root + 1;
    if (root == i) {
      ordinal[i] = static_cast<std::uint32_t>(out.components.size());
      out.components.push_back({root, polarity, {}});
    }
    out.components[ordinal[root]].voxels.push_back(i);
  }
  return out;
}

std::vector<Component> components_from_labels(const LabelVolume& labels, Polarity polarity) {
  std::vector<Component> out;
  std::vector<std::uint32_t> ordinal(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t l = labels[i];
    if (l == 0) continue;
    const std::uint64_t id = l - 1;
    if (id >= labels.size() || id > i) {
      throw FormatError("component label volume is not canonical at voxel " + std::to_string(i));
    }
    if (id == i) {
      ordinal[i] = static_cast<std::uint32_t>(out.size());
      out.push_back({id, polarity, {}});
    } else if (labels[id] != l) {
      throw FormatError("component label volume is not canonical at voxel " + std::to_string(i));
    }
    out[ordinal[id]].voxels.push_back(i);
  }
  return out;
}

}  // namespace synaptik
