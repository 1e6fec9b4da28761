#include "synaptik/target.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "synaptik/parallel.hpp"

namespace synaptik {

namespace {

struct Bands {
  std::vector<std::uint64_t> pre, post;
};

// Voxels of both bands, keyed by synapse id, in scan order.
std::map<std::uint32_t, Bands> collect_bands(const AnnotationVolume& ann) {
  std::map<std::uint32_t, Bands> bands;
  for (std::size_t i = 0; i < ann.size(); ++i) {
    const std::uint32_t l = ann[i];
    if (l == 0) continue;
    auto& b = bands[(l + 1) / 2];
    (l % 2 ? b.pre : b.post).push_back(i);
  }
  return bands;
}

// Synapse id if (a, b) are the two bands of one synapse, else 0.
std::uint32_t cleft_pair(std::uint32_t a, std::uint32_t b) {
  const std::uint32_t lo = std::min(a, b);
  const std::uint32_t hi = std::max(a, b);
  return (lo % 2 == 1 && hi == lo + 1) ? (hi / 2) : 0;
}

}  // namespace

void TargetParams::validate() const {
  if (!(std::isfinite(alpha) && alpha > 0)) throw ParameterError("alpha must be positive");
  if (!(std::isfinite(sigma_nm) && sigma_nm > 0)) throw ParameterError("sigma must be positive");
  if (!(std::isfinite(cutoff_nm) && cutoff_nm >= 3.0 * sigma_nm)) {
    throw ParameterError("cutoff must be at least 3 sigma");
  }
}

PointNm face_midpoint_nm(const HalfSite& f, const Spacing& s) {
  auto half = [&](HalfAxis a) { return f.half_axis == a ? 0.5 : 0.0; };
  return {(static_cast<double>(f.base.z) + half(HalfAxis::z)) * s.z,
          (static_cast<double>(f.base.y) + half(HalfAxis::y)) * s.y,
          (static_cast<double>(f.base.x) + half(HalfAxis::x)) * s.x};
}

std::vector<std::uint32_t> synapse_ids(const AnnotationVolume& ann) {
  std::vector<bool> seen;
  for (std::uint32_t l : ann.data()) {
    if (l == 0) continue;
    const std::uint32_t k = (l + 1) / 2;
    if (k >= seen.size()) seen.resize(k + 1, false);
    seen[k] = true;
  }
  std::vector<std::uint32_t> ids;
  for (std::uint32_t k = 1; k < seen.size(); ++k) {
    if (seen[k]) ids.push_back(k);
  }
  return ids;
}

std::vector<CleftSurface> extract_cleft_surfaces(const AnnotationVolume& ann) {
  const Shape s = ann.shape();
  std::map<std::uint32_t, std::pair<bool, bool>> present;  // (pre, post)
  std::map<std::uint32_t, CleftSurface> surfaces;
  for (std::size_t z = 0; z < s.z; ++z) {
    for (std::size_t y = 0; y < s.y; ++y) {
      for (std::size_t x = 0; x < s.x; ++x) {
        const std::uint32_t l = ann.at(z, y, x);
        if (l == 0) continue;
        auto& p = present[(l + 1) / 2];
        (l % 2 ? p.first : p.second) = true;
        const Coord base{std::int64_t(z), std::int64_t(y), std::int64_t(x)};
        auto face = [&](std::uint32_t other, HalfAxis axis) {
          if (const std::uint32_t k = cleft_pair(l, other)) {
            auto& surf = surfaces[k];
            surf.synapse_id = k;
            surf.faces.push_back({base, axis, k});
          }
        };
        if (x + 1 < s.x) face(ann.at(z, y, x + 1), HalfAxis::x);
        if (y + 1 < s.y) face(ann.at(z, y + 1, x), HalfAxis::y);
        if (z + 1 < s.z) face(ann.at(z + 1, y, x), HalfAxis::z);
      }
    }
  }
  std::vector<CleftSurface> out;
  for (const auto& [k, p] : present) {
    if (!p.first) {
      throw MalformedAnnotation(k, "synapse " + std::to_string(k) + " has a post band (" +
                                       std::to_string(2 * k) + ") but no pre band");
    }
    if (!p.second) {
      throw MalformedAnnotation(k, "synapse " + std::to_string(k) + " has a pre band (" +
                                       std::to_string(2 * k - 1) + ") but no post band");
    }
    auto it = surfaces.find(k);
    if (it == surfaces.end()) {
      throw MalformedAnnotation(
          k, "synapse " + std::to_string(k) + " has no face-adjacent pre/post voxel pair");
    }
    CleftSurface surf = std::move(it->second);
    surf.points_nm.reserve(surf.faces.size());
    for (const auto& f : surf.faces) surf.points_nm.push_back(face_midpoint_nm(f, ann.spacing()));
    out.push_back(std::move(surf));
  }
  return out;
}

double proximity_value(double d, const TargetParams& p) {
  if (std::abs(d) > p.cutoff_nm) return 0.0;
  return std::exp(-d * d / (2.0 * p.sigma_nm * p.sigma_nm)) * std::tanh(0.5 * p.alpha * d);
}

ProximityVolume make_target(const AnnotationVolume& ann, const TargetParams& p) {
  p.validate();
  const Shape s = ann.shape();
  const Spacing& sp = ann.spacing();
  const auto surfaces = extract_cleft_surfaces(ann);
  const auto bands = collect_bands(ann);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best_sq(s.voxels(), kInf);
  std::vector<std::int8_t> sign(s.voxels(), 1);
  const double cutoff_sq = p.cutoff_nm * p.cutoff_nm;
  const std::int64_t margin[3] = {static_cast<std::int64_t>(std::ceil(p.cutoff_nm / sp.z)),
                                  static_cast<std::int64_t>(std::ceil(p.cutoff_nm / sp.y)),
                                  static_cast<std::int64_t>(std::ceil(p.cutoff_nm / sp.x))};

  // Synapses in ascending id order; a strict comparison keeps the smaller
  // id when two clefts are equidistant.
  for (const CleftSurface& surf : surfaces) {
    const Bands& b = bands.at(surf.synapse_id);
    Coord lo{std::int64_t(s.z), std::int64_t(s.y), std::int64_t(s.x)};
    Coord hi{0, 0, 0};
    auto grow = [&](const Coord& c) {
      lo = {std::min(lo.z, c.z), std::min(lo.y, c.y), std::min(lo.x, c.x)};
      hi = {std::max(hi.z, c.z + 1), std::max(hi.y, c.y + 1), std::max(hi.x, c.x + 1)};
    };
    for (auto i : b.pre) grow(coord_of(s, i));
    for (auto i : b.post) grow(coord_of(s, i));
    lo = {std::max<std::int64_t>(0, lo.z - margin[0]), std::max<std::int64_t>(0, lo.y - margin[1]),
          std::max<std::int64_t>(0, lo.x - margin[2])};
    hi = {std::min<std::int64_t>(std::int64_t(s.z), hi.z + margin[0]),
          std::min<std::int64_t>(std::int64_t(s.y), hi.y + margin[1]),
          std::min<std::int64_t>(std::int64_t(s.x), hi.x + margin[2])};
    const Shape box{std::size_t(hi.z - lo.z), std::size_t(hi.y - lo.y), std::size_t(hi.x - lo.x)};
    auto local = [&](const Coord& c) { return Coord{c.z - lo.z, c.y - lo.y, c.x - lo.x}; };

    std::vector<HalfSite> cleft_sites;
    cleft_sites.reserve(surf.faces.size());
    for (const auto& f : surf.faces) cleft_sites.push_back({local(f.base), f.half_axis, 1});
    const SquaredField cleft = nearest_half_sites(box, sp, cleft_sites);

    // Band field: id 1 = pre, 2 = post, so an exact tie resolves to pre.
    std::vector<HalfSite> band_sites;
    band_sites.reserve(b.pre.size() + b.post.size());
    for (auto i : b.pre) band_sites.push_back({local(coord_of(s, i)), HalfAxis::none, 1});
    for (auto i : b.post) band_sites.push_back({local(coord_of(s, i)), HalfAxis::none, 2});
    const SquaredField band = nearest_half_sites(box, sp, band_sites);

    parallel_for(box.z, [&](std::size_t bz) {
      for (std::size_t by = 0; by < box.y; ++by) {
        for (std::size_t bx = 0; bx < box.x; ++bx) {
          const std::size_t li = box.index(bz, by, bx);
          const double d2 = cleft.dist_sq[li];
          if (d2 > cutoff_sq) continue;
          const std::size_t gi = s.index(bz + std::size_t(lo.z), by + std::size_t(lo.y),
                                         bx + std::size_t(lo.x));
          if (d2 < best_sq[gi]) {
            best_sq[gi] = d2;
            sign[gi] = band.id[li] == 1 ? 1 : -1;
          }
        }
      }
    });
  }

  ProximityVolume out(s, sp, 0.0f);
  parallel_for(s.voxels(), [&](std::size_t i) {
    if (best_sq[i] == kInf) return;
    out[i] = static_cast<float>(proximity_value(sign[i] * std::sqrt(best_sq[i]), p));
  });
  return out;
}

}  // namespace synaptik
