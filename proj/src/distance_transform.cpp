// Separable lower-envelope feature transform (Felzenszwalb & Huttenlocher),
// run one axis at a time with the physical spacing folded into each
// parabola. Ties are resolved lexicographically on (distance, site id) at
// every integer sample, so the nearest id is the smallest among equidistant
// sites after all three passes.

#include "synaptik/distance_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synaptik/parallel.hpp"

namespace synaptik {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LineScratch {
  std::vector<double> g_in, g_out;
  std::vector<std::uint32_t> id_in, id_out;
  std::vector<std::size_t> hull;
  std::vector<std::int64_t> start;
};

// One 1D pass over a line of n samples. Sample j carries (g[j], id[j]) and
// its parabola is centered at j + offset, scaled by `step` nm per sample.
void envelope_1d(std::size_t n, double step, double offset, LineScratch& w) {
  const double w2 = step * step;
  auto value = [&](std::size_t j, double q) {
    const double d = q - (static_cast<double>(j) + offset);
    return w.g_in[j] + w2 * d * d;
  };
  auto beats = [&](std::size_t b, std::size_t a, std::int64_t q) {
    const double fb = value(b, static_cast<double>(q));
    const double fa = value(a, static_cast<double>(q));
    return fb < fa || (fb == fa && w.id_in[b] < w.id_in[a]);
  };
  // Smallest integer q at which parabola b (right of a) wins over a.
  auto first_win = [&](std::size_t a, std::size_t b) -> std::int64_t {
    const double ca = static_cast<double>(a) + offset;
    const double cb = static_cast<double>(b) + offset;
    const double s =
        ((w.g_in[b] + w2 * cb * cb) - (w.g_in[a] + w2 * ca * ca)) / (2.0 * w2 * (cb - ca));
    const auto limit = static_cast<double>(n);
    if (s < -1.0) return 0;
    if (s > limit + 1.0) return static_cast<std::int64_t>(n) + 1;
    auto q = static_cast<std::int64_t>(std::floor(s));
    while (beats(b, a, q - 1)) --q;
    while (!beats(b, a, q)) ++q;
    return q;
  };

  w.hull.clear();
  w.start.clear();
  for (std::size_t j = 0; j < n; ++j) {
    if (w.id_in[j] == 0) continue;
    std::int64_t t = 0;
    while (!w.hull.empty()) {
      t = first_win(w.hull.back(), j);
      if (t <= w.start.back()) {
        w.hull.pop_back();
        w.start.pop_back();
        t = 0;
      } else {
        break;
      }
    }
    if (t >= static_cast<std::int64_t>(n)) continue;
    w.hull.push_back(j);
    w.start.push_back(w.hull.size() == 1 ? 0 : t);
  }

  if (w.hull.empty()) {
    std::fill(w.g_out.begin(), w.g_out.begin() + static_cast<std::ptrdiff_t>(n), kInf);
    std::fill(w.id_out.begin(), w.id_out.begin() + static_cast<std::ptrdiff_t>(n), 0u);
    return;
  }
  std::size_t k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (k + 1 < w.hull.size() && w.start[k + 1] <= static_cast<std::int64_t>(q)) ++k;
    w.g_out[q] = value(w.hull[k], static_cast<double>(q));
    w.id_out[q] = w.id_in[w.hull[k]];
  }
}

// Runs the pass along one axis for every line of the volume.
void pass_along(const Shape& s, int axis, double step, double offset, SquaredField& f) {
  std::size_t n = 0, stride = 0, lines = 0;
  switch (axis) {
    case 2: n = s.x; stride = 1; lines = s.z * s.y; break;
    case 1: n = s.y; stride = s.x; lines = s.z * s.x; break;
    default: n = s.z; stride = s.y * s.x; lines = s.y * s.x; break;
  }
  auto line_origin = [&](std::size_t line) -> std::size_t {
    switch (axis) {
      case 2: return line * s.x;
      case 1: return (line / s.x) * s.y * s.x + line % s.x;
      default: return line;
    }
  };
  parallel_chunks(lines, [&](std::size_t, std::size_t begin, std::size_t end) {
    LineScratch w;
    w.g_in.resize(n);
    w.g_out.resize(n);
    w.id_in.resize(n);
    w.id_out.resize(n);
    for (std::size_t line = begin; line < end; ++line) {
      const std::size_t origin = line_origin(line);
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) {
        w.g_in[j] = f.dist_sq[origin + j * stride];
        w.id_in[j] = f.id[origin + j * stride];
        any = any || w.id_in[j] != 0;
      }
      if (!any) continue;
      envelope_1d(n, step, offset, w);
      for (std::size_t j = 0; j < n; ++j) {
        f.dist_sq[origin + j * stride] = w.g_out[j];
        f.id[origin + j * stride] = w.id_out[j];
      }
    }
  });
}

// Exact transform for sites that all share the same sub-voxel offset.
SquaredField lattice_transform(const Shape& s, const Spacing& spacing, HalfAxis half,
                               std::span<const HalfSite> sites) {
  SquaredField f{std::vector<double>(s.voxels(), kInf),
                 std::vector<std::uint32_t>(s.voxels(), 0u)};
  for (const HalfSite& site : sites) {
    const std::size_t i = s.index(static_cast<std::size_t>(site.base.z),
                                  static_cast<std::size_t>(site.base.y),
                                  static_cast<std::size_t>(site.base.x));
    if (f.id[i] == 0 || site.id < f.id[i]) {
      f.id[i] = site.id;
      f.dist_sq[i] = 0.0;
    }
  }
  pass_along(s, 2, spacing.x, half == HalfAxis::x ? 0.5 : 0.0, f);
  pass_along(s, 1, spacing.y, half == HalfAxis::y ? 0.5 : 0.0, f);
  pass_along(s, 0, spacing.z, half == HalfAxis::z ? 0.5 : 0.0, f);
  return f;
}

void check_site(const Shape& s, const HalfSite& site) {
  if (site.id == 0) throw ParameterError("site ids must be nonzero");
  if (!contains(s, site.base)) throw ParameterError("site lies outside the volume");
}

}  // namespace

SquaredField nearest_half_sites(const Shape& shape, const Spacing& spacing,
                                std::span<const HalfSite> sites) {
  validate(spacing);
  if (sites.empty()) throw ParameterError("feature transform needs at least one site");
  std::array<std::vector<HalfSite>, 4> groups;
  for (const HalfSite& site : sites) {
    check_site(shape, site);
    groups[static_cast<std::size_t>(site.half_axis)].push_back(site);
  }
  SquaredField merged;
  bool first = true;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    SquaredField f = lattice_transform(shape, spacing, static_cast<HalfAxis>(g), groups[g]);
    if (first) {
      merged = std::move(f);
      first = false;
      continue;
    }
    for (std::size_t i = 0; i < merged.id.size(); ++i) {
      if (f.id[i] == 0) continue;
      if (merged.id[i] == 0 || f.dist_sq[i] < merged.dist_sq[i] ||
          (f.dist_sq[i] == merged.dist_sq[i] && f.id[i] < merged.id[i])) {
        merged.dist_sq[i] = f.dist_sq[i];
        merged.id[i] = f.id[i];
      }
    }
  }
  return merged;
}

FeatureTransform feature_transform(const Shape& shape, std::span<const Site> sites,
                                   const Spacing& spacing) {
  validate(spacing);
  if (sites.empty()) throw ParameterError("feature transform needs at least one site");
  std::vector<HalfSite> lattice;
  lattice.reserve(sites.size());
  for (const Site& s : sites) lattice.push_back({s.coord, HalfAxis::none, s.id});
  for (const HalfSite& s : lattice) check_site(shape, s);
  SquaredField f = lattice_transform(shape, spacing, HalfAxis::none, lattice);

  FeatureTransform out{Volume<double>(shape, spacing, 0.0), LabelVolume(shape, spacing, 0u)};
  parallel_for(shape.voxels(), [&](std::size_t i) {
    out.distance_nm[i] = std::sqrt(f.dist_sq[i]);
    out.nearest_id[i] = f.id[i];
  });
  return out;
}

}  // namespace synaptik
