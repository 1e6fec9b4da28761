#include "synaptik/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include "synaptik/distance_transform.hpp"
#include "synaptik/errors.hpp"
#include "synaptik/splitmix64.hpp"

namespace synaptik {

namespace {

// RNG streams derived from the user seed.
constexpr std::uint64_t kSeedStream = 1;
constexpr std::uint64_t kPairStream = 2;
constexpr std::uint64_t kGrayStream = 3;
constexpr std::uint64_t kNoiseStream = 11;
constexpr std::uint64_t kBlobStream = 12;

constexpr int kMaxAttempts = 10000;
constexpr int kSelectionRounds = 2000;

// A patch must cover at least this fraction of a full disc of patch_radius.
// The cleft reaches up to one band thickness past the patch edge, and must
// still stay this far (nm) from the interfaces the two cells share with
// third cells.
constexpr double kMinPatchFill = 0.6;
constexpr double kJunctionClearanceNm = 20.0;

Coord random_voxel(SplitMix64& rng, const Shape& s) {
  const auto z = static_cast<std::int64_t>(rng.below(s.z));
  const auto y = static_cast<std::int64_t>(rng.below(s.y));
  const auto x = static_cast<std::int64_t>(rng.below(s.x));
  return {z, y, x};
}

double dist_sq(const PointNm& a, const PointNm& b) {
  return (a.z - b.z) * (a.z - b.z) + (a.y - b.y) * (a.y - b.y) + (a.x - b.x) * (a.x - b.x);
}

double face_area(HalfAxis axis, const Spacing& sp) {
  switch (axis) {
    case HalfAxis::z: return sp.x * sp.y;
    case HalfAxis::y: return sp.x * sp.z;
    case HalfAxis::x: return sp.y * sp.z;
    case HalfAxis::none: break;
  }
  return 0.0;
}

LabelVolume voronoi_cells(const PhantomConfig& cfg) {
  SplitMix64 rng(derive_seed(cfg.seed, kSeedStream));
  const double min_sq = cfg.min_cell_seed_distance_nm * cfg.min_cell_seed_distance_nm;
  std::vector<Site> seeds;
  for (std::uint32_t id = 1; id <= cfg.n_cells; ++id) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Coord c = random_voxel(rng, cfg.dims);
      placed = std::all_of(seeds.begin(), seeds.end(), [&](const Site& s) {
        return distance_sq_nm(c, s.coord, cfg.voxel_size) >= min_sq;
      });
      if (placed) seeds.push_back({c, id});
    }
    if (!placed) {
      throw GenerationError("could not place " + std::to_string(cfg.n_cells) +
                            " cell seeds at least " +
                            std::to_string(cfg.min_cell_seed_distance_nm) + " nm apart");
    }
  }
  auto ft = feature_transform(cfg.dims, seeds, cfg.voxel_size);
  return LabelVolume(cfg.dims, cfg.voxel_size, ft.nearest_id.values());
}

struct Interface {
  std::uint32_t a = 0, b = 0;  // a < b
  std::vector<HalfSite> faces;
  std::vector<PointNm> points;
};

std::vector<Interface> cell_interfaces(const LabelVolume& cells) {
  const Shape& s = cells.shape();
  std::map<std::pair<std::uint32_t, std::uint32_t>, Interface> by_pair;
  auto visit = [&](const Coord& c, std::size_t i, std::size_t j, HalfAxis axis) {
    const std::uint32_t u = cells[i], v = cells[j];
    if (u == v || u == 0 || v == 0) return;
    auto& f = by_pair[{std::min(u, v), std::max(u, v)}];
    f.a = std::min(u, v);
    f.b = std::max(u, v);
    HalfSite h{c, axis, 1};
    f.faces.push_back(h);
    f.points.push_back(face_midpoint_nm(h, cells.spacing()));
  };
  for (std::size_t z = 0; z < s.z; ++z)
    for (std::size_t y = 0; y < s.y; ++y)
      for (std::size_t x = 0; x < s.x; ++x) {
        const std::size_t i = s.index(z, y, x);
        const Coord c{std::int64_t(z), std::int64_t(y), std::int64_t(x)};
        if (z + 1 < s.z) visit(c, i, s.index(z + 1, y, x), HalfAxis::z);
        if (y + 1 < s.y) visit(c, i, s.index(z, y + 1, x), HalfAxis::y);
        if (x + 1 < s.x) visit(c, i, i + 1, HalfAxis::x);
      }
  std::vector<Interface> out;
  for (auto& [key, f] : by_pair) out.push_back(std::move(f));
  return out;
}

struct Patch {
  std::uint32_t pre = 0, post = 0;
  PointNm center;
  std::vector<HalfSite> faces;
};

// Squared distance from each face of `f` to the nearest face the two cells
// share with any third cell, +inf if there is none nearby.
std::vector<double> junction_clearance_sq(const Interface& f, const std::vector<Interface>& all,
                                          const Shape& shape, const Spacing& sp, double reach) {
  Coord lo = f.faces.front().base, hi = lo;
  for (const auto& h : f.faces) {
    lo = {std::min(lo.z, h.base.z), std::min(lo.y, h.base.y), std::min(lo.x, h.base.x)};
    hi = {std::max(hi.z, h.base.z), std::max(hi.y, h.base.y), std::max(hi.x, h.base.x)};
  }
  auto pad = [&](double step) { return static_cast<std::int64_t>(std::ceil(reach / step)) + 1; };
  lo = {std::max<std::int64_t>(0, lo.z - pad(sp.z)), std::max<std::int64_t>(0, lo.y - pad(sp.y)),
        std::max<std::int64_t>(0, lo.x - pad(sp.x))};
  hi = {std::min<std::int64_t>(std::int64_t(shape.z) - 1, hi.z + pad(sp.z) + 1),
        std::min<std::int64_t>(std::int64_t(shape.y) - 1, hi.y + pad(sp.y) + 1),
        std::min<std::int64_t>(std::int64_t(shape.x) - 1, hi.x + pad(sp.x) + 1)};
  const Shape box{std::size_t(hi.z - lo.z + 1), std::size_t(hi.y - lo.y + 1),
                  std::size_t(hi.x - lo.x + 1)};
  auto inside = [&](const Coord& c) {
    return c.z >= lo.z && c.z < hi.z && c.y >= lo.y && c.y < hi.y && c.x >= lo.x && c.x < hi.x;
  };

  std::vector<HalfSite> foreign;
  for (const auto& other : all) {
    if (other.a == f.a && other.b == f.b) continue;
    if (other.a != f.a && other.a != f.b && other.b != f.a && other.b != f.b) continue;
    for (const auto& h : other.faces) {
      if (!inside(h.base)) continue;
      foreign.push_back({{h.base.z - lo.z, h.base.y - lo.y, h.base.x - lo.x}, h.half_axis, 1});
    }
  }
  std::vector<double> out(f.faces.size(), std::numeric_limits<double>::infinity());
  if (foreign.empty()) return out;
  const SquaredField field = nearest_half_sites(box, sp, foreign);
  for (std::size_t i = 0; i < f.faces.size(); ++i) {
    const Coord& c = f.faces[i].base;
    const std::size_t z = std::size_t(c.z - lo.z), y = std::size_t(c.y - lo.y),
                      x = std::size_t(c.x - lo.x);
    std::size_t z2 = z, y2 = y, x2 = x;
    if (f.faces[i].half_axis == HalfAxis::z) ++z2;
    if (f.faces[i].half_axis == HalfAxis::y) ++y2;
    if (f.faces[i].half_axis == HalfAxis::x) ++x2;
    out[i] = std::min(field.dist_sq[box.index(z, y, x)], field.dist_sq[box.index(z2, y2, x2)]);
  }
  return out;
}

// Center: among faces far enough from every junction with a third cell,
// the one nearest the interface centroid. The patch is every interface face
// within patch_radius of it. Returns nothing if no face is clear of the
// junctions or the patch is too clipped.
std::optional<Patch> plan_patch(const Interface& f, const std::vector<Interface>& all,
                                const Shape& shape, const PhantomConfig& cfg) {
  const double r = cfg.patch_radius_nm;
  const double clear = r + cfg.band_thickness_nm + kJunctionClearanceNm;
  const auto clearance = junction_clearance_sq(f, all, shape, cfg.voxel_size, clear);

  PointNm centroid;
  for (const auto& p : f.points) {
    centroid.z += p.z;
    centroid.y += p.y;
    centroid.x += p.x;
  }
  const auto n = static_cast<double>(f.points.size());
  centroid = {centroid.z / n, centroid.y / n, centroid.x / n};
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    if (clearance[i] < clear * clear) continue;
    if (!best || dist_sq(f.points[i], centroid) < dist_sq(f.points[*best], centroid)) best = i;
  }
  if (!best) return std::nullopt;
  Patch patch{f.a, f.b, f.points[*best], {}};

  double area = 0;
  for (std::size_t i = 0; i < f.faces.size(); ++i) {
    if (dist_sq(f.points[i], patch.center) <= r * r) {
      patch.faces.push_back(f.faces[i]);
      area += face_area(f.faces[i].half_axis, cfg.voxel_size);
    }
  }
  if (area < kMinPatchFill * std::acos(-1.0) * r * r) return std::nullopt;
  return patch;
}

std::vector<Patch> choose_synapses(const LabelVolume& cells, const PhantomConfig& cfg) {
  if (cfg.n_synapses == 0) return {};
  const auto interfaces = cell_interfaces(cells);
  std::vector<Patch> eligible;
  for (const auto& f : interfaces) {
    if (auto p = plan_patch(f, interfaces, cells.shape(), cfg)) eligible.push_back(std::move(*p));
  }
  // No cell is pre at two synapses or post at two synapses, so every
  // cross pairing of one synapse's pre site with another's post site is a
  // plain false candidate. The greedy pick over a shuffled pool is retried
  // with fresh shuffles until it fits every synapse.
  const double sep_sq = cfg.min_synapse_separation_nm * cfg.min_synapse_separation_nm;
  SplitMix64 rng(derive_seed(cfg.seed, kPairStream));
  std::vector<const Patch*> best;
  for (int round = 0; round < kSelectionRounds && best.size() < cfg.n_synapses; ++round) {
    std::vector<const Patch*> pool;
    for (const auto& p : eligible) pool.push_back(&p);
    for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
    std::set<std::uint32_t> used_pre, used_post;
    std::vector<const Patch*> chosen;
    for (const Patch* p : pool) {
      if (chosen.size() == cfg.n_synapses) break;
      if (used_pre.count(p->pre) || used_post.count(p->post)) continue;
      const bool far = std::all_of(chosen.begin(), chosen.end(), [&](const Patch* q) {
        return dist_sq(p->center, q->center) >= sep_sq;
      });
      if (!far) continue;
      used_pre.insert(p->pre);
      used_post.insert(p->post);
      chosen.push_back(p);
    }
    if (chosen.size() > best.size()) best = std::move(chosen);
  }
  if (best.size() < cfg.n_synapses) {
    throw GenerationError("only " + std::to_string(best.size()) + " of " +
                          std::to_string(cfg.n_synapses) +
                          " synapses fit on the available adjacent cell pairs");
  }
  std::vector<Patch> out;
  for (const Patch* p : best) out.push_back(*p);
  return out;
}

// Paints bands 2k-1 (pre cell) and 2k (post cell): every voxel of the two
// cells within band_thickness of the patch.
void paint_bands(AnnotationVolume& ann, const LabelVolume& cells, const Patch& patch,
                 std::uint32_t k, const PhantomConfig& cfg) {
  const Shape& s = cells.shape();
  const Spacing& sp = cfg.voxel_size;
  const double t = cfg.band_thickness_nm;
  const std::int64_t rz = static_cast<std::int64_t>(std::ceil(t / sp.z)) + 1;
  const std::int64_t ry = static_cast<std::int64_t>(std::ceil(t / sp.y)) + 1;
  const std::int64_t rx = static_cast<std::int64_t>(std::ceil(t / sp.x)) + 1;
  Coord lo = patch.faces.front().base, hi = lo;
  for (const auto& f : patch.faces) {
    lo = {std::min(lo.z, f.base.z), std::min(lo.y, f.base.y), std::min(lo.x, f.base.x)};
    hi = {std::max(hi.z, f.base.z), std::max(hi.y, f.base.y), std::max(hi.x, f.base.x)};
  }
  lo = {std::max<std::int64_t>(0, lo.z - rz), std::max<std::int64_t>(0, lo.y - ry),
        std::max<std::int64_t>(0, lo.x - rx)};
  hi = {std::min<std::int64_t>(std::int64_t(s.z), hi.z + rz + 1),
        std::min<std::int64_t>(std::int64_t(s.y), hi.y + ry + 1),
        std::min<std::int64_t>(std::int64_t(s.x), hi.x + rx + 1)};
  const Shape box{std::size_t(hi.z - lo.z), std::size_t(hi.y - lo.y), std::size_t(hi.x - lo.x)};

  std::vector<HalfSite> local = patch.faces;
  for (auto& f : local) f.base = {f.base.z - lo.z, f.base.y - lo.y, f.base.x - lo.x};
  const SquaredField field = nearest_half_sites(box, sp, local);
  for (std::size_t z = 0; z < box.z; ++z)
    for (std::size_t y = 0; y < box.y; ++y)
      for (std::size_t x = 0; x < box.x; ++x) {
        if (field.dist_sq[box.index(z, y, x)] > t * t) continue;
        const std::size_t g = s.index(z + std::size_t(lo.z), y + std::size_t(lo.y),
                                      x + std::size_t(lo.x));
        if (ann[g] != 0) continue;
        if (cells[g] == patch.pre) ann[g] = 2 * k - 1;
        if (cells[g] == patch.post) ann[g] = 2 * k;
      }
}

ImageVolume render_image(const LabelVolume& cells, const PhantomConfig& cfg) {
  const Shape& s = cells.shape();
  ImageVolume image(s, cfg.voxel_size);
  SplitMix64 rng(derive_seed(cfg.seed, kGrayStream));
  for (std::size_t z = 0; z < s.z; ++z)
    for (std::size_t y = 0; y < s.y; ++y)
      for (std::size_t x = 0; x < s.x; ++x) {
        const std::size_t i = s.index(z, y, x);
        const std::uint32_t c = cells[i];
        bool boundary = false;
        if (z > 0) boundary |= cells[s.index(z - 1, y, x)] != c;
        if (z + 1 < s.z) boundary |= cells[s.index(z + 1, y, x)] != c;
        if (y > 0) boundary |= cells[s.index(z, y - 1, x)] != c;
        if (y + 1 < s.y) boundary |= cells[s.index(z, y + 1, x)] != c;
        if (x > 0) boundary |= cells[i - 1] != c;
        if (x + 1 < s.x) boundary |= cells[i + 1] != c;
        double g = boundary ? cfg.membrane_gray : cfg.cytoplasm_gray;
        if (cfg.gray_noise_std > 0) g += cfg.gray_noise_std * rng.normal();
        image[i] = static_cast<std::uint8_t>(std::clamp(std::round(g), 0.0, 255.0));
      }
  return image;
}

}  // namespace

void PhantomConfig::validate() const {
  if (dims.voxels() == 0) throw ParameterError("phantom dims must be positive");
  synaptik::validate(voxel_size);
  if (n_cells < 2) throw ParameterError("n_cells must be at least 2");
  const double half_step = 0.5 * std::max({voxel_size.x, voxel_size.y, voxel_size.z});
  if (!(std::isfinite(band_thickness_nm) && band_thickness_nm >= half_step)) {
    throw ParameterError("band_thickness_nm must be at least half the largest voxel step");
  }
  if (!(std::isfinite(gray_noise_std) && gray_noise_std >= 0)) {
    throw ParameterError("gray_noise_std must be nonnegative");
  }
  if (!(std::isfinite(patch_radius_nm) && patch_radius_nm > 0)) {
    throw ParameterError("patch_radius_nm must be positive");
  }
  if (!(min_synapse_separation_nm >= 0) || !(min_cell_seed_distance_nm >= 0)) {
    throw ParameterError("separations must be nonnegative");
  }
  target.validate();
}

PhantomBundle generate_phantom(const PhantomConfig& cfg) {
  cfg.validate();
  PhantomBundle b;
  b.gt_seg = voronoi_cells(cfg);
  const auto patches = choose_synapses(b.gt_seg, cfg);

  b.annotation = AnnotationVolume(cfg.dims, cfg.voxel_size);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto id = static_cast<std::uint32_t>(k + 1);
    paint_bands(b.annotation, b.gt_seg, patches[k], id, cfg);
    b.connections.push_back({id, patches[k].pre, patches[k].post, {}});
  }
  attach_spans(b.connections, b.annotation);
  b.image = render_image(b.gt_seg, cfg);
  b.target = make_target(b.annotation, cfg.target);
  return b;
}

ProximityVolume oracle_predict(const ProximityVolume& target, const OracleParams& params) {
  validate_proximity(target);
  if (!(std::isfinite(params.noise_std) && params.noise_std >= 0)) {
    throw ParameterError("noise_std must be nonnegative");
  }
  if (!(params.blob_sigma_nm > 0) || !std::isfinite(params.blob_amplitude)) {
    throw ParameterError("blob sigma must be positive and amplitude finite");
  }
  const Shape& s = target.shape();
  const Spacing& sp = target.spacing();
  std::vector<double> out(target.values().begin(), target.values().end());

  if (params.noise_std > 0) {
    SplitMix64 rng(derive_seed(params.seed, kNoiseStream));
    for (auto& v : out) v += params.noise_std * rng.normal();
  }

  if (params.n_distractors > 0) {
    std::vector<Site> synaptic;
    for (std::size_t i = 0; i < target.shape().voxels(); ++i) {
      if (target[i] != 0.0f) synaptic.push_back({coord_of(s, i), 1});
    }
    std::optional<FeatureTransform> clearance;
    if (!synaptic.empty()) clearance = feature_transform(s, synaptic, sp);

    SplitMix64 rng(derive_seed(params.seed, kBlobStream));
    const double sigma = params.blob_sigma_nm;
    const double reach = 4.0 * sigma;
    for (std::uint32_t n = 0; n < params.n_distractors; ++n) {
      std::optional<Coord> center;
      for (int attempt = 0; attempt < kMaxAttempts && !center; ++attempt) {
        const Coord c = random_voxel(rng, s);
        if (!clearance || clearance->distance_nm.at(c) >= params.exclusion_nm) center = c;
      }
      // A volume with no room left for blobs simply gets fewer of them.
      if (!center) break;
      const double amp = (rng.next() & 1) ? params.blob_amplitude : -params.blob_amplitude;
      auto range = [&](std::int64_t c, double step, std::size_t dim) {
        const auto r = static_cast<std::int64_t>(std::ceil(reach / step));
        return std::pair{std::max<std::int64_t>(0, c - r),
                         std::min<std::int64_t>(std::int64_t(dim) - 1, c + r)};
      };
      const auto [z0, z1] = range(center->z, sp.z, s.z);
      const auto [y0, y1] = range(center->y, sp.y, s.y);
      const auto [x0, x1] = range(center->x, sp.x, s.x);
      for (std::int64_t z = z0; z <= z1; ++z)
        for (std::int64_t y = y0; y <= y1; ++y)
          for (std::int64_t x = x0; x <= x1; ++x) {
            const double d2 = distance_sq_nm({z, y, x}, *center, sp);
            if (d2 > reach * reach) continue;
            out[s.index(std::size_t(z), std::size_t(y), std::size_t(x))] +=
                amp * std::exp(-d2 / (2 * sigma * sigma));
          }
    }
  }

  ProximityVolume result(s, sp);
  for (std::size_t i = 0; i < out.size(); ++i) {
    result[i] = static_cast<float>(std::clamp(out[i], -1.0, 1.0));
  }
  return result;
}

}  // namespace synaptik
