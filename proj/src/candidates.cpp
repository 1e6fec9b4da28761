#include "synaptik/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "synaptik/distance_transform.hpp"
#include "synaptik/parallel.hpp"

namespace synaptik {

namespace {

constexpr int kCandidateConnectivity = 26;

MaskVolume threshold_mask(const ProximityVolume& prox, double tau, bool positive) {
  MaskVolume mask(prox.shape(), prox.spacing(), 0);
  const auto t = static_cast<float>(tau);
  parallel_for(prox.size(), [&](std::size_t i) {
    mask[i] = positive ? (prox[i] >= t) : (prox[i] <= -t);
  });
  return mask;
}

struct Box {
  Coord lo, hi;  // half-open
};

void grow(Box& b, const Coord& c) {
  b.lo = {std::min(b.lo.z, c.z), std::min(b.lo.y, c.y), std::min(b.lo.x, c.x)};
  b.hi = {std::max(b.hi.z, c.z + 1), std::max(b.hi.y, c.y + 1), std::max(b.hi.x, c.x + 1)};
}

// Closest-pair anchors between one post component and several pre
// components, from one feature transform seeded by the post voxels.
std::vector<Anchor> anchors_to_post(const Component& post,
                                    const std::vector<const Component*>& pres, const Shape& shape,
                                    const Spacing& spacing) {
  Box box{{INT64_MAX, INT64_MAX, INT64_MAX}, {INT64_MIN, INT64_MIN, INT64_MIN}};
  for (auto v : post.voxels) grow(box, coord_of(shape, v));
  for (const Component* e : pres) {
    for (auto v : e->voxels) grow(box, coord_of(shape, v));
  }
  const Shape local{std::size_t(box.hi.z - box.lo.z), std::size_t(box.hi.y - box.lo.y),
                    std::size_t(box.hi.x - box.lo.x)};
  auto to_local = [&](const Coord& c) {
    return Coord{c.z - box.lo.z, c.y - box.lo.y, c.x - box.lo.x};
  };

  // Site id = rank of the voxel in the post component, so the smallest id
  // is also the smallest linear index.
  std::vector<HalfSite> sites;
  sites.reserve(post.voxels.size());
  for (std::size_t r = 0; r < post.voxels.size(); ++r) {
    sites.push_back({to_local(coord_of(shape, post.voxels[r])), HalfAxis::none,
                     static_cast<std::uint32_t>(r + 1)});
  }
  const SquaredField field = nearest_half_sites(local, spacing, sites);

  std::vector<Anchor> out;
  out.reserve(pres.size());
  for (const Component* e : pres) {
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_pre = 0, best_post = 0;
    for (auto v : e->voxels) {
      const Coord c = to_local(coord_of(shape, v));
      const std::size_t li = local.index(std::size_t(c.z), std::size_t(c.y), std::size_t(c.x));
      if (field.dist_sq[li] < best) {
        best = field.dist_sq[li];
        best_pre = v;
        best_post = post.voxels[field.id[li] - 1];
      }
    }
    const Coord a = coord_of(shape, best_pre);
    const Coord b = coord_of(shape, best_post);
    // Integer division truncates toward zero, i.e. toward the pre voxel.
    const Coord mid{a.z + (b.z - a.z) / 2, a.y + (b.y - a.y) / 2, a.x + (b.x - a.x) / 2};
    out.push_back({mid, std::sqrt(best), best_pre, best_post});
  }
  return out;
}

}  // namespace

void CandidateParams::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw ParameterError("tau must lie in (0, 1)");
  if (omega < 1) throw ParameterError("omega must be at least 1");
  if (min_contact_area < 1) throw ParameterError("min_contact_area must be at least 1");
  if (!(max_anchor_nm > 0.0)) throw ParameterError("max_anchor_nm must be positive");
}

ComponentPtr ComponentSet::find(std::uint64_t id) const {
  auto it = std::lower_bound(components.begin(), components.end(), id,
                             [](const ComponentPtr& c, std::uint64_t v) { return c->id < v; });
  return (it != components.end() && (*it)->id == id) ? *it : nullptr;
}

ComponentSet make_component_set(Labeling labeling, Polarity polarity) {
  ComponentSet set{polarity, std::move(labeling.labels), {}};
  set.components.reserve(labeling.components.size());
  for (auto& c : labeling.components) {
    c.polarity = polarity;
    set.components.push_back(std::make_shared<const Component>(std::move(c)));
  }
  return set;
}

PolarComponents polar_components(const ProximityVolume& prox, double tau) {
  return {make_component_set(connected_components(threshold_mask(prox, tau, true),
                                                  kCandidateConnectivity, Polarity::pre),
                             Polarity::pre),
          make_component_set(connected_components(threshold_mask(prox, tau, false),
                                                  kCandidateConnectivity, Polarity::post),
                             Polarity::post)};
}

std::vector<SiteCandidate> site_candidates(const ComponentSet& components,
                                           const SegmentationVolume& seg, std::uint64_t omega) {
  if (!(components.shape() == seg.shape())) {
    throw ShapeError("component labels and segmentation have different dims");
  }
  std::vector<std::vector<SiteCandidate>> per(components.components.size());
  parallel_for(per.size(), [&](std::size_t c) {
    std::map<std::uint32_t, std::uint64_t> overlap;
    for (auto v : components.components[c]->voxels) {
      if (const std::uint32_t s = seg[v]) ++overlap[s];
    }
    for (const auto& [s, n] : overlap) {
      if (n >= omega) per[c].push_back({components.components[c], s, n});
    }
  });
  std::vector<SiteCandidate> out;
  for (auto& p : per) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Anchor anchor_point(const Component& pre, const Component& post, const Shape& shape,
                    const Spacing& spacing) {
  if (pre.voxels.empty() || post.voxels.empty()) {
    throw ParameterError("anchor_point needs two nonempty components");
  }
  return anchors_to_post(post, {&pre}, shape, spacing).front();
}

std::vector<Candidate> pair_candidates(const std::vector<SiteCandidate>& pre_sites,
                                       const std::vector<SiteCandidate>& post_sites,
                                       const AdjacencyMap& adjacency, const Shape& shape,
                                       const Spacing& spacing, const CandidateParams& params) {
  params.validate();
  struct Pending {
    const SiteCandidate* pre;
    const SiteCandidate* post;
  };
  std::vector<Pending> pending;
  for (const auto& e : pre_sites) {
    for (const auto& o : post_sites) {
      if (e.segment_id == o.segment_id) continue;
      if (contact_area(adjacency, e.segment_id, o.segment_id) < params.min_contact_area) continue;
      pending.push_back({&e, &o});
    }
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.pre->component->id, a.post->component->id, a.pre->segment_id,
                    a.post->segment_id) < std::tie(b.pre->component->id, b.post->component->id,
                                                   b.pre->segment_id, b.post->segment_id);
  });

  // One anchor per distinct (pre component, post component) pair, batched
  // by post component.
  std::map<std::uint64_t, std::vector<const Component*>> by_post;
  std::map<std::uint64_t, const Component*> post_of;
  for (const auto& p : pending) {
    auto& list = by_post[p.post->component->id];
    if (std::find(list.begin(), list.end(), p.pre->component.get()) == list.end()) {
      list.push_back(p.pre->component.get());
    }
    post_of[p.post->component->id] = p.post->component.get();
  }
  std::map<std::pair<std::uint64_t, std::uint64_t>, Anchor> anchors;
  for (const auto& [post_id, pres] : by_post) {
    const auto found = anchors_to_post(*post_of.at(post_id), pres, shape, spacing);
    for (std::size_t i = 0; i < pres.size(); ++i) anchors[{pres[i]->id, post_id}] = found[i];
  }

  std::vector<Candidate> out;
  out.reserve(pending.size());
  for (const auto& p : pending) {
    const Anchor& a = anchors.at({p.pre->component->id, p.post->component->id});
    if (a.distance_nm > params.max_anchor_nm) continue;
    Candidate c;
    c.id = out.size();
    c.pre_site = *p.pre;
    c.post_site = *p.post;
    c.anchor_zyx = a.voxel;
    c.anchor_dist_nm = a.distance_nm;
    out.push_back(std::move(c));
  }
  return out;
}

CandidateSet generate_candidates(const ProximityVolume& prox, const SegmentationVolume& seg,
                                 const CandidateParams& params) {
  params.validate();
  require_same_shape(prox, seg, "proximity vs segmentation");
  CandidateSet out{polar_components(prox, params.tau), {}};
  const auto pre_sites = site_candidates(out.components.pre, seg, params.omega);
  const auto post_sites = site_candidates(out.components.post, seg, params.omega);
  out.candidates = pair_candidates(pre_sites, post_sites, segment_adjacency(seg), prox.shape(),
                                   prox.spacing(), params);
  return out;
}

}  // namespace synaptik
