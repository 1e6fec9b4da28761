#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "synaptik/adjacency.hpp"
#include "synaptik/connected_components.hpp"
#include "synaptik/volume.hpp"

namespace synaptik {

struct CandidateParams {
  double tau = 0.3;                    // |proximity| threshold, inclusive
  std::uint64_t omega = 100;           // minimum component/segment overlap
  std::uint64_t min_contact_area = 1;  // adjacency qualification
  double max_anchor_nm = std::numeric_limits<double>::infinity();

  void validate() const;
};

using ComponentPtr = std::shared_ptr<const Component>;

// Components of one polarity together with their label volume
// (value = component id + 1).
struct ComponentSet {
  Polarity polarity = Polarity::pre;
  LabelVolume labels;
  std::vector<ComponentPtr> components;  // sorted by id

  const Shape& shape() const { return labels.shape(); }
  ComponentPtr find(std::uint64_t id) const;
};

ComponentSet make_component_set(Labeling labeling, Polarity polarity);

struct PolarComponents {
  ComponentSet pre;   // 26-connected components of prox >= tau
  ComponentSet post;  // 26-connected components of prox <= -tau
};

PolarComponents polar_components(const ProximityVolume& prox, double tau);

struct SiteCandidate {
  ComponentPtr component;
  std::uint32_t segment_id = 0;
  std::uint64_t overlap_voxels = 0;
};

// One site per (component, segment) pair overlapping in at least omega
// voxels; segment 0 never qualifies. Sorted by (component id, segment id).
std::vector<SiteCandidate> site_candidates(const ComponentSet& components,
                                           const SegmentationVolume& seg, std::uint64_t omega);

struct Anchor {
  Coord voxel;              // window center
  double distance_nm = 0;   // length of the closest pre/post voxel pair
  std::uint64_t pre_voxel = 0;
  std::uint64_t post_voxel = 0;
};

// Closest voxel pair between two components; the anchor is their midpoint
// rounded toward the pre voxel. Ties go to the smallest (pre, post) index
// pair.
Anchor anchor_point(const Component& pre, const Component& post, const Shape& shape,
                    const Spacing& spacing);

struct Candidate {
  std::uint64_t id = 0;  // position in the deterministic candidate order
  SiteCandidate pre_site;
  SiteCandidate post_site;
  Coord anchor_zyx;
  double anchor_dist_nm = 0;
  std::optional<double> score;
};

// Pairs every pre site with every post site whose segments differ and are
// neighbors (contact area >= min_contact_area). Output ordered by
// (pre component, post component, pre segment, post segment).
std::vector<Candidate> pair_candidates(const std::vector<SiteCandidate>& pre_sites,
                                       const std::vector<SiteCandidate>& post_sites,
                                       const AdjacencyMap& adjacency, const Shape& shape,
                                       const Spacing& spacing, const CandidateParams& params);

struct CandidateSet {
  PolarComponents components;
  std::vector<Candidate> candidates;
};

// Full candidate generation: threshold, label, match to segments, pair.
CandidateSet generate_candidates(const ProximityVolume& prox, const SegmentationVolume& seg,
                                 const CandidateParams& params);

}  // namespace synaptik
