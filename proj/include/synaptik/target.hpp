#pragma once

#include <cstdint>
#include <vector>

#include "synaptik/distance_transform.hpp"
#include "synaptik/volume.hpp"

namespace synaptik {

// Shape of the signed proximity target. alpha is per nm of signed distance,
// sigma and cutoff are in nm.
struct TargetParams {
  double alpha = 5.0;
  double sigma_nm = 10.0;
  double cutoff_nm = 40.0;

  // Preset used for 40 nm section thickness.
  static TargetParams thick_sections() { return {5.0, 14.0, 56.0}; }

  void validate() const;
};

struct PointNm {
  double z = 0, y = 0, x = 0;
};

// The faces separating the pre band (2k-1) from the post band (2k) of one
// synapse. faces[i] and points_nm[i] describe the same face.
struct CleftSurface {
  std::uint32_t synapse_id = 0;
  std::vector<HalfSite> faces;
  std::vector<PointNm> points_nm;
};

PointNm face_midpoint_nm(const HalfSite& face, const Spacing& spacing);

// Synapse ids present in the annotation, ascending. An id counts as present
// if either of its bands is.
std::vector<std::uint32_t> synapse_ids(const AnnotationVolume& ann);

// Checks the paired-band invariant and returns one surface per synapse,
// sorted by synapse id. Throws MalformedAnnotation naming the first bad id.
std::vector<CleftSurface> extract_cleft_surfaces(const AnnotationVolume& ann);

// exp(-d^2 / 2 sigma^2) * (2 / (1 + exp(-alpha d)) - 1), evaluated through the
// equivalent tanh(alpha d / 2) form; 0 beyond the cutoff.
double proximity_value(double signed_distance_nm, const TargetParams& p);

// Signed proximity field: magnitude from the distance to the nearest cleft,
// sign from whichever band of that synapse is closer (pre wins ties).
ProximityVolume make_target(const AnnotationVolume& ann, const TargetParams& p);

}  // namespace synaptik
