#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "synaptik/volume.hpp"

namespace synaptik {

struct Site {
  Coord coord;
  std::uint32_t id = 0;  // nonzero
};

struct FeatureTransform {
  Volume<double> distance_nm;
  LabelVolume nearest_id;
};

// Exact anisotropic Euclidean distance (nm) from every voxel to the nearest
// site, plus that site's id. Equidistant sites resolve to the smallest id.
FeatureTransform feature_transform(const Shape& shape, std::span<const Site> sites,
                                   const Spacing& spacing);

// Squared-distance form used internally, kept in double precision.
struct SquaredField {
  std::vector<double> dist_sq;     // +inf where no site was found
  std::vector<std::uint32_t> id;   // 0 where no site was found
};

// A site sitting either on a voxel center (half_axis = none) or on the
// midpoint between `base` and its +1 neighbor along one axis.
enum class HalfAxis : std::uint8_t { none, z, y, x };

struct HalfSite {
  Coord base;
  HalfAxis half_axis = HalfAxis::none;
  std::uint32_t id = 0;
};

// Nearest-site field for sites that may sit on face midpoints. Sites are
// grouped by offset class; each class is an exact separable transform on a
// shifted lattice and the classes are merged voxelwise.
SquaredField nearest_half_sites(const Shape& shape, const Spacing& spacing,
                                std::span<const HalfSite> sites);

}  // namespace synaptik
