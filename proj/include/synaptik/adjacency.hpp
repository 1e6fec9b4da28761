#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "synaptik/volume.hpp"

namespace synaptik {

// Unordered segment pair, stored with first < second.
using SegmentPair = std::pair<std::uint32_t, std::uint32_t>;

inline SegmentPair make_segment_pair(std::uint32_t a, std::uint32_t b) {
  return a < b ? SegmentPair{a, b} : SegmentPair{b, a};
}

// Contact area per pair = number of 6-neighborhood voxel pairs carrying the
// two (distinct, nonzero) ids.
using AdjacencyMap = std::map<SegmentPair, std::uint64_t>;

AdjacencyMap segment_adjacency(const SegmentationVolume& seg);

// Contact area between two specific segments inside the half-open box
// [lo, hi). Only voxel pairs with both ends inside the box count.
std::uint64_t contact_area_in_box(const SegmentationVolume& seg, std::uint32_t a, std::uint32_t b,
                                  const Coord& lo, const Coord& hi);

inline std::uint64_t contact_area(const AdjacencyMap& adj, std::uint32_t a, std::uint32_t b) {
  auto it = adj.find(make_segment_pair(a, b));
  return it == adj.end() ? 0 : it->second;
}

}  // namespace synaptik
