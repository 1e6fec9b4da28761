#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "synaptik/volume.hpp"

namespace synaptik {

// A planted or annotated synaptic connection. span holds the linear indices
// of both annotated bands (2k-1 and 2k), sorted.
struct GroundTruthConnection {
  std::uint32_t synapse_id = 0;
  std::uint32_t pre_cell = 0;
  std::uint32_t post_cell = 0;
  std::vector<std::uint64_t> span;
};

// Fills each connection's span from the annotation and checks the record
// invariants (nonempty span, pre_cell != post_cell).
void attach_spans(std::vector<GroundTruthConnection>& connections, const AnnotationVolume& ann);

// Segment id -> cell id.
using SegmentMap = std::map<std::uint32_t, std::uint32_t>;

// Maps each nonzero segment of S to the G cell it overlaps most (ties to
// the smaller cell id). Segments that only cover G background map to 0.
SegmentMap map_segments(const SegmentationVolume& s, const SegmentationVolume& g);

// Size of the intersection of two sorted index lists.
std::uint64_t sorted_overlap(const std::vector<std::uint64_t>& a,
                             const std::vector<std::uint64_t>& b);

}  // namespace synaptik
