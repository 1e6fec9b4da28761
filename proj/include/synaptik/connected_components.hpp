#pragma once

#include <cstdint>
#include <vector>

#include "synaptik/volume.hpp"

namespace synaptik {

enum class Polarity { pre, post };

// A connected set of voxels. The id is the smallest linear index it
// contains, which makes labeling independent of scan order and chunking.
struct Component {
  std::uint64_t id = 0;
  Polarity polarity = Polarity::pre;
  std::vector<std::uint64_t> voxels;  // strictly increasing linear indices

  std::size_t size() const { return voxels.size(); }
};

struct Labeling {
  // Each foreground voxel holds (component id + 1); background is 0.
  LabelVolume labels;
  std::vector<Component> components;  // sorted by id
};

// Labels the nonzero voxels of `mask` under 6-, 18- or 26-connectivity.
Labeling connected_components(const MaskVolume& mask, int connectivity,
                              Polarity polarity = Polarity::pre);

// Rebuilds the component list from a label volume written by
// connected_components (value = id + 1).
std::vector<Component> components_from_labels(const LabelVolume& labels, Polarity polarity);

}  // namespace synaptik
