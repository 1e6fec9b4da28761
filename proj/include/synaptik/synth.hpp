#pragma once

#include <cstdint>
#include <vector>

#include "synaptik/groundtruth.hpp"
#include "synaptik/target.hpp"
#include "synaptik/volume.hpp"

namespace synaptik {

struct PhantomConfig {
  Shape dims{32, 192, 192};
  Spacing voxel_size{4.0, 4.0, 30.0};
  std::uint32_t n_cells = 25;
  std::uint32_t n_synapses = 15;
  double band_thickness_nm = 40.0;
  std::uint8_t membrane_gray = 60;
  std::uint8_t cytoplasm_gray = 180;
  double gray_noise_std = 8.0;
  std::uint32_t n_distractors = 0;  // handed to oracle_predict by the pipeline
  std::uint64_t seed = 7;

  // Synapse geometry: the annotated patch is the part of a cell interface
  // within patch_radius_nm of its center; centers of different synapses
  // stay at least min_synapse_separation_nm apart.
  double patch_radius_nm = 40.0;
  double min_synapse_separation_nm = 200.0;
  double min_cell_seed_distance_nm = 150.0;

  TargetParams target{};

  void validate() const;
};

struct PhantomBundle {
  ImageVolume image;
  SegmentationVolume gt_seg;
  AnnotationVolume annotation;
  std::vector<GroundTruthConnection> connections;  // spans attached
  ProximityVolume target;
};

// Voronoi cells from seeded random sites, synapses painted on distinct
// adjacent cell pairs (lower cell id is pre), a membrane-contrast image and
// the exact target. Identical configs give identical bundles.
PhantomBundle generate_phantom(const PhantomConfig& cfg);

struct OracleParams {
  double noise_std = 0.0;
  std::uint32_t n_distractors = 0;
  std::uint64_t seed = 7;
  double blob_sigma_nm = 30.0;
  double blob_amplitude = 1.0;
  // Blob centers keep at least this distance from any nonzero target voxel.
  double exclusion_nm = 150.0;
};

// Stand-in for a trained voxel predictor: target plus i.i.d. Gaussian noise
// plus signed Gaussian blobs away from real synapses, clamped to [-1, 1].
ProximityVolume oracle_predict(const ProximityVolume& target, const OracleParams& params);

}  // namespace synaptik
