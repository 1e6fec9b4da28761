#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "synaptik/candidates.hpp"
#include "synaptik/groundtruth.hpp"
#include "synaptik/volume.hpp"

namespace synaptik {

// Extent of the window cut around each candidate's anchor.
struct WindowSpec {
  std::size_t z = 16, y = 160, x = 160;

  // Throws unless every extent is >= 1 and fits inside `volume`.
  void validate(const Shape& volume) const;
};

// Half-open voxel box.
struct Window {
  Coord lo, hi;
  std::size_t voxels() const {
    return std::size_t(hi.z - lo.z) * std::size_t(hi.y - lo.y) * std::size_t(hi.x - lo.x);
  }
};

// Window of the given extent starting size/2 before the anchor on each
// axis, clipped to the volume (never padded).
Window window_around(const Coord& anchor, const WindowSpec& spec, const Shape& volume);

inline constexpr std::size_t kFeatureCount = 12;
using FeatureVector = std::array<double, kFeatureCount>;

// Column names, in feature order. The bias column is last.
extern const std::array<const char*, kFeatureCount> kFeatureNames;

// Component-level quantities (sizes, mean |proximity|, overlaps and overlap
// fractions) describe whole components; contact area and mean gray are
// measured inside the clipped window.
FeatureVector extract_features(const Candidate& cand, const ImageVolume& image,
                               const ProximityVolume& prox, const SegmentationVolume& seg,
                               const WindowSpec& window);

// extract_features for every candidate, in candidate order.
std::vector<FeatureVector> extract_all_features(const std::vector<Candidate>& cands,
                                                const ImageVolume& image,
                                                const ProximityVolume& prox,
                                                const SegmentationVolume& seg,
                                                const WindowSpec& window);

// 1 iff the candidate connects the right cells in the right order and its
// components touch that synapse's span.
std::vector<int> label_candidates(const std::vector<Candidate>& cands, const SegmentationVolume& s,
                                  const SegmentationVolume& g,
                                  const std::vector<GroundTruthConnection>& gt);

struct TrainConfig {
  double learning_rate = 0.1;
  std::uint64_t epochs = 5000;
  double l2 = 1e-4;
  std::uint64_t seed = 0;  // unused: weights start at zero

  void validate() const;
};

// Logistic model over standardized features. means/stds cover the
// non-bias features only.
struct LogisticScorer {
  FeatureVector weights{};
  std::array<double, kFeatureCount - 1> means{};
  std::array<double, kFeatureCount - 1> stds{};
  std::string trained_on;

  LogisticScorer() { stds.fill(1.0); }

  FeatureVector standardize(const FeatureVector& f) const;
  double score(const FeatureVector& f) const;
  void validate() const;
};

// Mean logistic loss plus (l2 / 2) * |w|^2 over the non-bias weights, for
// already-standardized rows.
double logistic_loss(const FeatureVector& w, const std::vector<FeatureVector>& x,
                     const std::vector<int>& y, double l2);
FeatureVector logistic_gradient(const FeatureVector& w, const std::vector<FeatureVector>& x,
                                const std::vector<int>& y, double l2);

struct TrainResult {
  LogisticScorer scorer;
  std::vector<double> loss_history;  // loss before each epoch, then final
};

// Full-batch gradient descent from zero weights. Throws TrainingError on a
// single-class training set, or if the loss ever rises while the step is
// within the range where descent is guaranteed (learning_rate <= 0.1).
TrainResult train_scorer(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                         const TrainConfig& cfg, std::string trained_on = {});

void score_candidates(std::vector<Candidate>& cands, const std::vector<FeatureVector>& features,
                      const LogisticScorer& scorer);

// Externally produced scores keyed by candidate id. Every candidate must be
// covered exactly once; duplicates must be rejected by the reader.
void apply_external_scores(std::vector<Candidate>& cands,
                           const std::map<std::uint64_t, double>& scores);

// Candidates with score >= theta, in input order.
std::vector<Candidate> prune(const std::vector<Candidate>& scored, double theta);

}  // namespace synaptik
