#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synaptik/candidates.hpp"
#include "synaptik/groundtruth.hpp"

namespace synaptik {

// A detection counts only if it overlaps the annotated span of a synapse
// and links the right cells in the right direction.

enum class Verdict { tp, fp_wrong_pair, fp_no_overlap, fp_duplicate };

std::string to_string(Verdict v);

struct PredictionVerdict {
  std::uint64_t candidate_id = 0;
  Verdict verdict = Verdict::fp_no_overlap;
  std::optional<std::uint32_t> synapse_id;  // matched gt for TP / duplicate
};

struct GroundTruthStatus {
  std::uint32_t synapse_id = 0;
  bool matched = false;
  std::optional<std::uint64_t> candidate_id;
};

struct MatchReport {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  std::vector<PredictionVerdict> predictions;  // in processing order
  std::vector<GroundTruthStatus> ground_truth;  // in input order
};

struct MatchOptions {
  std::uint64_t min_overlap_voxels = 1;
};

// Greedy matching in descending score order (ties: ascending candidate
// id; unscored predictions last).
MatchReport match_predictions(const std::vector<Candidate>& predictions,
                              const std::vector<GroundTruthConnection>& gt,
                              const SegmentMap& seg_map, const MatchOptions& opts = {});

struct PRPoint {
  double theta = 0;
  double precision = 0;
  double recall = 0;
  double f_score = 0;
};

// Precision is 1 when nothing was predicted. Throws ParameterError when
// the report has no ground truth.
PRPoint pr_point(const MatchReport& report);

using PRCurve = std::vector<PRPoint>;

// One PR point per threshold over prune(candidates, theta). thetas must be
// strictly increasing.
PRCurve pr_sweep(const std::vector<Candidate>& scored, const std::vector<GroundTruthConnection>& gt,
                 const SegmentMap& seg_map, const std::vector<double>& thetas,
                 const MatchOptions& opts = {});

// Point with the highest F; earliest theta wins ties.
PRPoint best_f(const PRCurve& curve);

}  // namespace synaptik
