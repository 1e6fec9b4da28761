#include "synaptik/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "synaptik/parallel.hpp"

namespace synaptik {

namespace {

// What matching needs to know about one prediction, computed once.
struct PredictionFacts {
  std::uint64_t id = 0;
  double score = 0;
  std::uint32_t pre_cell = 0, post_cell = 0;
  std::vector<std::size_t> overlapped;  // gt indices whose span is hit
};

std::uint32_t lookup(const SegmentMap& m, std::uint32_t seg, std::uint64_t candidate) {
  auto it = m.find(seg);
  if (it == m.end()) {
    throw EvaluationError("prediction " + std::to_string(candidate) +
                          " references unknown segment " + std::to_string(seg));
  }
  return it->second;
}

std::vector<PredictionFacts> gather_facts(const std::vector<Candidate>& preds,
                                          const std::vector<GroundTruthConnection>& gt,
                                          const SegmentMap& seg_map, const MatchOptions& opts) {
  // Span overlap per component, shared by every candidate using it.
  std::map<const Component*, std::vector<std::uint64_t>> per_component;
  for (const auto& p : preds) {
    per_component.try_emplace(p.pre_site.component.get());
    per_component.try_emplace(p.post_site.component.get());
  }
  std::vector<std::pair<const Component* const, std::vector<std::uint64_t>>*> work;
  for (auto& entry : per_component) work.push_back(&entry);
  parallel_for(work.size(), [&](std::size_t i) {
    auto& [component, counts] = *work[i];
    counts.resize(gt.size());
    for (std::size_t g = 0; g < gt.size(); ++g) counts[g] = sorted_overlap(component->voxels, gt[g].span);
  });

  std::vector<PredictionFacts> facts;
  facts.reserve(preds.size());
  for (const auto& p : preds) {
    PredictionFacts f;
    f.id = p.id;
    f.score = p.score.value_or(-std::numeric_limits<double>::infinity());
    f.pre_cell = lookup(seg_map, p.pre_site.segment_id, p.id);
    f.post_cell = lookup(seg_map, p.post_site.segment_id, p.id);
    const auto& a = per_component.at(p.pre_site.component.get());
    const auto& b = per_component.at(p.post_site.component.get());
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (a[g] + b[g] >= opts.min_overlap_voxels) f.overlapped.push_back(g);
    }
    facts.push_back(std::move(f));
  }
  std::sort(facts.begin(), facts.end(), [](const PredictionFacts& x, const PredictionFacts& y) {
    return x.score != y.score ? x.score > y.score : x.id < y.id;
  });
  return facts;
}

// `facts` must already be in processing order.
MatchReport greedy_match(const std::vector<const PredictionFacts*>& facts,
                         const std::vector<GroundTruthConnection>& gt) {
  MatchReport r;
  r.ground_truth.reserve(gt.size());
  for (const auto& g : gt) r.ground_truth.push_back({g.synapse_id, false, std::nullopt});
  for (const PredictionFacts* f : facts) {
    PredictionVerdict v{f->id, f->overlapped.empty() ? Verdict::fp_no_overlap
                                                     : Verdict::fp_wrong_pair,
                        std::nullopt};
    std::optional<std::size_t> duplicate_of;
    for (std::size_t g : f->overlapped) {
      if (gt[g].pre_cell != f->pre_cell || gt[g].post_cell != f->post_cell) continue;
      if (!r.ground_truth[g].matched) {
        r.ground_truth[g].matched = true;
        r.ground_truth[g].candidate_id = f->id;
        v.verdict = Verdict::tp;
        v.synapse_id = gt[g].synapse_id;
        duplicate_of.reset();
        break;
      }
      if (!duplicate_of) duplicate_of = g;
    }
    if (duplicate_of) {
      v.verdict = Verdict::fp_duplicate;
      v.synapse_id = gt[*duplicate_of].synapse_id;
    }
    (v.verdict == Verdict::tp ? r.tp : r.fp) += 1;
    r.predictions.push_back(v);
  }
  for (const auto& s : r.ground_truth) r.fn += s.matched ? 0 : 1;
  return r;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::tp: return "TP";
    case Verdict::fp_wrong_pair: return "FP-wrong-pair";
    case Verdict::fp_no_overlap: return "FP-no-overlap";
    case Verdict::fp_duplicate: return "FP-duplicate";
  }
  return "?";
}

MatchReport match_predictions(const std::vector<Candidate>& predictions,
                              const std::vector<GroundTruthConnection>& gt,
                              const SegmentMap& seg_map, const MatchOptions& opts) {
  const auto facts = gather_facts(predictions, gt, seg_map, opts);
  std::vector<const PredictionFacts*> order;
  for (const auto& f : facts) order.push_back(&f);
  return greedy_match(order, gt);
}

PRPoint pr_point(const MatchReport& r) {
  if (r.tp + r.fn == 0) throw ParameterError("precision/recall undefined without ground truth");
  PRPoint p;
  p.precision = (r.tp + r.fp) == 0 ? 1.0 : double(r.tp) / double(r.tp + r.fp);
  p.recall = double(r.tp) / double(r.tp + r.fn);
  p.f_score = (p.precision + p.recall) == 0.0
                  ? 0.0
                  : 2.0 * p.precision * p.recall / (p.precision + p.recall);
  return p;
}

PRCurve pr_sweep(const std::vector<Candidate>& scored, const std::vector<GroundTruthConnection>& gt,
                 const SegmentMap& seg_map, const std::vector<double>& thetas,
                 const MatchOptions& opts) {
  for (std::size_t i = 1; i < thetas.size(); ++i) {
    if (!(thetas[i] > thetas[i - 1])) throw ParameterError("thetas must be strictly increasing");
  }
  for (const auto& c : scored) {
    if (!c.score) throw ParameterError("candidate " + std::to_string(c.id) + " is unscored");
  }
  const auto facts = gather_facts(scored, gt, seg_map, opts);
  PRCurve curve;
  for (double theta : thetas) {
    std::vector<const PredictionFacts*> kept;
    for (const auto& f : facts) {
      if (f.score >= theta) kept.push_back(&f);
    }
    PRPoint p = pr_point(greedy_match(kept, gt));
    p.theta = theta;
    curve.push_back(p);
  }
  return curve;
}

PRPoint best_f(const PRCurve& curve) {
  if (curve.empty()) throw ParameterError("empty PR curve");
  PRPoint best = curve.front();
  for (const auto& p : curve) {
    if (p.f_score > best.f_score) best = p;
  }
  return best;
}

}  // namespace synaptik
