#include "synaptik/pruning.hpp"

#include <algorithm>
#include <cmath>

#include "synaptik/parallel.hpp"

namespace synaptik {

namespace {

constexpr std::size_t kBias = kFeatureCount - 1;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0;
  for (std::size_t j = 0; j < kFeatureCount; ++j) s += a[j] * b[j];
  return s;
}

double mean_abs(const ProximityVolume& prox, const Component& c) {
  double s = 0;
  for (auto v : c.voxels) s += std::abs(static_cast<double>(prox[v]));
  return s / static_cast<double>(c.voxels.size());
}

}  // namespace

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "pre_size",         "post_size",          "pre_mean_abs_prox", "post_mean_abs_prox",
    "pre_overlap",      "post_overlap",       "anchor_dist_nm",    "window_contact_area",
    "pre_overlap_frac", "post_overlap_frac",  "window_mean_gray",  "bias"};

void WindowSpec::validate(const Shape& volume) const {
  if (z < 1 || y < 1 || x < 1) throw ParameterError("window extents must be at least 1");
  if (z > volume.z || y > volume.y || x > volume.x) {
    throw ParameterError("window extents must not exceed the volume dims");
  }
}

Window window_around(const Coord& anchor, const WindowSpec& spec, const Shape& volume) {
  if (!contains(volume, anchor)) throw ParameterError("anchor lies outside the volume");
  auto span = [](std::int64_t a, std::size_t size, std::size_t dim) {
    const std::int64_t lo = a - static_cast<std::int64_t>(size / 2);
    const std::int64_t hi = lo + static_cast<std::int64_t>(size);
    return std::pair{std::max<std::int64_t>(0, lo),
                     std::min<std::int64_t>(static_cast<std::int64_t>(dim), hi)};
  };
  const auto [z0, z1] = span(anchor.z, spec.z, volume.z);
  const auto [y0, y1] = span(anchor.y, spec.y, volume.y);
  const auto [x0, x1] = span(anchor.x, spec.x, volume.x);
  return {{z0, y0, x0}, {z1, y1, x1}};
}

FeatureVector extract_features(const Candidate& cand, const ImageVolume& image,
                               const ProximityVolume& prox, const SegmentationVolume& seg,
                               const WindowSpec& spec) {
  require_same_shape(image, prox, "image vs proximity");
  require_same_shape(image, seg, "image vs segmentation");
  spec.validate(image.shape());
  const Window w = window_around(cand.anchor_zyx, spec, image.shape());
  const Component& pre = *cand.pre_site.component;
  const Component& post = *cand.post_site.component;

  double gray = 0;
  for (std::int64_t z = w.lo.z; z < w.hi.z; ++z)
    for (std::int64_t y = w.lo.y; y < w.hi.y; ++y)
      for (std::int64_t x = w.lo.x; x < w.hi.x; ++x)
        gray += image.at(std::size_t(z), std::size_t(y), std::size_t(x));

  FeatureVector f{};
  f[0] = static_cast<double>(pre.size());
  f[1] = static_cast<double>(post.size());
  f[2] = mean_abs(prox, pre);
  f[3] = mean_abs(prox, post);
  f[4] = static_cast<double>(cand.pre_site.overlap_voxels);
  f[5] = static_cast<double>(cand.post_site.overlap_voxels);
  f[6] = cand.anchor_dist_nm;
  f[7] = static_cast<double>(contact_area_in_box(seg, cand.pre_site.segment_id,
                                                 cand.post_site.segment_id, w.lo, w.hi));
  f[8] = f[4] / f[0];
  f[9] = f[5] / f[1];
  f[10] = gray / static_cast<double>(w.voxels());
  f[kBias] = 1.0;
  return f;
}

std::vector<FeatureVector> extract_all_features(const std::vector<Candidate>& cands,
                                                const ImageVolume& image,
                                                const ProximityVolume& prox,
                                                const SegmentationVolume& seg,
                                                const WindowSpec& window) {
  std::vector<FeatureVector> out(cands.size());
  parallel_for(cands.size(), [&](std::size_t i) {
    out[i] = extract_features(cands[i], image, prox, seg, window);
  });
  return out;
}

std::vector<int> label_candidates(const std::vector<Candidate>& cands, const SegmentationVolume& s,
                                  const SegmentationVolume& g,
                                  const std::vector<GroundTruthConnection>& gt) {
  const SegmentMap seg_map = map_segments(s, g);
  auto cell = [&](std::uint32_t segment) {
    auto it = seg_map.find(segment);
    return it == seg_map.end() ? 0u : it->second;
  };
  std::vector<int> labels(cands.size(), 0);
  parallel_for(cands.size(), [&](std::size_t i) {
    const Candidate& c = cands[i];
    const std::uint32_t pre_cell = cell(c.pre_site.segment_id);
    const std::uint32_t post_cell = cell(c.post_site.segment_id);
    for (const auto& conn : gt) {
      if (conn.pre_cell != pre_cell || conn.post_cell != post_cell) continue;
      if (sorted_overlap(c.pre_site.component->voxels, conn.span) > 0 ||
          sorted_overlap(c.post_site.component->voxels, conn.span) > 0) {
        labels[i] = 1;
        break;
      }
    }
  });
  return labels;
}

void TrainConfig::validate() const {
  if (!(std::isfinite(learning_rate) && learning_rate > 0)) {
    throw ParameterError("learning_rate must be positive");
  }
  if (epochs < 1) throw ParameterError("epochs must be positive");
  if (!(std::isfinite(l2) && l2 >= 0)) throw ParameterError("l2 must be nonnegative");
}

FeatureVector LogisticScorer::standardize(const FeatureVector& f) const {
  FeatureVector out = f;
  for (std::size_t j = 0; j < kBias; ++j) out[j] = (f[j] - means[j]) / stds[j];
  out[kBias] = 1.0;
  return out;
}

double LogisticScorer::score(const FeatureVector& f) const {
  return sigmoid(dot(weights, standardize(f)));
}

void LogisticScorer::validate() const {
  for (double w : weights) {
    if (!std::isfinite(w)) throw ParameterError("scorer weights must be finite");
  }
  for (std::size_t j = 0; j < kBias; ++j) {
    if (!std::isfinite(means[j]) || !(std::isfinite(stds[j]) && stds[j] > 0)) {
      throw ParameterError("scorer standardization must be finite with positive stds");
    }
  }
}

double logistic_loss(const FeatureVector& w, const std::vector<FeatureVector>& x,
                     const std::vector<int>& y, double l2) {
  double loss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = dot(w, x[i]);
    loss += softplus(z) - (y[i] ? z : 0.0);
  }
  loss /= static_cast<double>(x.size());
  double reg = 0;
  for (std::size_t j = 0; j < kBias; ++j) reg += w[j] * w[j];
  return loss + 0.5 * l2 * reg;
}

FeatureVector logistic_gradient(const FeatureVector& w, const std::vector<FeatureVector>& x,
                                const std::vector<int>& y, double l2) {
  FeatureVector g{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = sigmoid(dot(w, x[i])) - (y[i] ? 1.0 : 0.0);
    for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += r * x[i][j];
  }
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    g[j] /= static_cast<double>(x.size());
    if (j != kBias) g[j] += l2 * w[j];
  }
  return g;
}

TrainResult train_scorer(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                         const TrainConfig& cfg, std::string trained_on) {
  cfg.validate();
  if (features.size() != labels.size()) {
    throw TrainingError("feature and label counts differ");
  }
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw TrainingError("training set needs at least one positive and one negative label");
  }

  TrainResult r;
  LogisticScorer& s = r.scorer;
  s.trained_on = std::move(trained_on);
  const auto n = static_cast<double>(features.size());
  for (std::size_t j = 0; j < kBias; ++j) {
    double mean = 0;
    for (const auto& f : features) mean += f[j];
    mean /= n;
    double var = 0;
    for (const auto& f : features) var += (f[j] - mean) * (f[j] - mean);
    const double sd = std::sqrt(var / n);
    s.means[j] = mean;
    s.stds[j] = sd > 0 ? sd : 1.0;
  }
  std::vector<FeatureVector> x;
  x.reserve(features.size());
  for (const auto& f : features) x.push_back(s.standardize(f));

  const bool monotone = cfg.learning_rate <= 0.1;
  r.loss_history.reserve(cfg.epochs + 1);
  r.loss_history.push_back(logistic_loss(s.weights, x, labels, cfg.l2));
  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const FeatureVector g = logistic_gradient(s.weights, x, labels, cfg.l2);
    for (std::size_t j = 0; j < kFeatureCount; ++j) s.weights[j] -= cfg.learning_rate * g[j];
    const double loss = logistic_loss(s.weights, x, labels, cfg.l2);
    if (monotone && loss > r.loss_history.back() * (1.0 + 1e-12)) {
      throw TrainingError("logistic loss increased at epoch " + std::to_string(epoch));
    }
    r.loss_history.push_back(loss);
  }
  return r;
}

void score_candidates(std::vector<Candidate>& cands, const std::vector<FeatureVector>& features,
                      const LogisticScorer& scorer) {
  if (features.size() != cands.size()) throw ParameterError("one feature row per candidate");
  scorer.validate();
  parallel_for(cands.size(), [&](std::size_t i) { cands[i].score = scorer.score(features[i]); });
}

void apply_external_scores(std::vector<Candidate>& cands,
                           const std::map<std::uint64_t, double>& scores) {
  for (auto& c : cands) {
    auto it = scores.find(c.id);
    if (it == scores.end()) {
      throw IngestionError("no external score for candidate " + std::to_string(c.id));
    }
    if (!(it->second >= 0.0 && it->second <= 1.0)) {
      throw IngestionError("external score for candidate " + std::to_string(c.id) +
                           " is outside [0, 1]");
    }
    c.score = it->second;
  }
  if (scores.size() != cands.size()) {
    for (const auto& [id, s] : scores) {
      const bool known = std::any_of(cands.begin(), cands.end(),
                                     [&](const Candidate& c) { return c.id == id; });
      if (!known) throw IngestionError("external score for unknown candidate " + std::to_string(id));
    }
  }
}

std::vector<Candidate> prune(const std::vector<Candidate>& scored, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ParameterError("theta must lie in [0, 1]");
  std::vector<Candidate> kept;
  for (const auto& c : scored) {
    if (!c.score) throw ParameterError("candidate " + std::to_string(c.id) + " is unscored");
    if (*c.score >= theta) kept.push_back(c);
  }
  return kept;
}

}  // namespace synaptik
