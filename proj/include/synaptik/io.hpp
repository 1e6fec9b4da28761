#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "synaptik/candidates.hpp"
#include "synaptik/evaluation.hpp"
#include "synaptik/groundtruth.hpp"
#include "synaptik/pruning.hpp"

// Text formats exchanged between pipeline stages. Writers are byte-stable:
// the same values always produce the same file. Readers throw FormatError
// on anything malformed.
namespace synaptik::io {

namespace fs = std::filesystem;

// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

// Candidates: one JSON object per line, in candidate order. Components are
// referenced by id and resolved against label volumes on reading.
void write_candidates(const fs::path& path, const std::vector<Candidate>& cands);
std::vector<Candidate> read_candidates(const fs::path& path, const ComponentSet& pre,
                                       const ComponentSet& post);

// Component label volume (value = id + 1) as svol1 u32.
void write_component_labels(const fs::path& header, const ComponentSet& set);
ComponentSet read_component_labels(const fs::path& header, Polarity polarity);

// Features: CSV with a header row; first column is the candidate id.
void write_features(const fs::path& path, const std::vector<Candidate>& cands,
                    const std::vector<FeatureVector>& features);
// Rows must list exactly the ids of `cands`, in the same order.
std::vector<FeatureVector> read_features(const fs::path& path, const std::vector<Candidate>& cands);

void write_scorer(const fs::path& path, const LogisticScorer& scorer);
LogisticScorer read_scorer(const fs::path& path);

// {"candidate":id,"score":s} per line. A repeated id is an IngestionError.
void write_scores(const fs::path& path, const std::vector<Candidate>& cands);
std::map<std::uint64_t, double> read_scores(const fs::path& path);

// {"synapse_id":k,"pre_cell":a,"post_cell":b} per line; spans come from the
// annotation volume.
void write_connections(const fs::path& path, const std::vector<GroundTruthConnection>& gt);
std::vector<GroundTruthConnection> read_connections(const fs::path& path,
                                                    const AnnotationVolume& annotation);

std::string report_json(const MatchReport& report);

std::string pr_csv(const PRCurve& curve);
PRCurve parse_pr_csv(const std::string& text);
// Standalone SVG of precision against recall.
std::string pr_svg(const PRCurve& curve);

}  // namespace synaptik::io
