#include "synaptik/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "synaptik/svol_io.hpp"

namespace synaptik::io {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(line);
  }
  return out;
}

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line + 1);
}

json parse_line(const fs::path& path, std::size_t i, const std::string& line) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw FormatError(where(path, i) + ": expected a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw FormatError(where(path, i) + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const fs::path& path, std::size_t i) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(where(path, i) + ": missing field \"" + key + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FormatError(where(path, i) + ": bad value for \"" + key + "\"");
  }
}

std::uint64_t unsigned_field(const json& j, const char* key, const fs::path& path, std::size_t i) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    throw FormatError(where(path, i) + ": \"" + key + "\" must be a nonnegative integer");
  }
  return it->get<std::uint64_t>();
}

std::uint32_t id32(const json& j, const char* key, const fs::path& path, std::size_t i) {
  const auto v = unsigned_field(j, key, path, i);
  if (v > 0xffffffffu) throw FormatError(where(path, i) + ": \"" + key + "\" out of range");
  return static_cast<std::uint32_t>(v);
}

double parse_double(const std::string& s) {
  double v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) throw FormatError("not a number: \"" + s + "\"");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

template <std::size_t N>
json array_json(const std::array<double, N>& a) {
  return json(std::vector<double>(a.begin(), a.end()));
}

template <std::size_t N>
std::array<double, N> array_from(const json& j, const char* key, const fs::path& path) {
  const auto v = field<std::vector<double>>(j, key, path, 0);
  if (v.size() != N) {
    throw FormatError(path.string() + ": \"" + key + "\" needs " + std::to_string(N) + " values");
  }
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

void write_candidates(const fs::path& path, const std::vector<Candidate>& cands) {
  std::string text;
  for (const auto& c : cands) {
    ojson j;
    j["id"] = c.id;
    j["pre_comp"] = c.pre_site.component->id;
    j["post_comp"] = c.post_site.component->id;
    j["pre_seg"] = c.pre_site.segment_id;
    j["post_seg"] = c.post_site.segment_id;
    j["pre_overlap"] = c.pre_site.overlap_voxels;
    j["post_overlap"] = c.post_site.overlap_voxels;
    j["anchor_zyx"] = {c.anchor_zyx.z, c.anchor_zyx.y, c.anchor_zyx.x};
    j["anchor_dist_nm"] = c.anchor_dist_nm;
    j["score"] = c.score ? ojson(*c.score) : ojson(nullptr);
    text += j.dump() + "\n";
  }
  write_text(path, text);
}

std::vector<Candidate> read_candidates(const fs::path& path, const ComponentSet& pre,
                                       const ComponentSet& post) {
  const auto lines = lines_of(read_text(path));
  std::vector<Candidate> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const json j = parse_line(path, i, lines[i]);
    Candidate c;
    c.id = unsigned_field(j, "id", path, i);
    const auto pre_id = unsigned_field(j, "pre_comp", path, i);
    const auto post_id = unsigned_field(j, "post_comp", path, i);
    c.pre_site = {pre.find(pre_id), id32(j, "pre_seg", path, i),
                  unsigned_field(j, "pre_overlap", path, i)};
    c.post_site = {post.find(post_id), id32(j, "post_seg", path, i),
                   unsigned_field(j, "post_overlap", path, i)};
    if (!c.pre_site.component || !c.post_site.component) {
      throw FormatError(where(path, i) + ": component id not present in the label volumes");
    }
    const auto a = field<std::vector<std::int64_t>>(j, "anchor_zyx", path, i);
    if (a.size() != 3) throw FormatError(where(path, i) + ": anchor_zyx needs 3 values");
    c.anchor_zyx = {a[0], a[1], a[2]};
    if (!contains(pre.shape(), c.anchor_zyx)) {
      throw FormatError(where(path, i) + ": anchor outside the volume");
    }
    c.anchor_dist_nm = field<double>(j, "anchor_dist_nm", path, i);
    if (auto s = j.find("score"); s != j.end() && !s->is_null()) {
      if (!s->is_number()) throw FormatError(where(path, i) + ": score must be a number or null");
      c.score = s->get<double>();
    }
    if (!out.empty() && c.id <= out.back().id) {
      throw FormatError(where(path, i) + ": candidate ids must be strictly increasing");
    }
    out.push_back(std::move(c));
  }
  return out;
}

void write_component_labels(const fs::path& header, const ComponentSet& set) {
  svol::write(header, set.labels);
}

ComponentSet read_component_labels(const fs::path& header, Polarity polarity) {
  Labeling l;
  l.labels = svol::read<std::uint32_t>(header);
  l.components = components_from_labels(l.labels, polarity);
  return make_component_set(std::move(l), polarity);
}

void write_features(const fs::path& path, const std::vector<Candidate>& cands,
                    const std::vector<FeatureVector>& features) {
  if (cands.size() != features.size()) throw ParameterError("one feature row per candidate");
  std::string text = "candidate";
  for (const char* name : kFeatureNames) text += std::string(",") + name;
  text += "\n";
  for (std::size_t i = 0; i < cands.size(); ++i) {
    text += std::to_string(cands[i].id);
    for (double v : features[i]) text += "," + format_double(v);
    text += "\n";
  }
  write_text(path, text);
}

std::vector<FeatureVector> read_features(const fs::path& path,
                                         const std::vector<Candidate>& cands) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty()) throw FormatError(path.string() + ": missing header");
  const auto header = split(lines[0], ',');
  if (header.size() != kFeatureCount + 1 || header[0] != "candidate") {
    throw FormatError(path.string() + ": unexpected header");
  }
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    if (header[k + 1] != kFeatureNames[k]) {
      throw FormatError(path.string() + ": unexpected column \"" + header[k + 1] + "\"");
    }
  }
  if (lines.size() - 1 != cands.size()) {
    throw FormatError(path.string() + ": " + std::to_string(lines.size() - 1) + " rows for " +
                      std::to_string(cands.size()) + " candidates");
  }
  std::vector<FeatureVector> out(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto cells = split(lines[i + 1], ',');
    if (cells.size() != kFeatureCount + 1) throw FormatError(where(path, i + 1) + ": bad row");
    std::uint64_t id = 0;
    const char* end = cells[0].data() + cells[0].size();
    if (auto [p, ec] = std::from_chars(cells[0].data(), end, id); ec != std::errc{} || p != end) {
      throw FormatError(where(path, i + 1) + ": bad candidate id");
    }
    if (id != cands[i].id) {
      throw FormatError(where(path, i + 1) + ": row does not match candidate order");
    }
    try {
      for (std::size_t k = 0; k < kFeatureCount; ++k) out[i][k] = parse_double(cells[k + 1]);
    } catch (const FormatError& e) {
      throw FormatError(where(path, i + 1) + ": " + e.what());
    }
  }
  return out;
}

void write_scorer(const fs::path& path, const LogisticScorer& scorer) {
  ojson j;
  j["weights"] = array_json(scorer.weights);
  j["means"] = array_json(scorer.means);
  j["stds"] = array_json(scorer.stds);
  j["trained_on"] = scorer.trained_on;
  write_text(path, j.dump(2) + "\n");
}

LogisticScorer read_scorer(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw FormatError(path.string() + ": expected a JSON object");
  LogisticScorer s;
  s.weights = array_from<kFeatureCount>(j, "weights", path);
  s.means = array_from<kFeatureCount - 1>(j, "means", path);
  s.stds = array_from<kFeatureCount - 1>(j, "stds", path);
  s.trained_on = field<std::string>(j, "trained_on", path, 0);
  try {
    s.validate();
  } catch (const ParameterError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return s;
}

void write_scores(const fs::path& path, const std::vector<Candidate>& cands) {
  std::string text;
  for (const auto& c : cands) {
    if (!c.score) throw ParameterError("candidate " + std::to_string(c.id) + " is unscored");
    ojson j;
    j["candidate"] = c.id;
    j["score"] = *c.score;
    text += j.dump() + "\n";
  }
  write_text(path, text);
}

std::map<std::uint64_t, double> read_scores(const fs::path& path) {
  const auto lines = lines_of(read_text(path));
  std::map<std::uint64_t, double> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const json j = parse_line(path, i, lines[i]);
    const auto id = unsigned_field(j, "candidate", path, i);
    auto s = j.find("score");
    if (s == j.end() || !s->is_number()) {
      throw FormatError(where(path, i) + ": score must be a number");
    }
    if (!out.emplace(id, s->get<double>()).second) {
      throw IngestionError(where(path, i) + ": duplicate score for candidate " +
                           std::to_string(id));
    }
  }
  return out;
}

void write_connections(const fs::path& path, const std::vector<GroundTruthConnection>& gt) {
  std::string text;
  for (const auto& g : gt) {
    ojson j;
    j["synapse_id"] = g.synapse_id;
    j["pre_cell"] = g.pre_cell;
    j["post_cell"] = g.post_cell;
    text += j.dump() + "\n";
  }
  write_text(path, text);
}

std::vector<GroundTruthConnection> read_connections(const fs::path& path,
                                                    const AnnotationVolume& annotation) {
  const auto lines = lines_of(read_text(path));
  std::vector<GroundTruthConnection> out;
  std::set<std::uint32_t> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const json j = parse_line(path, i, lines[i]);
    GroundTruthConnection g;
    g.synapse_id = id32(j, "synapse_id", path, i);
    g.pre_cell = id32(j, "pre_cell", path, i);
    g.post_cell = id32(j, "post_cell", path, i);
    if (g.synapse_id == 0 || !seen.insert(g.synapse_id).second) {
      throw FormatError(where(path, i) + ": synapse ids must be positive and unique");
    }
    out.push_back(g);
  }
  attach_spans(out, annotation);
  return out;
}

std::string report_json(const MatchReport& r) {
  const PRPoint p = pr_point(r);
  ojson j;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f"] = p.f_score;
  j["predictions"] = ojson::array();
  for (const auto& v : r.predictions) {
    ojson e;
    e["candidate"] = v.candidate_id;
    e["verdict"] = to_string(v.verdict);
    e["synapse_id"] = v.synapse_id ? ojson(*v.synapse_id) : ojson(nullptr);
    j["predictions"].push_back(e);
  }
  j["ground_truth"] = ojson::array();
  for (const auto& g : r.ground_truth) {
    ojson e;
    e["synapse_id"] = g.synapse_id;
    e["matched"] = g.matched;
    e["candidate"] = g.candidate_id ? ojson(*g.candidate_id) : ojson(nullptr);
    j["ground_truth"].push_back(e);
  }
  return j.dump(2) + "\n";
}

std::string pr_csv(const PRCurve& curve) {
  std::string text = "theta,precision,recall,f\n";
  for (const auto& p : curve) {
    text += format_double(p.theta) + "," + format_double(p.precision) + "," +
            format_double(p.recall) + "," + format_double(p.f_score) + "\n";
  }
  return text;
}

PRCurve parse_pr_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "theta,precision,recall,f") {
    throw FormatError("PR CSV: unexpected header");
  }
  PRCurve curve;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 4) throw FormatError("PR CSV: bad row " + std::to_string(i + 1));
    curve.push_back({parse_double(cells[0]), parse_double(cells[1]), parse_double(cells[2]),
                     parse_double(cells[3])});
  }
  return curve;
}

std::string pr_svg(const PRCurve& curve) {
  // 400x400 plot area with a 50 px margin; recall on x, precision on y.
  constexpr double kMargin = 50, kSize = 400;
  auto px = [&](double r) { return format_double(kMargin + r * kSize); };
  auto py = [&](double p) { return format_double(kMargin + (1.0 - p) * kSize); };
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" "
      "viewBox=\"0 0 500 500\">\n"
      "<rect x=\"50\" y=\"50\" width=\"400\" height=\"400\" fill=\"none\" stroke=\"black\"/>\n"
      "<text x=\"250\" y=\"485\" text-anchor=\"middle\" font-size=\"14\">recall</text>\n"
      "<text x=\"15\" y=\"250\" text-anchor=\"middle\" font-size=\"14\" "
      "transform=\"rotate(-90 15 250)\">precision</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    svg += "<text x=\"" + px(v) + "\" y=\"468\" text-anchor=\"middle\" font-size=\"11\">" +
           format_double(v) + "</text>\n";
    svg += "<text x=\"44\" y=\"" + py(v) + "\" text-anchor=\"end\" font-size=\"11\">" +
           format_double(v) + "</text>\n";
  }
  std::string points;
  for (const auto& p : curve) {
    if (!points.empty()) points += " ";
    points += px(p.recall) + "," + py(p.precision);
  }
  svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"" + points +
         "\"/>\n";
  for (const auto& p : curve) {
    svg += "<circle cx=\"" + px(p.recall) + "\" cy=\"" + py(p.precision) +
           "\" r=\"3\" fill=\"steelblue\"><title>theta " + format_double(p.theta) +
           "</title></circle>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace synaptik::io
