#include "synaptik/groundtruth.hpp"

#include <unordered_map>

#include "synaptik/parallel.hpp"

namespace synaptik {

void attach_spans(std::vector<GroundTruthConnection>& connections, const AnnotationVolume& ann) {
  std::map<std::uint32_t, std::vector<std::uint64_t>> spans;
  for (std::size_t i = 0; i < ann.size(); ++i) {
    if (const std::uint32_t l = ann[i]) spans[(l + 1) / 2].push_back(i);
  }
  for (auto& c : connections) {
    if (c.pre_cell == c.post_cell) {
      throw ParameterError("connection " + std::to_string(c.synapse_id) +
                           " has identical pre and post cells");
    }
    auto it = spans.find(c.synapse_id);
    if (it == spans.end()) {
      throw ParameterError("connection " + std::to_string(c.synapse_id) +
                           " has no annotated span");
    }
    c.span = it->second;
  }
}

SegmentMap map_segments(const SegmentationVolume& s, const SegmentationVolume& g) {
  require_same_shape(s, g, "segmentation vs groundtruth segmentation");
  using Counts = std::unordered_map<std::uint64_t, std::uint64_t>;
  std::vector<Counts> partial(chunk_count(s.size()));
  parallel_chunks(s.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (s[i] == 0) continue;
      ++partial[c][(std::uint64_t(s[i]) << 32) | g[i]];
    }
  });
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> counts;
  for (const auto& p : partial) {
    for (const auto& [key, n] : p) {
      counts[{std::uint32_t(key >> 32), std::uint32_t(key & 0xffffffffu)}] += n;
    }
  }
  SegmentMap out;
  std::uint32_t current = 0;
  std::uint64_t best = 0;
  // Iteration is sorted by (segment, cell), so strict '>' keeps the
  // smaller cell on ties; cell 0 only wins if nothing else overlaps.
  for (const auto& [key, n] : counts) {
    const auto [seg, cell] = key;
    if (seg != current || !out.count(seg)) {
      current = seg;
      out[seg] = cell;
      best = cell == 0 ? 0 : n;
      continue;
    }
    if (cell != 0 && (out[seg] == 0 || n > best)) {
      out[seg] = cell;
      best = n;
    }
  }
  return out;
}

std::uint64_t sorted_overlap(const std::vector<std::uint64_t>& a,
                             const std::vector<std::uint64_t>& b) {
  std::uint64_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace synaptik
