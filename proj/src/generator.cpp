#include "slicevec/generator.h"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "slicevec/error.h"
#include "slicevec/slicer.h"
#include "text_format.h"

namespace slicevec {

void GeneratorConfig::validate() const {
  if (top_n < 1) throw ConfigError("top_n must be at least 1");
}

Substitution substituteSlice(Slice s, const EmbeddingSpace& space, const GeneratorConfig& config) {
  config.validate();
  Substitution out;
  out.original = s;
  out.substitute = s;
  const auto query = space.vocab().find(s);
  if (!query) return out;
  out.in_vocabulary = true;
  if (s.isRest()) return out;
  if (space.norm(*query) == 0.0) {
    out.warning = s.canonical() + " has a zero vector; kept unchanged";
    return out;
  }

  const Vocabulary& vocab = space.vocab();
  const auto neighbors = nearestMatching(space, *query, config.top_n, [&](TokenId id) {
    if (vocab.isUnk(id) || (config.exclude_identity && id == *query)) return false;
    return !vocab.sliceOf(id)->isRest();
  });
  if (neighbors.empty()) {
    out.warning = "no substitution candidates for " + s.canonical();
    return out;
  }
  if (static_cast<int>(neighbors.size()) < config.top_n) {
    out.warning = "only " + std::to_string(neighbors.size()) + " candidates available for top_n " +
                  std::to_string(config.top_n);
  }

  std::array<int, 12> occurrences{};
  int total = 0;
  for (const Neighbor& n : neighbors) {
    const Slice c = *vocab.sliceOf(n.id);
    for (const int pc : c.pitchClasses()) {
      ++occurrences[static_cast<std::size_t>(pc)];
      ++total;
    }
  }
  for (std::size_t pc = 0; pc < 12; ++pc) out.weights[pc] = static_cast<double>(occurrences[pc]) / total;

  // Scores compare exactly as occurrence_sum / size; the reported score is
  // that ratio divided by the total.
  std::vector<int> occurrence_sums;
  for (const Neighbor& n : neighbors) {
    SubstitutionCandidate cand;
    cand.slice = *vocab.sliceOf(n.id);
    cand.id = n.id;
    cand.distance = n.distance;
    int sum = 0;
    for (const int pc : cand.slice.pitchClasses()) sum += occurrences[static_cast<std::size_t>(pc)];
    cand.score = static_cast<double>(sum) / (static_cast<double>(total) * cand.slice.size());
    cand.same_count = cand.slice.size() == s.size();
    out.candidates.push_back(cand);
    occurrence_sums.push_back(sum);
  }

  const bool any_same = std::any_of(out.candidates.begin(), out.candidates.end(),
                                    [](const SubstitutionCandidate& c) { return c.same_count; });
  std::size_t best = out.candidates.size();
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    const SubstitutionCandidate& c = out.candidates[i];
    if (any_same && !c.same_count) continue;
    if (best == out.candidates.size()) {
      best = i;
      continue;
    }
    const SubstitutionCandidate& b = out.candidates[best];
    const long long lhs = static_cast<long long>(occurrence_sums[i]) * b.slice.size();
    const long long rhs = static_cast<long long>(occurrence_sums[best]) * c.slice.size();
    if (lhs > rhs ||
        (lhs == rhs && (c.distance < b.distance || (c.distance == b.distance && canonicalLess(c.slice, b.slice))))) {
      best = i;
    }
  }
  out.substitute = out.candidates[best].slice;
  out.distance = out.candidates[best].distance;
  return out;
}

std::vector<Substitution> rewritePiece(std::span<const Slice> slices, const EmbeddingSpace& space,
                                       const GeneratorConfig& config) {
  std::vector<Substitution> out;
  out.reserve(slices.size());
  for (const Slice s : slices) out.push_back(substituteSlice(s, space, config));
  return out;
}

void writeDiagnosticsCsv(std::ostream& out, std::span<const Substitution> beats, int top_n) {
  out << "beat,original,substitute,cosine_distance,top_n\n";
  for (std::size_t b = 0; b < beats.size(); ++b) {
    const Substitution& s = beats[b];
    out << b + 1 << ',' << s.original.canonical() << ',' << s.substitute.canonical() << ','
        << (s.distance ? detail::significant6(*s.distance) : std::string("NA")) << ',' << top_n << '\n';
  }
}

std::vector<std::uint8_t> emitMidi(const MidiPiece& original, std::span<const Slice> substitutes) {
  const BeatGrid& grid = original.grid;
  if (static_cast<std::int64_t>(substitutes.size()) != grid.piece_length_beats) {
    throw std::invalid_argument("substitute count " + std::to_string(substitutes.size()) +
                                " does not match piece length " + std::to_string(grid.piece_length_beats));
  }
  const std::vector<Slice> slices = slicePiece(original);
  std::vector<bool> changed(substitutes.size());
  for (std::size_t b = 0; b < substitutes.size(); ++b) changed[b] = substitutes[b] != slices[b];

  const std::int64_t tpb = grid.ticks_per_beat;
  std::vector<NoteEvent> events;
  for (const NoteEvent& e : original.events) {
    // Keep the parts of the note that fall on unchanged beats.
    std::int64_t seg_start = -1;
    const std::int64_t first = e.onset_ticks / tpb;
    const std::int64_t last = (e.offset_ticks - 1) / tpb;
    for (std::int64_t b = first; b <= last + 1; ++b) {
      const bool keep = b <= last && !changed[static_cast<std::size_t>(b)];
      if (keep && seg_start < 0) {
        seg_start = std::max(e.onset_ticks, b * tpb);
      } else if (!keep && seg_start >= 0) {
        events.push_back({e.pitch, seg_start, std::min(e.offset_ticks, b * tpb), e.channel});
        seg_start = -1;
      }
    }
  }
  for (std::size_t b = 0; b < substitutes.size(); ++b) {
    if (!changed[b]) continue;
    const std::int64_t start = static_cast<std::int64_t>(b) * tpb;
    for (const int pc : substitutes[b].pitchClasses()) events.push_back({60 + pc, start, start + tpb, 0});
  }
  return encodeMidi(events, grid.ticks_per_beat);
}

}  // namespace slicevec
