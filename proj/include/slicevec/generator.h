// Slice substitution by embedding proximity and top-n pitch-class scoring.

#ifndef SLICEVEC_GENERATOR_H_
#define SLICEVEC_GENERATOR_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicevec/embedding.h"
#include "slicevec/midi.h"

namespace slicevec {

struct GeneratorConfig {
  int top_n = 1;
  /// Keep the input slice out of its own candidate list.
  bool exclude_identity = true;

  void validate() const;
};

struct SubstitutionCandidate {
  Slice slice;
  TokenId id = 0;
  double distance = 0.0;  // cosine distance to the input slice
  double score = 0.0;     // mean pitch-class weight of the candidate's pitch classes
  bool same_count = false;
};

struct Substitution {
  Slice original;
  Slice substitute;
  bool in_vocabulary = false;
  /// Distance from original to substitute; empty when passed through.
  std::optional<double> distance;
  std::vector<SubstitutionCandidate> candidates;
  /// Pitch-class occurrence share across the candidates; sums to 1.
  std::array<double, 12> weights{};
  std::string warning;
};

/// Picks a replacement for `s`:
///  - out-of-vocabulary slices, rests and zero-vector tokens are returned
///    unchanged;
///  - otherwise the top_n nearest slices (never UNK or the rest slice) are
///    scored by the mean weight of their pitch classes, where a pitch class
///    weighs its share of all pitch-class occurrences among the candidates;
///  - the best-scoring candidate with as many pitch classes as `s` wins, or the
///    best overall when none matches. Ties go to the smaller distance, then
///    the canonical form.
Substitution substituteSlice(Slice s, const EmbeddingSpace& space, const GeneratorConfig& config);

std::vector<Substitution> rewritePiece(std::span<const Slice> slices, const EmbeddingSpace& space,
                                       const GeneratorConfig& config);

/// "beat,original,substitute,cosine_distance,top_n"; beats numbered from 1.
void writeDiagnosticsCsv(std::ostream& out, std::span<const Substitution> beats, int top_n);

/// Rewrites the piece: beats whose substitute differs from the original slice
/// are replaced by one-beat notes at MIDI 60-71, velocity 80; other beats keep
/// the original notes (clipped at changed beats). Format 0, same resolution.
std::vector<std::uint8_t> emitMidi(const MidiPiece& original, std::span<const Slice> substitutes);

}  // namespace slicevec

#endif  // SLICEVEC_GENERATOR_H_
