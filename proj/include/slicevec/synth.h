// Synthetic tonal corpus: diatonic chord progressions with passing tones.

#ifndef SLICEVEC_SYNTH_H_
#define SLICEVEC_SYNTH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slicevec/analysis.h"
#include "slicevec/midi.h"

namespace slicevec {

/// A key request: a tonic plus an optional fixed mode. Without a mode, pieces
/// for that tonic alternate major, minor, major, ...
struct KeyRequest {
  int root = 0;
  std::optional<Mode> mode;
};

/// "all" gives the 12 tonics in circle-of-fifths order, both modes. Otherwise a
/// comma-separated list of key names ("C", "Am", "F#"). Throws ConfigError on
/// an empty or unknown entry.
std::vector<KeyRequest> parseKeyList(std::string_view text);

struct SynthConfig {
  std::vector<KeyRequest> keys;
  int pieces_per_key = 4;
  std::uint64_t seed = 1;
  int beats_per_piece = 104;
  int ticks_per_beat = 480;
  /// Share of major-key phrases that route through vi.
  double relative_minor_rate = 0.08;
  /// Share of beats whose melody note is a non-chord scale tone.
  double passing_tone_rate = 0.35;
};

struct SynthPiece {
  std::string name;  // "<Key>-<mode>_<index>", e.g. "F#-minor_001"
  Key key;
  MidiPiece midi;
};

/// One piece; depends only on (key, index, seed, shape parameters).
SynthPiece synthesizePiece(Key key, int index, const SynthConfig& config);

/// pieces_per_key pieces for every requested key, keys in request order.
std::vector<SynthPiece> synthesizeCorpus(const SynthConfig& config);

/// Key encoded in a synthesized file name stem ("C-major_000"), if any.
std::optional<Key> keyFromName(std::string_view stem);

/// Pitch classes of the key's scale; minor keys use natural minor.
Slice scaleOf(Key key);

}  // namespace slicevec

#endif  // SLICEVEC_SYNTH_H_
