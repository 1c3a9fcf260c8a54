// Piece shapes: phrases drawn from a small table of cadential progressions,
// chords held one to four beats under a one-note-per-beat melody that mixes
// chord tones and neighbouring scale tones.

#include "slicevec/synth.h"

#include <algorithm>
#include <cstdio>
#include <random>
#include <tuple>

#include "slicevec/error.h"
#include "slicevec/trainer.h"

namespace slicevec {

namespace {

enum class Quality { kMajor, kMinor, kDiminished };

struct Degree {
  int offset;  // semitones above the tonic
  Quality quality;
};

struct Progression {
  std::vector<Degree> chords;
  double weight;
};

constexpr Degree kI{0, Quality::kMajor}, kIi{2, Quality::kMinor}, kIii{4, Quality::kMinor}, kIV{5, Quality::kMajor},
    kV{7, Quality::kMajor}, kVi{9, Quality::kMinor};
constexpr Degree kMinI{0, Quality::kMinor}, kIiDim{2, Quality::kDiminished}, kIII{3, Quality::kMajor},
    kMinIv{5, Quality::kMinor}, kMinV{7, Quality::kMinor}, kVI{8, Quality::kMajor}, kVII{10, Quality::kMajor};

const std::vector<Progression>& majorProgressions() {
  static const std::vector<Progression> table = {
      {{kI, kIV, kV, kI}, 4.0}, {{kI, kV, kI}, 3.0},           {{kI, kIi, kV, kI}, 2.0},
      {{kI, kIV, kI, kV, kI}, 2.0}, {{kI, kIV, kIi, kV, kI}, 1.0},
  };
  return table;
}

const std::vector<Progression>& relativeMinorProgressions() {
  static const std::vector<Progression> table = {
      {{kI, kVi, kIV, kV, kI}, 2.0},
      {{kI, kVi, kIi, kV, kI}, 1.0},
      {{kI, kIii, kVi, kV, kI}, 1.0},
  };
  return table;
}

const std::vector<Progression>& minorProgressions() {
  static const std::vector<Progression> table = {
      {{kMinI, kMinIv, kV, kMinI}, 4.0},  {{kMinI, kV, kMinI}, 3.0},
      {{kMinI, kVI, kMinIv, kV, kMinI}, 2.0}, {{kMinI, kMinIv, kMinV, kMinI}, 1.0},
      {{kMinI, kIiDim, kV, kMinI}, 1.0},  {{kMinI, kVII, kIII, kMinIv, kV, kMinI}, 1.0},
  };
  return table;
}

std::vector<int> chordPitchClasses(int tonic, Degree d) {
  const int root = (tonic + d.offset) % 12;
  const int third = d.quality == Quality::kMajor ? 4 : 3;
  const int fifth = d.quality == Quality::kDiminished ? 6 : 7;
  return {root, (root + third) % 12, (root + fifth) % 12};
}

const Progression& pick(const std::vector<Progression>& table, Rng& rng) {
  std::vector<double> weights;
  for (const auto& p : table) weights.push_back(p.weight);
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return table[dist(rng)];
}

template <class T>
const T& choose(const std::vector<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, items.size() - 1);
  return items[dist(rng)];
}

}  // namespace

Slice scaleOf(Key key) {
  static constexpr int kMajorSteps[] = {0, 2, 4, 5, 7, 9, 11};
  static constexpr int kMinorSteps[] = {0, 2, 3, 5, 7, 8, 10};
  std::uint16_t mask = 0;
  for (const int step : key.mode == Mode::kMajor ? kMajorSteps : kMinorSteps) {
    mask |= static_cast<std::uint16_t>(1u << ((key.root + step) % 12));
  }
  return Slice::fromMask(mask);
}

std::vector<KeyRequest> parseKeyList(std::string_view text) {
  std::vector<KeyRequest> keys;
  if (text == "all") {
    for (const int root : kCircleOfFifths) keys.push_back({root, std::nullopt});
    return keys;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    if (!item.empty()) {
      const auto key = parseKey(item);
      if (!key) throw ConfigError("unknown key '" + std::string(item) + "'");
      keys.push_back({key->root, key->mode});
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (keys.empty()) throw ConfigError("key list is empty");
  return keys;
}

SynthPiece synthesizePiece(Key key, int index, const SynthConfig& config) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(key.root), static_cast<std::uint32_t>(key.mode),
                    static_cast<std::uint32_t>(index)};
  Rng rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::int64_t tpb = config.ticks_per_beat;
  const std::vector<int> scale = scaleOf(key).pitchClasses();
  std::vector<NoteEvent> events;
  std::int64_t beat = 0;
  int melody = key.root;

  auto melodyNote = [&](std::int64_t at, int pc) {
    events.push_back({72 + pc, at * tpb, (at + 1) * tpb, 1});
    melody = pc;
  };

  while (beat < config.beats_per_piece) {
    if (unit(rng) < 0.15) {
      melodyNote(beat, (key.root + 7) % 12);  // pickup on the dominant
      ++beat;
    }
    const Progression* phrase = nullptr;
    if (key.mode == Mode::kMinor) {
      phrase = &pick(minorProgressions(), rng);
    } else if (unit(rng) < config.relative_minor_rate) {
      phrase = &pick(relativeMinorProgressions(), rng);
    } else {
      phrase = &pick(majorProgressions(), rng);
    }

    for (std::size_t c = 0; c < phrase->chords.size(); ++c) {
      const std::vector<int> chord = chordPitchClasses(key.root, phrase->chords[c]);
      const bool last = c + 1 == phrase->chords.size();
      const double r = unit(rng);
      const int length = last ? (r < 0.5 ? 2 : 4) : (r < 0.25 ? 1 : r < 0.8 ? 2 : 4);

      events.push_back({48 + chord[0], beat * tpb, (beat + length) * tpb, 0});
      for (const int pc : chord) events.push_back({60 + pc, beat * tpb, (beat + length) * tpb, 0});

      // Non-chord tones: scale tones a step away from the previous melody note.
      std::vector<int> passing;
      for (const int pc : scale) {
        const bool in_chord = std::find(chord.begin(), chord.end(), pc) != chord.end();
        const int step = std::min((pc - melody + 12) % 12, (melody - pc + 12) % 12);
        if (!in_chord && step > 0 && step <= 2) passing.push_back(pc);
      }
      for (int b = 0; b < length; ++b) {
        if (!passing.empty() && b > 0 && unit(rng) < config.passing_tone_rate) {
          melodyNote(beat + b, choose(passing, rng));
        } else {
          melodyNote(beat + b, choose(chord, rng));
        }
      }
      beat += length;
    }
  }

  SynthPiece piece;
  char name[64];
  std::snprintf(name, sizeof(name), "%s-%s_%03d", pitchClassName(key.root).c_str(),
                key.mode == Mode::kMajor ? "major" : "minor", index);
  piece.name = name;
  piece.key = key;
  std::sort(events.begin(), events.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return std::tie(a.onset_ticks, a.channel, a.pitch, a.offset_ticks) <
           std::tie(b.onset_ticks, b.channel, b.pitch, b.offset_ticks);
  });
  piece.midi.events = std::move(events);
  piece.midi.grid = {config.ticks_per_beat, beatCount(piece.midi.events, config.ticks_per_beat)};
  return piece;
}

std::vector<SynthPiece> synthesizeCorpus(const SynthConfig& config) {
  if (config.pieces_per_key < 1) throw ConfigError("pieces_per_key must be at least 1");
  if (config.keys.empty()) throw ConfigError("key list is empty");
  std::vector<SynthPiece> pieces;
  for (const KeyRequest& request : config.keys) {
    for (int i = 0; i < config.pieces_per_key; ++i) {
      const Mode mode = request.mode.value_or(i % 2 == 0 ? Mode::kMajor : Mode::kMinor);
      pieces.push_back(synthesizePiece(Key{request.root, mode}, i, config));
    }
  }
  return pieces;
}

std::optional<Key> keyFromName(std::string_view stem) {
  const std::size_t underscore = stem.find('_');
  return parseKey(stem.substr(0, underscore));
}

}  // namespace slicevec
