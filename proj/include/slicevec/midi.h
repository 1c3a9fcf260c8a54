// Standard MIDI File reading/writing and the per-beat view of note events.

#ifndef SLICEVEC_MIDI_H_
#define SLICEVEC_MIDI_H_

#include <cstdint>
#include <set>
#include <span>
#include <vector>

namespace slicevec {

/// Percussion channel (MIDI channel 10, zero-based 9). Never sliced.
inline constexpr int kPercussionChannel = 9;

struct NoteEvent {
  int pitch = 0;  // MIDI key number, 0-127
  std::int64_t onset_ticks = 0;
  std::int64_t offset_ticks = 0;  // exclusive
  int channel = 0;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// Quarter-note beat grid taken from the SMF division field.
/// Beat b spans ticks [b * ticks_per_beat, (b + 1) * ticks_per_beat).
struct BeatGrid {
  int ticks_per_beat = 480;
  std::int64_t piece_length_beats = 0;

  friend bool operator==(const BeatGrid&, const BeatGrid&) = default;
};

struct MidiPiece {
  /// Sorted by (onset, channel, pitch, offset).
  std::vector<NoteEvent> events;
  BeatGrid grid;
  /// Note-ons that never saw a matching note-off; closed at end of track.
  int unclosed_notes = 0;
};

/// Parses an SMF format 0 or 1 file. Percussion events are dropped. Throws
/// ParseError carrying the byte offset of the first malformed construct.
MidiPiece parseMidi(std::span<const std::uint8_t> bytes);

/// Writes a format 0 file containing `events` at the given resolution.
/// At equal ticks note-offs precede note-ons.
std::vector<std::uint8_t> encodeMidi(const std::vector<NoteEvent>& events,
                                     int ticks_per_beat);

/// Number of beats covered by the events: ceil(max offset / ticks_per_beat).
std::int64_t beatCount(const std::vector<NoteEvent>& events, int ticks_per_beat);

/// Pitches whose [onset, offset) interval intersects beat `beat`.
/// Throws std::out_of_range when beat is outside [0, piece_length_beats).
std::set<int> soundingPitches(const std::vector<NoteEvent>& events,
                              const BeatGrid& grid, std::int64_t beat);

/// soundingPitches for every beat of the grid in one pass.
std::vector<std::set<int>> beatPitchSets(const std::vector<NoteEvent>& events,
                                         const BeatGrid& grid);

}  // namespace slicevec

#endif  // SLICEVEC_MIDI_H_
