#include "slicevec/midi.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "slicevec/error.h"
#include "test_util.h"

namespace slicevec {
namespace {

using testing::Bytes;
using testing::concat;
using testing::event;
using testing::header;
using testing::track;

Bytes singleNoteFile() {
  Bytes ev;
  event(ev, 0, 0x90, 60, 100);
  event(ev, 480, 0x80, 60, 64);
  return concat({header(0, 1, 480), track(ev)});
}

TEST(ParseMidi, SingleNote) {
  const MidiPiece piece = parseMidi(singleNoteFile());
  ASSERT_EQ(piece.events.size(), 1u);
  EXPECT_EQ(piece.events[0], (NoteEvent{60, 0, 480, 0}));
  EXPECT_EQ(piece.grid, (BeatGrid{480, 1}));
  EXPECT_EQ(piece.unclosed_notes, 0);
}

TEST(ParseMidi, PercussionOnlyFileHasNoEvents) {
  Bytes ev;
  event(ev, 0, 0x99, 36, 100);
  event(ev, 240, 0x89, 36, 0);
  event(ev, 0, 0x99, 38, 100);
  event(ev, 240, 0x99, 38, 0);
  const MidiPiece piece = parseMidi(concat({header(0, 1, 96), track(ev)}));
  EXPECT_TRUE(piece.events.empty());
  EXPECT_EQ(piece.grid, (BeatGrid{96, 0}));
}

// Three tracks: a tempo track, a chord track using running status and
// velocity-0 note-offs, and a melody track mixing channels with a meta event
// in the middle.
TEST(ParseMidi, ThreeTrackFormat1MergesInOrder) {
  Bytes conductor;
  testing::appendVarLen(conductor, 0);
  conductor.insert(conductor.end(), {0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20});
  testing::appendVarLen(conductor, 0);
  conductor.insert(conductor.end(), {0xFF, 0x58, 0x04, 0x03, 0x02, 0x18, 0x08});

  Bytes chords;
  event(chords, 0, 0x90, 48, 90);
  chords.insert(chords.end(), {0x00, 52, 90});  // running status
  chords.insert(chords.end(), {0x00, 55, 90});
  chords.insert(chords.end(), {0x83, 0x60, 48, 0});  // delta 480, velocity 0
  chords.insert(chords.end(), {0x00, 52, 0});
  chords.insert(chords.end(), {0x00, 55, 0});
  event(chords, 0, 0xB0, 64, 127);  // sustain pedal, ignored
  event(chords, 0, 0x90, 53, 80);
  event(chords, 960, 0x80, 53, 0);

  Bytes melody;
  event(melody, 120, 0x91, 76, 100);
  testing::appendVarLen(melody, 0);
  melody.insert(melody.end(), {0xFF, 0x01, 0x02, 'h', 'i'});
  event(melody, 600, 0x81, 76, 0);
  event(melody, 0, 0xC2, 5, 0);  // program change: one data byte
  melody.pop_back();
  event(melody, 0, 0x92, 77, 70);
  event(melody, 240, 0x82, 77, 0);
  event(melody, 0, 0x99, 42, 100);
  event(melody, 120, 0x89, 42, 0);

  const Bytes file = concat({header(1, 3, 480), track(conductor), track(chords), track(melody)});
  const MidiPiece piece = parseMidi(file);

  const std::vector<NoteEvent> expected = {
      {48, 0, 480, 0},    {52, 0, 480, 0},     {55, 0, 480, 0},    {76, 120, 720, 1},
      {53, 480, 1440, 0}, {77, 720, 960, 2},
  };
  EXPECT_EQ(piece.events, expected);
  EXPECT_EQ(piece.grid, (BeatGrid{480, 3}));
}

TEST(ParseMidi, OverlappingSamePitchPairsFirstInFirstOut) {
  Bytes ev;
  event(ev, 0, 0x90, 60, 100);
  event(ev, 100, 0x90, 60, 100);
  event(ev, 100, 0x80, 60, 0);
  event(ev, 100, 0x80, 60, 0);
  const MidiPiece piece = parseMidi(concat({header(0, 1, 480), track(ev)}));
  const std::vector<NoteEvent> expected = {{60, 0, 200, 0}, {60, 100, 300, 0}};
  EXPECT_EQ(piece.events, expected);
}

TEST(ParseMidi, UnclosedNoteIsClosedAtEndOfTrack) {
  Bytes ev;
  event(ev, 0, 0x90, 64, 100);
  event(ev, 0, 0x90, 67, 100);
  event(ev, 480, 0x80, 67, 0);
  testing::appendVarLen(ev, 480);
  ev.insert(ev.end(), {0xFF, 0x2F, 0x00});
  const MidiPiece piece = parseMidi(concat({header(0, 1, 480), track(ev, false)}));
  const std::vector<NoteEvent> expected = {{64, 0, 960, 0}, {67, 0, 480, 0}};
  EXPECT_EQ(piece.events, expected);
  EXPECT_EQ(piece.unclosed_notes, 1);
}

TEST(ParseMidi, UnknownChunksAreSkipped) {
  Bytes junk = {'X', 'F', 'I', 'H'};
  testing::appendU32(junk, 3);
  junk.insert(junk.end(), {1, 2, 3});
  Bytes ev;
  event(ev, 0, 0x90, 60, 100);
  event(ev, 480, 0x80, 60, 64);
  const MidiPiece piece = parseMidi(concat({header(0, 1, 480), junk, track(ev)}));
  EXPECT_EQ(piece.events.size(), 1u);
}

TEST(ParseMidi, ErrorsNameByteOffsets) {
  auto offsetOf = [](const Bytes& bytes) -> std::size_t {
    try {
      parseMidi(bytes);
    } catch (const ParseError& e) {
      return e.offset();
    }
    ADD_FAILURE() << "no ParseError";
    return 0;
  };

  EXPECT_EQ(offsetOf(Bytes{'R', 'I', 'F', 'F'}), 0u);
  EXPECT_EQ(offsetOf(header(2, 1, 480)), 8u);
  EXPECT_EQ(offsetOf(header(0, 1, 0xE728)), 12u);

  Bytes full = singleNoteFile();
  Bytes truncated(full.begin(), full.end() - 3);
  EXPECT_EQ(offsetOf(truncated), 14u);  // chunk length runs past the end

  Bytes missing_track = header(1, 2, 480);
  Bytes ev;
  event(ev, 0, 0x90, 60, 100);
  const Bytes one = track(ev);
  missing_track.insert(missing_track.end(), one.begin(), one.end());
  EXPECT_EQ(offsetOf(missing_track), missing_track.size());

  Bytes orphan_data;
  orphan_data.insert(orphan_data.end(), {0x00, 60, 100});
  EXPECT_EQ(offsetOf(concat({header(0, 1, 480), track(orphan_data)})), 23u);

  Bytes cut_event;
  cut_event.insert(cut_event.end(), {0x00, 0x90, 60});
  EXPECT_EQ(offsetOf(concat({header(0, 1, 480), track(cut_event, false)})), 25u);

  try {
    parseMidi(header(2, 1, 480));
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 8"), std::string::npos);
  }
}

TEST(ParseMidi, Deterministic) {
  const Bytes file = singleNoteFile();
  const MidiPiece a = parseMidi(file);
  const MidiPiece b = parseMidi(file);
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.grid, b.grid);
}

TEST(EncodeMidi, RoundTripsThroughParser) {
  const std::vector<NoteEvent> events = {
      {48, 0, 960, 0}, {60, 0, 480, 0}, {64, 480, 960, 0}, {72, 240, 1200, 3}, {72, 1200, 1440, 3},
  };
  const MidiPiece piece = parseMidi(encodeMidi(events, 240));
  std::vector<NoteEvent> expected = events;
  std::sort(expected.begin(), expected.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return std::tie(a.onset_ticks, a.channel, a.pitch) < std::tie(b.onset_ticks, b.channel, b.pitch);
  });
  EXPECT_EQ(piece.events, expected);
  EXPECT_EQ(piece.grid.ticks_per_beat, 240);
}

TEST(SoundingPitches, TiedNoteSoundsInSecondBeat) {
  const std::vector<NoteEvent> events = {{76, 0, 960, 0}};
  const BeatGrid grid{480, 2};
  EXPECT_EQ(soundingPitches(events, grid, 1), (std::set<int>{76}));
}

TEST(SoundingPitches, EmptyEventList) {
  EXPECT_TRUE(soundingPitches({}, BeatGrid{480, 4}, 2).empty());
}

TEST(SoundingPitches, ReleaseOnBoundaryDoesNotSoundInNextBeat) {
  const std::vector<NoteEvent> events = {{60, 0, 480, 0}, {62, 479, 481, 0}};
  const BeatGrid grid{480, 2};
  EXPECT_EQ(soundingPitches(events, grid, 0), (std::set<int>{60, 62}));
  EXPECT_EQ(soundingPitches(events, grid, 1), (std::set<int>{62}));
}

TEST(SoundingPitches, OutOfRangeBeat) {
  const BeatGrid grid{480, 2};
  EXPECT_THROW(soundingPitches({}, grid, 2), std::out_of_range);
  EXPECT_THROW(soundingPitches({}, grid, -1), std::out_of_range);
}

// Per-tick membership scan over random overlapping events.
TEST(SoundingPitches, MatchesPerTickScan) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int tpb = 1 + static_cast<int>(rng() % 8);
    std::vector<NoteEvent> events;
    const int n = static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) {
      const std::int64_t on = rng() % 40;
      events.push_back({static_cast<int>(40 + rng() % 40), on, on + 1 + static_cast<std::int64_t>(rng() % 20), 0});
    }
    const BeatGrid grid{tpb, beatCount(events, tpb)};
    const auto all = beatPitchSets(events, grid);
    ASSERT_EQ(static_cast<std::int64_t>(all.size()), grid.piece_length_beats);
    std::set<int> union_of_beats;
    std::set<int> all_pitches;
    for (const auto& e : events) all_pitches.insert(e.pitch);
    for (std::int64_t b = 0; b < grid.piece_length_beats; ++b) {
      std::set<int> expected;
      for (std::int64_t t = b * tpb; t < (b + 1) * tpb; ++t) {
        for (const auto& e : events) {
          if (e.onset_ticks <= t && t < e.offset_ticks) expected.insert(e.pitch);
        }
      }
      EXPECT_EQ(soundingPitches(events, grid, b), expected);
      EXPECT_EQ(all[static_cast<std::size_t>(b)], expected);
      union_of_beats.insert(expected.begin(), expected.end());
    }
    EXPECT_EQ(union_of_beats, all_pitches);
  }
}

}  // namespace
}  // namespace slicevec
