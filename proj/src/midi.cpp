// SMF reader/writer. Only note on/off events on melodic channels survive
// parsing; everything else is validated and skipped.

#include "slicevec/midi.h"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include "slicevec/error.h"

namespace slicevec {

namespace {

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::size_t pos, std::size_t end)
      : bytes_(bytes), pos_(pos), end_(end) {}

  std::size_t pos() const { return pos_; }
  bool atEnd() const { return pos_ >= end_; }

  std::uint8_t u8(const char* what) {
    if (pos_ >= end_) throw ParseError(std::string("truncated data reading ") + what, pos_);
    return bytes_[pos_++];
  }

  std::uint8_t peek(const char* what) const {
    if (pos_ >= end_) throw ParseError(std::string("truncated data reading ") + what, pos_);
    return bytes_[pos_];
  }

  std::uint32_t u16(const char* what) {
    std::uint32_t hi = u8(what);
    return (hi << 8) | u8(what);
  }

  std::uint32_t u32(const char* what) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8(what);
    return v;
  }

  // Variable-length quantity, at most four bytes.
  std::uint32_t vlq(const char* what) {
    const std::size_t start = pos_;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8(what);
      v = (v << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return v;
    }
    throw ParseError(std::string("variable-length quantity longer than 4 bytes in ") + what, start);
  }

  std::uint8_t dataByte(const char* what) {
    const std::size_t at = pos_;
    const std::uint8_t b = u8(what);
    if (b & 0x80) throw ParseError(std::string("status byte where data byte expected in ") + what, at);
    return b;
  }

  void skip(std::size_t n, const char* what) {
    if (n > end_ - pos_) throw ParseError(std::string("truncated data skipping ") + what, pos_);
    pos_ += n;
  }

  bool matchTag(const char* tag) const {
    if (end_ - pos_ < 4) return false;
    return std::equal(tag, tag + 4, bytes_.begin() + static_cast<std::ptrdiff_t>(pos_));
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  std::size_t end_;
};

struct TrackResult {
  std::vector<NoteEvent> events;
  int unclosed = 0;
};

TrackResult parseTrack(std::span<const std::uint8_t> bytes, std::size_t begin, std::size_t end) {
  ByteReader in(bytes, begin, end);
  TrackResult out;
  // FIFO of onsets per (channel, pitch).
  std::map<std::pair<int, int>, std::deque<std::int64_t>> active;
  std::int64_t tick = 0;
  int running_status = -1;

  auto noteOff = [&](int channel, int pitch) {
    auto it = active.find({channel, pitch});
    if (it == active.end() || it->second.empty()) return;
    const std::int64_t onset = it->second.front();
    it->second.pop_front();
    if (tick > onset && channel != kPercussionChannel) {
      out.events.push_back({pitch, onset, tick, channel});
    }
  };

  while (!in.atEnd()) {
    tick += in.vlq("delta time");
    const std::size_t status_pos = in.pos();
    int status = in.peek("event status");
    if (status & 0x80) {
      in.u8("event status");
    } else {
      if (running_status < 0) throw ParseError("data byte without running status", status_pos);
      status = running_status;
    }

    if (status == 0xFF) {
      running_status = -1;
      const std::uint8_t type = in.u8("meta type");
      const std::uint32_t len = in.vlq("meta length");
      in.skip(len, "meta event");
      if (type == 0x2F) break;
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      running_status = -1;
      in.skip(in.vlq("sysex length"), "sysex event");
      continue;
    }
    if (status >= 0xF0) throw ParseError("unsupported system message in file", status_pos);

    running_status = status;
    const int kind = status & 0xF0;
    const int channel = status & 0x0F;
    switch (kind) {
      case 0x80: {
        const int pitch = in.dataByte("note off");
        in.dataByte("note off");
        noteOff(channel, pitch);
        break;
      }
      case 0x90: {
        const int pitch = in.dataByte("note on");
        const int velocity = in.dataByte("note on");
        if (velocity == 0) {
          noteOff(channel, pitch);
        } else {
          active[{channel, pitch}].push_back(tick);
        }
        break;
      }
      case 0xA0:
      case 0xB0:
      case 0xE0:
        in.dataByte("channel message");
        in.dataByte("channel message");
        break;
      default:  // 0xC0, 0xD0
        in.dataByte("channel message");
        break;
    }
  }

  for (auto& [key, onsets] : active) {
    for (const std::int64_t onset : onsets) {
      ++out.unclosed;
      if (tick > onset && key.first != kPercussionChannel) {
        out.events.push_back({key.second, onset, tick, key.first});
      }
    }
  }
  return out;
}

void putVlq(std::vector<std::uint8_t>& out, std::uint32_t value) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = value & 0x7F;
  while ((value >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>((value & 0x7F) | 0x80);
  while (n > 0) out.push_back(buf[--n]);
}

void putU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

MidiPiece parseMidi(std::span<const std::uint8_t> bytes) {
  ByteReader header(bytes, 0, bytes.size());
  if (!header.matchTag("MThd")) throw ParseError("missing MThd header", 0);
  header.skip(4, "header tag");
  const std::uint32_t header_len = header.u32("header length");
  if (header_len < 6) throw ParseError("header chunk shorter than 6 bytes", 4);
  const std::size_t format_pos = header.pos();
  const std::uint32_t format = header.u16("format");
  const std::uint32_t track_count = header.u16("track count");
  const std::size_t division_pos = header.pos();
  const std::uint32_t division = header.u16("division");
  header.skip(header_len - 6, "header padding");

  if (format > 1) throw ParseError("unsupported SMF format " + std::to_string(format), format_pos);
  if (division & 0x8000) throw ParseError("SMPTE time division is not supported", division_pos);
  if (division == 0) throw ParseError("zero ticks per quarter note", division_pos);

  MidiPiece piece;
  piece.grid.ticks_per_beat = static_cast<int>(division);

  std::size_t pos = header.pos();
  std::uint32_t tracks_seen = 0;
  while (tracks_seen < track_count) {
    ByteReader chunk(bytes, pos, bytes.size());
    if (chunk.atEnd()) {
      throw ParseError("expected " + std::to_string(track_count) + " tracks, found " +
                           std::to_string(tracks_seen),
                       pos);
    }
    const bool is_track = chunk.matchTag("MTrk");
    chunk.skip(4, "chunk tag");
    const std::uint32_t len = chunk.u32("chunk length");
    const std::size_t body = chunk.pos();
    if (len > bytes.size() - body) throw ParseError("chunk length runs past end of file", pos);
    if (is_track) {
      TrackResult track = parseTrack(bytes, body, body + len);
      piece.events.insert(piece.events.end(), track.events.begin(), track.events.end());
      piece.unclosed_notes += track.unclosed;
      ++tracks_seen;
    }
    pos = body + len;
  }

  std::sort(piece.events.begin(), piece.events.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return std::tie(a.onset_ticks, a.channel, a.pitch, a.offset_ticks) <
           std::tie(b.onset_ticks, b.channel, b.pitch, b.offset_ticks);
  });
  piece.grid.piece_length_beats = beatCount(piece.events, piece.grid.ticks_per_beat);
  return piece;
}

std::vector<std::uint8_t> encodeMidi(const std::vector<NoteEvent>& events, int ticks_per_beat) {
  if (ticks_per_beat <= 0 || ticks_per_beat > 0x7FFF) {
    throw std::invalid_argument("ticks_per_beat must be in [1, 32767]");
  }
  struct Message {
    std::int64_t tick;
    int order;  // 0 = note off, 1 = note on
    int channel;
    int pitch;
  };
  std::vector<Message> messages;
  messages.reserve(events.size() * 2);
  for (const NoteEvent& e : events) {
    if (e.pitch < 0 || e.pitch > 127 || e.channel < 0 || e.channel > 15 ||
        e.onset_ticks < 0 || e.offset_ticks <= e.onset_ticks) {
      throw std::invalid_argument("invalid note event");
    }
    messages.push_back({e.onset_ticks, 1, e.channel, e.pitch});
    messages.push_back({e.offset_ticks, 0, e.channel, e.pitch});
  }
  std::stable_sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
    return std::tie(a.tick, a.order, a.channel, a.pitch) <
           std::tie(b.tick, b.order, b.channel, b.pitch);
  });

  std::vector<std::uint8_t> track;
  // Tempo 120 bpm so that players have something sensible.
  track.insert(track.end(), {0x00, 0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20});
  std::int64_t last = 0;
  for (const Message& m : messages) {
    putVlq(track, static_cast<std::uint32_t>(m.tick - last));
    last = m.tick;
    track.push_back(static_cast<std::uint8_t>((m.order == 0 ? 0x80 : 0x90) | m.channel));
    track.push_back(static_cast<std::uint8_t>(m.pitch));
    track.push_back(m.order == 0 ? 0x40 : 80);
  }
  track.insert(track.end(), {0x00, 0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd', 0, 0, 0, 6, 0, 0, 0, 1};
  out.push_back(static_cast<std::uint8_t>(ticks_per_beat >> 8));
  out.push_back(static_cast<std::uint8_t>(ticks_per_beat & 0xFF));
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  putU32(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

std::int64_t beatCount(const std::vector<NoteEvent>& events, int ticks_per_beat) {
  std::int64_t max_offset = 0;
  for (const NoteEvent& e : events) max_offset = std::max(max_offset, e.offset_ticks);
  return (max_offset + ticks_per_beat - 1) / ticks_per_beat;
}

std::set<int> soundingPitches(const std::vector<NoteEvent>& events, const BeatGrid& grid,
                              std::int64_t beat) {
  if (beat < 0 || beat >= grid.piece_length_beats) {
    throw std::out_of_range("beat " + std::to_string(beat) + " outside [0, " +
                            std::to_string(grid.piece_length_beats) + ")");
  }
  const std::int64_t begin = beat * grid.ticks_per_beat;
  const std::int64_t end = begin + grid.ticks_per_beat;
  std::set<int> pitches;
  for (const NoteEvent& e : events) {
    if (e.onset_ticks < end && e.offset_ticks > begin) pitches.insert(e.pitch);
  }
  return pitches;
}

std::vector<std::set<int>> beatPitchSets(const std::vector<NoteEvent>& events,
                                         const BeatGrid& grid) {
  std::vector<std::set<int>> beats(static_cast<std::size_t>(grid.piece_length_beats));
  const std::int64_t tpb = grid.ticks_per_beat;
  for (const NoteEvent& e : events) {
    const std::int64_t first = e.onset_ticks / tpb;
    const std::int64_t last = std::min<std::int64_t>((e.offset_ticks - 1) / tpb,
                                                     grid.piece_length_beats - 1);
    for (std::int64_t b = first; b <= last; ++b) beats[static_cast<std::size_t>(b)].insert(e.pitch);
  }
  return beats;
}

}  // namespace slicevec
