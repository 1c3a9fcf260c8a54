// A slice is the set of pitch classes sounding during one beat.

#ifndef SLICEVEC_SLICE_H_
#define SLICEVEC_SLICE_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace slicevec {

class Slice {
 public:
  /// The empty slice (a rest), written "R".
  Slice() = default;

  /// From pitch classes; each must be in [0, 11].
  Slice(std::initializer_list<int> pitch_classes);

  static Slice fromMask(std::uint16_t mask);

  /// Octave-folded slice of arbitrary MIDI pitches.
  static Slice fromPitches(const std::set<int>& pitches);

  /// Parses the canonical form ("0.4.7" or "R"). Throws DataError.
  static Slice parse(std::string_view text);

  std::uint16_t mask() const { return mask_; }
  bool isRest() const { return mask_ == 0; }
  bool contains(int pitch_class) const;
  int size() const;
  std::vector<int> pitchClasses() const;

  /// Every pitch class shifted by `semitones` modulo 12.
  Slice transposed(int semitones) const;

  /// Elements in ascending order joined by '.', or "R" for the empty slice.
  std::string canonical() const;

  friend bool operator==(Slice, Slice) = default;
  friend auto operator<=>(Slice, Slice) = default;

 private:
  std::uint16_t mask_ = 0;
};

/// Pitch classes of the pitches, canonically ordered.
inline Slice makeSlice(const std::set<int>& pitches) { return Slice::fromPitches(pitches); }

/// Lexicographic order of canonical forms, the library-wide tie-breaker.
bool canonicalLess(Slice a, Slice b);

}  // namespace slicevec

template <>
struct std::hash<slicevec::Slice> {
  std::size_t operator()(slicevec::Slice s) const noexcept { return s.mask(); }
};

#endif  // SLICEVEC_SLICE_H_
