#include "slicevec/slice.h"

#include <bit>
#include <charconv>

#include "slicevec/error.h"

namespace slicevec {

Slice::Slice(std::initializer_list<int> pitch_classes) {
  for (const int pc : pitch_classes) {
    if (pc < 0 || pc > 11) throw DataError("pitch class out of range: " + std::to_string(pc));
    mask_ |= static_cast<std::uint16_t>(1u << pc);
  }
}

Slice Slice::fromMask(std::uint16_t mask) {
  Slice s;
  s.mask_ = mask & 0x0FFF;
  return s;
}

Slice Slice::fromPitches(const std::set<int>& pitches) {
  std::uint16_t mask = 0;
  for (const int p : pitches) mask |= static_cast<std::uint16_t>(1u << (((p % 12) + 12) % 12));
  return fromMask(mask);
}

Slice Slice::parse(std::string_view text) {
  if (text == "R") return Slice();
  if (text.empty()) throw DataError("empty slice text");
  std::uint16_t mask = 0;
  int previous = -1;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = text.find('.', pos);
    const std::string_view part = text.substr(pos, dot == std::string_view::npos ? text.npos : dot - pos);
    int pc = -1;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), pc);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size() || pc < 0 || pc > 11 ||
        pc <= previous || (part.size() > 1 && part[0] == '0')) {
      throw DataError("malformed slice '" + std::string(text) + "'");
    }
    mask |= static_cast<std::uint16_t>(1u << pc);
    previous = pc;
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return fromMask(mask);
}

bool Slice::contains(int pitch_class) const {
  return pitch_class >= 0 && pitch_class < 12 && ((mask_ >> pitch_class) & 1u) != 0;
}

int Slice::size() const { return std::popcount(mask_); }

std::vector<int> Slice::pitchClasses() const {
  std::vector<int> out;
  for (int pc = 0; pc < 12; ++pc) {
    if (contains(pc)) out.push_back(pc);
  }
  return out;
}

Slice Slice::transposed(int semitones) const {
  const int shift = ((semitones % 12) + 12) % 12;
  const std::uint32_t wide = static_cast<std::uint32_t>(mask_) << shift;
  return fromMask(static_cast<std::uint16_t>((wide | (wide >> 12)) & 0x0FFF));
}

std::string Slice::canonical() const {
  if (isRest()) return "R";
  std::string out;
  for (const int pc : pitchClasses()) {
    if (!out.empty()) out += '.';
    out += std::to_string(pc);
  }
  return out;
}

bool canonicalLess(Slice a, Slice b) { return a.canonical() < b.canonical(); }

}  // namespace slicevec
