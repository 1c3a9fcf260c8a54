#include "slicevec/analysis.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "slicevec/error.h"
#include "text_format.h"

namespace slicevec {

namespace {

constexpr std::array<const char*, 12> kPitchNames = {"C", "Db", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int mod12(int x) { return ((x % 12) + 12) % 12; }

}  // namespace

std::string pitchClassName(int pc) { return kPitchNames[static_cast<std::size_t>(mod12(pc))]; }

std::optional<int> parsePitchClass(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, int>, 21> kNames = {{
      {"C", 0},  {"B#", 0}, {"C#", 1}, {"Db", 1}, {"D", 2},  {"D#", 3},  {"Eb", 3},
      {"E", 4},  {"Fb", 4}, {"F", 5},  {"E#", 5}, {"F#", 6}, {"Gb", 6},  {"G", 7},
      {"G#", 8}, {"Ab", 8}, {"A", 9},  {"A#", 10}, {"Bb", 10}, {"B", 11}, {"Cb", 11},
  }};
  for (const auto& [n, pc] : kNames) {
    if (n == name) return pc;
  }
  return std::nullopt;
}

int fifthsDistance(int root_a, int root_b) {
  // Moving one step clockwise adds 7 semitones; 7 * 7 = 49 = 1 (mod 12).
  const int steps = mod12((root_b - root_a) * 7);
  return std::min(steps, 12 - steps);
}

std::string Key::name() const { return pitchClassName(root) + (mode == Mode::kMinor ? "m" : ""); }

std::optional<Key> parseKey(std::string_view text) {
  Key key;
  for (const auto& [suffix, mode] : {std::pair<std::string_view, Mode>{"-major", Mode::kMajor},
                                     {"-minor", Mode::kMinor}, {"m", Mode::kMinor}}) {
    if (text.size() > suffix.size() && text.ends_with(suffix)) {
      const auto pc = parsePitchClass(text.substr(0, text.size() - suffix.size()));
      if (!pc) return std::nullopt;
      return Key{*pc, mode};
    }
  }
  const auto pc = parsePitchClass(text);
  if (!pc) return std::nullopt;
  key.root = *pc;
  return key;
}

Slice ChordSpec::slice() const {
  const int third = quality == ChordQuality::kMajor ? 4 : 3;
  return Slice{mod12(root), mod12(root + third), mod12(root + 7)};
}

std::string ChordSpec::name() const { return pitchClassName(root) + (quality == ChordQuality::kMinor ? "m" : ""); }

std::string roleName(FunctionalRole role) {
  switch (role) {
    case FunctionalRole::kI: return "I";
    case FunctionalRole::kV: return "V";
    case FunctionalRole::kIV: return "IV";
    case FunctionalRole::kVi: return "vi";
    case FunctionalRole::kIIIb: return "IIIb";
    case FunctionalRole::kIIb: return "IIb";
    case FunctionalRole::kMinorV: return "v";
    case FunctionalRole::kMinorI: return "i";
  }
  return "?";
}

std::optional<FunctionalRole> parseRole(std::string_view text) {
  for (const FunctionalRole r : {FunctionalRole::kI, FunctionalRole::kV, FunctionalRole::kIV, FunctionalRole::kVi,
                                 FunctionalRole::kIIIb, FunctionalRole::kIIb, FunctionalRole::kMinorV,
                                 FunctionalRole::kMinorI}) {
    if (roleName(r) == text) return r;
  }
  return std::nullopt;
}

ChordSpec realize(FunctionalRole role, int key_root) {
  const int r = mod12(key_root);
  switch (role) {
    case FunctionalRole::kI: return {r, ChordQuality::kMajor};
    case FunctionalRole::kV: return {mod12(r + 7), ChordQuality::kMajor};
    case FunctionalRole::kIV: return {mod12(r + 5), ChordQuality::kMajor};
    case FunctionalRole::kVi: return {mod12(r + 9), ChordQuality::kMinor};
    case FunctionalRole::kIIIb: return {mod12(r + 3), ChordQuality::kMajor};
    case FunctionalRole::kIIb: return {mod12(r + 1), ChordQuality::kMajor};
    case FunctionalRole::kMinorV: return {mod12(r + 7), ChordQuality::kMinor};
    case FunctionalRole::kMinorI: return {r, ChordQuality::kMinor};
  }
  return {r, ChordQuality::kMajor};
}

LabeledMatrix::LabeledMatrix(std::vector<std::string> rows, std::vector<std::string> cols, std::string unit_name)
    : row_labels(std::move(rows)),
      col_labels(std::move(cols)),
      values(row_labels.size() * col_labels.size(), 0.0),
      units(std::move(unit_name)) {}

std::vector<std::string> circleOfFifthsLabels(Mode mode) {
  std::vector<std::string> labels;
  for (const int root : kCircleOfFifths) labels.push_back(Key{root, mode}.name());
  return labels;
}

// ---------------------------------------------------------------------------
// Chord distances
// ---------------------------------------------------------------------------

std::vector<RoleDistance> chordDistanceProfile(const EmbeddingSpace& space, const ChordSpec& tonic,
                                               std::span<const FunctionalRole> roles) {
  const auto tonic_id = space.vocab().find(tonic.slice());
  if (!tonic_id) throw DataError("tonic chord " + tonic.name() + " (" + tonic.slice().canonical() + ") not in vocabulary");
  std::vector<RoleDistance> out;
  for (const FunctionalRole role : roles) {
    RoleDistance entry{role, realize(role, tonic.root), std::nullopt};
    if (const auto id = space.vocab().find(entry.chord.slice())) {
      entry.distance = *id == *tonic_id ? 0.0 : cosineDistance(space.vector(*tonic_id), space.vector(*id));
    }
    out.push_back(entry);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Keys
// ---------------------------------------------------------------------------

std::vector<Slice> transposePiece(std::span<const Slice> slices, int semitones) {
  std::vector<Slice> out;
  out.reserve(slices.size());
  for (const Slice s : slices) out.push_back(s.transposed(semitones));
  return out;
}

std::optional<KeyCentroid> keyCentroid(const EmbeddingSpace& space, std::span<const Slice> slices, Key key) {
  KeyCentroid c{key, std::vector<double>(static_cast<std::size_t>(space.dims()), 0.0), 0};
  for (const Slice s : slices) {
    const auto id = space.vocab().find(s);
    if (!id) continue;
    const auto v = space.vector(*id);
    for (std::size_t d = 0; d < v.size(); ++d) c.centroid[d] += v[d];
    ++c.n_slices_used;
  }
  if (c.n_slices_used == 0) return std::nullopt;
  for (double& x : c.centroid) x /= c.n_slices_used;
  return c;
}

KeySimilarityResult keySimilarityMatrix(const EmbeddingSpace& space, std::span<const KeyedPiece> pieces, Mode mode) {
  const std::vector<std::string> labels = circleOfFifthsLabels(mode);
  KeySimilarityResult result{LabeledMatrix(labels, labels), 0, {}};
  std::vector<double> sums(144, 0.0);
  bool any_of_mode = false;

  for (const KeyedPiece& piece : pieces) {
    if (piece.key.mode != mode) continue;
    any_of_mode = true;
    std::vector<KeyCentroid> versions;
    for (const int root : kCircleOfFifths) {
      const auto transposed = transposePiece(piece.slices, root - piece.key.root);
      auto c = keyCentroid(space, transposed, Key{root, mode});
      if (!c) break;
      versions.push_back(std::move(*c));
    }
    if (versions.size() != 12) {
      result.warnings.push_back("excluded " + piece.name + ": a transposed version has no in-vocabulary slices");
      continue;
    }
    std::vector<double> distances(144, 0.0);
    try {
      for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = i + 1; j < 12; ++j) {
          const double d = cosineDistance(versions[i].centroid, versions[j].centroid);
          distances[i * 12 + j] = d;
          distances[j * 12 + i] = d;
        }
      }
    } catch (const UndefinedMetricError&) {
      result.warnings.push_back("excluded " + piece.name + ": zero centroid");
      continue;
    }
    for (std::size_t k = 0; k < 144; ++k) sums[k] += distances[k];
    ++result.pieces_used;
  }
  if (!any_of_mode) throw DataError("no pieces in the requested mode");
  if (result.pieces_used == 0) throw DataError("every piece in the requested mode was excluded");
  for (std::size_t k = 0; k < 144; ++k) result.matrix.values[k] = sums[k] / result.pieces_used;
  return result;
}

// ---------------------------------------------------------------------------
// Chord-pair angles
// ---------------------------------------------------------------------------

AnalogyResult analogyAngleMatrix(const EmbeddingSpace& space, FunctionalRole from, FunctionalRole to, Mode mode) {
  const std::vector<std::string> labels = circleOfFifthsLabels(mode);
  AnalogyResult result{LabeledMatrix(labels, labels, "degrees"), {}};
  std::vector<std::optional<std::pair<TokenId, TokenId>>> pairs;
  for (const int root : kCircleOfFifths) {
    const ChordSpec a = realize(from, root);
    const ChordSpec b = realize(to, root);
    const auto ida = space.vocab().find(a.slice());
    const auto idb = space.vocab().find(b.slice());
    if (!ida) result.missing_chords.push_back(a.name());
    if (!idb) result.missing_chords.push_back(b.name());
    pairs.push_back(ida && idb ? std::optional(std::pair(*ida, *idb)) : std::nullopt);
  }
  std::sort(result.missing_chords.begin(), result.missing_chords.end());
  result.missing_chords.erase(std::unique(result.missing_chords.begin(), result.missing_chords.end()),
                              result.missing_chords.end());

  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      if (!pairs[i] || !pairs[j]) {
        result.matrix.at(i, j) = kNaN;
      } else if (i == j) {
        result.matrix.at(i, j) = 0.0;
      } else {
        result.matrix.at(i, j) =
            pairVectorAngle(space, pairs[i]->first, pairs[i]->second, pairs[j]->first, pairs[j]->second);
      }
    }
  }
  return result;
}

std::vector<double> fifthAdjacentValues(const LabeledMatrix& matrix) {
  if (matrix.rows() != 12 || matrix.cols() != 12) throw std::invalid_argument("expected a 12x12 matrix");
  std::vector<double> out;
  for (std::size_t k = 0; k < 12; ++k) out.push_back(matrix.at(k, (k + 1) % 12));
  return out;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

double standardDeviation(std::span<const double> values) {
  if (values.empty()) return kNaN;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

namespace {

std::vector<double> averageRanks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearmanCorrelation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman inputs differ in length");
  if (x.size() < 2) return kNaN;
  const auto rx = averageRanks(x);
  const auto ry = averageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void writeMatrixCsv(std::ostream& out, const LabeledMatrix& matrix) {
  if (!matrix.units.empty()) out << "# units: " << matrix.units << '\n';
  for (const auto& label : matrix.col_labels) out << ',' << label;
  out << '\n';
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << matrix.row_labels[r];
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      const double v = matrix.at(r, c);
      out << ',' << (std::isnan(v) ? std::string("NA") : detail::significant6(v));
    }
    out << '\n';
  }
}

LabeledMatrix readMatrixCsv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  std::string units;
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.rfind("# units:", 0) == 0) {
      units = line.substr(8);
      units.erase(0, units.find_first_not_of(' '));
      continue;
    }
    if (!line.empty() && line[0] == '#') continue;
    header = split(line);
    break;
  }
  if (header.size() < 2 || !header[0].empty()) throw DataError("matrix CSV header must start with an empty cell");
  std::vector<std::string> cols(header.begin() + 1, header.end());
  std::vector<std::string> rows;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (cells.size() != cols.size() + 1) throw DataError("matrix CSV row '" + cells.front() + "' has wrong width");
    rows.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      values.push_back(cells[c] == "NA" ? kNaN : detail::parseDouble(cells[c]));
    }
  }
  LabeledMatrix m(std::move(rows), std::move(cols), units);
  m.values = std::move(values);
  return m;
}

}  // namespace slicevec
