// Music-theoretic probes of a trained slice space: chord distances, key
// centroids of transposed pieces and chord-pair vector angles.

#ifndef SLICEVEC_ANALYSIS_H_
#define SLICEVEC_ANALYSIS_H_

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicevec/embedding.h"
#include "slicevec/slice.h"

namespace slicevec {

enum class Mode { kMajor, kMinor };
enum class ChordQuality { kMajor, kMinor };

/// Key roots along the circle of fifths starting from C.
inline constexpr std::array<int, 12> kCircleOfFifths = {0, 7, 2, 9, 4, 11, 6, 1, 8, 3, 10, 5};

/// C, Db, D, Eb, E, F, F#, G, Ab, A, Bb, B.
std::string pitchClassName(int pc);
/// Inverse of pitchClassName; also accepts the other common enharmonic spellings.
std::optional<int> parsePitchClass(std::string_view name);

/// Steps between two roots on the circle of fifths, 0-6.
int fifthsDistance(int root_a, int root_b);

struct Key {
  int root = 0;
  Mode mode = Mode::kMajor;

  /// "C" or "Am".
  std::string name() const;
  friend bool operator==(const Key&, const Key&) = default;
};

/// Accepts "C", "Am", "F#m", "Bb".
std::optional<Key> parseKey(std::string_view text);

struct ChordSpec {
  int root = 0;
  ChordQuality quality = ChordQuality::kMajor;

  /// {root, root+4, root+7} or {root, root+3, root+7}, mod 12.
  Slice slice() const;
  /// "C", "Am".
  std::string name() const;
  friend bool operator==(const ChordSpec&, const ChordSpec&) = default;
};

enum class FunctionalRole { kI, kV, kIV, kVi, kIIIb, kIIb, kMinorV, kMinorI };

std::string roleName(FunctionalRole role);
std::optional<FunctionalRole> parseRole(std::string_view text);

/// The triad filling `role` in the key rooted at `key_root`:
/// I, V, IV, IIIb, IIb major on r, r+7, r+5, r+3, r+1; vi, v, i minor on r+9, r+7, r.
ChordSpec realize(FunctionalRole role, int key_root);

/// Labeled matrix for CSV export. Missing entries are NaN.
struct LabeledMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<double> values;  // row-major
  std::string units;           // empty, or e.g. "degrees"

  LabeledMatrix() = default;
  LabeledMatrix(std::vector<std::string> rows, std::vector<std::string> cols, std::string unit_name = {});

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  double& at(std::size_t r, std::size_t c) { return values.at(r * cols() + c); }
  double at(std::size_t r, std::size_t c) const { return values.at(r * cols() + c); }
};

/// Key labels in circle-of-fifths order for the mode.
std::vector<std::string> circleOfFifthsLabels(Mode mode);

struct RoleDistance {
  FunctionalRole role;
  ChordSpec chord;
  std::optional<double> distance;  // empty when the chord's slice is not in the vocabulary
};

/// Cosine distance from the tonic triad to each role realized in the tonic's
/// key. Throws DataError when the tonic slice itself is not in the vocabulary.
std::vector<RoleDistance> chordDistanceProfile(const EmbeddingSpace& space, const ChordSpec& tonic,
                                               std::span<const FunctionalRole> roles);

std::vector<Slice> transposePiece(std::span<const Slice> slices, int semitones);

struct KeyCentroid {
  Key key;
  std::vector<double> centroid;
  int n_slices_used = 0;
};

/// Mean vector of the piece's in-vocabulary slices (the k = 1 k-means fixed
/// point); UNK-mapped slices are dropped. Empty when nothing is in vocabulary.
std::optional<KeyCentroid> keyCentroid(const EmbeddingSpace& space, std::span<const Slice> slices, Key key);

struct KeyedPiece {
  std::string name;
  Key key;
  std::vector<Slice> slices;
};

struct KeySimilarityResult {
  LabeledMatrix matrix;
  int pieces_used = 0;
  std::vector<std::string> warnings;
};

/// Transposes each piece of `mode` to all 12 keys and averages the cosine
/// distances between the versions' centroids. Rows/cols in circle-of-fifths
/// order. Throws DataError when no piece of the mode is usable.
KeySimilarityResult keySimilarityMatrix(const EmbeddingSpace& space, std::span<const KeyedPiece> pieces, Mode mode);

struct AnalogyResult {
  LabeledMatrix matrix;
  std::vector<std::string> missing_chords;
};

/// Angle in degrees between the from->to chord-pair vectors realized in every
/// pair of keys. Entries touching a chord missing from the vocabulary are NaN.
AnalogyResult analogyAngleMatrix(const EmbeddingSpace& space, FunctionalRole from, FunctionalRole to, Mode mode);

/// Entries (k, k+1 mod 12) of a 12x12 matrix in circle-of-fifths order.
std::vector<double> fifthAdjacentValues(const LabeledMatrix& matrix);

/// Population standard deviation.
double standardDeviation(std::span<const double> values);

/// Spearman rank correlation with average ranks for ties. NaN if either side
/// is constant.
double spearmanCorrelation(std::span<const double> x, std::span<const double> y);

/// First row ",<col labels>", then "<row label>,v..." with 6 significant
/// digits; NaN written as "NA". A "# units: <u>" line leads when units is set.
void writeMatrixCsv(std::ostream& out, const LabeledMatrix& matrix);
LabeledMatrix readMatrixCsv(std::istream& in);

}  // namespace slicevec

#endif  // SLICEVEC_ANALYSIS_H_
