// The trained slice space: cosine metrics, neighbor queries and the
// embedding text file.

#ifndef SLICEVEC_EMBEDDING_H_
#define SLICEVEC_EMBEDDING_H_

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slicevec/slicer.h"
#include "slicevec/trainer.h"

namespace slicevec {

/// Immutable vocabulary-indexed vectors (the trained input vectors).
class EmbeddingSpace {
 public:
  /// `vectors` is row-major vocab.size() x dims; values must be finite.
  EmbeddingSpace(Vocabulary vocab, int dims, std::vector<double> vectors);

  static EmbeddingSpace fromTraining(const Vocabulary& vocab, const EmbeddingMatrix& emb);

  const Vocabulary& vocab() const { return vocab_; }
  int dims() const { return dims_; }
  int size() const { return vocab_.size(); }
  std::span<const double> vector(TokenId id) const;
  double norm(TokenId id) const { return norms_.at(static_cast<std::size_t>(id)); }
  const std::string& label(TokenId id) const { return labels_.at(static_cast<std::size_t>(id)); }
  const std::vector<double>& data() const { return vectors_; }

 private:
  Vocabulary vocab_;
  int dims_;
  std::vector<double> vectors_;
  std::vector<double> norms_;
  std::vector<std::string> labels_;
};

/// sum(a_i b_i) / (|a| |b|). Throws UndefinedMetricError for a zero vector.
double cosineSimilarity(std::span<const double> a, std::span<const double> b);

/// 1 - cosineSimilarity, in [0, 2].
double cosineDistance(std::span<const double> a, std::span<const double> b);

/// Angle between two vectors in degrees; the cosine is clamped to [-1, 1].
double angleDegrees(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  TokenId id = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// The n closest tokens by cosine distance, ascending; equal distances are
/// ordered by canonical form. Tokens with zero vectors are never returned.
/// Returns all admissible tokens when fewer than n exist.
std::vector<Neighbor> nearest(const EmbeddingSpace& space, TokenId query, int n, bool exclude_self,
                              bool exclude_unk);

/// As nearest(), over the tokens accepted by `admit`.
std::vector<Neighbor> nearestMatching(const EmbeddingSpace& space, TokenId query, int n,
                                      const std::function<bool(TokenId)>& admit);

/// Angle in degrees between (b1 - a1) and (b2 - a2).
double pairVectorAngle(const EmbeddingSpace& space, TokenId a1, TokenId b1, TokenId a2, TokenId b2);

/// "SLICEVEC v1 <vocab_size> <dims>", then per token by id:
/// "<form> <f_1> ... <f_dims>" with shortest round-trip decimals.
void saveEmbedding(std::ostream& out, const EmbeddingSpace& space);

/// Loads an embedding file. The vocabulary carries zero counts.
EmbeddingSpace loadEmbedding(std::istream& in);

/// Loads an embedding file and attaches `vocab`, which must list the same
/// tokens in the same order.
EmbeddingSpace loadEmbedding(std::istream& in, const Vocabulary& vocab);

}  // namespace slicevec

#endif  // SLICEVEC_EMBEDDING_H_
