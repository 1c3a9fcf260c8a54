#include "slicevec/embedding.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "slicevec/error.h"
#include "text_format.h"

namespace slicevec {

EmbeddingSpace::EmbeddingSpace(Vocabulary vocab, int dims, std::vector<double> vectors)
    : vocab_(std::move(vocab)), dims_(dims), vectors_(std::move(vectors)) {
  if (dims_ <= 0) throw DataError("embedding dims must be positive");
  if (vectors_.size() != static_cast<std::size_t>(vocab_.size()) * static_cast<std::size_t>(dims_)) {
    throw DataError("embedding data does not match vocabulary size x dims");
  }
  if (!std::all_of(vectors_.begin(), vectors_.end(), [](double x) { return std::isfinite(x); })) {
    throw DataError("embedding contains non-finite values");
  }
  norms_.reserve(static_cast<std::size_t>(vocab_.size()));
  labels_.reserve(static_cast<std::size_t>(vocab_.size()));
  for (TokenId id = 0; id < vocab_.size(); ++id) {
    const auto v = vector(id);
    double s = 0.0;
    for (const double x : v) s += x * x;
    norms_.push_back(std::sqrt(s));
    labels_.push_back(vocab_.label(id));
  }
}

EmbeddingSpace EmbeddingSpace::fromTraining(const Vocabulary& vocab, const EmbeddingMatrix& emb) {
  if (emb.vocabSize() != vocab.size()) throw DataError("embedding matrix and vocabulary sizes differ");
  return EmbeddingSpace(vocab, emb.dims(), emb.inputData());
}

std::span<const double> EmbeddingSpace::vector(TokenId id) const {
  if (id < 0 || id >= vocab_.size()) throw std::out_of_range("token id " + std::to_string(id) + " out of range");
  return {vectors_.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dims_),
          static_cast<std::size_t>(dims_)};
}

double cosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine of vectors with different dimensions");
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw UndefinedMetricError("cosine similarity of a zero vector");
  // sqrt(aa * bb) keeps cos(a, a) exactly 1.
  return std::clamp(dot / std::sqrt(aa * bb), -1.0, 1.0);
}

double cosineDistance(std::span<const double> a, std::span<const double> b) { return 1.0 - cosineSimilarity(a, b); }

double angleDegrees(std::span<const double> a, std::span<const double> b) {
  return std::acos(cosineSimilarity(a, b)) * 180.0 / std::numbers::pi;
}

std::vector<Neighbor> nearestMatching(const EmbeddingSpace& space, TokenId query, int n,
                                      const std::function<bool(TokenId)>& admit) {
  if (n < 1) throw std::invalid_argument("nearest requires n >= 1");
  const auto q = space.vector(query);
  const double q_norm = space.norm(query);
  if (q_norm == 0.0) throw UndefinedMetricError("query token " + space.label(query) + " has a zero vector");

  std::vector<Neighbor> all;
  all.reserve(static_cast<std::size_t>(space.size()));
  for (TokenId id = 0; id < space.size(); ++id) {
    if (!admit(id) || space.norm(id) == 0.0) continue;
    const auto v = space.vector(id);
    double dot = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d) dot += q[d] * v[d];
    const double sim = std::clamp(dot / (q_norm * space.norm(id)), -1.0, 1.0);
    all.push_back({id, id == query ? 0.0 : 1.0 - sim});
  }
  auto before = [&](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return space.label(a.id) < space.label(b.id);
  };
  const std::size_t keep = std::min(all.size(), static_cast<std::size_t>(n));
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), before);
  all.resize(keep);
  return all;
}

std::vector<Neighbor> nearest(const EmbeddingSpace& space, TokenId query, int n, bool exclude_self,
                              bool exclude_unk) {
  const TokenId unk = space.vocab().unkId();
  return nearestMatching(space, query, n, [&](TokenId id) {
    return !(exclude_self && id == query) && !(exclude_unk && id == unk);
  });
}

double pairVectorAngle(const EmbeddingSpace& space, TokenId a1, TokenId b1, TokenId a2, TokenId b2) {
  const auto va1 = space.vector(a1), vb1 = space.vector(b1);
  const auto va2 = space.vector(a2), vb2 = space.vector(b2);
  std::vector<double> d1(va1.size()), d2(va1.size());
  for (std::size_t i = 0; i < d1.size(); ++i) {
    d1[i] = vb1[i] - va1[i];
    d2[i] = vb2[i] - va2[i];
  }
  try {
    return angleDegrees(d1, d2);
  } catch (const UndefinedMetricError&) {
    throw UndefinedMetricError("undefined angle: zero chord-pair vector (" + space.label(a1) + "->" +
                               space.label(b1) + " vs " + space.label(a2) + "->" + space.label(b2) + ")");
  }
}

void saveEmbedding(std::ostream& out, const EmbeddingSpace& space) {
  out << "SLICEVEC v1 " << space.size() << ' ' << space.dims() << '\n';
  std::string line;
  for (TokenId id = 0; id < space.size(); ++id) {
    line = space.label(id);
    for (const double x : space.vector(id)) {
      line += ' ';
      line += detail::shortestDecimal(x);
    }
    line += '\n';
    out << line;
  }
}

EmbeddingSpace loadEmbedding(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing SLICEVEC header");
  std::istringstream header(line);
  std::string tag, version, extra;
  long long size = -1, dims = -1;
  if (!(header >> tag >> version >> size >> dims) || tag != "SLICEVEC" || version != "v1" || size < 2 ||
      dims < 1 || (header >> extra)) {
    throw DataError("bad SLICEVEC header: '" + line + "'");
  }
  std::vector<Vocabulary::Entry> entries;
  std::vector<double> vectors;
  vectors.reserve(static_cast<std::size_t>(size * dims));
  for (long long row = 0; row < size; ++row) {
    if (!std::getline(in, line)) throw DataError("embedding file ends at row " + std::to_string(row));
    std::string_view rest(line);
    std::size_t space_pos = rest.find(' ');
    const std::string form(rest.substr(0, space_pos));
    Vocabulary::Entry entry;
    if (form != "UNK") entry.slice = Slice::parse(form);
    entries.push_back(entry);
    for (long long d = 0; d < dims; ++d) {
      if (space_pos == std::string_view::npos) {
        throw DataError("row " + std::to_string(row) + " has fewer than " + std::to_string(dims) + " values");
      }
      rest = rest.substr(space_pos + 1);
      space_pos = rest.find(' ');
      vectors.push_back(detail::parseDouble(rest.substr(0, space_pos)));
    }
    if (space_pos != std::string_view::npos) throw DataError("row " + std::to_string(row) + " has extra values");
  }
  return EmbeddingSpace(Vocabulary::fromEntries(std::move(entries)), static_cast<int>(dims), std::move(vectors));
}

EmbeddingSpace loadEmbedding(std::istream& in, const Vocabulary& vocab) {
  EmbeddingSpace loaded = loadEmbedding(in);
  if (!loaded.vocab().sameTokens(vocab)) throw DataError("embedding file tokens do not match the vocabulary");
  return EmbeddingSpace(vocab, loaded.dims(), loaded.data());
}

}  // namespace slicevec
