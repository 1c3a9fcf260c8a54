// Skip-gram with negative sampling, trained by plain per-pair SGD.

#ifndef SLICEVEC_TRAINER_H_
#define SLICEVEC_TRAINER_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "slicevec/slicer.h"

namespace slicevec {

using Rng = std::mt19937_64;

struct TrainingConfig {
  int dims = 256;
  /// Full window width c; contexts are t-c/2 .. t+c/2 excluding t. Even.
  int window = 4;
  /// Offsets sampled per center without replacement (k).
  int num_skips = 2;
  int negative_samples = 5;
  double learning_rate = 0.1;
  int batch_size = 128;
  std::int64_t steps = 1'000'000;
  /// Batches per loss checkpoint.
  std::int64_t checkpoint_interval = 2000;
  std::uint64_t seed = 1;
  /// 1 = deterministic. More threads run lock-free shared updates.
  int threads = 1;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Input (center) and output (context) vectors, row-major vocab x dims.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(int vocab_size, int dims);

  int vocabSize() const { return vocab_size_; }
  int dims() const { return dims_; }

  std::span<double> input(TokenId id);
  std::span<const double> input(TokenId id) const;
  std::span<double> output(TokenId id);
  std::span<const double> output(TokenId id) const;

  const std::vector<double>& inputData() const { return input_; }
  const std::vector<double>& outputData() const { return output_; }
  std::vector<double>& inputData() { return input_; }
  std::vector<double>& outputData() { return output_; }

  bool allFinite() const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  int vocab_size_ = 0;
  int dims_ = 0;
  std::vector<double> input_;
  std::vector<double> output_;
};

/// Input rows uniform in [-0.5/dims, 0.5/dims]; output rows zero.
EmbeddingMatrix initialEmbedding(int vocab_size, int dims, Rng& rng);

struct TrainingPair {
  TokenId center = 0;
  TokenId context = 0;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

/// Where batch generation resumes. Pairs from a center that did not fit in
/// the previous batch wait in `pending`.
struct BatchCursor {
  std::size_t piece = 0;
  std::size_t position = 0;
  std::deque<TrainingPair> pending;
};

/// Up to num_skips pairs for the center at (piece, position); offsets are
/// drawn without replacement from the in-piece part of the window.
std::vector<TrainingPair> centerPairs(const std::vector<TokenId>& piece, std::size_t position,
                                      const TrainingConfig& config, Rng& rng);

/// Exactly batch_size pairs, walking centers in corpus order and wrapping at
/// the end. Pieces shorter than two tokens are skipped; a corpus with no
/// usable piece is a DataError.
std::vector<TrainingPair> generateBatch(const EncodedCorpus& corpus, const TrainingConfig& config,
                                        BatchCursor& cursor, Rng& rng);

/// Unigram counts raised to the 0.75 power.
class NoiseSampler {
 public:
  explicit NoiseSampler(std::span<const std::int64_t> counts, double power = 0.75);

  /// Draws from the noise distribution, redrawing while equal to `exclude`.
  TokenId sample(Rng& rng, std::optional<TokenId> exclude = std::nullopt);
  double probability(TokenId id) const { return probabilities_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(probabilities_.size()); }

 private:
  std::vector<double> probabilities_;
  std::discrete_distribution<TokenId> distribution_;
  std::uniform_int_distribution<TokenId> uniform_;
  bool degenerate_ = false;
};

/// -log s(u_ctx . v) - sum_neg log s(-u_neg . v)
double pairLoss(const EmbeddingMatrix& emb, TokenId center, TokenId context,
                std::span<const TokenId> negatives);

struct PairGradient {
  double loss = 0.0;
  std::vector<double> center;  // d loss / d input[center]
  /// d loss / d output[id] per target: context first, then each negative.
  std::vector<std::pair<TokenId, std::vector<double>>> outputs;
};

PairGradient pairGradient(const EmbeddingMatrix& emb, TokenId center, TokenId context,
                          std::span<const TokenId> negatives);

/// One gradient-descent step on a single pair's loss. Returns the loss
/// evaluated before the update.
double applyPair(EmbeddingMatrix& emb, TokenId center, TokenId context,
                 std::span<const TokenId> negatives, double learning_rate);

/// Draws negatives for every pair and applies them in order. Returns the
/// mean pair loss. Throws NumericalError on a non-finite loss.
double sgdStep(EmbeddingMatrix& emb, std::span<const TrainingPair> batch, const TrainingConfig& config,
               NoiseSampler& sampler, Rng& rng, std::int64_t step = 0);

struct LossCheckpoint {
  std::int64_t step = 0;
  double average_loss = 0.0;
};

struct LossTrace {
  std::vector<LossCheckpoint> checkpoints;
};

struct TrainingResult {
  EmbeddingMatrix embedding;
  LossTrace trace;
};

using ProgressCallback = std::function<void(const LossCheckpoint&)>;

TrainingResult train(const EncodedCorpus& corpus, const Vocabulary& vocab, const TrainingConfig& config,
                     const ProgressCallback& progress = {});

/// "step,avg_loss" then one row per checkpoint.
void writeLossCsv(std::ostream& out, const LossTrace& trace);

}  // namespace slicevec

#endif  // SLICEVEC_TRAINER_H_
