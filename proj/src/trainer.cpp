#include "slicevec/trainer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>

#include "slicevec/error.h"
#include "text_format.h"

namespace slicevec {

void TrainingConfig::validate() const {
  auto require = [](bool ok, const char* message) {
    if (!ok) throw ConfigError(message);
  };
  require(dims > 0, "dims must be positive");
  require(window >= 2 && window % 2 == 0, "window must be a positive even integer");
  require(num_skips >= 1 && num_skips <= window, "num_skips must be in [1, window]");
  require(negative_samples >= 1 && negative_samples <= 64, "negative_samples must be in [1, 64]");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, "learning_rate must be finite and >= 0");
  require(batch_size >= 1, "batch_size must be positive");
  require(steps >= 0, "steps must be >= 0");
  require(checkpoint_interval >= 1, "checkpoint_interval must be positive");
  require(threads >= 1, "threads must be positive");
}

// ---------------------------------------------------------------------------
// EmbeddingMatrix
// ---------------------------------------------------------------------------

EmbeddingMatrix::EmbeddingMatrix(int vocab_size, int dims)
    : vocab_size_(vocab_size),
      dims_(dims),
      input_(static_cast<std::size_t>(vocab_size) * static_cast<std::size_t>(dims), 0.0),
      output_(input_.size(), 0.0) {}

std::span<double> EmbeddingMatrix::input(TokenId id) {
  return {input_.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dims_),
          static_cast<std::size_t>(dims_)};
}

std::span<const double> EmbeddingMatrix::input(TokenId id) const {
  return {input_.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dims_),
          static_cast<std::size_t>(dims_)};
}

std::span<double> EmbeddingMatrix::output(TokenId id) {
  return {output_.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dims_),
          static_cast<std::size_t>(dims_)};
}

std::span<const double> EmbeddingMatrix::output(TokenId id) const {
  return {output_.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dims_),
          static_cast<std::size_t>(dims_)};
}

bool EmbeddingMatrix::allFinite() const {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(input_.begin(), input_.end(), finite) &&
         std::all_of(output_.begin(), output_.end(), finite);
}

EmbeddingMatrix initialEmbedding(int vocab_size, int dims, Rng& rng) {
  EmbeddingMatrix emb(vocab_size, dims);
  const double half = 0.5 / dims;
  std::uniform_real_distribution<double> init(-half, half);
  for (double& x : emb.inputData()) x = init(rng);
  return emb;
}

// ---------------------------------------------------------------------------
// Batches
// ---------------------------------------------------------------------------

std::vector<TrainingPair> centerPairs(const std::vector<TokenId>& piece, std::size_t position,
                                      const TrainingConfig& config, Rng& rng) {
  const long long half = config.window / 2;
  const long long len = static_cast<long long>(piece.size());
  const long long t = static_cast<long long>(position);
  std::vector<long long> offsets;
  for (long long i = -half; i <= half; ++i) {
    if (i != 0 && t + i >= 0 && t + i < len) offsets.push_back(i);
  }
  const std::size_t take = std::min(offsets.size(), static_cast<std::size_t>(config.num_skips));
  std::vector<TrainingPair> pairs;
  pairs.reserve(take);
  for (std::size_t j = 0; j < take; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, offsets.size() - 1);
    std::swap(offsets[j], offsets[pick(rng)]);
    pairs.push_back({piece[position], piece[static_cast<std::size_t>(t + offsets[j])]});
  }
  return pairs;
}

std::vector<TrainingPair> generateBatch(const EncodedCorpus& corpus, const TrainingConfig& config,
                                        BatchCursor& cursor, Rng& rng) {
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<TrainingPair> batch;
  batch.reserve(batch_size);
  std::size_t pieces_skipped = 0;
  while (batch.size() < batch_size) {
    if (!cursor.pending.empty()) {
      batch.push_back(cursor.pending.front());
      cursor.pending.pop_front();
      continue;
    }
    if (cursor.piece >= corpus.pieces.size()) {
      cursor.piece = 0;
      cursor.position = 0;
      if (corpus.pieces.empty()) throw DataError("cannot generate batches from an empty corpus");
    }
    const auto& piece = corpus.pieces[cursor.piece];
    if (piece.size() < 2 || cursor.position >= piece.size()) {
      ++cursor.piece;
      cursor.position = 0;
      if (++pieces_skipped > corpus.pieces.size() + 1) {
        throw DataError("corpus has no piece with at least two tokens");
      }
      continue;
    }
    pieces_skipped = 0;
    for (const TrainingPair& p : centerPairs(piece, cursor.position, config, rng)) cursor.pending.push_back(p);
    ++cursor.position;
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Noise distribution
// ---------------------------------------------------------------------------

NoiseSampler::NoiseSampler(std::span<const std::int64_t> counts, double power) {
  if (counts.size() < 2) throw ConfigError("negative sampling needs a vocabulary of at least 2 tokens");
  std::vector<double> weights;
  weights.reserve(counts.size());
  for (const std::int64_t c : counts) weights.push_back(c > 0 ? std::pow(static_cast<double>(c), power) : 0.0);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) {
    degenerate_ = true;
    std::fill(weights.begin(), weights.end(), 1.0);
  }
  const double norm = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (const double w : weights) probabilities_.push_back(w / norm);
  distribution_ = std::discrete_distribution<TokenId>(weights.begin(), weights.end());
  uniform_ = std::uniform_int_distribution<TokenId>(0, static_cast<TokenId>(counts.size()) - 2);
}

TokenId NoiseSampler::sample(Rng& rng, std::optional<TokenId> exclude) {
  // All noise mass on the excluded token: fall back to uniform over the rest.
  if (exclude && !degenerate_ && probability(*exclude) >= 1.0) {
    const TokenId draw = uniform_(rng);
    return draw >= *exclude ? draw + 1 : draw;
  }
  TokenId id = distribution_(rng);
  while (exclude && id == *exclude) id = distribution_(rng);
  return id;
}

// ---------------------------------------------------------------------------
// Loss and gradients
// ---------------------------------------------------------------------------

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <bool kShared>
double load(const double& x) {
  if constexpr (kShared) {
    return std::atomic_ref<const double>(x).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool kShared>
void store(double& x, double v) {
  if constexpr (kShared) {
    std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
  } else {
    x = v;
  }
}

// Gradient step on one pair. In shared mode every element access is a relaxed
// atomic so concurrent workers may interleave updates (hogwild).
template <bool kShared>
double pairUpdate(EmbeddingMatrix& emb, TokenId center, TokenId context, std::span<const TokenId> negatives,
                  double learning_rate, std::vector<double>& scratch_v, std::vector<double>& scratch_grad) {
  const std::size_t dims = static_cast<std::size_t>(emb.dims());
  scratch_v.resize(dims);
  scratch_grad.assign(dims, 0.0);
  std::span<double> v = emb.input(center);
  for (std::size_t d = 0; d < dims; ++d) scratch_v[d] = load<kShared>(v[d]);

  double loss = 0.0;
  const std::size_t n_targets = negatives.size() + 1;
  double coeffs[65];
  for (std::size_t j = 0; j < n_targets; ++j) {
    const TokenId target = j == 0 ? context : negatives[j - 1];
    const double label = j == 0 ? 1.0 : 0.0;
    std::span<double> u = emb.output(target);
    double score = 0.0;
    for (std::size_t d = 0; d < dims; ++d) score += load<kShared>(u[d]) * scratch_v[d];
    loss += j == 0 ? softplus(-score) : softplus(score);
    coeffs[j] = sigmoid(score) - label;
    for (std::size_t d = 0; d < dims; ++d) scratch_grad[d] += coeffs[j] * load<kShared>(u[d]);
  }
  if (learning_rate == 0.0) return loss;

  for (std::size_t j = 0; j < n_targets; ++j) {
    const TokenId target = j == 0 ? context : negatives[j - 1];
    std::span<double> u = emb.output(target);
    const double scale = learning_rate * coeffs[j];
    for (std::size_t d = 0; d < dims; ++d) store<kShared>(u[d], load<kShared>(u[d]) - scale * scratch_v[d]);
  }
  for (std::size_t d = 0; d < dims; ++d) {
    store<kShared>(v[d], load<kShared>(v[d]) - learning_rate * scratch_grad[d]);
  }
  return loss;
}

void checkIds(const EmbeddingMatrix& emb, TokenId center, TokenId context, std::span<const TokenId> negatives) {
  auto valid = [&](TokenId id) { return id >= 0 && id < emb.vocabSize(); };
  bool ok = valid(center) && valid(context) && negatives.size() <= 64;
  for (const TokenId n : negatives) ok = ok && valid(n);
  if (!ok) throw std::out_of_range("training pair references an invalid token id");
}

}  // namespace

double pairLoss(const EmbeddingMatrix& emb, TokenId center, TokenId context, std::span<const TokenId> negatives) {
  checkIds(emb, center, context, negatives);
  const auto v = emb.input(center);
  double loss = softplus(-dot(emb.output(context), v));
  for (const TokenId n : negatives) loss += softplus(dot(emb.output(n), v));
  return loss;
}

PairGradient pairGradient(const EmbeddingMatrix& emb, TokenId center, TokenId context,
                          std::span<const TokenId> negatives) {
  checkIds(emb, center, context, negatives);
  const auto v = emb.input(center);
  const std::size_t dims = v.size();
  PairGradient g;
  g.center.assign(dims, 0.0);
  auto addTarget = [&](TokenId target, double label) {
    const auto u = emb.output(target);
    const double score = dot(u, v);
    g.loss += label > 0.0 ? softplus(-score) : softplus(score);
    const double coeff = sigmoid(score) - label;
    std::vector<double> du(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      g.center[d] += coeff * u[d];
      du[d] = coeff * v[d];
    }
    g.outputs.emplace_back(target, std::move(du));
  };
  addTarget(context, 1.0);
  for (const TokenId n : negatives) addTarget(n, 0.0);
  return g;
}

double applyPair(EmbeddingMatrix& emb, TokenId center, TokenId context, std::span<const TokenId> negatives,
                 double learning_rate) {
  checkIds(emb, center, context, negatives);
  thread_local std::vector<double> scratch_v;
  thread_local std::vector<double> scratch_grad;
  return pairUpdate<false>(emb, center, context, negatives, learning_rate, scratch_v, scratch_grad);
}

namespace {

template <bool kShared>
double runBatch(EmbeddingMatrix& emb, std::span<const TrainingPair> batch, const TrainingConfig& config,
                NoiseSampler& sampler, Rng& rng, std::int64_t step) {
  std::vector<TokenId> negatives(static_cast<std::size_t>(config.negative_samples));
  std::vector<double> scratch_v;
  std::vector<double> scratch_grad;
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TrainingPair& pair = batch[i];
    for (TokenId& n : negatives) n = sampler.sample(rng, pair.context);
    checkIds(emb, pair.center, pair.context, negatives);
    const double loss =
        pairUpdate<kShared>(emb, pair.center, pair.context, negatives, config.learning_rate, scratch_v, scratch_grad);
    if (!std::isfinite(loss)) {
      throw NumericalError("non-finite loss at step " + std::to_string(step) + ", pair " + std::to_string(i) +
                           " (center " + std::to_string(pair.center) + ", context " +
                           std::to_string(pair.context) + ")");
    }
    total += loss;
  }
  return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

}  // namespace

double sgdStep(EmbeddingMatrix& emb, std::span<const TrainingPair> batch, const TrainingConfig& config,
               NoiseSampler& sampler, Rng& rng, std::int64_t step) {
  return runBatch<false>(emb, batch, config, sampler, rng, step);
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

void checkFinite(const EmbeddingMatrix& emb, std::int64_t step) {
  if (!emb.allFinite()) throw NumericalError("non-finite embedding value at step " + std::to_string(step));
}

LossTrace trainSerial(const EncodedCorpus& corpus, const TrainingConfig& config, EmbeddingMatrix& emb,
                      NoiseSampler& sampler, Rng& rng, const ProgressCallback& progress) {
  LossTrace trace;
  BatchCursor cursor;
  double interval_sum = 0.0;
  std::int64_t interval_count = 0;
  for (std::int64_t step = 1; step <= config.steps; ++step) {
    const auto batch = generateBatch(corpus, config, cursor, rng);
    interval_sum += runBatch<false>(emb, batch, config, sampler, rng, step);
    ++interval_count;
    if (step % config.checkpoint_interval == 0 || step == config.steps) {
      checkFinite(emb, step);
      trace.checkpoints.push_back({step, interval_sum / static_cast<double>(interval_count)});
      if (progress) progress(trace.checkpoints.back());
      interval_sum = 0.0;
      interval_count = 0;
    }
  }
  return trace;
}

LossTrace trainShared(const EncodedCorpus& corpus, const TrainingConfig& config, EmbeddingMatrix& emb,
                      const NoiseSampler& sampler, const ProgressCallback& progress) {
  const std::int64_t interval = config.checkpoint_interval;
  const std::size_t buckets = static_cast<std::size_t>((config.steps + interval - 1) / interval);
  std::vector<std::atomic<double>> sums(buckets);
  std::vector<std::atomic<std::int64_t>> counts(buckets);
  std::atomic<std::int64_t> next_step{1};
  std::atomic<bool> failed{false};
  std::vector<std::string> errors(static_cast<std::size_t>(config.threads));

  {
    std::vector<std::jthread> workers;
    for (int w = 0; w < config.threads; ++w) {
      workers.emplace_back([&, w] {
        Rng rng(config.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(w + 1)));
        NoiseSampler local_sampler = sampler;
        BatchCursor cursor;
        cursor.piece = corpus.pieces.size() * static_cast<std::size_t>(w) / static_cast<std::size_t>(config.threads);
        try {
          for (std::int64_t step = next_step++; step <= config.steps && !failed; step = next_step++) {
            const auto batch = generateBatch(corpus, config, cursor, rng);
            const double loss = runBatch<true>(emb, batch, config, local_sampler, rng, step);
            const std::size_t b = static_cast<std::size_t>((step - 1) / interval);
            sums[b].fetch_add(loss, std::memory_order_relaxed);
            counts[b].fetch_add(1, std::memory_order_relaxed);
          }
        } catch (const std::exception& e) {
          errors[static_cast<std::size_t>(w)] = e.what();
          failed = true;
        }
      });
    }
  }
  for (const std::string& e : errors) {
    if (!e.empty()) throw NumericalError(e);
  }
  checkFinite(emb, config.steps);

  LossTrace trace;
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::int64_t step = std::min<std::int64_t>(static_cast<std::int64_t>(b + 1) * interval, config.steps);
    trace.checkpoints.push_back({step, sums[b].load() / static_cast<double>(std::max<std::int64_t>(1, counts[b].load()))});
    if (progress) progress(trace.checkpoints.back());
  }
  return trace;
}

}  // namespace

TrainingResult train(const EncodedCorpus& corpus, const Vocabulary& vocab, const TrainingConfig& config,
                     const ProgressCallback& progress) {
  config.validate();
  for (const auto& piece : corpus.pieces) {
    for (const TokenId id : piece) {
      if (id < 0 || id >= vocab.size()) throw DataError("corpus token id " + std::to_string(id) + " not in vocabulary");
    }
  }
  Rng rng(config.seed);
  TrainingResult result{initialEmbedding(vocab.size(), config.dims, rng), {}};
  if (config.steps == 0) return result;

  const auto counts = vocab.counts();
  NoiseSampler sampler(counts);
  if (config.threads == 1) {
    result.trace = trainSerial(corpus, config, result.embedding, sampler, rng, progress);
  } else {
    result.trace = trainShared(corpus, config, result.embedding, sampler, progress);
  }
  return result;
}

void writeLossCsv(std::ostream& out, const LossTrace& trace) {
  out << "step,avg_loss\n";
  for (const LossCheckpoint& c : trace.checkpoints) {
    out << c.step << ',' << detail::shortestDecimal(c.average_loss) << '\n';
  }
}

}  // namespace slicevec
