#include "slicevec/trainer.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "slicevec/error.h"

namespace slicevec {
namespace {

TrainingConfig smallConfig() {
  TrainingConfig c;
  c.dims = 8;
  c.batch_size = 16;
  c.steps = 50;
  c.checkpoint_interval = 10;
  return c;
}

// ---------------------------------------------------------------------------
// Batches
// ---------------------------------------------------------------------------

TEST(CenterPairs, TruncatedWindowForcesBothNeighbours) {
  const std::vector<TokenId> piece = {10, 11, 12};
  TrainingConfig config;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto pairs = centerPairs(piece, 1, config, rng);
    ASSERT_EQ(pairs.size(), 2u);
    std::set<TokenId> contexts = {pairs[0].context, pairs[1].context};
    EXPECT_EQ(contexts, (std::set<TokenId>{10, 12}));
    EXPECT_EQ(pairs[0].center, 11);
  }
}

TEST(CenterPairs, FirstPositionUsesPositiveOffsetsOnly) {
  const std::vector<TokenId> piece = {0, 1, 2, 3, 4, 5};
  TrainingConfig config;
  config.num_skips = 4;
  Rng rng(5);
  const auto pairs = centerPairs(piece, 0, config, rng);
  std::set<TokenId> contexts;
  for (const auto& p : pairs) contexts.insert(p.context);
  EXPECT_EQ(contexts, (std::set<TokenId>{1, 2}));
}

// Offsets drawn at interior centers are uniform over {-2, -1, 1, 2}.
TEST(GenerateBatch, OffsetsUniformChiSquare) {
  EncodedCorpus corpus;
  corpus.pieces.push_back({});
  for (TokenId i = 0; i < 20000; ++i) corpus.pieces[0].push_back(i);
  TrainingConfig config;
  config.batch_size = 100;
  Rng rng(17);
  BatchCursor cursor;
  cursor.position = 2;
  std::map<int, int> counts;
  for (int b = 0; b < 100; ++b) {
    for (const auto& p : generateBatch(corpus, config, cursor, rng)) ++counts[p.context - p.center];
  }
  ASSERT_EQ(counts.size(), 4u);
  const double expected = 10000.0 / 4.0;
  double chi2 = 0.0;
  for (const auto& [offset, n] : counts) {
    EXPECT_TRUE(offset == -2 || offset == -1 || offset == 1 || offset == 2);
    chi2 += (n - expected) * (n - expected) / expected;
  }
  EXPECT_LT(chi2, 16.27);  // chi-square, 3 dof, p = 0.001
}

TEST(GenerateBatch, ExactSizeCarryOverAndPieceBoundaries) {
  EncodedCorpus corpus;
  corpus.pieces = {{1, 2, 3}, {4}, {}, {5, 6}};
  TrainingConfig config;
  config.batch_size = 3;
  Rng rng(1);
  BatchCursor cursor;
  std::vector<TrainingPair> all;
  for (int b = 0; b < 4; ++b) {
    const auto batch = generateBatch(corpus, config, cursor, rng);
    ASSERT_EQ(batch.size(), 3u);
    all.insert(all.end(), batch.begin(), batch.end());
  }
  // One pass yields 2 + 2 + 2 (piece 0) + 1 + 1 (piece 3) = 8 pairs.
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& p = all[i];
    const bool first = p.center <= 3 && p.context <= 3;
    const bool last = p.center >= 5 && p.context >= 5;
    EXPECT_TRUE(first || last) << p.center << "," << p.context;
    EXPECT_NE(p.center, p.context);
  }
  EXPECT_EQ(all[6].center, 5);
  EXPECT_EQ(all[7].center, 6);
  EXPECT_EQ(all[8].center, 1);
}

TEST(GenerateBatch, NoUsablePiece) {
  EncodedCorpus corpus;
  corpus.pieces = {{1}, {}};
  TrainingConfig config;
  Rng rng(1);
  BatchCursor cursor;
  EXPECT_THROW(generateBatch(corpus, config, cursor, rng), DataError);
  EncodedCorpus empty;
  EXPECT_THROW(generateBatch(empty, config, cursor, rng), DataError);
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

TEST(NoiseSampler, TwoTokensExcludingOne) {
  const std::vector<std::int64_t> counts = {5, 500};
  NoiseSampler sampler(counts);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sampler.sample(rng, 1), 0);
}

TEST(NoiseSampler, MatchesPowerLaw) {
  const std::vector<std::int64_t> counts = {75, 25};
  NoiseSampler sampler(counts);
  const double w0 = std::pow(75.0, 0.75);
  const double w1 = std::pow(25.0, 0.75);
  const double p0 = w0 / (w0 + w1);
  EXPECT_NEAR(sampler.probability(0), p0, 1e-15);
  Rng rng(9);
  int zeros = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) zeros += sampler.sample(rng) == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, p0, 0.01);
}

TEST(NoiseSampler, ExcludedTokenNeverDrawn) {
  const std::vector<std::int64_t> counts = {10, 200, 30, 0, 7};
  NoiseSampler sampler(counts);
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const TokenId t = sampler.sample(rng, 1);
    EXPECT_NE(t, 1);
    EXPECT_NE(t, 3);  // zero count, zero mass
  }
}

TEST(NoiseSampler, AllMassOnExcludedToken) {
  const std::vector<std::int64_t> counts = {0, 9, 0};
  NoiseSampler sampler(counts);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) EXPECT_NE(sampler.sample(rng, 1), 1);
  EXPECT_THROW(NoiseSampler(std::vector<std::int64_t>{3}), ConfigError);
}

// ---------------------------------------------------------------------------
// Loss and gradients
// ---------------------------------------------------------------------------

TEST(PairLoss, ZeroVectorsOneNegative) {
  EmbeddingMatrix emb(3, 4);
  const std::vector<TokenId> neg = {2};
  EXPECT_NEAR(pairLoss(emb, 0, 1, neg), 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(pairGradient(emb, 0, 1, neg).loss, 1.3862943611198906, 1e-15);
}

EmbeddingMatrix randomMatrix(int vocab, int dims, Rng& rng, double scale = 1.0) {
  EmbeddingMatrix emb(vocab, dims);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& x : emb.inputData()) x = u(rng);
  for (double& x : emb.outputData()) x = u(rng);
  return emb;
}

double relativeError(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

// Central differences over every touched coordinate, duplicates included.
TEST(PairGradient, MatchesFiniteDifferences) {
  Rng rng(23);
  const double eps = 1e-4;
  for (int trial = 0; trial < 150; ++trial) {
    const int vocab = 2 + static_cast<int>(rng() % 9);
    const int dims = 1 + static_cast<int>(rng() % 8);
    EmbeddingMatrix emb = randomMatrix(vocab, dims, rng);
    const TokenId center = static_cast<TokenId>(rng() % vocab);
    const TokenId context = static_cast<TokenId>(rng() % vocab);
    std::vector<TokenId> negs(1 + rng() % 5);
    for (TokenId& n : negs) n = static_cast<TokenId>(rng() % vocab);

    const PairGradient g = pairGradient(emb, center, context, negs);
    std::map<TokenId, std::vector<double>> output_grad;
    for (const auto& [id, du] : g.outputs) {
      auto& acc = output_grad[id];
      acc.resize(du.size(), 0.0);
      for (std::size_t d = 0; d < du.size(); ++d) acc[d] += du[d];
    }
    auto numeric = [&](double& x) {
      const double saved = x;
      x = saved + eps;
      const double up = pairLoss(emb, center, context, negs);
      x = saved - eps;
      const double down = pairLoss(emb, center, context, negs);
      x = saved;
      return (up - down) / (2 * eps);
    };
    for (int d = 0; d < dims; ++d) {
      EXPECT_LT(relativeError(g.center[d], numeric(emb.input(center)[d])), 1e-4);
    }
    for (const auto& [id, grad] : output_grad) {
      for (int d = 0; d < dims; ++d) EXPECT_LT(relativeError(grad[d], numeric(emb.output(id)[d])), 1e-4);
    }
  }
}

// applyPair moves every touched row by -lr times its accumulated gradient.
TEST(ApplyPair, StepsAlongAnalyticGradient) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddingMatrix emb = randomMatrix(6, 5, rng);
    const std::vector<TokenId> negs = {2, 3, 2, 1};
    const PairGradient g = pairGradient(emb, 0, 1, negs);
    EmbeddingMatrix expected = emb;
    const double lr = 0.1;
    for (int d = 0; d < 5; ++d) expected.input(0)[d] -= lr * g.center[d];
    for (const auto& [id, du] : g.outputs) {
      for (int d = 0; d < 5; ++d) expected.output(id)[d] -= lr * du[d];
    }
    const double loss = applyPair(emb, 0, 1, negs, lr);
    EXPECT_DOUBLE_EQ(loss, g.loss);
    for (std::size_t i = 0; i < emb.inputData().size(); ++i) {
      EXPECT_NEAR(emb.inputData()[i], expected.inputData()[i], 1e-12);
      EXPECT_NEAR(emb.outputData()[i], expected.outputData()[i], 1e-12);
    }
  }
}

TEST(SgdStep, ZeroLearningRateLeavesMatrixUnchanged) {
  Rng rng(5);
  EmbeddingMatrix emb = randomMatrix(5, 4, rng);
  const EmbeddingMatrix before = emb;
  TrainingConfig config;
  config.learning_rate = 0.0;
  const std::vector<std::int64_t> counts = {1, 2, 3, 4, 5};
  NoiseSampler sampler(counts);
  const std::vector<TrainingPair> batch = {{0, 1}, {2, 3}, {4, 0}};
  const double loss = sgdStep(emb, batch, config, sampler, rng);
  EXPECT_GT(loss, 0.0);
  EXPECT_EQ(emb, before);
}

TEST(SgdStep, OnlyTouchedRowsChange) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    EmbeddingMatrix emb = randomMatrix(12, 3, rng);
    const EmbeddingMatrix before = emb;
    TrainingConfig config;
    config.negative_samples = 2;
    const std::vector<std::int64_t> counts = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
    NoiseSampler sampler(counts);
    const std::vector<TrainingPair> batch = {{5, 6}, {7, 0}};
    sgdStep(emb, batch, config, sampler, rng);
    for (TokenId id = 0; id < 12; ++id) {
      const bool input_touched = id == 5 || id == 7;
      const bool output_may_change = id <= 3 || id == 6;
      const auto in_now = emb.input(id);
      const auto in_then = before.input(id);
      const auto out_now = emb.output(id);
      const auto out_then = before.output(id);
      if (!input_touched) {
        EXPECT_TRUE(std::equal(in_now.begin(), in_now.end(), in_then.begin())) << id;
      }
      if (!output_may_change) {
        EXPECT_TRUE(std::equal(out_now.begin(), out_now.end(), out_then.begin())) << id;
      }
    }
  }
}

TEST(SgdStep, NonFiniteLossAborts) {
  EmbeddingMatrix emb(3, 2);
  for (double& x : emb.inputData()) x = 1e200;
  for (double& x : emb.outputData()) x = -1e200;
  TrainingConfig config;
  const std::vector<std::int64_t> counts = {1, 1, 1};
  NoiseSampler sampler(counts);
  Rng rng(1);
  const std::vector<TrainingPair> batch = {{0, 1}};
  try {
    sgdStep(emb, batch, config, sampler, rng, 42);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step 42, pair 0"), std::string::npos);
  }
}

TEST(SgdStep, LossIsNonNegative) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    EmbeddingMatrix emb = randomMatrix(4, 3, rng, 5.0);
    const std::vector<TokenId> negs = {1, 2, 3};
    EXPECT_GE(pairLoss(emb, 0, static_cast<TokenId>(trial % 4), negs), 0.0);
  }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct Fixture {
  EncodedCorpus corpus;
  Vocabulary vocab;
};

Fixture tinyCorpus() {
  const Slice a{0, 4, 7}, b{7, 11, 2}, c{5, 9, 0}, d{9, 0, 4};
  const std::vector<std::vector<Slice>> pieces = {{a, c, b, a, d, c, b, a}, {a, b, a, c, a, b, a}};
  SliceCounter counter;
  for (const auto& p : pieces) counter.add(p);
  Fixture f{{}, Vocabulary::build(counter, 10)};
  f.corpus = encodeCorpus(pieces, f.vocab);
  return f;
}

TEST(Train, ZeroStepsReturnsInitialization) {
  const Fixture f = tinyCorpus();
  TrainingConfig config = smallConfig();
  config.steps = 0;
  const TrainingResult r = train(f.corpus, f.vocab, config);
  EXPECT_TRUE(r.trace.checkpoints.empty());
  Rng rng(config.seed);
  EXPECT_EQ(r.embedding, initialEmbedding(f.vocab.size(), config.dims, rng));
  const double half = 0.5 / config.dims;
  for (const double x : r.embedding.inputData()) EXPECT_LE(std::abs(x), half);
  for (const double x : r.embedding.outputData()) EXPECT_EQ(x, 0.0);
}

TEST(Train, DeterministicWithCheckpointTrace) {
  const Fixture f = tinyCorpus();
  TrainingConfig config = smallConfig();
  config.steps = 45;
  std::vector<std::int64_t> seen;
  const TrainingResult a = train(f.corpus, f.vocab, config, [&](const LossCheckpoint& c) { seen.push_back(c.step); });
  const TrainingResult b = train(f.corpus, f.vocab, config);
  EXPECT_EQ(a.embedding, b.embedding);
  EXPECT_EQ(seen, (std::vector<std::int64_t>{10, 20, 30, 40, 45}));
  ASSERT_EQ(a.trace.checkpoints.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.trace.checkpoints[i].step, seen[i]);
    EXPECT_EQ(a.trace.checkpoints[i].average_loss, b.trace.checkpoints[i].average_loss);
  }
  EXPECT_TRUE(a.embedding.allFinite());
  EXPECT_LT(a.trace.checkpoints.back().average_loss, a.trace.checkpoints.front().average_loss);

  config.seed = 2;
  EXPECT_NE(train(f.corpus, f.vocab, config).embedding, a.embedding);
}

TEST(Train, SharedModeConverges) {
  const Fixture f = tinyCorpus();
  TrainingConfig config = smallConfig();
  config.threads = 3;
  config.steps = 200;
  config.checkpoint_interval = 50;
  const TrainingResult r = train(f.corpus, f.vocab, config);
  ASSERT_EQ(r.trace.checkpoints.size(), 4u);
  EXPECT_EQ(r.trace.checkpoints.back().step, 200);
  EXPECT_TRUE(r.embedding.allFinite());
  EXPECT_LT(r.trace.checkpoints.back().average_loss, r.trace.checkpoints.front().average_loss);
}

TEST(Train, RejectsInvalidInput) {
  const Fixture f = tinyCorpus();
  TrainingConfig config = smallConfig();
  EncodedCorpus bad = f.corpus;
  bad.pieces[0][0] = 99;
  EXPECT_THROW(train(bad, f.vocab, config), DataError);
  config.window = 3;
  EXPECT_THROW(train(f.corpus, f.vocab, config), ConfigError);
}

TEST(TrainingConfig, Validation) {
  TrainingConfig reference;
  reference.dims = 256;
  reference.learning_rate = 0.1;
  reference.window = 4;
  reference.steps = 1'000'000;
  EXPECT_NO_THROW(reference.validate());
  auto invalid = [](auto mutate) {
    TrainingConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  invalid([](TrainingConfig& c) { c.dims = 0; });
  invalid([](TrainingConfig& c) { c.window = 0; });
  invalid([](TrainingConfig& c) { c.window = 5; });
  invalid([](TrainingConfig& c) { c.num_skips = 5; });
  invalid([](TrainingConfig& c) { c.num_skips = 0; });
  invalid([](TrainingConfig& c) { c.negative_samples = 65; });
  invalid([](TrainingConfig& c) { c.learning_rate = -0.1; });
  invalid([](TrainingConfig& c) { c.learning_rate = NAN; });
  invalid([](TrainingConfig& c) { c.batch_size = 0; });
  invalid([](TrainingConfig& c) { c.steps = -1; });
  invalid([](TrainingConfig& c) { c.checkpoint_interval = 0; });
  invalid([](TrainingConfig& c) { c.threads = 0; });
}

TEST(WriteLossCsv, Format) {
  LossTrace trace;
  trace.checkpoints = {{2000, 1.5}, {4000, 0.1}};
  std::ostringstream out;
  writeLossCsv(out, trace);
  EXPECT_EQ(out.str(), "step,avg_loss\n2000,1.5\n4000,0.1\n");
}

}  // namespace
}  // namespace slicevec
