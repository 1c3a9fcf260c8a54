#include "slicevec/pipeline.h"

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "slicevec/error.h"
#include "slicevec/midi.h"
#include "slicevec/slicer.h"
#include "test_util.h"

namespace slicevec {
namespace {

using testing::TempDir;
namespace fs = std::filesystem;

// Runs the command-line tool inside `dir`; output goes to dir/cli.log.
int runCli(const TempDir& dir, const std::string& args, const std::string& env = "") {
  const std::string command = "cd '" + dir.path().string() + "' && " + env + " '" + SLICEVEC_CLI_PATH + "' " + args +
                              " > cli.log 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

PipelineConfig configIn(const TempDir& dir) {
  PipelineConfig c;
  c.corpus_dir = dir / "corpus";
  c.corpus_cache = dir / "slices.corpus";
  c.vocab_cache = dir / "slices.vocab";
  c.embedding_file = dir / "slices.vec";
  c.loss_csv = dir / "loss.csv";
  c.out_dir = dir / "out";
  return c;
}

TEST(ListMidiFiles, SortedMidiOnly) {
  TempDir dir;
  for (const char* name : {"b.mid", "a.MIDI.txt", "c.midi", "a.mid", "notes.txt"}) testing::writeFile(dir / name, "");
  const auto files = listMidiFiles(dir.path());
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "a.mid");
  EXPECT_EQ(files[1].filename(), "b.mid");
  EXPECT_EQ(files[2].filename(), "c.midi");
  EXPECT_THROW(listMidiFiles(dir / "missing"), DataError);
}

TEST(RunIngest, SingleNoteFile) {
  TempDir dir;
  const PipelineConfig config = configIn(dir);
  fs::create_directories(config.corpus_dir);
  const auto bytes = encodeMidi({{60, 0, 480, 0}}, 480);
  testing::writeFile(fs::path(config.corpus_dir) / "one.mid", std::string(bytes.begin(), bytes.end()));
  std::ostringstream log;
  const IngestReport report = runIngest(config, log);
  EXPECT_EQ(report.pieces, 1);
  EXPECT_EQ(report.total_slices, 1);
  EXPECT_EQ(report.unique_slices, 1u);
  EXPECT_EQ(report.vocab_size, 2);
  EXPECT_EQ(testing::readFile(config.corpus_cache), "SLICECORPUS v1 1\n0\n");
}

TEST(RunIngest, SkipsBrokenFilesAndFailsWhenNoneParse) {
  TempDir dir;
  const PipelineConfig config = configIn(dir);
  fs::create_directories(config.corpus_dir);
  testing::writeFile(fs::path(config.corpus_dir) / "broken.mid", "MThd garbage");
  std::ostringstream log;
  EXPECT_THROW(runIngest(config, log), DataError);
  EXPECT_NE(log.str().find("skipping broken.mid"), std::string::npos);

  const auto bytes = encodeMidi({{60, 0, 480, 0}, {64, 480, 960, 0}}, 480);
  testing::writeFile(fs::path(config.corpus_dir) / "good.mid", std::string(bytes.begin(), bytes.end()));
  const IngestReport report = runIngest(config, log);
  EXPECT_EQ(report.pieces, 1);
  EXPECT_EQ(report.files_skipped, 1);
}

TEST(RunIngest, CachesAreByteIdenticalAcrossRuns) {
  TempDir dir;
  PipelineConfig config = configIn(dir);
  config.out_dir = config.corpus_dir;
  config.keys = "C,Am";
  config.pieces_per_key = 2;
  config.beats_per_piece = 24;
  std::ostringstream log;
  runSynth(config, log);
  runIngest(config, log);
  const std::string corpus = testing::readFile(config.corpus_cache);
  const std::string vocab = testing::readFile(config.vocab_cache);
  runIngest(config, log);
  EXPECT_EQ(testing::readFile(config.corpus_cache), corpus);
  EXPECT_EQ(testing::readFile(config.vocab_cache), vocab);
}

TEST(Cli, UsageErrorsExitWithOne) {
  TempDir dir;
  EXPECT_EQ(runCli(dir, ""), 1);
  EXPECT_EQ(runCli(dir, "frobnicate"), 1);
  EXPECT_EQ(runCli(dir, "analyze sideways"), 1);
  EXPECT_EQ(runCli(dir, "train --window 3"), 1);
  EXPECT_EQ(runCli(dir, "train --no-such-flag 3"), 1);
  EXPECT_EQ(runCli(dir, "--help"), 0);
}

TEST(Cli, DataErrorsExitWithTwo) {
  TempDir dir;
  EXPECT_EQ(runCli(dir, "ingest --corpus-dir nowhere"), 2);
  fs::create_directories(dir / "empty");
  EXPECT_EQ(runCli(dir, "ingest --corpus-dir empty"), 2);
  EXPECT_EQ(runCli(dir, "train"), 2);
}

TEST(Cli, ConfigFileAndEnvironment) {
  TempDir dir;
  testing::writeFile(dir / "run.conf", "keys = G\npieces-per-key = 2\nbeats-per-piece = 8\nout-dir = from_file\n");
  ASSERT_EQ(runCli(dir, "synth --config run.conf --pieces-per-key 3"), 0);
  EXPECT_EQ(listMidiFiles(dir / "from_file").size(), 3u);
  EXPECT_NE(testing::readFile(dir / "cli.log").find("# effective configuration"), std::string::npos);

  ASSERT_EQ(runCli(dir, "synth --out-dir from_env", "SLICEVEC_CONFIG=run.conf"), 0);
  EXPECT_EQ(listMidiFiles(dir / "from_env").size(), 2u);

  testing::writeFile(dir / "bad.conf", "dims 4\n");
  EXPECT_EQ(runCli(dir, "synth --config bad.conf"), 1);
  EXPECT_EQ(runCli(dir, "synth --config missing.conf"), 1);
}

TEST(Cli, EndToEnd) {
  TempDir dir;
  testing::writeFile(dir / "run.conf",
                     "corpus-dir = corpus\nout-dir = corpus\nkeys = all\npieces-per-key = 2\nbeats-per-piece = 32\n"
                     "dims = 16\nsteps = 300\ncheckpoint-interval = 100\nbatch-size = 32\n");
  ASSERT_EQ(runCli(dir, "synth --config run.conf"), 0);
  EXPECT_EQ(listMidiFiles(dir / "corpus").size(), 24u);
  ASSERT_EQ(runCli(dir, "ingest --config run.conf"), 0);
  ASSERT_EQ(runCli(dir, "train --config run.conf"), 0);
  EXPECT_EQ(testing::readFile(dir / "loss.csv").substr(0, 18), "step,avg_loss\n100,");
  ASSERT_EQ(runCli(dir, "analyze all --config run.conf --out-dir analysis"), 0);
  for (const char* name : {"chord_distances.csv", "keys_major.csv", "keys_minor.csv", "angles_I-V_major.csv",
                           "angles_i-v_minor.csv", "angles_I-vi_major.csv"}) {
    EXPECT_TRUE(fs::exists(fs::path(dir / "analysis") / name)) << name;
  }
  ASSERT_EQ(runCli(dir, "generate --config run.conf --midi-in corpus/A-major_000.mid --top-n 5"), 0);
  const std::string generated = testing::readFile(dir / "generated.mid");
  const MidiPiece piece = parseMidi(std::span(reinterpret_cast<const std::uint8_t*>(generated.data()), generated.size()));
  const std::string original = testing::readFile(dir / "corpus/A-major_000.mid");
  const MidiPiece source = parseMidi(std::span(reinterpret_cast<const std::uint8_t*>(original.data()), original.size()));
  EXPECT_EQ(piece.grid.piece_length_beats, source.grid.piece_length_beats);
  EXPECT_EQ(testing::readFile(dir / "generated.csv").substr(0, 50).find("beat,original,substitute,cosine_distance,top_n"),
            0u);
  ASSERT_EQ(runCli(dir, "stats --config run.conf"), 0);
  EXPECT_NE(testing::readFile(dir / "cli.log").find("pieces"), std::string::npos);
  EXPECT_EQ(runCli(dir, "generate --config run.conf"), 1);
}

}  // namespace
}  // namespace slicevec
