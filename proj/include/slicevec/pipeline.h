// The subcommands behind the slicevec tool, callable in-process.

#ifndef SLICEVEC_PIPELINE_H_
#define SLICEVEC_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "slicevec/config.h"
#include "slicevec/embedding.h"
#include "slicevec/synth.h"

namespace slicevec {

struct IngestReport {
  int pieces = 0;
  int files_skipped = 0;
  std::int64_t total_slices = 0;
  std::size_t unique_slices = 0;
  int vocab_size = 0;
  std::size_t folded_slices = 0;          // distinct slices mapped to UNK
  std::int64_t folded_occurrences = 0;    // occurrences mapped to UNK
};

/// MIDI files (*.mid, *.midi) directly inside `dir`, sorted by file name.
std::vector<std::filesystem::path> listMidiFiles(const std::filesystem::path& dir);

/// Slices every MIDI file in corpus_dir and writes the corpus and vocabulary
/// caches. Unparseable files are logged and skipped; DataError if none parse.
IngestReport runIngest(const PipelineConfig& config, std::ostream& log);

/// Writes synthesized pieces to out_dir as "<name>.mid". Returns the paths.
std::vector<std::filesystem::path> runSynth(const PipelineConfig& config, std::ostream& log);

/// Trains on the caches and writes the embedding file and loss CSV.
TrainingResult runTrain(const PipelineConfig& config, std::ostream& log);

/// which: "chords", "keys", "analogy" or "all". Returns the CSV files written.
std::vector<std::filesystem::path> runAnalyze(const PipelineConfig& config, const std::string& which,
                                              std::ostream& log);

/// Rewrites midi_in into midi_out and writes the per-beat diagnostics CSV.
std::vector<Substitution> runGenerate(const PipelineConfig& config, std::ostream& log);

/// Corpus and vocabulary summary from the caches.
void runStats(const PipelineConfig& config, std::ostream& out);

/// Loads the embedding file, attaching the vocabulary cache when present.
EmbeddingSpace loadEmbeddingFile(const PipelineConfig& config);

/// Key-labelled pieces found in corpus_dir (file names as written by synth).
std::vector<KeyedPiece> loadKeyedPieces(const std::filesystem::path& dir, std::ostream& log);

}  // namespace slicevec

#endif  // SLICEVEC_PIPELINE_H_
