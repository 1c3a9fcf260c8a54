// Pipeline configuration: defaults, flat "key = value" files and overrides.

#ifndef SLICEVEC_CONFIG_H_
#define SLICEVEC_CONFIG_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "slicevec/generator.h"
#include "slicevec/trainer.h"

namespace slicevec {

struct PipelineConfig {
  std::string corpus_dir = "corpus";
  std::string corpus_cache = "slices.corpus";
  std::string vocab_cache = "slices.vocab";
  std::string embedding_file = "slices.vec";
  std::string loss_csv = "loss.csv";
  std::string out_dir = "out";
  int vocab_size = 500;
  TrainingConfig training;
  GeneratorConfig generator;
  // synth
  std::string keys = "all";
  int pieces_per_key = 4;
  int beats_per_piece = 104;
  // analyze
  std::string tonics = "C,G,F";
  // generate
  std::string midi_in;
  std::string midi_out = "generated.mid";
  std::string diagnostics_csv = "generated.csv";

  /// Throws ConfigError on out-of-range values or clashing paths.
  void validate() const;
};

using Settings = std::map<std::string, std::string, std::less<>>;

/// Flat "key = value" lines; '#' starts a comment; blank lines ignored.
/// Throws ConfigError naming the offending line.
Settings parseConfigText(std::string_view text);

/// Every recognised key, in dump order. Keys are the kebab-case flag names.
const std::vector<std::string>& configKeys();

/// Applies settings over `config`. Unknown keys or bad values throw ConfigError.
void applySettings(PipelineConfig& config, const Settings& settings);

/// Defaults, then the config file's settings, then command-line flags.
/// The result is validated.
PipelineConfig resolveConfig(const Settings& file_settings, const Settings& flag_settings);

/// The effective configuration as a loadable config file.
std::string dumpConfig(const PipelineConfig& config);

}  // namespace slicevec

#endif  // SLICEVEC_CONFIG_H_
