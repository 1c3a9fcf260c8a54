// slicevec: ingest, synth, train, analyze, generate, stats.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "slicevec/error.h"
#include "slicevec/pipeline.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

slicevec::Settings loadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw slicevec::ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return slicevec::parseConfigText(ss.str());
  } catch (const slicevec::ConfigError& e) {
    throw slicevec::ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slice embeddings for polyphonic music"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "flat key = value config file (default: $SLICEVEC_CONFIG)");
  std::map<std::string, std::string> flag_values;
  for (const std::string& key : slicevec::configKeys()) {
    app.add_option("--" + key, flag_values[key]);
  }

  std::string which = "all";
  auto* ingest = app.add_subcommand("ingest", "slice a MIDI directory into corpus and vocabulary caches");
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus of diatonic progressions");
  auto* train = app.add_subcommand("train", "train slice embeddings from the caches");
  auto* analyze = app.add_subcommand("analyze", "export chord, key and analogy matrices");
  analyze->add_option("which", which, "chords, keys, analogy or all")
      ->check(CLI::IsMember({"chords", "keys", "analogy", "all"}));
  auto* generate = app.add_subcommand("generate", "rewrite a MIDI file by slice substitution");
  auto* stats = app.add_subcommand("stats", "summarize the caches");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    slicevec::Settings flags;
    for (const auto& [key, value] : flag_values) {
      if (app.count("--" + key) > 0) flags[key] = value;
    }
    if (config_path.empty()) {
      if (const char* env = std::getenv("SLICEVEC_CONFIG"); env != nullptr) config_path = env;
    }
    const slicevec::Settings file = config_path.empty() ? slicevec::Settings{} : loadConfigFile(config_path);
    const slicevec::PipelineConfig config = slicevec::resolveConfig(file, flags);

    std::cerr << "# effective configuration\n" << slicevec::dumpConfig(config) << '\n';

    if (*ingest) {
      slicevec::runIngest(config, std::cout);
    } else if (*synth) {
      slicevec::runSynth(config, std::cout);
    } else if (*train) {
      slicevec::runTrain(config, std::cout);
    } else if (*analyze) {
      for (const auto& path : slicevec::runAnalyze(config, which, std::cout)) {
        std::cout << "wrote " << path.string() << '\n';
      }
    } else if (*generate) {
      slicevec::runGenerate(config, std::cout);
    } else if (*stats) {
      slicevec::runStats(config, std::cout);
    }
  } catch (const slicevec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const slicevec::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const slicevec::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const slicevec::UndefinedMetricError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
