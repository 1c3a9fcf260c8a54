#include "slicevec/config.h"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "slicevec/error.h"
#include "text_format.h"

namespace slicevec {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class Int>
Int parseInt(std::string_view key, std::string_view text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(text) + "'");
  }
  return v;
}

double parseReal(std::string_view key, std::string_view text) {
  try {
    return detail::parseDouble(text);
  } catch (const DataError&) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(text) + "'");
  }
}

bool parseBool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects true or false, got '" + std::string(text) + "'");
}

struct Field {
  std::string key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class Int>
Field intField(std::string key, Int PipelineConfig::*member) {
  return {key, [key, member](PipelineConfig& c, std::string_view v) { c.*member = parseInt<Int>(key, v); },
          [member](const PipelineConfig& c) { return std::to_string(c.*member); }};
}

template <class Int>
Field trainingInt(std::string key, Int TrainingConfig::*member) {
  return {key, [key, member](PipelineConfig& c, std::string_view v) { c.training.*member = parseInt<Int>(key, v); },
          [member](const PipelineConfig& c) { return std::to_string(c.training.*member); }};
}

Field stringField(std::string key, std::string PipelineConfig::*member) {
  return {key, [member](PipelineConfig& c, std::string_view v) { c.*member = std::string(v); },
          [member](const PipelineConfig& c) { return c.*member; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      stringField("corpus-dir", &PipelineConfig::corpus_dir),
      stringField("corpus-cache", &PipelineConfig::corpus_cache),
      stringField("vocab-cache", &PipelineConfig::vocab_cache),
      stringField("embedding-file", &PipelineConfig::embedding_file),
      stringField("loss-csv", &PipelineConfig::loss_csv),
      stringField("out-dir", &PipelineConfig::out_dir),
      intField("vocab-size", &PipelineConfig::vocab_size),
      trainingInt("dims", &TrainingConfig::dims),
      trainingInt("window", &TrainingConfig::window),
      trainingInt("num-skips", &TrainingConfig::num_skips),
      trainingInt("negative-samples", &TrainingConfig::negative_samples),
      {"learning-rate",
       [](PipelineConfig& c, std::string_view v) { c.training.learning_rate = parseReal("learning-rate", v); },
       [](const PipelineConfig& c) { return detail::shortestDecimal(c.training.learning_rate); }},
      trainingInt("batch-size", &TrainingConfig::batch_size),
      trainingInt("steps", &TrainingConfig::steps),
      trainingInt("checkpoint-interval", &TrainingConfig::checkpoint_interval),
      trainingInt("threads", &TrainingConfig::threads),
      trainingInt("seed", &TrainingConfig::seed),
      {"top-n", [](PipelineConfig& c, std::string_view v) { c.generator.top_n = parseInt<int>("top-n", v); },
       [](const PipelineConfig& c) { return std::to_string(c.generator.top_n); }},
      {"exclude-identity",
       [](PipelineConfig& c, std::string_view v) { c.generator.exclude_identity = parseBool("exclude-identity", v); },
       [](const PipelineConfig& c) { return std::string(c.generator.exclude_identity ? "true" : "false"); }},
      stringField("keys", &PipelineConfig::keys),
      intField("pieces-per-key", &PipelineConfig::pieces_per_key),
      intField("beats-per-piece", &PipelineConfig::beats_per_piece),
      stringField("tonics", &PipelineConfig::tonics),
      stringField("midi-in", &PipelineConfig::midi_in),
      stringField("midi-out", &PipelineConfig::midi_out),
      stringField("diagnostics-csv", &PipelineConfig::diagnostics_csv),
  };
  return table;
}

}  // namespace

void PipelineConfig::validate() const {
  training.validate();
  generator.validate();
  if (vocab_size < 2) throw ConfigError("vocab-size must be at least 2");
  if (pieces_per_key < 1) throw ConfigError("pieces-per-key must be at least 1");
  if (beats_per_piece < 1) throw ConfigError("beats-per-piece must be at least 1");
  const std::vector<std::string> paths = {corpus_cache, vocab_cache, embedding_file, loss_csv};
  std::set<std::string> seen;
  for (const auto& p : paths) {
    if (p.empty()) throw ConfigError("cache paths must not be empty");
    if (!seen.insert(p).second) throw ConfigError("cache paths must be distinct: '" + p + "' repeats");
  }
}

Settings parseConfigText(std::string_view text) {
  Settings settings;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": missing key");
    settings[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return settings;
}

const std::vector<std::string>& configKeys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const Field& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

void applySettings(PipelineConfig& config, const Settings& settings) {
  for (const auto& [key, value] : settings) {
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(config, value);
  }
}

PipelineConfig resolveConfig(const Settings& file_settings, const Settings& flag_settings) {
  PipelineConfig config;
  applySettings(config, file_settings);
  applySettings(config, flag_settings);
  config.validate();
  return config;
}

std::string dumpConfig(const PipelineConfig& config) {
  std::ostringstream out;
  for (const Field& f : fields()) out << f.key << " = " << f.get(config) << '\n';
  return out.str();
}

}  // namespace slicevec
