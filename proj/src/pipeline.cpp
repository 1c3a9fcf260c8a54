#include "slicevec/pipeline.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "slicevec/error.h"
#include "text_format.h"

namespace slicevec {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> readBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ifstream openInput(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

template <class Writer>
void writeFile(const fs::path& path, Writer&& write) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write(out);
  out.flush();
  if (!out) throw DataError("error writing " + path.string());
}

void writeBytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  writeFile(path, [&](std::ostream& out) {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  });
}

std::vector<std::string> splitList(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

std::vector<fs::path> listMidiFiles(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("corpus directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".mid" || ext == ".midi") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

IngestReport runIngest(const PipelineConfig& config, std::ostream& log) {
  IngestReport report;
  std::vector<std::vector<Slice>> pieces;
  for (const fs::path& file : listMidiFiles(config.corpus_dir)) {
    try {
      pieces.push_back(slicePiece(parseMidi(readBytes(file))));
    } catch (const DataError& e) {
      log << "skipping " << file.filename().string() << ": " << e.what() << '\n';
      ++report.files_skipped;
    }
  }
  if (pieces.empty()) throw DataError("no parseable MIDI files in " + config.corpus_dir);

  SliceCounter counter;
  for (const auto& p : pieces) counter.add(p);
  if (counter.total() == 0) throw DataError("corpus contains no beats");
  const Vocabulary vocab = Vocabulary::build(counter, config.vocab_size);

  writeFile(config.corpus_cache, [&](std::ostream& out) { writeSliceCorpus(out, pieces); });
  writeFile(config.vocab_cache, [&](std::ostream& out) { writeVocabulary(out, vocab); });

  report.pieces = static_cast<int>(pieces.size());
  report.total_slices = counter.total();
  report.unique_slices = counter.distinct();
  report.vocab_size = vocab.size();
  report.folded_slices = counter.distinct() - static_cast<std::size_t>(vocab.size() - 1);
  report.folded_occurrences = vocab.count(vocab.unkId());
  log << "pieces: " << report.pieces << "  (skipped files: " << report.files_skipped << ")\n"
      << "slices: " << report.total_slices << "  unique: " << report.unique_slices << '\n'
      << "vocabulary: " << report.vocab_size << " tokens incl. UNK; folded into UNK: " << report.folded_slices
      << " slices, " << report.folded_occurrences << " occurrences\n";
  return report;
}

std::vector<fs::path> runSynth(const PipelineConfig& config, std::ostream& log) {
  SynthConfig synth;
  synth.keys = parseKeyList(config.keys);
  synth.pieces_per_key = config.pieces_per_key;
  synth.beats_per_piece = config.beats_per_piece;
  synth.seed = config.training.seed;
  std::vector<fs::path> written;
  for (const SynthPiece& piece : synthesizeCorpus(synth)) {
    const fs::path path = fs::path(config.out_dir) / (piece.name + ".mid");
    writeBytes(path, encodeMidi(piece.midi.events, piece.midi.grid.ticks_per_beat));
    written.push_back(path);
  }
  log << "wrote " << written.size() << " pieces to " << config.out_dir << '\n';
  return written;
}

TrainingResult runTrain(const PipelineConfig& config, std::ostream& log) {
  auto corpus_in = openInput(config.corpus_cache);
  const auto pieces = readSliceCorpus(corpus_in);
  auto vocab_in = openInput(config.vocab_cache);
  const Vocabulary vocab = readVocabulary(vocab_in);
  const EncodedCorpus corpus = encodeCorpus(pieces, vocab);
  log << "training on " << corpus.pieces.size() << " pieces, " << corpus.totalTokens() << " tokens, vocabulary "
      << vocab.size() << '\n';

  TrainingResult result = train(corpus, vocab, config.training, [&](const LossCheckpoint& c) {
    log << "step " << c.step << "  avg_loss " << detail::significant6(c.average_loss) << '\n';
  });
  const EmbeddingSpace space = EmbeddingSpace::fromTraining(vocab, result.embedding);
  writeFile(config.embedding_file, [&](std::ostream& out) { saveEmbedding(out, space); });
  writeFile(config.loss_csv, [&](std::ostream& out) { writeLossCsv(out, result.trace); });
  return result;
}

EmbeddingSpace loadEmbeddingFile(const PipelineConfig& config) {
  auto in = openInput(config.embedding_file);
  if (fs::exists(config.vocab_cache)) {
    auto vocab_in = openInput(config.vocab_cache);
    const Vocabulary vocab = readVocabulary(vocab_in);
    return loadEmbedding(in, vocab);
  }
  return loadEmbedding(in);
}

std::vector<KeyedPiece> loadKeyedPieces(const fs::path& dir, std::ostream& log) {
  std::vector<KeyedPiece> pieces;
  for (const fs::path& file : listMidiFiles(dir)) {
    const auto key = keyFromName(file.stem().string());
    if (!key) continue;
    try {
      pieces.push_back({file.stem().string(), *key, slicePiece(parseMidi(readBytes(file)))});
    } catch (const DataError& e) {
      log << "skipping " << file.filename().string() << ": " << e.what() << '\n';
    }
  }
  return pieces;
}

std::vector<fs::path> runAnalyze(const PipelineConfig& config, const std::string& which, std::ostream& log) {
  if (which != "chords" && which != "keys" && which != "analogy" && which != "all") {
    throw ConfigError("analysis must be one of chords, keys, analogy, all");
  }
  const EmbeddingSpace space = loadEmbeddingFile(config);
  const fs::path out_dir = config.out_dir;
  std::vector<fs::path> written;
  auto emit = [&](const fs::path& path, const LabeledMatrix& m) {
    writeFile(path, [&](std::ostream& out) { writeMatrixCsv(out, m); });
    written.push_back(path);
  };

  if (which == "chords" || which == "all") {
    const std::vector<FunctionalRole> roles = {FunctionalRole::kV,    FunctionalRole::kIV,  FunctionalRole::kVi,
                                               FunctionalRole::kIIIb, FunctionalRole::kIIb, FunctionalRole::kMinorV};
    std::vector<std::string> role_labels;
    for (const auto r : roles) role_labels.push_back(roleName(r));
    std::vector<std::string> tonic_labels;
    std::vector<std::vector<RoleDistance>> profiles;
    for (const std::string& name : splitList(config.tonics)) {
      const auto pc = parsePitchClass(name);
      if (!pc) throw ConfigError("unknown tonic '" + name + "'");
      const ChordSpec tonic{*pc, ChordQuality::kMajor};
      try {
        profiles.push_back(chordDistanceProfile(space, tonic, roles));
        tonic_labels.push_back(tonic.name());
      } catch (const DataError& e) {
        log << e.what() << '\n';
      }
    }
    LabeledMatrix m(tonic_labels, role_labels);
    for (std::size_t t = 0; t < profiles.size(); ++t) {
      double near = 0.0, far = 0.0;
      int n_near = 0, n_far = 0;
      for (std::size_t r = 0; r < roles.size(); ++r) {
        const auto& d = profiles[t][r].distance;
        m.at(t, r) = d ? *d : std::numeric_limits<double>::quiet_NaN();
        if (!d) continue;
        if (r < 3) {
          near += *d;
          ++n_near;
        } else {
          far += *d;
          ++n_far;
        }
      }
      log << tonic_labels[t] << ": mean distance to V/IV/vi " << detail::significant6(near / n_near)
          << ", to IIIb/IIb/v " << detail::significant6(far / n_far) << '\n';
    }
    emit(out_dir / "chord_distances.csv", m);
  }

  if (which == "keys" || which == "all") {
    const auto pieces = loadKeyedPieces(config.corpus_dir, log);
    for (const Mode mode : {Mode::kMajor, Mode::kMinor}) {
      const char* mode_name = mode == Mode::kMajor ? "major" : "minor";
      try {
        const KeySimilarityResult r = keySimilarityMatrix(space, pieces, mode);
        for (const auto& w : r.warnings) log << w << '\n';
        std::vector<double> dist, steps;
        for (std::size_t i = 0; i < 12; ++i) {
          for (std::size_t j = i + 1; j < 12; ++j) {
            dist.push_back(r.matrix.at(i, j));
            steps.push_back(fifthsDistance(kCircleOfFifths[i], kCircleOfFifths[j]));
          }
        }
        log << mode_name << " keys: " << r.pieces_used << " pieces, Spearman vs circle-of-fifths distance "
            << detail::significant6(spearmanCorrelation(dist, steps)) << '\n';
        emit(out_dir / (std::string("keys_") + mode_name + ".csv"), r.matrix);
      } catch (const DataError& e) {
        log << mode_name << " keys skipped: " << e.what() << '\n';
      }
    }
  }

  if (which == "analogy" || which == "all") {
    struct PairSpec {
      FunctionalRole from, to;
      Mode mode;
    };
    for (const PairSpec& p : {PairSpec{FunctionalRole::kI, FunctionalRole::kV, Mode::kMajor},
                              PairSpec{FunctionalRole::kMinorI, FunctionalRole::kMinorV, Mode::kMinor},
                              PairSpec{FunctionalRole::kI, FunctionalRole::kVi, Mode::kMajor}}) {
      const AnalogyResult r = analogyAngleMatrix(space, p.from, p.to, p.mode);
      const std::string tag = roleName(p.from) + "-" + roleName(p.to);
      const auto adjacent = fifthAdjacentValues(r.matrix);
      log << tag << ": fifth-adjacent angles std " << detail::significant6(standardDeviation(adjacent));
      if (!r.missing_chords.empty()) log << " (missing chords: " << r.missing_chords.size() << ")";
      log << '\n';
      emit(out_dir / ("angles_" + tag + "_" + (p.mode == Mode::kMajor ? "major" : "minor") + ".csv"), r.matrix);
    }
  }
  return written;
}

std::vector<Substitution> runGenerate(const PipelineConfig& config, std::ostream& log) {
  if (config.midi_in.empty()) throw ConfigError("generate needs --midi-in");
  const EmbeddingSpace space = loadEmbeddingFile(config);
  const MidiPiece piece = parseMidi(readBytes(config.midi_in));
  const std::vector<Slice> slices = slicePiece(piece);
  const std::vector<Substitution> beats = rewritePiece(slices, space, config.generator);
  std::vector<Slice> substitutes;
  int changed = 0;
  for (const Substitution& s : beats) {
    if (!s.warning.empty()) log << "warning: " << s.warning << '\n';
    substitutes.push_back(s.substitute);
    changed += s.substitute != s.original;
  }
  writeBytes(config.midi_out, emitMidi(piece, substitutes));
  writeFile(config.diagnostics_csv,
            [&](std::ostream& out) { writeDiagnosticsCsv(out, beats, config.generator.top_n); });
  log << "substituted " << changed << " of " << beats.size() << " beats (top_n " << config.generator.top_n << ")\n";
  return beats;
}

void runStats(const PipelineConfig& config, std::ostream& out) {
  auto corpus_in = openInput(config.corpus_cache);
  const auto pieces = readSliceCorpus(corpus_in);
  SliceCounter counter;
  for (const auto& p : pieces) counter.add(p);
  out << "pieces: " << pieces.size() << "\nslices: " << counter.total() << "\nunique slices: " << counter.distinct()
      << '\n';
  if (fs::exists(config.vocab_cache)) {
    auto vocab_in = openInput(config.vocab_cache);
    const Vocabulary vocab = readVocabulary(vocab_in);
    out << "vocabulary: " << vocab.size() << " tokens, UNK occurrences " << vocab.count(vocab.unkId()) << '\n';
    out << "most frequent:";
    for (TokenId id = 1; id < std::min(vocab.size(), 11); ++id) out << ' ' << vocab.label(id) << '(' << vocab.count(id) << ')';
    out << '\n';
  }
}

}  // namespace slicevec
