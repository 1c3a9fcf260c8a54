#include "slicevec/slicer.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "slicevec/error.h"

namespace slicevec {

std::vector<Slice> slicePiece(const MidiPiece& piece) {
  std::vector<Slice> slices;
  for (const auto& pitches : beatPitchSets(piece.events, piece.grid)) {
    slices.push_back(makeSlice(pitches));
  }
  return slices;
}

void SliceCounter::add(Slice s, std::int64_t n) {
  counts_[s] += n;
  total_ += n;
}

void SliceCounter::add(std::span<const Slice> slices) {
  for (const Slice s : slices) add(s);
}

Vocabulary Vocabulary::build(const SliceCounter& counter, int max_size) {
  if (max_size < 2) throw ConfigError("vocabulary size must be at least 2");
  if (counter.total() == 0) throw DataError("cannot build a vocabulary from an empty slice stream");

  struct Ranked {
    Slice slice;
    std::int64_t count;
    std::string form;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(counter.distinct());
  for (const auto& [slice, count] : counter.counts()) ranked.push_back({slice, count, slice.canonical()});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.form < b.form;
  });

  const std::size_t keep = std::min(ranked.size(), static_cast<std::size_t>(max_size - 1));
  Vocabulary vocab;
  vocab.entries_.push_back({std::nullopt, 0});
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (i < keep) {
      vocab.entries_.push_back({ranked[i].slice, ranked[i].count});
    } else {
      vocab.entries_[kUnkId].count += ranked[i].count;
    }
  }
  vocab.index();
  return vocab;
}

Vocabulary Vocabulary::fromEntries(std::vector<Entry> entries) {
  if (entries.size() < 2) throw DataError("vocabulary needs UNK plus at least one slice");
  if (entries[kUnkId].slice.has_value()) throw DataError("vocabulary id 0 must be UNK");
  Vocabulary vocab;
  vocab.entries_ = std::move(entries);
  for (std::size_t i = 0; i < vocab.entries_.size(); ++i) {
    const Entry& e = vocab.entries_[i];
    if (e.count < 0) throw DataError("negative count for token " + std::to_string(i));
    if (i != kUnkId) {
      if (!e.slice) throw DataError("more than one UNK entry");
      if (vocab.token_of_.count(*e.slice)) throw DataError("duplicate slice " + e.slice->canonical());
      vocab.token_of_[*e.slice] = static_cast<TokenId>(i);
    }
  }
  return vocab;
}

void Vocabulary::index() {
  token_of_.clear();
  for (std::size_t i = 1; i < entries_.size(); ++i) token_of_[*entries_[i].slice] = static_cast<TokenId>(i);
}

TokenId Vocabulary::tokenOf(Slice s) const { return find(s).value_or(kUnkId); }

std::optional<TokenId> Vocabulary::find(Slice s) const {
  const auto it = token_of_.find(s);
  if (it == token_of_.end()) return std::nullopt;
  return it->second;
}

std::optional<Slice> Vocabulary::sliceOf(TokenId id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id " + std::to_string(id) + " out of range");
  return entries_[static_cast<std::size_t>(id)].slice;
}

std::string Vocabulary::label(TokenId id) const {
  const auto slice = sliceOf(id);
  return slice ? slice->canonical() : "UNK";
}

std::int64_t Vocabulary::count(TokenId id) const {
  sliceOf(id);
  return entries_[static_cast<std::size_t>(id)].count;
}

std::vector<std::int64_t> Vocabulary::counts() const {
  std::vector<std::int64_t> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) out.push_back(e.count);
  return out;
}

bool Vocabulary::sameTokens(const Vocabulary& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].slice != other.entries_[i].slice) return false;
  }
  return true;
}

std::int64_t EncodedCorpus::totalTokens() const {
  std::int64_t total = 0;
  for (const auto& p : pieces) total += static_cast<std::int64_t>(p.size());
  return total;
}

EncodedCorpus encodeCorpus(const std::vector<std::vector<Slice>>& pieces, const Vocabulary& vocab) {
  EncodedCorpus corpus;
  corpus.pieces.reserve(pieces.size());
  for (const auto& piece : pieces) {
    std::vector<TokenId> ids;
    ids.reserve(piece.size());
    for (const Slice s : piece) ids.push_back(vocab.tokenOf(s));
    corpus.pieces.push_back(std::move(ids));
  }
  return corpus;
}

std::vector<std::string> decodePiece(const std::vector<TokenId>& piece, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(piece.size());
  for (const TokenId id : piece) out.push_back(vocab.label(id));
  return out;
}

namespace {

// Reads "<magic> v1 <n>" and returns n.
long long readHeader(std::istream& in, const std::string& magic) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing " + magic + " header");
  std::istringstream fields(line);
  std::string tag, version;
  long long n = -1;
  std::string extra;
  if (!(fields >> tag >> version >> n) || tag != magic || version != "v1" || n < 0 || (fields >> extra)) {
    throw DataError("bad " + magic + " header: '" + line + "'");
  }
  return n;
}

}  // namespace

void writeSliceCorpus(std::ostream& out, const std::vector<std::vector<Slice>>& pieces) {
  out << "SLICECORPUS v1 " << pieces.size() << '\n';
  for (const auto& piece : pieces) {
    for (std::size_t i = 0; i < piece.size(); ++i) {
      if (i) out << ' ';
      out << piece[i].canonical();
    }
    out << '\n';
  }
}

std::vector<std::vector<Slice>> readSliceCorpus(std::istream& in) {
  const long long n = readHeader(in, "SLICECORPUS");
  std::vector<std::vector<Slice>> pieces;
  pieces.reserve(static_cast<std::size_t>(n));
  std::string line;
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw DataError("corpus file ends after " + std::to_string(i) + " pieces");
    std::istringstream fields(line);
    std::vector<Slice> piece;
    std::string form;
    while (fields >> form) piece.push_back(Slice::parse(form));
    pieces.push_back(std::move(piece));
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw DataError("trailing data after corpus pieces");
  }
  return pieces;
}

void writeVocabulary(std::ostream& out, const Vocabulary& vocab) {
  out << "SLICEVOCAB v1 " << vocab.size() << '\n';
  for (TokenId id = 0; id < vocab.size(); ++id) {
    out << id << ' ' << vocab.label(id) << ' ' << vocab.count(id) << '\n';
  }
}

Vocabulary readVocabulary(std::istream& in) {
  const long long n = readHeader(in, "SLICEVOCAB");
  std::vector<Vocabulary::Entry> entries;
  std::string line;
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw DataError("vocabulary file ends after " + std::to_string(i) + " entries");
    std::istringstream fields(line);
    long long id = -1;
    std::string form;
    long long count = -1;
    if (!(fields >> id >> form >> count) || id != i) {
      throw DataError("bad vocabulary line " + std::to_string(i + 2) + ": '" + line + "'");
    }
    Vocabulary::Entry entry;
    if (form != "UNK") entry.slice = Slice::parse(form);
    entry.count = count;
    entries.push_back(entry);
  }
  return Vocabulary::fromEntries(std::move(entries));
}

}  // namespace slicevec
