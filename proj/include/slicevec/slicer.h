// Beat slicing, the frequency-ranked vocabulary and token-id corpora.

#ifndef SLICEVEC_SLICER_H_
#define SLICEVEC_SLICER_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicevec/midi.h"
#include "slicevec/slice.h"

namespace slicevec {

using TokenId = std::int32_t;

/// One slice per beat of the piece; silent beats become the rest slice.
std::vector<Slice> slicePiece(const MidiPiece& piece);

/// Occurrence counts over a stream of slices.
class SliceCounter {
 public:
  void add(Slice s, std::int64_t n = 1);
  void add(std::span<const Slice> slices);

  const std::map<Slice, std::int64_t>& counts() const { return counts_; }
  std::int64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }

 private:
  std::map<Slice, std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// Token ids 0..size-1. Id 0 is UNK; ids 1.. are the retained slices by
/// descending count, ties broken by canonical form.
class Vocabulary {
 public:
  struct Entry {
    std::optional<Slice> slice;  // empty for UNK
    std::int64_t count = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  static constexpr TokenId kUnkId = 0;

  /// Keeps the max_size - 1 most frequent slices; the rest fold into UNK,
  /// whose count aggregates theirs. Throws DataError on an empty stream and
  /// ConfigError when max_size < 2.
  static Vocabulary build(const SliceCounter& counter, int max_size);

  /// Validates a persisted entry list (exactly one UNK, at id 0; no duplicates).
  static Vocabulary fromEntries(std::vector<Entry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  TokenId unkId() const { return kUnkId; }
  bool isUnk(TokenId id) const { return id == kUnkId; }

  /// Id of the slice, or UNK when it was not retained.
  TokenId tokenOf(Slice s) const;
  std::optional<TokenId> find(Slice s) const;
  /// Empty for UNK. Throws std::out_of_range on invalid ids.
  std::optional<Slice> sliceOf(TokenId id) const;
  /// Canonical form, or "UNK".
  std::string label(TokenId id) const;
  std::int64_t count(TokenId id) const;
  std::vector<std::int64_t> counts() const;
  const std::vector<Entry>& entries() const { return entries_; }

  /// Same id <-> slice mapping; counts ignored.
  bool sameTokens(const Vocabulary& other) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.entries_ == b.entries_; }

 private:
  void index();

  std::vector<Entry> entries_;
  std::map<Slice, TokenId> token_of_;
};

struct EncodedCorpus {
  std::vector<std::vector<TokenId>> pieces;

  std::int64_t totalTokens() const;
};

EncodedCorpus encodeCorpus(const std::vector<std::vector<Slice>>& pieces, const Vocabulary& vocab);

/// Token labels of an encoded piece (canonical forms and "UNK").
std::vector<std::string> decodePiece(const std::vector<TokenId>& piece, const Vocabulary& vocab);

// Cache files.
//   corpus:     "SLICECORPUS v1 <n_pieces>", then one line per piece of
//               space-separated canonical forms.
//   vocabulary: "SLICEVOCAB v1 <size>", then "<id> <form> <count>" by id.
void writeSliceCorpus(std::ostream& out, const std::vector<std::vector<Slice>>& pieces);
std::vector<std::vector<Slice>> readSliceCorpus(std::istream& in);
void writeVocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary readVocabulary(std::istream& in);

}  // namespace slicevec

#endif  // SLICEVEC_SLICER_H_
