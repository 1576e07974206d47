// Symbol tables for the neural scorer: word forms, 3-character suffixes,
// dependency labels and transition tags.

#ifndef MH4_VOCAB_HPP_
#define MH4_VOCAB_HPP_

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mh4/conllu.hpp"
#include "mh4/dep_tree.hpp"

namespace mh4 {

/// Dense string table with four reserved ids. Remaining entries are ordered
/// by (frequency desc, string asc).
class SymbolTable {
 public:
  static constexpr int kUnknown = 0;
  static constexpr int kPad = 1;
  static constexpr int kRoot = 2;
  static constexpr int kEnd = 3;
  static constexpr int kReserved = 4;

  SymbolTable();

  /// Keeps entries seen at least min_count times.
  static SymbolTable build(const std::unordered_map<std::string, int>& counts, int min_count);
  /// Rebuilds from stored entries (reserved names excluded).
  static SymbolTable from_entries(std::vector<std::string> entries, std::vector<int> counts);

  int id(std::string_view s) const;  // kUnknown when absent
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  int count(int id) const { return counts_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(names_.size()); }
  bool operator==(const SymbolTable& o) const { return names_ == o.names_ && counts_ == o.counts_; }

 private:
  void add(std::string s, int count);
  std::vector<std::string> names_;
  std::vector<int> counts_;
  std::unordered_map<std::string, int> index_;
};

/// Last three code points of a UTF-8 form (the whole form if shorter).
std::string suffix_of(std::string_view form);

struct EncodedSentence {
  std::vector<int> words;     // token i at index i-1
  std::vector<int> suffixes;
  int n() const { return static_cast<int>(words.size()); }
};

class Vocabulary {
 public:
  static constexpr int kDefaultMinCount = 2;

  static Vocabulary build(const std::vector<Sentence>& treebank, int min_count = kDefaultMinCount);

  const SymbolTable& words() const { return words_; }
  const SymbolTable& suffixes() const { return suffixes_; }
  const LabelTable& labels() const { return labels_; }
  /// Transition tag names in tie-break order.
  std::vector<std::string> tags() const;

  EncodedSentence encode(const Sentence& s) const;
  /// Label ids of gold arcs, -1 for labels outside the table. Index 0 unused.
  std::vector<int> label_ids(const Sentence& s) const;

  void set_tables(SymbolTable words, SymbolTable suffixes, LabelTable labels);

  /// kind<TAB>id<TAB>symbol<TAB>count, one row per entry.
  void write_tsv(std::ostream& out) const;

  bool operator==(const Vocabulary& o) const {
    return words_ == o.words_ && suffixes_ == o.suffixes_ && labels_.names() == o.labels_.names();
  }

 private:
  SymbolTable words_;
  SymbolTable suffixes_;
  LabelTable labels_;
};

}  // namespace mh4

#endif  // MH4_VOCAB_HPP_
