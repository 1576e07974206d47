#include "mh4/vocab.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "mh4/transitions.hpp"

namespace mh4 {

namespace {

const char* const kReservedNames[SymbolTable::kReserved] = {"<unk>", "<pad>", "<root>", "<end>"};

std::vector<std::pair<std::string, int>> sorted_counts(
    const std::unordered_map<std::string, int>& counts, int min_count) {
  std::vector<std::pair<std::string, int>> items;
  for (const auto& [s, c] : counts) {
    if (c >= min_count) items.emplace_back(s, c);
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return items;
}

}  // namespace

SymbolTable::SymbolTable() {
  for (const char* name : kReservedNames) add(name, 0);
}

void SymbolTable::add(std::string s, int count) {
  index_.emplace(s, static_cast<int>(names_.size()));
  names_.push_back(std::move(s));
  counts_.push_back(count);
}

SymbolTable SymbolTable::build(const std::unordered_map<std::string, int>& counts, int min_count) {
  SymbolTable t;
  for (auto& [s, c] : sorted_counts(counts, min_count)) t.add(s, c);
  return t;
}

SymbolTable SymbolTable::from_entries(std::vector<std::string> entries, std::vector<int> counts) {
  if (entries.size() != counts.size()) throw std::invalid_argument("symbol table: size mismatch");
  SymbolTable t;
  for (std::size_t i = 0; i < entries.size(); ++i) t.add(std::move(entries[i]), counts[i]);
  return t;
}

int SymbolTable::id(std::string_view s) const {
  auto it = index_.find(std::string(s));
  // Reserved names are not reachable from token text.
  if (it == index_.end() || it->second < kReserved) return kUnknown;
  return it->second;
}

std::string suffix_of(std::string_view form) {
  std::size_t start = form.size();
  int points = 0;
  while (start > 0 && points < 3) {
    --start;
    // Skip UTF-8 continuation bytes.
    if ((static_cast<unsigned char>(form[start]) & 0xC0) != 0x80) ++points;
  }
  return std::string(form.substr(start));
}

Vocabulary Vocabulary::build(const std::vector<Sentence>& treebank, int min_count) {
  std::unordered_map<std::string, int> words;
  std::unordered_map<std::string, int> suffixes;
  std::unordered_map<std::string, int> labels;
  for (const auto& s : treebank) {
    for (const auto& tok : s.tokens) {
      ++words[tok.form];
      ++suffixes[suffix_of(tok.form)];
      if (!tok.deprel.empty() && tok.deprel != "_") ++labels[tok.deprel];
    }
  }
  Vocabulary v;
  v.words_ = SymbolTable::build(words, min_count);
  v.suffixes_ = SymbolTable::build(suffixes, min_count);
  for (const auto& [label, c] : sorted_counts(labels, 1)) v.labels_.intern(label);
  return v;
}

std::vector<std::string> Vocabulary::tags() const {
  std::vector<std::string> out;
  for (Transition t : kAllTransitions) out.emplace_back(tag_name(t));
  return out;
}

EncodedSentence Vocabulary::encode(const Sentence& s) const {
  EncodedSentence e;
  e.words.reserve(s.tokens.size());
  e.suffixes.reserve(s.tokens.size());
  for (const auto& tok : s.tokens) {
    e.words.push_back(words_.id(tok.form));
    e.suffixes.push_back(suffixes_.id(suffix_of(tok.form)));
  }
  return e;
}

std::vector<int> Vocabulary::label_ids(const Sentence& s) const {
  std::vector<int> out(s.tokens.size() + 1, -1);
  for (std::size_t i = 0; i < s.tokens.size(); ++i) out[i + 1] = labels_.find(s.tokens[i].deprel);
  return out;
}

void Vocabulary::set_tables(SymbolTable words, SymbolTable suffixes, LabelTable labels) {
  words_ = std::move(words);
  suffixes_ = std::move(suffixes);
  labels_ = std::move(labels);
}

void Vocabulary::write_tsv(std::ostream& out) const {
  for (int i = 0; i < words_.size(); ++i) {
    out << "word\t" << i << '\t' << words_.name(i) << '\t' << words_.count(i) << '\n';
  }
  for (int i = 0; i < suffixes_.size(); ++i) {
    out << "suffix\t" << i << '\t' << suffixes_.name(i) << '\t' << suffixes_.count(i) << '\n';
  }
  for (int i = 0; i < labels_.size(); ++i) out << "label\t" << i << '\t' << labels_.name(i) << "\t-\n";
  const auto t = tags();
  for (std::size_t i = 0; i < t.size(); ++i) out << "tag\t" << i << '\t' << t[i] << "\t-\n";
}

}  // namespace mh4
