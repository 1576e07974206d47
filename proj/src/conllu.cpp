#include "mh4/conllu.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mh4 {

namespace {

constexpr std::size_t kColumns = 10;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool is_range_id(std::string_view id) {
  auto dash = id.find('-');
  return dash != std::string_view::npos && parse_int(id.substr(0, dash)) &&
         parse_int(id.substr(dash + 1));
}

bool is_empty_node_id(std::string_view id) {
  auto dot = id.find('.');
  return dot != std::string_view::npos && parse_int(id.substr(0, dot)) &&
         parse_int(id.substr(dot + 1));
}

class BlockBuilder {
 public:
  explicit BlockBuilder(const ReadOptions& options) : options_(options) {}

  bool empty() const { return sentence_.layout.empty(); }

  void add_line(std::string_view line, std::size_t line_no) {
    if (line.front() == '#') {
      sentence_.layout.push_back({LineKind::kComment, sentence_.comments.size()});
      sentence_.comments.emplace_back(line);
      return;
    }
    auto fields = split_tabs(line);
    if (fields.size() != kColumns) {
      throw ConlluError(line_no, "expected 10 tab-separated columns, found " +
                                     std::to_string(fields.size()));
    }
    if (is_range_id(fields[0]) || is_empty_node_id(fields[0])) {
      sentence_.layout.push_back({LineKind::kExtra, sentence_.extras.size()});
      sentence_.extras.emplace_back(line);
      return;
    }
    auto id = parse_int(fields[0]);
    if (!id) throw ConlluError(line_no, "non-integer token id '" + std::string(fields[0]) + "'");
    if (*id != sentence_.n() + 1) {
      throw ConlluError(line_no, "token id " + std::to_string(*id) + " out of sequence (expected " +
                                     std::to_string(sentence_.n() + 1) + ")");
    }
    Token token;
    token.index = *id;
    token.form = fields[1];
    if (token.form.empty()) throw ConlluError(line_no, "empty form");
    token.lemma = fields[2];
    token.upos = fields[3];
    token.xpos = fields[4];
    token.feats = fields[5];
    if (fields[6] == "_") {
      if (options_.require_heads) throw ConlluError(line_no, "unannotated head '_'");
      token.head = kUnannotatedHead;
    } else {
      auto head = parse_int(fields[6]);
      if (!head) throw ConlluError(line_no, "non-integer head '" + std::string(fields[6]) + "'");
      if (*head < 0) throw ConlluValidationError(line_no, "negative head");
      token.head = *head;
    }
    token.deprel = fields[7];
    token.deps = fields[8];
    token.misc = fields[9];
    sentence_.layout.push_back({LineKind::kToken, sentence_.tokens.size()});
    sentence_.tokens.push_back(std::move(token));
    token_lines_.push_back(line_no);
  }

  Sentence finish(std::size_t line_no) {
    if (sentence_.tokens.empty()) throw ConlluError(line_no, "sentence without word tokens");
    for (std::size_t i = 0; i < sentence_.tokens.size(); ++i) {
      if (sentence_.tokens[i].head > sentence_.n()) {
        throw ConlluValidationError(token_lines_[i], "head " +
                                                         std::to_string(sentence_.tokens[i].head) +
                                                         " out of range 0.." +
                                                         std::to_string(sentence_.n()));
      }
    }
    Sentence out = std::move(sentence_);
    sentence_ = Sentence{};
    token_lines_.clear();
    return out;
  }

 private:
  const ReadOptions& options_;
  Sentence sentence_;
  std::vector<std::size_t> token_lines_;
};

std::string_view or_underscore(const std::string& s) { return s.empty() ? "_" : s; }

}  // namespace

ConlluError::ConlluError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

bool Sentence::has_heads() const {
  for (const auto& t : tokens) {
    if (t.head == kUnannotatedHead) return false;
  }
  return true;
}

std::vector<int> Sentence::heads() const {
  std::vector<int> h(tokens.size() + 1, kUnannotatedHead);
  for (const auto& t : tokens) h[t.index] = t.head;
  return h;
}

std::optional<std::string> Sentence::sent_id() const {
  static constexpr std::string_view kPrefix = "# sent_id = ";
  for (const auto& c : comments) {
    if (c.starts_with(kPrefix)) return c.substr(kPrefix.size());
  }
  return std::nullopt;
}

std::vector<Sentence> read_conllu(std::istream& in, const ReadOptions& options) {
  std::vector<Sentence> sentences;
  BlockBuilder block(options);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      if (!block.empty()) sentences.push_back(block.finish(line_no));
      continue;
    }
    block.add_line(line, line_no);
  }
  if (!block.empty()) sentences.push_back(block.finish(line_no));
  return sentences;
}

std::vector<Sentence> read_conllu_string(std::string_view text, const ReadOptions& options) {
  std::istringstream in{std::string(text)};
  return read_conllu(in, options);
}

std::vector<Sentence> read_conllu_file(const std::string& path, const ReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_conllu(in, options);
}

void write_conllu(std::ostream& out, const Sentence& sentence, const ParseOverlay* overlay) {
  if (overlay) {
    const auto size = static_cast<std::size_t>(sentence.n()) + 1;
    if (overlay->heads.size() != size ||
        (!overlay->labels.empty() && overlay->labels.size() != size)) {
      throw std::invalid_argument("overlay size does not match sentence length");
    }
  }
  for (const auto& ref : sentence.layout) {
    switch (ref.kind) {
      case LineKind::kComment:
        out << sentence.comments[ref.index] << '\n';
        break;
      case LineKind::kExtra:
        out << sentence.extras[ref.index] << '\n';
        break;
      case LineKind::kToken: {
        const Token& t = sentence.tokens[ref.index];
        std::string head;
        std::string_view deprel = t.deprel;
        if (overlay) {
          head = std::to_string(overlay->heads[t.index]);
          deprel = overlay->labels.empty() ? std::string_view("_")
                                           : or_underscore(overlay->labels[t.index]);
        } else {
          head = t.head == kUnannotatedHead ? "_" : std::to_string(t.head);
        }
        out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos
            << '\t' << t.feats << '\t' << head << '\t' << deprel << '\t' << t.deps << '\t'
            << t.misc << '\n';
        break;
      }
    }
  }
  out << '\n';
}

std::string write_conllu(const std::vector<Sentence>& sentences) {
  std::ostringstream out;
  for (const auto& s : sentences) write_conllu(out, s);
  return out.str();
}

std::string write_conllu(const std::vector<Sentence>& sentences,
                         const std::vector<ParseOverlay>& overlay) {
  if (overlay.size() != sentences.size()) {
    throw std::invalid_argument("overlay count does not match sentence count");
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < sentences.size(); ++i) write_conllu(out, sentences[i], &overlay[i]);
  return out.str();
}

}  // namespace mh4
