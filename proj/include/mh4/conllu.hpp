// CoNLL-U treebank reading and writing.
//
// Only basic word lines (integer ids) enter the parse graph. Multiword range
// lines ("3-4") and empty-node lines ("5.1") are kept verbatim, in their
// original position, so that write_conllu(read_conllu(x)) == x.

#ifndef MH4_CONLLU_HPP_
#define MH4_CONLLU_HPP_

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mh4 {

/// Head value stored for a token whose column 7 is "_" (parse-only input).
inline constexpr int kUnannotatedHead = -1;

struct Token {
  int index = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::string feats;
  int head = kUnannotatedHead;
  std::string deprel;
  std::string deps;
  std::string misc;
};

enum class LineKind { kComment, kToken, kExtra };

struct LineRef {
  LineKind kind;
  std::size_t index;  // into comments, tokens or extras
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<std::string> comments;  // full lines including the leading '#'
  std::vector<std::string> extras;    // multiword ranges and empty nodes
  std::vector<LineRef> layout;        // original line order

  int n() const { return static_cast<int>(tokens.size()); }
  bool has_heads() const;
  /// Heads in the DepTree convention: slot 0 unused, heads[m] for m in 1..n.
  std::vector<int> heads() const;
  /// Value of a "# sent_id = ..." comment, if any.
  std::optional<std::string> sent_id() const;
};

/// Malformed input. line() is 1-based within the stream.
class ConlluError : public std::runtime_error {
 public:
  ConlluError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Structurally readable but semantically invalid input (e.g. head > n).
class ConlluValidationError : public ConlluError {
 public:
  using ConlluError::ConlluError;
};

struct ReadOptions {
  // Training data must carry heads; parse-only input may use "_".
  bool require_heads = true;
};

std::vector<Sentence> read_conllu(std::istream& in, const ReadOptions& options = {});
std::vector<Sentence> read_conllu_string(std::string_view text,
                                         const ReadOptions& options = {});
std::vector<Sentence> read_conllu_file(const std::string& path,
                                       const ReadOptions& options = {});

/// Predicted analysis for one sentence. labels may be empty, in which case
/// the deprel column is written as "_".
struct ParseOverlay {
  std::vector<int> heads;  // slot 0 unused, size n+1
  std::vector<std::string> labels;  // slot 0 unused, size n+1, or empty
};

std::string write_conllu(const std::vector<Sentence>& sentences);
std::string write_conllu(const std::vector<Sentence>& sentences,
                         const std::vector<ParseOverlay>& overlay);
void write_conllu(std::ostream& out, const Sentence& sentence,
                  const ParseOverlay* overlay = nullptr);

}  // namespace mh4

#endif  // MH4_CONLLU_HPP_
