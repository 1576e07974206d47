// Inference with a trained model.

#ifndef MH4_PARSER_HPP_
#define MH4_PARSER_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include "mh4/chart.hpp"
#include "mh4/conllu.hpp"
#include "mh4/model_io.hpp"

namespace mh4 {

enum class Decoder { kMH3Greedy, kMH4Greedy, kMH3Global, kMH4Two, kMH4Hybrid, kMST };

std::string_view decoder_name(Decoder d);
std::optional<Decoder> parse_decoder(std::string_view name);
/// Transition system of a transition-based decoder (kMH4 for kMST).
System decoder_system(Decoder d);
bool is_global(Decoder d);
bool is_greedy(Decoder d);
/// Chart scoring mode of a global decoder; greedy decoders use {s1,s0,b0}.
ScoringMode decoder_scoring(Decoder d);

/// Feature set used by greedy decoding and training.
inline FeatureSet greedy_features() { return FeatureSet::three(); }

struct ParseOptions {
  Decoder decoder = Decoder::kMH4Hybrid;
  std::size_t beam = 1;  // greedy decoders only
  int length_cap = kDefaultLengthCap;
  bool single_root = true;  // mst only
  bool labels = true;
};

struct ParsedSentence {
  ParseOverlay overlay;
  double score = 0.0;
  bool fell_back = false;  // over the length cap, decoded greedily
};

ParsedSentence parse_sentence(const ParserModel& model, const Sentence& sentence,
                              const ParseOptions& options);

/// Output order follows input order for any jobs value.
std::vector<ParsedSentence> parse_all(const ParserModel& model, const std::vector<Sentence>& input,
                                      const ParseOptions& options, unsigned jobs);

struct AttachmentScores {
  double uas = 0.0;
  double las = 0.0;
  long tokens = 0;
  long correct_heads = 0;
  long correct_labeled = 0;
};

/// All tokens count, punctuation included. Throws std::invalid_argument on
/// sentence or token count mismatch.
AttachmentScores evaluate(const std::vector<Sentence>& gold,
                          const std::vector<ParseOverlay>& predicted);

}  // namespace mh4

#endif  // MH4_PARSER_HPP_
