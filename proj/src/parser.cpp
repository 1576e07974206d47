#include "mh4/parser.hpp"

#include <array>
#include <stdexcept>

#include "mh4/forward.hpp"
#include "mh4/msa.hpp"
#include "mh4/parallel.hpp"

namespace mh4 {

namespace {

constexpr std::array<std::pair<Decoder, std::string_view>, 6> kDecoderNames = {{
    {Decoder::kMH3Greedy, "mh3-greedy"},
    {Decoder::kMH4Greedy, "mh4-greedy"},
    {Decoder::kMH3Global, "mh3-global"},
    {Decoder::kMH4Two, "mh4-two"},
    {Decoder::kMH4Hybrid, "mh4-hybrid"},
    {Decoder::kMST, "mst"},
}};

}  // namespace

std::string_view decoder_name(Decoder d) {
  for (const auto& [dec, name] : kDecoderNames) {
    if (dec == d) return name;
  }
  return "?";
}

std::optional<Decoder> parse_decoder(std::string_view name) {
  for (const auto& [dec, n] : kDecoderNames) {
    if (n == name) return dec;
  }
  return std::nullopt;
}

System decoder_system(Decoder d) {
  return d == Decoder::kMH3Greedy || d == Decoder::kMH3Global ? System::kMH3 : System::kMH4;
}

bool is_global(Decoder d) {
  return d == Decoder::kMH3Global || d == Decoder::kMH4Two || d == Decoder::kMH4Hybrid;
}

bool is_greedy(Decoder d) { return d == Decoder::kMH3Greedy || d == Decoder::kMH4Greedy; }

ScoringMode decoder_scoring(Decoder d) {
  return d == Decoder::kMH4Two ? ScoringMode::kTwo : ScoringMode::kHybrid;
}

ParsedSentence parse_sentence(const ParserModel& model, const Sentence& sentence,
                              const ParseOptions& options) {
  const int n = sentence.n();
  if (n < 1) throw std::invalid_argument("cannot parse an empty sentence");
  ForwardPass<float> pass(model.params, model.vocab.encode(sentence));
  NeuralTransitionScorer<float> scorer(pass);

  ParsedSentence out;
  std::vector<int> heads;
  const Decoder d = options.decoder;
  if (d == Decoder::kMST) {
    const ArcScoreMatrix<double> m = pass.arc_matrix().cast<double>();
    DepTree t = max_arborescence(m, options.single_root);
    out.score = tree_score(m, t);
    heads.assign(t.heads().begin(), t.heads().end());
  } else {
    const System system = decoder_system(d);
    bool greedy = is_greedy(d);
    if (!greedy && system == System::kMH4 && n > options.length_cap) {
      greedy = true;
      out.fell_back = true;
    }
    if (greedy) {
      ParseResult r = options.beam > 1
                          ? beam_parse(n, scorer, system, greedy_features(), options.beam)
                          : greedy_parse(n, scorer, system, greedy_features());
      out.score = r.score;
      heads.assign(r.tree.heads().begin(), r.tree.heads().end());
    } else {
      DecodeRequest req;
      req.n = n;
      req.mode = system;
      req.scoring = decoder_scoring(d);
      req.length_cap = options.length_cap;
      auto r = decode(req, &scorer);
      out.score = r->score;
      DepTree t = derivation_arcs(r->derivation);
      heads.assign(t.heads().begin(), t.heads().end());
    }
  }

  out.overlay.heads = heads;
  const auto& labels = model.vocab.labels();
  if (options.labels && !labels.empty()) {
    out.overlay.labels.assign(static_cast<std::size_t>(n + 1), "");
    for (int m = 1; m <= n; ++m) {
      const Vec<float> s = pass.label_scores(heads[static_cast<std::size_t>(m)], m);
      Eigen::Index best = 0;
      for (Eigen::Index l = 1; l < s.size(); ++l) {
        if (s(l) > s(best)) best = l;
      }
      out.overlay.labels[static_cast<std::size_t>(m)] = labels.name(static_cast<int>(best));
    }
  }
  return out;
}

std::vector<ParsedSentence> parse_all(const ParserModel& model, const std::vector<Sentence>& input,
                                      const ParseOptions& options, unsigned jobs) {
  return parallel_map<ParsedSentence>(input.size(), jobs, [&](std::size_t i) {
    return parse_sentence(model, input[i], options);
  });
}

AttachmentScores evaluate(const std::vector<Sentence>& gold,
                          const std::vector<ParseOverlay>& predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(gold.size()) + " gold vs " +
                                std::to_string(predicted.size()) + " predicted sentences");
  }
  AttachmentScores s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i];
    const auto& p = predicted[i];
    if (p.heads.size() != g.tokens.size() + 1) {
      throw std::invalid_argument("evaluate: token count mismatch in sentence " +
                                  std::to_string(i + 1));
    }
    for (int m = 1; m <= g.n(); ++m) {
      const auto& tok = g.tokens[static_cast<std::size_t>(m - 1)];
      ++s.tokens;
      if (p.heads[static_cast<std::size_t>(m)] != tok.head) continue;
      ++s.correct_heads;
      if (!p.labels.empty() && p.labels[static_cast<std::size_t>(m)] == tok.deprel) {
        ++s.correct_labeled;
      }
    }
  }
  if (s.tokens > 0) {
    s.uas = static_cast<double>(s.correct_heads) / static_cast<double>(s.tokens);
    s.las = static_cast<double>(s.correct_labeled) / static_cast<double>(s.tokens);
  }
  return s;
}

}  // namespace mh4
