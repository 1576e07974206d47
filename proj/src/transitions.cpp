#include "mh4/transitions.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace mh4 {

namespace {

constexpr std::array<std::string_view, kNumTransitions> kTagNames = {"sh",  "la",  "ra", "la'",
                                                                     "ra'", "la2", "ra2"};

std::string stack_string(const std::vector<int>& stack) {
  std::string out = "[";
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(stack[i]);
  }
  return out + "]";
}

}  // namespace

std::string_view tag_name(Transition t) { return kTagNames[static_cast<std::size_t>(t)]; }

std::optional<Transition> parse_tag(std::string_view tag) {
  std::string ascii(tag);
  auto replace = [&](std::string_view from, std::string_view to) {
    for (auto pos = ascii.find(from); pos != std::string::npos; pos = ascii.find(from)) {
      ascii.replace(pos, from.size(), to);
    }
  };
  replace("′", "'");  // prime
  replace("₂", "2");  // subscript two
  for (int i = 0; i < kNumTransitions; ++i) {
    if (ascii == kTagNames[static_cast<std::size_t>(i)]) return static_cast<Transition>(i);
  }
  return std::nullopt;
}

std::vector<Transition> parse_sequence(std::string_view text) {
  std::vector<Transition> seq;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    // Accept trace-style tokens such as "sh(0);" or "la2(3->1)".
    auto cut = word.find_first_of("(;,");
    auto tag = parse_tag(word.substr(0, cut));
    if (!tag) throw std::invalid_argument("unknown transition tag '" + word + "'");
    seq.push_back(*tag);
  }
  return seq;
}

std::string format_sequence(std::span<const Transition> seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += tag_name(seq[i]);
  }
  return out;
}

std::string_view system_name(System system) { return system == System::kMH3 ? "mh3" : "mh4"; }

bool admits(System system, Transition t) {
  return system == System::kMH4 || t == Transition::kShift || t == Transition::kLeftArc ||
         t == Transition::kRightArc;
}

Configuration Configuration::initial(int n) {
  if (n < 1) throw std::invalid_argument("sentence length must be at least 1");
  Configuration c;
  c.n_ = n;
  return c;
}

bool Configuration::terminal() const {
  return stack_.size() == 1 && stack_[0] == 0 && buffer_front_ == n_ + 1;
}

int Configuration::stack_at(int depth) const {
  const auto size = static_cast<int>(stack_.size());
  return depth < size ? stack_[static_cast<std::size_t>(size - 1 - depth)] : kNoNode;
}

std::optional<std::string> Configuration::violation(Transition t) const {
  const auto depth = stack_.size();
  const bool buffer_word = buffer_front_ <= n_;
  switch (t) {
    case Transition::kShift:
      if (!buffer_word) return "sh: buffer holds only the end marker";
      return std::nullopt;
    case Transition::kLeftArc:
      if (depth < 1) return "la: empty stack";
      if (stack_at(0) == 0) return "la: root cannot be a dependent";
      if (!buffer_word) return "la: end marker cannot head an arc";
      return std::nullopt;
    case Transition::kRightArc:
      if (depth < 2) return "ra: needs two stack items";
      return std::nullopt;
    case Transition::kLeftArcPrime:
      if (depth < 2) return "la': needs two stack items";
      if (stack_at(1) == 0) return "la': root cannot be a dependent";
      return std::nullopt;
    case Transition::kRightArcPrime:
      if (depth < 3) return "ra': needs three stack items";
      return std::nullopt;
    case Transition::kLeftArc2:
      if (depth < 2) return "la2: needs two stack items";
      if (stack_at(1) == 0) return "la2: root cannot be a dependent";
      if (!buffer_word) return "la2: end marker cannot head an arc";
      return std::nullopt;
    case Transition::kRightArc2:
      if (depth < 3) return "ra2: needs three stack items";
      return std::nullopt;
  }
  return "unknown transition";
}

std::optional<Arc> Configuration::arc_of(Transition t) const {
  switch (t) {
    case Transition::kShift:
      return std::nullopt;
    case Transition::kLeftArc:
      return Arc{buffer_front_, stack_at(0)};
    case Transition::kRightArc:
      return Arc{stack_at(1), stack_at(0)};
    case Transition::kLeftArcPrime:
      return Arc{stack_at(0), stack_at(1)};
    case Transition::kRightArcPrime:
      return Arc{stack_at(2), stack_at(1)};
    case Transition::kLeftArc2:
      return Arc{buffer_front_, stack_at(1)};
    case Transition::kRightArc2:
      return Arc{stack_at(2), stack_at(0)};
  }
  return std::nullopt;
}

Configuration Configuration::apply(Transition t) const {
  if (auto why = violation(t)) {
    throw IllegalTransition(*why + " in " + to_string());
  }
  Configuration next = *this;
  if (t == Transition::kShift) {
    next.stack_.push_back(next.buffer_front_++);
    return next;
  }
  const Arc arc = *arc_of(t);
  next.arcs_.push_back(arc);
  // Remove the dependent, which is either s0 or s1.
  if (arc.dep == stack_at(0)) {
    next.stack_.pop_back();
  } else {
    next.stack_.erase(next.stack_.end() - 2);
  }
  return next;
}

std::string Configuration::to_string() const {
  std::ostringstream out;
  out << '(' << stack_string(stack_) << ", " << buffer_front_ << ", {";
  for (std::size_t i = 0; i < arcs_.size(); ++i) {
    if (i) out << ", ";
    out << arcs_[i].head << "->" << arcs_[i].dep;
  }
  out << "})";
  return out.str();
}

DepTree run(int n, std::span<const Transition> seq, System system) {
  Configuration c = Configuration::initial(n);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!admits(system, seq[i])) {
      throw RunError(i, "step " + std::to_string(i) + ": " + std::string(tag_name(seq[i])) +
                            " is not a " + std::string(system_name(system)) + " transition");
    }
    if (auto why = c.violation(seq[i])) {
      throw RunError(i, "step " + std::to_string(i) + ": " + *why);
    }
    c = c.apply(seq[i]);
  }
  if (!c.terminal()) {
    throw RunError(seq.size(), "sequence ends in non-terminal configuration " + c.to_string());
  }
  std::vector<int> heads(static_cast<std::size_t>(n) + 1, kNoNode);
  for (const Arc& a : c.arcs()) heads[static_cast<std::size_t>(a.dep)] = a.head;
  return DepTree::validate(std::move(heads));
}

// --- Features ----------------------------------------------------------------

FeatureSet FeatureSet::two() { return FeatureSet(0b1100); }
FeatureSet FeatureSet::three() { return FeatureSet(0b1110); }
FeatureSet FeatureSet::four() { return FeatureSet(0b1111); }

FeatureSet FeatureSet::parse(std::string_view text) {
  std::uint8_t mask = 0;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char ch) {
                 return std::isspace(ch) || ch == '{' || ch == '}';
               }),
               item.end());
    if (item == "s2") {
      mask |= 1U << static_cast<int>(Position::kS2);
    } else if (item == "s1") {
      mask |= 1U << static_cast<int>(Position::kS1);
    } else if (item == "s0") {
      mask |= 1U << static_cast<int>(Position::kS0);
    } else if (item == "b0") {
      mask |= 1U << static_cast<int>(Position::kB0);
    } else if (!item.empty()) {
      throw std::invalid_argument("unknown feature position '" + item + "'");
    }
  }
  if (!((mask >> static_cast<int>(Position::kB0)) & 1U)) {
    throw std::invalid_argument("feature set must include b0");
  }
  return FeatureSet(mask);
}

FeatureNodes FeatureSet::select(const FeatureNodes& all) const {
  FeatureNodes out;
  if (has(Position::kS2)) out.s2 = all.s2;
  if (has(Position::kS1)) out.s1 = all.s1;
  if (has(Position::kS0)) out.s0 = all.s0;
  if (has(Position::kB0)) out.b0 = all.b0;
  return out;
}

std::string FeatureSet::to_string() const {
  static constexpr std::array<std::string_view, 4> kNames = {"s2", "s1", "s0", "b0"};
  std::string out;
  for (int p = 0; p < 4; ++p) {
    if (!has(static_cast<Position>(p))) continue;
    if (!out.empty()) out += ',';
    out += kNames[static_cast<std::size_t>(p)];
  }
  return out;
}

FeatureNodes positions_of(const Configuration& c) {
  return {c.stack_at(2), c.stack_at(1), c.stack_at(0), c.buffer_front()};
}

ScoringContext scoring_context(const Configuration& c, Transition t, const FeaturePolicy& policy) {
  ScoringContext ctx;
  ctx.transition = t;
  ctx.features = policy.for_transition(t).select(positions_of(c));
  if (auto arc = c.arc_of(t)) ctx.arc = *arc;
  ctx.config = &c;
  return ctx;
}

double transition_score(const TransitionScorer& scorer, const Configuration& c, Transition t,
                        const FeaturePolicy& policy) {
  if (c.stack().empty()) return 0.0;
  return scorer.score(scoring_context(c, t, policy));
}

std::vector<ScoringContext> replay_contexts(int n, std::span<const Transition> seq,
                                            const FeaturePolicy& policy) {
  std::vector<ScoringContext> out;
  Configuration c = Configuration::initial(n);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (auto why = c.violation(seq[i])) {
      throw RunError(i, "step " + std::to_string(i) + ": " + *why);
    }
    if (!c.stack().empty()) {
      out.push_back(scoring_context(c, seq[i], policy));
      out.back().config = nullptr;
    }
    c = c.apply(seq[i]);
  }
  if (!c.terminal()) throw RunError(seq.size(), "non-terminal final configuration");
  return out;
}

double replay_score(int n, std::span<const Transition> seq, const TransitionScorer& scorer,
                    const FeaturePolicy& policy) {
  double total = 0.0;
  Configuration c = Configuration::initial(n);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (auto why = c.violation(seq[i])) {
      throw RunError(i, "step " + std::to_string(i) + ": " + *why);
    }
    total += transition_score(scorer, c, seq[i], policy);
    c = c.apply(seq[i]);
  }
  if (!c.terminal()) throw RunError(seq.size(), "non-terminal final configuration");
  return total;
}

// --- Decoding ----------------------------------------------------------------

namespace {

DepTree tree_of(const Configuration& c) {
  std::vector<int> heads(static_cast<std::size_t>(c.n()) + 1, kNoNode);
  for (const Arc& a : c.arcs()) heads[static_cast<std::size_t>(a.dep)] = a.head;
  return DepTree::validate(std::move(heads));
}

}  // namespace

ParseResult greedy_parse(int n, const TransitionScorer& scorer, System system,
                         FeatureSet features) {
  const auto policy = FeaturePolicy::uniform(features);
  Configuration c = Configuration::initial(n);
  ParseResult result;
  while (!c.terminal()) {
    std::optional<Transition> best;
    double best_score = 0.0;
    for (Transition t : kAllTransitions) {
      if (!c.legal(t, system)) continue;
      const double s = transition_score(scorer, c, t, policy);
      if (!best || s > best_score) {
        best = t;
        best_score = s;
      }
    }
    // Progress: a non-terminal configuration always has sh or ra available.
    result.sequence.push_back(*best);
    result.score += best_score;
    c = c.apply(*best);
  }
  result.tree = tree_of(c);
  return result;
}

ParseResult beam_parse(int n, const TransitionScorer& scorer, System system, FeatureSet features,
                       std::size_t width) {
  if (width < 1) throw std::invalid_argument("beam width must be at least 1");
  const auto policy = FeaturePolicy::uniform(features);

  struct Hypothesis {
    Configuration config;
    std::vector<Transition> sequence;
    double score = 0.0;
  };
  struct Candidate {
    std::size_t parent;
    Transition transition;
    double step_score;
    double total;
  };

  std::vector<Hypothesis> beam{{Configuration::initial(n), {}, 0.0}};
  // Every computation has exactly 2n+1 steps, so hypotheses stay aligned.
  const int steps = 2 * n + 1;
  for (int step = 0; step < steps; ++step) {
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < beam.size(); ++i) {
      const auto& h = beam[i];
      for (Transition t : kAllTransitions) {
        if (!h.config.legal(t, system)) continue;
        const double s = transition_score(scorer, h.config, t, policy);
        candidates.push_back({i, t, s, h.score + s});
      }
    }
    // Higher total first; then higher step score, which makes width 1 agree
    // with greedy even when the additions round to equal totals; then the
    // lexicographically smaller sequence.
    auto better = [&](const Candidate& a, const Candidate& b) {
      if (a.total != b.total) return a.total > b.total;
      if (a.step_score != b.step_score) return a.step_score > b.step_score;
      const auto& sa = beam[a.parent].sequence;
      const auto& sb = beam[b.parent].sequence;
      if (sa != sb) return sa < sb;
      return a.transition < b.transition;
    };
    const std::size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), better);
    std::vector<Hypothesis> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& cand = candidates[i];
      const auto& parent = beam[cand.parent];
      Hypothesis h{parent.config.apply(cand.transition), parent.sequence, cand.total};
      h.sequence.push_back(cand.transition);
      next.push_back(std::move(h));
    }
    beam = std::move(next);
  }
  const Hypothesis& best = beam.front();
  return {tree_of(best.config), best.sequence, best.score};
}

}  // namespace mh4
