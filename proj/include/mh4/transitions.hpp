// The MH4 transition system and its arc-hybrid (MH3) subset.
//
// Configurations are (stack, buffer front, arcs) over nodes 0..n+1, where
// n+1 is the end marker: it is never shifted and never heads an arc. The
// seven transitions, with s0 the stack top, s1 and s2 below it and b0 the
// buffer front:
//
//   sh   push b0                    la   b0 -> s0, pop s0
//   ra   s1 -> s0, pop s0           la'  s0 -> s1, remove s1
//   ra'  s2 -> s1, remove s1        la2  b0 -> s1, remove s1
//   ra2  s2 -> s0, pop s0
//
// A computation is terminal when the stack is [0] and b0 == n+1.

#ifndef MH4_TRANSITIONS_HPP_
#define MH4_TRANSITIONS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mh4/dep_tree.hpp"

namespace mh4 {

/// Declaration order is the tie-breaking order.
enum class Transition : std::uint8_t {
  kShift,
  kLeftArc,
  kRightArc,
  kLeftArcPrime,
  kRightArcPrime,
  kLeftArc2,
  kRightArc2,
};

inline constexpr int kNumTransitions = 7;

inline constexpr std::array<Transition, kNumTransitions> kAllTransitions = {
    Transition::kShift,        Transition::kLeftArc,  Transition::kRightArc,
    Transition::kLeftArcPrime, Transition::kRightArcPrime, Transition::kLeftArc2,
    Transition::kRightArc2};

constexpr int index_of(Transition t) { return static_cast<int>(t); }

std::string_view tag_name(Transition t);
/// Accepts the ASCII tags ("la'", "la2") as well as "la′" and "la₂".
std::optional<Transition> parse_tag(std::string_view tag);
std::vector<Transition> parse_sequence(std::string_view text);
std::string format_sequence(std::span<const Transition> seq);

enum class System { kMH3, kMH4 };

std::string_view system_name(System system);
bool admits(System system, Transition t);

class Configuration {
 public:
  static Configuration initial(int n);

  int n() const { return n_; }
  const std::vector<int>& stack() const { return stack_; }
  int buffer_front() const { return buffer_front_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  bool terminal() const;

  /// Stack element `depth` positions from the top (0 = s0), or kNoNode.
  int stack_at(int depth) const;

  /// First failed precondition of t, or nullopt when t is legal.
  std::optional<std::string> violation(Transition t) const;
  bool legal(Transition t) const { return !violation(t).has_value(); }
  bool legal(Transition t, System system) const { return admits(system, t) && legal(t); }

  /// Arc that t would create in this configuration (head, dep), or nullopt
  /// for sh. Requires legal(t).
  std::optional<Arc> arc_of(Transition t) const;

  /// Throws IllegalTransition when t is not legal.
  Configuration apply(Transition t) const;

  std::string to_string() const;

 private:
  int n_ = 0;
  std::vector<int> stack_;
  int buffer_front_ = 0;
  std::vector<Arc> arcs_;
};

inline Configuration initial_config(int n) { return Configuration::initial(n); }

class IllegalTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Replay failure. step() is the 0-based position of the illegal transition,
/// or the sequence length when the final configuration is not terminal.
class RunError : public std::runtime_error {
 public:
  RunError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

DepTree run(int n, std::span<const Transition> seq, System system = System::kMH4);

// --- Features and scoring --------------------------------------------------

enum class Position : std::uint8_t { kS2, kS1, kS0, kB0 };

struct FeatureNodes {
  int s2 = kNoNode;
  int s1 = kNoNode;
  int s0 = kNoNode;
  int b0 = kNoNode;
};

/// Ordered subset of {s2, s1, s0, b0}; always contains b0.
class FeatureSet {
 public:
  /// {s0, b0}
  static FeatureSet two();
  /// {s1, s0, b0}
  static FeatureSet three();
  /// {s2, s1, s0, b0}
  static FeatureSet four();
  /// Comma-separated position names, e.g. "s1,s0,b0".
  static FeatureSet parse(std::string_view text);

  bool has(Position p) const { return (mask_ >> static_cast<int>(p)) & 1U; }
  FeatureNodes select(const FeatureNodes& all) const;
  std::string to_string() const;
  bool operator==(const FeatureSet&) const = default;

 private:
  explicit FeatureSet(std::uint8_t mask) : mask_(mask) {}
  std::uint8_t mask_;
};

/// Which positions the scorer sees for shifts and for reduces.
struct FeaturePolicy {
  FeatureSet shift;
  FeatureSet reduce;

  static FeaturePolicy uniform(FeatureSet f) { return {f, f}; }
  /// {s0,b0} everywhere.
  static FeaturePolicy two() { return uniform(FeatureSet::two()); }
  /// {s0,b0} for sh, {s1,s0,b0} for reduces.
  static FeaturePolicy hybrid() { return {FeatureSet::two(), FeatureSet::three()}; }

  const FeatureSet& for_transition(Transition t) const {
    return t == Transition::kShift ? shift : reduce;
  }
};

FeatureNodes positions_of(const Configuration& c);

/// Everything a transition scorer may look at. arc is {kNoNode, kNoNode}
/// for sh. config is null when scoring inside the chart.
struct ScoringContext {
  Transition transition = Transition::kShift;
  FeatureNodes features;
  Arc arc;
  const Configuration* config = nullptr;
};

class TransitionScorer {
 public:
  virtual ~TransitionScorer() = default;
  virtual double score(const ScoringContext& context) const = 0;
};

/// Scores every transition 0.
class ZeroScorer final : public TransitionScorer {
 public:
  double score(const ScoringContext&) const override { return 0.0; }
};

/// Context for taking t in c under the given feature policy.
ScoringContext scoring_context(const Configuration& c, Transition t, const FeaturePolicy& policy);

/// Score of taking t in c. Transitions taken with an empty stack (the first
/// sh) have no s0 context and score 0 without consulting the scorer.
double transition_score(const TransitionScorer& scorer, const Configuration& c, Transition t,
                        const FeaturePolicy& policy);

/// Contexts of every scored step of a replayed sequence (the first sh is
/// omitted). Throws RunError like run().
std::vector<ScoringContext> replay_contexts(int n, std::span<const Transition> seq,
                                            const FeaturePolicy& policy);

/// Sum of transition_score over a replayed sequence.
double replay_score(int n, std::span<const Transition> seq, const TransitionScorer& scorer,
                    const FeaturePolicy& policy);

// --- Decoding --------------------------------------------------------------

struct ParseResult {
  DepTree tree;
  std::vector<Transition> sequence;
  double score = 0.0;
};

ParseResult greedy_parse(int n, const TransitionScorer& scorer, System system,
                         FeatureSet features = FeatureSet::three());

ParseResult beam_parse(int n, const TransitionScorer& scorer, System system, FeatureSet features,
                       std::size_t width);

}  // namespace mh4

#endif  // MH4_TRANSITIONS_HPP_
