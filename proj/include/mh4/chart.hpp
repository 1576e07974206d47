// Exact dynamic-programming decoding for the MH-k deduction systems, k = 3
// (projective, arc-hybrid) and k = 4.
//
// Items [h1,...,hm], 2 <= m <= k, strictly increasing node ids. An item
// stands for computations that start with b0 = h1 and end with h1..h(m-1)
// pushed onto the stack and b0 = hm. Rules:
//
//   Seed     [i, i+1]                       for 0 <= i <= n, score 0
//   Combine  [h1..hm] + [hm..hp] -> [h1..hp]   p <= k, plus the delegated
//            score of the right item's first sh, taken with s0 = h(m-1)
//            and b0 = hm
//   Link     [h1..hm] -> drop hj, arc hi -> hj (1 < j < m, i != j), scored
//            as the reduce transition the arc corresponds to
//   Goal     [0, n+1]
//
// For m = 4 items (s2, s1, s0, b0) = (h1, h2, h3, h4); for m = 3 items
// (s1, s0, b0) = (h1, h2, h3).

#ifndef MH4_CHART_HPP_
#define MH4_CHART_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mh4/dep_tree.hpp"
#include "mh4/transitions.hpp"

namespace mh4 {

enum class ScoringMode {
  kTwo,     // {s0, b0} for every transition
  kHybrid,  // {s0, b0} for sh, {s1, s0, b0} for reduces
};

FeaturePolicy feature_policy(ScoringMode mode);

enum class Objective {
  kViterbi,        // model scores
  kRecognize,      // feasibility of the gold tree, no scores
  kConstrained,    // model scores, gold-compatible links only
  kCostAugmented,  // model scores + 1 per mis-attached link
  kMaxRecall,      // +1 per gold link, no model scores
};

inline constexpr int kDefaultLengthCap = 80;

struct DecodeRequest {
  int n = 0;
  System mode = System::kMH4;
  ScoringMode scoring = ScoringMode::kHybrid;
  Objective objective = Objective::kViterbi;
  const DepTree* gold = nullptr;  // required by every objective but kViterbi
  int length_cap = kDefaultLengthCap;  // applies to mh4 only
  bool force = false;                  // ignore length_cap
};

/// Maps a Link step (item size m, 1-based head position i, 1-based
/// dependent position j) to the reduce transition it performs.
Transition link_transition(int m, int i, int j);

enum class Rule : std::uint8_t { kSeed, kCombine, kLink };

struct DerivationStep {
  Rule rule = Rule::kSeed;
  std::array<int, 4> heads{};
  int size = 0;          // number of heads
  int left = -1;         // combine: left antecedent; link: the antecedent
  int right = -1;        // combine: right antecedent
  int link_head_pos = 0;  // link: i, 1-based
  int link_dep_pos = 0;   // link: j, 1-based
  // Seed: the sh it stands for. Combine: the delegated sh. Link: the reduce.
  Transition transition = Transition::kShift;
};

/// An explicit derivation tree; steps[root] concludes the goal item.
struct Derivation {
  int n = 0;
  std::vector<DerivationStep> steps;
  int root = -1;
};

struct DecodeResult {
  double score = 0.0;  // objective value of the best derivation
  Derivation derivation;
};

class LengthCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Highest-scoring derivation of [0, n+1]. Returns nullopt when the goal is
/// unreachable, which only happens for kConstrained and kRecognize. scorer
/// may be null for kRecognize and kMaxRecall.
std::optional<DecodeResult> decode(const DecodeRequest& request, const TransitionScorer* scorer);

/// True iff some derivation yields exactly this tree.
bool recognize(const DepTree& tree, System mode);

/// Maximum number of gold arcs any derivation realizes; == n iff recognize().
int max_recall(const DepTree& tree, System mode);

std::vector<Transition> derivation_to_transitions(const Derivation& d);
DepTree derivation_arcs(const Derivation& d);

/// Mis-attached nodes of a derivation with respect to gold.
int derivation_cost(const Derivation& d, const DepTree& gold);

// --- Static oracle -----------------------------------------------------------

struct OracleResult {
  std::vector<Transition> sequence;
  bool partial = false;  // the tree is not chart-coverable; max-recall sequence
};

/// Transition sequence for a gold tree, read off the gold-constrained chart
/// derivation, or the max-recall derivation when the tree is not coverable.
OracleResult static_oracle(const DepTree& tree, System system);

}  // namespace mh4

#endif  // MH4_CHART_HPP_
