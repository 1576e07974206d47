#include "mh4/chart.hpp"

#include <cstdint>
#include <limits>

namespace mh4 {

namespace {

constexpr double kUnreachable = -std::numeric_limits<double>::infinity();

enum class BackKind : std::uint8_t { kNone, kSeed, kCombine, kLink };

// Best value of one item plus how it was obtained.
//   I2 link:    x = removed node of [a,x,c], head_pos in {1,3}
//   I3 combine: split point is the middle head, nothing to store
//   I3 link:    x = removed node of the fused [a,.,.,c] item, dep_pos in
//               {2,3}, head_pos, split selects the four-head combine
struct Cell {
  double score = kUnreachable;
  BackKind kind = BackKind::kNone;
  std::uint8_t head_pos = 0;
  std::uint8_t dep_pos = 0;
  std::uint8_t split = 0;
  std::int32_t x = 0;
};

constexpr std::size_t choose2(std::size_t v) { return v * (v - 1) / 2; }
constexpr std::size_t choose3(std::size_t v) { return v * (v - 1) * (v - 2) / 6; }

class Tables {
 public:
  explicit Tables(int nodes)
      : two_(choose2(static_cast<std::size_t>(nodes))),
        three_(choose3(static_cast<std::size_t>(nodes))) {}

  Cell& at(int a, int b) { return two_[choose2(static_cast<std::size_t>(b)) + static_cast<std::size_t>(a)]; }
  Cell& at(int a, int b, int c) {
    return three_[choose3(static_cast<std::size_t>(c)) + choose2(static_cast<std::size_t>(b)) +
                  static_cast<std::size_t>(a)];
  }

 private:
  std::vector<Cell> two_;
  std::vector<Cell> three_;
};

// Scores model-based objectives through a TransitionScorer.
class ModelScoring {
 public:
  ModelScoring(const DecodeRequest& req, const TransitionScorer& scorer)
      : end_(req.n + 1),
        nodes_(req.n + 2),
        objective_(req.objective),
        gold_(req.gold),
        policy_(feature_policy(req.scoring)),
        scorer_(scorer),
        shift_(static_cast<std::size_t>(nodes_ * nodes_), 0.0) {
    for (int s0 = 0; s0 < nodes_; ++s0) {
      for (int b0 = s0 + 1; b0 <= req.n; ++b0) {
        ScoringContext ctx;
        ctx.transition = Transition::kShift;
        ctx.features = policy_.shift.select({kNoNode, kNoNode, s0, b0});
        shift_[static_cast<std::size_t>(s0 * nodes_ + b0)] = scorer_.score(ctx);
      }
    }
  }

  double shift(int s0, int b0) const { return shift_[static_cast<std::size_t>(s0 * nodes_ + b0)]; }

  // heads: the antecedent item, size m; i, j are 1-based.
  double link(const int* heads, int m, int i, int j, Transition t) const {
    const int head = heads[i - 1];
    const int dep = heads[j - 1];
    if (head == end_) return kUnreachable;
    const bool gold_arc = gold_ && gold_->head(dep) == head;
    if (objective_ == Objective::kConstrained && !gold_arc) return kUnreachable;
    ScoringContext ctx;
    ctx.transition = t;
    FeatureNodes all = m == 4 ? FeatureNodes{heads[0], heads[1], heads[2], heads[3]}
                              : FeatureNodes{kNoNode, heads[0], heads[1], heads[2]};
    ctx.features = policy_.reduce.select(all);
    ctx.arc = {head, dep};
    double s = scorer_.score(ctx);
    if (objective_ == Objective::kCostAugmented && !gold_arc) s += 1.0;
    return s;
  }

 private:
  int end_;
  int nodes_;
  Objective objective_;
  const DepTree* gold_;
  FeaturePolicy policy_;
  const TransitionScorer& scorer_;
  std::vector<double> shift_;
};

// Gold-only objectives: feasibility (every link must be gold) or recall.
class GoldScoring {
 public:
  GoldScoring(const DecodeRequest& req)
      : end_(req.n + 1), gold_(*req.gold), recall_(req.objective == Objective::kMaxRecall) {}

  double shift(int, int) const { return 0.0; }

  double link(const int* heads, int, int i, int j, Transition) const {
    const int head = heads[i - 1];
    if (head == end_) return kUnreachable;
    const bool gold_arc = gold_.head(heads[j - 1]) == head;
    if (recall_) return gold_arc ? 1.0 : 0.0;
    return gold_arc ? 0.0 : kUnreachable;
  }

 private:
  int end_;
  const DepTree& gold_;
  bool recall_;
};

inline bool offer(Cell& cell, double score) {
  if (score > cell.score) {
    cell.score = score;
    return true;
  }
  return false;
}

template <typename Scoring>
class ChartParser {
 public:
  ChartParser(int n, System mode, const Scoring& scoring)
      : n_(n), nodes_(n + 2), four_(mode == System::kMH4), scoring_(scoring), tables_(n + 2) {}

  std::optional<DecodeResult> run() {
    fill();
    const Cell& goal = tables_.at(0, n_ + 1);
    if (goal.score == kUnreachable) return std::nullopt;
    DecodeResult result;
    result.score = goal.score;
    result.derivation.n = n_;
    result.derivation.root = build2(result.derivation, 0, n_ + 1);
    return result;
  }

 private:
  void fill() {
    for (int span = 1; span < nodes_; ++span) {
      for (int a = 0; a + span < nodes_; ++a) {
        const int c = a + span;
        if (span == 1) {
          Cell& seed = tables_.at(a, c);
          seed.score = 0.0;
          seed.kind = BackKind::kSeed;
          continue;
        }
        combine_three(a, c);
        if (four_) link_fours(a, c);
        link_threes(a, c);
      }
    }
  }

  // [a,b] + [b,c] -> [a,b,c]
  void combine_three(int a, int c) {
    for (int b = a + 1; b < c; ++b) {
      const double left = tables_.at(a, b).score;
      const double right = tables_.at(b, c).score;
      if (left == kUnreachable || right == kUnreachable) continue;
      Cell& cell = tables_.at(a, b, c);
      if (offer(cell, left + right + scoring_.shift(a, b))) cell.kind = BackKind::kCombine;
    }
  }

  // Fused four-head items [a,x,y,c]: best combine over both splits, then
  // the six links, in transition order.
  void link_fours(int a, int c) {
    for (int x = a + 1; x + 1 < c; ++x) {
      for (int y = x + 1; y < c; ++y) {
        double best = kUnreachable;
        std::uint8_t split = 0;
        {
          const double l = tables_.at(a, x).score;
          const double r = tables_.at(x, y, c).score;
          if (l != kUnreachable && r != kUnreachable) best = l + r + scoring_.shift(a, x);
        }
        {
          const double l = tables_.at(a, x, y).score;
          const double r = tables_.at(y, c).score;
          if (l != kUnreachable && r != kUnreachable) {
            const double v = l + r + scoring_.shift(x, y);
            if (v > best) {
              best = v;
              split = 1;
            }
          }
        }
        if (best == kUnreachable) continue;
        const int heads[4] = {a, x, y, c};
        static constexpr struct {
          int i, j;
          Transition t;
        } kLinks[] = {
            {4, 3, Transition::kLeftArc},      {2, 3, Transition::kRightArc},
            {3, 2, Transition::kLeftArcPrime}, {1, 2, Transition::kRightArcPrime},
            {4, 2, Transition::kLeftArc2},     {1, 3, Transition::kRightArc2},
        };
        for (const auto& link : kLinks) {
          const double s = scoring_.link(heads, 4, link.i, link.j, link.t);
          if (s == kUnreachable) continue;
          const int removed = heads[link.j - 1];
          Cell& cell = link.j == 2 ? tables_.at(a, y, c) : tables_.at(a, x, c);
          if (offer(cell, best + s)) {
            cell.kind = BackKind::kLink;
            cell.head_pos = static_cast<std::uint8_t>(link.i);
            cell.dep_pos = static_cast<std::uint8_t>(link.j);
            cell.split = split;
            cell.x = removed;
          }
        }
      }
    }
  }

  // [a,b,c] -> [a,c]
  void link_threes(int a, int c) {
    Cell& cell = tables_.at(a, c);
    for (int b = a + 1; b < c; ++b) {
      const double v = tables_.at(a, b, c).score;
      if (v == kUnreachable) continue;
      const int heads[3] = {a, b, c};
      for (int i : {3, 1}) {  // la before ra
        const double s = scoring_.link(heads, 3, i, 2, link_transition(3, i, 2));
        if (s == kUnreachable) continue;
        if (offer(cell, v + s)) {
          cell.kind = BackKind::kLink;
          cell.head_pos = static_cast<std::uint8_t>(i);
          cell.dep_pos = 2;
          cell.x = b;
        }
      }
    }
  }

  static int push(Derivation& d, DerivationStep step) {
    d.steps.push_back(step);
    return static_cast<int>(d.steps.size()) - 1;
  }

  int build2(Derivation& d, int a, int c) {
    const Cell& cell = tables_.at(a, c);
    DerivationStep step;
    step.heads = {a, c, 0, 0};
    step.size = 2;
    if (cell.kind == BackKind::kSeed) {
      step.rule = Rule::kSeed;
      step.transition = Transition::kShift;
      return push(d, step);
    }
    step.rule = Rule::kLink;
    step.left = build3(d, a, cell.x, c);
    step.link_head_pos = cell.head_pos;
    step.link_dep_pos = 2;
    step.transition = link_transition(3, cell.head_pos, 2);
    return push(d, step);
  }

  int build3(Derivation& d, int a, int b, int c) {
    const Cell& cell = tables_.at(a, b, c);
    DerivationStep step;
    step.heads = {a, b, c, 0};
    step.size = 3;
    if (cell.kind == BackKind::kCombine) {
      step.rule = Rule::kCombine;
      step.left = build2(d, a, b);
      step.right = build2(d, b, c);
      step.transition = Transition::kShift;
      return push(d, step);
    }
    step.rule = Rule::kLink;
    if (cell.dep_pos == 2) {
      step.left = build4(d, a, cell.x, b, c, cell.split);
    } else {
      step.left = build4(d, a, b, cell.x, c, cell.split);
    }
    step.link_head_pos = cell.head_pos;
    step.link_dep_pos = cell.dep_pos;
    step.transition = link_transition(4, cell.head_pos, cell.dep_pos);
    return push(d, step);
  }

  int build4(Derivation& d, int a, int x, int y, int c, int split) {
    DerivationStep step;
    step.rule = Rule::kCombine;
    step.heads = {a, x, y, c};
    step.size = 4;
    step.transition = Transition::kShift;
    if (split == 0) {
      step.left = build2(d, a, x);
      step.right = build3(d, x, y, c);
    } else {
      step.left = build3(d, a, x, y);
      step.right = build2(d, y, c);
    }
    return push(d, step);
  }

  int n_;
  int nodes_;
  bool four_;
  const Scoring& scoring_;
  Tables tables_;
};

void check_request(const DecodeRequest& req, const TransitionScorer* scorer) {
  if (req.n < 1) throw std::invalid_argument("decode: n must be at least 1");
  if (req.objective != Objective::kViterbi) {
    if (!req.gold) throw std::invalid_argument("decode: objective requires a gold tree");
    if (req.gold->n() != req.n) throw std::invalid_argument("decode: gold tree length mismatch");
  }
  const bool needs_model = req.objective == Objective::kViterbi ||
                           req.objective == Objective::kConstrained ||
                           req.objective == Objective::kCostAugmented;
  if (needs_model && !scorer) throw std::invalid_argument("decode: objective requires a scorer");
  if (req.mode == System::kMH4 && req.n > req.length_cap && !req.force) {
    throw LengthCapExceeded("sentence length " + std::to_string(req.n) +
                            " exceeds the exact decoding cap " + std::to_string(req.length_cap));
  }
}

}  // namespace

FeaturePolicy feature_policy(ScoringMode mode) {
  return mode == ScoringMode::kHybrid ? FeaturePolicy::hybrid() : FeaturePolicy::two();
}

Transition link_transition(int m, int i, int j) {
  if (m == 3 && j == 2) {
    if (i == 1) return Transition::kRightArc;
    if (i == 3) return Transition::kLeftArc;
  }
  if (m == 4 && j == 2) {
    if (i == 1) return Transition::kRightArcPrime;
    if (i == 3) return Transition::kLeftArcPrime;
    if (i == 4) return Transition::kLeftArc2;
  }
  if (m == 4 && j == 3) {
    if (i == 1) return Transition::kRightArc2;
    if (i == 2) return Transition::kRightArc;
    if (i == 4) return Transition::kLeftArc;
  }
  throw std::invalid_argument("no link (m=" + std::to_string(m) + ", i=" + std::to_string(i) +
                              ", j=" + std::to_string(j) + ")");
}

std::optional<DecodeResult> decode(const DecodeRequest& request, const TransitionScorer* scorer) {
  check_request(request, scorer);
  switch (request.objective) {
    case Objective::kRecognize:
    case Objective::kMaxRecall: {
      GoldScoring scoring(request);
      return ChartParser<GoldScoring>(request.n, request.mode, scoring).run();
    }
    default: {
      ModelScoring scoring(request, *scorer);
      return ChartParser<ModelScoring>(request.n, request.mode, scoring).run();
    }
  }
}

bool recognize(const DepTree& tree, System mode) {
  DecodeRequest req;
  req.n = tree.n();
  req.mode = mode;
  req.objective = Objective::kRecognize;
  req.gold = &tree;
  req.force = true;
  return decode(req, nullptr).has_value();
}

int max_recall(const DepTree& tree, System mode) {
  DecodeRequest req;
  req.n = tree.n();
  req.mode = mode;
  req.objective = Objective::kMaxRecall;
  req.gold = &tree;
  req.force = true;
  return static_cast<int>(decode(req, nullptr)->score);
}

std::vector<Transition> derivation_to_transitions(const Derivation& d) {
  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(2 * d.n + 1));
  // Post-order walk with an explicit stack: children in left-to-right order,
  // then the link's own reduce.
  struct Frame {
    int step;
    int stage;
  };
  std::vector<Frame> stack{{d.root, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    const DerivationStep& s = d.steps[static_cast<std::size_t>(f.step)];
    if (s.rule == Rule::kSeed) {
      out.push_back(Transition::kShift);
      stack.pop_back();
    } else if (s.rule == Rule::kCombine) {
      if (f.stage == 0) {
        f.stage = 1;
        stack.push_back({s.left, 0});
      } else if (f.stage == 1) {
        f.stage = 2;
        stack.push_back({s.right, 0});
      } else {
        stack.pop_back();
      }
    } else {
      if (f.stage == 0) {
        f.stage = 1;
        stack.push_back({s.left, 0});
      } else {
        out.push_back(s.transition);
        stack.pop_back();
      }
    }
  }
  return out;
}

DepTree derivation_arcs(const Derivation& d) {
  std::vector<int> heads(static_cast<std::size_t>(d.n) + 1, kNoNode);
  for (const auto& s : d.steps) {
    if (s.rule != Rule::kLink) continue;
    const auto& antecedent = d.steps[static_cast<std::size_t>(s.left)].heads;
    const int head = antecedent[static_cast<std::size_t>(s.link_head_pos - 1)];
    const int dep = antecedent[static_cast<std::size_t>(s.link_dep_pos - 1)];
    heads[static_cast<std::size_t>(dep)] = head;
  }
  return DepTree::validate(std::move(heads));
}

int derivation_cost(const Derivation& d, const DepTree& gold) {
  return d.n - derivation_arcs(d).overlap(gold);
}

OracleResult static_oracle(const DepTree& tree, System system) {
  DecodeRequest req;
  req.n = tree.n();
  req.mode = system;
  req.objective = Objective::kRecognize;
  req.gold = &tree;
  req.force = true;
  OracleResult result;
  auto exact = decode(req, nullptr);
  if (!exact) {
    req.objective = Objective::kMaxRecall;
    exact = decode(req, nullptr);
    result.partial = true;
  }
  result.sequence = derivation_to_transitions(exact->derivation);
  return result;
}

}  // namespace mh4
