#include <doctest.h>

#include <functional>
#include <random>
#include <set>

#include "mh4/transitions.hpp"
#include "oracles/fixtures.hpp"
#include "oracles/scorers.hpp"
#include "oracles/trees.hpp"

using namespace mh4;

namespace {

Configuration replay(int n, const char* seq) {
  Configuration c = Configuration::initial(n);
  for (Transition t : parse_sequence(seq)) c = c.apply(t);
  return c;
}

// Every complete legal sequence for a sentence of n words.
void enumerate_sequences(const Configuration& c, System system, std::vector<Transition>& prefix,
                         const std::function<void(const Configuration&,
                                                  const std::vector<Transition>&)>& visit) {
  if (c.terminal()) {
    visit(c, prefix);
    return;
  }
  for (Transition t : kAllTransitions) {
    if (!c.legal(t, system)) continue;
    prefix.push_back(t);
    enumerate_sequences(c.apply(t), system, prefix, visit);
    prefix.pop_back();
  }
}

std::vector<int> heads_of(const Configuration& c) {
  std::vector<int> heads(c.n() + 1, -1);
  for (const Arc& a : c.arcs()) heads[a.dep] = a.head;
  return heads;
}

// +1 for a reduce that attaches a dependent to its gold head after the
// dependent collected all of its own gold dependents, 0 for sh, -1 otherwise.
class CompleteGoldArcScorer final : public TransitionScorer {
 public:
  explicit CompleteGoldArcScorer(const DepTree& gold) : gold_(gold) {}
  double score(const ScoringContext& c) const override {
    if (c.transition == Transition::kShift) return 0.0;
    if (gold_.head(c.arc.dep) != c.arc.head) return -1.0;
    int attached = 0;
    for (const Arc& a : c.config->arcs()) attached += a.head == c.arc.dep;
    int expected = 0;
    for (int m = 1; m <= gold_.n(); ++m) expected += gold_.head(m) == c.arc.dep;
    return attached == expected ? 1.0 : -1.0;
  }

 private:
  const DepTree& gold_;
};

std::vector<int> random_tree(int n, std::mt19937& rng) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> heads(n + 1, -1);
  std::vector<int> attached{0};
  for (int v : order) {
    heads[v] = attached[std::uniform_int_distribution<std::size_t>(0, attached.size() - 1)(rng)];
    attached.push_back(v);
  }
  return heads;
}

}  // namespace

TEST_CASE("tags parse in ASCII and Unicode spellings") {
  CHECK(parse_tag("la2") == Transition::kLeftArc2);
  CHECK(parse_tag("la₂") == Transition::kLeftArc2);
  CHECK(parse_tag("ra′") == Transition::kRightArcPrime);
  CHECK(parse_tag("ra'") == Transition::kRightArcPrime);
  CHECK_FALSE(parse_tag("swap").has_value());
  CHECK(parse_sequence("sh(0); la2(3->1); ra(0->2)") ==
        std::vector{Transition::kShift, Transition::kLeftArc2, Transition::kRightArc});
  CHECK_THROWS_AS(parse_sequence("sh xx"), std::invalid_argument);
  CHECK(format_sequence(fixtures::gap_tree_sequence()) == "sh sh sh la2 sh sh la2 sh ra ra ra");
}

TEST_CASE("initial configuration") {
  auto c = initial_config(3);
  CHECK(c.stack().empty());
  CHECK(c.buffer_front() == 0);
  CHECK(c.arcs().empty());
  CHECK_FALSE(initial_config(1).terminal());
  auto shifted = c.apply(Transition::kShift);
  CHECK(shifted.stack() == std::vector<int>{0});
  CHECK(shifted.buffer_front() == 1);
  CHECK_THROWS_AS(initial_config(0), std::invalid_argument);
}

TEST_CASE("legality") {
  auto root_only = replay(3, "sh");
  CHECK_FALSE(root_only.legal(Transition::kLeftArc));
  CHECK(root_only.violation(Transition::kLeftArc)->find("root") != std::string::npos);
  CHECK(root_only.legal(Transition::kShift));
  CHECK_FALSE(root_only.legal(Transition::kRightArc));

  auto three = replay(3, "sh sh sh");
  CHECK(three.stack() == std::vector<int>{0, 1, 2});
  CHECK(three.legal(Transition::kRightArc2));
  CHECK(three.legal(Transition::kRightArcPrime));
  CHECK(three.legal(Transition::kLeftArc2));
  CHECK(three.legal(Transition::kLeftArcPrime));

  // s1 is the root: la' and la2 would make it a dependent.
  auto two = replay(3, "sh sh");
  CHECK_FALSE(two.legal(Transition::kLeftArcPrime));
  CHECK_FALSE(two.legal(Transition::kLeftArc2));
  CHECK_FALSE(two.legal(Transition::kRightArcPrime));
  CHECK(two.legal(Transition::kRightArc));

  // ([0,2], n+1): the end marker can neither be shifted nor head an arc.
  auto end = replay(2, "sh sh la sh");
  CHECK(end.stack() == std::vector<int>{0, 2});
  CHECK(end.buffer_front() == 3);
  CHECK_FALSE(end.legal(Transition::kLeftArc));
  CHECK_FALSE(end.legal(Transition::kShift));
  CHECK(end.legal(Transition::kRightArc));

  CHECK_FALSE(three.legal(Transition::kLeftArc2, System::kMH3));
  CHECK(three.legal(Transition::kRightArc, System::kMH3));
}

TEST_CASE("apply") {
  auto c = replay(3, "sh sh sh").apply(Transition::kLeftArc2);
  CHECK(c.stack() == std::vector<int>{0, 2});
  CHECK(c.buffer_front() == 3);
  CHECK(c.arcs() == std::vector<Arc>{{3, 1}});

  auto r = replay(1, "sh sh").apply(Transition::kRightArc);
  CHECK(r.stack() == std::vector<int>{0});
  CHECK(r.arcs() == std::vector<Arc>{{0, 1}});

  auto base = replay(4, "sh sh sh sh");  // [0,1,2,3], b0 = 4
  CHECK(base.apply(Transition::kLeftArcPrime).arcs().back() == Arc{3, 2});
  CHECK(base.apply(Transition::kLeftArcPrime).stack() == std::vector<int>{0, 1, 3});
  CHECK(base.apply(Transition::kRightArcPrime).arcs().back() == Arc{1, 2});
  CHECK(base.apply(Transition::kRightArcPrime).stack() == std::vector<int>{0, 1, 3});
  CHECK(base.apply(Transition::kRightArc2).arcs().back() == Arc{1, 3});
  CHECK(base.apply(Transition::kRightArc2).stack() == std::vector<int>{0, 1, 2});
  CHECK(base.apply(Transition::kLeftArc).arcs().back() == Arc{4, 3});

  CHECK_THROWS_AS(replay(1, "sh").apply(Transition::kLeftArc), IllegalTransition);
}

TEST_CASE("run replays the gap-tree computation") {
  auto tree = run(5, fixtures::gap_tree_sequence());
  CHECK(std::vector<int>(tree.heads().begin(), tree.heads().end()) == fixtures::gap_tree_heads());
}

TEST_CASE("run errors") {
  SUBCASE("truncated") {
    auto seq = parse_sequence("sh sh");
    try {
      run(1, seq);
      FAIL("expected error");
    } catch (const RunError& e) {
      CHECK(e.step() == 2);
    }
  }
  SUBCASE("illegal step") {
    auto seq = parse_sequence("sh la");
    try {
      run(1, seq);
      FAIL("expected error");
    } catch (const RunError& e) {
      CHECK(e.step() == 1);
    }
  }
  SUBCASE("non-mh3 transition in mh3 mode") {
    CHECK_THROWS_AS(run(5, fixtures::gap_tree_sequence(), System::kMH3), RunError);
  }
}

TEST_CASE("n = 1 has exactly one terminating sequence") {
  std::vector<std::vector<Transition>> found;
  std::vector<Transition> prefix;
  enumerate_sequences(initial_config(1), System::kMH4, prefix,
                      [&](const Configuration&, const std::vector<Transition>& s) {
                        found.push_back(s);
                      });
  REQUIRE(found.size() == 1);
  CHECK(format_sequence(found[0]) == "sh sh ra");
  CHECK(run(1, found[0]).head(1) == 0);
}

TEST_CASE("every complete computation has n+1 shifts and n reduces and yields a tree") {
  for (int n = 1; n <= 5; ++n) {
    std::vector<Transition> prefix;
    enumerate_sequences(initial_config(n), System::kMH4, prefix,
                        [&](const Configuration& c, const std::vector<Transition>& s) {
                          const auto shifts = std::count(s.begin(), s.end(), Transition::kShift);
                          CHECK(shifts == n + 1);
                          CHECK(static_cast<int>(s.size()) == 2 * n + 1);
                          CHECK(oracle::is_tree(heads_of(c)));
                          CHECK_NOTHROW(run(n, s));
                        });
  }
}

TEST_CASE("progress: random legal walks never get stuck") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 12;
    Configuration c = initial_config(n);
    int steps = 0;
    while (!c.terminal()) {
      std::vector<Transition> legal;
      for (Transition t : kAllTransitions) {
        if (c.legal(t)) legal.push_back(t);
      }
      REQUIRE_FALSE(legal.empty());
      c = c.apply(legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)]);
      ++steps;
    }
    CHECK(steps == 2 * n + 1);
    CHECK(oracle::is_tree(heads_of(c)));
  }
}

TEST_CASE("mh3 computations yield exactly the projective trees") {
  for (int n = 1; n <= 5; ++n) {
    std::set<std::vector<int>> reachable;
    std::vector<Transition> prefix;
    enumerate_sequences(initial_config(n), System::kMH3, prefix,
                        [&](const Configuration& c, const std::vector<Transition>&) {
                          reachable.insert(heads_of(c));
                        });
    std::set<std::vector<int>> projective;
    for (const auto& h : oracle::all_trees(n)) {
      if (oracle::projective(h)) projective.insert(h);
    }
    CHECK(reachable == projective);
  }
}

TEST_CASE("mh4 transition system reaches the gap tree") {
  std::set<std::vector<int>> reachable;
  std::vector<Transition> prefix;
  enumerate_sequences(initial_config(5), System::kMH4, prefix,
                      [&](const Configuration& c, const std::vector<Transition>&) {
                        reachable.insert(heads_of(c));
                      });
  CHECK(reachable.count(fixtures::gap_tree_heads()) == 1);
}

TEST_CASE("greedy with the zero scorer follows the tie-break order") {
  ZeroScorer zero;
  auto result = greedy_parse(2, zero, System::kMH4);
  // sh is preferred whenever legal; then ra is the only legal reduce.
  CHECK(format_sequence(result.sequence) == "sh sh sh ra ra");
  CHECK(run(2, result.sequence) == result.tree);
  CHECK(result.tree.head(1) == 0);
  CHECK(result.tree.head(2) == 1);
}

TEST_CASE("greedy recovers projective gold trees under a complete-gold-arc scorer") {
  std::mt19937 rng(11);
  int tested = 0;
  while (tested < 200) {
    const int n = 1 + static_cast<int>(rng() % 9);
    auto heads = random_tree(n, rng);
    if (!oracle::projective(heads)) continue;
    auto gold = DepTree::validate(heads);
    CompleteGoldArcScorer scorer(gold);
    for (System system : {System::kMH3, System::kMH4}) {
      auto result = greedy_parse(n, scorer, system, FeatureSet::three());
      CHECK(result.tree == gold);
    }
    ++tested;
  }
}

TEST_CASE("greedy mh3 output is always projective") {
  for (int n = 1; n <= 5; ++n) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      oracle::RandomScorer scorer(seed);
      auto result = greedy_parse(n, scorer, System::kMH3, FeatureSet::three());
      std::vector<int> heads(result.tree.heads().begin(), result.tree.heads().end());
      CHECK(oracle::projective(heads));
    }
  }
}

TEST_CASE("beam width 1 reproduces greedy") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 1 + static_cast<int>(seed % 15);
    oracle::RandomScorer scorer(seed);
    for (auto system : {System::kMH3, System::kMH4}) {
      auto greedy = greedy_parse(n, scorer, system, FeatureSet::three());
      auto beam = beam_parse(n, scorer, system, FeatureSet::three(), 1);
      CHECK(greedy.sequence == beam.sequence);
      CHECK(greedy.score == beam.score);
    }
  }
  ZeroScorer zero;
  CHECK(beam_parse(4, zero, System::kMH4, FeatureSet::three(), 1).sequence ==
        greedy_parse(4, zero, System::kMH4).sequence);
}

TEST_CASE("exhaustive beam finds the best sequence") {
  const int n = 4;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    oracle::RandomScorer scorer(seed);
    const auto policy = FeaturePolicy::uniform(FeatureSet::three());
    double best = -1e300;
    std::size_t count = 0;
    std::vector<Transition> prefix;
    enumerate_sequences(initial_config(n), System::kMH4, prefix,
                        [&](const Configuration&, const std::vector<Transition>& s) {
                          best = std::max(best, replay_score(n, s, scorer, policy));
                          ++count;
                        });
    auto beam = beam_parse(n, scorer, System::kMH4, FeatureSet::three(), count);
    auto greedy = greedy_parse(n, scorer, System::kMH4, FeatureSet::three());
    CHECK(beam.score == doctest::Approx(best).epsilon(1e-12));
    CHECK(beam.score >= greedy.score - 1e-12);
    CHECK(replay_score(n, beam.sequence, scorer, policy) == doctest::Approx(beam.score));
  }
}

TEST_CASE("feature sets") {
  CHECK(FeatureSet::parse("s1,s0,b0") == FeatureSet::three());
  CHECK(FeatureSet::parse("{s0, b0}") == FeatureSet::two());
  CHECK(FeatureSet::four().to_string() == "s2,s1,s0,b0");
  CHECK_THROWS_AS(FeatureSet::parse("s1,s0"), std::invalid_argument);
  CHECK_THROWS_AS(FeatureSet::parse("s9,b0"), std::invalid_argument);
  auto c = replay(4, "sh sh sh");
  auto nodes = FeatureSet::two().select(positions_of(c));
  CHECK(nodes.s1 == kNoNode);
  CHECK(nodes.s0 == 2);
  CHECK(nodes.b0 == 3);
}
