#include <doctest.h>

#include <limits>
#include <random>

#include "mh4/chart.hpp"
#include "mh4/msa.hpp"
#include "oracles/scorers.hpp"
#include "oracles/trees.hpp"

using namespace mh4;

namespace {

ArcScoreMatrix<double> random_matrix(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ArcScoreMatrix<double> m(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) m(i, j) = u(rng);
  }
  return m;
}

struct Brute {
  double best = -std::numeric_limits<double>::infinity();
  double best_single = -std::numeric_limits<double>::infinity();
};

Brute brute(const ArcScoreMatrix<double>& m, int n) {
  Brute b;
  for (const auto& h : oracle::all_trees(n)) {
    double total = 0.0;
    int root_children = 0;
    for (int d = 1; d <= n; ++d) {
      total += m(h[d], d);
      root_children += h[d] == 0;
    }
    b.best = std::max(b.best, total);
    if (root_children == 1) b.best_single = std::max(b.best_single, total);
  }
  return b;
}

int root_children(const DepTree& t) {
  int c = 0;
  for (int m = 1; m <= t.n(); ++m) c += t.head(m) == 0;
  return c;
}

}  // namespace

TEST_CASE("single word") {
  ArcScoreMatrix<double> m = ArcScoreMatrix<double>::Constant(2, 2, -5.0);
  CHECK(max_arborescence(m, true).head(1) == 0);
  CHECK(max_arborescence(m, false).head(1) == 0);
}

TEST_CASE("optimal against exhaustive enumeration") {
  std::mt19937 rng(42);
  for (int n = 1; n <= 5; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      auto m = random_matrix(n, rng);
      auto b = brute(m, n);
      auto free_tree = max_arborescence(m, false);
      auto single = max_arborescence(m, true);
      CHECK(tree_score(m, free_tree) == doctest::Approx(b.best).epsilon(1e-12));
      CHECK(tree_score(m, single) == doctest::Approx(b.best_single).epsilon(1e-12));
      CHECK(root_children(single) == 1);
    }
  }
}

TEST_CASE("larger random matrices produce valid trees") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 10 + trial;
    auto m = random_matrix(n, rng);
    auto free_tree = max_arborescence(m, false);
    auto single = max_arborescence(m, true);
    CHECK(free_tree.n() == n);
    CHECK(root_children(single) == 1);
    CHECK(tree_score(m, free_tree) >= tree_score(m, single) - 1e-12);
  }
}

TEST_CASE("gold indicator recovers gold") {
  std::mt19937 rng(9);
  for (int n = 1; n <= 30; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<int> heads(n + 1, -1);
      for (int v = 1; v <= n; ++v) heads[v] = static_cast<int>(rng() % v);  // heads to the left
      // Permute labels so gold is not always left-headed.
      std::vector<int> perm(n);
      for (int i = 0; i < n; ++i) perm[i] = i + 1;
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<int> relabeled(n + 1, -1);
      auto map = [&](int v) { return v == 0 ? 0 : perm[v - 1]; };
      for (int v = 1; v <= n; ++v) relabeled[map(v)] = map(heads[v]);
      auto gold = DepTree::validate(relabeled);
      ArcScoreMatrix<double> m = ArcScoreMatrix<double>::Zero(n + 1, n + 1);
      for (int v = 1; v <= n; ++v) m(gold.head(v), v) = 1.0;
      CHECK(max_arborescence(m, false) == gold);
    }
  }
}

TEST_CASE("cost augmentation") {
  std::mt19937 rng(13);
  for (int n = 1; n <= 4; ++n) {
    auto trees = oracle::all_trees(n);
    for (int trial = 0; trial < 5; ++trial) {
      auto gold = DepTree::validate(trees[rng() % trees.size()]);
      ArcScoreMatrix<double> zero = ArcScoreMatrix<double>::Zero(n + 1, n + 1);
      auto aug = cost_augment(zero, gold);
      for (int v = 1; v <= n; ++v) CHECK(aug(gold.head(v), v) == 0.0);
      int min_overlap = n;
      for (const auto& h : trees) min_overlap = std::min(min_overlap, DepTree::validate(h).overlap(gold));
      auto t = max_arborescence(aug, false);
      CHECK(tree_score(aug, t) == doctest::Approx(n - min_overlap));
      CHECK(tree_score(aug, t) == doctest::Approx(n - t.overlap(gold)));
    }
  }
}

TEST_CASE("float instantiation agrees with double") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = random_matrix(8, rng);
    ArcScoreMatrix<float> f = m.cast<float>();
    auto a = max_arborescence(m, true);
    auto b = max_arborescence(f, true);
    CHECK(tree_score(m, a) >= tree_score(m, b) - 1e-5);
  }
}

TEST_CASE("arc-factored decoder chain: mst >= mh4 >= mh3") {
  for (int n = 1; n <= 8; ++n) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      oracle::ArcFactoredScorer scorer(seed * 7 + n);
      ArcScoreMatrix<double> m(n + 1, n + 1);
      for (int h = 0; h <= n; ++h) {
        for (int d = 0; d <= n; ++d) m(h, d) = scorer.arc(h, d);
      }
      DecodeRequest r;
      r.n = n;
      r.mode = System::kMH4;
      const double mh4 = decode(r, &scorer)->score;
      r.mode = System::kMH3;
      const double mh3 = decode(r, &scorer)->score;
      const double mst = tree_score(m, max_arborescence(m, false));
      CHECK(mst >= mh4 - 1e-12);
      CHECK(mh4 >= mh3 - 1e-12);
    }
  }
}
