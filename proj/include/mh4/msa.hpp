// Edge-factored non-projective decoding: maximum spanning arborescence
// rooted at node 0 (Chu-Liu/Edmonds).
//
// Score matrices are (n+1) x (n+1), entry (h, m) scoring the arc h -> m.
// Column 0 and the diagonal are ignored.

#ifndef MH4_MSA_HPP_
#define MH4_MSA_HPP_

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <vector>

#include "mh4/dep_tree.hpp"

namespace mh4 {

template <typename Scalar>
using ArcScoreMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

// One contraction level. S is square over local nodes, local node 0 is the
// root. Returns local head of every local node (head[0] = -1).
template <typename Scalar>
std::vector<int> cle(const ArcScoreMatrix<Scalar>& S) {
  const int N = static_cast<int>(S.rows());
  const Scalar ninf = -std::numeric_limits<Scalar>::infinity();

  std::vector<int> head(N, -1);
  for (int m = 1; m < N; ++m) {
    int best = -1;
    for (int h = 0; h < N; ++h) {
      if (h == m || S(h, m) == ninf) continue;
      if (best < 0 || S(h, m) > S(best, m)) best = h;
    }
    if (best < 0) throw std::invalid_argument("max_arborescence: node without a finite head");
    head[m] = best;
  }

  // Find a cycle among the greedy choices.
  std::vector<int> mark(N, -1);
  std::vector<int> cycle;
  for (int start = 1; start < N && cycle.empty(); ++start) {
    int v = start;
    while (v > 0 && mark[v] < 0) {
      mark[v] = start;
      v = head[v];
    }
    if (v > 0 && mark[v] == start) {
      int u = v;
      do {
        cycle.push_back(u);
        u = head[u];
      } while (u != v);
    }
  }
  if (cycle.empty()) return head;

  std::vector<char> in_cycle(N, 0);
  for (int v : cycle) in_cycle[v] = 1;

  // Contracted graph: outside nodes keep their order, the cycle becomes the
  // last node c.
  std::vector<int> outside;
  for (int v = 0; v < N; ++v) {
    if (!in_cycle[v]) outside.push_back(v);
  }
  const int M = static_cast<int>(outside.size()) + 1;
  const int c = M - 1;
  ArcScoreMatrix<Scalar> T = ArcScoreMatrix<Scalar>::Constant(M, M, ninf);
  std::vector<int> enter(N, -1);  // by outside source: cycle node entered
  std::vector<int> leave(N, -1);  // by outside target: cycle node left from

  for (int a = 0; a < M - 1; ++a) {
    const int u = outside[a];
    for (int b = 1; b < M - 1; ++b) T(a, b) = S(u, outside[b]);
    for (int v : cycle) {
      if (S(u, v) == ninf) continue;
      const Scalar gain = S(u, v) - S(head[v], v);
      if (enter[u] < 0 || gain > T(a, c)) {
        T(a, c) = gain;
        enter[u] = v;
      }
    }
    if (a == 0) continue;
    for (int v : cycle) {
      if (S(v, u) == ninf) continue;
      if (leave[u] < 0 || S(v, u) > T(c, a)) {
        T(c, a) = S(v, u);
        leave[u] = v;
      }
    }
  }

  const std::vector<int> sub = cle<Scalar>(T);
  std::vector<int> out(N, -1);
  for (int v : cycle) out[v] = head[v];
  for (int b = 1; b < M - 1; ++b) {
    const int w = outside[b];
    out[w] = sub[b] == c ? leave[w] : outside[sub[b]];
  }
  const int source = outside[sub[c]];
  out[enter[source]] = source;
  return out;
}

}  // namespace detail

template <typename Scalar>
Scalar tree_score(const ArcScoreMatrix<Scalar>& scores, const DepTree& tree) {
  Scalar total = 0;
  for (int m = 1; m <= tree.n(); ++m) total += scores(tree.head(m), m);
  return total;
}

/// Best tree under arc scores. With single_root exactly one word attaches to
/// 0. Ties go to the lower head index.
template <typename Scalar>
DepTree max_arborescence(const ArcScoreMatrix<Scalar>& scores, bool single_root) {
  const int n = static_cast<int>(scores.rows()) - 1;
  if (n < 1 || scores.cols() != scores.rows()) {
    throw std::invalid_argument("max_arborescence: expected a square (n+1)x(n+1) matrix, n >= 1");
  }
  const Scalar ninf = -std::numeric_limits<Scalar>::infinity();
  ArcScoreMatrix<Scalar> S = scores;
  S.col(0).setConstant(ninf);
  S.diagonal().setConstant(ninf);

  auto solve = [](const ArcScoreMatrix<Scalar>& m) {
    return DepTree::validate(detail::cle<Scalar>(m));
  };

  DepTree best = solve(S);
  int root_children = 0;
  for (int m = 1; m <= n; ++m) root_children += best.head(m) == 0;
  if (!single_root || root_children == 1) return best;

  bool found = false;
  Scalar best_score = 0;
  for (int r = 1; r <= n; ++r) {
    if (S(0, r) == ninf) continue;
    ArcScoreMatrix<Scalar> forced = S;
    forced.row(0).setConstant(ninf);
    forced(0, r) = S(0, r);
    DepTree t = solve(forced);
    const Scalar value = tree_score(S, t);
    if (!found || value > best_score) {
      best = std::move(t);
      best_score = value;
      found = true;
    }
  }
  return best;
}

/// +1 on every arc that disagrees with gold.
template <typename Scalar>
ArcScoreMatrix<Scalar> cost_augment(const ArcScoreMatrix<Scalar>& scores, const DepTree& gold) {
  ArcScoreMatrix<Scalar> out = scores;
  for (int m = 1; m <= gold.n(); ++m) {
    for (int h = 0; h <= gold.n(); ++h) {
      if (h != gold.head(m)) out(h, m) += Scalar(1);
    }
  }
  return out;
}

}  // namespace mh4

#endif  // MH4_MSA_HPP_
