#include "mh4/dep_tree.hpp"

#include <algorithm>

namespace mh4 {

int LabelTable::intern(std::string_view label) {
  std::string key(label);
  auto it = ids_.find(key);
  if (it != ids_.end()) return it->second;
  int id = size();
  ids_.emplace(key, id);
  names_.push_back(std::move(key));
  return id;
}

int LabelTable::find(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  return it == ids_.end() ? -1 : it->second;
}

DepTree DepTree::validate(std::vector<int> heads, std::vector<int> labels) {
  if (heads.size() < 2) throw TreeError(kNoNode, "tree needs at least one word");
  const int n = static_cast<int>(heads.size()) - 1;
  heads[0] = kNoNode;
  for (int m = 1; m <= n; ++m) {
    const int h = heads[static_cast<std::size_t>(m)];
    if (h < 0 || h > n) {
      throw TreeError(m, "head of node " + std::to_string(m) + " out of range: " +
                             std::to_string(h));
    }
    if (h == m) throw TreeError(m, "node " + std::to_string(m) + " is its own head");
  }
  // 0 = unvisited, 1 = on current path, 2 = known to reach the root.
  std::vector<char> state(heads.size(), 0);
  state[0] = 2;
  std::vector<int> path;
  for (int start = 1; start <= n; ++start) {
    int v = start;
    path.clear();
    while (state[static_cast<std::size_t>(v)] == 0) {
      state[static_cast<std::size_t>(v)] = 1;
      path.push_back(v);
      v = heads[static_cast<std::size_t>(v)];
    }
    if (state[static_cast<std::size_t>(v)] == 1) {
      throw TreeError(v, "cycle through node " + std::to_string(v));
    }
    for (int u : path) state[static_cast<std::size_t>(u)] = 2;
  }
  if (!labels.empty() && labels.size() != heads.size()) {
    throw std::invalid_argument("label array size does not match head array");
  }
  DepTree tree;
  tree.heads_ = std::move(heads);
  tree.labels_ = std::move(labels);
  return tree;
}

std::vector<Arc> DepTree::arcs() const {
  std::vector<Arc> out;
  out.reserve(static_cast<std::size_t>(n()));
  for (int m = 1; m <= n(); ++m) out.push_back({head(m), m});
  return out;
}

int DepTree::overlap(const DepTree& other) const {
  if (other.n() != n()) throw std::invalid_argument("overlap of trees with different lengths");
  int same = 0;
  for (int m = 1; m <= n(); ++m) same += head(m) == other.head(m);
  return same;
}

bool arcs_cross(const Arc& a, const Arc& b) {
  auto [l1, r1] = std::minmax(a.head, a.dep);
  auto [l2, r2] = std::minmax(b.head, b.dep);
  return (l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1);
}

bool is_projective(const DepTree& tree) {
  // Arcs are intervals; the tree is projective iff they are laminar.
  struct Span {
    int left, right;
  };
  std::vector<Span> spans;
  spans.reserve(static_cast<std::size_t>(tree.n()));
  for (const Arc& a : tree.arcs()) {
    auto [l, r] = std::minmax(a.head, a.dep);
    spans.push_back({l, r});
  }
  std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) {
    return x.left != y.left ? x.left < y.left : x.right > y.right;
  });
  std::vector<int> open;  // right endpoints of enclosing spans
  for (const Span& s : spans) {
    while (!open.empty() && open.back() <= s.left) open.pop_back();
    if (!open.empty() && open.back() < s.right) return false;
    open.push_back(s.right);
  }
  return true;
}

CrossingStats crossing_stats(const DepTree& tree) {
  CrossingStats stats;
  const auto arcs = tree.arcs();
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    for (std::size_t j = i + 1; j < arcs.size(); ++j) {
      if (arcs_cross(arcs[i], arcs[j])) {
        ++stats.count;
        stats.involved.insert(arcs[i]);
        stats.involved.insert(arcs[j]);
      }
    }
  }
  return stats;
}

}  // namespace mh4
