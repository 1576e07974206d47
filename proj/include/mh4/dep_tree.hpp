// Dependency trees over nodes 0..n, with 0 the artificial root.

#ifndef MH4_DEP_TREE_HPP_
#define MH4_DEP_TREE_HPP_

#include <compare>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mh4 {

inline constexpr int kNoNode = -1;

struct Arc {
  int head = kNoNode;
  int dep = kNoNode;
  auto operator<=>(const Arc&) const = default;
};

/// Raised by DepTree::validate. node() names a node on the offending cycle,
/// or the node whose head is out of range.
class TreeError : public std::invalid_argument {
 public:
  TreeError(int node, const std::string& what) : std::invalid_argument(what), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

/// Interned dependency labels. Unlabeled mode uses an empty table.
class LabelTable {
 public:
  int intern(std::string_view label);
  /// -1 when absent.
  int find(std::string_view label) const;
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(names_.size()); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

/// A single-headed, acyclic head assignment rooted at node 0.
///
/// heads() uses a 1-based layout: heads()[0] is kNoNode and heads()[m] is the
/// head of node m. Only DepTree::validate constructs non-empty trees, so every
/// instance satisfies the tree invariants.
class DepTree {
 public:
  DepTree() = default;

  static DepTree validate(std::vector<int> heads, std::vector<int> labels = {});

  int n() const { return heads_.empty() ? 0 : static_cast<int>(heads_.size()) - 1; }
  int head(int m) const { return heads_[static_cast<std::size_t>(m)]; }
  std::span<const int> heads() const { return heads_; }
  bool labeled() const { return !labels_.empty(); }
  int label(int m) const { return labels_[static_cast<std::size_t>(m)]; }
  std::span<const int> labels() const { return labels_; }

  /// Arcs ordered by dependent.
  std::vector<Arc> arcs() const;
  /// Number of nodes m in 1..n with head(m) == other.head(m).
  int overlap(const DepTree& other) const;

  bool operator==(const DepTree& other) const { return heads_ == other.heads_; }

 private:
  std::vector<int> heads_;
  std::vector<int> labels_;
};

/// Two arcs cross iff their endpoints are pairwise distinct and interleave.
bool arcs_cross(const Arc& a, const Arc& b);

/// True iff no two arcs cross. Arcs from node 0 participate.
bool is_projective(const DepTree& tree);

struct CrossingStats {
  int count = 0;           // unordered crossing pairs
  std::set<Arc> involved;  // arcs in at least one crossing
};

CrossingStats crossing_stats(const DepTree& tree);

}  // namespace mh4

#endif  // MH4_DEP_TREE_HPP_
