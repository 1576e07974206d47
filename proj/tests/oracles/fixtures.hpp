// Trees used across test suites.

#ifndef MH4_TESTS_ORACLES_FIXTURES_HPP_
#define MH4_TESTS_ORACLES_FIXTURES_HPP_

#include <vector>

#include "mh4/dep_tree.hpp"
#include "mh4/transitions.hpp"

namespace fixtures {

// "Jack Dempseys are not an easy cichlid to breed": 9 -> 6 crosses 0 -> 7.
inline std::vector<int> fig1_heads() { return {-1, 2, 7, 7, 7, 7, 7, 0, 9, 6}; }

// Parsable by the MH4 transition system but not derivable in the MH4 chart.
inline std::vector<int> gap_tree_heads() { return {-1, 3, 0, 5, 2, 4}; }

inline std::vector<mh4::Transition> gap_tree_sequence() {
  return mh4::parse_sequence("sh sh sh la2 sh sh la2 sh ra ra ra");
}

inline mh4::DepTree tree(std::vector<int> heads) {
  return mh4::DepTree::validate(std::move(heads));
}

}  // namespace fixtures

#endif  // MH4_TESTS_ORACLES_FIXTURES_HPP_
