// Treebank coverage of the projective (MH3) and MH4 tree classes.
//
// Sentence coverage: fraction of sentences whose gold tree some derivation
// produces. Edge coverage: sum over sentences of the most gold arcs a single
// derivation produces, over the total number of arcs (root arcs included).

#ifndef MH4_COVERAGE_HPP_
#define MH4_COVERAGE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "mh4/conllu.hpp"

namespace mh4 {

enum CoverageClass : unsigned { kProjClass = 1U, kMH4Class = 2U, kBothClasses = 3U };

struct ClassCoverage {
  long sentences_covered = 0;
  long arcs_covered = 0;
};

struct CoverageReport {
  std::string name;
  unsigned classes = kBothClasses;
  long sentences = 0;
  long words = 0;
  ClassCoverage proj;
  ClassCoverage mh4;

  double sentence_coverage(const ClassCoverage& c) const;
  double edge_coverage(const ClassCoverage& c) const;
};

CoverageReport analyze(const std::vector<Sentence>& treebank, unsigned classes = kBothClasses,
                       unsigned jobs = 1, std::string name = "");

/// Rows sorted by projective sentence coverage, ascending; percentages with
/// two decimals.
std::string report_table(std::vector<CoverageReport> reports);
std::string report_tsv(std::vector<CoverageReport> reports);

}  // namespace mh4

#endif  // MH4_COVERAGE_HPP_
