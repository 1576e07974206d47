#include "mh4/coverage.hpp"

#include <algorithm>
#include <cstdio>

#include "mh4/chart.hpp"
#include "mh4/parallel.hpp"

namespace mh4 {

namespace {

struct SentenceCoverage {
  int words = 0;
  bool proj = false;
  int proj_arcs = 0;
  bool mh4 = false;
  int mh4_arcs = 0;
};

void sort_rows(std::vector<CoverageReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
    const double x = a.sentence_coverage(a.proj);
    const double y = b.sentence_coverage(b.proj);
    return x != y ? x < y : a.name < b.name;
  });
}

std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::vector<std::vector<std::string>> rows(std::vector<CoverageReport> reports) {
  sort_rows(reports);
  std::vector<std::vector<std::string>> out;
  out.push_back({"lang", "sentences", "words", "proj_sent", "mh4_sent", "proj_edge", "mh4_edge"});
  for (const auto& r : reports) {
    auto cell = [&](bool on, double v) { return on ? pct(v) : std::string("-"); };
    const bool p = r.classes & kProjClass;
    const bool m = r.classes & kMH4Class;
    out.push_back({r.name.empty() ? "-" : r.name, std::to_string(r.sentences),
                   std::to_string(r.words), cell(p, r.sentence_coverage(r.proj)),
                   cell(m, r.sentence_coverage(r.mh4)), cell(p, r.edge_coverage(r.proj)),
                   cell(m, r.edge_coverage(r.mh4))});
  }
  return out;
}

}  // namespace

double CoverageReport::sentence_coverage(const ClassCoverage& c) const {
  return sentences ? static_cast<double>(c.sentences_covered) / static_cast<double>(sentences) : 0.0;
}

double CoverageReport::edge_coverage(const ClassCoverage& c) const {
  return words ? static_cast<double>(c.arcs_covered) / static_cast<double>(words) : 0.0;
}

CoverageReport analyze(const std::vector<Sentence>& treebank, unsigned classes, unsigned jobs,
                       std::string name) {
  auto per = parallel_map<SentenceCoverage>(treebank.size(), jobs, [&](std::size_t i) {
    SentenceCoverage c;
    const DepTree tree = DepTree::validate(treebank[i].heads());
    c.words = tree.n();
    if (classes & kProjClass) {
      // max_recall == n exactly when the tree is derivable.
      c.proj_arcs = max_recall(tree, System::kMH3);
      c.proj = c.proj_arcs == c.words;
    }
    if (classes & kMH4Class) {
      c.mh4_arcs = max_recall(tree, System::kMH4);
      c.mh4 = c.mh4_arcs == c.words;
    }
    return c;
  });
  CoverageReport r;
  r.name = std::move(name);
  r.classes = classes;
  for (const auto& c : per) {
    ++r.sentences;
    r.words += c.words;
    r.proj.sentences_covered += c.proj;
    r.proj.arcs_covered += c.proj_arcs;
    r.mh4.sentences_covered += c.mh4;
    r.mh4.arcs_covered += c.mh4_arcs;
  }
  return r;
}

std::string report_table(std::vector<CoverageReport> reports) {
  const auto table = rows(std::move(reports));
  std::vector<std::size_t> width(table[0].size(), 0);
  for (const auto& row : table) {
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  }
  std::string out;
  for (const auto& row : table) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j == 0) {
        out += row[j] + std::string(width[j] - row[j].size(), ' ');
      } else {
        out += "  " + std::string(width[j] - row[j].size(), ' ') + row[j];
      }
    }
    out += '\n';
  }
  return out;
}

std::string report_tsv(std::vector<CoverageReport> reports) {
  std::string out;
  for (const auto& row : rows(std::move(reports))) {
    for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "\t" : "") + row[j];
    out += '\n';
  }
  return out;
}

}  // namespace mh4
