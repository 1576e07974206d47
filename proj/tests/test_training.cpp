#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

#include "mh4/training.hpp"
#include "oracles/deduction.hpp"
#include "oracles/fixtures.hpp"
#include "oracles/scorers.hpp"
#include "oracles/trees.hpp"

using namespace mh4;

namespace {

std::vector<Sentence> toy() { return read_conllu_file(MH4_TEST_DATA_DIR "/toy.conllu"); }
std::vector<Sentence> fig1() { return read_conllu_file(MH4_TEST_DATA_DIR "/fig1.conllu"); }

std::vector<Sentence> projective_subset(const std::vector<Sentence>& all, std::size_t count) {
  std::vector<Sentence> out;
  for (const auto& s : all) {
    if (out.size() < count && is_projective(DepTree::validate(s.heads()))) out.push_back(s);
  }
  return out;
}

TrainConfig small_config(Decoder d) {
  TrainConfig c;
  c.decoder = d;
  c.dims.window = 1;
  c.dims.word_dim = 16;
  c.dims.suffix_dim = 8;
  c.dims.hidden = 32;
  c.dims.context = 32;
  c.dims.biaffine = 16;
  c.min_count = 1;
  c.patience = 0;
  return c;
}

Sentence sentence(const std::vector<int>& heads) {
  std::string text;
  for (std::size_t m = 1; m < heads.size(); ++m) {
    text += std::to_string(m) + "\tw" + std::to_string(m) + "\t_\t_\t_\t_\t" +
            std::to_string(heads[m]) + "\tdep\t_\t_\n";
  }
  return read_conllu_string(text + "\n")[0];
}

int overlap(const std::vector<int>& a, const std::vector<int>& b) {
  int k = 0;
  for (std::size_t m = 1; m < a.size(); ++m) k += a[m] == b[m];
  return k;
}

int root_children(const std::vector<int>& heads) {
  return static_cast<int>(std::count(heads.begin() + 1, heads.end(), 0));
}

}  // namespace

TEST_CASE("evaluate counts heads and labels over all tokens") {
  auto gold = read_conllu_string(
      "1\ta\t_\t_\t_\t_\t2\tdet\t_\t_\n"
      "2\tb\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "3\t.\t_\t_\t_\t_\t2\tpunct\t_\t_\n\n"
      "1\tc\t_\t_\t_\t_\t0\troot\t_\t_\n\n");
  std::vector<ParseOverlay> pred(2);
  pred[0].heads = {-1, 2, 0, 1};
  pred[0].labels = {"", "det", "nsubj", "punct"};
  pred[1].heads = {-1, 0};
  pred[1].labels = {"", "root"};
  const auto s = evaluate(gold, pred);
  CHECK(s.tokens == 4);
  CHECK(s.correct_heads == 3);
  CHECK(s.correct_labeled == 2);
  CHECK(s.uas == doctest::Approx(0.75));
  CHECK(s.las == doctest::Approx(0.5));

  pred[1].labels.clear();
  CHECK(evaluate(gold, pred).correct_labeled == 1);

  pred.pop_back();
  CHECK_THROWS_AS(evaluate(gold, pred), std::invalid_argument);
  pred.push_back({{-1, 0, 1}, {}});
  CHECK_THROWS_AS(evaluate(gold, pred), std::invalid_argument);
}

TEST_CASE("toy corpus composition") {
  const auto data = toy();
  REQUIRE(data.size() == 50);
  int proj = 0;
  for (const auto& s : data) {
    const DepTree t = DepTree::validate(s.heads());
    proj += is_projective(t);
    CHECK(recognize(t, System::kMH4));
  }
  CHECK(proj == 40);
}

TEST_CASE("structured hinge matches brute maximization under arc-factored scores") {
  std::mt19937 rng(11);
  for (int n = 1; n <= 5; ++n) {
    const auto trees = oracle::all_trees(n);
    std::vector<std::vector<int>> proj;
    for (const auto& t : trees) {
      if (oracle::projective(t)) proj.push_back(t);
    }
    for (int trial = 0; trial < 6; ++trial) {
      const auto& g = proj[rng() % proj.size()];
      const DepTree gold = DepTree::validate(g);
      oracle::ArcFactoredScorer scorer(100 * n + trial);
      auto arc_sum = [&](const std::vector<int>& h) {
        double s = 0;
        for (int m = 1; m <= n; ++m) s += scorer.arc(h[m], m);
        return s;
      };
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& t : proj) best = std::max(best, arc_sum(t) + (n - overlap(t, g)));
      const auto h = structured_hinge(gold, System::kMH3, ScoringMode::kHybrid, scorer, false);
      REQUIRE(h.has_value());
      CHECK_FALSE(h->partial);
      CHECK(h->gold.score == doctest::Approx(arc_sum(g)));
      CHECK(h->predicted.score == doctest::Approx(best));
      CHECK(h->loss == doctest::Approx(best - arc_sum(g)));
      CHECK(h->loss >= 0.0);
    }
  }
}

TEST_CASE("structured hinge on an underivable tree") {
  const DepTree gap = fixtures::tree(fixtures::gap_tree_heads());
  oracle::RandomScorer scorer(5);
  CHECK_FALSE(structured_hinge(gap, System::kMH4, ScoringMode::kTwo, scorer, true).has_value());
  const auto h = structured_hinge(gap, System::kMH4, ScoringMode::kTwo, scorer, false);
  REQUIRE(h.has_value());
  CHECK(h->partial);
  CHECK(h->target.overlap(gap) == max_recall(gap, System::kMH4));
  CHECK(h->loss >= 0.0);
  CHECK(h->cost == gap.n() - derivation_arcs(h->predicted.derivation).overlap(gap));
}

TEST_CASE("zero parameters give closed-form losses") {
  const std::vector<int> heads = {-1, 2, 0, 2, 3};
  const Sentence s = sentence(heads);
  const int n = s.n();

  SUBCASE("global") {
    for (Decoder d : {Decoder::kMH3Global, Decoder::kMH4Two, Decoder::kMH4Hybrid}) {
      TrainConfig c = small_config(d);
      c.keep = 1.0;
      ParserModel m = init_model({s}, c);
      m.params.set_zero();
      Trainer t(m, c);
      // With all scores zero the loss is the largest achievable cost.
      int min_overlap = n;
      if (d == Decoder::kMH3Global) {
        for (const auto& tree : oracle::all_trees(n)) {
          if (oracle::projective(tree)) min_overlap = std::min(min_overlap, overlap(tree, heads));
        }
      } else {
        oracle::DeductionEnumerator e(n, 4);
        for (const auto& der : e.goal()) min_overlap = std::min(min_overlap, overlap(der.heads, heads));
      }
      const LossRecord r = t.global_step(s, 0);
      CHECK(r.loss == doctest::Approx(n - min_overlap));
      CHECK(r.cost == n - min_overlap);
    }
  }

  SUBCASE("greedy") {
    TrainConfig c = small_config(Decoder::kMH4Greedy);
    c.keep = 1.0;
    ParserModel m = init_model({s}, c);
    m.params.set_zero();
    Trainer t(m, c);
    // Margin 1 at every oracle step with a legal alternative.
    const auto oracle_seq = static_oracle(DepTree::validate(heads), System::kMH4).sequence;
    int expected = 0;
    Configuration cfg = Configuration::initial(n);
    for (Transition g : oracle_seq) {
      int legal = 0;
      for (Transition x : kAllTransitions) legal += cfg.legal(x, System::kMH4) && x != g;
      expected += !cfg.stack().empty() && legal > 0;
      cfg = cfg.apply(g);
    }
    const LossRecord r = t.greedy_step(s, 0);
    CHECK(r.loss == doctest::Approx(expected));
    CHECK(r.cost == expected);
  }

  SUBCASE("mst") {
    for (bool single : {true, false}) {
      TrainConfig c = small_config(Decoder::kMST);
      c.keep = 1.0;
      c.single_root = single;
      ParserModel m = init_model({s}, c);
      m.params.set_zero();
      Trainer t(m, c);
      int worst = 0;
      for (const auto& tree : oracle::all_trees(n)) {
        if (single && root_children(tree) != 1) continue;
        worst = std::max(worst, n - overlap(tree, heads));
      }
      const LossRecord r = t.mst_step(s, 0);
      CHECK(r.loss == doctest::Approx(worst));
      CHECK(r.cost == worst);
    }
  }
}

TEST_CASE("global mh3 fits projective sentences") {
  const auto data = projective_subset(toy(), 20);
  TrainConfig c = small_config(Decoder::kMH3Global);
  c.epochs = 200;
  c.stop_train_uas = 1.0;
  const auto r = train(data, nullptr, c);
  CHECK(r.history.back().train_uas == 1.0);
}

TEST_CASE("greedy mh3 fits projective sentences") {
  const auto data = projective_subset(toy(), 20);
  TrainConfig c = small_config(Decoder::kMH3Greedy);
  c.epochs = 200;
  c.stop_train_uas = 1.0;
  const auto r = train(data, nullptr, c);
  CHECK(r.history.back().train_uas == 1.0);
}

TEST_CASE("greedy mh4 fits a sentence the projective oracle cannot") {
  const auto data = fig1();
  const DepTree gold = DepTree::validate(data[0].heads());
  CHECK(static_oracle(gold, System::kMH3).partial);
  CHECK_FALSE(static_oracle(gold, System::kMH4).partial);
  TrainConfig c = small_config(Decoder::kMH4Greedy);
  c.epochs = 100;
  c.stop_train_uas = 1.0;
  const auto r = train(data, nullptr, c);
  CHECK(r.history.back().train_uas == 1.0);
}

TEST_CASE("global mh4 fits a non-projective sentence") {
  const auto data = fig1();
  TrainConfig c = small_config(Decoder::kMH4Hybrid);
  c.epochs = 100;
  c.stop_train_uas = 1.0;
  const auto r = train(data, nullptr, c);
  CHECK(r.history.back().train_uas == 1.0);
}

TEST_CASE("mst fits non-projective sentences") {
  auto all = toy();
  std::vector<Sentence> data;
  for (const auto& s : all) {
    if (!is_projective(DepTree::validate(s.heads()))) data.push_back(s);
  }
  auto extra = projective_subset(all, 5);
  data.insert(data.end(), extra.begin(), extra.end());
  TrainConfig c = small_config(Decoder::kMST);
  c.epochs = 200;
  c.stop_train_uas = 1.0;
  const auto r = train(data, nullptr, c);
  CHECK(r.history.back().train_uas == 1.0);
}

TEST_CASE("loss decreases over the first epochs") {
  const auto data = projective_subset(toy(), 20);
  TrainConfig c = small_config(Decoder::kMH4Hybrid);
  c.epochs = 6;
  c.keep = 1.0;
  const auto r = train(data, nullptr, c);
  REQUIRE(r.history.size() == 6);
  int increases = 0;
  for (std::size_t e = 1; e < r.history.size(); ++e) {
    increases += r.history[e].mean_loss > r.history[e - 1].mean_loss;
  }
  CHECK(increases <= 1);
  CHECK(r.history.back().mean_loss < r.history.front().mean_loss);
}

TEST_CASE("labeler") {
  SUBCASE("single label") {
    auto data = projective_subset(toy(), 10);
    for (auto& s : data) {
      for (auto& t : s.tokens) t.deprel = "dep";
    }
    TrainConfig c = small_config(Decoder::kMST);
    c.epochs = 1;
    c.labeler_epochs = 1;
    const auto r = train(data, nullptr, c);
    CHECK(r.model.vocab.labels().size() == 1);
    CHECK(label_accuracy(r.model, data) == 1.0);
  }

  SUBCASE("toy corpus, heads untouched") {
    const auto data = toy();
    TrainConfig c = small_config(Decoder::kMST);
    c.epochs = 1;
    ParserModel m = train(data, nullptr, c).model;
    const Model<float> before = m.params;
    c.labeler_epochs = 100;
    train_labeler(m, data, c);
    CHECK(label_accuracy(m, data) == 1.0);
    bool others_same = true;
    std::vector<const Mat<float>*> b;
    before.visit([&](const std::string&, const Mat<float>& x, Group) { b.push_back(&x); });
    std::size_t i = 0;
    m.params.visit([&](const std::string&, const Mat<float>& x, Group g) {
      if (g != kLabelGroup && x != *b[i]) others_same = false;
      ++i;
    });
    CHECK(others_same);
  }
}

TEST_CASE("training is deterministic and independent of worker count") {
  const auto data = toy();
  std::vector<Sentence> part(data.begin(), data.begin() + 12);
  TrainConfig c = small_config(Decoder::kMH4Hybrid);
  c.epochs = 2;
  c.labeler_epochs = 2;
  const std::string a = serialize_model(train(part, &part, c).model);
  c.jobs = 3;
  const std::string b = serialize_model(train(part, &part, c).model);
  CHECK(a == b);
  c.seed = 2;
  CHECK(serialize_model(train(part, &part, c).model) != a);
}

TEST_CASE("dev patience restores the best parameters") {
  const auto data = toy();
  std::vector<Sentence> tr(data.begin(), data.begin() + 10);
  std::vector<Sentence> dev(data.begin() + 10, data.begin() + 20);
  TrainConfig c = small_config(Decoder::kMST);
  c.epochs = 40;
  c.patience = 2;
  const auto r = train(tr, &dev, c);
  double best = 0;
  for (const auto& e : r.history) best = std::max(best, *e.dev_uas);
  CHECK(parse_uas(r.model, dev, Decoder::kMST) == doctest::Approx(best));
}

TEST_CASE("invalid configurations") {
  const auto data = toy();
  TrainConfig c = small_config(Decoder::kMST);
  c.epochs = 0;
  CHECK_THROWS_AS(train(data, nullptr, c), std::invalid_argument);
  c.epochs = 1;
  CHECK_THROWS_AS(train({}, nullptr, c), std::invalid_argument);
}
