#include "mh4/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "mh4/msa.hpp"

namespace mh4 {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t dropout_seed(std::uint64_t seed, int epoch, std::size_t sentence) {
  return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(epoch)) ^ sentence);
}

unsigned parser_groups(Decoder d) {
  return kEncoderGroup | (d == Decoder::kMST ? kArcGroup : kTransitionGroup);
}

using Terms = std::vector<std::pair<ScoreHandle, float>>;

void add_sequence(const ForwardPass<float>& pass, int n, const std::vector<Transition>& seq,
                  const FeaturePolicy& policy, float coef, Terms& terms) {
  for (const auto& ctx : replay_contexts(n, seq, policy)) {
    terms.emplace_back(pass.transition(ctx.transition, ctx.features), coef);
  }
}

}  // namespace

std::optional<HingeResult> structured_hinge(const DepTree& gold, System system, ScoringMode scoring,
                                            const TransitionScorer& scorer, bool skip_partial) {
  DecodeRequest req;
  req.n = gold.n();
  req.mode = system;
  req.scoring = scoring;
  req.objective = Objective::kConstrained;
  req.gold = &gold;
  req.force = true;
  HingeResult h;
  h.target = gold;
  auto best_gold = decode(req, &scorer);
  if (!best_gold) {
    if (skip_partial) return std::nullopt;
    h.partial = true;
    DecodeRequest recall = req;
    recall.objective = Objective::kMaxRecall;
    h.target = derivation_arcs(decode(recall, nullptr)->derivation);
    req.gold = &h.target;
    best_gold = decode(req, &scorer);
  }
  req.objective = Objective::kCostAugmented;
  auto best_aug = decode(req, &scorer);
  h.gold = std::move(*best_gold);
  h.predicted = std::move(*best_aug);
  h.cost = derivation_cost(h.predicted.derivation, gold);
  h.loss = std::max(0.0, h.predicted.score - h.gold.score);
  if (!std::isfinite(h.loss)) throw NonFiniteGradient("non-finite structured loss");
  return h;
}

ParserModel init_model(const std::vector<Sentence>& train, const TrainConfig& config) {
  if (train.empty()) throw std::invalid_argument("training treebank is empty");
  ParserModel m;
  m.vocab = Vocabulary::build(train, config.min_count);
  ModelDims d = config.dims;
  d.words = m.vocab.words().size();
  d.suffixes = m.vocab.suffixes().size();
  d.labels = std::max(1, m.vocab.labels().size());
  m.params.resize(d);
  m.params.initialize(config.seed);
  m.meta["decoder"] = std::string(decoder_name(config.decoder));
  return m;
}

Trainer::Trainer(ParserModel& model, const TrainConfig& config)
    : model_(model),
      config_(config),
      adam_(model.params.dims(), {config.learning_rate}, parser_groups(config.decoder)),
      label_adam_(model.params.dims(), {config.learning_rate}, kLabelGroup) {}

void Trainer::apply(const ForwardPass<float>& pass, const Terms& terms, Adam<float>& optimizer) {
  if (terms.empty()) return;
  Model<float> grads(model_.params.dims());
  pass.backward(terms, grads);
  optimizer.step(model_.params, grads);
}

LossRecord Trainer::step(const Sentence& s, std::uint64_t seed) {
  if (config_.decoder == Decoder::kMST) return mst_step(s, seed);
  if (is_greedy(config_.decoder)) return greedy_step(s, seed);
  return global_step(s, seed);
}

LossRecord Trainer::global_step(const Sentence& s, std::uint64_t seed) {
  LossRecord rec;
  const int n = s.n();
  const System system = decoder_system(config_.decoder);
  if (system == System::kMH4 && n > config_.length_cap) {
    rec.skipped = true;
    return rec;
  }
  const DepTree gold = DepTree::validate(s.heads());
  ForwardPass<float> pass(model_.params, model_.vocab.encode(s), config_.keep < 1.0, seed,
                          config_.keep);
  NeuralTransitionScorer<float> scorer(pass);
  const ScoringMode scoring = decoder_scoring(config_.decoder);
  auto h = structured_hinge(gold, system, scoring, scorer, config_.skip_partial);
  if (!h) {
    rec.partial = rec.skipped = true;
    return rec;
  }
  rec.partial = h->partial;
  rec.cost = h->cost;
  rec.loss = h->loss;
  if (rec.loss > 0.0) {
    const auto policy = feature_policy(scoring);
    Terms terms;
    add_sequence(pass, n, derivation_to_transitions(h->predicted.derivation), policy, 1.0F, terms);
    add_sequence(pass, n, derivation_to_transitions(h->gold.derivation), policy, -1.0F, terms);
    apply(pass, terms, adam_);
  }
  return rec;
}

LossRecord Trainer::greedy_step(const Sentence& s, std::uint64_t seed) {
  LossRecord rec;
  const int n = s.n();
  const System system = decoder_system(config_.decoder);
  const DepTree gold = DepTree::validate(s.heads());
  const OracleResult oracle = static_oracle(gold, system);
  if (oracle.partial) {
    rec.partial = true;
    rec.skipped = true;
    return rec;
  }
  ForwardPass<float> pass(model_.params, model_.vocab.encode(s), config_.keep < 1.0, seed,
                          config_.keep);
  const auto policy = FeaturePolicy::uniform(greedy_features());
  Terms terms;
  Configuration c = Configuration::initial(n);
  for (Transition gold_t : oracle.sequence) {
    if (!c.stack().empty()) {
      const auto gold_f = scoring_context(c, gold_t, policy).features;
      const double gold_score = pass.transition_score(gold_t, gold_f);
      double best = -std::numeric_limits<double>::infinity();
      std::optional<Transition> best_t;
      FeatureNodes best_f;
      for (Transition t : kAllTransitions) {
        if (t == gold_t || !c.legal(t, system)) continue;
        const auto f = scoring_context(c, t, policy).features;
        const double v = pass.transition_score(t, f);
        if (v > best) {
          best = v;
          best_t = t;
          best_f = f;
        }
      }
      if (best_t) {
        const double margin = best + 1.0 - gold_score;
        if (margin > 0.0) {
          rec.loss += margin;
          ++rec.cost;
          terms.emplace_back(pass.transition(*best_t, best_f), 1.0F);
          terms.emplace_back(pass.transition(gold_t, gold_f), -1.0F);
        }
      }
    }
    c = c.apply(gold_t);
  }
  if (!std::isfinite(rec.loss)) throw NonFiniteGradient("non-finite greedy loss");
  apply(pass, terms, adam_);
  return rec;
}

LossRecord Trainer::mst_step(const Sentence& s, std::uint64_t seed) {
  LossRecord rec;
  const int n = s.n();
  const DepTree gold = DepTree::validate(s.heads());
  ForwardPass<float> pass(model_.params, model_.vocab.encode(s), config_.keep < 1.0, seed,
                          config_.keep);
  const ArcScoreMatrix<double> m = pass.arc_matrix().cast<double>();
  const ArcScoreMatrix<double> aug = cost_augment(m, gold);
  const DepTree pred = max_arborescence(aug, config_.single_root);
  rec.cost = n - pred.overlap(gold);
  rec.loss = std::max(0.0, tree_score(aug, pred) - tree_score(m, gold));
  if (!std::isfinite(rec.loss)) throw NonFiniteGradient("non-finite arc loss");
  if (rec.loss > 0.0) {
    Terms terms;
    for (int d = 1; d <= n; ++d) {
      if (pred.head(d) == gold.head(d)) continue;
      terms.emplace_back(pass.arc(pred.head(d), d), 1.0F);
      terms.emplace_back(pass.arc(gold.head(d), d), -1.0F);
    }
    apply(pass, terms, adam_);
  }
  return rec;
}

LossRecord Trainer::labeler_step(const Sentence& s, std::uint64_t seed) {
  LossRecord rec;
  const auto labels = model_.vocab.label_ids(s);
  ForwardPass<float> pass(model_.params, model_.vocab.encode(s), config_.keep < 1.0, seed,
                          config_.keep);
  Terms terms;
  for (int m = 1; m <= s.n(); ++m) {
    const int g = labels[static_cast<std::size_t>(m)];
    if (g < 0) continue;
    const int h = s.tokens[static_cast<std::size_t>(m - 1)].head;
    const Vec<float> scores = pass.label_scores(h, m);
    int best = -1;
    for (int l = 0; l < scores.size(); ++l) {
      if (l != g && (best < 0 || scores(l) > scores(best))) best = l;
    }
    if (best < 0) continue;
    const double margin = static_cast<double>(scores(best)) + 1.0 - scores(g);
    if (margin > 0.0) {
      rec.loss += margin;
      ++rec.cost;
      terms.emplace_back(pass.label(h, m, best), 1.0F);
      terms.emplace_back(pass.label(h, m, g), -1.0F);
    }
  }
  apply(pass, terms, label_adam_);
  return rec;
}

double parse_uas(const ParserModel& model, const std::vector<Sentence>& data, Decoder decoder,
                 unsigned jobs, int length_cap) {
  ParseOptions opt;
  opt.decoder = decoder;
  opt.labels = false;
  opt.length_cap = length_cap;
  auto parsed = parse_all(model, data, opt, jobs);
  std::vector<ParseOverlay> overlays;
  overlays.reserve(parsed.size());
  for (auto& p : parsed) overlays.push_back(std::move(p.overlay));
  return evaluate(data, overlays).uas;
}

double label_accuracy(const ParserModel& model, const std::vector<Sentence>& data) {
  long total = 0;
  long correct = 0;
  for (const auto& s : data) {
    ForwardPass<float> pass(model.params, model.vocab.encode(s));
    const auto labels = model.vocab.label_ids(s);
    for (int m = 1; m <= s.n(); ++m) {
      ++total;
      const int g = labels[static_cast<std::size_t>(m)];
      if (g < 0) continue;
      const Vec<float> scores = pass.label_scores(s.tokens[static_cast<std::size_t>(m - 1)].head, m);
      Eigen::Index best = 0;
      for (Eigen::Index l = 1; l < scores.size(); ++l) {
        if (scores(l) > scores(best)) best = l;
      }
      correct += best == g;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

void train_labeler(ParserModel& model, const std::vector<Sentence>& train, const TrainConfig& config) {
  if (model.vocab.labels().empty()) return;
  Trainer trainer(model, config);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix(config.seed ^ 0x6c6162656cULL));
  for (int epoch = 1; epoch <= config.labeler_epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    int errors = 0;
    for (std::size_t idx : order) {
      errors += trainer.labeler_step(train[idx], dropout_seed(config.seed ^ 1, epoch, idx)).cost;
    }
    if (errors == 0 && label_accuracy(model, train) == 1.0) break;
  }
}

TrainResult train(const std::vector<Sentence>& train_set, const std::vector<Sentence>* dev,
                  const TrainConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (config.length_cap < 1) throw std::invalid_argument("length cap must be at least 1");
  TrainResult result;
  result.model = init_model(train_set, config);
  ParserModel& model = result.model;
  Trainer trainer(model, config);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix(config.seed));

  double best_dev = -1.0;
  int since_best = 0;
  std::optional<Model<float>> best_params;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int counted = 0;
    for (std::size_t idx : order) {
      LossRecord rec = trainer.step(train_set[idx], dropout_seed(config.seed, epoch, idx));
      rec.sentence = static_cast<int>(idx);
      if (rec.skipped) continue;
      total += rec.loss;
      ++counted;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = counted ? total / counted : 0.0;
    stats.train_uas = parse_uas(model, train_set, config.decoder, config.jobs, config.length_cap);
    const bool eval_dev = dev && !dev->empty() && config.dev_every > 0 && epoch % config.dev_every == 0;
    if (eval_dev) stats.dev_uas = parse_uas(model, *dev, config.decoder, config.jobs, config.length_cap);
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(stats);

    if (config.log) {
      char line[160];
      char dev_text[32] = "-";
      if (stats.dev_uas) std::snprintf(dev_text, sizeof dev_text, "%.4f", *stats.dev_uas);
      std::snprintf(line, sizeof line, "%d\t%.6f\t%.4f\t%s\t%.2f\n", epoch, stats.mean_loss,
                    stats.train_uas, dev_text, stats.seconds);
      *config.log << line << std::flush;
    }

    if (stats.dev_uas) {
      if (*stats.dev_uas > best_dev) {
        best_dev = *stats.dev_uas;
        since_best = 0;
        best_params = model.params;
      } else if (config.patience > 0 && ++since_best >= config.patience) {
        result.stopped_early = true;
        break;
      }
    }
    if (config.stop_train_uas > 0 && stats.train_uas >= config.stop_train_uas) {
      result.stopped_early = true;
      break;
    }
  }
  if (best_params) model.params = *best_params;
  if (config.labeler_epochs > 0) train_labeler(model, train_set, config);
  return result;
}

}  // namespace mh4
