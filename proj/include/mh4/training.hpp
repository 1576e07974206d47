// Large-margin training.
//
//   global  structured hinge: max(0, S(t^) + cost(t^) - S(t*)), t^ from the
//           cost-augmented chart, t* the model-best derivation of the gold
//           tree
//   greedy  per-configuration multiclass hinge along the static oracle
//   mst     structured hinge over cost-augmented arborescences
//   labeler per-arc multiclass hinge, encoder frozen
//
// Updates are per sentence, in a seeded shuffled order.

#ifndef MH4_TRAINING_HPP_
#define MH4_TRAINING_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mh4/forward.hpp"
#include "mh4/parser.hpp"

namespace mh4 {

struct TrainConfig {
  int epochs = 30;
  std::uint64_t seed = 1;
  double learning_rate = 0.002;
  Decoder decoder = Decoder::kMH4Hybrid;
  int length_cap = kDefaultLengthCap;  // longer sentences are skipped by global mh4
  bool shuffle = true;
  int dev_every = 1;
  int patience = 5;          // dev evaluations without improvement; 0 disables
  double keep = 0.7;         // dropout keep rate; 1 disables dropout
  bool skip_partial = false;  // skip trees the chart cannot derive instead of pseudo-gold
  bool single_root = true;    // mst
  double stop_train_uas = 0;  // stop once training UAS reaches this; 0 disables
  int min_count = Vocabulary::kDefaultMinCount;
  ModelDims dims;             // vocabulary sizes are filled in from the data
  int labeler_epochs = 0;     // 0: no labeler
  unsigned jobs = 1;          // evaluation workers
  std::ostream* log = nullptr;  // one line per epoch
};

struct LossRecord {
  int sentence = 0;
  double loss = 0.0;
  int cost = 0;
  bool partial = false;
  bool skipped = false;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_uas = 0.0;
  std::optional<double> dev_uas;
  double seconds = 0.0;
};

struct TrainResult {
  ParserModel model;
  std::vector<EpochStats> history;
  bool stopped_early = false;
};

struct HingeResult {
  double loss = 0.0;
  int cost = 0;          // mis-attachments of the prediction against the real gold tree
  bool partial = false;  // gold not derivable; target is the max-recall tree
  DepTree target;
  DecodeResult gold;       // model-best derivation of target
  DecodeResult predicted;  // cost-augmented best derivation
};

/// Structured hinge of one sentence under any transition scorer. nullopt
/// when skip_partial and the gold tree is not derivable.
std::optional<HingeResult> structured_hinge(const DepTree& gold, System system, ScoringMode scoring,
                                            const TransitionScorer& scorer, bool skip_partial);

/// Vocabulary from the training data and seeded initialization.
ParserModel init_model(const std::vector<Sentence>& train, const TrainConfig& config);

/// One update on a single sentence.
class Trainer {
 public:
  Trainer(ParserModel& model, const TrainConfig& config);

  LossRecord global_step(const Sentence& s, std::uint64_t dropout_seed);
  LossRecord greedy_step(const Sentence& s, std::uint64_t dropout_seed);
  LossRecord mst_step(const Sentence& s, std::uint64_t dropout_seed);
  LossRecord labeler_step(const Sentence& s, std::uint64_t dropout_seed);
  LossRecord step(const Sentence& s, std::uint64_t dropout_seed);

 private:
  void apply(const ForwardPass<float>& pass, const std::vector<std::pair<ScoreHandle, float>>& terms,
             Adam<float>& optimizer);

  ParserModel& model_;
  TrainConfig config_;
  Adam<float> adam_;
  Adam<float> label_adam_;
};

/// Trains the head parser named by config.decoder, then the labeler when
/// labeler_epochs > 0.
TrainResult train(const std::vector<Sentence>& train, const std::vector<Sentence>* dev,
                  const TrainConfig& config);

/// Labeler training on an existing model; only label parameters change.
void train_labeler(ParserModel& model, const std::vector<Sentence>& train, const TrainConfig& config);

/// Fraction of gold arcs whose argmax label is the gold label.
double label_accuracy(const ParserModel& model, const std::vector<Sentence>& data);

/// UAS of the model's parses under the given decoder.
double parse_uas(const ParserModel& model, const std::vector<Sentence>& data, Decoder decoder,
                 unsigned jobs = 1, int length_cap = kDefaultLengthCap);

}  // namespace mh4

#endif  // MH4_TRAINING_HPP_
