// One forward pass of the neural scorer over a sentence, with reverse-mode
// gradients.
//
// Biaffine heads are evaluated for every ordered node pair at once and kept
// as score tables, so chart decoding only performs lookups. The backward pass
// collects the coefficients of all requested scores into per-class matrices
// and differentiates each head once.

#ifndef MH4_FORWARD_HPP_
#define MH4_FORWARD_HPP_

#include <array>
#include <atomic>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mh4/model.hpp"
#include "mh4/msa.hpp"
#include "mh4/transitions.hpp"
#include "mh4/vocab.hpp"

namespace mh4 {

enum class ScoreKind : std::uint8_t { kTransition, kArc, kLabel };

/// Names one score of one forward pass. For arcs and labels nodes.s0 is the
/// head and nodes.b0 the dependent.
struct ScoreHandle {
  std::uint64_t pass = 0;
  ScoreKind kind = ScoreKind::kTransition;
  int cls = 0;
  FeatureNodes nodes;
};

class StaleHandle : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::uint64_t next_pass_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

template <typename Scalar>
class ForwardPass {
 public:
  /// Dropout on the encoder input is applied iff train_mode.
  ForwardPass(const Model<Scalar>& model, const EncodedSentence& sentence, bool train_mode = false,
              std::uint64_t dropout_seed = 0, double keep = 0.7)
      : model_(model), id_(next_pass_id()), version_(model.version()), n_(sentence.n()) {
    if (n_ < 1) throw std::invalid_argument("forward pass: empty sentence");
    encode(sentence, train_mode, dropout_seed, keep);
  }

  int n() const { return n_; }
  std::uint64_t id() const { return id_; }

  /// D x (n+2), column i is node i.
  const Mat<Scalar>& context() const { return cv_; }

  Scalar transition_score(Transition t, const FeatureNodes& f) const {
    const int c = index_of(t);
    Scalar total = 0;
    if (f.s2 != kNoNode && f.s1 != kNoNode) total += table(Head::kS2S1, c)(f.s2, f.s1);
    if (f.s1 != kNoNode && f.s0 != kNoNode) total += table(Head::kS1S0, c)(f.s1, f.s0);
    if (f.s0 != kNoNode && f.b0 != kNoNode) total += table(Head::kS0B0, c)(f.s0, f.b0);
    return total;
  }

  Scalar arc_score(int h, int m) const { return table(Head::kArc, 0)(h, m); }

  /// Arc scores for the spanning-tree decoder, (n+1) x (n+1).
  ArcScoreMatrix<Scalar> arc_matrix() const { return table(Head::kArc, 0).topLeftCorner(n_ + 1, n_ + 1); }

  Vec<Scalar> label_scores(int h, int m) const {
    const auto& b = model_.head(Head::kLabel);
    project(Head::kLabel);
    const int k = static_cast<int>(Head::kLabel);
    const int H = b.width();
    const int T = b.classes();
    Vec<Scalar> out(T);
    const auto u = pu_[k].col(h);
    const auto v = pv_[k].col(m);
    for (int t = 0; t < T; ++t) {
      out(t) = u.dot(b.bilinear.block(0, t * H, H, H) * v) + b.linear.col(t).head(H).dot(u) +
               b.linear.col(t).tail(H).dot(v) + b.bias(t);
    }
    return out;
  }

  ScoreHandle transition(Transition t, const FeatureNodes& f) const {
    return {id_, ScoreKind::kTransition, index_of(t), f};
  }
  ScoreHandle arc(int h, int m) const {
    return {id_, ScoreKind::kArc, 0, {kNoNode, kNoNode, h, m}};
  }
  ScoreHandle label(int h, int m, int l) const {
    return {id_, ScoreKind::kLabel, l, {kNoNode, kNoNode, h, m}};
  }

  Scalar value(const ScoreHandle& s) const {
    check(s);
    switch (s.kind) {
      case ScoreKind::kTransition:
        return transition_score(kAllTransitions[static_cast<std::size_t>(s.cls)], s.nodes);
      case ScoreKind::kArc:
        return arc_score(s.nodes.s0, s.nodes.b0);
      case ScoreKind::kLabel:
        return label_scores(s.nodes.s0, s.nodes.b0)(s.cls);
    }
    return 0;
  }

  /// grads += d(sum coeff * score) / d(params).
  void backward(std::span<const std::pair<ScoreHandle, Scalar>> terms, Model<Scalar>& grads) const {
    for (const auto& [h, c] : terms) check(h);
    std::array<std::vector<Mat<Scalar>>, kNumHeads> coef;
    auto add = [&](Head head, int cls, int a, int b, Scalar c) {
      auto& v = coef[static_cast<int>(head)];
      if (v.empty()) v.resize(static_cast<std::size_t>(model_.head(head).classes()));
      auto& m = v[static_cast<std::size_t>(cls)];
      if (m.size() == 0) m.setZero(n_ + 2, n_ + 2);
      m(a, b) += c;
    };
    for (const auto& [h, c] : terms) {
      if (c == Scalar(0)) continue;
      const auto& f = h.nodes;
      switch (h.kind) {
        case ScoreKind::kTransition:
          if (f.s2 != kNoNode && f.s1 != kNoNode) add(Head::kS2S1, h.cls, f.s2, f.s1, c);
          if (f.s1 != kNoNode && f.s0 != kNoNode) add(Head::kS1S0, h.cls, f.s1, f.s0, c);
          if (f.s0 != kNoNode && f.b0 != kNoNode) add(Head::kS0B0, h.cls, f.s0, f.b0, c);
          break;
        case ScoreKind::kArc:
          add(Head::kArc, 0, f.s0, f.b0, c);
          break;
        case ScoreKind::kLabel:
          add(Head::kLabel, h.cls, f.s0, f.b0, c);
          break;
      }
    }

    Mat<Scalar> dcv = Mat<Scalar>::Zero(cv_.rows(), cv_.cols());
    bool any = false;
    for (int k = 0; k < kNumHeads; ++k) {
      if (coef[k].empty()) continue;
      any = true;
      head_backward(static_cast<Head>(k), coef[k], grads.heads[k], dcv);
    }
    if (any) encoder_backward(dcv, grads);
  }

 private:
  void check(const ScoreHandle& s) const {
    if (s.pass != id_) throw StaleHandle("score handle belongs to a different forward pass");
    if (model_.version() != version_) throw StaleHandle("parameters changed since the forward pass");
  }

  int token_id(const std::vector<int>& ids, int pos, int root, int end) const {
    if (pos == 0) return root;
    if (pos == n_ + 1) return end;
    if (pos < 0 || pos > n_ + 1) return SymbolTable::kPad;
    return ids[static_cast<std::size_t>(pos - 1)];
  }

  void encode(const EncodedSentence& s, bool train_mode, std::uint64_t seed, double keep) {
    const auto& d = model_.dims();
    const int w = d.window;
    const int slot = d.word_dim + d.suffix_dim;
    words_ = s.words;
    suffixes_ = s.suffixes;
    x_.resize(d.input_dim(), n_);
    for (int i = 1; i <= n_; ++i) {
      for (int o = -w; o <= w; ++o) {
        const int base = (o + w) * slot;
        const int wid = token_id(s.words, i + o, SymbolTable::kRoot, SymbolTable::kEnd);
        const int sid = token_id(s.suffixes, i + o, SymbolTable::kRoot, SymbolTable::kEnd);
        x_.col(i - 1).segment(base, d.word_dim) = model_.word_emb.col(wid);
        x_.col(i - 1).segment(base + d.word_dim, d.suffix_dim) = model_.suffix_emb.col(sid);
      }
    }
    if (train_mode) {
      std::mt19937_64 rng(seed);
      std::bernoulli_distribution coin(keep);
      mask_.resize(x_.rows(), x_.cols());
      const Scalar scale = static_cast<Scalar>(1.0 / keep);
      for (Eigen::Index j = 0; j < mask_.cols(); ++j) {
        for (Eigen::Index i = 0; i < mask_.rows(); ++i) mask_(i, j) = coin(rng) ? scale : Scalar(0);
      }
      x_.array() *= mask_.array();
    }
    h1_ = ((model_.enc_w1 * x_).colwise() + model_.enc_b1.col(0)).array().tanh().matrix();
    cv_.resize(d.context, n_ + 2);
    cv_.col(0) = model_.root_vec.col(0);
    cv_.middleCols(1, n_) = (model_.enc_w2 * h1_).colwise() + model_.enc_b2.col(0);
    cv_.col(n_ + 1) = model_.end_vec.col(0);
  }

  void project(Head head) const {
    const int k = static_cast<int>(head);
    if (projected_[k]) return;
    const auto& b = model_.head(head);
    pu_[k] = ((b.proj_a * cv_).colwise() + b.bias_a.col(0)).array().tanh().matrix();
    pv_[k] = ((b.proj_b * cv_).colwise() + b.bias_b.col(0)).array().tanh().matrix();
    projected_[k] = true;
  }

  const Mat<Scalar>& table(Head head, int cls) const {
    const int k = static_cast<int>(head);
    if (tables_[k].empty()) {
      project(head);
      const auto& b = model_.head(head);
      const int H = b.width();
      const auto& u = pu_[k];
      const auto& v = pv_[k];
      tables_[k].resize(static_cast<std::size_t>(b.classes()));
      for (int t = 0; t < b.classes(); ++t) {
        Mat<Scalar> s = u.transpose() * (b.bilinear.block(0, t * H, H, H) * v);
        const Vec<Scalar> left = u.transpose() * b.linear.col(t).head(H);
        const Vec<Scalar> right = v.transpose() * b.linear.col(t).tail(H);
        s.colwise() += left;
        s.rowwise() += right.transpose();
        s.array() += b.bias(t);
        tables_[k][static_cast<std::size_t>(t)] = std::move(s);
      }
    }
    return tables_[k][static_cast<std::size_t>(cls)];
  }

  void head_backward(Head head, const std::vector<Mat<Scalar>>& coef, Biaffine<Scalar>& g,
                     Mat<Scalar>& dcv) const {
    project(head);
    const int k = static_cast<int>(head);
    const auto& b = model_.head(head);
    const int H = b.width();
    const auto& u = pu_[k];
    const auto& v = pv_[k];
    Mat<Scalar> du = Mat<Scalar>::Zero(u.rows(), u.cols());
    Mat<Scalar> dv = Mat<Scalar>::Zero(v.rows(), v.cols());
    for (std::size_t t = 0; t < coef.size(); ++t) {
      const auto& c = coef[t];
      if (c.size() == 0) continue;
      const int ti = static_cast<int>(t);
      const auto U = b.bilinear.block(0, ti * H, H, H);
      const Vec<Scalar> rows = c.rowwise().sum();
      const Vec<Scalar> cols = c.colwise().sum().transpose();
      g.bilinear.block(0, ti * H, H, H) += u * c * v.transpose();
      du.noalias() += U * (v * c.transpose());
      du.noalias() += b.linear.col(ti).head(H) * rows.transpose();
      dv.noalias() += U.transpose() * (u * c);
      dv.noalias() += b.linear.col(ti).tail(H) * cols.transpose();
      g.linear.col(ti).head(H) += u * rows;
      g.linear.col(ti).tail(H) += v * cols;
      g.bias(ti) += c.sum();
    }
    const Mat<Scalar> dzu = (du.array() * (Scalar(1) - u.array().square())).matrix();
    const Mat<Scalar> dzv = (dv.array() * (Scalar(1) - v.array().square())).matrix();
    g.proj_a.noalias() += dzu * cv_.transpose();
    g.bias_a += dzu.rowwise().sum();
    g.proj_b.noalias() += dzv * cv_.transpose();
    g.bias_b += dzv.rowwise().sum();
    dcv.noalias() += b.proj_a.transpose() * dzu;
    dcv.noalias() += b.proj_b.transpose() * dzv;
  }

  void encoder_backward(const Mat<Scalar>& dcv, Model<Scalar>& g) const {
    const auto& d = model_.dims();
    g.root_vec += dcv.col(0);
    g.end_vec += dcv.col(n_ + 1);
    const Mat<Scalar> dout = dcv.middleCols(1, n_);
    g.enc_b2 += dout.rowwise().sum();
    g.enc_w2.noalias() += dout * h1_.transpose();
    const Mat<Scalar> dz =
        ((model_.enc_w2.transpose() * dout).array() * (Scalar(1) - h1_.array().square())).matrix();
    g.enc_b1 += dz.rowwise().sum();
    g.enc_w1.noalias() += dz * x_.transpose();
    Mat<Scalar> dx = model_.enc_w1.transpose() * dz;
    if (mask_.size() != 0) dx.array() *= mask_.array();
    const int w = d.window;
    const int slot = d.word_dim + d.suffix_dim;
    for (int i = 1; i <= n_; ++i) {
      for (int o = -w; o <= w; ++o) {
        const int base = (o + w) * slot;
        const int wid = token_id(words_, i + o, SymbolTable::kRoot, SymbolTable::kEnd);
        const int sid = token_id(suffixes_, i + o, SymbolTable::kRoot, SymbolTable::kEnd);
        g.word_emb.col(wid) += dx.col(i - 1).segment(base, d.word_dim);
        g.suffix_emb.col(sid) += dx.col(i - 1).segment(base + d.word_dim, d.suffix_dim);
      }
    }
  }

  const Model<Scalar>& model_;
  std::uint64_t id_;
  std::uint64_t version_;
  int n_;
  std::vector<int> words_;
  std::vector<int> suffixes_;
  Mat<Scalar> x_;     // encoder input after dropout, one column per word
  Mat<Scalar> mask_;  // empty outside train mode
  Mat<Scalar> h1_;
  Mat<Scalar> cv_;
  mutable std::array<bool, kNumHeads> projected_{};
  mutable std::array<Mat<Scalar>, kNumHeads> pu_;
  mutable std::array<Mat<Scalar>, kNumHeads> pv_;
  mutable std::array<std::vector<Mat<Scalar>>, kNumHeads> tables_;
};

/// Chart and transition decoders see the forward pass through this adapter.
template <typename Scalar>
class NeuralTransitionScorer final : public TransitionScorer {
 public:
  explicit NeuralTransitionScorer(const ForwardPass<Scalar>& pass) : pass_(pass) {}
  double score(const ScoringContext& c) const override {
    return static_cast<double>(pass_.transition_score(c.transition, c.features));
  }

 private:
  const ForwardPass<Scalar>& pass_;
};

}  // namespace mh4

#endif  // MH4_FORWARD_HPP_
