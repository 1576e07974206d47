// Parameters of the neural scorer, templated on the scalar type.
//
// Encoder: for each word, the word and suffix embeddings of a window of
// 2w+1 positions are concatenated and passed through one tanh hidden layer
// to a D-dimensional context vector. Nodes 0 and n+1 have their own learned
// vectors.
//
// Scoring heads are deep biaffine: u = tanh(Pa x + ba), v = tanh(Pb y + bb),
// score_t = u' U_t v + Wa_t' u + Wb_t' v + c_t.

#ifndef MH4_MODEL_HPP_
#define MH4_MODEL_HPP_

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mh4 {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct ModelDims {
  int window = 2;
  int word_dim = 64;
  int suffix_dim = 16;
  int hidden = 128;
  int context = 128;
  int biaffine = 64;
  int words = 4;     // vocabulary sizes, including reserved ids
  int suffixes = 4;
  int labels = 1;

  int input_dim() const { return (2 * window + 1) * (word_dim + suffix_dim); }
  bool operator==(const ModelDims&) const = default;
};

/// Parameter groups, for partial updates.
enum Group : unsigned {
  kEncoderGroup = 1U << 0,
  kTransitionGroup = 1U << 1,
  kArcGroup = 1U << 2,
  kLabelGroup = 1U << 3,
  kAllGroups = 0xFU,
};

template <typename Scalar>
struct Biaffine {
  Mat<Scalar> proj_a, bias_a;  // H x D, H x 1
  Mat<Scalar> proj_b, bias_b;
  Mat<Scalar> bilinear;        // H x (H * T), block t is U_t
  Mat<Scalar> linear;          // 2H x T, rows [0, H) act on u
  Mat<Scalar> bias;            // T x 1

  int classes() const { return static_cast<int>(bias.rows()); }
  int width() const { return static_cast<int>(proj_a.rows()); }

  void resize(int d, int h, int t) {
    proj_a.setZero(h, d);
    bias_a.setZero(h, 1);
    proj_b.setZero(h, d);
    bias_b.setZero(h, 1);
    bilinear.setZero(h, h * t);
    linear.setZero(2 * h, t);
    bias.setZero(t, 1);
  }

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".proj_a", proj_a);
    f(prefix + ".bias_a", bias_a);
    f(prefix + ".proj_b", proj_b);
    f(prefix + ".bias_b", bias_b);
    f(prefix + ".bilinear", bilinear);
    f(prefix + ".linear", linear);
    f(prefix + ".bias", bias);
  }
};

enum class Head : std::uint8_t { kS0B0, kS1S0, kS2S1, kArc, kLabel };
inline constexpr int kNumHeads = 5;

template <typename Scalar>
class Model {
 public:
  Model() = default;
  explicit Model(const ModelDims& dims) { resize(dims); }

  const ModelDims& dims() const { return dims_; }

  void resize(const ModelDims& d) {
    if (d.window < 0 || d.word_dim < 1 || d.suffix_dim < 1 || d.hidden < 1 || d.context < 1 ||
        d.biaffine < 1 || d.words < 4 || d.suffixes < 4 || d.labels < 1) {
      throw std::invalid_argument("model: invalid dimensions");
    }
    dims_ = d;
    word_emb.setZero(d.word_dim, d.words);
    suffix_emb.setZero(d.suffix_dim, d.suffixes);
    enc_w1.setZero(d.hidden, d.input_dim());
    enc_b1.setZero(d.hidden, 1);
    enc_w2.setZero(d.context, d.hidden);
    enc_b2.setZero(d.context, 1);
    root_vec.setZero(d.context, 1);
    end_vec.setZero(d.context, 1);
    heads[0].resize(d.context, d.biaffine, 7);
    heads[1].resize(d.context, d.biaffine, 7);
    heads[2].resize(d.context, d.biaffine, 7);
    heads[3].resize(d.context, d.biaffine, 1);
    heads[4].resize(d.context, d.biaffine, d.labels);
  }

  /// Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)) on weight blocks;
  /// biases stay zero.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    visit([&](const std::string& name, Mat<Scalar>& m, Group) {
      if (name.find("bias") != std::string::npos || name == "enc_b1" || name == "enc_b2") {
        m.setZero();
        return;
      }
      const double r = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      std::uniform_real_distribution<double> u(-r, r);
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(u(rng));
      }
    });
  }

  Biaffine<Scalar>& head(Head h) { return heads[static_cast<int>(h)]; }
  const Biaffine<Scalar>& head(Head h) const { return heads[static_cast<int>(h)]; }

  /// f(name, block, group) over every parameter block in a fixed order.
  template <typename F>
  void visit(F&& f) {
    f("word_emb", word_emb, kEncoderGroup);
    f("suffix_emb", suffix_emb, kEncoderGroup);
    f("enc_w1", enc_w1, kEncoderGroup);
    f("enc_b1", enc_b1, kEncoderGroup);
    f("enc_w2", enc_w2, kEncoderGroup);
    f("enc_b2", enc_b2, kEncoderGroup);
    f("root_vec", root_vec, kEncoderGroup);
    f("end_vec", end_vec, kEncoderGroup);
    static const char* const names[kNumHeads] = {"pair_s0b0", "pair_s1s0", "pair_s2s1", "arc",
                                                 "label"};
    static const Group groups[kNumHeads] = {kTransitionGroup, kTransitionGroup, kTransitionGroup,
                                            kArcGroup, kLabelGroup};
    for (int k = 0; k < kNumHeads; ++k) {
      heads[k].visit(names[k], [&](const std::string& n, Mat<Scalar>& m) { f(n, m, groups[k]); });
    }
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<Model*>(this)->visit([&](const std::string& n, Mat<Scalar>& m, Group g) {
      f(n, static_cast<const Mat<Scalar>&>(m), g);
    });
  }

  void set_zero() {
    visit([](const std::string&, Mat<Scalar>& m, Group) { m.setZero(); });
  }

  template <typename Other>
  Model<Other> cast() const {
    Model<Other> out(dims_);
    std::vector<const Mat<Scalar>*> src;
    visit([&](const std::string&, const Mat<Scalar>& m, Group) { src.push_back(&m); });
    std::size_t i = 0;
    out.visit([&](const std::string&, Mat<Other>& m, Group) { m = src[i++]->template cast<Other>(); });
    return out;
  }

  bool operator==(const Model& o) const {
    if (!(dims_ == o.dims_)) return false;
    std::vector<const Mat<Scalar>*> mine;
    visit([&](const std::string&, const Mat<Scalar>& m, Group) { mine.push_back(&m); });
    bool same = true;
    std::size_t i = 0;
    o.visit([&](const std::string&, const Mat<Scalar>& m, Group) { same = same && m == *mine[i++]; });
    return same;
  }

  /// Bumped by every optimizer step; forward passes compare against it.
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  Mat<Scalar> word_emb, suffix_emb;
  Mat<Scalar> enc_w1, enc_b1, enc_w2, enc_b2;
  Mat<Scalar> root_vec, end_vec;
  Biaffine<Scalar> heads[kNumHeads];

 private:
  ModelDims dims_;
  std::uint64_t version_ = 0;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamConfig {
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer over a subset of parameter groups. Blocks
/// outside the group mask, and their moments, are left untouched.
template <typename Scalar>
class Adam {
 public:
  Adam(const ModelDims& dims, AdamConfig config = {}, unsigned groups = kAllGroups)
      : config_(config), groups_(groups), m_(dims), v_(dims) {}

  void step(Model<Scalar>& params, const Model<Scalar>& grads) {
    std::string bad;
    grads.visit([&](const std::string& name, const Mat<Scalar>& g, Group group) {
      if (bad.empty() && (group & groups_) && !g.allFinite()) bad = name;
    });
    if (!bad.empty()) throw NonFiniteGradient("non-finite gradient in block " + bad);

    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const Scalar b1 = static_cast<Scalar>(config_.beta1);
    const Scalar b2 = static_cast<Scalar>(config_.beta2);
    const Scalar lr = static_cast<Scalar>(config_.learning_rate);
    const Scalar eps = static_cast<Scalar>(config_.epsilon);
    const Scalar s1 = static_cast<Scalar>(1.0 / c1);
    const Scalar s2 = static_cast<Scalar>(1.0 / c2);

    std::vector<Mat<Scalar>*> p, m, v;
    std::vector<const Mat<Scalar>*> g;
    std::vector<Group> group;
    params.visit([&](const std::string&, Mat<Scalar>& x, Group gr) {
      p.push_back(&x);
      group.push_back(gr);
    });
    m_.visit([&](const std::string&, Mat<Scalar>& x, Group) { m.push_back(&x); });
    v_.visit([&](const std::string&, Mat<Scalar>& x, Group) { v.push_back(&x); });
    grads.visit([&](const std::string&, const Mat<Scalar>& x, Group) { g.push_back(&x); });
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(group[i] & groups_)) continue;
      auto mi = m[i]->array();
      auto vi = v[i]->array();
      const auto gi = g[i]->array();
      mi = b1 * mi + (Scalar(1) - b1) * gi;
      vi = b2 * vi + (Scalar(1) - b2) * gi.square();
      p[i]->array() -= lr * (mi * s1) / ((vi * s2).sqrt() + eps);
    }
    params.touch();
  }

  long steps() const { return t_; }
  const Model<Scalar>& first_moment() const { return m_; }
  const Model<Scalar>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  unsigned groups_;
  Model<Scalar> m_;
  Model<Scalar> v_;
  long t_ = 0;
};

}  // namespace mh4

#endif  // MH4_MODEL_HPP_
