// net/mlp.h
//
// Fully-connected feed-forward networks with hand-written backpropagation.
// Five fixed layouts are supported, named by a single letter:
//
//   'a'  input -> hidden -> output                        (single task)
//   'b'  input -> hidden -> hidden -> output              (single task)
//   'c'  input -> shared hidden -> two output heads       (multi task)
//   'd'  input -> 2 shared hidden -> two output heads     (multi task)
//   'e'  input -> shared hidden -> per-task hidden -> output heads
//
// Hidden layers are ReLU; every hidden layer has the same width.  The
// primary head is sigmoid for targets bounded in [0,1] (gain, speech
// presence) and linear otherwise; the secondary head (speech presence
// probability) is always sigmoid with a cross-entropy loss.
//
// The class is templated on the scalar type: float for production training,
// double for finite-difference gradient verification.  Parameters are public
// so the optimizer, serializer, and tests can walk them directly.

#ifndef DEMIST_NET_MLP_H_
#define DEMIST_NET_MLP_H_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "feat/features.h"
#include "net/losses.h"
#include "util/rng.h"

namespace demist {

enum class Activation { kIdentity = 0, kSigmoid = 1, kRelu = 2 };

// How the scalar training objective is assembled from the per-task losses.
struct LossSpec {
  enum class Kind { kSingle = 0, kMultiFixed = 1, kMultiAdaptive = 2 };
  Kind kind = Kind::kSingle;
  double lambda1 = 1.0;  // fixed-weight mode only
  double lambda2 = 1.0;

  bool multi_task() const { return kind != Kind::kSingle; }
  void validate() const;
  std::string name() const;
  static LossSpec parse(const std::string& name, double lambda1 = 1.0,
                        double lambda2 = 1.0);
};

// Static description of one of the five layouts above.
struct Architecture {
  char shape = 'a';
  int input_dim = 0;
  int output_dim = 0;
  int hidden_units = 0;

  bool multi_task() const { return shape == 'c' || shape == 'd' || shape == 'e'; }
  int shared_layers() const { return (shape == 'b' || shape == 'd') ? 2 : 1; }
  int task_hidden_layers() const { return shape == 'e' ? 1 : 0; }
  void validate() const;
};

// Training provenance carried inside a model file so enhancement can be run
// from the model alone.
struct TrainMeta {
  TargetKind target = TargetKind::WienerGain;
  LossSpec loss;
  std::uint64_t seed = 0;
  int best_epoch = -1;
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double learning_rate = 0.0;
  double weight_decay = 0.0;
  int epochs = 0;
};

template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Dense {
    Matrix W;  // out x in
    Vector b;
    Activation act = Activation::kIdentity;
  };

  // Post-activation values of one forward pass, kept for backpropagation.
  struct Trace {
    Matrix x0;                  // normalized input, input_dim x batch
    std::vector<Matrix> shared; // one entry per shared layer
    std::vector<Matrix> task1;  // last entry is the primary output
    std::vector<Matrix> task2;  // empty for single-task layouts
  };

  struct BranchGrads {
    std::vector<Matrix> W;
    std::vector<Vector> b;
  };

  // Gradients in the same layout as the parameters, plus the batch losses
  // that produced them.
  struct Grads {
    BranchGrads shared, task1, task2;
    Scalar s1 = 0, s2 = 0;
    double loss1 = 0.0;  // primary MSE
    double loss2 = 0.0;  // secondary cross-entropy (multi-task only)
    double total = 0.0;  // combined objective
  };

  // Draws He-uniform weights (limit sqrt(6/fan_in), biases zero) in the fixed
  // order shared -> task1 -> task2, column-major within each matrix, from a
  // generator derived as stream 0 of `seed`.  Keeping the order fixed makes a
  // multi-task net share its first draws with the matching single-task net.
  static Mlp init(const Architecture& arch, Activation primary_act,
                  std::uint64_t seed) {
    arch.validate();
    Mlp net;
    net.arch_ = arch;
    Rng rng(Rng::derive(seed, 0));
    auto make_dense = [&rng](int out, int in, Activation act) {
      Dense d;
      d.W.resize(out, in);
      d.b = Vector::Zero(out);
      d.act = act;
      const double limit = std::sqrt(6.0 / in);
      for (int j = 0; j < in; ++j)
        for (int i = 0; i < out; ++i)
          d.W(i, j) = static_cast<Scalar>(rng.uniform(-limit, limit));
      return d;
    };
    int in = arch.input_dim;
    for (int i = 0; i < arch.shared_layers(); ++i) {
      net.shared_.push_back(make_dense(arch.hidden_units, in, Activation::kRelu));
      in = arch.hidden_units;
    }
    int t1_in = in;
    for (int i = 0; i < arch.task_hidden_layers(); ++i) {
      net.task1_.push_back(make_dense(arch.hidden_units, t1_in, Activation::kRelu));
      t1_in = arch.hidden_units;
    }
    net.task1_.push_back(make_dense(arch.output_dim, t1_in, primary_act));
    if (arch.multi_task()) {
      int t2_in = in;
      for (int i = 0; i < arch.task_hidden_layers(); ++i) {
        net.task2_.push_back(make_dense(arch.hidden_units, t2_in, Activation::kRelu));
        t2_in = arch.hidden_units;
      }
      net.task2_.push_back(make_dense(arch.output_dim, t2_in, Activation::kSigmoid));
    }
    net.norm_mean_ = Vector::Zero(arch.input_dim);
    net.norm_istd_ = Vector::Ones(arch.input_dim);
    return net;
  }

  // Input standardization applied before the first layer; `std` entries <= 0
  // are treated as 1 (constant feature dimensions).
  void set_normalization(const Eigen::VectorXd& mean, const Eigen::VectorXd& stdev) {
    if (mean.size() != arch_.input_dim || stdev.size() != arch_.input_dim)
      throw std::invalid_argument("Mlp::set_normalization: dimension mismatch");
    norm_mean_ = mean.cast<Scalar>();
    norm_istd_.resize(stdev.size());
    for (Eigen::Index i = 0; i < stdev.size(); ++i)
      norm_istd_[i] = stdev[i] > 0 ? static_cast<Scalar>(1.0 / stdev[i]) : Scalar(1);
  }

  Matrix normalize(const Matrix& raw) const {
    if (raw.rows() != arch_.input_dim)
      throw std::invalid_argument("Mlp: input has " + std::to_string(raw.rows()) +
                                  " rows, expected " + std::to_string(arch_.input_dim));
    return ((raw.colwise() - norm_mean_).array().colwise() * norm_istd_.array())
        .matrix();
  }

  Trace forward_trace(const Matrix& raw) const {
    Trace tr;
    tr.x0 = normalize(raw);
    Matrix a = tr.x0;
    for (const Dense& d : shared_) {
      a = activate(dense_pre(d, a), d.act);
      tr.shared.push_back(a);
    }
    Matrix t1 = a;
    for (const Dense& d : task1_) {
      t1 = activate(dense_pre(d, t1), d.act);
      tr.task1.push_back(t1);
    }
    if (!task2_.empty()) {
      Matrix t2 = a;
      for (const Dense& d : task2_) {
        t2 = activate(dense_pre(d, t2), d.act);
        tr.task2.push_back(t2);
      }
    }
    return tr;
  }

  // Primary-head prediction for raw (unnormalized) inputs, one column per frame.
  Matrix forward(const Matrix& raw) const { return forward_trace(raw).task1.back(); }

  // Both heads; the secondary matrix is empty for single-task layouts.
  std::pair<Matrix, Matrix> forward_both(const Matrix& raw) const {
    Trace tr = forward_trace(raw);
    Matrix second;
    if (!tr.task2.empty()) second = tr.task2.back();
    return {tr.task1.back(), second};
  }

  // Backpropagates the configured objective.  `target2` must be non-null for
  // multi-task losses on multi-task layouts and is ignored otherwise.
  Grads backward(const Trace& tr, const Matrix& target1, const Matrix* target2,
                 const LossSpec& loss) const {
    loss.validate();
    const bool multi = loss.multi_task();
    if (multi && task2_.empty())
      throw std::invalid_argument("Mlp::backward: multi-task loss on a single-task layout");
    if (multi && (target2 == nullptr || target2->size() == 0))
      throw std::invalid_argument("Mlp::backward: multi-task loss needs a secondary target");
    const Matrix& p1 = tr.task1.back();
    if (p1.rows() != target1.rows() || p1.cols() != target1.cols())
      throw std::invalid_argument("Mlp::backward: primary target shape mismatch");

    Grads g;
    g.loss1 = loss_mse<Scalar>(p1, target1);
    const double w1 = loss.kind == LossSpec::Kind::kSingle ? 1.0
                      : loss.kind == LossSpec::Kind::kMultiFixed
                          ? loss.lambda1
                          : std::exp(-static_cast<double>(s1_));
    const double inv_count = 1.0 / static_cast<double>(p1.size());
    // d(total)/d(pre-activation) at the primary head: the MSE term is
    // 2 (p - t) / N, times the sigmoid Jacobian when the head is bounded.
    Matrix dz1 = (p1 - target1) * static_cast<Scalar>(2.0 * inv_count * w1);
    if (task1_.back().act == Activation::kSigmoid)
      dz1 = dz1.cwiseProduct(act_derivative(p1, Activation::kSigmoid));

    const Matrix& shared_top = tr.shared.back();
    Matrix d_shared = Matrix::Zero(shared_top.rows(), shared_top.cols());
    walk_branch(task1_, tr.task1, shared_top, std::move(dz1), &g.task1, &d_shared);

    if (multi) {
      const Matrix& p2 = tr.task2.back();
      if (p2.rows() != target2->rows() || p2.cols() != target2->cols())
        throw std::invalid_argument("Mlp::backward: secondary target shape mismatch");
      g.loss2 = loss_bce<Scalar>(p2, *target2);
      const double w2 = loss.kind == LossSpec::Kind::kMultiFixed
                            ? loss.lambda2
                            : std::exp(-static_cast<double>(s2_));
      // Sigmoid + cross-entropy collapse: d(loss2)/d(pre) = (p - t) / N.
      Matrix dz2 = (p2 - *target2) * static_cast<Scalar>(inv_count * w2);
      walk_branch(task2_, tr.task2, shared_top, std::move(dz2), &g.task2, &d_shared);
    }

    Matrix dz_shared =
        d_shared.cwiseProduct(act_derivative(shared_top, shared_.back().act));
    walk_branch(shared_, tr.shared, tr.x0, std::move(dz_shared), &g.shared, nullptr);

    switch (loss.kind) {
      case LossSpec::Kind::kSingle:
        g.total = g.loss1;
        break;
      case LossSpec::Kind::kMultiFixed:
        g.total = loss_multitask_fixed(g.loss1, g.loss2, loss.lambda1, loss.lambda2);
        break;
      case LossSpec::Kind::kMultiAdaptive:
        g.total = loss_multitask_adaptive(g.loss1, g.loss2,
                                          static_cast<double>(s1_),
                                          static_cast<double>(s2_));
        g.s1 = static_cast<Scalar>(-std::exp(-static_cast<double>(s1_)) * g.loss1 + 0.5);
        g.s2 = static_cast<Scalar>(-std::exp(-static_cast<double>(s2_)) * g.loss2 + 0.5);
        break;
    }
    return g;
  }

  // The combined objective without gradients (used by validation).
  double objective(const Matrix& raw, const Matrix& target1, const Matrix* target2,
                   const LossSpec& loss) const {
    auto [p1, p2] = forward_both(raw);
    const double l1 = loss_mse<Scalar>(p1, target1);
    switch (loss.kind) {
      case LossSpec::Kind::kSingle:
        return l1;
      case LossSpec::Kind::kMultiFixed:
        return loss_multitask_fixed(l1, loss_bce<Scalar>(p2, *target2),
                                    loss.lambda1, loss.lambda2);
      case LossSpec::Kind::kMultiAdaptive:
        return loss_multitask_adaptive(l1, loss_bce<Scalar>(p2, *target2),
                                       static_cast<double>(s1_),
                                       static_cast<double>(s2_));
    }
    throw std::logic_error("objective: unreachable");
  }

  // Casts every parameter (not the metadata) to another scalar type.
  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out;
    out.arch_ = arch_;
    out.meta_ = meta_;
    out.feat_ = feat_;
    auto conv = [](const std::vector<Dense>& in) {
      std::vector<typename Mlp<Other>::Dense> res;
      for (const Dense& d : in)
        res.push_back({d.W.template cast<Other>(), d.b.template cast<Other>(), d.act});
      return res;
    };
    out.shared_ = conv(shared_);
    out.task1_ = conv(task1_);
    out.task2_ = conv(task2_);
    out.s1_ = static_cast<Other>(s1_);
    out.s2_ = static_cast<Other>(s2_);
    out.norm_mean_ = norm_mean_.template cast<Other>();
    out.norm_istd_ = norm_istd_.template cast<Other>();
    return out;
  }

  static Matrix activate(Matrix z, Activation act) {
    switch (act) {
      case Activation::kIdentity:
        return z;
      case Activation::kRelu:
        return z.cwiseMax(Scalar(0));
      case Activation::kSigmoid:
        return (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
    }
    throw std::logic_error("activate: unreachable");
  }

  // Derivative of the activation expressed through its post-activation value.
  static Matrix act_derivative(const Matrix& a, Activation act) {
    switch (act) {
      case Activation::kIdentity:
        return Matrix::Ones(a.rows(), a.cols());
      case Activation::kRelu:
        return (a.array() > Scalar(0)).template cast<Scalar>().matrix();
      case Activation::kSigmoid:
        return (a.array() * (Scalar(1) - a.array())).matrix();
    }
    throw std::logic_error("act_derivative: unreachable");
  }

  const Architecture& arch() const { return arch_; }

  // Parameters and bookkeeping; public by design (see header comment).
  Architecture arch_;
  std::vector<Dense> shared_, task1_, task2_;
  Scalar s1_ = 0, s2_ = 0;  // log task variances for the adaptive objective
  Vector norm_mean_, norm_istd_;
  TrainMeta meta_;
  FeatureConfig feat_;

 private:
  static Matrix dense_pre(const Dense& d, const Matrix& a) {
    Matrix z = d.W * a;
    z.colwise() += d.b;
    return z;
  }

  // Backpropagates `dz` (gradient at the top layer's pre-activation) down a
  // stack of layers, filling gradients; adds the gradient w.r.t. the branch
  // input into *d_input when given.
  static void walk_branch(const std::vector<Dense>& layers,
                          const std::vector<Matrix>& acts, const Matrix& input,
                          Matrix dz, BranchGrads* out, Matrix* d_input) {
    out->W.resize(layers.size());
    out->b.resize(layers.size());
    for (int j = static_cast<int>(layers.size()) - 1; j >= 0; --j) {
      const Matrix& a_in = j == 0 ? input : acts[j - 1];
      out->W[j].noalias() = dz * a_in.transpose();
      out->b[j] = dz.rowwise().sum();
      if (j > 0) {
        Matrix da = layers[j].W.transpose() * dz;
        dz = da.cwiseProduct(act_derivative(acts[j - 1], layers[j - 1].act));
      } else if (d_input != nullptr) {
        d_input->noalias() += layers[0].W.transpose() * dz;
      }
    }
  }
};

// Output activation of the primary head for a given target.
Activation primary_activation(TargetKind kind);

const char* activation_name(Activation a);

}  // namespace demist

#endif  // DEMIST_NET_MLP_H_
