// net/optimizer.h
//
// Adam with decoupled-style L2: the weight-decay term is added to the
// gradient of weight matrices only (never biases, never the log task
// variances) before the moment updates.  Moment estimates mirror the model's
// parameter layout and are bias-corrected in the usual way.

#ifndef DEMIST_NET_OPTIMIZER_H_
#define DEMIST_NET_OPTIMIZER_H_

#include <cmath>
#include <stdexcept>
#include <vector>

#include "net/mlp.h"

namespace demist {

struct AdamConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
class Adam {
 public:
  using Matrix = typename Mlp<Scalar>::Matrix;
  using Vector = typename Mlp<Scalar>::Vector;

  Adam(const Mlp<Scalar>& model, const AdamConfig& cfg) : cfg_(cfg) {
    if (cfg.learning_rate <= 0) throw std::invalid_argument("Adam: learning rate must be positive");
    if (cfg.weight_decay < 0) throw std::invalid_argument("Adam: negative weight decay");
    init_branch(model.shared_, &shared_);
    init_branch(model.task1_, &task1_);
    init_branch(model.task2_, &task2_);
  }

  void step(Mlp<Scalar>& model, const typename Mlp<Scalar>::Grads& g) {
    ++t_;
    bc1_ = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    bc2_ = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    step_branch(model.shared_, g.shared, &shared_);
    step_branch(model.task1_, g.task1, &task1_);
    step_branch(model.task2_, g.task2, &task2_);
    if (model.arch_.multi_task()) {
      step_scalar(&model.s1_, static_cast<double>(g.s1), &ms1_, &vs1_);
      step_scalar(&model.s2_, static_cast<double>(g.s2), &ms2_, &vs2_);
    }
  }

  long steps() const { return t_; }

 private:
  struct DenseState {
    Matrix mW, vW;
    Vector mb, vb;
  };

  void init_branch(const std::vector<typename Mlp<Scalar>::Dense>& layers,
                   std::vector<DenseState>* state) {
    state->clear();
    for (const auto& d : layers) {
      DenseState s;
      s.mW = Matrix::Zero(d.W.rows(), d.W.cols());
      s.vW = Matrix::Zero(d.W.rows(), d.W.cols());
      s.mb = Vector::Zero(d.b.size());
      s.vb = Vector::Zero(d.b.size());
      state->push_back(std::move(s));
    }
  }

  void step_branch(std::vector<typename Mlp<Scalar>::Dense>& layers,
                   const typename Mlp<Scalar>::BranchGrads& g,
                   std::vector<DenseState>* state) {
    if (g.W.size() != layers.size())
      throw std::invalid_argument("Adam::step: gradient layout mismatch");
    for (size_t i = 0; i < layers.size(); ++i) {
      update(&layers[i].W, g.W[i], &(*state)[i].mW, &(*state)[i].vW,
             /*decay=*/true);
      update(&layers[i].b, g.b[i], &(*state)[i].mb, &(*state)[i].vb,
             /*decay=*/false);
    }
  }

  template <typename Mat>
  void update(Mat* param, const Mat& grad, Mat* m, Mat* v, bool decay) {
    const Scalar b1 = static_cast<Scalar>(cfg_.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg_.beta2);
    Mat g = grad;
    if (decay && cfg_.weight_decay > 0)
      g += *param * static_cast<Scalar>(cfg_.weight_decay);
    *m = b1 * *m + (Scalar(1) - b1) * g;
    v->array() = b2 * v->array() + (Scalar(1) - b2) * g.array().square();
    param->array() -= static_cast<Scalar>(cfg_.learning_rate) *
                      (m->array() / static_cast<Scalar>(bc1_)) /
                      ((v->array() / static_cast<Scalar>(bc2_)).sqrt() +
                       static_cast<Scalar>(cfg_.epsilon));
  }

  void step_scalar(Scalar* param, double grad, double* m, double* v) {
    *m = cfg_.beta1 * *m + (1.0 - cfg_.beta1) * grad;
    *v = cfg_.beta2 * *v + (1.0 - cfg_.beta2) * grad * grad;
    *param -= static_cast<Scalar>(cfg_.learning_rate * (*m / bc1_) /
                                  (std::sqrt(*v / bc2_) + cfg_.epsilon));
  }

  AdamConfig cfg_;
  long t_ = 0;
  double bc1_ = 1.0, bc2_ = 1.0;
  std::vector<DenseState> shared_, task1_, task2_;
  double ms1_ = 0, vs1_ = 0, ms2_ = 0, vs2_ = 0;
};

}  // namespace demist

#endif  // DEMIST_NET_OPTIMIZER_H_
