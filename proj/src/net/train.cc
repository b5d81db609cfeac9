// net/train.cc

#include "net/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "util/errors.h"
#include "util/rng.h"

namespace demist {

void FrameDataset::add_scene(const SceneComponents& scene, TargetKind primary,
                             bool with_secondary, const FeatureConfig& cfg) {
  if (context_ != cfg.context)
    throw std::invalid_argument("FrameDataset::add_scene: context mismatch");
  Eigen::MatrixXf input = input_track(scene.y, primary, cfg).cast<float>();
  Eigen::MatrixXf target = compute_targets(scene, primary, cfg).cast<float>();
  Eigen::MatrixXf secondary;
  if (with_secondary)
    secondary = compute_targets(scene, TargetKind::Spp, cfg).cast<float>();
  add_tracks(std::move(input), std::move(target), std::move(secondary), scene.id);
}

void FrameDataset::add_tracks(Eigen::MatrixXf input, Eigen::MatrixXf primary,
                              Eigen::MatrixXf secondary, const std::string& id) {
  if (input.rows() == 0 || input.cols() == 0)
    throw std::invalid_argument("FrameDataset: empty input track for " + id);
  if (primary.rows() != input.rows() || primary.cols() != input.cols())
    throw std::invalid_argument("FrameDataset: target shape mismatch for " + id);
  const bool with_secondary = secondary.size() != 0;
  if (with_secondary && (secondary.rows() != input.rows() ||
                         secondary.cols() != input.cols()))
    throw std::invalid_argument("FrameDataset: secondary shape mismatch for " + id);
  if (utts_.empty()) {
    num_bins_ = static_cast<int>(input.rows());
    has_secondary_ = with_secondary;
  } else {
    if (static_cast<int>(input.rows()) != num_bins_)
      throw std::invalid_argument("FrameDataset: bin count mismatch for " + id);
    if (with_secondary != has_secondary_)
      throw std::invalid_argument(
          "FrameDataset: inconsistent secondary targets for " + id);
  }
  const std::uint32_t u = static_cast<std::uint32_t>(utts_.size());
  for (std::uint32_t l = 0; l < static_cast<std::uint32_t>(input.cols()); ++l)
    frames_.emplace_back(u, l);
  utts_.push_back({std::move(input), std::move(primary), std::move(secondary), id});
}

void FrameDataset::gather(const std::vector<long>& order, size_t begin,
                          size_t end, Eigen::MatrixXf* input,
                          Eigen::MatrixXf* primary,
                          Eigen::MatrixXf* secondary) const {
  if (begin > end || end > order.size())
    throw std::invalid_argument("FrameDataset::gather: bad range");
  const int K = num_bins_;
  const int span = 2 * context_ + 1;
  const Eigen::Index batch = static_cast<Eigen::Index>(end - begin);
  input->resize(static_cast<Eigen::Index>(K) * span, batch);
  primary->resize(K, batch);
  const bool want_secondary = secondary != nullptr && has_secondary_;
  if (want_secondary) secondary->resize(K, batch);
  for (size_t j = begin; j < end; ++j) {
    const long idx = order[j];
    if (idx < 0 || idx >= num_frames())
      throw std::invalid_argument("FrameDataset::gather: frame index out of range");
    const auto [u, l] = frames_[static_cast<size_t>(idx)];
    const Utterance& utt = utts_[u];
    const int L = static_cast<int>(utt.input.cols());
    const Eigen::Index col = static_cast<Eigen::Index>(j - begin);
    for (int d = -context_; d <= context_; ++d) {
      const int src = std::clamp(static_cast<int>(l) + d, 0, L - 1);
      input->col(col).segment(static_cast<Eigen::Index>(K) * (d + context_), K) =
          utt.input.col(src);
    }
    primary->col(col) = utt.primary.col(l);
    if (want_secondary) secondary->col(col) = utt.secondary.col(l);
  }
}

void FrameDataset::input_stats(Eigen::VectorXd* mean, Eigen::VectorXd* stdev) const {
  if (frames_.empty()) throw std::invalid_argument("FrameDataset: no frames");
  const int K = num_bins_;
  const int span = 2 * context_ + 1;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K) * span);
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(sum.size());
  for (const Utterance& utt : utts_) {
    const int L = static_cast<int>(utt.input.cols());
    for (int l = 0; l < L; ++l) {
      for (int d = -context_; d <= context_; ++d) {
        const int src = std::clamp(l + d, 0, L - 1);
        const auto col = utt.input.col(src).cast<double>();
        sum.segment(static_cast<Eigen::Index>(K) * (d + context_), K) += col;
        sumsq.segment(static_cast<Eigen::Index>(K) * (d + context_), K) +=
            col.cwiseProduct(col);
      }
    }
  }
  const double n = static_cast<double>(num_frames());
  *mean = sum / n;
  *stdev = (sumsq / n - mean->cwiseProduct(*mean)).cwiseMax(0.0).cwiseSqrt();
}

std::vector<char> TrainConfig::effective_shapes() const {
  if (!shapes.empty()) return shapes;
  return loss.multi_task() ? std::vector<char>{'c', 'd', 'e'}
                           : std::vector<char>{'a', 'b'};
}

std::vector<GridCell> TrainConfig::grid() const {
  std::vector<GridCell> cells;
  for (char shape : effective_shapes())
    for (int units : hidden_units)
      for (double lr : learning_rates)
        for (double wd : weight_decays)
          cells.push_back({shape, units, lr, wd});
  return cells;
}

void TrainConfig::validate() const {
  loss.validate();
  if (target == TargetKind::Spp)
    throw UsageError("speech presence is a secondary target only");
  if (epochs <= 0 || batch_size <= 0)
    throw UsageError("epochs and batch size must be positive");
  if (hidden_units.empty() || learning_rates.empty() || weight_decays.empty())
    throw UsageError("empty hyper-parameter grid");
  for (int u : hidden_units)
    if (u <= 0) throw UsageError("hidden units must be positive");
  for (double lr : learning_rates)
    if (lr <= 0) throw UsageError("learning rates must be positive");
  for (double wd : weight_decays)
    if (wd < 0) throw UsageError("weight decay must be non-negative");
  for (char shape : effective_shapes()) {
    Architecture probe{shape, 1, 1, 1};
    probe.validate();
    if (probe.multi_task() != loss.multi_task())
      throw UsageError(std::string("network shape '") + shape +
                       (loss.multi_task() ? "' is single-task but the loss is multi-task"
                                          : "' is multi-task but the loss is single-task"));
  }
}

namespace {

// Accumulates validation sums in chunks to bound peak memory.
struct ValSums {
  double sse = 0.0;  // primary squared error
  double bce = 0.0;  // secondary cross-entropy sum
  double count = 0.0;
};

ValSums validation_sums(const Mlp<float>& model, const FrameDataset& data,
                        bool need_secondary) {
  static constexpr size_t kChunk = 4096;
  std::vector<long> order(static_cast<size_t>(data.num_frames()));
  std::iota(order.begin(), order.end(), 0L);
  Eigen::MatrixXf in, t1, t2;
  ValSums sums;
  for (size_t beg = 0; beg < order.size(); beg += kChunk) {
    const size_t end = std::min(order.size(), beg + kChunk);
    data.gather(order, beg, end, &in, &t1, need_secondary ? &t2 : nullptr);
    auto [p1, p2] = model.forward_both(in);
    const double n = static_cast<double>(p1.size());
    sums.sse += loss_mse<float>(p1, t1) * n;
    if (need_secondary) sums.bce += loss_bce<float>(p2, t2) * n;
    sums.count += n;
  }
  return sums;
}

}  // namespace

double validation_score(const Mlp<float>& model, const FrameDataset& data,
                        const LossSpec& loss, bool on_objective) {
  const bool multi = loss.multi_task();
  if (multi && !data.has_secondary())
    throw std::invalid_argument("validation_score: dataset lacks secondary targets");
  ValSums sums = validation_sums(model, data, multi && on_objective);
  const double l1 = sums.sse / sums.count;
  if (!on_objective || loss.kind == LossSpec::Kind::kSingle) return l1;
  const double l2 = sums.bce / sums.count;
  if (loss.kind == LossSpec::Kind::kMultiFixed)
    return loss_multitask_fixed(l1, l2, loss.lambda1, loss.lambda2);
  return loss_multitask_adaptive(l1, l2, static_cast<double>(model.s1_),
                                 static_cast<double>(model.s2_));
}

TrainResult train_grid(const FrameDataset& train, const FrameDataset& val,
                       const TrainConfig& cfg, const FeatureConfig& feat) {
  cfg.validate();
  if (train.num_frames() == 0 || val.num_frames() == 0)
    throw DataError("training requires non-empty train and validation sets");
  if (train.input_dim() != val.input_dim() || train.num_bins() != val.num_bins())
    throw DataError("train/validation feature dimensions disagree");
  const bool multi = cfg.loss.multi_task();
  if (multi && (!train.has_secondary() || !val.has_secondary()))
    throw DataError("multi-task training requires secondary targets in both splits");

  Eigen::VectorXd mean, stdev;
  train.input_stats(&mean, &stdev);

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  const std::vector<GridCell> cells = cfg.grid();
  const long n = train.num_frames();

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    const GridCell& cell = cells[ci];
    const std::uint64_t cell_seed = Rng::derive(cfg.seed, ci);
    Architecture arch{cell.shape, train.input_dim(), train.num_bins(),
                      cell.hidden_units};
    Mlp<float> model =
        Mlp<float>::init(arch, primary_activation(cfg.target), cell_seed);
    model.set_normalization(mean, stdev);

    AdamConfig adam_cfg;
    adam_cfg.learning_rate = cell.learning_rate;
    adam_cfg.weight_decay = cell.weight_decay;
    Adam<float> adam(model, adam_cfg);
    Rng shuffle_rng(Rng::derive(cell_seed, 1));
    std::vector<long> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0L);

    CellResult cr;
    cr.cell = cell;
    Eigen::MatrixXf in, t1, t2;
    for (int epoch = 0; epoch < cfg.epochs && !cr.diverged; ++epoch) {
      shuffle_rng.shuffle(order);
      double loss_sum = 0.0;
      const size_t step = static_cast<size_t>(cfg.batch_size);
      for (size_t beg = 0; beg < order.size(); beg += step) {
        const size_t end =
            std::min(order.size(), beg + static_cast<size_t>(cfg.batch_size));
        train.gather(order, beg, end, &in, &t1, multi ? &t2 : nullptr);
        auto trace = model.forward_trace(in);
        auto grads = model.backward(trace, t1, multi ? &t2 : nullptr, cfg.loss);
        if (!std::isfinite(grads.total)) {
          cr.diverged = true;
          char buf[128];
          std::snprintf(buf, sizeof buf,
                        "non-finite loss at epoch %d, frame offset %zu", epoch,
                        beg);
          cr.note = buf;
          break;
        }
        adam.step(model, grads);
        loss_sum += grads.total * static_cast<double>(end - beg);
      }
      if (cr.diverged) break;
      const double train_loss = loss_sum / static_cast<double>(n);
      const double score =
          validation_score(model, val, cfg.loss, cfg.select_on_objective);
      if (!std::isfinite(train_loss) || !std::isfinite(score)) {
        cr.diverged = true;
        cr.note = "non-finite validation score at epoch " + std::to_string(epoch);
        break;
      }
      cr.train_loss.push_back(train_loss);
      cr.val_loss.push_back(score);
      const bool cell_best = score < cr.best_val;
      if (cell_best) {
        cr.best_val = score;
        cr.best_epoch = epoch;
      }
      if (score < best_val) {
        best_val = score;
        result.best_cell = static_cast<int>(ci);
        result.model = model;
        result.model.meta_.target = cfg.target;
        result.model.meta_.loss = cfg.loss;
        result.model.meta_.seed = cfg.seed;
        result.model.meta_.best_epoch = epoch;
        result.model.meta_.val_loss = score;
        result.model.meta_.learning_rate = cell.learning_rate;
        result.model.meta_.weight_decay = cell.weight_decay;
        result.model.meta_.epochs = cfg.epochs;
        result.model.feat_ = feat;
      }
      if (cfg.log != nullptr) {
        char line[256];
        std::snprintf(line, sizeof line,
                      "[train] cell %zu/%zu shape=%c units=%d lr=%g wd=%g "
                      "epoch %d/%d train=%.6g val=%.6g%s",
                      ci + 1, cells.size(), cell.shape, cell.hidden_units,
                      cell.learning_rate, cell.weight_decay, epoch + 1,
                      cfg.epochs, train_loss, score, cell_best ? " *" : "");
        (*cfg.log) << line << '\n';
      }
    }
    if (cr.diverged && cfg.log != nullptr)
      (*cfg.log) << "[train] cell " << ci + 1 << "/" << cells.size()
                 << " abandoned: " << cr.note << '\n';
    result.cells.push_back(std::move(cr));
  }

  if (result.best_cell < 0)
    throw NumericError("every grid cell diverged; no usable model");
  return result;
}

}  // namespace demist
