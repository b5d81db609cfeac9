// net/train.h
//
// Mini-batch training over spectrogram frames and the hyper-parameter grid
// search that picks the final model.
//
// A FrameDataset keeps one float matrix per utterance (K bins x L frames for
// inputs and targets) and materializes the context-stacked input columns
// only when a batch is gathered, which keeps memory at K x L instead of
// K(2T+1) x L.  Shuffling, initialization, and therefore the entire sweep
// are deterministic functions of the configured seed.

#ifndef DEMIST_NET_TRAIN_H_
#define DEMIST_NET_TRAIN_H_

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "feat/features.h"
#include "net/mlp.h"
#include "net/optimizer.h"
#include "scene/mix.h"

namespace demist {

class FrameDataset {
 public:
  explicit FrameDataset(int context) : context_(context) {}

  // Computes the input track and target(s) for one scene and appends them.
  void add_scene(const SceneComponents& scene, TargetKind primary,
                 bool with_secondary, const FeatureConfig& cfg);

  // Adds precomputed tracks (inputs/targets as K x L float matrices;
  // secondary may be empty).
  void add_tracks(Eigen::MatrixXf input, Eigen::MatrixXf primary,
                  Eigen::MatrixXf secondary, const std::string& id);

  long num_frames() const { return static_cast<long>(frames_.size()); }
  int num_bins() const { return num_bins_; }
  int context() const { return context_; }
  int input_dim() const { return num_bins_ * (2 * context_ + 1); }
  bool has_secondary() const { return has_secondary_; }
  size_t num_utterances() const { return utts_.size(); }

  // Gathers frames order[begin..end) into column-per-frame batch matrices.
  // Matrices are resized as needed; secondary is only filled when the
  // dataset carries secondary targets and `secondary` is non-null.
  void gather(const std::vector<long>& order, size_t begin, size_t end,
              Eigen::MatrixXf* input, Eigen::MatrixXf* primary,
              Eigen::MatrixXf* secondary) const;

  // Mean and standard deviation of every stacked input dimension, over all
  // frames, accumulated in double.
  void input_stats(Eigen::VectorXd* mean, Eigen::VectorXd* stdev) const;

 private:
  struct Utterance {
    Eigen::MatrixXf input;      // K x L
    Eigen::MatrixXf primary;    // K x L
    Eigen::MatrixXf secondary;  // K x L or 0 x 0
    std::string id;
  };

  int context_ = 0;
  int num_bins_ = 0;
  bool has_secondary_ = false;
  std::vector<Utterance> utts_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> frames_;  // (utt, frame)
};

// One grid cell: a network shape plus hyper-parameters.
struct GridCell {
  char shape = 'a';
  int hidden_units = 0;
  double learning_rate = 0.0;
  double weight_decay = 0.0;
};

struct TrainConfig {
  TargetKind target = TargetKind::WienerGain;
  LossSpec loss;
  std::vector<char> shapes;                       // default depends on loss
  std::vector<int> hidden_units = {500, 1000, 1500};
  std::vector<double> learning_rates = {1e-3, 1e-4};
  std::vector<double> weight_decays = {0.0, 1e-3};
  int epochs = 200;
  int batch_size = 128;
  std::uint64_t seed = 0;
  // Validation score used for model selection: primary-task MSE by default,
  // or the full training objective when true.
  bool select_on_objective = false;
  std::ostream* log = nullptr;

  std::vector<char> effective_shapes() const;
  std::vector<GridCell> grid() const;
  void validate() const;
};

struct CellResult {
  GridCell cell;
  int best_epoch = -1;
  double best_val = std::numeric_limits<double>::infinity();
  bool diverged = false;
  std::string note;                 // why the cell was abandoned, if it was
  std::vector<double> train_loss;   // per completed epoch
  std::vector<double> val_loss;
};

struct TrainResult {
  Mlp<float> model;  // best snapshot across the whole grid
  std::vector<CellResult> cells;
  int best_cell = -1;
};

// Trains every grid cell for `epochs` epochs, tracking the best validation
// score seen at any (cell, epoch); the returned model is that snapshot.
// Cells whose loss turns non-finite are abandoned and recorded; if every
// cell diverges a NumericError is thrown.
TrainResult train_grid(const FrameDataset& train, const FrameDataset& val,
                       const TrainConfig& cfg, const FeatureConfig& feat);

// Validation score of `model` on `data` (primary MSE or full objective).
double validation_score(const Mlp<float>& model, const FrameDataset& data,
                        const LossSpec& loss, bool on_objective);

}  // namespace demist

#endif  // DEMIST_NET_TRAIN_H_
