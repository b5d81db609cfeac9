// cli/commands.h
//
// The four basic subcommands — synthesize, train, enhance, evaluate — as
// plain functions over option structs.  They throw UsageError / DataError /
// NumericError; the binary's main() maps those onto exit codes 1 / 2 / 3.
// The building blocks they share with the experiment driver (scene
// rendering, dataset loading, batch enhancement, batch evaluation) are
// exposed below the command functions.

#ifndef DEMIST_CLI_COMMANDS_H_
#define DEMIST_CLI_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "enhance/enhance.h"
#include "eval/metrics.h"
#include "net/train.h"
#include "scene/dataset.h"

namespace demist {

struct SynthesizeOptions {
  std::string manifest_path;
  std::string out_dir;
  std::optional<uint64_t> seed;  // overrides the manifest seed
  int jobs = 1;
};

struct TrainOptions {
  std::string scene_dir;
  std::string model_path;
  std::string target = "gain";  // mag|gain|psd|sir
  std::string loss = "single";  // single|multi-fixed|multi-adaptive
  double lambda1 = 1.0, lambda2 = 1.0;
  uint64_t seed = 42;
  // Grid overrides; empty means the built-in sweep.
  std::string shapes;
  std::vector<int> hidden_units;
  std::vector<double> learning_rates;
  std::vector<double> weight_decays;
  int epochs = 200;
  int batch_size = 128;
  bool select_on_objective = false;
  int jobs = 1;
};

struct EnhanceOptions {
  std::string model_path;
  std::string out_dir;
  std::vector<std::string> inputs;
  double beta = 0.98;
  double gain_floor = 0.0;
  int jobs = 1;
};

struct EvaluateOptions {
  std::string scene_dir;
  std::string enhanced_dir;
  std::string report_path;
  std::string split = "all";  // train|validation|test|all
  int jobs = 1;
};

void cmd_synthesize(const SynthesizeOptions& opt, std::ostream& log);
void cmd_train(const TrainOptions& opt, std::ostream& log);
void cmd_enhance(const EnhanceOptions& opt, std::ostream& log);
void cmd_evaluate(const EvaluateOptions& opt, std::ostream& log);

// ---- Shared building blocks ----

// The scene index file inside a dataset directory.
std::string scene_index_path(const std::string& scene_dir);

// Renders every planned scene to WAVs plus the index.  Shared audio is
// loaded up front; scene rendering then runs on `jobs` workers (outputs are
// per-scene files, so the result is identical for any worker count).
std::vector<SceneIndexRow> synthesize_scenes(const Manifest& m, const std::string& out_dir,
                                             int jobs, std::ostream& log);

// Loads the scenes of one split ("all" keeps every row) and computes input
// and target tracks on `jobs` workers, appending them in index order.
FrameDataset load_frame_dataset(const std::string& scene_dir,
                                const std::vector<SceneIndexRow>& rows, const std::string& split,
                                TargetKind primary, bool with_secondary, const FeatureConfig& fc,
                                int jobs);

// Runs the training sweep over the train/validation splits of a scene
// directory and writes the best model to model_path and the per-epoch grid
// log next to it (<model_path>.log).
TrainResult train_from_scenes(const std::string& scene_dir,
                              const std::vector<SceneIndexRow>& rows, const TrainConfig& cfg,
                              const FeatureConfig& fc, const std::string& model_path, int jobs,
                              std::ostream& log);

// Enhances each input WAV into out_dir under its own basename; returns how
// many samples clipped during 16-bit quantization across all outputs.
long enhance_files(const Mlp<float>& model, const std::vector<std::string>& inputs,
                   const std::string& out_dir, const EnhanceConfig& cfg, int jobs,
                   std::ostream& log);

// Scores enhanced_dir/<id>_y.wav against each listed scene and writes the
// per-utterance report; returns the aggregate means.
EvalSummary evaluate_scenes(const std::string& scene_dir,
                            const std::vector<SceneIndexRow>& rows,
                            const std::string& enhanced_dir, const std::string& report_path,
                            int jobs, std::ostream& log);

}  // namespace demist

#endif  // DEMIST_CLI_COMMANDS_H_
