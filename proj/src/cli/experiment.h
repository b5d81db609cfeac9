// cli/experiment.h
//
// Full-experiment driver: one config file describes a dataset, a list of
// methods (single-task targets and multi-task combinations), the training
// sweep, and the enhancement settings; the driver runs
// synthesize -> train -> enhance -> evaluate for every method and prints a
// comparison table (rows: measures, columns: methods).
//
//   [experiment]
//   out_dir = runs/demo          # or --out
//   seed = 42                    # re-seeds dataset + training; or --seed
//   manifest = data.manifest     # optional; omit to inline the dataset
//   [dataset] / [speech] / [noise] / [rir] / [mix]   # inline manifest form
//   [methods]
//   single = mag gain psd sir
//   multi = gain:multi-adaptive  # secondary head is always speech presence
//   lambda1 = 1                  # multi-fixed loss weights
//   lambda2 = 1
//   [train]
//   shapes = ab                  # single-task shapes; multi-task: shapes_multi
//   units = 500 1000 1500
//   learning_rates = 1e-3 1e-4
//   weight_decays = 0 1e-3
//   epochs = 200
//   batch_size = 128
//   select_on = primary          # or objective
//   [enhance]
//   beta = 0.98
//   gain_floor = 0
//
// Everything is deterministic in the seed: rerunning the same config with
// the same seed reproduces every model file and report byte for byte.

#ifndef DEMIST_CLI_EXPERIMENT_H_
#define DEMIST_CLI_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace demist {

struct ExperimentOptions {
  std::string config_path;
  std::string out_dir;           // overrides [experiment] out_dir
  std::optional<uint64_t> seed;  // overrides [experiment] seed
  int jobs = 1;
  bool dry_run = false;  // print the plan, run nothing
};

void cmd_experiment(const ExperimentOptions& opt, std::ostream& log);

}  // namespace demist

#endif  // DEMIST_CLI_EXPERIMENT_H_
