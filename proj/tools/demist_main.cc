// tools/demist_main.cc
//
// The `demist` command-line front end.  Subcommands: synthesize, train,
// enhance, evaluate, experiment.  Exit codes: 0 success, 1 usage error,
// 2 data error (unreadable/ill-formed files, mismatched datasets),
// 3 numeric failure (e.g. every training cell diverged).

#include <CLI11.hpp>
#include <iostream>

#include "cli/commands.h"
#include "cli/experiment.h"
#include "util/errors.h"

using namespace demist;

int main(int argc, char** argv) {
  CLI::App app{"demist: single-channel speech dereverberation and denoising"};
  app.require_subcommand(1);

  SynthesizeOptions sopt;
  CLI::App* synth = app.add_subcommand(
      "synthesize", "Render a dataset manifest into per-scene WAVs plus an index");
  synth->add_option("manifest", sopt.manifest_path, "dataset manifest file")->required();
  synth->add_option("out_dir", sopt.out_dir, "output scene directory")->required();
  synth->add_option("--seed", sopt.seed, "override the manifest seed");
  synth->add_option("--jobs", sopt.jobs, "parallel scene workers");

  TrainOptions topt;
  CLI::App* train =
      app.add_subcommand("train", "Train an enhancement model on a synthesized scene directory");
  train->add_option("scene_dir", topt.scene_dir, "directory from `demist synthesize`")
      ->required();
  train->add_option("model_out", topt.model_path, "output model file")->required();
  train->add_option("--target", topt.target, "training target: mag|gain|psd|sir")
      ->capture_default_str();
  train->add_option("--loss", topt.loss, "single|multi-fixed|multi-adaptive")
      ->capture_default_str();
  train->add_option("--lambda1", topt.lambda1, "primary weight (multi-fixed loss)")
      ->capture_default_str();
  train->add_option("--lambda2", topt.lambda2, "secondary weight (multi-fixed loss)")
      ->capture_default_str();
  train->add_option("--seed", topt.seed, "sweep master seed")->capture_default_str();
  train->add_option("--shapes", topt.shapes,
                    "network shapes to sweep (a-e; default ab single, cde multi)");
  train->add_option("--units", topt.hidden_units, "hidden-layer widths to sweep")
      ->delimiter(',');
  train->add_option("--learning-rates", topt.learning_rates, "learning rates to sweep")
      ->delimiter(',');
  train->add_option("--weight-decays", topt.weight_decays, "weight decays to sweep")
      ->delimiter(',');
  train->add_option("--epochs", topt.epochs, "epochs per grid cell")->capture_default_str();
  train->add_option("--batch-size", topt.batch_size, "frames per mini-batch")
      ->capture_default_str();
  train->add_flag("--select-on-objective", topt.select_on_objective,
                  "select on the full training objective instead of primary MSE");
  train->add_option("--jobs", topt.jobs, "parallel workers for feature extraction");

  EnhanceOptions eopt;
  CLI::App* enhance = app.add_subcommand("enhance", "Enhance WAV files with a trained model");
  enhance->add_option("model", eopt.model_path, "model file from `demist train`")->required();
  enhance->add_option("out_dir", eopt.out_dir, "output directory")->required();
  enhance->add_option("inputs", eopt.inputs, "input WAV files (mono, model's sample rate)")
      ->required();
  enhance->add_option("--beta", eopt.beta, "decision-directed smoothing (psd models)")
      ->capture_default_str();
  enhance->add_option("--gain-floor", eopt.gain_floor, "lower bound on gain masks, in [0,1)")
      ->capture_default_str();
  enhance->add_option("--jobs", eopt.jobs, "parallel workers");

  EvaluateOptions vopt;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score enhanced files against their scenes and write a report");
  evaluate->add_option("scene_dir", vopt.scene_dir, "directory from `demist synthesize`")
      ->required();
  evaluate->add_option("enhanced_dir", vopt.enhanced_dir, "directory from `demist enhance`")
      ->required();
  evaluate->add_option("report_out", vopt.report_path, "output report file")->required();
  evaluate->add_option("--split", vopt.split, "train|validation|test|all")
      ->capture_default_str();
  evaluate->add_option("--jobs", vopt.jobs, "parallel workers");

  ExperimentOptions xopt;
  CLI::App* experiment = app.add_subcommand(
      "experiment", "Run a full synthesize/train/enhance/evaluate comparison from a config");
  experiment->add_option("config", xopt.config_path, "experiment config file")->required();
  experiment->add_option("--out", xopt.out_dir, "override the configured output directory");
  experiment->add_option("--seed", xopt.seed, "override the configured seed");
  experiment->add_option("--jobs", xopt.jobs, "parallel workers");
  experiment->add_flag("--dry-run", xopt.dry_run, "print the plan and exit without running");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // help/version exit 0; every parse error is a usage error
  }

  try {
    if (*synth) cmd_synthesize(sopt, std::cout);
    else if (*train) cmd_train(topt, std::cout);
    else if (*enhance) cmd_enhance(eopt, std::cout);
    else if (*evaluate) cmd_evaluate(vopt, std::cout);
    else if (*experiment) cmd_experiment(xopt, std::cout);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 70;
  }
}
