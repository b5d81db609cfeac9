// cli/experiment.cc

#include "cli/experiment.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "cli/commands.h"
#include "util/errors.h"

namespace fs = std::filesystem;

namespace demist {

namespace {

struct Method {
  TargetKind target = TargetKind::WienerGain;
  LossSpec loss;
  std::string label;  // table column, e.g. "gain" or "gain+spp:adaptive"
  std::string stem;   // file stem, e.g. "gain_spp_adaptive"
};

struct ExperimentSpec {
  Manifest manifest;
  uint64_t seed = 42;
  std::string out_dir;
  std::vector<Method> methods;
  std::vector<char> shapes_single, shapes_multi;
  std::vector<int> hidden_units;
  std::vector<double> learning_rates, weight_decays;
  int epochs = 200;
  int batch_size = 128;
  bool select_on_objective = false;
  EnhanceConfig enhance;
};

// Rethrows the toolkit's error types with the pipeline stage prepended, so
// a failure deep inside a sweep names the step that broke.
template <typename Fn>
void run_stage(const std::string& label, Fn&& fn) {
  try {
    fn();
  } catch (const UsageError& e) {
    throw UsageError("stage " + label + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + label + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("stage " + label + ": " + e.what());
  }
}

Method parse_single_method(const std::string& name) {
  Method m;
  m.target = parse_target_kind(name);
  if (m.target == TargetKind::Spp)
    throw UsageError("speech presence is a secondary target only");
  m.loss = LossSpec::parse("single", 1.0, 1.0);
  m.label = name;
  m.stem = name;
  return m;
}

Method parse_multi_method(const std::string& entry, double lambda1, double lambda2) {
  const auto colon = entry.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= entry.size())
    throw UsageError("multi method '" + entry +
                     "' must look like <target>:multi-fixed or <target>:multi-adaptive");
  const std::string target_name = entry.substr(0, colon);
  const std::string loss_name = entry.substr(colon + 1);
  Method m;
  m.target = parse_target_kind(target_name);
  if (m.target == TargetKind::Spp)
    throw UsageError("speech presence is a secondary target only");
  m.loss = LossSpec::parse(loss_name, lambda1, lambda2);
  if (!m.loss.multi_task())
    throw UsageError("multi method '" + entry + "' needs a multi-task loss");
  const std::string short_name =
      m.loss.kind == LossSpec::Kind::kMultiAdaptive ? "adaptive" : "fixed";
  m.label = target_name + "+spp:" + short_name;
  m.stem = target_name + "_spp_" + short_name;
  return m;
}

std::vector<char> parse_shapes(const std::string& s) {
  return std::vector<char>(s.begin(), s.end());
}

ExperimentSpec parse_experiment(const ExperimentOptions& opt) {
  const Config cfg = Config::parse_file(opt.config_path);
  const std::string base_dir = fs::path(opt.config_path).parent_path().string();

  ExperimentSpec spec;
  spec.seed = opt.seed.value_or(cfg.get_u64_or("experiment", "seed", 42));
  spec.out_dir = !opt.out_dir.empty() ? opt.out_dir : cfg.get_or("experiment", "out_dir", "");
  if (spec.out_dir.empty())
    throw UsageError("experiment needs an output directory ([experiment] out_dir or --out)");

  if (cfg.has("experiment", "manifest")) {
    fs::path mp(cfg.get("experiment", "manifest"));
    if (!mp.is_absolute() && !base_dir.empty()) mp = fs::path(base_dir) / mp;
    spec.manifest = Manifest::load(mp.lexically_normal().string(), spec.seed);
  } else if (cfg.has_section("speech")) {
    spec.manifest = Manifest::parse(cfg, base_dir, spec.seed);
  } else {
    throw UsageError(
        "config needs either [experiment] manifest = <path> or inline dataset "
        "sections ([speech], [rir], ...)");
  }

  const double lambda1 = cfg.get_double_or("methods", "lambda1", 1.0);
  const double lambda2 = cfg.get_double_or("methods", "lambda2", 1.0);
  for (const std::string& name : split_ws(cfg.get_or("methods", "single", "")))
    spec.methods.push_back(parse_single_method(name));
  for (const std::string& entry : split_ws(cfg.get_or("methods", "multi", "")))
    spec.methods.push_back(parse_multi_method(entry, lambda1, lambda2));
  if (spec.methods.empty()) throw UsageError("config defines no methods ([methods] section)");
  std::set<std::string> stems;
  for (const Method& m : spec.methods)
    if (!stems.insert(m.stem).second)
      throw UsageError("method '" + m.label + "' is listed twice");

  spec.shapes_single = parse_shapes(cfg.get_or("train", "shapes", ""));
  spec.shapes_multi = parse_shapes(cfg.get_or("train", "shapes_multi", ""));
  if (cfg.has("train", "units")) {
    for (double u : cfg.get_doubles("train", "units"))
      spec.hidden_units.push_back(static_cast<int>(u));
  }
  if (cfg.has("train", "learning_rates"))
    spec.learning_rates = cfg.get_doubles("train", "learning_rates");
  if (cfg.has("train", "weight_decays"))
    spec.weight_decays = cfg.get_doubles("train", "weight_decays");
  spec.epochs = static_cast<int>(cfg.get_int_or("train", "epochs", 200));
  spec.batch_size = static_cast<int>(cfg.get_int_or("train", "batch_size", 128));
  const std::string select = cfg.get_or("train", "select_on", "primary");
  if (select == "objective") spec.select_on_objective = true;
  else if (select != "primary")
    throw UsageError("select_on must be 'primary' or 'objective', got '" + select + "'");

  spec.enhance.beta = cfg.get_double_or("enhance", "beta", 0.98);
  spec.enhance.gain_floor = cfg.get_double_or("enhance", "gain_floor", 0.0);
  spec.enhance.validate();
  return spec;
}

TrainConfig make_train_config(const ExperimentSpec& spec, const Method& m) {
  TrainConfig tc;
  tc.target = m.target;
  tc.loss = m.loss;
  tc.shapes = m.loss.multi_task() ? spec.shapes_multi : spec.shapes_single;
  if (!spec.hidden_units.empty()) tc.hidden_units = spec.hidden_units;
  if (!spec.learning_rates.empty()) tc.learning_rates = spec.learning_rates;
  if (!spec.weight_decays.empty()) tc.weight_decays = spec.weight_decays;
  tc.epochs = spec.epochs;
  tc.batch_size = spec.batch_size;
  tc.seed = spec.seed;
  tc.select_on_objective = spec.select_on_objective;
  tc.validate();
  return tc;
}

void split_counts(const std::vector<SceneSpec>& specs, size_t out[3]) {
  out[0] = out[1] = out[2] = 0;
  for (const SceneSpec& s : specs) {
    if (s.split == "train") ++out[0];
    else if (s.split == "validation") ++out[1];
    else ++out[2];
  }
}

void print_plan(const ExperimentSpec& spec, const ExperimentOptions& opt, std::ostream& log) {
  const std::vector<SceneSpec> specs = plan_scenes(spec.manifest);
  size_t counts[3];
  split_counts(specs, counts);
  log << "[plan] config: " << opt.config_path << "\n";
  log << "[plan] out: " << spec.out_dir << ", seed " << spec.seed << ", jobs " << opt.jobs
      << "\n";
  log << "[plan] dataset: " << specs.size() << " scenes (train " << counts[0]
      << ", validation " << counts[1] << ", test " << counts[2] << ") at "
      << spec.manifest.sample_rate << " Hz\n";
  for (size_t i = 0; i < spec.methods.size(); ++i) {
    const Method& m = spec.methods[i];
    const TrainConfig tc = make_train_config(spec, m);
    log << "[plan] method " << i + 1 << "/" << spec.methods.size() << ": " << m.label << " ("
        << m.loss.name() << ") - grid " << tc.grid().size() << " cells x " << tc.epochs
        << " epochs -> models/" << m.stem << ".model\n";
  }
  log << "[plan] dry run: nothing executed\n";
}

std::string format_cell(double v, int width) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%*.2f", width, v);
  return buf;
}

std::string format_text(const std::string& s, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*s", width, s.c_str());
  return buf;
}

// rows: measures; columns: the unprocessed mic signal, then one per method.
std::string format_table(const std::vector<Method>& methods,
                         const std::vector<EvalSummary>& results) {
  const int label_width = 14;
  std::vector<std::string> cols = {"noisy"};
  for (const Method& m : methods) cols.push_back(m.label);
  std::vector<int> widths;
  for (const std::string& c : cols) widths.push_back(std::max<int>(9, static_cast<int>(c.size()) + 2));

  std::ostringstream out;
  out << format_text("measure", label_width);
  for (size_t c = 0; c < cols.size(); ++c) out << format_text(cols[c], widths[c]);
  out << "\n";

  const char* names[4] = {"fwSSNR [dB]", "delta-fwSSNR", "segSNR [dB]", "delta-segSNR"};
  for (int r = 0; r < 4; ++r) {
    out << format_text(names[r], label_width);
    for (size_t c = 0; c < cols.size(); ++c) {
      double v = 0.0;
      bool blank = false;
      if (c == 0) {
        // The shared baseline: every method is scored on the same test
        // scenes, so the input-side means coincide.
        switch (r) {
          case 0: v = results[0].fwssnr_in; break;
          case 2: v = results[0].segsnr_in; break;
          default: blank = true;
        }
      } else {
        const EvalSummary& s = results[c - 1];
        switch (r) {
          case 0: v = s.fwssnr_out; break;
          case 1: v = s.delta_fwssnr; break;
          case 2: v = s.segsnr_out; break;
          case 3: v = s.delta_segsnr; break;
        }
      }
      out << (blank ? format_text("-", widths[c]) : format_cell(v, widths[c]));
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

void cmd_experiment(const ExperimentOptions& opt, std::ostream& log) {
  if (opt.jobs < 1) throw UsageError("--jobs must be at least 1");
  const ExperimentSpec spec = parse_experiment(opt);
  if (opt.dry_run) {
    print_plan(spec, opt, log);
    return;
  }

  const FeatureConfig fc;
  const std::string scene_dir = (fs::path(spec.out_dir) / "scenes").string();
  fs::create_directories(spec.out_dir);

  std::vector<SceneIndexRow> rows;
  run_stage("synthesize", [&] { rows = synthesize_scenes(spec.manifest, scene_dir, opt.jobs, log); });

  std::vector<SceneIndexRow> test_rows;
  std::vector<std::string> test_inputs;
  for (const SceneIndexRow& r : rows)
    if (r.split == "test") {
      test_rows.push_back(r);
      test_inputs.push_back((fs::path(scene_dir) / (r.id + "_y.wav")).string());
    }
  if (test_rows.empty()) throw DataError("dataset has no test scenes to evaluate on");

  std::vector<EvalSummary> results;
  std::vector<std::string> best_lines;
  for (size_t i = 0; i < spec.methods.size(); ++i) {
    const Method& m = spec.methods[i];
    log << "[experiment] method " << i + 1 << "/" << spec.methods.size() << ": " << m.label
        << "\n";
    const TrainConfig tc = make_train_config(spec, m);
    const std::string model_path =
        (fs::path(spec.out_dir) / "models" / (m.stem + ".model")).string();
    const std::string enhanced_dir = (fs::path(spec.out_dir) / "enhanced" / m.stem).string();
    const std::string report_path =
        (fs::path(spec.out_dir) / "reports" / (m.stem + ".tsv")).string();

    TrainResult tr;
    run_stage("train " + m.label,
              [&] { tr = train_from_scenes(scene_dir, rows, tc, fc, model_path, opt.jobs, log); });

    std::ostringstream quiet;  // per-file lines stay out of the main log
    long clipped = 0;
    run_stage("enhance " + m.label, [&] {
      clipped = enhance_files(tr.model, test_inputs, enhanced_dir, spec.enhance, opt.jobs, quiet);
    });
    log << "[experiment] enhanced " << test_inputs.size() << " test scenes -> " << enhanced_dir;
    if (clipped > 0) log << " (" << clipped << " samples clipped)";
    log << "\n";

    EvalSummary summary;
    run_stage("evaluate " + m.label, [&] {
      summary = evaluate_scenes(scene_dir, test_rows, enhanced_dir, report_path, opt.jobs, log);
    });
    results.push_back(summary);

    // Paths in the summary are relative to out_dir so reruns of the same
    // config are byte-identical wherever they land.
    const CellResult& best = tr.cells[static_cast<size_t>(tr.best_cell)];
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "%s: model models/%s.model (shape %c, units %d, lr %g, wd %g, epoch %d, "
                  "val %.6g)",
                  m.label.c_str(), m.stem.c_str(), best.cell.shape, best.cell.hidden_units,
                  best.cell.learning_rate, best.cell.weight_decay, best.best_epoch + 1,
                  best.best_val);
    best_lines.push_back(buf);
  }

  const std::string table = format_table(spec.methods, results);
  log << "\n" << table << "\n";

  const std::string summary_path = (fs::path(spec.out_dir) / "summary.txt").string();
  std::ofstream out(summary_path, std::ios::trunc);
  if (!out) throw DataError("cannot write summary: " + summary_path);
  size_t counts[3];
  const std::vector<SceneSpec> planned = plan_scenes(spec.manifest);
  split_counts(planned, counts);
  out << "seed " << spec.seed << ", " << planned.size() << " scenes (train " << counts[0]
      << ", validation " << counts[1] << ", test " << counts[2] << "), " << test_rows.size()
      << " test scenes scored\n\n";
  out << table << "\n";
  for (const std::string& l : best_lines) out << l << "\n";
  out.flush();
  if (!out) throw DataError("failed writing summary: " + summary_path);
  log << "[experiment] summary -> " << summary_path << "\n";
}

}  // namespace demist
