// cli/commands.cc

#include "cli/commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "enhance/enhance.h"
#include "feat/features.h"
#include "io/wav.h"
#include "net/model_io.h"
#include "util/errors.h"
#include "util/parallel.h"

namespace fs = std::filesystem;

namespace demist {

namespace {

void check_jobs(int jobs) {
  if (jobs < 1) throw UsageError("--jobs must be at least 1");
}

// Mirrors every streamed character into a second buffer (training progress
// goes to both the console and the on-disk log).
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == traits_type::eof()) return c;
    const int ra = a_->sputc(static_cast<char>(c));
    const int rb = b_->sputc(static_cast<char>(c));
    return (ra == traits_type::eof() || rb == traits_type::eof()) ? traits_type::eof() : c;
  }
  int sync() override { return (a_->pubsync() == 0 && b_->pubsync() == 0) ? 0 : -1; }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

}  // namespace

std::string scene_index_path(const std::string& scene_dir) {
  return (fs::path(scene_dir) / "scenes.tsv").string();
}

std::vector<SceneIndexRow> synthesize_scenes(const Manifest& m, const std::string& out_dir,
                                             int jobs, std::ostream& log) {
  check_jobs(jobs);
  const std::vector<SceneSpec> specs = plan_scenes(m);
  if (specs.empty()) throw DataError("manifest plans zero scenes");
  fs::create_directories(out_dir);

  // Load or synthesize all shared audio up front; afterwards the pool is
  // only read, so scene rendering can fan out across workers.
  AudioPool pool(m.sample_rate, m.seed, 30.0, m.gen_speech_seconds);
  for (const SceneSpec& s : specs) {
    pool.speech(s.speech);
    pool.rir(s.rir, m.early_boundary_ms);
    if (!s.noise.empty()) pool.noise(s.noise, s.split);
  }

  std::vector<SceneIndexRow> rows(specs.size());
  parallel_for(jobs, specs.size(), [&](size_t i) {
    const SceneComponents scene = build_scene(specs[i], m, pool);
    rows[i] = write_scene_wavs(scene, out_dir, specs[i]);
  });
  write_scene_index(scene_index_path(out_dir), rows);

  long clipped = 0;
  for (const SceneIndexRow& r : rows) clipped += r.clipped;
  log << "[synthesize] " << rows.size() << " scenes -> " << out_dir << " (" << clipped
      << " samples clipped)\n";
  return rows;
}

void cmd_synthesize(const SynthesizeOptions& opt, std::ostream& log) {
  check_jobs(opt.jobs);
  const Manifest m = Manifest::load(opt.manifest_path, opt.seed);
  synthesize_scenes(m, opt.out_dir, opt.jobs, log);
}

FrameDataset load_frame_dataset(const std::string& scene_dir,
                                const std::vector<SceneIndexRow>& rows, const std::string& split,
                                TargetKind primary, bool with_secondary, const FeatureConfig& fc,
                                int jobs) {
  std::vector<const SceneIndexRow*> picked;
  for (const SceneIndexRow& r : rows)
    if (split == "all" || r.split == split) picked.push_back(&r);
  if (picked.empty())
    throw DataError("no scenes in split '" + split + "' under " + scene_dir);

  // The same computation FrameDataset::add_scene performs, hoisted out so
  // scenes can be processed concurrently and appended in index order.
  struct Tracks {
    Eigen::MatrixXf input, primary, secondary;
  };
  std::vector<Tracks> tracks(picked.size());
  parallel_for(jobs, picked.size(), [&](size_t i) {
    const SceneComponents scene = load_scene(scene_dir, *picked[i]);
    tracks[i].input = input_track(scene.y, primary, fc).cast<float>();
    tracks[i].primary = compute_targets(scene, primary, fc).cast<float>();
    if (with_secondary)
      tracks[i].secondary = compute_targets(scene, TargetKind::Spp, fc).cast<float>();
  });

  FrameDataset ds(fc.context);
  for (size_t i = 0; i < picked.size(); ++i)
    ds.add_tracks(std::move(tracks[i].input), std::move(tracks[i].primary),
                  std::move(tracks[i].secondary), picked[i]->id);
  return ds;
}

TrainResult train_from_scenes(const std::string& scene_dir,
                              const std::vector<SceneIndexRow>& rows, const TrainConfig& cfg,
                              const FeatureConfig& fc, const std::string& model_path, int jobs,
                              std::ostream& log) {
  check_jobs(jobs);
  cfg.validate();  // argument errors must precede any filesystem writes

  const FrameDataset train_ds =
      load_frame_dataset(scene_dir, rows, "train", cfg.target, cfg.loss.multi_task(), fc, jobs);
  const FrameDataset val_ds = load_frame_dataset(scene_dir, rows, "validation", cfg.target,
                                                 cfg.loss.multi_task(), fc, jobs);
  log << "[train] target=" << target_kind_name(cfg.target) << " loss=" << cfg.loss.name()
      << ": " << train_ds.num_utterances() << " train scenes (" << train_ds.num_frames()
      << " frames), " << val_ds.num_utterances() << " validation scenes ("
      << val_ds.num_frames() << " frames), grid " << cfg.grid().size() << " cells x "
      << cfg.epochs << " epochs\n";

  const fs::path out(model_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const std::string log_path = model_path + ".log";
  std::ofstream log_file(log_path, std::ios::trunc);
  if (!log_file) throw DataError("cannot write training log: " + log_path);
  TeeBuf tee_buf(log.rdbuf(), log_file.rdbuf());
  std::ostream tee(&tee_buf);

  TrainConfig tc = cfg;
  tc.log = &tee;
  TrainResult res = train_grid(train_ds, val_ds, tc, fc);
  save_model(res.model, model_path);

  const CellResult& best = res.cells[static_cast<size_t>(res.best_cell)];
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "[train] best shape=%c units=%d lr=%g wd=%g epoch=%d val=%.6g; wrote ",
                best.cell.shape, best.cell.hidden_units, best.cell.learning_rate,
                best.cell.weight_decay, best.best_epoch + 1, best.best_val);
  log << buf << model_path << "\n";
  return res;
}

void cmd_train(const TrainOptions& opt, std::ostream& log) {
  check_jobs(opt.jobs);
  TrainConfig tc;
  tc.target = parse_target_kind(opt.target);
  tc.loss = LossSpec::parse(opt.loss, opt.lambda1, opt.lambda2);
  for (char c : opt.shapes) tc.shapes.push_back(c);
  if (!opt.hidden_units.empty()) tc.hidden_units = opt.hidden_units;
  if (!opt.learning_rates.empty()) tc.learning_rates = opt.learning_rates;
  if (!opt.weight_decays.empty()) tc.weight_decays = opt.weight_decays;
  tc.epochs = opt.epochs;
  tc.batch_size = opt.batch_size;
  tc.seed = opt.seed;
  tc.select_on_objective = opt.select_on_objective;
  tc.validate();

  const FeatureConfig fc;
  const std::vector<SceneIndexRow> rows = read_scene_index(scene_index_path(opt.scene_dir));
  train_from_scenes(opt.scene_dir, rows, tc, fc, opt.model_path, opt.jobs, log);
}

long enhance_files(const Mlp<float>& model, const std::vector<std::string>& inputs,
                   const std::string& out_dir, const EnhanceConfig& cfg, int jobs,
                   std::ostream& log) {
  check_jobs(jobs);
  cfg.validate();
  if (inputs.empty()) throw UsageError("no input files given");
  std::set<std::string> names;
  for (const std::string& in : inputs) {
    const std::string name = fs::path(in).filename().string();
    if (name.empty()) throw UsageError("input '" + in + "' has no file name");
    if (!names.insert(name).second)
      throw UsageError("two inputs would share the output name '" + name + "'");
  }
  fs::create_directories(out_dir);

  std::vector<std::string> lines(inputs.size());
  std::vector<long> clip_counts(inputs.size(), 0);
  parallel_for(jobs, inputs.size(), [&](size_t i) {
    const WavData in = read_wav(inputs[i]);
    const int want = model.feat_.stft.sample_rate;
    if (in.sample_rate != want)
      throw DataError("input " + inputs[i] + ": sample rate " +
                      std::to_string(in.sample_rate) + " does not match the model's " +
                      std::to_string(want) + " Hz (no resampling)");
    const std::vector<double> out = enhance_signal(model, in.samples, cfg);
    const std::string out_path = (fs::path(out_dir) / fs::path(inputs[i]).filename()).string();
    const long clipped = write_wav16(out_path, out, in.sample_rate);
    clip_counts[i] = clipped;
    std::ostringstream line;
    line << "[enhance] " << out_path << " (" << out.size() << " samples";
    if (clipped > 0) line << ", " << clipped << " clipped";
    line << ")";
    lines[i] = line.str();
  });
  for (const std::string& l : lines) log << l << "\n";
  long total = 0;
  for (long c : clip_counts) total += c;
  return total;
}

void cmd_enhance(const EnhanceOptions& opt, std::ostream& log) {
  check_jobs(opt.jobs);
  EnhanceConfig cfg;
  cfg.gain_floor = opt.gain_floor;
  cfg.beta = opt.beta;
  cfg.validate();
  if (opt.inputs.empty()) throw UsageError("no input files given");
  const Mlp<float> model = load_model(opt.model_path);
  enhance_files(model, opt.inputs, opt.out_dir, cfg, opt.jobs, log);
}

EvalSummary evaluate_scenes(const std::string& scene_dir,
                            const std::vector<SceneIndexRow>& rows,
                            const std::string& enhanced_dir, const std::string& report_path,
                            int jobs, std::ostream& log) {
  check_jobs(jobs);
  if (rows.empty()) throw DataError("no scenes to evaluate under " + scene_dir);

  std::vector<EvalRow> evals(rows.size());
  parallel_for(jobs, rows.size(), [&](size_t i) {
    const SceneIndexRow& row = rows[i];
    const std::string epath = (fs::path(enhanced_dir) / (row.id + "_y.wav")).string();
    if (!fs::exists(epath))
      throw DataError("missing enhanced file for scene " + row.id + ": " + epath);
    const SceneComponents scene = load_scene(scene_dir, row);
    const WavData ewav = read_wav(epath);
    if (ewav.sample_rate != scene.sample_rate)
      throw DataError("enhanced file " + epath + ": sample rate " +
                      std::to_string(ewav.sample_rate) + " does not match the scene's " +
                      std::to_string(scene.sample_rate));
    evals[i] = evaluate_scene(scene, ewav.samples);
  });

  const fs::path rp(report_path);
  if (rp.has_parent_path()) fs::create_directories(rp.parent_path());
  write_report(report_path, evals);
  const EvalSummary s = summarize(evals);
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "[evaluate] %zu scenes: fwSSNR %.2f -> %.2f (delta %+.2f), "
                "segSNR %.2f -> %.2f (delta %+.2f); wrote ",
                s.count, s.fwssnr_in, s.fwssnr_out, s.delta_fwssnr, s.segsnr_in, s.segsnr_out,
                s.delta_segsnr);
  log << buf << report_path << "\n";
  return s;
}

void cmd_evaluate(const EvaluateOptions& opt, std::ostream& log) {
  check_jobs(opt.jobs);
  if (opt.split != "all" && opt.split != "train" && opt.split != "validation" &&
      opt.split != "test")
    throw UsageError("--split must be train, validation, test, or all");
  const std::vector<SceneIndexRow> all = read_scene_index(scene_index_path(opt.scene_dir));
  std::vector<SceneIndexRow> rows;
  for (const SceneIndexRow& r : all)
    if (opt.split == "all" || r.split == opt.split) rows.push_back(r);
  if (rows.empty())
    throw DataError("no scenes in split '" + opt.split + "' under " + opt.scene_dir);
  evaluate_scenes(opt.scene_dir, rows, opt.enhanced_dir, opt.report_path, opt.jobs, log);
}

}  // namespace demist
