#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "eval/metrics.h"
#include "io/wav.h"
#include "net/model_io.h"
#include "scene/dataset.h"
#include "util/errors.h"

using namespace demist;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << data;
}

// Shared scratch space plus a synthesized dataset, built once per process.
struct Workspace {
  fs::path dir;
  std::string manifest_path;
  std::string scene_dir;

  Workspace() {
    dir = fs::temp_directory_path() / "demist_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    manifest_path = (dir / "data.manifest").string();
    write_file(manifest_path,
               "[dataset]\nseed = 9\n"
               "[speech]\ntrain = gen:speech:1\ntrain = gen:speech:2\n"
               "validation = gen:speech:3\ntest = gen:speech:4\ngen_seconds = 1.2\n"
               "[noise]\ntrain = gen:white\nvalidation = gen:white\ntest = gen:white\n"
               "[rir]\ntrain_t60_ms = 400\nvalidation_t60_ms = 450\ntest_t60_ms = 500\n"
               "[mix]\nsnr_db = 0 5\n");
    scene_dir = (dir / "scenes").string();
  }

  std::string path(const std::string& rel) const { return (dir / rel).string(); }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

RunResult run(const std::string& args) {
  static int call = 0;
  const std::string out_file = ws().path("cmd_out_" + std::to_string(call++) + ".txt");
  const std::string cmd = std::string(DEMIST_BIN) + " " + args + " > \"" + out_file + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.output = read_file(out_file);
  return r;
}

// Synthesizes the shared dataset on first use.
const std::string& scenes() {
  static bool done = false;
  if (!done) {
    const RunResult r = run("synthesize \"" + ws().manifest_path + "\" \"" + ws().scene_dir +
                            "\" --jobs 2");
    REQUIRE(r.code == 0);
    done = true;
  }
  return ws().scene_dir;
}

// Trains a tiny gain model on the shared dataset on first use.
const std::string& gain_model() {
  static std::string path;
  if (path.empty()) {
    path = ws().path("gain.model");
    const RunResult r =
        run("train \"" + scenes() + "\" \"" + path +
            "\" --target gain --loss single --shapes a --units 12 --learning-rates 1e-3 "
            "--weight-decays 0 --epochs 2 --seed 5");
    REQUIRE(r.code == 0);
  }
  return path;
}

}  // namespace

TEST_CASE("synthesize: renders scenes, index, and is byte-stable across reruns") {
  const std::string& dir = scenes();
  const auto rows = read_scene_index(dir + "/scenes.tsv");
  // train 2x2 snr, validation 1x2, test 1x2 speech/rir combinations.
  REQUIRE(rows.size() == 8);
  size_t wavs = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".wav") ++wavs;
  CHECK(wavs == 4 * rows.size());  // x, r, n, y per scene

  const std::string again = ws().path("scenes_again");
  const RunResult r =
      run("synthesize \"" + ws().manifest_path + "\" \"" + again + "\" --jobs 1");
  CHECK(r.code == 0);
  CHECK(read_file(again + "/scenes.tsv") == read_file(dir + "/scenes.tsv"));
  CHECK(read_file(again + "/train_00000_y.wav") == read_file(dir + "/train_00000_y.wav"));
}

TEST_CASE("synthesize: overlapping splits fail before anything is written") {
  const std::string bad = ws().path("bad.manifest");
  write_file(bad,
             "[dataset]\nseed = 1\n[speech]\ntrain = shared.wav\ntest = shared.wav\n"
             "[noise]\ntrain = gen:white\ntest = gen:white\n"
             "[rir]\ntrain_t60_ms = 300\ntest_t60_ms = 300\n[mix]\nsnr_db = 0\n");
  const std::string out = ws().path("bad_scenes");
  const RunResult r = run("synthesize \"" + bad + "\" \"" + out + "\"");
  CHECK(r.code == 2);
  CHECK(r.output.find("shared.wav") != std::string::npos);
  CHECK(!fs::exists(out));
}

TEST_CASE("train: single-task model records its target and writes a log") {
  const Mlp<float> model = load_model(gain_model());
  CHECK(model.meta_.target == TargetKind::WienerGain);
  CHECK(model.meta_.loss.kind == LossSpec::Kind::kSingle);
  CHECK(!model.arch_.multi_task());
  CHECK(model.task2_.empty());
  const std::string log = read_file(gain_model() + ".log");
  CHECK(log.find("epoch 1/2") != std::string::npos);
  CHECK(log.find("val=") != std::string::npos);
}

TEST_CASE("train: multi-adaptive model carries two heads and the s variables") {
  const std::string path = ws().path("gain_multi.model");
  const RunResult r =
      run("train \"" + scenes() + "\" \"" + path +
          "\" --target gain --loss multi-adaptive --shapes c --units 8 --learning-rates 1e-3 "
          "--weight-decays 0 --epochs 2 --seed 5");
  REQUIRE(r.code == 0);
  const Mlp<float> model = load_model(path);
  CHECK(model.meta_.target == TargetKind::WienerGain);
  CHECK(model.meta_.loss.kind == LossSpec::Kind::kMultiAdaptive);
  CHECK(model.arch_.multi_task());
  CHECK(!model.task1_.empty());
  CHECK(!model.task2_.empty());  // second head predicts speech presence
}

TEST_CASE("train: speech presence alone is rejected as a usage error") {
  const RunResult r = run("train \"" + scenes() + "\" \"" + ws().path("spp.model") +
                          "\" --target spp --loss single");
  CHECK(r.code == 1);
  CHECK(r.output.find("secondary") != std::string::npos);
  CHECK(!fs::exists(ws().path("spp.model")));
}

TEST_CASE("enhance: outputs keep the input length; rate mismatches are data errors") {
  const std::string out_dir = ws().path("enhanced");
  const std::string in0 = scenes() + "/test_00000_y.wav";
  const std::string in1 = scenes() + "/test_00001_y.wav";
  const RunResult r =
      run("enhance \"" + gain_model() + "\" \"" + out_dir + "\" \"" + in0 + "\" \"" + in1 +
          "\" --jobs 2");
  REQUIRE(r.code == 0);
  const WavData in = read_wav(in0);
  const WavData out = read_wav(out_dir + "/test_00000_y.wav");
  CHECK(out.samples.size() == in.samples.size());
  CHECK(out.sample_rate == in.sample_rate);

  // Wrong sample rate: no implicit resampling.
  const std::string alien = ws().path("alien.wav");
  write_wav16(alien, std::vector<double>(44100, 0.1), 44100);
  const RunResult bad = run("enhance \"" + gain_model() + "\" \"" + out_dir + "\" \"" + alien +
                            "\"");
  CHECK(bad.code == 2);
  CHECK(bad.output.find("sample rate") != std::string::npos);
}

TEST_CASE("enhance: an all-zero input comes back as all-zero output") {
  const std::string zero = ws().path("zero.wav");
  write_wav16(zero, std::vector<double>(16000, 0.0), 16000);
  const std::string out_dir = ws().path("enhanced_zero");
  const RunResult r = run("enhance \"" + gain_model() + "\" \"" + out_dir + "\" \"" + zero + "\"");
  REQUIRE(r.code == 0);
  const WavData out = read_wav(out_dir + "/zero.wav");
  REQUIRE(out.samples.size() == 16000);
  for (double v : out.samples) CHECK(v == 0.0);
}

TEST_CASE("evaluate: passthrough copies score exactly zero delta on every row") {
  const std::string copies = ws().path("copies");
  fs::create_directories(copies);
  const auto rows = read_scene_index(scenes() + "/scenes.tsv");
  size_t test_count = 0;
  for (const auto& row : rows)
    if (row.split == "test") {
      fs::copy_file(scenes() + "/" + row.id + "_y.wav", copies + "/" + row.id + "_y.wav",
                    fs::copy_options::overwrite_existing);
      ++test_count;
    }
  REQUIRE(test_count > 0);

  const std::string report = ws().path("copies.tsv");
  const RunResult r =
      run("evaluate \"" + scenes() + "\" \"" + copies + "\" \"" + report + "\" --split test");
  REQUIRE(r.code == 0);
  EvalSummary summary;
  const auto parsed = read_report(report, &summary);
  CHECK(parsed.size() == test_count);
  for (const auto& row : parsed) {
    CHECK(row.delta_fwssnr == 0.0);
    CHECK(row.delta_segsnr == 0.0);
  }
  // The aggregate row is the arithmetic mean of the per-scene rows.
  double mean_in = 0.0;
  for (const auto& row : parsed) mean_in += row.fwssnr_in;
  mean_in /= static_cast<double>(parsed.size());
  CHECK(std::abs(summary.fwssnr_in - mean_in) < 2e-6);
}

TEST_CASE("evaluate: a missing counterpart file is a data error naming the scene") {
  const std::string one = ws().path("one_enhanced");
  fs::create_directories(one);
  fs::copy_file(scenes() + "/test_00000_y.wav", one + "/test_00000_y.wav",
                fs::copy_options::overwrite_existing);
  const RunResult r = run("evaluate \"" + scenes() + "\" \"" + one + "\" \"" +
                          ws().path("one.tsv") + "\" --split test");
  CHECK(r.code == 2);
  CHECK(r.output.find("test_00001") != std::string::npos);

  const RunResult bad_split = run("evaluate \"" + scenes() + "\" \"" + one + "\" \"" +
                                  ws().path("one.tsv") + "\" --split weekend");
  CHECK(bad_split.code == 1);
}

TEST_CASE("experiment: dry run prints the plan and writes nothing") {
  const std::string conf = ws().path("exp.conf");
  write_file(conf,
             "[experiment]\nseed = 9\n"
             "[speech]\ntrain = gen:speech:1\ntrain = gen:speech:2\n"
             "validation = gen:speech:3\ntest = gen:speech:4\ngen_seconds = 1.2\n"
             "[noise]\ntrain = gen:white\nvalidation = gen:white\ntest = gen:white\n"
             "[rir]\ntrain_t60_ms = 400\nvalidation_t60_ms = 450\ntest_t60_ms = 500\n"
             "[mix]\nsnr_db = 0 5\n"
             "[methods]\nsingle = gain\n"
             "[train]\nshapes = a\nunits = 16\nlearning_rates = 1e-3\nweight_decays = 0\n"
             "epochs = 3\nbatch_size = 64\n");
  const std::string out = ws().path("exp_dry");
  const RunResult r = run("experiment \"" + conf + "\" --out \"" + out + "\" --dry-run");
  CHECK(r.code == 0);
  CHECK(r.output.find("8 scenes") != std::string::npos);
  CHECK(r.output.find("nothing executed") != std::string::npos);
  CHECK(!fs::exists(out));
}

TEST_CASE("experiment: full run emits the table; reruns are byte-identical") {
  const std::string conf = ws().path("exp.conf");  // written by the dry-run case
  REQUIRE(fs::exists(conf));
  const std::string out1 = ws().path("exp_run1");
  const std::string out2 = ws().path("exp_run2");
  const RunResult r1 = run("experiment \"" + conf + "\" --out \"" + out1 + "\" --jobs 2");
  REQUIRE(r1.code == 0);
  CHECK(r1.output.find("delta-fwSSNR") != std::string::npos);
  CHECK(fs::exists(out1 + "/models/gain.model"));
  CHECK(fs::exists(out1 + "/reports/gain.tsv"));
  CHECK(fs::exists(out1 + "/summary.txt"));

  const RunResult r2 = run("experiment \"" + conf + "\" --out \"" + out2 + "\" --jobs 1");
  REQUIRE(r2.code == 0);
  CHECK(read_file(out1 + "/models/gain.model") == read_file(out2 + "/models/gain.model"));
  CHECK(read_file(out1 + "/reports/gain.tsv") == read_file(out2 + "/reports/gain.tsv"));
  CHECK(read_file(out1 + "/summary.txt") == read_file(out2 + "/summary.txt"));
}

TEST_CASE("cli: parse failures exit 1, help exits 0") {
  CHECK(run("--definitely-not-a-flag").code == 1);
  CHECK(run("").code == 1);  // a subcommand is required
  CHECK(run("--help").code == 0);
  CHECK(run("train").code == 1);  // missing required positionals
}
