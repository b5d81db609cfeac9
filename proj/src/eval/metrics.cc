// eval/metrics.cc

#include "eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Core>

#include "dsp/fft.h"
#include "util/config.h"
#include "util/errors.h"

namespace demist {

void MetricConfig::validate() const {
  if (frame_len < 8 || (frame_len & (frame_len - 1)) != 0)
    throw UsageError("metric frame length must be a power of two >= 8");
  if (hop <= 0 || hop > frame_len)
    throw UsageError("metric hop must lie in (0, frame_len]");
  if (num_bands < 1) throw UsageError("metric needs at least one band");
  if (!(snr_floor_db < snr_ceil_db))
    throw UsageError("metric SNR floor must lie below the ceiling");
  if (active_range_db <= 0) throw UsageError("active frame range must be positive");
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

// num_bands x num_bins triangular filters, mel-spaced over [0, fs/2].
Eigen::MatrixXd mel_bands(int num_bands, int frame_len, int sample_rate) {
  const int bins = frame_len / 2 + 1;
  std::vector<double> edge_hz(static_cast<size_t>(num_bands) + 2);
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  for (int i = 0; i < num_bands + 2; ++i)
    edge_hz[i] = mel_to_hz(mel_max * i / (num_bands + 1));
  Eigen::MatrixXd bands = Eigen::MatrixXd::Zero(num_bands, bins);
  for (int j = 0; j < num_bands; ++j) {
    const double lo = edge_hz[j], mid = edge_hz[j + 1], hi = edge_hz[j + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / frame_len;
      if (f > lo && f < mid && mid > lo)
        bands(j, k) = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi && hi > mid)
        bands(j, k) = (hi - f) / (hi - mid);
    }
  }
  return bands;
}

struct ScoredFrame {
  double energy = 0.0;
  double score = 0.0;
  bool scoreable = false;
};

double clamped_snr(double num, double den, const MetricConfig& cfg) {
  if (den == 0.0) return cfg.snr_ceil_db;   // includes the 0/0 silent case
  if (num == 0.0) return cfg.snr_floor_db;
  return std::clamp(10.0 * std::log10(num / den), cfg.snr_floor_db,
                    cfg.snr_ceil_db);
}

// Mean score over frames whose reference energy lies within
// cfg.active_range_db of the loudest frame.
double active_mean(const std::vector<ScoredFrame>& frames, const MetricConfig& cfg,
                   const char* metric_name) {
  double emax = 0.0;
  for (const ScoredFrame& f : frames) emax = std::max(emax, f.energy);
  if (emax <= 0.0)
    throw DataError(std::string(metric_name) + ": reference signal is silent");
  const double threshold = emax * std::pow(10.0, -cfg.active_range_db / 10.0);
  double sum = 0.0;
  long count = 0;
  for (const ScoredFrame& f : frames)
    if (f.scoreable && f.energy >= threshold) {
      sum += f.score;
      ++count;
    }
  if (count == 0)
    throw DataError(std::string(metric_name) + ": no scoreable frames");
  return sum / static_cast<double>(count);
}

long trimmed_length(const std::vector<double>& a, const std::vector<double>& b,
                    int frame_len, const char* metric_name) {
  const long n = static_cast<long>(std::min(a.size(), b.size()));
  if (n < frame_len)
    throw DataError(std::string(metric_name) +
                    ": signals shorter than one analysis frame");
  return n;
}

}  // namespace

double fwssnr(const std::vector<double>& reference, const std::vector<double>& test,
              int sample_rate, const MetricConfig& cfg) {
  cfg.validate();
  if (sample_rate <= 0) throw UsageError("sample rate must be positive");
  const long n = trimmed_length(reference, test, cfg.frame_len, "fwssnr");
  const std::vector<double> window = hann_window(cfg.frame_len);
  const Eigen::MatrixXd bands = mel_bands(cfg.num_bands, cfg.frame_len, sample_rate);
  const int bins = cfg.frame_len / 2 + 1;

  std::vector<ScoredFrame> frames;
  std::vector<double> xw(static_cast<size_t>(cfg.frame_len));
  std::vector<double> tw(static_cast<size_t>(cfg.frame_len));
  Eigen::VectorXd px(bins), pt(bins);
  for (long t = 0; t + cfg.frame_len <= n; t += cfg.hop) {
    ScoredFrame frame;
    for (int i = 0; i < cfg.frame_len; ++i) {
      xw[i] = reference[t + i] * window[i];
      tw[i] = test[t + i] * window[i];
      frame.energy += xw[i] * xw[i];
    }
    const auto xs = rfft(xw);
    const auto ts = rfft(tw);
    for (int k = 0; k < bins; ++k) {
      px[k] = std::norm(xs[k]);
      pt[k] = std::norm(ts[k]);
    }
    const Eigen::VectorXd bandsx = bands * px;
    const Eigen::VectorXd bandst = bands * pt;
    double weight_sum = 0.0;
    double deficit_sum = 0.0;  // sum of w * (ceiling - snr)
    for (int j = 0; j < cfg.num_bands; ++j) {
      const double bx = std::sqrt(bandsx[j]);
      const double bt = std::sqrt(bandst[j]);
      const double w = std::pow(bx, cfg.weight_exponent);
      if (w <= 0.0) continue;
      const double diff = bx - bt;
      const double snr = clamped_snr(bandsx[j], diff * diff, cfg);
      weight_sum += w;
      deficit_sum += w * (cfg.snr_ceil_db - snr);
    }
    if (weight_sum > 0.0) {
      frame.score = cfg.snr_ceil_db - deficit_sum / weight_sum;
      frame.scoreable = true;
    }
    frames.push_back(frame);
  }
  return active_mean(frames, cfg, "fwssnr");
}

double segsnr(const std::vector<double>& reference, const std::vector<double>& test,
              const MetricConfig& cfg) {
  cfg.validate();
  const long n = trimmed_length(reference, test, cfg.frame_len, "segsnr");
  const std::vector<double> window = hann_window(cfg.frame_len);
  std::vector<ScoredFrame> frames;
  for (long t = 0; t + cfg.frame_len <= n; t += cfg.hop) {
    ScoredFrame frame;
    double err = 0.0;
    for (int i = 0; i < cfg.frame_len; ++i) {
      const double x = reference[t + i] * window[i];
      const double d = x - test[t + i] * window[i];
      frame.energy += x * x;
      err += d * d;
    }
    frame.score = clamped_snr(frame.energy, err, cfg);
    frame.scoreable = true;
    frames.push_back(frame);
  }
  return active_mean(frames, cfg, "segsnr");
}

std::string scene_condition(const SceneComponents& scene) {
  char buf[96];
  if (scene.snr_db.has_value())
    std::snprintf(buf, sizeof buf, "t60=%gms,snr=%gdB", scene.t60_ms, *scene.snr_db);
  else
    std::snprintf(buf, sizeof buf, "t60=%gms,rev-only", scene.t60_ms);
  return buf;
}

EvalRow evaluate_scene(const SceneComponents& scene, const std::vector<double>& enhanced,
                       const MetricConfig& cfg) {
  cfg.validate();
  const long drift = std::labs(static_cast<long>(enhanced.size()) -
                               static_cast<long>(scene.y.size()));
  if (drift > cfg.hop)
    throw DataError("enhanced signal for scene '" + scene.id + "' is misaligned by " +
                    std::to_string(drift) + " samples (more than one hop)");
  const size_t len =
      std::min({scene.x.size(), scene.y.size(), enhanced.size()});
  const std::vector<double> x(scene.x.begin(), scene.x.begin() + len);
  const std::vector<double> y(scene.y.begin(), scene.y.begin() + len);
  const std::vector<double> e(enhanced.begin(), enhanced.begin() + len);

  EvalRow row;
  row.id = scene.id;
  row.condition = scene_condition(scene);
  row.fwssnr_in = fwssnr(x, y, scene.sample_rate, cfg);
  row.fwssnr_out = fwssnr(x, e, scene.sample_rate, cfg);
  row.delta_fwssnr = row.fwssnr_out - row.fwssnr_in;
  row.segsnr_in = segsnr(x, y, cfg);
  row.segsnr_out = segsnr(x, e, cfg);
  row.delta_segsnr = row.segsnr_out - row.segsnr_in;
  return row;
}

EvalSummary summarize(const std::vector<EvalRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");
  EvalSummary s;
  s.count = rows.size();
  for (const EvalRow& r : rows) {
    s.fwssnr_in += r.fwssnr_in;
    s.fwssnr_out += r.fwssnr_out;
    s.delta_fwssnr += r.delta_fwssnr;
    s.segsnr_in += r.segsnr_in;
    s.segsnr_out += r.segsnr_out;
    s.delta_segsnr += r.delta_segsnr;
  }
  const double n = static_cast<double>(s.count);
  s.fwssnr_in /= n;
  s.fwssnr_out /= n;
  s.delta_fwssnr /= n;
  s.segsnr_in /= n;
  s.segsnr_out /= n;
  s.delta_segsnr /= n;
  return s;
}

namespace {

constexpr char kReportMagic[] = "# eval-report v1";
constexpr char kReportHeader[] =
    "id\tcondition\tfwssnr_in\tfwssnr_out\tdelta_fwssnr\tsegsnr_in\tsegsnr_out"
    "\tdelta_segsnr";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type pos = 0;
  for (;;) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

std::string format_row(const std::string& id, const std::string& condition,
                       double a, double b, double c, double d, double e, double f) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f", a, b, c,
                d, e, f);
  return id + "\t" + condition + "\t" + buf;
}

}  // namespace

void write_report(const std::string& path, const std::vector<EvalRow>& rows) {
  if (rows.empty()) throw DataError("refusing to write an empty report: " + path);
  const EvalSummary s = summarize(rows);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write report: " + path);
  out << kReportMagic << '\n' << kReportHeader << '\n';
  for (const EvalRow& r : rows)
    out << format_row(r.id, r.condition, r.fwssnr_in, r.fwssnr_out,
                      r.delta_fwssnr, r.segsnr_in, r.segsnr_out, r.delta_segsnr)
        << '\n';
  out << "# aggregate\tcount=" << s.count << '\n';
  out << format_row("mean", "-", s.fwssnr_in, s.fwssnr_out, s.delta_fwssnr,
                    s.segsnr_in, s.segsnr_out, s.delta_segsnr)
      << '\n';
  out.flush();
  if (!out) throw DataError("failed writing report: " + path);
}

std::vector<EvalRow> read_report(const std::string& path, EvalSummary* summary) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kReportMagic)
    throw DataError("not an evaluation report: " + path);
  if (!std::getline(in, line) || line != kReportHeader)
    throw DataError("unexpected report header: " + path);
  std::vector<EvalRow> rows;
  bool in_aggregate = false;
  std::size_t declared_count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# aggregate", 0) == 0) {
      in_aggregate = true;
      const auto eq = line.find("count=");
      if (eq == std::string::npos)
        throw DataError("malformed aggregate marker in report: " + path);
      declared_count = static_cast<std::size_t>(
          parse_double(line.substr(eq + 6), "report aggregate count"));
      continue;
    }
    const std::vector<std::string> f = split_tabs(line);
    if (f.size() != 8)
      throw DataError("malformed report row (" + std::to_string(f.size()) +
                      " fields): " + path);
    EvalRow row;
    row.id = f[0];
    row.condition = f[1];
    row.fwssnr_in = parse_double(f[2], "fwssnr_in");
    row.fwssnr_out = parse_double(f[3], "fwssnr_out");
    row.delta_fwssnr = parse_double(f[4], "delta_fwssnr");
    row.segsnr_in = parse_double(f[5], "segsnr_in");
    row.segsnr_out = parse_double(f[6], "segsnr_out");
    row.delta_segsnr = parse_double(f[7], "delta_segsnr");
    if (!in_aggregate) {
      rows.push_back(std::move(row));
    } else {
      if (row.id != "mean")
        throw DataError("unexpected aggregate row '" + row.id + "': " + path);
      if (declared_count != rows.size())
        throw DataError("report aggregate count disagrees with rows: " + path);
      if (summary != nullptr) {
        summary->count = rows.size();
        summary->fwssnr_in = row.fwssnr_in;
        summary->fwssnr_out = row.fwssnr_out;
        summary->delta_fwssnr = row.delta_fwssnr;
        summary->segsnr_in = row.segsnr_in;
        summary->segsnr_out = row.segsnr_out;
        summary->delta_segsnr = row.delta_segsnr;
      }
    }
  }
  if (rows.empty()) throw DataError("report has no rows: " + path);
  return rows;
}

}  // namespace demist
