// net/model_io.cc

#include "net/model_io.h"

#include <cstring>
#include <fstream>
#include <vector>

#include "util/errors.h"

namespace demist {
namespace {

constexpr char kMagic[4] = {'D', 'M', 'L', 'P'};
constexpr std::uint32_t kVersion = 1;

class ByteWriter {
 public:
  void put_bytes(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  void put_u8(std::uint8_t v) { put_bytes(&v, 1); }
  void put_u32(std::uint32_t v) { put_bytes(&v, 4); }
  void put_i32(std::int32_t v) { put_bytes(&v, 4); }
  void put_u64(std::uint64_t v) { put_bytes(&v, 8); }
  void put_f64(double v) { put_bytes(&v, 8); }
  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(const std::string& buf, std::string path)
      : buf_(buf), path_(std::move(path)) {}
  void get_bytes(void* p, std::size_t n) {
    if (pos_ + n > buf_.size())
      throw DataError("truncated model file: " + path_);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t get_u8() { std::uint8_t v; get_bytes(&v, 1); return v; }
  std::uint32_t get_u32() { std::uint32_t v; get_bytes(&v, 4); return v; }
  std::int32_t get_i32() { std::int32_t v; get_bytes(&v, 4); return v; }
  std::uint64_t get_u64() { std::uint64_t v; get_bytes(&v, 8); return v; }
  double get_f64() { double v; get_bytes(&v, 8); return v; }

 private:
  const std::string& buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

void put_dense(ByteWriter* w, std::uint8_t branch, const Mlp<float>::Dense& d) {
  w->put_u8(branch);
  w->put_u8(static_cast<std::uint8_t>(d.act));
  w->put_u32(static_cast<std::uint32_t>(d.W.rows()));
  w->put_u32(static_cast<std::uint32_t>(d.W.cols()));
  for (Eigen::Index i = 0; i < d.W.rows(); ++i)
    for (Eigen::Index j = 0; j < d.W.cols(); ++j)
      w->put_f64(static_cast<double>(d.W(i, j)));
  for (Eigen::Index i = 0; i < d.b.size(); ++i)
    w->put_f64(static_cast<double>(d.b[i]));
}

Mlp<float>::Dense get_dense(ByteReader* r, std::uint8_t* branch,
                            const std::string& path) {
  *branch = r->get_u8();
  const std::uint8_t act = r->get_u8();
  if (act > 2) throw DataError("corrupt model file (bad activation): " + path);
  const std::uint32_t rows = r->get_u32();
  const std::uint32_t cols = r->get_u32();
  if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20))
    throw DataError("corrupt model file (bad layer shape): " + path);
  Mlp<float>::Dense d;
  d.act = static_cast<Activation>(act);
  d.W.resize(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j)
      d.W(i, j) = static_cast<float>(r->get_f64());
  d.b.resize(rows);
  for (std::uint32_t i = 0; i < rows; ++i)
    d.b[i] = static_cast<float>(r->get_f64());
  return d;
}

}  // namespace

std::uint32_t crc32_bytes(const void* data, std::size_t size) {
  static const auto table = [] {
    std::vector<std::uint32_t> t(256);
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i)
    crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

void save_model(const Mlp<float>& model, const std::string& path) {
  ByteWriter w;
  w.put_bytes(kMagic, 4);
  w.put_u32(kVersion);
  w.put_u8(static_cast<std::uint8_t>(model.arch_.shape));
  w.put_u8(static_cast<std::uint8_t>(model.meta_.target));
  w.put_u8(static_cast<std::uint8_t>(model.meta_.loss.kind));
  w.put_u8(static_cast<std::uint8_t>(model.task1_.back().act));
  w.put_u8(model.task2_.empty() ? 0 : 1);
  w.put_u32(static_cast<std::uint32_t>(model.arch_.input_dim));
  w.put_u32(static_cast<std::uint32_t>(model.arch_.output_dim));
  w.put_u32(static_cast<std::uint32_t>(model.arch_.hidden_units));
  w.put_f64(model.meta_.loss.lambda1);
  w.put_f64(model.meta_.loss.lambda2);
  w.put_f64(static_cast<double>(model.s1_));
  w.put_f64(static_cast<double>(model.s2_));
  w.put_u32(static_cast<std::uint32_t>(model.feat_.stft.window_len));
  w.put_u32(static_cast<std::uint32_t>(model.feat_.stft.hop));
  w.put_u32(static_cast<std::uint32_t>(model.feat_.stft.sample_rate));
  w.put_f64(model.feat_.alpha);
  w.put_u32(static_cast<std::uint32_t>(model.feat_.context));
  w.put_f64(model.feat_.psd_floor_rel);
  w.put_f64(model.feat_.xi_max);
  w.put_f64(model.feat_.spp.p_h1);
  w.put_f64(model.feat_.spp.xi_h1_db);
  w.put_u64(model.meta_.seed);
  w.put_i32(model.meta_.best_epoch);
  w.put_f64(model.meta_.val_loss);
  w.put_f64(model.meta_.learning_rate);
  w.put_f64(model.meta_.weight_decay);
  w.put_u32(static_cast<std::uint32_t>(model.meta_.epochs));
  for (Eigen::Index i = 0; i < model.norm_mean_.size(); ++i)
    w.put_f64(static_cast<double>(model.norm_mean_[i]));
  for (Eigen::Index i = 0; i < model.norm_istd_.size(); ++i)
    w.put_f64(static_cast<double>(model.norm_istd_[i]));
  const std::uint32_t num_layers =
      static_cast<std::uint32_t>(model.shared_.size() + model.task1_.size() +
                                 model.task2_.size());
  w.put_u32(num_layers);
  for (const auto& d : model.shared_) put_dense(&w, 0, d);
  for (const auto& d : model.task1_) put_dense(&w, 1, d);
  for (const auto& d : model.task2_) put_dense(&w, 2, d);

  const std::string& body = w.buffer();
  const std::uint32_t crc = crc32_bytes(body.data(), body.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model file: " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.write(reinterpret_cast<const char*>(&crc), 4);
  out.flush();
  if (!out) throw DataError("failed writing model file: " + path);
}

Mlp<float> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw DataError("not a model file: " + path);
  std::uint32_t version;
  std::memcpy(&version, buf.data() + 4, 4);
  if (version != kVersion)
    throw DataError("unsupported model file version " + std::to_string(version) +
                    ": " + path);
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
  if (crc32_bytes(buf.data(), buf.size() - 4) != stored_crc)
    throw DataError("model file checksum mismatch (file damaged?): " + path);

  const std::string body = buf.substr(0, buf.size() - 4);
  ByteReader r(body, path);
  char magic[4];
  r.get_bytes(magic, 4);
  r.get_u32();  // version, already checked

  Mlp<float> model;
  model.arch_.shape = static_cast<char>(r.get_u8());
  model.meta_.target = static_cast<TargetKind>(r.get_u8());
  model.meta_.loss.kind = static_cast<LossSpec::Kind>(r.get_u8());
  const std::uint8_t primary_act = r.get_u8();
  const bool has_secondary = r.get_u8() != 0;
  model.arch_.input_dim = static_cast<int>(r.get_u32());
  model.arch_.output_dim = static_cast<int>(r.get_u32());
  model.arch_.hidden_units = static_cast<int>(r.get_u32());
  try {
    model.arch_.validate();
  } catch (const std::exception& e) {
    throw DataError("corrupt model file (" + std::string(e.what()) + "): " + path);
  }
  if (primary_act > 1)
    throw DataError("corrupt model file (bad output activation): " + path);
  if (has_secondary != model.arch_.multi_task())
    throw DataError("corrupt model file (head/shape mismatch): " + path);
  model.meta_.loss.lambda1 = r.get_f64();
  model.meta_.loss.lambda2 = r.get_f64();
  model.s1_ = static_cast<float>(r.get_f64());
  model.s2_ = static_cast<float>(r.get_f64());
  model.feat_.stft.window_len = static_cast<int>(r.get_u32());
  model.feat_.stft.hop = static_cast<int>(r.get_u32());
  model.feat_.stft.sample_rate = static_cast<int>(r.get_u32());
  model.feat_.alpha = r.get_f64();
  model.feat_.context = static_cast<int>(r.get_u32());
  model.feat_.psd_floor_rel = r.get_f64();
  model.feat_.xi_max = r.get_f64();
  model.feat_.spp.p_h1 = r.get_f64();
  model.feat_.spp.xi_h1_db = r.get_f64();
  model.meta_.seed = r.get_u64();
  model.meta_.best_epoch = r.get_i32();
  model.meta_.val_loss = r.get_f64();
  model.meta_.learning_rate = r.get_f64();
  model.meta_.weight_decay = r.get_f64();
  model.meta_.epochs = static_cast<int>(r.get_u32());
  model.norm_mean_.resize(model.arch_.input_dim);
  for (int i = 0; i < model.arch_.input_dim; ++i)
    model.norm_mean_[i] = static_cast<float>(r.get_f64());
  model.norm_istd_.resize(model.arch_.input_dim);
  for (int i = 0; i < model.arch_.input_dim; ++i)
    model.norm_istd_[i] = static_cast<float>(r.get_f64());

  const std::uint32_t num_layers = r.get_u32();
  const std::uint32_t expected =
      static_cast<std::uint32_t>(model.arch_.shared_layers() +
                                 model.arch_.task_hidden_layers() + 1 +
                                 (model.arch_.multi_task()
                                      ? model.arch_.task_hidden_layers() + 1
                                      : 0));
  if (num_layers != expected)
    throw DataError("corrupt model file (layer count): " + path);
  for (std::uint32_t i = 0; i < num_layers; ++i) {
    std::uint8_t branch;
    Mlp<float>::Dense d = get_dense(&r, &branch, path);
    if (branch == 0) model.shared_.push_back(std::move(d));
    else if (branch == 1) model.task1_.push_back(std::move(d));
    else if (branch == 2) model.task2_.push_back(std::move(d));
    else throw DataError("corrupt model file (bad branch tag): " + path);
  }
  if (static_cast<int>(model.shared_.size()) != model.arch_.shared_layers() ||
      static_cast<int>(model.task1_.size()) !=
          model.arch_.task_hidden_layers() + 1 ||
      static_cast<int>(model.task2_.size()) !=
          (model.arch_.multi_task() ? model.arch_.task_hidden_layers() + 1 : 0))
    throw DataError("corrupt model file (branch layout): " + path);
  if (model.shared_.front().W.cols() != model.arch_.input_dim ||
      model.task1_.back().W.rows() != model.arch_.output_dim ||
      model.task1_.back().act != static_cast<Activation>(primary_act))
    throw DataError("corrupt model file (layer dimensions): " + path);
  model.feat_.stft.validate();
  return model;
}

}  // namespace demist
