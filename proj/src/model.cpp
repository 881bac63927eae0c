#include "ieg/model.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "ieg/error.hpp"
#include "ieg/kernels.hpp"

namespace ieg {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kAlgebraic:
      return "algebraic";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "algebraic") return Activation::kAlgebraic;
  throw InvalidArgument("unknown activation '" + name + "' (expected tanh or algebraic)");
}

Normalization Normalization::from_samples(std::span<const TrainingSample> samples) {
  if (samples.empty()) throw InvalidArgument("cannot derive normalization from an empty dataset");
  Input6 lo = samples.front().input;
  Input6 hi = lo;
  for (const auto& s : samples) {
    for (int i = 0; i < 6; ++i) {
      lo[i] = std::min(lo[i], s.input[i]);
      hi[i] = std::max(hi[i], s.input[i]);
    }
  }
  Normalization n;
  for (int i = 0; i < 6; ++i) {
    n.offset[i] = 0.5 * (lo[i] + hi[i]);
    const double half = 0.5 * (hi[i] - lo[i]);
    n.scale[i] = half > 0.0 ? half : 1.0;
  }
  return n;
}

IegModel::IegModel(std::vector<int> dims, Activation activation, Normalization normalization)
    : dims_(std::move(dims)), activation_(activation) {
  if (dims_.size() < 2 || dims_.front() != kInputs || dims_.back() != 1)
    throw InvalidArgument("layer dims must start at 6 and end at 1");
  if (dims_.size() > 255) throw InvalidArgument("too many layers");
  for (int d : dims_) {
    if (d <= 0) throw InvalidArgument("layer widths must be positive");
  }
  set_normalization(normalization);
  std::size_t total = 0;
  for (int l = 0; l + 1 < static_cast<int>(dims_.size()); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(dims_[l]) * dims_[l + 1] + dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

void IegModel::set_normalization(const Normalization& n) {
  for (int i = 0; i < kInputs; ++i) {
    if (!(n.scale[i] > 0.0) || !std::isfinite(n.scale[i]) || !std::isfinite(n.offset[i]))
      throw InvalidArgument("normalization scales must be positive and finite");
  }
  normalization_ = n;
}

int IegModel::max_width() const { return *std::max_element(dims_.begin(), dims_.end()); }

IegModel IegModel::create(const Architecture& arch, const Normalization& normalization,
                          std::uint64_t seed) {
  if (arch.hidden_layers < 0 || arch.hidden_width <= 0)
    throw InvalidArgument("architecture needs non-negative depth and positive width");
  std::vector<int> dims{kInputs};
  for (int i = 0; i < arch.hidden_layers; ++i) dims.push_back(arch.hidden_width);
  dims.push_back(1);
  IegModel model(std::move(dims), arch.activation, normalization);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < model.layer_count(); ++l) {
    const int in = model.dims_[l];
    const int out = model.dims_[l + 1];
    const double bound = std::sqrt(3.0 / in);
    std::uniform_real_distribution<double> u(-bound, bound);
    double* w = model.weights(l);
    for (int i = 0; i < in * out; ++i) w[i] = u(rng);
    double* b = model.bias(l);
    for (int j = 0; j < out; ++j) b[j] = u(rng);
  }
  return model;
}

double forward(const IegModel& model, const Input6& input) {
  return kernels::reference::forward(model, input);
}

std::vector<double> forward_batch(const IegModel& model, std::span<const Input6> inputs) {
  std::vector<double> out(inputs.size());
  kernels::forward_batch(model, inputs, out);
  return out;
}

Input6 grad_input(const IegModel& model, const Input6& input) {
  Input6 grad{};
  kernels::reference::forward_input_grad(model, input, grad);
  return grad;
}

namespace {

class Writer {
 public:
  template <class T>
  void put(const T& value) {
    const auto* p = reinterpret_cast<const unsigned char*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<unsigned char>& bytes, std::size_t limit, std::string name)
      : bytes_(bytes), limit_(limit), name_(std::move(name)) {}

  template <class T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > limit_) {
      throw IoError(name_ + ": truncated model file reading " + what + " at offset " +
                    std::to_string(pos_));
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t limit_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

}  // namespace

void save_model(const IegModel& model, const std::filesystem::path& path) {
  Writer w;
  w.put_bytes("IEGM", 4);
  w.put(kModelVersion);
  w.put(static_cast<std::uint8_t>(model.activation()));
  w.put(static_cast<std::uint8_t>(model.layer_count()));
  for (int d : model.dims()) w.put(static_cast<std::uint32_t>(d));
  for (double p : model.params()) w.put(p);
  for (double s : model.normalization().scale) w.put(s);
  for (double o : model.normalization().offset) w.put(o);
  w.put(crc_of(w.bytes().data(), w.bytes().size()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

IegModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  const std::string name = path.string();
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "IEGM", 4) != 0)
    throw IoError(name + ": bad magic at offset 0 (not an IEGM model file)");
  if (bytes.size() < 8) throw IoError(name + ": truncated model file reading version at offset 4");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, sizeof version);
  if (version != kModelVersion) {
    throw IoError(name + ": unsupported model format version " + std::to_string(version) +
                  " (this build reads version " + std::to_string(kModelVersion) + ")");
  }
  if (bytes.size() < 8 + 4) throw IoError(name + ": truncated model file");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + body, sizeof stored_crc);

  Reader r(bytes, body, name);
  r.get<std::uint32_t>("magic");
  r.get<std::uint32_t>("version");
  const auto tag = r.get<std::uint8_t>("activation tag");
  if (tag > static_cast<std::uint8_t>(Activation::kAlgebraic))
    throw IoError(name + ": unknown activation tag " + std::to_string(tag));
  const auto layers = r.get<std::uint8_t>("layer count");
  std::vector<int> dims;
  for (int i = 0; i <= layers; ++i) {
    const auto d = r.get<std::uint32_t>("layer dims");
    if (d == 0 || d > 1'000'000) throw IoError(name + ": implausible layer width " + std::to_string(d));
    dims.push_back(static_cast<int>(d));
  }
  if (dims.front() != IegModel::kInputs || dims.back() != 1)
    throw IoError(name + ": layer dims must start at 6 and end at 1");
  std::size_t expected = r.position();
  for (int l = 0; l < layers; ++l) {
    expected += (static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1]) * sizeof(double);
  }
  expected += 12 * sizeof(double);
  if (expected != body) {
    throw IoError(name + ": expected " + std::to_string(expected + 4) + " bytes, file has " +
                  std::to_string(bytes.size()));
  }
  if (crc_of(bytes.data(), body) != stored_crc) throw IoError(name + ": checksum mismatch");

  IegModel model(dims, static_cast<Activation>(tag), Normalization{});
  for (double& p : model.params()) p = r.get<double>("parameters");
  Normalization n;
  for (double& s : n.scale) s = r.get<double>("normalization");
  for (double& o : n.offset) o = r.get<double>("normalization");
  try {
    model.set_normalization(n);
  } catch (const InvalidArgument& e) {
    throw IoError(name + ": " + e.what());
  }
  return model;
}

}  // namespace ieg
