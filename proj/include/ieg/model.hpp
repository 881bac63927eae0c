#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ieg/synth.hpp"

namespace ieg {

// Odd, bounded, smooth activations used on hidden layers and the output.
enum class Activation : std::uint8_t {
  kTanh = 0,
  kAlgebraic = 1,  // z / sqrt(1 + z^2)
};

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Per-coordinate affine map to [-1, 1]: u = (x - offset) / scale.
struct Normalization {
  Input6 scale{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  Input6 offset{};

  // Midpoint / half-range of each coordinate over the samples.
  static Normalization from_samples(std::span<const TrainingSample> samples);

  double lower(int i) const { return offset[i] - scale[i]; }
  double upper(int i) const { return offset[i] + scale[i]; }
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct Architecture {
  int hidden_layers = 4;
  int hidden_width = 128;
  Activation activation = Activation::kAlgebraic;
};

// MLP from the 6-D input (x, y, t, vx, vy, omega) to an intensity change in
// (-1, 1). Parameters live in one flat vector: per layer the row-major
// (out x in) weight matrix followed by the bias.
class IegModel {
 public:
  static constexpr int kInputs = 6;

  IegModel(std::vector<int> dims, Activation activation, Normalization normalization);

  // Symmetric uniform init with bound sqrt(3 / fan_in), seeded.
  static IegModel create(const Architecture& arch, const Normalization& normalization,
                         std::uint64_t seed);

  const std::vector<int>& dims() const { return dims_; }
  int layer_count() const { return static_cast<int>(dims_.size()) - 1; }
  int max_width() const;
  Activation activation() const { return activation_; }
  const Normalization& normalization() const { return normalization_; }
  void set_normalization(const Normalization& n);

  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(dims_[layer]) * dims_[layer + 1];
  }
  const double* weights(int layer) const { return params_.data() + weight_offset(layer); }
  const double* bias(int layer) const { return params_.data() + bias_offset(layer); }
  double* weights(int layer) { return params_.data() + weight_offset(layer); }
  double* bias(int layer) { return params_.data() + bias_offset(layer); }

  friend bool operator==(const IegModel&, const IegModel&) = default;

 private:
  std::vector<int> dims_;
  Activation activation_;
  Normalization normalization_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

// Single-sample inference and its gradient w.r.t. the raw 6-D input.
double forward(const IegModel& model, const Input6& input);
std::vector<double> forward_batch(const IegModel& model, std::span<const Input6> inputs);
Input6 grad_input(const IegModel& model, const Input6& input);

// Model file: "IEGM", u32 version, u8 activation, u8 layer count, u32 dims,
// f64 weights and biases, 12 f64 normalization (scale then offset), CRC32.
inline constexpr std::uint32_t kModelVersion = 1;
void save_model(const IegModel& model, const std::filesystem::path& path);
IegModel load_model(const std::filesystem::path& path);

}  // namespace ieg
