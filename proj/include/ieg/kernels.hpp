#pragma once

// Inference and backpropagation kernels for IegModel.
//
// Two implementations share one arithmetic contract: every dot product is an
// std::fma chain in ascending index order starting from the bias (forward) or
// from 0.0 (backward), and weight gradients accumulate samples in order. The
// serial `reference` functions spell this out one sample at a time; the
// blocked kernels evaluate kBlock samples side by side with the same rounding,
// so their results are bitwise equal. The batch drivers parallelize over
// blocks with OpenMP and reduce in a fixed order, independent of the number
// of threads.

#include <cmath>
#include <span>
#include <vector>

#include "ieg/model.hpp"

namespace ieg::kernels {

inline constexpr int kBlock = 32;
// Samples per partial sum in batched weight gradients.
inline constexpr int kReduceChunk = 8 * kBlock;

inline void activate(Activation a, double z, double& value, double& slope) {
  if (a == Activation::kAlgebraic) {
    const double r = 1.0 / std::sqrt(1.0 + z * z);
    value = z * r;
    slope = r * r * r;
  } else {
    value = std::tanh(z);
    slope = 1.0 - value * value;
  }
}

inline double normalize(const Normalization& n, int i, double x) {
  return (x - n.offset[i]) / n.scale[i];
}

namespace reference {

double forward(const IegModel& model, const Input6& input);

// Output and d(output)/d(input).
double forward_input_grad(const IegModel& model, const Input6& input, Input6& grad);

// Adds scale * d((y - target)^2)/d(params) to `grad`; returns (y - target)^2.
double squared_error_grad(const IegModel& model, const Input6& input, double target,
                          double scale, std::span<double> grad);

}  // namespace reference

// Scratch buffers for one block of samples, feature-major ([feature][lane]).
class Workspace {
 public:
  explicit Workspace(const IegModel& model);

  double* activation(int layer) { return act_[layer].data(); }
  double* slope(int layer) { return slope_[layer].data(); }
  double* delta(int which) { return delta_[which].data(); }
  double* transposed() { return transposed_.data(); }

 private:
  std::vector<std::vector<double>> act_;
  std::vector<std::vector<double>> slope_;
  std::vector<double> delta_[2];
  std::vector<double> transposed_;
};

// Forward pass of up to kBlock samples; keeps activations in `ws`.
void forward_block(const IegModel& model, const Input6* inputs, int count, Workspace& ws,
                   double* out);

// After forward_block: grad[s] = seed[s] * d(output_s)/d(input_s).
void input_grad_block(const IegModel& model, Workspace& ws, const double* seed, int count,
                      Input6* grad);

// After forward_block: grad += sum_s seed[s] * d(output_s)/d(params).
void weight_grad_block(const IegModel& model, Workspace& ws, const double* seed, int count,
                       double* grad);

// Parallel drivers.
void forward_batch(const IegModel& model, std::span<const Input6> inputs, std::span<double> out);

void forward_input_grad_batch(const IegModel& model, std::span<const Input6> inputs,
                              std::span<double> out, std::span<Input6> grad);

// grad = (1/n) sum_i d((y_i - t_i)^2)/d(params); returns sum_i (y_i - t_i)^2.
double mse_grad_batch(const IegModel& model, std::span<const Input6> inputs,
                      std::span<const double> targets, std::span<double> grad);

}  // namespace ieg::kernels
