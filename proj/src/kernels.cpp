#include "ieg/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <cstring>

namespace ieg::kernels {

namespace reference {

namespace {

struct Trace {
  std::vector<std::vector<double>> act;    // act[0] = normalized input
  std::vector<std::vector<double>> slope;  // slope[l] for l >= 1
};

double run_forward(const IegModel& model, const Input6& input, Trace& trace) {
  const auto& dims = model.dims();
  const int layers = model.layer_count();
  trace.act.assign(layers + 1, {});
  trace.slope.assign(layers + 1, {});
  trace.act[0].resize(IegModel::kInputs);
  for (int i = 0; i < IegModel::kInputs; ++i) {
    trace.act[0][i] = normalize(model.normalization(), i, input[i]);
  }
  for (int l = 0; l < layers; ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    const double* w = model.weights(l);
    const double* b = model.bias(l);
    trace.act[l + 1].resize(out);
    trace.slope[l + 1].resize(out);
    for (int j = 0; j < out; ++j) {
      double acc = b[j];
      for (int k = 0; k < in; ++k) acc = std::fma(w[j * in + k], trace.act[l][k], acc);
      activate(model.activation(), acc, trace.act[l + 1][j], trace.slope[l + 1][j]);
    }
  }
  return trace.act[layers][0];
}

// delta_in[k] = sum_j w[j][k] * delta_out[j]
std::vector<double> back_through(const IegModel& model, int l, const std::vector<double>& delta_out) {
  const int in = model.dims()[l];
  const int out = model.dims()[l + 1];
  const double* w = model.weights(l);
  std::vector<double> delta_in(in);
  for (int k = 0; k < in; ++k) {
    double acc = 0.0;
    for (int j = 0; j < out; ++j) acc = std::fma(w[j * in + k], delta_out[j], acc);
    delta_in[k] = acc;
  }
  return delta_in;
}

}  // namespace

double forward(const IegModel& model, const Input6& input) {
  Trace trace;
  return run_forward(model, input, trace);
}

double forward_input_grad(const IegModel& model, const Input6& input, Input6& grad) {
  Trace trace;
  const double y = run_forward(model, input, trace);
  const int layers = model.layer_count();
  std::vector<double> delta{trace.slope[layers][0]};
  for (int l = layers - 1; l >= 0; --l) {
    delta = back_through(model, l, delta);
    if (l > 0) {
      for (std::size_t k = 0; k < delta.size(); ++k) delta[k] *= trace.slope[l][k];
    }
  }
  for (int i = 0; i < IegModel::kInputs; ++i) grad[i] = delta[i] / model.normalization().scale[i];
  return y;
}

double squared_error_grad(const IegModel& model, const Input6& input, double target,
                          double scale, std::span<double> grad) {
  Trace trace;
  const double y = run_forward(model, input, trace);
  const double residual = y - target;
  const int layers = model.layer_count();
  std::vector<double> delta{scale * (2.0 * residual) * trace.slope[layers][0]};
  for (int l = layers - 1; l >= 0; --l) {
    const int in = model.dims()[l];
    const int out = model.dims()[l + 1];
    double* gw = grad.data() + model.weight_offset(l);
    double* gb = grad.data() + model.bias_offset(l);
    for (int j = 0; j < out; ++j) {
      for (int k = 0; k < in; ++k) gw[j * in + k] = std::fma(delta[j], trace.act[l][k], gw[j * in + k]);
      gb[j] += delta[j];
    }
    if (l > 0) {
      delta = back_through(model, l, delta);
      for (std::size_t k = 0; k < delta.size(); ++k) delta[k] *= trace.slope[l][k];
    }
  }
  return residual * residual;
}

}  // namespace reference

Workspace::Workspace(const IegModel& model) {
  const auto& dims = model.dims();
  act_.resize(dims.size());
  slope_.resize(dims.size());
  for (std::size_t l = 0; l < dims.size(); ++l) {
    act_[l].assign(static_cast<std::size_t>(dims[l]) * kBlock, 0.0);
    slope_[l].assign(static_cast<std::size_t>(dims[l]) * kBlock, 0.0);
  }
  const auto width = static_cast<std::size_t>(model.max_width()) * kBlock;
  delta_[0].assign(width, 0.0);
  delta_[1].assign(width, 0.0);
  transposed_.assign(width, 0.0);
}

namespace {

// y[r][s] = init_r + sum_c m(r, c) * x[c][s], with m(r, c) = m[r * rs + c * cs]
// and the sum taken as an fma chain over ascending c. Four rows at a time.
void matmul_block(const double* m, int rows, int cols, std::ptrdiff_t rs, std::ptrdiff_t cs,
                  const double* init, const double* x, double* y) {
  int r = 0;
  for (; r + 4 <= rows; r += 4) {
    alignas(64) double acc0[kBlock];
    alignas(64) double acc1[kBlock];
    alignas(64) double acc2[kBlock];
    alignas(64) double acc3[kBlock];
    const double i0 = init ? init[r] : 0.0;
    const double i1 = init ? init[r + 1] : 0.0;
    const double i2 = init ? init[r + 2] : 0.0;
    const double i3 = init ? init[r + 3] : 0.0;
    for (int s = 0; s < kBlock; ++s) {
      acc0[s] = i0;
      acc1[s] = i1;
      acc2[s] = i2;
      acc3[s] = i3;
    }
    const double* m0 = m + r * rs;
    for (int c = 0; c < cols; ++c) {
      const double c0 = m0[c * cs];
      const double c1 = m0[rs + c * cs];
      const double c2 = m0[2 * rs + c * cs];
      const double c3 = m0[3 * rs + c * cs];
      const double* xc = x + static_cast<std::ptrdiff_t>(c) * kBlock;
#pragma GCC unroll 32
      for (int s = 0; s < kBlock; ++s) {
        const double v = xc[s];
        acc0[s] = std::fma(c0, v, acc0[s]);
        acc1[s] = std::fma(c1, v, acc1[s]);
        acc2[s] = std::fma(c2, v, acc2[s]);
        acc3[s] = std::fma(c3, v, acc3[s]);
      }
    }
    std::memcpy(y + static_cast<std::ptrdiff_t>(r) * kBlock, acc0, sizeof acc0);
    std::memcpy(y + static_cast<std::ptrdiff_t>(r + 1) * kBlock, acc1, sizeof acc1);
    std::memcpy(y + static_cast<std::ptrdiff_t>(r + 2) * kBlock, acc2, sizeof acc2);
    std::memcpy(y + static_cast<std::ptrdiff_t>(r + 3) * kBlock, acc3, sizeof acc3);
  }
  for (; r < rows; ++r) {
    alignas(64) double acc[kBlock];
    const double i0 = init ? init[r] : 0.0;
    for (int s = 0; s < kBlock; ++s) acc[s] = i0;
    for (int c = 0; c < cols; ++c) {
      const double coef = m[r * rs + c * cs];
      const double* xc = x + static_cast<std::ptrdiff_t>(c) * kBlock;
      for (int s = 0; s < kBlock; ++s) acc[s] = std::fma(coef, xc[s], acc[s]);
    }
    std::memcpy(y + static_cast<std::ptrdiff_t>(r) * kBlock, acc, sizeof acc);
  }
}

void activate_block(Activation a, double* z, double* slope, int rows) {
  const int n = rows * kBlock;
  if (a == Activation::kAlgebraic) {
    for (int i = 0; i < n; ++i) {
      const double r = 1.0 / std::sqrt(1.0 + z[i] * z[i]);
      slope[i] = r * r * r;
      z[i] = z[i] * r;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double v = std::tanh(z[i]);
      slope[i] = 1.0 - v * v;
      z[i] = v;
    }
  }
}

// Backpropagates `delta_out` (rows of layer l+1) through the weights of
// layer l into `delta_in`, then multiplies by that layer's slopes when l > 0.
void back_block(const IegModel& model, Workspace& ws, int l, const double* delta_out,
                double* delta_in) {
  const int in = model.dims()[l];
  const int out = model.dims()[l + 1];
  matmul_block(model.weights(l), in, out, 1, in, nullptr, delta_out, delta_in);
  if (l > 0) {
    const double* slope = ws.slope(l);
    const int n = in * kBlock;
    for (int i = 0; i < n; ++i) delta_in[i] *= slope[i];
  }
}

}  // namespace

void forward_block(const IegModel& model, const Input6* inputs, int count, Workspace& ws,
                   double* out) {
  const auto& dims = model.dims();
  const int layers = model.layer_count();
  double* a0 = ws.activation(0);
  for (int i = 0; i < IegModel::kInputs; ++i) {
    for (int s = 0; s < kBlock; ++s) {
      a0[i * kBlock + s] = s < count ? normalize(model.normalization(), i, inputs[s][i]) : 0.0;
    }
  }
  for (int l = 0; l < layers; ++l) {
    double* next = ws.activation(l + 1);
    matmul_block(model.weights(l), dims[l + 1], dims[l], dims[l], 1, model.bias(l),
                 ws.activation(l), next);
    activate_block(model.activation(), next, ws.slope(l + 1), dims[l + 1]);
  }
  const double* top = ws.activation(layers);
  for (int s = 0; s < count; ++s) out[s] = top[s];
}

void input_grad_block(const IegModel& model, Workspace& ws, const double* seed, int count,
                      Input6* grad) {
  const int layers = model.layer_count();
  double* cur = ws.delta(0);
  double* nxt = ws.delta(1);
  const double* top_slope = ws.slope(layers);
  for (int s = 0; s < kBlock; ++s) cur[s] = s < count ? seed[s] * top_slope[s] : 0.0;
  for (int l = layers - 1; l >= 0; --l) {
    back_block(model, ws, l, cur, nxt);
    std::swap(cur, nxt);
  }
  const auto& scale = model.normalization().scale;
  for (int s = 0; s < count; ++s) {
    for (int i = 0; i < IegModel::kInputs; ++i) grad[s][i] = cur[i * kBlock + s] / scale[i];
  }
}

void weight_grad_block(const IegModel& model, Workspace& ws, const double* seed, int count,
                       double* grad) {
  const int layers = model.layer_count();
  double* cur = ws.delta(0);
  double* nxt = ws.delta(1);
  const double* top_slope = ws.slope(layers);
  for (int s = 0; s < kBlock; ++s) cur[s] = s < count ? (seed[s] * top_slope[s]) : 0.0;
  double* at = ws.transposed();
  for (int l = layers - 1; l >= 0; --l) {
    const int in = model.dims()[l];
    const int out = model.dims()[l + 1];
    const double* a = ws.activation(l);
    for (int k = 0; k < in; ++k) {
      for (int s = 0; s < count; ++s) at[s * in + k] = a[k * kBlock + s];
    }
    double* gw = grad + model.weight_offset(l);
    double* gb = grad + model.bias_offset(l);
    for (int j = 0; j < out; ++j) {
      double* row = gw + static_cast<std::ptrdiff_t>(j) * in;
      const double* dj = cur + static_cast<std::ptrdiff_t>(j) * kBlock;
      for (int s = 0; s < count; ++s) {
        const double d = dj[s];
        const double* as = at + static_cast<std::ptrdiff_t>(s) * in;
        for (int k = 0; k < in; ++k) row[k] = std::fma(d, as[k], row[k]);
        gb[j] += d;
      }
    }
    if (l > 0) {
      back_block(model, ws, l, cur, nxt);
      std::swap(cur, nxt);
    }
  }
}

void forward_batch(const IegModel& model, std::span<const Input6> inputs, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(inputs.size());
  const std::int64_t blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel if (blocks > 1)
  {
    Workspace ws(model);
#pragma omp for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
      const std::int64_t begin = b * kBlock;
      const int count = static_cast<int>(std::min<std::int64_t>(kBlock, n - begin));
      forward_block(model, inputs.data() + begin, count, ws, out.data() + begin);
    }
  }
}

void forward_input_grad_batch(const IegModel& model, std::span<const Input6> inputs,
                              std::span<double> out, std::span<Input6> grad) {
  const auto n = static_cast<std::int64_t>(inputs.size());
  const std::int64_t blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel if (blocks > 1)
  {
    Workspace ws(model);
    double ones[kBlock];
    std::fill(ones, ones + kBlock, 1.0);
#pragma omp for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
      const std::int64_t begin = b * kBlock;
      const int count = static_cast<int>(std::min<std::int64_t>(kBlock, n - begin));
      forward_block(model, inputs.data() + begin, count, ws, out.data() + begin);
      input_grad_block(model, ws, ones, count, grad.data() + begin);
    }
  }
}

double mse_grad_batch(const IegModel& model, std::span<const Input6> inputs,
                      std::span<const double> targets, std::span<double> grad) {
  const auto n = static_cast<std::int64_t>(inputs.size());
  std::fill(grad.begin(), grad.end(), 0.0);
  if (n == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(n);
  const std::int64_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  // One partial per chunk so the reduction order does not depend on threads.
  std::vector<std::vector<double>> partial(chunks > 1 ? chunks : 0);
  std::vector<double> chunk_loss(chunks, 0.0);
#pragma omp parallel if (chunks > 1)
  {
    Workspace ws(model);
    double out[kBlock];
    double seed[kBlock];
#pragma omp for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
      double* g = grad.data();
      if (chunks > 1) {
        partial[c].assign(grad.size(), 0.0);
        g = partial[c].data();
      }
      const std::int64_t chunk_end = std::min(n, (c + 1) * kReduceChunk);
      double loss = 0.0;
      for (std::int64_t begin = c * kReduceChunk; begin < chunk_end; begin += kBlock) {
        const int count = static_cast<int>(std::min<std::int64_t>(kBlock, chunk_end - begin));
        forward_block(model, inputs.data() + begin, count, ws, out);
        for (int s = 0; s < count; ++s) {
          const double residual = out[s] - targets[begin + s];
          loss += residual * residual;
          seed[s] = scale * (2.0 * residual);
        }
        weight_grad_block(model, ws, seed, count, g);
      }
      chunk_loss[c] = loss;
    }
  }
  double total = 0.0;
  for (std::int64_t c = 0; c < chunks; ++c) {
    total += chunk_loss[c];
    if (chunks > 1) {
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += partial[c][i];
    }
  }
  return total;
}

}  // namespace ieg::kernels
