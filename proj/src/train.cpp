#include "ieg/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ieg/error.hpp"
#include "ieg/kernels.hpp"

namespace ieg {

AdamState AdamState::for_model(const IegModel& model, double lr, double beta1, double beta2,
                               double eps) {
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  s.m.assign(model.param_count(), 0.0);
  s.v.assign(model.param_count(), 0.0);
  return s;
}

void AdamState::apply(std::span<double> params, std::span<const double> grad) {
  if (m.size() != params.size() || v.size() != params.size() || grad.size() != params.size())
    throw InvalidArgument("Adam state does not match the parameter count");
  ++step;
  const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

std::vector<double> grad_weights(const IegModel& model, const TrainingSample& sample) {
  std::vector<double> grad(model.param_count(), 0.0);
  kernels::reference::squared_error_grad(model, sample.input, sample.target, 1.0, grad);
  return grad;
}

std::vector<double> grad_weights(const IegModel& model, std::span<const TrainingSample> batch) {
  std::vector<Input6> inputs(batch.size());
  std::vector<double> targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    inputs[i] = batch[i].input;
    targets[i] = batch[i].target;
  }
  std::vector<double> grad(model.param_count(), 0.0);
  kernels::mse_grad_batch(model, inputs, targets, grad);
  return grad;
}

TrainResult train(IegModel model, std::span<const TrainingSample> dataset, const TrainConfig& cfg,
                  AdamState& adam, const EpochCallback& on_epoch) {
  if (dataset.empty()) throw InvalidArgument("training dataset is empty");
  if (cfg.epochs < 0) throw InvalidArgument("epoch count must be non-negative");
  if (cfg.batch_size <= 0) throw InvalidArgument("batch size must be positive");
  if (adam.m.size() != model.param_count()) {
    adam = AdamState::for_model(model, adam.lr, adam.beta1, adam.beta2, adam.eps);
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<Input6> inputs(batch);
  std::vector<double> targets(batch);
  std::vector<double> grad(model.param_count());

  TrainResult result{std::move(model), {}};
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t count = std::min(batch, order.size() - begin);
      for (std::size_t i = 0; i < count; ++i) {
        inputs[i] = dataset[order[begin + i]].input;
        targets[i] = dataset[order[begin + i]].target;
      }
      const double batch_loss = kernels::mse_grad_batch(
          result.model, std::span(inputs).first(count), std::span(targets).first(count), grad);
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("non-finite training loss in epoch " + std::to_string(epoch + 1) +
                             " at sample " + std::to_string(begin) + " (Adam step " +
                             std::to_string(adam.step) + ", lr " + std::to_string(adam.lr) + ")");
      }
      loss_sum += batch_loss;
      adam.apply(result.model.params(), grad);
    }
    const double mean = loss_sum / static_cast<double>(dataset.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

}  // namespace ieg
