#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ieg/model.hpp"

namespace ieg {

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  // Zero moments sized for `model`.
  static AdamState for_model(const IegModel& model, double lr = 1e-4, double beta1 = 0.9,
                             double beta2 = 0.999, double eps = 1e-8);

  // One bias-corrected Adam update of `params` along `grad`.
  void apply(std::span<double> params, std::span<const double> grad);
};

// d/d(params) of (forward(model, x) - target)^2 for one sample.
std::vector<double> grad_weights(const IegModel& model, const TrainingSample& sample);

// Mean of grad_weights over the batch.
std::vector<double> grad_weights(const IegModel& model, std::span<const TrainingSample> batch);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 64;
  std::uint64_t seed = 1;
};

struct TrainResult {
  IegModel model;
  std::vector<double> epoch_loss;  // mean squared error seen during each epoch
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Minibatch Adam on the mean squared error, reshuffling every epoch.
TrainResult train(IegModel model, std::span<const TrainingSample> dataset,
                  const TrainConfig& cfg, AdamState& adam, const EpochCallback& on_epoch = {});

}  // namespace ieg
