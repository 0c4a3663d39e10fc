// Copyright 2026 The bwv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bwv/dataset.hpp"
#include "bwv/error.hpp"
#include "bwv/label.hpp"
#include "bwv/metrics.hpp"
#include "bwv/network.hpp"

namespace bwv {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t max_epochs = 250;
  std::size_t max_iterations = 2250;
  std::size_t batch_size = 32;
  std::size_t validation_every = 25;
  std::uint64_t seed = 0;
  std::size_t fold_count = 5;

  void validate() const;
};

// velocity <- momentum * velocity + grad; param <- param - lr * velocity.
// Throws NumericError naming `name` if the gradient is not finite.
template <typename T>
void sgdm_step(std::span<T> param, std::span<const T> grad, std::span<T> velocity,
               double learning_rate, double momentum, std::string_view name = "parameter") {
  if (param.size() != grad.size() || param.size() != velocity.size()) {
    throw InvalidInput("sgdm_step: size mismatch for '" + std::string(name) + "'");
  }
  for (T g : grad) {
    if (!std::isfinite(g)) throw NumericError("non-finite gradient for '" + std::string(name) + "'");
  }
  const T lr = static_cast<T>(learning_rate);
  const T mu = static_cast<T>(momentum);
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = mu * velocity[i] + grad[i];
    param[i] -= lr * velocity[i];
  }
}

// One velocity buffer per learnable tensor of a network.
class SgdmOptimizer {
 public:
  SgdmOptimizer(Network& net, double learning_rate, double momentum);
  void step(Network& net, const std::vector<Tensor>& grads);

 private:
  double learning_rate_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded shuffle, then fold_count contiguous folds of near-equal size; fold i
// validates, the rest train. Throws InvalidInput for fold_count < 2 or fewer
// items than folds.
std::vector<Fold> kfold_split(std::size_t item_count, std::size_t fold_count, std::uint64_t seed);

// As above, but folds are formed over distinct keys, so items sharing a key
// (an image and its augmented copies) always land in the same fold.
std::vector<Fold> kfold_split(std::span<const std::string> group_keys, std::size_t fold_count,
                              std::uint64_t seed);

// Labeled images with on-demand batch loading.
struct SampleSet {
  std::vector<Label> labels;
  std::function<Tensor(std::span<const std::size_t>)> load;

  std::size_t size() const { return labels.size(); }
  SampleSet subset(std::span<const std::size_t> indices) const;
};

SampleSet in_memory_samples(Tensor images, std::vector<Label> labels);
SampleSet manifest_samples(const DatasetManifest& manifest);

enum class StopReason { None, EpochCap, IterationCap };

std::string_view to_string(StopReason reason);

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::size_t epoch = 0;      // 1-based
  double train_loss = 0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
  double elapsed_ms = 0;
};

struct TrainHistory {
  std::vector<IterationRecord> iterations;
  std::vector<std::size_t> validation_iterations;
  double wall_ms = 0;
  StopReason stop = StopReason::None;
};

// min(max_epochs * ceil(train_size / batch_size), max_iterations), and which
// cap binds.
std::pair<std::size_t, StopReason> planned_iterations(std::size_t train_size,
                                                      const TrainConfig& cfg);

struct ScheduleHooks {
  // Runs one optimization step on the given training indices; returns the loss.
  std::function<double(std::span<const std::size_t>)> step;
  // Returns validation (loss, accuracy).
  std::function<std::pair<double, double>()> validate;
};

// The epoch/iteration loop: per-epoch seeded reshuffle, mini-batches with
// the final partial batch kept, validation every validation_every iterations
// and once more at the end.
TrainHistory run_schedule(std::size_t train_size, const TrainConfig& cfg, const ScheduleHooks& hooks);

struct Evaluation {
  std::vector<Label> predicted;
  std::vector<double> bwv_scores;  // probability of the BWV class
  double loss = 0;
  double accuracy = 0;
  ConfusionMatrix confusion;
};

// Infer-mode pass over every sample.
Evaluation evaluate(const Network& net, const SampleSet& samples, std::size_t batch_size = 32);

struct TrainResult {
  Network best;   // snapshot with the highest validation accuracy (earliest on ties)
  Network final;
  TrainHistory history;
  double best_val_accuracy = 0;
};

TrainResult train(Network net, const SampleSet& train_set, const SampleSet& val_set,
                  const TrainConfig& cfg);

struct CrossValidationResult {
  std::vector<TrainResult> folds;
  std::size_t best_fold = 0;
};

// Standard k-fold cross-validation over `pool`; every fold starts from a
// network built with (activation, cfg.seed). `group_keys`, if non-empty,
// keeps related samples in one fold.
CrossValidationResult cross_validate(nn::ActivationKind activation, const SampleSet& pool,
                                     std::span<const std::string> group_keys,
                                     const TrainConfig& cfg);

// CSV: iteration,epoch,train_loss,val_loss,val_accuracy,elapsed_ms
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace bwv
