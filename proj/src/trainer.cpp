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

#include "bwv/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

namespace bwv {

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw InvalidInput("train: learning rate must be positive");
  if (!(momentum >= 0 && momentum < 1)) throw InvalidInput("train: momentum must lie in [0, 1)");
  if (max_epochs == 0) throw InvalidInput("train: max_epochs must be positive");
  if (batch_size == 0) throw InvalidInput("train: batch size must be positive");
  if (validation_every == 0) throw InvalidInput("train: validation frequency must be positive");
}

SgdmOptimizer::SgdmOptimizer(Network& net, double learning_rate, double momentum)
    : learning_rate_(learning_rate), momentum_(momentum) {
  for (const auto& p : net.learnable()) velocity_.emplace_back(p.tensor->shape());
}

void SgdmOptimizer::step(Network& net, const std::vector<Tensor>& grads) {
  auto params = net.learnable();
  if (grads.size() != params.size() || velocity_.size() != params.size()) {
    throw InvalidInput("sgdm: gradient list does not match the network parameters");
  }
  // Check everything before touching any parameter.
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].all_finite()) throw NumericError("non-finite gradient for '" + params[i].name + "'");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    sgdm_step<float>(params[i].tensor->data(), grads[i].data(), velocity_[i].data(),
                     learning_rate_, momentum_, params[i].name);
    if (!params[i].tensor->all_finite()) {
      throw NumericError("parameter '" + params[i].name + "' became non-finite");
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Fold> folds_from_units(const std::vector<std::vector<std::size_t>>& units,
                                   std::size_t fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw InvalidInput("kfold_split: fold_count must be >= 2");
  if (units.size() < fold_count) {
    throw InvalidInput("kfold_split: " + std::to_string(units.size()) +
                       " items cannot fill " + std::to_string(fold_count) + " folds");
  }
  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n = units.size();
  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < fold_count; ++k) {
    for (std::size_t pos = k * n / fold_count; pos < (k + 1) * n / fold_count; ++pos) {
      fold_of[order[pos]] = k;
    }
  }
  std::vector<Fold> folds(fold_count);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t k = 0; k < fold_count; ++k) {
      auto& dst = k == fold_of[u] ? folds[k].validation : folds[k].train;
      dst.insert(dst.end(), units[u].begin(), units[u].end());
    }
  }
  for (auto& f : folds) {
    std::sort(f.train.begin(), f.train.end());
    std::sort(f.validation.begin(), f.validation.end());
  }
  return folds;
}

}  // namespace

std::vector<Fold> kfold_split(std::size_t item_count, std::size_t fold_count, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> units(item_count);
  for (std::size_t i = 0; i < item_count; ++i) units[i] = {i};
  return folds_from_units(units, fold_count, seed);
}

std::vector<Fold> kfold_split(std::span<const std::string> group_keys, std::size_t fold_count,
                              std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> units;
  std::map<std::string, std::size_t> unit_of;
  for (std::size_t i = 0; i < group_keys.size(); ++i) {
    const auto [it, inserted] = unit_of.emplace(group_keys[i], units.size());
    if (inserted) units.emplace_back();
    units[it->second].push_back(i);
  }
  return folds_from_units(units, fold_count, seed);
}

// ---------------------------------------------------------------------------

SampleSet SampleSet::subset(std::span<const std::size_t> indices) const {
  SampleSet out;
  std::vector<std::size_t> mapping(indices.begin(), indices.end());
  for (std::size_t i : mapping) out.labels.push_back(labels.at(i));
  out.load = [parent = load, mapping](std::span<const std::size_t> batch) {
    std::vector<std::size_t> translated;
    translated.reserve(batch.size());
    for (std::size_t i : batch) translated.push_back(mapping.at(i));
    return parent(translated);
  };
  return out;
}

SampleSet in_memory_samples(Tensor images, std::vector<Label> labels) {
  if (images.rank() != 4 || images.dim(0) != labels.size()) {
    throw InvalidInput("in_memory_samples: need one label per image");
  }
  SampleSet out;
  out.labels = std::move(labels);
  out.load = [images = std::move(images)](std::span<const std::size_t> batch) {
    const std::size_t per = images.size() / images.dim(0);
    Tensor t({batch.size(), images.dim(1), images.dim(2), images.dim(3)});
    for (std::size_t b = 0; b < batch.size(); ++b) {
      std::copy_n(images.raw() + batch[b] * per, per, t.raw() + b * per);
    }
    return t;
  };
  return out;
}

SampleSet manifest_samples(const DatasetManifest& manifest) {
  SampleSet out;
  for (const auto& e : manifest.entries) out.labels.push_back(e.label);
  out.load = [entries = manifest.entries](std::span<const std::size_t> batch) {
    std::vector<ManifestEntry> picked;
    picked.reserve(batch.size());
    for (std::size_t i : batch) picked.push_back(entries.at(i));
    return load_batch(picked);
  };
  return out;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::None: return "none";
    case StopReason::EpochCap: return "epoch_cap";
    case StopReason::IterationCap: return "iteration_cap";
  }
  return "?";
}

// ---------------------------------------------------------------------------

std::pair<std::size_t, StopReason> planned_iterations(std::size_t train_size,
                                                      const TrainConfig& cfg) {
  if (train_size == 0 || cfg.max_iterations == 0) return {0, StopReason::None};
  const std::size_t per_epoch = (train_size + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t epoch_cap = cfg.max_epochs * per_epoch;
  if (cfg.max_iterations <= epoch_cap) return {cfg.max_iterations, StopReason::IterationCap};
  return {epoch_cap, StopReason::EpochCap};
}

TrainHistory run_schedule(std::size_t train_size, const TrainConfig& cfg,
                          const ScheduleHooks& hooks) {
  cfg.validate();
  TrainHistory history;
  const auto [total, reason] = planned_iterations(train_size, cfg);
  if (total == 0) return history;
  history.stop = reason;

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_size);
  std::iota(order.begin(), order.end(), 0);

  std::size_t iteration = 0;
  for (std::size_t epoch = 1; iteration < total; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t pos = 0; pos < train_size && iteration < total; pos += cfg.batch_size) {
      const std::size_t end = std::min(pos + cfg.batch_size, train_size);
      IterationRecord rec;
      rec.train_loss = hooks.step(std::span<const std::size_t>(order).subspan(pos, end - pos));
      rec.iteration = ++iteration;
      rec.epoch = epoch;
      if (iteration % cfg.validation_every == 0 || iteration == total) {
        const auto [loss, accuracy] = hooks.validate();
        rec.val_loss = loss;
        rec.val_accuracy = accuracy;
        history.validation_iterations.push_back(iteration);
      }
      rec.elapsed_ms = elapsed_ms();
      history.iterations.push_back(rec);
    }
  }
  history.wall_ms = elapsed_ms();
  return history;
}

Evaluation evaluate(const Network& net, const SampleSet& samples, std::size_t batch_size) {
  if (samples.size() == 0) throw InvalidInput("evaluate: empty sample set");
  Evaluation ev;
  double loss_sum = 0;
  std::vector<std::size_t> idx;
  for (std::size_t pos = 0; pos < samples.size(); pos += batch_size) {
    const std::size_t end = std::min(pos + batch_size, samples.size());
    idx.resize(end - pos);
    std::iota(idx.begin(), idx.end(), pos);
    const Tensor probs = net.predict(samples.load(idx));
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const float p_bwv = probs[b * kClassCount + class_index(Label::Bwv)];
      const float p_non = probs[b * kClassCount + class_index(Label::NonBwv)];
      ev.predicted.push_back(p_bwv >= p_non ? Label::Bwv : Label::NonBwv);
      ev.bwv_scores.push_back(p_bwv);
      const float p_true = samples.labels[idx[b]] == Label::Bwv ? p_bwv : p_non;
      loss_sum += -std::log(std::max(static_cast<double>(p_true), 1e-300));
    }
  }
  ev.loss = loss_sum / static_cast<double>(samples.size());
  ev.confusion = tally(ev.predicted, samples.labels);
  ev.accuracy = static_cast<double>(ev.confusion.tp + ev.confusion.tn) /
                static_cast<double>(samples.size());
  return ev;
}

TrainResult train(Network net, const SampleSet& train_set, const SampleSet& val_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.max_iterations == 0) return {net, net, {}, 0.0};
  if (train_set.size() == 0 || val_set.size() == 0) {
    throw InvalidInput("train: training and validation sets must be nonempty");
  }

  SgdmOptimizer optimizer(net, cfg.learning_rate, cfg.momentum);
  std::optional<Network> best;
  double best_accuracy = -1;
  std::vector<Tensor> grads;
  std::vector<int> labels;
  std::size_t iteration = 0;

  ScheduleHooks hooks;
  hooks.step = [&](std::span<const std::size_t> batch) {
    ++iteration;
    labels.clear();
    for (std::size_t i : batch) labels.push_back(class_index(train_set.labels[i]));
    try {
      const auto result = net.forward_backward(train_set.load(batch), labels, grads);
      optimizer.step(net, grads);
      return result.loss;
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(iteration) + ": " + e.what());
    }
  };
  hooks.validate = [&]() {
    const Evaluation ev = evaluate(net, val_set, cfg.batch_size);
    if (ev.accuracy > best_accuracy) {
      best_accuracy = ev.accuracy;
      best = net;
    }
    return std::pair{ev.loss, ev.accuracy};
  };

  TrainHistory history = run_schedule(train_set.size(), cfg, hooks);
  return {best ? std::move(*best) : net, std::move(net), std::move(history),
          std::max(best_accuracy, 0.0)};
}

CrossValidationResult cross_validate(nn::ActivationKind activation, const SampleSet& pool,
                                     std::span<const std::string> group_keys,
                                     const TrainConfig& cfg) {
  cfg.validate();
  const auto folds = group_keys.empty() ? kfold_split(pool.size(), cfg.fold_count, cfg.seed)
                                        : kfold_split(group_keys, cfg.fold_count, cfg.seed);
  CrossValidationResult result;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + k;
    result.folds.push_back(train(Network::build(activation, cfg.seed), pool.subset(folds[k].train),
                                 pool.subset(folds[k].validation), fold_cfg));
    if (result.folds[k].best_val_accuracy > result.folds[result.best_fold].best_val_accuracy) {
      result.best_fold = k;
    }
  }
  return result;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write history: " + path.string());
  out << "iteration,epoch,train_loss,val_loss,val_accuracy,elapsed_ms\n";
  char buf[256];
  for (const auto& r : history.iterations) {
    std::string val_loss, val_acc;
    if (r.val_loss) {
      std::snprintf(buf, sizeof buf, "%.9g", *r.val_loss);
      val_loss = buf;
      std::snprintf(buf, sizeof buf, "%.9g", *r.val_accuracy);
      val_acc = buf;
    }
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.9g,%s,%s,%.3f\n", r.iteration, r.epoch, r.train_loss,
                  val_loss.c_str(), val_acc.c_str(), r.elapsed_ms);
    out << buf;
  }
  if (!out) throw DataError("failed writing history: " + path.string());
}

}  // namespace bwv
