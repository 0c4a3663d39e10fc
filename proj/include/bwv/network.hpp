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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bwv/layers.hpp"
#include "bwv/tensor.hpp"

namespace bwv {

enum class LayerKind {
  Input,
  Convolution,
  Normalization,
  Custom,  // the ReLU-family activation layer
  MaxPooling,
  FullyConnected,
  Softmax,
  Classification,
};

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(std::string_view token);

std::string_view to_string(nn::ActivationKind kind);
// "relu", "leakyrelu", "prelu" (case-insensitive)
std::optional<nn::ActivationKind> parse_activation(std::string_view token);

// One row of the architecture table. Fields that do not apply to a layer
// kind are zero.
struct LayerSpec {
  LayerKind kind = LayerKind::Input;
  nn::Extent2 kernel{0, 0};
  std::size_t filters = 0;  // conv filters, activation channels, FC neurons
  nn::Extent2 dilation{0, 0};
  bool same_padding = false;
  nn::Extent2 stride{0, 0};

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  std::size_t input_height = 256;
  std::size_t input_width = 256;
  std::size_t input_channels = 3;
  nn::ActivationKind activation = nn::ActivationKind::PReLU;
  std::vector<LayerSpec> layers;

  // The 31-layer BWV classifier: seven conv / normalization / activation
  // groups, six of them followed by max pooling, then FC, softmax and the
  // classification output.
  static NetworkSpec standard(nn::ActivationKind activation);

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct InitOptions {
  float prelu_initial_slope = 0.25f;
  float bn_epsilon = 1e-5f;
  float bn_momentum = 0.1f;
};

struct NamedTensor {
  std::string name;
  Tensor* tensor;
  bool learnable;
};

struct NamedConstTensor {
  std::string name;
  const Tensor* tensor;
  bool learnable;
};

class Network {
 public:
  // He-style fan-in initialization from `seed`; zero biases, unit gamma,
  // zero beta, PReLU slopes at InitOptions::prelu_initial_slope.
  static Network build(nn::ActivationKind activation, std::uint64_t seed,
                       const InitOptions& options = {});
  static Network build(const NetworkSpec& spec, std::uint64_t seed,
                       const InitOptions& options = {});

  const NetworkSpec& spec() const { return spec_; }

  // Class probabilities [N, 2] for a [N, 3, H, W] batch. Train mode
  // normalizes with batch statistics and updates the running statistics.
  Tensor forward(const Tensor& batch, nn::Mode mode);

  // Infer-mode forward; never mutates the network.
  Tensor predict(const Tensor& batch) const;

  // Output shape of every layer (input row included) for an infer-mode pass.
  std::vector<Shape> trace(const Tensor& batch) const;

  struct StepResult {
    double loss = 0;
    Tensor probs;
  };

  // Train-mode forward, mean cross-entropy and backward pass. `grads`
  // receives one tensor per learnable() entry, in the same order.
  StepResult forward_backward(const Tensor& batch, std::span<const int> labels,
                              std::vector<Tensor>& grads);

  // Every persisted tensor (learnable parameters and running statistics) in
  // layer order.
  std::vector<NamedTensor> tensors();
  std::vector<NamedConstTensor> tensors() const;
  std::vector<NamedTensor> learnable();
  std::size_t learnable_parameter_count() const;

  float bn_epsilon() const { return options_.bn_epsilon; }
  float bn_momentum() const { return options_.bn_momentum; }

  // Two-part container: JSON header then little-endian float32 blob.
  void save(const std::filesystem::path& path) const;
  static Network load(const std::filesystem::path& path);

  friend bool operator==(const Network& a, const Network& b);

 private:
  using Slot = std::variant<std::monostate, nn::ConvParams<float>, nn::BatchNormParams<float>,
                            nn::ActivationParams<float>, nn::DenseParams<float>>;
  struct Cache;

  Network(NetworkSpec spec, InitOptions options) : spec_(std::move(spec)), options_(options) {}

  template <typename Self>
  static Tensor run(Self& self, const Tensor& batch, nn::Mode mode, Cache* cache,
                    std::vector<Shape>* trace);

  template <typename Self, typename Ref>
  static std::vector<Ref> collect(Self& self, bool learnable_only);

  void check_input(const Tensor& batch) const;

  NetworkSpec spec_;
  InitOptions options_;
  std::vector<Slot> slots_;
};

}  // namespace bwv
