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

#include "bwv/network.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "bwv/error.hpp"
#include "bwv/label.hpp"

namespace bwv {

using nn::ActivationKind;
using nn::Extent2;
using nn::Mode;

namespace {

constexpr char kMagic[8] = {'B', 'W', 'V', 'N', 'E', 'T', '\0', '\0'};
constexpr int kFormatVersion = 1;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Input: return "input";
    case LayerKind::Convolution: return "convolution";
    case LayerKind::Normalization: return "normalization";
    case LayerKind::Custom: return "custom";
    case LayerKind::MaxPooling: return "max_pooling";
    case LayerKind::FullyConnected: return "fully_connected";
    case LayerKind::Softmax: return "softmax";
    case LayerKind::Classification: return "classification";
  }
  return "?";
}

std::optional<LayerKind> parse_layer_kind(std::string_view token) {
  for (auto kind : {LayerKind::Input, LayerKind::Convolution, LayerKind::Normalization,
                    LayerKind::Custom, LayerKind::MaxPooling, LayerKind::FullyConnected,
                    LayerKind::Softmax, LayerKind::Classification}) {
    if (to_string(kind) == token) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::LeakyReLU: return "leakyrelu";
    case ActivationKind::PReLU: return "prelu";
  }
  return "?";
}

std::optional<ActivationKind> parse_activation(std::string_view token) {
  const std::string t = lower(token);
  if (t == "relu") return ActivationKind::ReLU;
  if (t == "leakyrelu") return ActivationKind::LeakyReLU;
  if (t == "prelu") return ActivationKind::PReLU;
  return std::nullopt;
}

NetworkSpec NetworkSpec::standard(ActivationKind activation) {
  struct Group {
    std::size_t conv_kernel, filters, dilation, conv_stride;
    std::size_t pool_kernel, pool_stride;  // pool_kernel 0: no pooling
  };
  constexpr Group groups[] = {
      {5, 8, 2, 2, 5, 2},   {3, 16, 3, 3, 3, 3},  {5, 32, 2, 2, 5, 2},   {3, 64, 1, 1, 3, 1},
      {5, 128, 2, 2, 5, 2}, {3, 256, 1, 1, 3, 1}, {5, 512, 3, 3, 0, 0},
  };
  NetworkSpec spec;
  spec.activation = activation;
  spec.layers.push_back({LayerKind::Input});
  for (const Group& g : groups) {
    spec.layers.push_back({LayerKind::Convolution, {g.conv_kernel, g.conv_kernel}, g.filters,
                           {g.dilation, g.dilation}, true, {g.conv_stride, g.conv_stride}});
    spec.layers.push_back({LayerKind::Normalization});
    spec.layers.push_back({LayerKind::Custom, {0, 0}, g.filters});
    if (g.pool_kernel != 0) {
      spec.layers.push_back({LayerKind::MaxPooling, {g.pool_kernel, g.pool_kernel}, 0, {0, 0},
                             true, {g.pool_stride, g.pool_stride}});
    }
  }
  spec.layers.push_back({LayerKind::FullyConnected, {0, 0}, kClassCount});
  spec.layers.push_back({LayerKind::Softmax});
  spec.layers.push_back({LayerKind::Classification});
  return spec;
}

// ---------------------------------------------------------------------------
// Construction

Network Network::build(ActivationKind activation, std::uint64_t seed,
                       const InitOptions& options) {
  return build(NetworkSpec::standard(activation), seed, options);
}

Network Network::build(const NetworkSpec& spec, std::uint64_t seed, const InitOptions& options) {
  const auto& layers = spec.layers;
  if (layers.size() < 4 || layers.front().kind != LayerKind::Input ||
      layers[layers.size() - 1].kind != LayerKind::Classification ||
      layers[layers.size() - 2].kind != LayerKind::Softmax ||
      layers[layers.size() - 3].kind != LayerKind::FullyConnected) {
    throw InvalidInput("network spec must start with input and end with FC, softmax, "
                       "classification");
  }
  if (spec.input_channels == 0 || spec.input_height == 0 || spec.input_width == 0) {
    throw InvalidInput("network spec: input extents must be positive");
  }

  Network net(spec, options);
  std::mt19937_64 rng(seed);
  auto he_normal = [&rng](Tensor& t, std::size_t fan_in) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (float& v : t.data()) v = static_cast<float>(dist(rng));
  };

  std::size_t channels = spec.input_channels;
  std::size_t height = spec.input_height;
  std::size_t width = spec.input_width;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    Slot slot;
    switch (l.kind) {
      case LayerKind::Input:
        if (i != 0) throw InvalidInput("network spec: input layer must come first");
        break;
      case LayerKind::Convolution: {
        if (l.filters == 0 || l.kernel.h == 0 || l.kernel.w == 0 || l.stride.h == 0 ||
            l.stride.w == 0 || l.dilation.h == 0 || l.dilation.w == 0 || !l.same_padding) {
          throw InvalidInput("network spec: convolution row " + std::to_string(i + 1) +
                             " is incomplete");
        }
        nn::ConvParams<float> p{Tensor({l.filters, channels, l.kernel.h, l.kernel.w}),
                                Tensor({l.filters}), l.stride, l.dilation};
        he_normal(p.weights, channels * l.kernel.h * l.kernel.w);
        slot = std::move(p);
        channels = l.filters;
        height = nn::same_output_extent(height, l.stride.h);
        width = nn::same_output_extent(width, l.stride.w);
        break;
      }
      case LayerKind::Normalization: {
        auto p = nn::BatchNormParams<float>::identity(channels);
        p.epsilon = options.bn_epsilon;
        p.stats_momentum = options.bn_momentum;
        slot = std::move(p);
        break;
      }
      case LayerKind::Custom:
        if (l.filters != channels) {
          throw InvalidInput("network spec: activation row " + std::to_string(i + 1) +
                             " declares " + std::to_string(l.filters) + " channels, input has " +
                             std::to_string(channels));
        }
        switch (spec.activation) {
          case ActivationKind::ReLU: slot = nn::ActivationParams<float>::relu(); break;
          case ActivationKind::LeakyReLU: slot = nn::ActivationParams<float>::leaky_relu(); break;
          case ActivationKind::PReLU:
            slot = nn::ActivationParams<float>::prelu(channels, options.prelu_initial_slope);
            break;
        }
        break;
      case LayerKind::MaxPooling:
        if (l.kernel.h == 0 || l.kernel.w == 0 || l.stride.h == 0 || l.stride.w == 0 ||
            !l.same_padding) {
          throw InvalidInput("network spec: pooling row " + std::to_string(i + 1) +
                             " is incomplete");
        }
        height = nn::same_output_extent(height, l.stride.h);
        width = nn::same_output_extent(width, l.stride.w);
        break;
      case LayerKind::FullyConnected: {
        const std::size_t features = channels * height * width;
        nn::DenseParams<float> p{Tensor({features, l.filters}), Tensor({l.filters})};
        he_normal(p.weights, features);
        slot = std::move(p);
        channels = l.filters;
        height = width = 1;
        break;
      }
      case LayerKind::Softmax:
      case LayerKind::Classification:
        if (i + 2 < layers.size() && l.kind == LayerKind::Softmax) {
          throw InvalidInput("network spec: softmax must be the second-to-last layer");
        }
        break;
    }
    net.slots_.push_back(std::move(slot));
  }
  if (channels != kClassCount) {
    throw InvalidInput("network spec: output must have " + std::to_string(kClassCount) +
                       " classes");
  }
  return net;
}

// ---------------------------------------------------------------------------
// Forward / backward

struct Network::Cache {
  std::vector<Tensor> inputs;  // input of each layer
  std::vector<nn::BatchNormCache<float>> bn;
  std::vector<std::vector<std::size_t>> argmax;
  Tensor probs;
};

void Network::check_input(const Tensor& batch) const {
  const Shape expected{spec_.input_channels, spec_.input_height, spec_.input_width};
  if (batch.rank() != 4 || batch.dim(1) != expected[0] || batch.dim(2) != expected[1] ||
      batch.dim(3) != expected[2]) {
    throw InvalidInput("network input must be [N," + std::to_string(expected[0]) + "," +
                       std::to_string(expected[1]) + "," + std::to_string(expected[2]) +
                       "], got " + to_string(batch.shape()));
  }
}

template <typename Self>
Tensor Network::run(Self& self, const Tensor& batch, Mode mode, Cache* cache,
                    std::vector<Shape>* trace) {
  self.check_input(batch);
  const std::size_t count = self.spec_.layers.size();
  if (cache) {
    cache->inputs.assign(count, Tensor{});
    cache->bn.assign(count, {});
    cache->argmax.assign(count, {});
  }
  Tensor x = batch;
  for (std::size_t i = 0; i < count; ++i) {
    const LayerSpec& l = self.spec_.layers[i];
    auto& slot = self.slots_[i];
    if (cache && l.kind != LayerKind::Input) cache->inputs[i] = x;
    switch (l.kind) {
      case LayerKind::Input:
      case LayerKind::Classification:
        break;
      case LayerKind::Convolution:
        x = nn::conv2d_forward(x, std::get<nn::ConvParams<float>>(slot));
        break;
      case LayerKind::Normalization: {
        auto& p = std::get<nn::BatchNormParams<float>>(slot);
        if constexpr (std::is_const_v<Self>) {
          x = nn::batchnorm_infer(x, p);
        } else {
          x = nn::batchnorm_forward(x, p, mode, cache ? &cache->bn[i] : nullptr);
        }
        break;
      }
      case LayerKind::Custom:
        x = nn::activation_forward(x, std::get<nn::ActivationParams<float>>(slot));
        break;
      case LayerKind::MaxPooling: {
        auto pooled = nn::maxpool_forward(x, l.kernel, l.stride);
        if (cache) cache->argmax[i] = std::move(pooled.argmax);
        x = std::move(pooled.out);
        break;
      }
      case LayerKind::FullyConnected:
        x = nn::fully_connected(x, std::get<nn::DenseParams<float>>(slot));
        break;
      case LayerKind::Softmax:
        x = nn::softmax(x);
        if (cache) cache->probs = x;
        break;
    }
    if (trace) trace->push_back(x.shape());
  }
  return x;
}

Tensor Network::forward(const Tensor& batch, Mode mode) {
  return run(*this, batch, mode, nullptr, nullptr);
}

Tensor Network::predict(const Tensor& batch) const {
  return run(*this, batch, Mode::Infer, nullptr, nullptr);
}

std::vector<Shape> Network::trace(const Tensor& batch) const {
  std::vector<Shape> shapes;
  run(*this, batch, Mode::Infer, nullptr, &shapes);
  return shapes;
}

Network::StepResult Network::forward_backward(const Tensor& batch, std::span<const int> labels,
                                              std::vector<Tensor>& grads) {
  Cache cache;
  run(*this, batch, Mode::Train, &cache, nullptr);

  // Softmax and classification combine into the cross-entropy gradient on
  // the FC output.
  const std::size_t fc_index = spec_.layers.size() - 3;
  const Tensor logits = nn::fully_connected(
      cache.inputs[fc_index], std::get<nn::DenseParams<float>>(slots_[fc_index]));
  const auto loss = nn::softmax_crossentropy(logits, labels);
  Tensor grad = nn::softmax_crossentropy_backward(loss.probs, labels);

  // Gradients are produced back to front; collect them and reverse.
  std::vector<Tensor> reversed;
  std::size_t first_conv = spec_.layers.size();
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    if (spec_.layers[i].kind == LayerKind::Convolution) {
      first_conv = i;
      break;
    }
  }
  for (std::size_t i = fc_index + 1; i-- > 1;) {
    const LayerSpec& l = spec_.layers[i];
    const Tensor& input = cache.inputs[i];
    switch (l.kind) {
      case LayerKind::FullyConnected: {
        auto g = nn::fully_connected_backward(input, std::get<nn::DenseParams<float>>(slots_[i]),
                                              grad);
        reversed.push_back(std::move(g.grad_b));
        reversed.push_back(std::move(g.grad_w));
        grad = std::move(g.grad_x);
        break;
      }
      case LayerKind::Custom: {
        const auto& p = std::get<nn::ActivationParams<float>>(slots_[i]);
        auto g = nn::activation_backward(input, p, grad);
        if (p.kind == ActivationKind::PReLU) reversed.push_back(std::move(g.grad_slopes));
        grad = std::move(g.grad_x);
        break;
      }
      case LayerKind::Normalization: {
        auto g = nn::batchnorm_backward(cache.bn[i], std::get<nn::BatchNormParams<float>>(slots_[i]),
                                        grad);
        reversed.push_back(std::move(g.grad_beta));
        reversed.push_back(std::move(g.grad_gamma));
        grad = std::move(g.grad_x);
        break;
      }
      case LayerKind::MaxPooling:
        grad = nn::maxpool_backward(input.shape(), cache.argmax[i], grad);
        break;
      case LayerKind::Convolution: {
        auto g = nn::conv2d_backward(input, std::get<nn::ConvParams<float>>(slots_[i]), grad,
                                     i != first_conv);
        reversed.push_back(std::move(g.grad_b));
        reversed.push_back(std::move(g.grad_w));
        grad = std::move(g.grad_x);
        break;
      }
      default:
        break;
    }
  }
  grads.assign(std::make_move_iterator(reversed.rbegin()), std::make_move_iterator(reversed.rend()));
  return {static_cast<double>(loss.loss), loss.probs};
}

// ---------------------------------------------------------------------------
// Parameter enumeration

template <typename Self, typename Ref>
std::vector<Ref> Network::collect(Self& self, bool learnable_only) {
  std::vector<Ref> out;
  std::size_t conv = 0, norm = 0, custom = 0;
  for (std::size_t i = 0; i < self.spec_.layers.size(); ++i) {
    auto& slot = self.slots_[i];
    switch (self.spec_.layers[i].kind) {
      case LayerKind::Convolution: {
        auto& p = std::get<nn::ConvParams<float>>(slot);
        const std::string base = "conv" + std::to_string(++conv);
        out.push_back({base + ".weight", &p.weights, true});
        out.push_back({base + ".bias", &p.bias, true});
        break;
      }
      case LayerKind::Normalization: {
        auto& p = std::get<nn::BatchNormParams<float>>(slot);
        const std::string base = "norm" + std::to_string(++norm);
        out.push_back({base + ".gamma", &p.gamma, true});
        out.push_back({base + ".beta", &p.beta, true});
        if (!learnable_only) {
          out.push_back({base + ".running_mean", &p.running_mean, false});
          out.push_back({base + ".running_var", &p.running_var, false});
        }
        break;
      }
      case LayerKind::Custom: {
        auto& p = std::get<nn::ActivationParams<float>>(slot);
        ++custom;
        if (p.kind == ActivationKind::PReLU) {
          out.push_back({"custom" + std::to_string(custom) + ".slopes", &p.slopes, true});
        }
        break;
      }
      case LayerKind::FullyConnected: {
        auto& p = std::get<nn::DenseParams<float>>(slot);
        out.push_back({"fc.weight", &p.weights, true});
        out.push_back({"fc.bias", &p.bias, true});
        break;
      }
      default:
        break;
    }
  }
  return out;
}

std::vector<NamedTensor> Network::tensors() { return collect<Network, NamedTensor>(*this, false); }

std::vector<NamedConstTensor> Network::tensors() const {
  return collect<const Network, NamedConstTensor>(*this, false);
}

std::vector<NamedTensor> Network::learnable() { return collect<Network, NamedTensor>(*this, true); }

std::size_t Network::learnable_parameter_count() const {
  std::size_t total = 0;
  for (const auto& t : tensors()) {
    if (t.learnable) total += t.tensor->size();
  }
  return total;
}

bool operator==(const Network& a, const Network& b) {
  if (a.spec_ != b.spec_) return false;
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].name != tb[i].name || ta[i].tensor->shape() != tb[i].tensor->shape()) return false;
    if (std::memcmp(ta[i].tensor->raw(), tb[i].tensor->raw(), ta[i].tensor->size() * 4) != 0) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json extent_json(Extent2 e) { return json::array({e.h, e.w}); }

json layer_json(const LayerSpec& l) {
  json j{{"kind", std::string(to_string(l.kind))}};
  if (l.kernel.h) j["kernel"] = extent_json(l.kernel);
  if (l.filters) j["filters"] = l.filters;
  if (l.dilation.h) j["dilation"] = extent_json(l.dilation);
  if (l.same_padding) j["padding"] = "same";
  if (l.stride.h) j["stride"] = extent_json(l.stride);
  return j;
}

Extent2 extent_from(const json& j, const char* field) {
  if (!j.contains(field)) return {0, 0};
  const auto& v = j.at(field);
  if (!v.is_array() || v.size() != 2) {
    throw FormatError(std::string("model header: field '") + field + "' must be [h, w]");
  }
  return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

LayerSpec layer_from(const json& j) {
  LayerSpec l;
  const auto kind = parse_layer_kind(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("model header: unknown layer kind in field 'layers'");
  l.kind = *kind;
  l.kernel = extent_from(j, "kernel");
  l.filters = j.value("filters", std::size_t{0});
  l.dilation = extent_from(j, "dilation");
  if (j.contains("padding")) {
    if (j.at("padding") != "same") throw FormatError("model header: field 'padding' must be 'same'");
    l.same_padding = true;
  }
  l.stride = extent_from(j, "stride");
  return l;
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

constexpr std::uint64_t align8(std::uint64_t v) { return (v + 7) / 8 * 8; }

}  // namespace

void Network::save(const std::filesystem::path& path) const {
  json header;
  header["format"] = "bwvnet";
  header["version"] = kFormatVersion;
  header["byte_order"] = "little";
  header["dtype"] = "float32";
  header["activation"] = std::string(to_string(spec_.activation));
  header["input_shape"] = {spec_.input_height, spec_.input_width, spec_.input_channels};
  header["batchnorm"] = {{"epsilon", options_.bn_epsilon}, {"momentum", options_.bn_momentum}};
  json layers = json::array();
  for (const auto& l : spec_.layers) layers.push_back(layer_json(l));
  header["layers"] = std::move(layers);

  std::string blob;
  json directory = json::array();
  for (const auto& t : tensors()) {
    const std::uint64_t offset = align8(blob.size());
    blob.resize(offset, '\0');
    for (float v : t.tensor->data()) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int i = 0; i < 4; ++i) blob.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
    directory.push_back({{"name", t.name},
                         {"shape", t.tensor->shape()},
                         {"offset", offset},
                         {"length", t.tensor->size() * 4}});
  }
  blob.resize(align8(blob.size()), '\0');
  header["tensors"] = std::move(directory);
  header["blob_length"] = blob.size();

  std::string text = header.dump();
  text.resize(align8(text.size()), ' ');

  std::string bytes(kMagic, sizeof kMagic);
  put_u64(bytes, text.size());
  bytes += text;
  bytes += blob;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open model file for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing model file: " + path.string());
}

Network Network::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("model file: bad magic (not a .bwvnet container): " + path.string());
  }
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - 16) {
    throw FormatError("model file: field 'header_length' exceeds file size");
  }
  json header;
  try {
    header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: corrupt header: ") + e.what());
  }

  try {
    if (header.value("format", "") != "bwvnet") throw FormatError("model header: field 'format'");
    if (!header.contains("version") || header.at("version") != kFormatVersion) {
      throw FormatError("model header: unknown 'version' " +
                        (header.contains("version") ? header.at("version").dump() : "(missing)"));
    }
    if (header.value("dtype", "") != "float32" || header.value("byte_order", "") != "little") {
      throw FormatError("model header: fields 'dtype'/'byte_order' must be float32/little");
    }
    NetworkSpec spec;
    const auto activation = parse_activation(header.at("activation").get<std::string>());
    if (!activation) throw FormatError("model header: unknown 'activation'");
    spec.activation = *activation;
    const auto& shape = header.at("input_shape");
    spec.input_height = shape.at(0).get<std::size_t>();
    spec.input_width = shape.at(1).get<std::size_t>();
    spec.input_channels = shape.at(2).get<std::size_t>();
    for (const auto& l : header.at("layers")) spec.layers.push_back(layer_from(l));

    InitOptions options;
    options.bn_epsilon = header.at("batchnorm").at("epsilon").get<float>();
    options.bn_momentum = header.at("batchnorm").at("momentum").get<float>();

    const std::uint64_t blob_len = header.at("blob_length").get<std::uint64_t>();
    const std::uint64_t blob_start = 16 + header_len;
    if (bytes.size() - blob_start != blob_len) {
      throw FormatError("model file: blob length mismatch (header says " +
                        std::to_string(blob_len) + " bytes, file holds " +
                        std::to_string(bytes.size() - blob_start) + ")");
    }

    Network net = build(spec, 0, options);
    const auto& directory = header.at("tensors");
    auto slots = net.tensors();
    if (directory.size() != slots.size()) {
      throw FormatError("model header: field 'tensors' lists " + std::to_string(directory.size()) +
                        " entries, architecture needs " + std::to_string(slots.size()));
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& entry = directory[i];
      const std::string name = entry.at("name").get<std::string>();
      if (name != slots[i].name) {
        throw FormatError("model header: tensor '" + name + "' where '" + slots[i].name +
                          "' was expected");
      }
      if (entry.at("shape").get<Shape>() != slots[i].tensor->shape()) {
        throw FormatError("model header: tensor '" + name + "' has the wrong shape");
      }
      const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
      const std::uint64_t length = entry.at("length").get<std::uint64_t>();
      if (offset % 8 != 0) throw FormatError("model header: tensor '" + name + "' offset not 8-byte aligned");
      if (length != slots[i].tensor->size() * 4 || offset + length > blob_len) {
        throw FormatError("model header: tensor '" + name + "' length mismatch");
      }
      const char* src = bytes.data() + blob_start + offset;
      for (float& v : slots[i].tensor->data()) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(src[b])) << (8 * b);
        v = std::bit_cast<float>(bits);
        src += 4;
      }
    }
    return net;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model header: ") + e.what());
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("model header: field 'layers': ") + e.what());
  }
}

}  // namespace bwv
