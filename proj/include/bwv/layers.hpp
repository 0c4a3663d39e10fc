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

// Forward and backward kernels for every layer kind in the classifier.
// All kernels take NCHW tensors (FC and softmax take [N, D]) and are
// templated on the scalar so gradient checks can run in double precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bwv/error.hpp"
#include "bwv/parallel.hpp"
#include "bwv/tensor.hpp"

namespace bwv::nn {

struct Extent2 {
  std::size_t h = 1;
  std::size_t w = 1;

  friend bool operator==(const Extent2&, const Extent2&) = default;
};

enum class Mode { Train, Infer };

enum class ActivationKind { ReLU, LeakyReLU, PReLU };

inline constexpr double kLeakySlope = 0.01;

// ceil(in / stride)
constexpr std::size_t same_output_extent(std::size_t in, std::size_t stride) {
  return (in + stride - 1) / stride;
}

struct Padding {
  std::size_t before = 0;  // top or left
  std::size_t after = 0;   // bottom or right; receives the odd pixel
};

// Zero padding that yields ceil(in / stride) outputs for a window spanning
// `window` input pixels.
constexpr Padding same_padding(std::size_t in, std::size_t stride, std::size_t window) {
  const std::size_t out = same_output_extent(in, stride);
  const std::size_t needed = (out - 1) * stride + window;
  const std::size_t total = needed > in ? needed - in : 0;
  return {total / 2, total - total / 2};
}

constexpr std::size_t dilated_extent(std::size_t kernel, std::size_t dilation) {
  return (kernel - 1) * dilation + 1;
}

namespace detail {

// Output indices o in [lo, hi) for which o * stride + offset lands in [0, in).
struct Span1 {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

inline Span1 valid_outputs(std::size_t out, std::size_t in, std::size_t stride,
                           std::ptrdiff_t offset) {
  const auto s = static_cast<std::ptrdiff_t>(stride);
  std::ptrdiff_t lo = offset >= 0 ? 0 : (-offset + s - 1) / s;
  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(in) - 1 - offset;
  std::ptrdiff_t hi = last < 0 ? 0 : last / s + 1;
  hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(out));
  if (hi < lo) hi = lo;
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

inline void require_rank(const Shape& shape, std::size_t rank, const char* op) {
  if (shape.size() != rank) {
    throw InvalidInput(std::string(op) + ": expected rank " + std::to_string(rank) +
                       ", got shape " + to_string(shape));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution (cross-correlation, dilated, strided, 'same' padding)

template <typename T>
struct ConvParams {
  BasicTensor<T> weights;  // [F, C, kh, kw]
  BasicTensor<T> bias;     // [F]
  Extent2 stride;
  Extent2 dilation;

  std::size_t filters() const { return weights.dim(0); }
  std::size_t in_channels() const { return weights.dim(1); }
  Extent2 kernel() const { return {weights.dim(2), weights.dim(3)}; }
};

template <typename T>
struct ConvGeometry {
  std::size_t n, c, h, w, f, kh, kw, oh, ow;
  Padding pad_h, pad_w;

  ConvGeometry(const Shape& x, const ConvParams<T>& p) {
    detail::require_rank(x, 4, "conv2d");
    detail::require_rank(p.weights.shape(), 4, "conv2d weights");
    if (p.bias.rank() != 1 || p.bias.dim(0) != p.filters()) {
      throw InvalidInput("conv2d: bias must have one entry per filter");
    }
    if (x[1] != p.in_channels()) {
      throw InvalidInput("conv2d: input has " + std::to_string(x[1]) +
                         " channels, weights expect " + std::to_string(p.in_channels()));
    }
    if (p.stride.h == 0 || p.stride.w == 0 || p.dilation.h == 0 || p.dilation.w == 0) {
      throw InvalidInput("conv2d: stride and dilation must be positive");
    }
    n = x[0]; c = x[1]; h = x[2]; w = x[3];
    f = p.filters(); kh = p.weights.dim(2); kw = p.weights.dim(3);
    oh = same_output_extent(h, p.stride.h);
    ow = same_output_extent(w, p.stride.w);
    pad_h = same_padding(h, p.stride.h, dilated_extent(kh, p.dilation.h));
    pad_w = same_padding(w, p.stride.w, dilated_extent(kw, p.dilation.w));
  }

  std::ptrdiff_t row_offset(std::size_t ki, const ConvParams<T>& p) const {
    return static_cast<std::ptrdiff_t>(ki * p.dilation.h) -
           static_cast<std::ptrdiff_t>(pad_h.before);
  }
  std::ptrdiff_t col_offset(std::size_t kj, const ConvParams<T>& p) const {
    return static_cast<std::ptrdiff_t>(kj * p.dilation.w) -
           static_cast<std::ptrdiff_t>(pad_w.before);
  }
};

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const ConvParams<T>& p) {
  const ConvGeometry<T> g(x.shape(), p);
  BasicTensor<T> out({g.n, g.f, g.oh, g.ow});
  const std::size_t sh = p.stride.h, sw = p.stride.w;

  parallel_for(g.n * g.f, [&](std::size_t job) {
    const std::size_t n = job / g.f;
    const std::size_t f = job % g.f;
    T* dst = out.raw() + (n * g.f + f) * g.oh * g.ow;
    std::fill(dst, dst + g.oh * g.ow, p.bias[f]);
    for (std::size_t c = 0; c < g.c; ++c) {
      const T* src = x.raw() + (n * g.c + c) * g.h * g.w;
      const T* wk = p.weights.raw() + (f * g.c + c) * g.kh * g.kw;
      for (std::size_t ki = 0; ki < g.kh; ++ki) {
        const auto roff = g.row_offset(ki, p);
        const auto rows = detail::valid_outputs(g.oh, g.h, sh, roff);
        for (std::size_t kj = 0; kj < g.kw; ++kj) {
          const auto coff = g.col_offset(kj, p);
          const auto cols = detail::valid_outputs(g.ow, g.w, sw, coff);
          const T wv = wk[ki * g.kw + kj];
          for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
            const T* srow = src + static_cast<std::size_t>(
                                      static_cast<std::ptrdiff_t>(oy * sh) + roff) * g.w;
            T* drow = dst + oy * g.ow;
            for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
              drow[ox] += wv * srow[static_cast<std::ptrdiff_t>(ox * sw) + coff];
            }
          }
        }
      }
    }
  });
  require_finite(out, "conv2d_forward");
  return out;
}

template <typename T>
struct ConvGrads {
  BasicTensor<T> grad_x;  // empty when not requested
  BasicTensor<T> grad_w;
  BasicTensor<T> grad_b;
};

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& x, const ConvParams<T>& p,
                             const BasicTensor<T>& grad_out, bool need_grad_x = true) {
  const ConvGeometry<T> g(x.shape(), p);
  if (grad_out.shape() != Shape{g.n, g.f, g.oh, g.ow}) {
    throw InvalidInput("conv2d_backward: grad_out shape " + to_string(grad_out.shape()) +
                       " does not match forward output");
  }
  const std::size_t sh = p.stride.h, sw = p.stride.w;
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t in_plane = g.h * g.w;
  ConvGrads<T> grads{{}, BasicTensor<T>(p.weights.shape()), BasicTensor<T>(p.bias.shape())};

  // Weight and bias gradients, one filter per job.
  parallel_for(g.f, [&](std::size_t f) {
    T bias_sum = 0;
    T* gw = grads.grad_w.raw() + f * g.c * g.kh * g.kw;
    for (std::size_t n = 0; n < g.n; ++n) {
      const T* go = grad_out.raw() + (n * g.f + f) * out_plane;
      for (std::size_t i = 0; i < out_plane; ++i) bias_sum += go[i];
      for (std::size_t c = 0; c < g.c; ++c) {
        const T* src = x.raw() + (n * g.c + c) * in_plane;
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
          const auto roff = g.row_offset(ki, p);
          const auto rows = detail::valid_outputs(g.oh, g.h, sh, roff);
          for (std::size_t kj = 0; kj < g.kw; ++kj) {
            const auto coff = g.col_offset(kj, p);
            const auto cols = detail::valid_outputs(g.ow, g.w, sw, coff);
            T acc = 0;
            for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
              const T* srow = src + static_cast<std::size_t>(
                                        static_cast<std::ptrdiff_t>(oy * sh) + roff) * g.w;
              const T* grow = go + oy * g.ow;
              for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                acc += grow[ox] * srow[static_cast<std::ptrdiff_t>(ox * sw) + coff];
              }
            }
            gw[(c * g.kh + ki) * g.kw + kj] += acc;
          }
        }
      }
    }
    grads.grad_b[f] = bias_sum;
  });

  if (need_grad_x) {
    grads.grad_x = BasicTensor<T>(x.shape());
    parallel_for(g.n * g.c, [&](std::size_t job) {
      const std::size_t n = job / g.c;
      const std::size_t c = job % g.c;
      T* gx = grads.grad_x.raw() + (n * g.c + c) * in_plane;
      for (std::size_t f = 0; f < g.f; ++f) {
        const T* go = grad_out.raw() + (n * g.f + f) * out_plane;
        const T* wk = p.weights.raw() + (f * g.c + c) * g.kh * g.kw;
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
          const auto roff = g.row_offset(ki, p);
          const auto rows = detail::valid_outputs(g.oh, g.h, sh, roff);
          for (std::size_t kj = 0; kj < g.kw; ++kj) {
            const auto coff = g.col_offset(kj, p);
            const auto cols = detail::valid_outputs(g.ow, g.w, sw, coff);
            const T wv = wk[ki * g.kw + kj];
            for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
              T* gxrow = gx + static_cast<std::size_t>(
                                  static_cast<std::ptrdiff_t>(oy * sh) + roff) * g.w;
              const T* grow = go + oy * g.ow;
              for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                gxrow[static_cast<std::ptrdiff_t>(ox * sw) + coff] += wv * grow[ox];
              }
            }
          }
        }
      }
    });
    require_finite(grads.grad_x, "conv2d_backward");
  }
  require_finite(grads.grad_w, "conv2d_backward");
  return grads;
}

// ---------------------------------------------------------------------------
// Max pooling, 'same' padding. Padded cells act as -infinity.

template <typename T>
struct PoolResult {
  BasicTensor<T> out;
  std::vector<std::size_t> argmax;  // flat index into the input, per output
};

template <typename T>
PoolResult<T> maxpool_forward(const BasicTensor<T>& x, Extent2 kernel, Extent2 stride) {
  detail::require_rank(x.shape(), 4, "maxpool");
  if (kernel.h == 0 || kernel.w == 0 || stride.h == 0 || stride.w == 0) {
    throw InvalidInput("maxpool: kernel and stride must be positive");
  }
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = same_output_extent(h, stride.h);
  const std::size_t ow = same_output_extent(w, stride.w);
  const Padding ph = same_padding(h, stride.h, kernel.h);
  const Padding pw = same_padding(w, stride.w, kernel.w);

  PoolResult<T> r{BasicTensor<T>({n, c, oh, ow}), std::vector<std::size_t>(n * c * oh * ow)};
  parallel_for(n * c, [&](std::size_t plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const auto y0 = static_cast<std::ptrdiff_t>(oy * stride.h) -
                      static_cast<std::ptrdiff_t>(ph.before);
      const std::size_t ylo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(y0, 0));
      const std::size_t yhi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
          y0 + static_cast<std::ptrdiff_t>(kernel.h), 0, static_cast<std::ptrdiff_t>(h)));
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const auto x0 = static_cast<std::ptrdiff_t>(ox * stride.w) -
                        static_cast<std::ptrdiff_t>(pw.before);
        const std::size_t xlo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(x0, 0));
        const std::size_t xhi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
            x0 + static_cast<std::ptrdiff_t>(kernel.w), 0, static_cast<std::ptrdiff_t>(w)));
        if (ylo >= yhi || xlo >= xhi) {
          throw NumericError("maxpool_forward: window contains only padding");
        }
        T best = -std::numeric_limits<T>::infinity();
        std::size_t best_at = base + ylo * w + xlo;
        for (std::size_t y = ylo; y < yhi; ++y) {
          for (std::size_t xx = xlo; xx < xhi; ++xx) {
            const T v = x[base + y * w + xx];
            if (v > best) {
              best = v;
              best_at = base + y * w + xx;
            }
          }
        }
        const std::size_t o = (plane * oh + oy) * ow + ox;
        r.out[o] = x[best_at];
        r.argmax[o] = best_at;
      }
    }
  });
  require_finite(r.out, "maxpool_forward");
  return r;
}

template <typename T>
BasicTensor<T> maxpool_backward(const Shape& input_shape, std::span<const std::size_t> argmax,
                                const BasicTensor<T>& grad_out) {
  if (argmax.size() != grad_out.size()) {
    throw InvalidInput("maxpool_backward: argmax/grad_out size mismatch");
  }
  BasicTensor<T> grad_x(input_shape);
  for (std::size_t o = 0; o < grad_out.size(); ++o) grad_x[argmax[o]] += grad_out[o];
  return grad_x;
}

// ---------------------------------------------------------------------------
// Batch normalization over batch and space, per channel.

template <typename T>
struct BatchNormParams {
  BasicTensor<T> gamma;         // [C]
  BasicTensor<T> beta;          // [C]
  BasicTensor<T> running_mean;  // [C]
  BasicTensor<T> running_var;   // [C]
  T epsilon = T(1e-5);
  T stats_momentum = T(0.1);

  static BatchNormParams identity(std::size_t channels) {
    return {BasicTensor<T>({channels}, T(1)), BasicTensor<T>({channels}, T(0)),
            BasicTensor<T>({channels}, T(0)), BasicTensor<T>({channels}, T(1))};
  }
  std::size_t channels() const { return gamma.dim(0); }
};

template <typename T>
struct BatchNormCache {
  BasicTensor<T> x_hat;
  std::vector<T> inv_std;
};

namespace detail {

template <typename T>
void check_batchnorm(const BasicTensor<T>& x, const BatchNormParams<T>& p) {
  if (x.empty()) throw InvalidInput("batchnorm: empty batch");
  if (x.rank() != 4 && x.rank() != 2) {
    throw InvalidInput("batchnorm: expected [N,C,H,W] or [N,C], got " + to_string(x.shape()));
  }
  if (x.dim(1) != p.channels()) {
    throw InvalidInput("batchnorm: channel count mismatch");
  }
  if (!(p.epsilon > 0)) throw InvalidInput("batchnorm: epsilon must be positive");
}

template <typename T>
std::size_t spatial_size(const BasicTensor<T>& x) {
  return x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
}

}  // namespace detail

// Infer mode: normalizes with the running statistics; `p` is not modified.
template <typename T>
BasicTensor<T> batchnorm_infer(const BasicTensor<T>& x, const BatchNormParams<T>& p) {
  detail::check_batchnorm(x, p);
  const std::size_t n = x.dim(0), c = x.dim(1), hw = detail::spatial_size(x);
  BasicTensor<T> y(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const T scale = p.gamma[ch] / std::sqrt(p.running_var[ch] + p.epsilon);
    const T shift = p.beta[ch] - p.running_mean[ch] * scale;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t k = 0; k < hw; ++k) y[off + k] = x[off + k] * scale + shift;
    }
  }
  require_finite(y, "batchnorm_forward");
  return y;
}

// Train mode uses batch statistics and folds them into the running averages
// (the running variance uses the unbiased estimate).
template <typename T>
BasicTensor<T> batchnorm_forward(const BasicTensor<T>& x, BatchNormParams<T>& p, Mode mode,
                                 BatchNormCache<T>* cache = nullptr) {
  if (mode == Mode::Infer) return batchnorm_infer(x, p);
  detail::check_batchnorm(x, p);
  const std::size_t n = x.dim(0), c = x.dim(1), hw = detail::spatial_size(x);
  const std::size_t count = n * hw;
  BasicTensor<T> y(x.shape());
  BatchNormCache<T> local;
  BatchNormCache<T>& cc = cache ? *cache : local;
  cc.x_hat = BasicTensor<T>(x.shape());
  cc.inv_std.assign(c, T(0));
  for (std::size_t ch = 0; ch < c; ++ch) {
    T mean = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t k = 0; k < hw; ++k) mean += x[off + k];
    }
    mean /= static_cast<T>(count);
    T var = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t k = 0; k < hw; ++k) {
        const T d = x[off + k] - mean;
        var += d * d;
      }
    }
    var /= static_cast<T>(count);
    const T inv_std = T(1) / std::sqrt(var + p.epsilon);
    cc.inv_std[ch] = inv_std;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t k = 0; k < hw; ++k) {
        const T xh = (x[off + k] - mean) * inv_std;
        cc.x_hat[off + k] = xh;
        y[off + k] = p.gamma[ch] * xh + p.beta[ch];
      }
    }
    const T unbiased = count > 1 ? var * static_cast<T>(count) / static_cast<T>(count - 1) : var;
    p.running_mean[ch] = (T(1) - p.stats_momentum) * p.running_mean[ch] + p.stats_momentum * mean;
    p.running_var[ch] = (T(1) - p.stats_momentum) * p.running_var[ch] + p.stats_momentum * unbiased;
  }
  require_finite(y, "batchnorm_forward");
  return y;
}

template <typename T>
struct BatchNormGrads {
  BasicTensor<T> grad_x;
  BasicTensor<T> grad_gamma;
  BasicTensor<T> grad_beta;
};

// Gradients of the train-mode map (batch statistics depend on x).
template <typename T>
BatchNormGrads<T> batchnorm_backward(const BatchNormCache<T>& cache, const BatchNormParams<T>& p,
                                     const BasicTensor<T>& grad_out) {
  if (grad_out.shape() != cache.x_hat.shape()) {
    throw InvalidInput("batchnorm_backward: grad_out shape mismatch");
  }
  const std::size_t n = grad_out.dim(0), c = grad_out.dim(1);
  const std::size_t hw = detail::spatial_size(grad_out);
  const T count = static_cast<T>(n * hw);
  BatchNormGrads<T> g{BasicTensor<T>(grad_out.shape()), BasicTensor<T>({c}),
                      BasicTensor<T>({c})};
  for (std::size_t ch = 0; ch < c; ++ch) {
    T sum_g = 0, sum_gx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t k = 0; k < hw; ++k) {
        sum_g += grad_out[off + k];
        sum_gx += grad_out[off + k] * cache.x_hat[off + k];
      }
    }
    g.grad_beta[ch] = sum_g;
    g.grad_gamma[ch] = sum_gx;
    const T scale = p.gamma[ch] * cache.inv_std[ch] / count;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t k = 0; k < hw; ++k) {
        g.grad_x[off + k] =
            scale * (count * grad_out[off + k] - sum_g - cache.x_hat[off + k] * sum_gx);
      }
    }
  }
  require_finite(g.grad_x, "batchnorm_backward");
  return g;
}

// ---------------------------------------------------------------------------
// ReLU family. Negative-branch slope applies for x <= 0.

template <typename T>
struct ActivationParams {
  ActivationKind kind = ActivationKind::ReLU;
  T alpha = T(kLeakySlope);  // LeakyReLU slope
  BasicTensor<T> slopes;     // PReLU, one per channel

  static ActivationParams relu() { return {ActivationKind::ReLU, T(kLeakySlope), {}}; }
  static ActivationParams leaky_relu() {
    return {ActivationKind::LeakyReLU, T(kLeakySlope), {}};
  }
  static ActivationParams prelu(std::size_t channels, T initial_slope = T(0.25)) {
    return {ActivationKind::PReLU, T(kLeakySlope), BasicTensor<T>({channels}, initial_slope)};
  }
};

namespace detail {

template <typename T>
std::size_t check_activation(const BasicTensor<T>& x, const ActivationParams<T>& p) {
  if (x.rank() < 2) throw InvalidInput("activation: expected a channel axis");
  if (p.kind == ActivationKind::PReLU &&
      (p.slopes.rank() != 1 || p.slopes.dim(0) != x.dim(1))) {
    throw InvalidInput("activation: PReLU needs one slope per channel");
  }
  std::size_t inner = 1;
  for (std::size_t a = 2; a < x.rank(); ++a) inner *= x.dim(a);
  return inner;
}

template <typename T>
T negative_slope(const ActivationParams<T>& p, std::size_t channel) {
  switch (p.kind) {
    case ActivationKind::ReLU: return T(0);
    case ActivationKind::LeakyReLU: return p.alpha;
    case ActivationKind::PReLU: return p.slopes[channel];
  }
  return T(0);
}

}  // namespace detail

template <typename T>
BasicTensor<T> activation_forward(const BasicTensor<T>& x, const ActivationParams<T>& p) {
  const std::size_t inner = detail::check_activation(x, p);
  const std::size_t n = x.dim(0), c = x.dim(1);
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T slope = detail::negative_slope(p, ch);
      const std::size_t off = (i * c + ch) * inner;
      for (std::size_t k = 0; k < inner; ++k) {
        const T v = x[off + k];
        y[off + k] = v > T(0) ? v : slope * v;
      }
    }
  }
  require_finite(y, "activation_forward");
  return y;
}

template <typename T>
struct ActivationGrads {
  BasicTensor<T> grad_x;
  BasicTensor<T> grad_slopes;  // PReLU only
};

template <typename T>
ActivationGrads<T> activation_backward(const BasicTensor<T>& x, const ActivationParams<T>& p,
                                       const BasicTensor<T>& grad_out) {
  const std::size_t inner = detail::check_activation(x, p);
  if (grad_out.shape() != x.shape()) {
    throw InvalidInput("activation_backward: grad_out shape mismatch");
  }
  const std::size_t n = x.dim(0), c = x.dim(1);
  ActivationGrads<T> g{BasicTensor<T>(x.shape()), {}};
  if (p.kind == ActivationKind::PReLU) g.grad_slopes = BasicTensor<T>({c});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T slope = detail::negative_slope(p, ch);
      const std::size_t off = (i * c + ch) * inner;
      T slope_acc = 0;
      for (std::size_t k = 0; k < inner; ++k) {
        const T v = x[off + k];
        const T go = grad_out[off + k];
        if (v > T(0)) {
          g.grad_x[off + k] = go;
        } else {
          g.grad_x[off + k] = slope * go;
          slope_acc += go * v;
        }
      }
      if (p.kind == ActivationKind::PReLU) g.grad_slopes[ch] += slope_acc;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Fully connected: y = x W + b, x flattened to [N, D].

template <typename T>
struct DenseParams {
  BasicTensor<T> weights;  // [D, K]
  BasicTensor<T> bias;     // [K]
};

namespace detail {

template <typename T>
std::size_t check_dense(const BasicTensor<T>& x, const DenseParams<T>& p) {
  if (x.rank() < 2) throw InvalidInput("fully_connected: expected [N, D] input");
  if (p.weights.rank() != 2 || p.bias.rank() != 1 || p.bias.dim(0) != p.weights.dim(1)) {
    throw InvalidInput("fully_connected: weights must be [D, K] with bias [K]");
  }
  const std::size_t d = x.size() / x.dim(0);
  if (d != p.weights.dim(0)) {
    throw InvalidInput("fully_connected: feature length " + std::to_string(d) +
                       " does not match weights " + to_string(p.weights.shape()));
  }
  return d;
}

}  // namespace detail

template <typename T>
BasicTensor<T> fully_connected(const BasicTensor<T>& x, const DenseParams<T>& p) {
  const std::size_t d = detail::check_dense(x, p);
  const std::size_t n = x.dim(0), k = p.weights.dim(1);
  BasicTensor<T> y({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      T acc = p.bias[j];
      for (std::size_t t = 0; t < d; ++t) acc += x[i * d + t] * p.weights[t * k + j];
      y[i * k + j] = acc;
    }
  }
  require_finite(y, "fully_connected");
  return y;
}

template <typename T>
struct DenseGrads {
  BasicTensor<T> grad_x;  // same shape as the (unflattened) input
  BasicTensor<T> grad_w;
  BasicTensor<T> grad_b;
};

template <typename T>
DenseGrads<T> fully_connected_backward(const BasicTensor<T>& x, const DenseParams<T>& p,
                                       const BasicTensor<T>& grad_out) {
  const std::size_t d = detail::check_dense(x, p);
  const std::size_t n = x.dim(0), k = p.weights.dim(1);
  if (grad_out.shape() != Shape{n, k}) {
    throw InvalidInput("fully_connected_backward: grad_out shape mismatch");
  }
  DenseGrads<T> g{BasicTensor<T>(x.shape()), BasicTensor<T>(p.weights.shape()),
                  BasicTensor<T>(p.bias.shape())};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const T go = grad_out[i * k + j];
      g.grad_b[j] += go;
      for (std::size_t t = 0; t < d; ++t) {
        g.grad_w[t * k + j] += x[i * d + t] * go;
        g.grad_x[i * d + t] += p.weights[t * k + j] * go;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Softmax and mean cross-entropy.

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
  detail::require_rank(logits.shape(), 2, "softmax");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  BasicTensor<T> probs(logits.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.raw() + i * k;
    const T peak = *std::max_element(row, row + k);
    T total = 0;
    for (std::size_t j = 0; j < k; ++j) {
      probs[i * k + j] = std::exp(row[j] - peak);
      total += probs[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] /= total;
  }
  require_finite(probs, "softmax");
  return probs;
}

template <typename T>
struct SoftmaxLoss {
  T loss = 0;
  BasicTensor<T> probs;
};

template <typename T>
SoftmaxLoss<T> softmax_crossentropy(const BasicTensor<T>& logits, std::span<const int> labels) {
  detail::require_rank(logits.shape(), 2, "softmax_crossentropy");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (labels.size() != n) throw InvalidInput("softmax_crossentropy: one label per row required");
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw InvalidInput("softmax_crossentropy: label " + std::to_string(label) +
                         " out of range");
    }
  }
  SoftmaxLoss<T> r{0, softmax(logits)};
  for (std::size_t i = 0; i < n; ++i) {
    // log-sum-exp form keeps the loss finite even when the probability underflows
    const T* row = logits.raw() + i * k;
    const T peak = *std::max_element(row, row + k);
    T total = 0;
    for (std::size_t j = 0; j < k; ++j) total += std::exp(row[j] - peak);
    r.loss += std::log(total) + peak - row[labels[i]];
  }
  r.loss /= static_cast<T>(n);
  if (!std::isfinite(r.loss)) throw NumericError("softmax_crossentropy: non-finite loss");
  return r;
}

// d(mean loss)/d(logits) = (probs - onehot) / N
template <typename T>
BasicTensor<T> softmax_crossentropy_backward(const BasicTensor<T>& probs,
                                             std::span<const int> labels) {
  const std::size_t n = probs.dim(0), k = probs.dim(1);
  BasicTensor<T> g = probs;
  for (std::size_t i = 0; i < n; ++i) {
    g[i * k + static_cast<std::size_t>(labels[i])] -= T(1);
    for (std::size_t j = 0; j < k; ++j) g[i * k + j] /= static_cast<T>(n);
  }
  return g;
}

}  // namespace bwv::nn
