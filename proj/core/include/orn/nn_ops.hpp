#ifndef ORN_NN_OPS_HPP_
#define ORN_NN_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "orn/blas.hpp"
#include "orn/rng.hpp"
#include "orn/tensor.hpp"

namespace orn::nn {

// ---------------------------------------------------------------------------
// conv2d: cross-correlation per standard CNN convention (no kernel flip).
// ---------------------------------------------------------------------------

inline std::size_t conv_out_extent(std::size_t in, std::size_t k,
                                   std::size_t pad) {
  return in + 2 * pad - k + 1;
}

// [C,H,W] -> [C*k*k, Ho*Wo]; out-of-bounds sources are zero.
template <typename T>
Tensor<T> im2col(const Tensor<T>& img, std::size_t k, std::size_t pad) {
  const std::size_t C = img.extent(0), H = img.extent(1), W = img.extent(2);
  const std::size_t Ho = conv_out_extent(H, k, pad);
  const std::size_t Wo = conv_out_extent(W, k, pad);
  Tensor<T> cols({C * k * k, Ho * Wo});
  const T* src = img.data();
  T* dst = cols.data();
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t kr = 0; kr < k; ++kr) {
      for (std::size_t kc = 0; kc < k; ++kc) {
        const std::size_t row = (c * k + kr) * k + kc;
        T* out_row = dst + row * Ho * Wo;
        for (std::size_t oy = 0; oy < Ho; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy + kr) -
              static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) {
            for (std::size_t ox = 0; ox < Wo; ++ox) out_row[oy * Wo + ox] = 0;
            continue;
          }
          const T* in_row = src + (c * H + iy) * W;
          for (std::size_t ox = 0; ox < Wo; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox + kc) -
                static_cast<std::ptrdiff_t>(pad);
            out_row[oy * Wo + ox] =
                (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W))
                    ? T(0)
                    : in_row[ix];
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatter-add columns back into a [C,H,W] image.
template <typename T>
void col2im_add(const Tensor<T>& cols, std::size_t C, std::size_t H,
                std::size_t W, std::size_t k, std::size_t pad,
                Tensor<T>& img) {
  const std::size_t Ho = conv_out_extent(H, k, pad);
  const std::size_t Wo = conv_out_extent(W, k, pad);
  const T* src = cols.data();
  T* dst = img.data();
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t kr = 0; kr < k; ++kr) {
      for (std::size_t kc = 0; kc < k; ++kc) {
        const std::size_t row = (c * k + kr) * k + kc;
        const T* in_row = src + row * Ho * Wo;
        for (std::size_t oy = 0; oy < Ho; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy + kr) -
              static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
          T* out_row = dst + (c * H + iy) * W;
          for (std::size_t ox = 0; ox < Wo; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox + kc) -
                static_cast<std::ptrdiff_t>(pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
            out_row[ix] += in_row[oy * Wo + ox];
          }
        }
      }
    }
  }
}

template <typename T>
void check_conv_args(const Tensor<T>& input, const Tensor<T>& kernels,
                     std::size_t pad, std::size_t batch_axes) {
  if (kernels.rank() != 4) {
    throw ShapeError("conv2d: kernels must be rank 4, got " +
                     kernels.shape_str());
  }
  const std::size_t k = kernels.extent(2);
  if (k != kernels.extent(3)) {
    throw ShapeError("conv2d: non-square kernel " + kernels.shape_str());
  }
  if (k % 2 == 0) {
    throw ShapeError("conv2d: kernel extent must be odd, got " +
                     std::to_string(k));
  }
  const std::size_t c_axis = batch_axes;  // channel axis of the input
  if (input.rank() != 3 + batch_axes) {
    throw ShapeError("conv2d: input must be rank " +
                     std::to_string(3 + batch_axes) + ", got " +
                     input.shape_str());
  }
  if (input.extent(c_axis) != kernels.extent(1)) {
    throw ShapeError("conv2d: channel mismatch on input axis " +
                     std::to_string(c_axis) + " (" +
                     std::to_string(input.extent(c_axis)) + ") vs kernels axis 1 (" +
                     std::to_string(kernels.extent(1)) + ")");
  }
  const std::size_t H = input.extent(c_axis + 1);
  const std::size_t W = input.extent(c_axis + 2);
  if (H + 2 * pad < k || W + 2 * pad < k) {
    throw ShapeError("conv2d: spatial extent " + std::to_string(H) + "x" +
                     std::to_string(W) + " too small for kernel " +
                     std::to_string(k) + " at padding " + std::to_string(pad));
  }
}

// input [B,C,H,W], kernels [Co,C,k,k] -> [B,Co,Ho,Wo]
template <typename T>
Tensor<T> conv2d_batch(const Tensor<T>& input, const Tensor<T>& kernels,
                       std::size_t pad) {
  check_conv_args(input, kernels, pad, 1);
  const std::size_t B = input.extent(0), C = input.extent(1);
  const std::size_t H = input.extent(2), W = input.extent(3);
  const std::size_t Co = kernels.extent(0), k = kernels.extent(2);
  const std::size_t Ho = conv_out_extent(H, k, pad);
  const std::size_t Wo = conv_out_extent(W, k, pad);
  Tensor<T> out({B, Co, Ho, Wo});
  Tensor<T> img({C, H, W});
  for (std::size_t b = 0; b < B; ++b) {
    std::copy(input.data() + b * C * H * W, input.data() + (b + 1) * C * H * W,
              img.data());
    Tensor<T> cols = im2col(img, k, pad);
    blas::gemm(false, false, Co, Ho * Wo, C * k * k, T(1), kernels.data(),
               C * k * k, cols.data(), Ho * Wo, T(0),
               out.data() + b * Co * Ho * Wo, Ho * Wo);
  }
  return out;
}

// input [C,H,W], kernels [Co,C,k,k] -> [Co,Ho,Wo]
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernels,
                 std::size_t pad) {
  check_conv_args(input, kernels, pad, 0);
  Tensor<T> batched(input);
  batched.reshape({1, input.extent(0), input.extent(1), input.extent(2)});
  Tensor<T> out = conv2d_batch(batched, kernels, pad);
  out.reshape({out.extent(1), out.extent(2), out.extent(3)});
  return out;
}

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> kernels;
};

template <typename T>
ConvGrads<T> conv2d_backward_batch(const Tensor<T>& input,
                                   const Tensor<T>& kernels,
                                   const Tensor<T>& grad_out,
                                   std::size_t pad) {
  check_conv_args(input, kernels, pad, 1);
  const std::size_t B = input.extent(0), C = input.extent(1);
  const std::size_t H = input.extent(2), W = input.extent(3);
  const std::size_t Co = kernels.extent(0), k = kernels.extent(2);
  const std::size_t Ho = conv_out_extent(H, k, pad);
  const std::size_t Wo = conv_out_extent(W, k, pad);
  require_shape(grad_out, {B, Co, Ho, Wo}, "conv2d_backward: grad_out");

  ConvGrads<T> g{Tensor<T>({B, C, H, W}), Tensor<T>({Co, C, k, k})};
  Tensor<T> img({C, H, W});
  Tensor<T> gcols({C * k * k, Ho * Wo});
  Tensor<T> gimg({C, H, W});
  for (std::size_t b = 0; b < B; ++b) {
    std::copy(input.data() + b * C * H * W, input.data() + (b + 1) * C * H * W,
              img.data());
    Tensor<T> cols = im2col(img, k, pad);
    const T* go = grad_out.data() + b * Co * Ho * Wo;
    // dK += gout * colsT
    blas::gemm(false, true, Co, C * k * k, Ho * Wo, T(1), go, Ho * Wo,
               cols.data(), Ho * Wo, T(1), g.kernels.data(), C * k * k);
    // dcols = KT * gout
    blas::gemm(true, false, C * k * k, Ho * Wo, Co, T(1), kernels.data(),
               C * k * k, go, Ho * Wo, T(0), gcols.data(), Ho * Wo);
    gimg.fill(T(0));
    col2im_add(gcols, C, H, W, k, pad, gimg);
    std::copy(gimg.data(), gimg.data() + C * H * W,
              g.input.data() + b * C * H * W);
  }
  return g;
}

// ---------------------------------------------------------------------------
// 2x2 non-overlapping max pooling; argmax retained for backward routing.
// ---------------------------------------------------------------------------

template <typename T>
struct MaxPoolResult {
  Tensor<T> output;
  std::vector<std::uint32_t> argmax;  // flat input offset per output element
};

// input [B,C,H,W], H and W even.
template <typename T>
MaxPoolResult<T> maxpool2_batch(const Tensor<T>& input) {
  const std::size_t B = input.extent(0), C = input.extent(1);
  const std::size_t H = input.extent(2), W = input.extent(3);
  if (H % 2 || W % 2) {
    throw ShapeError("maxpool2: spatial extents must be even, got " +
                     input.shape_str());
  }
  MaxPoolResult<T> r{Tensor<T>({B, C, H / 2, W / 2}), {}};
  r.argmax.resize(r.output.numel());
  const T* in = input.data();
  T* out = r.output.data();
  std::size_t o = 0;
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    const T* plane = in + bc * H * W;
    for (std::size_t y = 0; y < H; y += 2) {
      for (std::size_t x = 0; x < W; x += 2) {
        std::size_t best = y * W + x;
        T v = plane[best];
        const std::size_t cand[3] = {y * W + x + 1, (y + 1) * W + x,
                                     (y + 1) * W + x + 1};
        for (std::size_t c : cand) {
          if (plane[c] > v) {
            v = plane[c];
            best = c;
          }
        }
        out[o] = v;
        r.argmax[o] = static_cast<std::uint32_t>(bc * H * W + best);
        ++o;
      }
    }
  }
  return r;
}

template <typename T>
MaxPoolResult<T> maxpool2(const Tensor<T>& input) {
  Tensor<T> batched(input);
  batched.reshape({1, input.extent(0), input.extent(1), input.extent(2)});
  MaxPoolResult<T> r = maxpool2_batch(batched);
  r.output.reshape(
      {r.output.extent(1), r.output.extent(2), r.output.extent(3)});
  return r;
}

template <typename T>
Tensor<T> maxpool2_backward(const Tensor<T>& grad_out,
                            const std::vector<std::uint32_t>& argmax,
                            const std::vector<std::size_t>& input_shape) {
  Tensor<T> gin(input_shape);
  for (std::size_t i = 0; i < grad_out.numel(); ++i) {
    gin[argmax[i]] += grad_out[i];
  }
  return gin;
}

// ---------------------------------------------------------------------------
// Elementwise and dense ops.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    out[i] = x[i] > T(0) ? x[i] : T(0);
  }
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out) {
  Tensor<T> gin(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    gin[i] = x[i] > T(0) ? grad_out[i] : T(0);
  }
  return gin;
}

template <typename T>
struct DropoutResult {
  Tensor<T> output;
  std::vector<std::uint8_t> mask;  // 1 = kept; empty in eval mode
};

/// Inverted dropout: kept units scaled by 1/(1-rate); eval mode is identity.
template <typename T>
DropoutResult<T> dropout(const Tensor<T>& x, double rate, bool train,
                         Rng& rng) {
  if (rate < 0 || rate >= 1) {
    throw std::invalid_argument("dropout: rate must be in [0,1), got " +
                                std::to_string(rate));
  }
  if (!train || rate == 0) {
    return {x, {}};
  }
  DropoutResult<T> r{Tensor<T>(x.shape()), {}};
  r.mask.resize(x.numel());
  const T scale = T(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const bool keep = rng.uniform() >= rate;
    r.mask[i] = keep;
    r.output[i] = keep ? x[i] * scale : T(0);
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out,
                           const std::vector<std::uint8_t>& mask,
                           double rate) {
  if (mask.empty()) return grad_out;
  Tensor<T> gin(grad_out.shape());
  const T scale = T(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < grad_out.numel(); ++i) {
    gin[i] = mask[i] ? grad_out[i] * scale : T(0);
  }
  return gin;
}

// x [B,F], weight [out,F], bias [out] -> [B,out]
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias) {
  const std::size_t B = x.extent(0), F = x.extent(1);
  const std::size_t out_f = weight.extent(0);
  if (weight.extent(1) != F) {
    throw ShapeError("linear: feature mismatch on axis 1 (" +
                     std::to_string(F) + " vs " +
                     std::to_string(weight.extent(1)) + ")");
  }
  Tensor<T> out({B, out_f});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t o = 0; o < out_f; ++o) out(b, o) = bias[o];
  }
  blas::gemm(false, true, B, out_f, F, T(1), x.data(), F, weight.data(), F,
             T(1), out.data(), out_f);
  return out;
}

template <typename T>
struct LinearGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
LinearGrads<T> linear_backward(const Tensor<T>& x, const Tensor<T>& weight,
                               const Tensor<T>& grad_out) {
  const std::size_t B = x.extent(0), F = x.extent(1);
  const std::size_t out_f = weight.extent(0);
  LinearGrads<T> g{Tensor<T>({B, F}), Tensor<T>({out_f, F}),
                   Tensor<T>({out_f})};
  blas::gemm(true, false, out_f, F, B, T(1), grad_out.data(), out_f, x.data(),
             F, T(0), g.weight.data(), F);
  blas::gemm(false, false, B, F, out_f, T(1), grad_out.data(), out_f,
             weight.data(), F, T(0), g.input.data(), F);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t o = 0; o < out_f; ++o) g.bias[o] += grad_out(b, o);
  }
  return g;
}

template <typename T>
struct SoftmaxXentResult {
  T loss;             // mean over the batch
  Tensor<T> grad;     // d(mean loss)/d(logits), [B,K]
  Tensor<T> probs;    // softmax probabilities, [B,K]
};

template <typename T>
SoftmaxXentResult<T> softmax_cross_entropy(const Tensor<T>& logits,
                                           const std::vector<int>& labels) {
  const std::size_t B = logits.extent(0), K = logits.extent(1);
  if (labels.size() != B) {
    throw ShapeError("softmax_cross_entropy: batch mismatch (" +
                     std::to_string(B) + " logits vs " +
                     std::to_string(labels.size()) + " labels)");
  }
  SoftmaxXentResult<T> r{T(0), Tensor<T>({B, K}), Tensor<T>({B, K})};
  for (std::size_t b = 0; b < B; ++b) {
    T mx = logits(b, std::size_t{0});
    for (std::size_t j = 1; j < K; ++j) mx = std::max(mx, logits(b, j));
    T sum = T(0);
    for (std::size_t j = 0; j < K; ++j) {
      const T e = std::exp(logits(b, j) - mx);
      r.probs(b, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < K; ++j) r.probs(b, j) /= sum;
    const int y = labels[b];
    r.loss -= std::log(std::max(r.probs(b, static_cast<std::size_t>(y)),
                                std::numeric_limits<T>::min()));
    for (std::size_t j = 0; j < K; ++j) {
      r.grad(b, j) =
          (r.probs(b, j) - (static_cast<int>(j) == y ? T(1) : T(0))) / T(B);
    }
  }
  r.loss /= T(B);
  return r;
}

}  // namespace orn::nn

#endif  // ORN_NN_OPS_HPP_
