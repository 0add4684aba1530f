#ifndef ORN_ORCONV_HPP_
#define ORN_ORCONV_HPP_

#include <vector>

#include "orn/arf.hpp"
#include "orn/nn_ops.hpp"
#include "orn/tensor.hpp"

namespace orn {

// One ORConv layer's parameters: an independent ARF per (output feature,
// input feature) pair plus a per-feature bias shared across orientation
// channels. Only canonical filters are materialised; the rotated variants
// the layer convolves with are derived per call.
template <typename T>
struct ArfBank {
  std::vector<std::vector<Arf<T>>> filters;  // [C_out][C_in]
  Tensor<T> bias;                            // [C_out]

  ArfBank() = default;

  ArfBank(std::size_t c_out, std::size_t c_in, std::size_t w, std::size_t n)
      : bias({c_out}) {
    filters.resize(c_out);
    for (auto& row : filters) {
      row.reserve(c_in);
      for (std::size_t i = 0; i < c_in; ++i) row.emplace_back(w, n);
    }
  }

  std::size_t out_features() const { return filters.size(); }
  std::size_t in_features() const {
    return filters.empty() ? 0 : filters[0].size();
  }
  std::size_t width() const { return filters[0][0].width(); }
  std::size_t orientations() const { return filters[0][0].orientations(); }

  // Materialised scalar count: C_out*C_in*W*W*N + C_out, an N-fold saving
  // over the virtual bank the layer emulates.
  std::size_t parameter_count() const {
    return out_features() * in_features() * width() * width() *
               orientations() +
           bias.numel();
  }
};

template <typename T>
Arf<T> rotate_arf(const Arf<T>& f, long k) {
  if (fast_path_admissible(f.width(), f.orientations())) {
    return rotate_arf_fast(f, k);
  }
  return rotate_arf_exact(
      f, RotationAngle::step(k, f.orientations()));
}

template <typename T>
Arf<T> rotate_arf_adjoint(const Arf<T>& grad, long k) {
  if (fast_path_admissible(grad.width(), grad.orientations())) {
    return rotate_arf_fast(grad, -k);
  }
  return rotate_arf_exact_adjoint(
      grad, RotationAngle::step(k, grad.orientations()));
}

// Expands a bank into a conventional kernel tensor [C_out*N, C_in*N, W, W]
// holding every rotated variant; output channel co*N+k is produced by the
// theta_k-rotated ARFs of feature co.
template <typename T>
Tensor<T> expand_bank_kernels(const ArfBank<T>& bank) {
  const std::size_t co = bank.out_features(), ci = bank.in_features();
  const std::size_t w = bank.width(), n = bank.orientations();
  Tensor<T> kernels({co * n, ci * n, w, w});
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t i = 0; i < ci; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const Arf<T> rot = rotate_arf(bank.filters[o][i], static_cast<long>(k));
        for (std::size_t ch = 0; ch < n; ++ch) {
          for (std::size_t r = 0; r < w; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
              kernels(o * n + k, i * n + ch, r, c) = rot.weights(r, c, ch);
            }
          }
        }
      }
    }
  }
  return kernels;
}

template <typename T>
void check_orconv_input(const ArfBank<T>& bank, const Tensor<T>& input) {
  if (input.rank() != 5) {
    throw ShapeError("orconv: input must be [B,C,N,H,W], got " +
                     input.shape_str());
  }
  if (input.extent(1) != bank.in_features()) {
    throw ShapeError("orconv: feature-channel mismatch on axis 1 (" +
                     std::to_string(input.extent(1)) + " vs bank C_in " +
                     std::to_string(bank.in_features()) + ")");
  }
  if (input.extent(2) != bank.orientations()) {
    throw ShapeError("orconv: orientation mismatch on axis 2 (" +
                     std::to_string(input.extent(2)) + " vs bank N " +
                     std::to_string(bank.orientations()) + ")");
  }
}

template <typename T>
struct OrConvResult {
  Tensor<T> output;            // [B, C_out, N, H', W']
  Tensor<T> expanded_kernels;  // kept so backward differentiates the same path
};

// Oriented Response Convolution: output orientation channel k of feature co
// is the sum over input features and orientation channels of the theta_k
// rotated filter channel correlated with the input channel.
template <typename T>
OrConvResult<T> orconv_forward_batch(const ArfBank<T>& bank,
                                     const Tensor<T>& input,
                                     std::size_t pad) {
  check_orconv_input(bank, input);
  const std::size_t b = input.extent(0), ci = input.extent(1);
  const std::size_t n = input.extent(2);
  const std::size_t h = input.extent(3), w_in = input.extent(4);
  const std::size_t co = bank.out_features();

  Tensor<T> kernels = expand_bank_kernels(bank);
  Tensor<T> flat(input);
  flat.reshape({b, ci * n, h, w_in});
  Tensor<T> out = nn::conv2d_batch(flat, kernels, pad);
  const std::size_t ho = out.extent(2), wo = out.extent(3);
  // Shared bias per feature, uniform over orientation channels.
  for (std::size_t bb = 0; bb < b; ++bb) {
    for (std::size_t o = 0; o < co; ++o) {
      const T bias = bank.bias[o];
      if (bias == T(0)) continue;
      T* p = out.data() + ((bb * co * n) + o * n) * ho * wo;
      for (std::size_t i = 0; i < n * ho * wo; ++i) p[i] += bias;
    }
  }
  out.reshape({b, co, n, ho, wo});
  return {std::move(out), std::move(kernels)};
}

// Single-sample forward: input [C,N,H,W] -> [C_out,N,H',W'].
template <typename T>
Tensor<T> orconv_forward(const ArfBank<T>& bank, const Tensor<T>& input,
                         std::size_t pad) {
  Tensor<T> batched(input);
  batched.reshape({1, input.extent(0), input.extent(1), input.extent(2),
                   input.extent(3)});
  Tensor<T> out = orconv_forward_batch(bank, batched, pad).output;
  out.reshape({out.extent(1), out.extent(2), out.extent(3), out.extent(4)});
  return out;
}

template <typename T>
struct OrConvGrads {
  std::vector<std::vector<Tensor<T>>> filters;  // [C_out][C_in] of [W,W,N]
  Tensor<T> bias;                               // [C_out]
  Tensor<T> input;                              // [B, C_in, N, H, W]
};

// Collective filter update: the gradient of each rotated variant is pulled
// back through the adjoint of its rotation and summed into the canonical
// filter's gradient, so the one materialised ARF absorbs every orientation's
// error signal.
template <typename T>
OrConvGrads<T> orconv_backward_batch(const ArfBank<T>& bank,
                                     const Tensor<T>& input,
                                     const Tensor<T>& expanded_kernels,
                                     const Tensor<T>& grad_out,
                                     std::size_t pad) {
  check_orconv_input(bank, input);
  const std::size_t b = input.extent(0), ci = input.extent(1);
  const std::size_t n = input.extent(2);
  const std::size_t h = input.extent(3), w_in = input.extent(4);
  const std::size_t co = bank.out_features();
  const std::size_t w = bank.width();

  Tensor<T> flat_in(input);
  flat_in.reshape({b, ci * n, h, w_in});
  Tensor<T> flat_gout(grad_out);
  const std::size_t ho = grad_out.extent(3), wo = grad_out.extent(4);
  flat_gout.reshape({b, co * n, ho, wo});

  nn::ConvGrads<T> cg =
      nn::conv2d_backward_batch(flat_in, expanded_kernels, flat_gout, pad);

  OrConvGrads<T> g;
  g.input = std::move(cg.input);
  g.input.reshape({b, ci, n, h, w_in});
  g.bias = Tensor<T>({co});
  for (std::size_t bb = 0; bb < b; ++bb) {
    for (std::size_t o = 0; o < co; ++o) {
      const T* p = flat_gout.data() + ((bb * co + o) * n) * ho * wo;
      T acc = T(0);
      for (std::size_t i = 0; i < n * ho * wo; ++i) acc += p[i];
      g.bias[o] += acc;
    }
  }

  g.filters.resize(co);
  for (std::size_t o = 0; o < co; ++o) {
    g.filters[o].reserve(ci);
    for (std::size_t i = 0; i < ci; ++i) {
      Arf<T> total(w, n);
      for (std::size_t k = 0; k < n; ++k) {
        Arf<T> delta(w, n);  // d L / d F_theta_k for this (o, i) pair
        for (std::size_t ch = 0; ch < n; ++ch) {
          for (std::size_t r = 0; r < w; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
              delta.weights(r, c, ch) = cg.kernels(o * n + k, i * n + ch, r, c);
            }
          }
        }
        const Arf<T> aligned = rotate_arf_adjoint(delta, static_cast<long>(k));
        for (std::size_t e = 0; e < total.weights.numel(); ++e) {
          total.weights[e] += aligned.weights[e];
        }
      }
      g.filters[o].push_back(std::move(total.weights));
    }
  }
  return g;
}

// Lifts a plain image stack to an omnidirectional map by replicating each
// pixel across all N orientation channels.
template <typename T>
Tensor<T> extend_to_omnidirectional_batch(const Tensor<T>& images,
                                          std::size_t n) {
  if (n < 1) throw std::invalid_argument("extend_to_omnidirectional: N >= 1");
  const std::size_t b = images.extent(0), c = images.extent(1);
  const std::size_t h = images.extent(2), w = images.extent(3);
  Tensor<T> out({b, c, n, h, w});
  for (std::size_t bc = 0; bc < b * c; ++bc) {
    const T* src = images.data() + bc * h * w;
    for (std::size_t k = 0; k < n; ++k) {
      std::copy(src, src + h * w, out.data() + (bc * n + k) * h * w);
    }
  }
  return out;
}

template <typename T>
Tensor<T> extend_to_omnidirectional(const Tensor<T>& image, std::size_t n) {
  Tensor<T> batched(image);
  batched.reshape({1, image.extent(0), image.extent(1), image.extent(2)});
  Tensor<T> out = extend_to_omnidirectional_batch(batched, n);
  out.reshape({out.extent(1), out.extent(2), out.extent(3), out.extent(4)});
  return out;
}

}  // namespace orn

#endif  // ORN_ORCONV_HPP_
