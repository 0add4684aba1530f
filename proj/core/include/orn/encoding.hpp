#ifndef ORN_ENCODING_HPP_
#define ORN_ENCODING_HPP_

#include <cstdint>
#include <vector>

#include "orn/tensor.hpp"

namespace orn {

// Top-layer rotation-invariant encodings over 1x1xN oriented descriptors.
// Descriptors are [B, C, N]: per sample, per feature, one N-vector of
// oriented responses.

template <typename T>
struct OrAlignResult {
  Tensor<T> aligned;                    // [B, C, N]
  std::vector<std::uint32_t> dominant;  // D per (sample, feature)
};

// SIFT-like alignment: spin each feature's N-vector so its dominant
// (argmax) orientation lands on index 0. Ties break to the smallest index.
template <typename T>
OrAlignResult<T> oralign_batch(const Tensor<T>& desc) {
  if (desc.rank() != 3 || desc.extent(2) == 0) {
    throw ShapeError("oralign: descriptor must be [B,C,N] with N >= 1, got " +
                     desc.shape_str());
  }
  const std::size_t bc = desc.extent(0) * desc.extent(1);
  const std::size_t n = desc.extent(2);
  OrAlignResult<T> r{Tensor<T>(desc.shape()), {}};
  r.dominant.resize(bc);
  for (std::size_t f = 0; f < bc; ++f) {
    const T* v = desc.data() + f * n;
    std::size_t d = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (v[i] > v[d]) d = i;
    }
    r.dominant[f] = static_cast<std::uint32_t>(d);
    T* out = r.aligned.data() + f * n;
    for (std::size_t i = 0; i < n; ++i) out[i] = v[(i + d) % n];
  }
  return r;
}

// Inverse spin of the upstream gradient; the argmax selection is treated as
// a constant of the forward pass.
template <typename T>
Tensor<T> oralign_backward_batch(const Tensor<T>& upstream,
                                 const std::vector<std::uint32_t>& dominant) {
  const std::size_t bc = upstream.extent(0) * upstream.extent(1);
  const std::size_t n = upstream.extent(2);
  if (dominant.size() != bc) {
    throw std::invalid_argument(
        "oralign_backward: dominant-orientation record does not match the "
        "forward call (" +
        std::to_string(dominant.size()) + " vs " + std::to_string(bc) + ")");
  }
  Tensor<T> gin(upstream.shape());
  for (std::size_t f = 0; f < bc; ++f) {
    const T* g = upstream.data() + f * n;
    T* out = gin.data() + f * n;
    const std::size_t d = dominant[f];
    for (std::size_t i = 0; i < n; ++i) out[(i + d) % n] = g[i];
  }
  return gin;
}

template <typename T>
struct OrPoolingResult {
  Tensor<T> output;                   // [B, C]
  std::vector<std::uint32_t> argmax;  // winning channel per (sample, feature)
};

// Max over orientation channels: an N-fold dimension reduction that discards
// arrangement information.
template <typename T>
OrPoolingResult<T> orpooling_batch(const Tensor<T>& desc) {
  if (desc.rank() != 3 || desc.extent(2) == 0) {
    throw ShapeError("orpooling: descriptor must be [B,C,N] with N >= 1, got " +
                     desc.shape_str());
  }
  const std::size_t bc = desc.extent(0) * desc.extent(1);
  const std::size_t n = desc.extent(2);
  OrPoolingResult<T> r{Tensor<T>({desc.extent(0), desc.extent(1)}), {}};
  r.argmax.resize(bc);
  for (std::size_t f = 0; f < bc; ++f) {
    const T* v = desc.data() + f * n;
    std::size_t d = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (v[i] > v[d]) d = i;
    }
    r.argmax[f] = static_cast<std::uint32_t>(d);
    r.output[f] = v[d];
  }
  return r;
}

template <typename T>
Tensor<T> orpooling_backward_batch(const Tensor<T>& grad_out,
                                   const std::vector<std::uint32_t>& argmax,
                                   std::size_t n) {
  const std::size_t bc = grad_out.numel();
  Tensor<T> gin({grad_out.extent(0), grad_out.extent(1), n});
  for (std::size_t f = 0; f < bc; ++f) {
    gin[f * n + argmax[f]] = grad_out[f];
  }
  return gin;
}

// Single-sample wrappers over [C, N] descriptors.
template <typename T>
OrAlignResult<T> oralign(const Tensor<T>& desc) {
  Tensor<T> batched(desc);
  batched.reshape({1, desc.extent(0), desc.extent(1)});
  OrAlignResult<T> r = oralign_batch(batched);
  r.aligned.reshape({desc.extent(0), desc.extent(1)});
  return r;
}

template <typename T>
OrPoolingResult<T> orpooling(const Tensor<T>& desc) {
  Tensor<T> batched(desc);
  batched.reshape({1, desc.extent(0), desc.extent(1)});
  OrPoolingResult<T> r = orpooling_batch(batched);
  r.output.reshape({desc.extent(0)});
  return r;
}

}  // namespace orn

#endif  // ORN_ENCODING_HPP_
