// Microbenchmarks for the hot paths: plain convolution, the two filter
// rotation paths, the full oriented-response forward/backward, and the
// invariant encoders.

#include <benchmark/benchmark.h>

#include "orn/arf.hpp"
#include "orn/blas.hpp"
#include "orn/encoding.hpp"
#include "orn/nn_ops.hpp"
#include "orn/orconv.hpp"
#include "orn/rng.hpp"

namespace {

using orn::Arf;
using orn::ArfBank;
using orn::Rng;
using orn::RotationAngle;
using orn::Tensor;

Tensor<float> random_tensor(const std::vector<std::size_t>& shape,
                            std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t(shape);
  for (std::size_t i = 0; i < t.numel(); ++i) {
    t[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  return t;
}

void BM_conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  Tensor<float> x = random_tensor({8, c, 28, 28}, 1);
  Tensor<float> k = random_tensor({c, c, 3, 3}, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(orn::nn::conv2d_batch(x, k, 1));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_conv2d)->Arg(16)->Arg(64);

void BM_rotate_fast(benchmark::State& state) {
  Rng rng(3);
  Arf<float> f(3, 8);
  for (std::size_t i = 0; i < f.weights.numel(); ++i) {
    f.weights[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  long k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(orn::rotate_arf_fast(f, ++k % 8));
  }
}
BENCHMARK(BM_rotate_fast);

void BM_rotate_exact(benchmark::State& state) {
  Rng rng(4);
  Arf<float> f(3, 8);
  for (std::size_t i = 0; i < f.weights.numel(); ++i) {
    f.weights[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  long k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        orn::rotate_arf_exact(f, RotationAngle::step(++k % 8, 8)));
  }
}
BENCHMARK(BM_rotate_exact);

void BM_orconv_forward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  ArfBank<float> bank(c, c, 3, 8);
  Rng rng(5);
  for (auto& row : bank.filters) {
    for (auto& f : row) {
      for (std::size_t i = 0; i < f.weights.numel(); ++i) {
        f.weights[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
      }
    }
  }
  Tensor<float> x = random_tensor({8, c, 8, 14, 14}, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(orn::orconv_forward_batch(bank, x, 1));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_orconv_forward)->Arg(4)->Arg(16);

void BM_orconv_backward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  ArfBank<float> bank(c, c, 3, 8);
  Tensor<float> x = random_tensor({8, c, 8, 14, 14}, 7);
  auto fwd = orn::orconv_forward_batch(bank, x, 1);
  Tensor<float> g = random_tensor(fwd.output.shape(), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        orn::orconv_backward_batch(bank, x, fwd.expanded_kernels, g, 1));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_orconv_backward)->Arg(4)->Arg(16);

void BM_oralign(benchmark::State& state) {
  Tensor<float> d = random_tensor({128, 256, 8}, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(orn::oralign_batch(d));
  }
}
BENCHMARK(BM_oralign);

}  // namespace

int main(int argc, char** argv) {
  orn::blas::set_threads(1);
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
