#include <cmath>
#include <limits>

#include "doctest.h"
#include "orn/adadelta.hpp"
#include "orn/rng.hpp"
#include "orn/tensor.hpp"

using orn::AdadeltaState;
using orn::Rng;
using orn::ShapeError;
using orn::Tensor;

TEST_CASE("tensor shape product equals element count") {
  Tensor<float> t({2, 3, 4});
  CHECK(t.numel() == 24);
  CHECK(t.extent(0) == 2);
  CHECK(t.extent(2) == 4);
  t.reshape({4, 6});
  CHECK(t.numel() == 24);
  CHECK_THROWS_AS(t.reshape({5, 5}), ShapeError);
}

TEST_CASE("tensor element access is row-major") {
  Tensor<double> t({2, 3});
  for (std::size_t i = 0; i < 6; ++i) t[i] = static_cast<double>(i);
  CHECK(t(0, 2) == 2.0);
  CHECK(t(1, 0) == 3.0);
}

TEST_CASE("rng is deterministic and serializable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  const auto snap = a.state();
  const double x = a.uniform();
  Rng c(0);
  c.set_state(snap);
  CHECK(c.uniform() == x);
}

TEST_CASE("rng uniform stays inside requested interval") {
  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = r.uniform(-0.25, 0.75);
    CHECK(v >= -0.25);
    CHECK(v < 0.75);
  }
}

TEST_CASE("adadelta: zero gradient leaves param unchanged, decays state") {
  Tensor<double> p({3});
  p.fill(1.5);
  Tensor<double> g({3});
  g.fill(0.0);
  AdadeltaState<double> s({3});
  s.acc_grad_sq.fill(4.0);
  s.acc_update_sq.fill(2.0);
  orn::adadelta_step(p, g, s);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(p[i] == doctest::Approx(1.5));
    CHECK(s.acc_grad_sq[i] == doctest::Approx(0.9 * 4.0));
    CHECK(s.acc_update_sq[i] == doctest::Approx(0.9 * 2.0));
  }
}

TEST_CASE("adadelta: first step from zeroed state matches the recurrence") {
  const double g = 0.3, rho = 0.9, eps = 1e-6;
  Tensor<double> p({1});
  p[0] = 0.0;
  Tensor<double> grad({1});
  grad[0] = g;
  AdadeltaState<double> s({1}, rho, eps);
  orn::adadelta_step(p, grad, s);
  const double eg = (1 - rho) * g * g;
  const double dx = -std::sqrt(eps) / std::sqrt(eg + eps) * g;
  CHECK(p[0] == doctest::Approx(dx).epsilon(1e-12));
  CHECK(s.acc_grad_sq[0] == doctest::Approx(eg).epsilon(1e-12));
  CHECK(s.acc_update_sq[0] ==
        doctest::Approx((1 - rho) * dx * dx).epsilon(1e-12));
}

TEST_CASE("adadelta: constant gradient drives param monotonically against g") {
  Tensor<double> p({1});
  p[0] = 0.0;
  Tensor<double> grad({1});
  grad[0] = 0.7;
  AdadeltaState<double> s({1});
  double prev = p[0];
  for (int i = 0; i < 100; ++i) {
    orn::adadelta_step(p, grad, s);
    CHECK(p[0] < prev);  // moves opposite the positive gradient every step
    prev = p[0];
  }
}

TEST_CASE("adadelta: non-finite gradient aborts the step") {
  Tensor<double> p({2});
  Tensor<double> g({2});
  g[0] = 0.0;
  g[1] = std::numeric_limits<double>::quiet_NaN();
  AdadeltaState<double> s({2});
  CHECK_THROWS_AS(orn::adadelta_step(p, g, s), std::runtime_error);
}

TEST_CASE("adadelta: shape mismatch is rejected") {
  Tensor<double> p({2});
  Tensor<double> g({3});
  AdadeltaState<double> s({2});
  CHECK_THROWS_AS(orn::adadelta_step(p, g, s), ShapeError);
}
