#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "orn/arf.hpp"
#include "orn/rng.hpp"

using orn::Arf;
using orn::RotationAngle;
using orn::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

Arf<double> random_arf(std::size_t w, std::size_t n, Rng& rng) {
  Arf<double> f(w, n);
  for (std::size_t i = 0; i < f.weights.numel(); ++i) {
    f.weights[i] = rng.uniform(-1.0, 1.0);
  }
  return f;
}

double max_abs_diff(const Arf<double>& a, const Arf<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.weights.numel(); ++i) {
    m = std::max(m, std::abs(a.weights[i] - b.weights[i]));
  }
  return m;
}

double energy(const Arf<double>& f) {
  double s = 0;
  for (std::size_t i = 0; i < f.weights.numel(); ++i) {
    s += f.weights[i] * f.weights[i];
  }
  return s;
}

}  // namespace

TEST_CASE("ring index table matches the published mapping") {
  const int expected[3][3] = {{7, 0, 1}, {6, -1, 2}, {5, 4, 3}};
  std::set<int> seen;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(orn::kRingIndex[r][c] == expected[r][c]);
      if (orn::kRingIndex[r][c] >= 0) seen.insert(orn::kRingIndex[r][c]);
    }
  }
  CHECK(seen.size() == 8);  // bijection over the eight non-center cells
  // Ring position 0 is grid (0, 1): top edge midpoint, row 0 col 1.
  CHECK(orn::kRingCells[0] == std::pair<int, int>{0, 1});
}

TEST_CASE("rotation angle reduces k*2pi/N exactly") {
  CHECK(RotationAngle::step(0, 8).radians == 0.0);
  CHECK(RotationAngle::step(8, 8).radians == 0.0);
  CHECK(RotationAngle::step(-2, 8).radians ==
        doctest::Approx(2 * kPi * 6 / 8).epsilon(1e-15));
  CHECK(RotationAngle::from_radians(2 * kPi).radians ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("coordinate_rotate: zero angle is the identity") {
  Rng rng(11);
  Arf<double> f = random_arf(5, 8, rng);
  Arf<double> g = orn::coordinate_rotate(f, RotationAngle{0.0});
  CHECK(max_abs_diff(f, g) < 1e-12);
}

TEST_CASE("coordinate_rotate: 1x1 filters are fixed points for any angle") {
  Rng rng(12);
  Arf<double> f = random_arf(1, 8, rng);
  for (double theta : {0.3, 1.7, kPi, 5.1}) {
    Arf<double> g = orn::coordinate_rotate(f, RotationAngle{theta});
    CHECK(max_abs_diff(f, g) < 1e-12);
  }
}

TEST_CASE("coordinate_rotate moves grid (0,1) to (1,0) under pi/2") {
  // Single unit mass at grid point (i=0, j=1); clockwise quarter turn lands
  // it on (1, 0) with no interpolation blur.
  Arf<double> f(3, 1);
  f.at_grid(0, 1, 0) = 1.0;
  Arf<double> g = orn::coordinate_rotate(f, RotationAngle{kPi / 2});
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const double expected = (i == 1 && j == 0) ? 1.0 : 0.0;
      CHECK(g.at_grid(i, j, 0) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("coordinate_rotate preserves the origin cell") {
  Rng rng(13);
  Arf<double> f = random_arf(5, 4, rng);
  for (double theta : {0.0, 0.4, 1.1, kPi / 3, 2.9}) {
    Arf<double> g = orn::coordinate_rotate(f, RotationAngle{theta});
    for (std::size_t n = 0; n < 4; ++n) {
      CHECK(g.at_grid(0, 0, n) ==
            doctest::Approx(f.at_grid(0, 0, n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("coordinate_rotate never increases energy") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    Arf<double> f = random_arf(trial % 2 ? 3 : 5, 8, rng);
    const double theta = rng.uniform(0.0, 2 * kPi);
    Arf<double> g = orn::coordinate_rotate(f, RotationAngle{theta});
    CHECK(energy(g) <= energy(f) + 1e-9);
  }
}

TEST_CASE("orientation_spin: zero angle is the identity") {
  Rng rng(15);
  Arf<double> f = random_arf(3, 8, rng);
  Arf<double> g = orn::orientation_spin(f, RotationAngle{0.0});
  CHECK(max_abs_diff(f, g) < 1e-12);
}

TEST_CASE("orientation_spin by 2pi/N shifts a one-hot channel vector") {
  for (std::size_t n : {4ul, 8ul, 16ul}) {
    Arf<double> f(1, n);
    f.weights(0, 0, std::size_t{0}) = 1.0;
    Arf<double> g = orn::orientation_spin(f, RotationAngle::step(1, n));
    for (std::size_t m = 0; m < n; ++m) {
      const double expected = (m == 1) ? 1.0 : 0.0;
      CHECK(g.weights(0, 0, m) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("orientation_spin by pi with N=4 swaps vector halves") {
  Arf<double> f(1, 4);
  const double a = 0.3, b = -1.2, c = 2.5, d = 0.9;
  f.weights(0, 0, std::size_t{0}) = a;
  f.weights(0, 0, std::size_t{1}) = b;
  f.weights(0, 0, std::size_t{2}) = c;
  f.weights(0, 0, std::size_t{3}) = d;
  Arf<double> g = orn::orientation_spin(f, RotationAngle{kPi});
  CHECK(g.weights(0, 0, std::size_t{0}) == doctest::Approx(c).epsilon(1e-12));
  CHECK(g.weights(0, 0, std::size_t{1}) == doctest::Approx(d).epsilon(1e-12));
  CHECK(g.weights(0, 0, std::size_t{2}) == doctest::Approx(a).epsilon(1e-12));
  CHECK(g.weights(0, 0, std::size_t{3}) == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("orientation_spin forward then backward is identity at grid angles") {
  // At angles k*2pi/N the spin is an integer circular shift, so the inverse
  // spin recovers the input exactly (up to round-off).
  Rng rng(16);
  for (std::size_t n : {4ul, 8ul, 16ul}) {
    Arf<double> f = random_arf(3, n, rng);
    for (long k = 0; k < static_cast<long>(n); ++k) {
      const RotationAngle t = RotationAngle::step(k, n);
      Arf<double> g = orn::orientation_spin(
          orn::orientation_spin(f, t), RotationAngle{-t.radians});
      CHECK(max_abs_diff(f, g) < 1e-9);
    }
  }
}

TEST_CASE("orientation_spin at grid angles equals integer circular shift") {
  Rng rng(17);
  for (std::size_t n : {4ul, 8ul, 16ul}) {
    Arf<double> f = random_arf(1, n, rng);
    for (long k = 0; k < static_cast<long>(n); ++k) {
      Arf<double> g = orn::orientation_spin(f, RotationAngle::step(k, n));
      for (std::size_t m = 0; m < n; ++m) {
        const std::size_t src = (m + n - static_cast<std::size_t>(k)) % n;
        CHECK(g.weights(0, 0, m) ==
              doctest::Approx(f.weights(0, 0, src)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("rotate_arf_exact: zero and full-turn angles are the identity") {
  Rng rng(18);
  Arf<double> f = random_arf(3, 8, rng);
  CHECK(max_abs_diff(f, orn::rotate_arf_exact(f, RotationAngle{0.0})) <
        1e-12);
  CHECK(max_abs_diff(
            f, orn::rotate_arf_exact(f, RotationAngle::from_radians(2 * kPi)))
        < 1e-9);
}

TEST_CASE("rotate_arf_exact composes at axis-aligned angles") {
  Rng rng(19);
  Arf<double> f = random_arf(3, 8, rng);
  Arf<double> two_quarters = orn::rotate_arf_exact(
      orn::rotate_arf_exact(f, RotationAngle{kPi / 2}),
      RotationAngle{kPi / 2});
  Arf<double> half = orn::rotate_arf_exact(f, RotationAngle{kPi});
  CHECK(max_abs_diff(two_quarters, half) < 1e-6);
}

TEST_CASE("rotate_arf_fast: k=0 and k=N are exact identities") {
  Rng rng(20);
  Arf<double> f = random_arf(3, 8, rng);
  CHECK(max_abs_diff(f, orn::rotate_arf_fast(f, 0)) == 0.0);
  CHECK(max_abs_diff(f, orn::rotate_arf_fast(f, 8)) == 0.0);
}

TEST_CASE("rotate_arf_fast composes additively") {
  Rng rng(21);
  Arf<double> f = random_arf(3, 8, rng);
  for (long k = 0; k < 8; ++k) {
    for (long m = 0; m < 8; ++m) {
      Arf<double> lhs = orn::rotate_arf_fast(orn::rotate_arf_fast(f, m), k);
      Arf<double> rhs = orn::rotate_arf_fast(f, k + m);
      CHECK(max_abs_diff(lhs, rhs) == 0.0);
    }
  }
}

TEST_CASE("fast path equals exact path at multiples of pi/2") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    Arf<double> f = random_arf(3, 8, rng);
    for (long k : {0l, 2l, 4l, 6l}) {
      Arf<double> fast = orn::rotate_arf_fast(f, k);
      Arf<double> exact = orn::rotate_arf_exact(f, RotationAngle::step(k, 8));
      CHECK(max_abs_diff(fast, exact) < 1e-9);
    }
  }
}

TEST_CASE("rotate_arf_fast on 1x1 filters is a pure channel shift") {
  Rng rng(23);
  for (std::size_t n : {4ul, 8ul, 16ul}) {
    Arf<double> f = random_arf(1, n, rng);
    Arf<double> g = orn::rotate_arf_fast(f, 3);
    for (std::size_t m = 0; m < n; ++m) {
      CHECK(g.weights(0, 0, m) == f.weights(0, 0, (m + n - 3) % n));
    }
  }
}

TEST_CASE("rotate_arf_fast rejects unsupported geometry") {
  CHECK(orn::fast_path_admissible(1, 4));
  CHECK(orn::fast_path_admissible(3, 8));
  CHECK_FALSE(orn::fast_path_admissible(5, 8));
  CHECK_FALSE(orn::fast_path_admissible(3, 4));
  Rng rng(24);
  Arf<double> f = random_arf(5, 8, rng);
  CHECK_THROWS_AS(orn::rotate_arf_fast(f, 1), std::invalid_argument);
}
