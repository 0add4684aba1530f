#ifndef ORN_ARF_HPP_
#define ORN_ARF_HPP_

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "orn/tensor.hpp"

namespace orn {

// Ring-index mapping for 3x3 filters: positions 0..7 run clockwise over the
// eight non-center cells starting at the top cell, i.e. the table
//   [ 7 0 1 ]
//   [ 6 . 2 ]
//   [ 5 4 3 ]
// expressed as (row, col) pairs of the 3x3 array.
inline constexpr std::array<std::pair<int, int>, 8> kRingCells = {{
    {0, 1}, {0, 2}, {1, 2}, {2, 2}, {2, 1}, {2, 0}, {1, 0}, {0, 0}}};

inline constexpr int kRingIndex[3][3] = {{7, 0, 1}, {6, -1, 2}, {5, 4, 3}};

// Rotation angle in radians, canonically reduced to [0, 2pi). Construction
// from an integer step k of 2pi/N keeps multiples exact.
struct RotationAngle {
  double radians = 0.0;

  static RotationAngle from_radians(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(theta, two_pi);
    if (r < 0) r += two_pi;
    return {r};
  }

  static RotationAngle step(long k, std::size_t n) {
    const long m = ((k % static_cast<long>(n)) + static_cast<long>(n)) %
                   static_cast<long>(n);
    return {2.0 * std::numbers::pi * static_cast<double>(m) /
            static_cast<double>(n)};
  }
};

// Active Rotating Filter: W x W x N weights viewed as N-directional points
// on a W x W grid. Only this canonical copy is learned; rotated variants are
// derived on the fly.
//
// Grid coordinates (i, j) are signed with |i|,|j| <= (W-1)/2, i rightward and
// j upward; they map onto the storage as row = half - j, col = half + i.
template <typename T>
struct Arf {
  Tensor<T> weights;  // [W, W, N]

  Arf() = default;

  explicit Arf(Tensor<T> w) : weights(std::move(w)) {
    if (weights.rank() != 3) {
      throw ShapeError("Arf: weights must be rank 3 [W,W,N], got " +
                       weights.shape_str());
    }
    if (weights.extent(0) != weights.extent(1)) {
      throw ShapeError("Arf: spatial extents differ " + weights.shape_str());
    }
    if (weights.extent(0) % 2 == 0) {
      throw ShapeError("Arf: W must be odd, got " +
                       std::to_string(weights.extent(0)));
    }
    if (weights.extent(2) < 1) {
      throw ShapeError("Arf: N must be >= 1");
    }
  }

  Arf(std::size_t w, std::size_t n) : Arf(Tensor<T>({w, w, n})) {}

  std::size_t width() const { return weights.extent(0); }
  std::size_t orientations() const { return weights.extent(2); }
  int half() const { return static_cast<int>(width()) / 2; }

  // Signed-grid element access; the (i,j) <-> (row,col) mapping is bijective.
  T& at_grid(int i, int j, std::size_t n) {
    return weights(static_cast<std::size_t>(half() - j),
                   static_cast<std::size_t>(half() + i), n);
  }
  const T& at_grid(int i, int j, std::size_t n) const {
    return weights(static_cast<std::size_t>(half() - j),
                   static_cast<std::size_t>(half() + i), n);
  }
};

namespace detail {

// Enumerates the sparse bilinear sampling pattern of a coordinate rotation:
// for each destination cell it yields up to four (source cell, weight) pairs.
// Sources outside the square grid domain contribute zero.
template <typename T, typename Visit>
void for_each_bilinear_term(const Arf<T>& f, double theta, Visit&& visit) {
  const int half = f.half();
  const double c = std::cos(theta), s = std::sin(theta);
  for (int j = half; j >= -half; --j) {
    for (int i = -half; i <= half; ++i) {
      const double p = static_cast<double>(i), q = static_cast<double>(j);
      const double ps = p * c - q * s;
      const double qs = p * s + q * c;
      if (std::max(std::abs(ps), std::abs(qs)) >
          static_cast<double>(half) + 1e-9) {
        continue;  // source falls outside the grid domain
      }
      const int u = static_cast<int>(std::floor(ps));
      const int v = static_cast<int>(std::floor(qs));
      const double mu = ps - u, om = qs - v;
      const double w[4] = {(1 - mu) * (1 - om), (1 - mu) * om, mu * (1 - om),
                           mu * om};
      const int src[4][2] = {{u, v}, {u, v + 1}, {u + 1, v}, {u + 1, v + 1}};
      for (int t = 0; t < 4; ++t) {
        if (w[t] == 0.0) continue;
        const int si = src[t][0], sj = src[t][1];
        if (std::abs(si) > half || std::abs(sj) > half) continue;
        visit(i, j, si, sj, w[t]);
      }
    }
  }
}

}  // namespace detail

// Spatial resampling step of an ARF rotation: destination grid point (p,q)
// samples source (p,q)*[[cos,sin],[-sin,cos]] by bilinear interpolation, the
// whole N-vector jointly. Total function; zero outside the domain.
template <typename T>
Arf<T> coordinate_rotate(const Arf<T>& f, RotationAngle theta) {
  Arf<T> out(f.width(), f.orientations());
  const std::size_t n = f.orientations();
  detail::for_each_bilinear_term(
      f, theta.radians, [&](int i, int j, int si, int sj, double w) {
        for (std::size_t ch = 0; ch < n; ++ch) {
          out.at_grid(i, j, ch) += T(w) * f.at_grid(si, sj, ch);
        }
      });
  return out;
}

// Adjoint (transpose) of coordinate_rotate as a linear map; used to pull
// gradients of a rotated filter back onto the canonical one.
template <typename T>
Arf<T> coordinate_rotate_adjoint(const Arf<T>& grad, RotationAngle theta) {
  Arf<T> out(grad.width(), grad.orientations());
  const std::size_t n = grad.orientations();
  detail::for_each_bilinear_term(
      grad, theta.radians, [&](int i, int j, int si, int sj, double w) {
        for (std::size_t ch = 0; ch < n; ++ch) {
          out.at_grid(si, sj, ch) += T(w) * grad.at_grid(i, j, ch);
        }
      });
  return out;
}

// Orientation spin: every grid point's N-vector is phase-shifted in the DFT
// domain (bin k multiplied by e^{-jk theta}) and transformed back; the real
// part is returned. At theta = m*2pi/N this is exactly a circular shift.
// The O(N^2) direct summation keeps the transform faithful to its defining
// formulas; N stays small in practice.
template <typename T>
Arf<T> orientation_spin(const Arf<T>& f, RotationAngle theta) {
  const std::size_t w = f.width(), n = f.orientations();
  Arf<T> out(w, n);
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<std::complex<double>> spectrum(n);
  for (std::size_t r = 0; r < w; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> x{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m) {
          const double ang = -two_pi * static_cast<double>(k * m) /
                             static_cast<double>(n);
          x += static_cast<double>(f.weights(r, c, m)) *
               std::complex<double>(std::cos(ang), std::sin(ang));
        }
        const double ph = -static_cast<double>(k) * theta.radians;
        spectrum[k] = x * std::complex<double>(std::cos(ph), std::sin(ph));
      }
      for (std::size_t m = 0; m < n; ++m) {
        std::complex<double> y{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
          const double ang = two_pi * static_cast<double>(k * m) /
                             static_cast<double>(n);
          y += spectrum[k] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out.weights(r, c, m) = T(y.real() / static_cast<double>(n));
      }
    }
  }
  return out;
}

// Exact two-step rotation: coordinate rotation then orientation spin.
template <typename T>
Arf<T> rotate_arf_exact(const Arf<T>& f, RotationAngle theta) {
  return orientation_spin(coordinate_rotate(f, theta), theta);
}

// Adjoint of rotate_arf_exact: spin adjoint is a spin by -theta, the
// coordinate step transposes to a scatter. On permutation angles this
// coincides with rotating by -theta.
template <typename T>
Arf<T> rotate_arf_exact_adjoint(const Arf<T>& grad, RotationAngle theta) {
  return coordinate_rotate_adjoint(
      orientation_spin(grad, RotationAngle::from_radians(-theta.radians)),
      theta);
}

// Permutation realization of rotation by k*2pi/N for 1x1 filters (any N) and
// 3x3 filters with N = 8: ring cells and orientation channels circularly
// shift by k, the center cell shifts channels only.
template <typename T>
Arf<T> rotate_arf_fast(const Arf<T>& f, long k_raw) {
  const std::size_t w = f.width();
  const long n = static_cast<long>(f.orientations());
  if (!(w == 1 || (w == 3 && n == 8))) {
    throw std::invalid_argument(
        "rotate_arf_fast: unsupported (W,N)=(" + std::to_string(w) + "," +
        std::to_string(n) + "); use rotate_arf_exact");
  }
  const long k = ((k_raw % n) + n) % n;
  const std::size_t nn = f.orientations();
  Arf<T> spatial(f.width(), nn);
  if (w == 1) {
    spatial = f;
  } else {
    for (std::size_t ring = 0; ring < 8; ++ring) {
      const auto [dr, dc] = kRingCells[ring];
      const auto [sr, sc] = kRingCells[(ring + 8 - static_cast<std::size_t>(k) % 8) % 8];
      for (std::size_t ch = 0; ch < nn; ++ch) {
        spatial.weights(static_cast<std::size_t>(dr),
                        static_cast<std::size_t>(dc), ch) =
            f.weights(static_cast<std::size_t>(sr),
                      static_cast<std::size_t>(sc), ch);
      }
    }
    for (std::size_t ch = 0; ch < nn; ++ch) {
      spatial.weights(1, 1, ch) = f.weights(1, 1, ch);
    }
  }
  Arf<T> out(f.width(), nn);
  for (std::size_t r = 0; r < w; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t ch = 0; ch < nn; ++ch) {
        const std::size_t src =
            (ch + nn - static_cast<std::size_t>(k) % nn) % nn;
        out.weights(r, c, ch) = spatial.weights(r, c, src);
      }
    }
  }
  return out;
}

// Whether the fast permutation path covers this filter geometry.
inline bool fast_path_admissible(std::size_t w, std::size_t n) {
  return w == 1 || (w == 3 && n == 8);
}

}  // namespace orn

#endif  // ORN_ARF_HPP_
