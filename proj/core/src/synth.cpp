#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "orn/dataset.hpp"
#include "orn/rng.hpp"

namespace orn::data {

namespace {

struct P {
  double x, y;
};

using Stroke = std::vector<P>;

Stroke ellipse(double cx, double cy, double rx, double ry, int segments = 14,
               double from = 0.0, double to = 2.0 * std::numbers::pi) {
  Stroke s;
  for (int i = 0; i <= segments; ++i) {
    const double a = from + (to - from) * i / segments;
    s.push_back({cx + rx * std::sin(a), cy - ry * std::cos(a)});
  }
  return s;
}

// Hand-laid stroke skeletons in 28x28 space (x right, y down). Shapes are
// distinct modulo rotation: 6 carries a curved hook into a bottom loop, 9 a
// straight stem off a top loop, 7 a crossbar.
std::vector<Stroke> digit_strokes(int digit) {
  switch (digit) {
    case 0:
      return {ellipse(14, 14, 5.2, 7.4)};
    case 1:
      return {{{11.0, 9.5}, {14.0, 6.5}, {14.0, 21.5}}};
    case 2:
      return {{{9.5, 10.0},
               {10.5, 7.5},
               {13.5, 6.5},
               {16.5, 7.3},
               {18.2, 9.8},
               {17.3, 12.5},
               {9.5, 21.0},
               {18.8, 21.0}}};
    case 3:
      return {{{10.0, 8.0},
               {13.8, 6.5},
               {17.4, 9.0},
               {14.2, 12.8},
               {17.9, 16.3},
               {13.8, 21.4},
               {9.7, 19.8}}};
    case 4:
      return {{{16.5, 21.5}, {16.5, 6.5}, {8.5, 16.5}, {20.0, 16.5}}};
    case 5:
      return {{{18.0, 6.5},
               {10.2, 6.5},
               {9.6, 12.8},
               {14.6, 11.8},
               {18.4, 15.3},
               {15.0, 21.0},
               {9.6, 19.8}}};
    case 6:
      return {{{17.3, 6.8}, {13.2, 7.6}, {10.4, 11.0}, {9.8, 16.0}},
              ellipse(13.9, 17.2, 4.1, 4.3)};
    case 7:
      return {{{9.0, 7.0}, {19.0, 7.0}, {13.2, 21.5}},
              {{12.0, 14.0}, {17.2, 14.0}}};
    case 8:
      return {ellipse(14, 10.2, 3.7, 3.8), ellipse(14, 17.4, 4.5, 4.3)};
    case 9:
      return {ellipse(13.6, 10.6, 4.1, 4.2),
              {{17.7, 10.0}, {17.4, 21.5}}};
  }
  return {};
}

double dist_to_segment(double px, double py, const P& a, const P& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  const double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

LabeledImageSet synth_digits(std::size_t count, std::uint64_t seed) {
  LabeledImageSet set;
  set.images = Tensor<float>({count, 28, 28});
  set.labels.resize(count);
  set.provenance.variant = "synth";
  set.provenance.seed = seed;
  Rng rng(seed);

  Tensor<float> canvas({28, 28});
  for (std::size_t i = 0; i < count; ++i) {
    const int digit = static_cast<int>(rng.uniform_int(10));
    set.labels[i] = digit;

    // Per-sample jitter: small slant, anisotropic scale, shear, offset,
    // stroke weight, and control-point noise.
    const double slant = rng.uniform(-0.22, 0.22);
    const double sx = rng.uniform(0.56, 1.12);
    const double sy = rng.uniform(0.56, 1.12);
    const double shear = rng.uniform(-0.38, 0.38);
    const double tx = rng.uniform(-2.4, 2.4);
    const double ty = rng.uniform(-2.4, 2.4);
    const double halfwidth = rng.uniform(0.55, 1.55);
    const double contrast = rng.uniform(0.4, 1.0);
    const double ca = std::cos(slant), sa = std::sin(slant);

    // Low-frequency per-sample warp so strokes bend, not just jitter.
    const double wax = rng.uniform(-1.8, 1.8), way = rng.uniform(-1.8, 1.8);
    const double wfx = rng.uniform(0.15, 0.45), wfy = rng.uniform(0.15, 0.45);
    const double wpx = rng.uniform(0.0, 6.28), wpy = rng.uniform(0.0, 6.28);

    std::vector<Stroke> strokes = digit_strokes(digit);
    for (auto& s : strokes) {
      for (auto& p : s) {
        double x = p.x - 14.0 + rng.uniform(-1.1, 1.1);
        double y = p.y - 14.0 + rng.uniform(-1.1, 1.1);
        x += wax * std::sin(wfy * y + wpy);
        y += way * std::sin(wfx * x + wpx);
        x += shear * y;
        x *= sx;
        y *= sy;
        const double xr = ca * x - sa * y;
        const double yr = sa * x + ca * y;
        p.x = xr + 14.0 + tx;
        p.y = yr + 14.0 + ty;
      }
    }

    canvas.fill(0.0f);
    for (const auto& s : strokes) {
      for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        // Rasterize only near the segment's bounding box.
        const double pad = halfwidth + 1.5;
        const int x0 = std::max(0, static_cast<int>(std::floor(
                                       std::min(s[k].x, s[k + 1].x) - pad)));
        const int x1 = std::min(27, static_cast<int>(std::ceil(
                                        std::max(s[k].x, s[k + 1].x) + pad)));
        const int y0 = std::max(0, static_cast<int>(std::floor(
                                       std::min(s[k].y, s[k + 1].y) - pad)));
        const int y1 = std::min(27, static_cast<int>(std::ceil(
                                        std::max(s[k].y, s[k + 1].y) + pad)));
        for (int y = y0; y <= y1; ++y) {
          for (int x = x0; x <= x1; ++x) {
            const double d = dist_to_segment(x, y, s[k], s[k + 1]);
            const double v =
                std::min(1.0, std::max(0.0, halfwidth + 0.5 - d));
            auto& px = canvas(static_cast<std::size_t>(y),
                              static_cast<std::size_t>(x));
            px = std::max(px, static_cast<float>(v));
          }
        }
      }
    }

    // Mild blur plus background noise keep the task from saturating.
    float* dst = set.images.data() + i * 28 * 28;
    for (int y = 0; y < 28; ++y) {
      for (int x = 0; x < 28; ++x) {
        double acc = 0.0, wsum = 0.0;
        static const double k3[3] = {1.0, 2.0, 1.0};
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || xx < 0 || yy > 27 || xx > 27) continue;
            const double w = k3[dy + 1] * k3[dx + 1];
            acc += w * canvas(static_cast<std::size_t>(yy),
                              static_cast<std::size_t>(xx));
            wsum += w;
          }
        }
        double v = contrast * (acc / wsum) + rng.uniform(0.0, 0.22);
        dst[y * 28 + x] = static_cast<float>(std::min(1.0, v));
      }
    }
  }
  return set;
}

}  // namespace orn::data
