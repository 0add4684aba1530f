#include "orn/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace orn::pgm {

namespace {

unsigned char quantise(float v) {
  const float c = std::min(1.0f, std::max(0.0f, v));
  return static_cast<unsigned char>(std::lround(c * 255.0f));
}

void write_p5(const std::vector<unsigned char>& pixels, std::size_t h,
              std::size_t w, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << "P5\n" << w << " " << h << "\n255\n";
  f.write(reinterpret_cast<const char*>(pixels.data()),
          static_cast<std::streamsize>(pixels.size()));
  if (!f) throw std::runtime_error(path + ": write failed");
}

}  // namespace

void write(const Tensor<float>& img, const std::string& path) {
  if (img.rank() != 2) {
    throw ShapeError("pgm::write expects a [H, W] image, got " +
                     img.shape_str());
  }
  const std::size_t h = img.extent(0), w = img.extent(1);
  std::vector<unsigned char> px(h * w);
  for (std::size_t i = 0; i < h * w; ++i) px[i] = quantise(img[i]);
  write_p5(px, h, w, path);
}

void write_grid(const Tensor<float>& images, const std::string& path,
                std::size_t columns) {
  if (images.rank() != 3) {
    throw ShapeError("pgm::write_grid expects [n, H, W], got " +
                     images.shape_str());
  }
  const std::size_t n = images.extent(0);
  const std::size_t h = images.extent(1), w = images.extent(2);
  if (n == 0) throw std::runtime_error("pgm::write_grid: empty image stack");
  std::size_t cols = columns;
  if (cols == 0) {
    cols = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(n))));
  }
  const std::size_t rows = (n + cols - 1) / cols;
  const std::size_t gh = rows * h + (rows - 1);
  const std::size_t gw = cols * w + (cols - 1);
  std::vector<unsigned char> px(gh * gw, 64);  // mid-gray separators
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = i / cols, c = i % cols;
    const float* src = images.data() + i * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      unsigned char* dst = px.data() + (r * (h + 1) + y) * gw + c * (w + 1);
      for (std::size_t x = 0; x < w; ++x) dst[x] = quantise(src[y * w + x]);
    }
  }
  write_p5(px, gh, gw, path);
}

}  // namespace orn::pgm
