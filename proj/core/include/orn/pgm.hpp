#ifndef ORN_PGM_HPP_
#define ORN_PGM_HPP_

#include <string>

#include "orn/tensor.hpp"

namespace orn::pgm {

// Writes a [H, W] tensor as a binary P5 grayscale image. Values are clamped
// to [0, 1] and quantised to 8 bits.
void write(const Tensor<float>& img, const std::string& path);

// Lays out a stack of equally-sized images [n, H, W] on a grid with 1-pixel
// separators and writes the composite as P5. `columns` of 0 picks a near
// square layout.
void write_grid(const Tensor<float>& images, const std::string& path,
                std::size_t columns = 0);

}  // namespace orn::pgm

#endif  // ORN_PGM_HPP_
