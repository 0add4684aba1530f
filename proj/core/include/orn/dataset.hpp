#ifndef ORN_DATASET_HPP_
#define ORN_DATASET_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "orn/tensor.hpp"

namespace orn::data {

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct Provenance {
  std::string variant = "original";
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> source_digests;
  double angle_min = 0.0;
  double angle_max = 0.0;
  std::vector<double> angles;  // per-sample rotation applied at build time
};

struct LabeledImageSet {
  Tensor<float> images;     // [n, H, W], values in [0, 1]
  std::vector<int> labels;  // n entries in [0, 9]
  Provenance provenance;

  std::size_t size() const { return labels.size(); }
  std::size_t height() const { return images.extent(1); }
  std::size_t width() const { return images.extent(2); }
};

enum class Variant {
  kOriginal,
  kRot,       // per-sample uniform [0, 2pi)
  kRotPlus,   // rot, then eight copies at 45-degree intervals
  kHalfRot,   // per-sample uniform [-pi/2, pi/2]
  kRot12kTrain,
  kRot12kTest,
};

Variant parse_variant(const std::string& name);
const char* variant_name(Variant v);

// IDX (big-endian, magic-checked) ingestion; pixels scaled to [0,1] and
// image/label counts cross-checked.
LabeledImageSet load_idx(const std::string& images_path,
                         const std::string& labels_path);
void save_idx(const LabeledImageSet& set, const std::string& images_path,
              const std::string& labels_path);

// Sidecar text file naming the build inputs so any IDX consumer can trace a
// product back to its sources.
void write_metadata(const LabeledImageSet& set, const std::string& path);

// FNV-1a 64 content hash of a file.
std::uint64_t file_digest(const std::string& path);

// Bilinear resample about the exact image center with zero fill.
Tensor<float> rotate_image(const Tensor<float>& img, double theta);

// Deterministic variant construction; pure function of (base, variant, seed).
// rot12k splits need a base of >= 62000 samples (train+test concatenated).
LabeledImageSet build_variant(const LabeledImageSet& base, Variant variant,
                              std::uint64_t seed);

LabeledImageSet concat(const LabeledImageSet& a, const LabeledImageSet& b);

// Deterministic procedurally-rendered digit corpus in MNIST geometry
// (28x28, labels 0..9). Stands in for MNIST where the real files are not
// available.
LabeledImageSet synth_digits(std::size_t count, std::uint64_t seed);

}  // namespace orn::data

#endif  // ORN_DATASET_HPP_
