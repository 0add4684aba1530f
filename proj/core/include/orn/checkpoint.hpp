#ifndef ORN_CHECKPOINT_HPP_
#define ORN_CHECKPOINT_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "orn/adadelta.hpp"
#include "orn/network.hpp"
#include "orn/rng.hpp"

namespace orn::ckpt {

// On-disk layout: magic "ORNC", format version u16, a parameter section and
// an optimizer-state section. Each section is a u32 record count followed by
// length-prefixed named tensors: u32 name length, name bytes, u32 rank,
// extents as u32 little-endian, payload as little-endian 32-bit reals.
// Integer metadata (fingerprint, epoch, RNG state) rides along as reserved
// "__meta.*" tensors whose payload words are bit-cast, so the round trip is
// bit-exact.

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> extents;
  std::vector<float> data;
};

struct Checkpoint {
  std::uint64_t fingerprint = 0;
  std::uint64_t epoch = 0;
  std::array<std::uint64_t, 4> rng_state{};
  std::vector<NamedTensor> params;
  std::vector<NamedTensor> opt_state;
};

void save(const Checkpoint& c, const std::string& path);
Checkpoint load(const std::string& path);

std::uint64_t spec_fingerprint(const NetworkSpec& spec);

// Network + optimizer glue (training precision is 32-bit).
Checkpoint capture(Network<float>& net,
                   const std::vector<AdadeltaState<float>>& opt,
                   std::uint64_t epoch, const Rng& rng);
void restore(const Checkpoint& c, Network<float>& net,
             std::vector<AdadeltaState<float>>& opt, std::uint64_t* epoch,
             Rng* rng);

}  // namespace orn::ckpt

#endif  // ORN_CHECKPOINT_HPP_
