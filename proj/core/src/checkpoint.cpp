#include "orn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace orn::ckpt {

namespace {

constexpr char kMagic[4] = {'O', 'R', 'N', 'C'};
constexpr std::uint16_t kVersion = 1;

void write_u16(std::ostream& o, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8)};
  o.write(reinterpret_cast<const char*>(b), 2);
}

void write_u32(std::ostream& o, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
      static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  o.write(reinterpret_cast<const char*>(b), 4);
}

std::uint16_t read_u16(std::istream& i) {
  unsigned char b[2];
  i.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t read_u32(std::istream& i) {
  unsigned char b[4];
  i.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void write_record(std::ostream& o, const NamedTensor& t) {
  write_u32(o, static_cast<std::uint32_t>(t.name.size()));
  o.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
  write_u32(o, static_cast<std::uint32_t>(t.extents.size()));
  for (std::uint32_t e : t.extents) write_u32(o, e);
  for (float v : t.data) write_u32(o, std::bit_cast<std::uint32_t>(v));
}

NamedTensor read_record(std::istream& i, const std::string& path) {
  NamedTensor t;
  const std::uint32_t name_len = read_u32(i);
  t.name.resize(name_len);
  i.read(t.name.data(), name_len);
  const std::uint32_t rank = read_u32(i);
  t.extents.resize(rank);
  std::size_t numel = 1;
  for (auto& e : t.extents) {
    e = read_u32(i);
    numel *= e;
  }
  t.data.resize(numel);
  for (auto& v : t.data) v = std::bit_cast<float>(read_u32(i));
  if (!i) throw std::runtime_error(path + ": truncated checkpoint record");
  return t;
}

NamedTensor make_meta_u64(const std::string& name,
                          const std::vector<std::uint64_t>& words) {
  NamedTensor t;
  t.name = name;
  t.extents = {static_cast<std::uint32_t>(words.size() * 2)};
  for (std::uint64_t w : words) {
    t.data.push_back(std::bit_cast<float>(static_cast<std::uint32_t>(w)));
    t.data.push_back(std::bit_cast<float>(static_cast<std::uint32_t>(w >> 32)));
  }
  return t;
}

std::vector<std::uint64_t> parse_meta_u64(const NamedTensor& t) {
  std::vector<std::uint64_t> out(t.data.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::uint64_t(std::bit_cast<std::uint32_t>(t.data[2 * i])) |
             (std::uint64_t(std::bit_cast<std::uint32_t>(t.data[2 * i + 1]))
              << 32);
  }
  return out;
}

}  // namespace

void save(const Checkpoint& c, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f.write(kMagic, 4);
  write_u16(f, kVersion);

  std::vector<NamedTensor> params;
  params.push_back(make_meta_u64("__meta.fingerprint", {c.fingerprint}));
  params.push_back(make_meta_u64("__meta.epoch", {c.epoch}));
  params.push_back(make_meta_u64(
      "__meta.rng", {c.rng_state[0], c.rng_state[1], c.rng_state[2],
                     c.rng_state[3]}));
  for (const auto& p : c.params) params.push_back(p);

  write_u32(f, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) write_record(f, p);
  write_u32(f, static_cast<std::uint32_t>(c.opt_state.size()));
  for (const auto& p : c.opt_state) write_record(f, p);
}

Checkpoint load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open");
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(path + ": not a checkpoint (bad magic)");
  }
  const std::uint16_t version = read_u16(f);
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version " +
                             std::to_string(version));
  }
  Checkpoint c;
  const std::uint32_t n_params = read_u32(f);
  for (std::uint32_t i = 0; i < n_params; ++i) {
    NamedTensor t = read_record(f, path);
    if (t.name == "__meta.fingerprint") {
      c.fingerprint = parse_meta_u64(t)[0];
    } else if (t.name == "__meta.epoch") {
      c.epoch = parse_meta_u64(t)[0];
    } else if (t.name == "__meta.rng") {
      const auto w = parse_meta_u64(t);
      for (std::size_t k = 0; k < 4; ++k) c.rng_state[k] = w[k];
    } else {
      c.params.push_back(std::move(t));
    }
  }
  const std::uint32_t n_opt = read_u32(f);
  for (std::uint32_t i = 0; i < n_opt; ++i) {
    c.opt_state.push_back(read_record(f, path));
  }
  return c;
}

std::uint64_t spec_fingerprint(const NetworkSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  mix(spec.input_channels);
  mix(spec.input_h);
  mix(spec.input_w);
  for (const auto& l : spec.layers) {
    mix(static_cast<std::uint64_t>(l.kind));
    mix(l.channels);
    mix(l.kernel);
    mix(l.padding);
    mix(static_cast<std::uint64_t>(l.rate * 1e6));
    mix(l.orientations);
  }
  return h;
}

namespace {

NamedTensor from_tensor(const std::string& name, const Tensor<float>& t) {
  NamedTensor out;
  out.name = name;
  for (std::size_t e : t.shape()) {
    out.extents.push_back(static_cast<std::uint32_t>(e));
  }
  out.data.assign(t.data(), t.data() + t.numel());
  return out;
}

void into_tensor(const NamedTensor& src, Tensor<float>& dst) {
  if (src.data.size() != dst.numel()) {
    throw std::runtime_error("checkpoint tensor '" + src.name +
                             "' has  " + std::to_string(src.data.size()) +
                             " elements, expected " +
                             std::to_string(dst.numel()));
  }
  std::copy(src.data.begin(), src.data.end(), dst.data());
}

}  // namespace

Checkpoint capture(Network<float>& net,
                   const std::vector<AdadeltaState<float>>& opt,
                   std::uint64_t epoch, const Rng& rng) {
  Checkpoint c;
  c.fingerprint = spec_fingerprint(net.spec());
  c.epoch = epoch;
  c.rng_state = rng.state();
  const auto params = net.params();
  const auto names = net.param_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    c.params.push_back(from_tensor(names[i], *params[i]));
  }
  for (std::size_t i = 0; i < opt.size(); ++i) {
    c.opt_state.push_back(
        from_tensor(names[i] + ".acc_grad_sq", opt[i].acc_grad_sq));
    c.opt_state.push_back(
        from_tensor(names[i] + ".acc_update_sq", opt[i].acc_update_sq));
  }
  return c;
}

void restore(const Checkpoint& c, Network<float>& net,
             std::vector<AdadeltaState<float>>& opt, std::uint64_t* epoch,
             Rng* rng) {
  if (c.fingerprint != spec_fingerprint(net.spec())) {
    throw std::runtime_error(
        "checkpoint fingerprint does not match the network spec");
  }
  const auto params = net.params();
  const auto names = net.param_names();
  if (c.params.size() != params.size()) {
    throw std::runtime_error("checkpoint holds " +
                             std::to_string(c.params.size()) +
                             " parameter tensors, network expects " +
                             std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (c.params[i].name != names[i]) {
      throw std::runtime_error("checkpoint tensor '" + c.params[i].name +
                               "' where '" + names[i] + "' was expected");
    }
    into_tensor(c.params[i], *params[i]);
  }
  if (!opt.empty()) {
    if (c.opt_state.size() != 2 * opt.size()) {
      throw std::runtime_error("checkpoint optimizer state count mismatch");
    }
    for (std::size_t i = 0; i < opt.size(); ++i) {
      into_tensor(c.opt_state[2 * i], opt[i].acc_grad_sq);
      into_tensor(c.opt_state[2 * i + 1], opt[i].acc_update_sq);
    }
  }
  if (epoch) *epoch = c.epoch;
  if (rng) rng->set_state(c.rng_state);
}

}  // namespace orn::ckpt
