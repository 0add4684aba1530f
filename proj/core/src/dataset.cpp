#include "orn/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "orn/rng.hpp"

namespace orn::data {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DataError(path + ": truncated header");
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t expected,
                                        const std::string& path) {
  std::vector<unsigned char> buf(expected);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(expected));
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  if (got != expected) {
    throw DataError(path + ": truncated payload, expected " +
                    std::to_string(expected) + " bytes, got " +
                    std::to_string(got));
  }
  return buf;
}

}  // namespace

Variant parse_variant(const std::string& name) {
  if (name == "original") return Variant::kOriginal;
  if (name == "rot") return Variant::kRot;
  if (name == "rot+" || name == "rot_plus") return Variant::kRotPlus;
  if (name == "half-rot" || name == "half_rot") return Variant::kHalfRot;
  if (name == "rot12k-train" || name == "rot12k_train")
    return Variant::kRot12kTrain;
  if (name == "rot12k-test" || name == "rot12k_test")
    return Variant::kRot12kTest;
  throw DataError("unknown dataset variant '" + name + "'");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kOriginal: return "original";
    case Variant::kRot: return "rot";
    case Variant::kRotPlus: return "rot_plus";
    case Variant::kHalfRot: return "half_rot";
    case Variant::kRot12kTrain: return "rot12k_train";
    case Variant::kRot12kTest: return "rot12k_test";
  }
  return "?";
}

LabeledImageSet load_idx(const std::string& images_path,
                         const std::string& labels_path) {
  std::ifstream fi(images_path, std::ios::binary);
  if (!fi) throw DataError(images_path + ": cannot open");
  const std::uint32_t magic_i = read_u32_be(fi, images_path);
  if (magic_i != kImagesMagic) {
    std::ostringstream os;
    os << images_path << ": bad image magic 0x" << std::hex << magic_i
       << ", expected 0x" << kImagesMagic;
    throw DataError(os.str());
  }
  const std::uint32_t n = read_u32_be(fi, images_path);
  const std::uint32_t h = read_u32_be(fi, images_path);
  const std::uint32_t w = read_u32_be(fi, images_path);
  const auto pixels =
      read_payload(fi, std::size_t(n) * h * w, images_path);

  std::ifstream fl(labels_path, std::ios::binary);
  if (!fl) throw DataError(labels_path + ": cannot open");
  const std::uint32_t magic_l = read_u32_be(fl, labels_path);
  if (magic_l != kLabelsMagic) {
    std::ostringstream os;
    os << labels_path << ": bad label magic 0x" << std::hex << magic_l
       << ", expected 0x" << kLabelsMagic;
    throw DataError(os.str());
  }
  const std::uint32_t nl = read_u32_be(fl, labels_path);
  if (nl != n) {
    throw DataError("image/label count mismatch: " + std::to_string(n) +
                    " images in " + images_path + " vs " + std::to_string(nl) +
                    " labels in " + labels_path);
  }
  const auto raw_labels = read_payload(fl, nl, labels_path);

  LabeledImageSet set;
  set.images = Tensor<float>({n, h, w});
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    set.images[i] = static_cast<float>(pixels[i]) / 255.0f;
  }
  set.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw_labels[i] > 9) {
      throw DataError(labels_path + ": label " + std::to_string(raw_labels[i]) +
                      " out of range at index " + std::to_string(i));
    }
    set.labels[i] = raw_labels[i];
  }
  set.provenance.source_digests = {{images_path, file_digest(images_path)},
                                   {labels_path, file_digest(labels_path)}};
  return set;
}

void save_idx(const LabeledImageSet& set, const std::string& images_path,
              const std::string& labels_path) {
  std::ofstream fi(images_path, std::ios::binary);
  if (!fi) throw DataError(images_path + ": cannot open for writing");
  write_u32_be(fi, kImagesMagic);
  write_u32_be(fi, static_cast<std::uint32_t>(set.size()));
  write_u32_be(fi, static_cast<std::uint32_t>(set.height()));
  write_u32_be(fi, static_cast<std::uint32_t>(set.width()));
  std::vector<unsigned char> buf(set.images.numel());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const float v = std::min(1.0f, std::max(0.0f, set.images[i]));
    buf[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
  }
  fi.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size()));

  std::ofstream fl(labels_path, std::ios::binary);
  if (!fl) throw DataError(labels_path + ": cannot open for writing");
  write_u32_be(fl, kLabelsMagic);
  write_u32_be(fl, static_cast<std::uint32_t>(set.size()));
  for (int l : set.labels) {
    const unsigned char b = static_cast<unsigned char>(l);
    fl.write(reinterpret_cast<const char*>(&b), 1);
  }
}

void write_metadata(const LabeledImageSet& set, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError(path + ": cannot open for writing");
  const Provenance& p = set.provenance;
  f << "variant=" << p.variant << "\n";
  f << "seed=" << p.seed << "\n";
  f << "count=" << set.size() << "\n";
  f << "angle_range=[" << p.angle_min << "," << p.angle_max << "]\n";
  for (const auto& [src, digest] : p.source_digests) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(digest));
    f << "source_digest " << src << " " << hex << "\n";
  }
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(path + ": cannot open for digest");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    const std::streamsize n = f.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

Tensor<float> rotate_image(const Tensor<float>& img, double theta) {
  const std::size_t h = img.extent(0), w = img.extent(1);
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  const double c = std::cos(theta), s = std::sin(theta);
  Tensor<float> out({h, w});
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t col = 0; col < w; ++col) {
      const double dr = static_cast<double>(r) - cy;
      const double dc = static_cast<double>(col) - cx;
      const double sr = cy + dr * c - dc * s;
      const double sc = cx + dr * s + dc * c;
      const int r0 = static_cast<int>(std::floor(sr));
      const int c0 = static_cast<int>(std::floor(sc));
      const double fr = sr - r0, fc = sc - c0;
      double acc = 0.0;
      const double wts[4] = {(1 - fr) * (1 - fc), (1 - fr) * fc,
                             fr * (1 - fc), fr * fc};
      const int src[4][2] = {{r0, c0}, {r0, c0 + 1}, {r0 + 1, c0},
                             {r0 + 1, c0 + 1}};
      for (int t = 0; t < 4; ++t) {
        const int rr = src[t][0], cc = src[t][1];
        if (rr < 0 || cc < 0 || rr >= static_cast<int>(h) ||
            cc >= static_cast<int>(w)) {
          continue;
        }
        acc += wts[t] * static_cast<double>(img(static_cast<std::size_t>(rr),
                                                static_cast<std::size_t>(cc)));
      }
      out(r, col) = static_cast<float>(acc);
    }
  }
  return out;
}

namespace {

Tensor<float> image_at(const LabeledImageSet& set, std::size_t i) {
  const std::size_t h = set.height(), w = set.width();
  Tensor<float> img({h, w});
  std::copy(set.images.data() + i * h * w, set.images.data() + (i + 1) * h * w,
            img.data());
  return img;
}

void put_image(LabeledImageSet& set, std::size_t i, const Tensor<float>& img) {
  std::copy(img.data(), img.data() + img.numel(),
            set.images.data() + i * img.numel());
}

// Angles are sampled once at build time: variants are frozen datasets, not
// on-the-fly augmentation.
LabeledImageSet rotate_all(const LabeledImageSet& base, double lo, double hi,
                           std::uint64_t seed) {
  LabeledImageSet out;
  out.images = Tensor<float>(base.images.shape());
  out.labels = base.labels;
  out.provenance = base.provenance;
  out.provenance.seed = seed;
  out.provenance.angle_min = lo;
  out.provenance.angle_max = hi;
  out.provenance.angles.resize(base.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double theta = rng.uniform(lo, hi);
    out.provenance.angles[i] = theta;
    put_image(out, i, rotate_image(image_at(base, i), theta));
  }
  return out;
}

}  // namespace

LabeledImageSet concat(const LabeledImageSet& a, const LabeledImageSet& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw DataError("concat: geometry mismatch " + a.images.shape_str() +
                    " vs " + b.images.shape_str());
  }
  LabeledImageSet out;
  out.images = Tensor<float>({a.size() + b.size(), a.height(), a.width()});
  std::copy(a.images.data(), a.images.data() + a.images.numel(),
            out.images.data());
  std::copy(b.images.data(), b.images.data() + b.images.numel(),
            out.images.data() + a.images.numel());
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.provenance = a.provenance;
  for (const auto& d : b.provenance.source_digests) {
    out.provenance.source_digests.push_back(d);
  }
  return out;
}

LabeledImageSet build_variant(const LabeledImageSet& base, Variant variant,
                              std::uint64_t seed) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double half_pi = std::numbers::pi / 2.0;
  switch (variant) {
    case Variant::kOriginal: {
      LabeledImageSet out = base;
      out.provenance.variant = "original";
      out.provenance.seed = seed;
      return out;
    }
    case Variant::kRot: {
      LabeledImageSet out = rotate_all(base, 0.0, two_pi, seed);
      out.provenance.variant = "rot";
      return out;
    }
    case Variant::kHalfRot: {
      LabeledImageSet out = rotate_all(base, -half_pi, half_pi, seed);
      out.provenance.variant = "half_rot";
      return out;
    }
    case Variant::kRotPlus: {
      // rot first, then each sample copied to eight directions at
      // 45-degree intervals (copies kept adjacent, labels repeated).
      LabeledImageSet rot = rotate_all(base, 0.0, two_pi, seed);
      LabeledImageSet out;
      const std::size_t h = rot.height(), w = rot.width();
      out.images = Tensor<float>({rot.size() * 8, h, w});
      out.labels.resize(rot.size() * 8);
      out.provenance = rot.provenance;
      out.provenance.variant = "rot_plus";
      out.provenance.angles.clear();
      for (std::size_t i = 0; i < rot.size(); ++i) {
        const Tensor<float> img = image_at(rot, i);
        for (std::size_t k = 0; k < 8; ++k) {
          const double extra = static_cast<double>(k) * (two_pi / 8.0);
          const Tensor<float> rotated =
              (k == 0) ? img : rotate_image(img, extra);
          put_image(out, i * 8 + k, rotated);
          out.labels[i * 8 + k] = rot.labels[i];
          out.provenance.angles.push_back(rot.provenance.angles[i] + extra);
        }
      }
      return out;
    }
    case Variant::kRot12kTrain:
    case Variant::kRot12kTest: {
      const std::size_t need = 12000 + 50000;
      if (base.size() < need) {
        throw DataError("rot12k variants need a base of >= " +
                        std::to_string(need) + " samples, got " +
                        std::to_string(base.size()) +
                        " (concatenate train and test sets)");
      }
      LabeledImageSet rot = rotate_all(base, 0.0, two_pi, seed);
      const bool train = variant == Variant::kRot12kTrain;
      const std::size_t begin = train ? 0 : rot.size() - 50000;
      const std::size_t count = train ? 12000 : 50000;
      LabeledImageSet out;
      const std::size_t h = rot.height(), w = rot.width();
      out.images = Tensor<float>({count, h, w});
      out.labels.resize(count);
      out.provenance = rot.provenance;
      out.provenance.variant = variant_name(variant);
      out.provenance.angles.assign(
          rot.provenance.angles.begin() + static_cast<std::ptrdiff_t>(begin),
          rot.provenance.angles.begin() +
              static_cast<std::ptrdiff_t>(begin + count));
      std::copy(rot.images.data() + begin * h * w,
                rot.images.data() + (begin + count) * h * w,
                out.images.data());
      std::copy(rot.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                rot.labels.begin() + static_cast<std::ptrdiff_t>(begin + count),
                out.labels.begin());
      return out;
    }
  }
  throw DataError("unknown variant");
}

}  // namespace orn::data
