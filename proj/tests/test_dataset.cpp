#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "doctest.h"
#include "orn/dataset.hpp"
#include "orn/rng.hpp"

namespace fs = std::filesystem;
using orn::Rng;
using orn::Tensor;
namespace data = orn::data;

namespace {

constexpr double kPi = std::numbers::pi;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("orn_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

Tensor<float> transpose(const Tensor<float>& img) {
  const std::size_t h = img.extent(0), w = img.extent(1);
  Tensor<float> out({w, h});
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) out(c, r) = img(r, c);
  }
  return out;
}

Tensor<float> sample(const data::LabeledImageSet& set, std::size_t i) {
  const std::size_t h = set.height(), w = set.width();
  Tensor<float> out({h, w});
  std::copy(set.images.data() + i * h * w, set.images.data() + (i + 1) * h * w,
            out.data());
  return out;
}

}  // namespace

TEST_CASE("idx save/load round trip preserves content") {
  TempDir tmp;
  data::LabeledImageSet set = data::synth_digits(50, 5);
  data::save_idx(set, tmp.file("img"), tmp.file("lbl"));
  data::LabeledImageSet back = data::load_idx(tmp.file("img"), tmp.file("lbl"));
  REQUIRE(back.size() == 50);
  CHECK(back.labels == set.labels);
  // Pixels are 8-bit on disk; a second round trip must be bit-stable.
  data::save_idx(back, tmp.file("img2"), tmp.file("lbl2"));
  CHECK(data::file_digest(tmp.file("img")) ==
        data::file_digest(tmp.file("img2")));
  CHECK(data::file_digest(tmp.file("lbl")) ==
        data::file_digest(tmp.file("lbl2")));
  for (int l : back.labels) {
    CHECK(l >= 0);
    CHECK(l <= 9);
  }
}

TEST_CASE("idx loader diagnoses bad magic and truncation distinctly") {
  TempDir tmp;
  data::LabeledImageSet set = data::synth_digits(10, 6);
  data::save_idx(set, tmp.file("img"), tmp.file("lbl"));

  SUBCASE("bad magic") {
    std::ofstream f(tmp.file("bad"), std::ios::binary);
    f.write("\x00\x00\x01\x99", 4);
    f.close();
    try {
      data::load_idx(tmp.file("bad"), tmp.file("lbl"));
      FAIL("expected DataError");
    } catch (const data::DataError& e) {
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }
  SUBCASE("truncated payload names the byte counts") {
    std::ifstream src(tmp.file("img"), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(src)),
                      std::istreambuf_iterator<char>());
    std::ofstream cut(tmp.file("cut"), std::ios::binary);
    cut.write(bytes.data(),
              static_cast<std::streamsize>(bytes.size() / 2));
    cut.close();
    try {
      data::load_idx(tmp.file("cut"), tmp.file("lbl"));
      FAIL("expected DataError");
    } catch (const data::DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("byte") != std::string::npos);
    }
  }
  SUBCASE("image/label count mismatch") {
    data::LabeledImageSet small = data::synth_digits(4, 6);
    data::save_idx(small, tmp.file("img4"), tmp.file("lbl4"));
    CHECK_THROWS_AS(data::load_idx(tmp.file("img"), tmp.file("lbl4")),
                    data::DataError);
  }
}

TEST_CASE("rotate_image: zero angle is the identity") {
  data::LabeledImageSet set = data::synth_digits(3, 7);
  Tensor<float> img = sample(set, 0);
  Tensor<float> out = data::rotate_image(img, 0.0);
  for (std::size_t i = 0; i < img.numel(); ++i) CHECK(out[i] == img[i]);
}

TEST_CASE("rotate_image: two half turns return the original within 1e-6") {
  data::LabeledImageSet set = data::synth_digits(5, 8);
  for (std::size_t s = 0; s < 5; ++s) {
    Tensor<float> img = sample(set, s);
    Tensor<float> twice =
        data::rotate_image(data::rotate_image(img, kPi), kPi);
    double mad = 0;
    for (std::size_t i = 0; i < img.numel(); ++i) {
      mad += std::abs(static_cast<double>(twice[i]) - img[i]);
    }
    mad /= static_cast<double>(img.numel());
    CHECK(mad <= 1e-6);
  }
}

TEST_CASE("rotate_image never increases pixel mass") {
  data::LabeledImageSet set = data::synth_digits(100, 9);
  Rng rng(10);
  for (std::size_t s = 0; s < 100; ++s) {
    Tensor<float> img = sample(set, s);
    const double theta = rng.uniform(0.0, 2 * kPi);
    Tensor<float> rot = data::rotate_image(img, theta);
    double before = 0, after = 0;
    for (std::size_t i = 0; i < img.numel(); ++i) {
      before += img[i];
      after += rot[i];
    }
    CHECK(after <= before + 1e-4);
  }
}

TEST_CASE("rotate_image satisfies the dihedral transposition identity") {
  // Conjugating a rotation by transposition flips its sign:
  // transpose(rotate(img, t)) == rotate(transpose(img), -t).
  data::LabeledImageSet set = data::synth_digits(5, 11);
  Rng rng(12);
  for (std::size_t s = 0; s < 5; ++s) {
    Tensor<float> img = sample(set, s);
    const double theta = rng.uniform(0.0, 2 * kPi);
    Tensor<float> lhs = transpose(data::rotate_image(img, theta));
    Tensor<float> rhs = data::rotate_image(transpose(img), -theta);
    for (std::size_t i = 0; i < lhs.numel(); ++i) {
      CHECK(std::abs(lhs[i] - rhs[i]) < 1e-6);
    }
  }
}

TEST_CASE("build_variant is deterministic per seed") {
  data::LabeledImageSet base = data::synth_digits(200, 13);
  auto a = data::build_variant(base, data::Variant::kRot, 99);
  auto b = data::build_variant(base, data::Variant::kRot, 99);
  REQUIRE(a.size() == b.size());
  CHECK(a.labels == b.labels);
  for (std::size_t i = 0; i < a.images.numel(); ++i) {
    CHECK(a.images[i] == b.images[i]);  // bit-identical
  }
  auto c = data::build_variant(base, data::Variant::kRot, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.images.numel() && !any_diff; ++i) {
    any_diff = a.images[i] != c.images[i];
  }
  CHECK(any_diff);
}

TEST_CASE("rot_plus yields exactly eight copies per sample") {
  data::LabeledImageSet base = data::synth_digits(40, 14);
  auto plus = data::build_variant(base, data::Variant::kRotPlus, 3);
  CHECK(plus.size() == 8 * base.size());
  // Each sample's eight copies sit adjacent with the label repeated.
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t copy = 0; copy < 8; ++copy) {
      CHECK(plus.labels[i * 8 + copy] == base.labels[i]);
    }
  }
}

TEST_CASE("half_rot angles stay inside [-pi/2, pi/2]") {
  data::LabeledImageSet base = data::synth_digits(300, 15);
  auto half = data::build_variant(base, data::Variant::kHalfRot, 4);
  REQUIRE(half.provenance.angles.size() == 300);
  for (double a : half.provenance.angles) {
    CHECK(a >= -kPi / 2);
    CHECK(a <= kPi / 2);
  }
}

TEST_CASE("rot12k splits require a large enough base and size correctly") {
  data::LabeledImageSet small = data::synth_digits(100, 16);
  CHECK_THROWS_AS(
      data::build_variant(small, data::Variant::kRot12kTrain, 1),
      data::DataError);
}

TEST_CASE("rot angle distribution is uniform (chi-square, 16 bins)") {
  data::LabeledImageSet base = data::synth_digits(10000, 17);
  auto rot = data::build_variant(base, data::Variant::kRot, 21);
  REQUIRE(rot.provenance.angles.size() == 10000);
  std::array<int, 16> bins{};
  for (double a : rot.provenance.angles) {
    REQUIRE(a >= 0.0);
    REQUIRE(a < 2 * kPi);
    bins[static_cast<std::size_t>(a / (2 * kPi) * 16)]++;
  }
  const double expected = 10000.0 / 16.0;
  double chi2 = 0;
  for (int b : bins) {
    chi2 += (b - expected) * (b - expected) / expected;
  }
  // df = 15; the p = 0.01 critical value is 30.578.
  CHECK(chi2 < 30.578);
}

TEST_CASE("rotation preserves labels") {
  data::LabeledImageSet base = data::synth_digits(100, 18);
  auto rot = data::build_variant(base, data::Variant::kRot, 5);
  CHECK(rot.labels == base.labels);
}

TEST_CASE("synthetic corpus is deterministic and well-formed") {
  data::LabeledImageSet a = data::synth_digits(64, 19);
  data::LabeledImageSet b = data::synth_digits(64, 19);
  CHECK(a.labels == b.labels);
  for (std::size_t i = 0; i < a.images.numel(); ++i) {
    CHECK(a.images[i] == b.images[i]);
    CHECK(a.images[i] >= 0.0f);
    CHECK(a.images[i] <= 1.0f);
  }
  CHECK(a.height() == 28);
  CHECK(a.width() == 28);
}

TEST_CASE("metadata sidecar names variant, seed, and digests") {
  TempDir tmp;
  data::LabeledImageSet base = data::synth_digits(20, 20);
  auto rot = data::build_variant(base, data::Variant::kRot, 6);
  data::write_metadata(rot, tmp.file("meta.txt"));
  std::ifstream f(tmp.file("meta.txt"));
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("rot") != std::string::npos);
  CHECK(text.find("seed") != std::string::npos);
}
