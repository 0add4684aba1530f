#ifndef ORN_NETWORK_HPP_
#define ORN_NETWORK_HPP_

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "orn/encoding.hpp"
#include "orn/nn_ops.hpp"
#include "orn/orconv.hpp"
#include "orn/rng.hpp"
#include "orn/tensor.hpp"

namespace orn {

enum class LayerKind {
  kExtend,
  kConv,
  kOrConv,
  kRelu,
  kMaxPool,
  kDropout,
  kGlobalAvgPool,
  kOrAlign,
  kOrPooling,
  kFlatten,
  kLinear,
  kSoftmaxOutput,
};

enum class Encoding { kNone, kOrAlign, kOrPooling };

const char* layer_kind_name(LayerKind k);

struct LayerSpec {
  LayerKind kind;
  std::size_t channels = 0;      // conv/orconv features out, linear features out
  std::size_t kernel = 3;        // conv/orconv
  std::size_t padding = 0;       // conv/orconv
  double rate = 0.5;             // dropout
  std::size_t orientations = 0;  // extend
};

// Declarative network description. Input is a [C, H, W] image stack.
struct NetworkSpec {
  std::vector<LayerSpec> layers;
  std::size_t input_channels = 1;
  std::size_t input_h = 28;
  std::size_t input_w = 28;
};

// Reference topologies: a four-conv baseline and its oriented-response
// upgrades with the per-layer filter count cut to one eighth.
NetworkSpec baseline_spec();
NetworkSpec orn_spec(std::size_t orientations, Encoding encoding);

// ---------------------------------------------------------------------------

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, bool train, Rng& rng) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<Tensor<T>*> params() { return {}; }
  virtual std::vector<Tensor<T>*> grads() { return {}; }
  virtual std::vector<std::string> param_names(const std::string& prefix) {
    return {};
  }
  // Distance to the nearest argmax/kink decision boundary seen in the last
  // forward pass; the finite-difference oracle resamples inputs that come
  // too close.
  virtual double stability_margin() const {
    return std::numeric_limits<double>::infinity();
  }
  virtual const char* name() const = 0;
};

template <typename T>
class ExtendLayer : public Layer<T> {
 public:
  explicit ExtendLayer(std::size_t n) : n_(n) {}
  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    return extend_to_omnidirectional_batch(x, n_);
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    const std::size_t b = g.extent(0), c = g.extent(1);
    const std::size_t h = g.extent(3), w = g.extent(4);
    Tensor<T> gin({b, c, h, w});
    for (std::size_t bc = 0; bc < b * c; ++bc) {
      T* dst = gin.data() + bc * h * w;
      for (std::size_t k = 0; k < n_; ++k) {
        const T* src = g.data() + (bc * n_ + k) * h * w;
        for (std::size_t i = 0; i < h * w; ++i) dst[i] += src[i];
      }
    }
    return gin;
  }
  const char* name() const override { return "extend"; }

 private:
  std::size_t n_;
};

template <typename T>
class ConvLayer : public Layer<T> {
 public:
  ConvLayer(std::size_t c_in, std::size_t c_out, std::size_t k,
            std::size_t pad)
      : kernels_({c_out, c_in, k, k}),
        bias_({c_out}),
        gkernels_({c_out, c_in, k, k}),
        gbias_({c_out}),
        pad_(pad) {}

  void init(Rng& rng) {
    const double a =
        1.0 / std::sqrt(static_cast<double>(kernels_.extent(1) *
                                            kernels_.extent(2) *
                                            kernels_.extent(3)));
    for (std::size_t i = 0; i < kernels_.numel(); ++i) {
      kernels_[i] = T(rng.uniform(-a, a));
    }
    bias_.fill(T(0));
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    input_ = x;
    Tensor<T> out = nn::conv2d_batch(x, kernels_, pad_);
    const std::size_t b = out.extent(0), co = out.extent(1);
    const std::size_t hw = out.extent(2) * out.extent(3);
    for (std::size_t bb = 0; bb < b; ++bb) {
      for (std::size_t o = 0; o < co; ++o) {
        T* p = out.data() + (bb * co + o) * hw;
        for (std::size_t i = 0; i < hw; ++i) p[i] += bias_[o];
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& g) override {
    nn::ConvGrads<T> cg = nn::conv2d_backward_batch(input_, kernels_, g, pad_);
    gkernels_ = std::move(cg.kernels);
    gbias_.fill(T(0));
    const std::size_t b = g.extent(0), co = g.extent(1);
    const std::size_t hw = g.extent(2) * g.extent(3);
    for (std::size_t bb = 0; bb < b; ++bb) {
      for (std::size_t o = 0; o < co; ++o) {
        const T* p = g.data() + (bb * co + o) * hw;
        for (std::size_t i = 0; i < hw; ++i) gbias_[o] += p[i];
      }
    }
    return std::move(cg.input);
  }

  std::vector<Tensor<T>*> params() override { return {&kernels_, &bias_}; }
  std::vector<Tensor<T>*> grads() override { return {&gkernels_, &gbias_}; }
  std::vector<std::string> param_names(const std::string& p) override {
    return {p + ".weight", p + ".bias"};
  }
  const char* name() const override { return "conv"; }

 private:
  Tensor<T> kernels_, bias_, gkernels_, gbias_, input_;
  std::size_t pad_;
};

template <typename T>
class OrConvLayer : public Layer<T> {
 public:
  OrConvLayer(std::size_t c_in, std::size_t c_out, std::size_t k,
              std::size_t n, std::size_t pad)
      : bank_(c_out, c_in, k, n), gbias_({c_out}), pad_(pad) {
    gfilters_.resize(c_out);
    for (auto& row : gfilters_) {
      for (std::size_t i = 0; i < c_in; ++i) {
        row.push_back(Tensor<T>({k, k, n}));
      }
    }
  }

  void init(Rng& rng) {
    // Fan-in counts the full virtual receptive field W*W*N*C_in.
    const double a = 1.0 / std::sqrt(static_cast<double>(
                               bank_.in_features() * bank_.width() *
                               bank_.width() * bank_.orientations()));
    for (auto& row : bank_.filters) {
      for (auto& f : row) {
        for (std::size_t i = 0; i < f.weights.numel(); ++i) {
          f.weights[i] = T(rng.uniform(-a, a));
        }
      }
    }
    bank_.bias.fill(T(0));
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    input_ = x;
    OrConvResult<T> r = orconv_forward_batch(bank_, x, pad_);
    expanded_ = std::move(r.expanded_kernels);
    return std::move(r.output);
  }

  Tensor<T> backward(const Tensor<T>& g) override {
    OrConvGrads<T> og =
        orconv_backward_batch(bank_, input_, expanded_, g, pad_);
    for (std::size_t o = 0; o < gfilters_.size(); ++o) {
      for (std::size_t i = 0; i < gfilters_[o].size(); ++i) {
        gfilters_[o][i] = std::move(og.filters[o][i]);
      }
    }
    gbias_ = std::move(og.bias);
    return std::move(og.input);
  }

  std::vector<Tensor<T>*> params() override {
    std::vector<Tensor<T>*> out;
    for (auto& row : bank_.filters) {
      for (auto& f : row) out.push_back(&f.weights);
    }
    out.push_back(&bank_.bias);
    return out;
  }
  std::vector<Tensor<T>*> grads() override {
    std::vector<Tensor<T>*> out;
    for (auto& row : gfilters_) {
      for (auto& g : row) out.push_back(&g);
    }
    out.push_back(&gbias_);
    return out;
  }
  std::vector<std::string> param_names(const std::string& p) override {
    std::vector<std::string> out;
    for (std::size_t o = 0; o < bank_.out_features(); ++o) {
      for (std::size_t i = 0; i < bank_.in_features(); ++i) {
        out.push_back(p + ".arf" + std::to_string(o) + "_" +
                      std::to_string(i));
      }
    }
    out.push_back(p + ".bias");
    return out;
  }
  const char* name() const override { return "orconv"; }

  const ArfBank<T>& bank() const { return bank_; }

 private:
  ArfBank<T> bank_;
  std::vector<std::vector<Tensor<T>>> gfilters_;
  Tensor<T> gbias_, input_, expanded_;
  std::size_t pad_;
};

template <typename T>
class ReluLayer : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    input_ = x;
    return nn::relu(x);
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    return nn::relu_backward(input_, g);
  }
  double stability_margin() const override {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < input_.numel(); ++i) {
      m = std::min(m, std::abs(static_cast<double>(input_[i])));
    }
    return m;
  }
  const char* name() const override { return "relu"; }

 private:
  Tensor<T> input_;
};

template <typename T>
class MaxPoolLayer : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    in_shape_ = x.shape();
    Tensor<T> flat(x);
    if (x.rank() == 5) {
      flat.reshape({x.extent(0), x.extent(1) * x.extent(2), x.extent(3),
                    x.extent(4)});
    }
    flat_in_ = flat;
    nn::MaxPoolResult<T> r = nn::maxpool2_batch(flat);
    argmax_ = std::move(r.argmax);
    Tensor<T> out = std::move(r.output);
    if (x.rank() == 5) {
      out.reshape({x.extent(0), x.extent(1), x.extent(2), out.extent(2),
                   out.extent(3)});
    }
    return out;
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    Tensor<T> gin = nn::maxpool2_backward(g, argmax_, flat_in_.shape());
    gin.reshape(in_shape_);
    return gin;
  }
  double stability_margin() const override {
    // Gap between the window max and its runner-up.
    const std::size_t h = flat_in_.extent(2), w = flat_in_.extent(3);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t bc = 0; bc < flat_in_.extent(0) * flat_in_.extent(1);
         ++bc) {
      const T* plane = flat_in_.data() + bc * h * w;
      for (std::size_t y = 0; y < h; y += 2) {
        for (std::size_t x = 0; x < w; x += 2) {
          T v[4] = {plane[y * w + x], plane[y * w + x + 1],
                    plane[(y + 1) * w + x], plane[(y + 1) * w + x + 1]};
          std::sort(v, v + 4);
          m = std::min(m, static_cast<double>(v[3] - v[2]));
        }
      }
    }
    return m;
  }
  const char* name() const override { return "maxpool"; }

 private:
  std::vector<std::size_t> in_shape_;
  Tensor<T> flat_in_;
  std::vector<std::uint32_t> argmax_;
};

template <typename T>
class DropoutLayer : public Layer<T> {
 public:
  explicit DropoutLayer(double rate) : rate_(rate) {}
  Tensor<T> forward(const Tensor<T>& x, bool train, Rng& rng) override {
    nn::DropoutResult<T> r = nn::dropout(x, rate_, train, rng);
    mask_ = std::move(r.mask);
    return std::move(r.output);
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    return nn::dropout_backward(g, mask_, rate_);
  }
  const char* name() const override { return "dropout"; }

 private:
  double rate_;
  std::vector<std::uint8_t> mask_;
};

template <typename T>
class GlobalAvgPoolLayer : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    in_shape_ = x.shape();
    const std::size_t r = x.rank();
    const std::size_t hw = x.extent(r - 1) * x.extent(r - 2);
    const std::size_t lead = x.numel() / hw;
    std::vector<std::size_t> out_shape(in_shape_.begin(),
                                       in_shape_.end() - 2);
    Tensor<T> out(out_shape);
    for (std::size_t i = 0; i < lead; ++i) {
      const T* p = x.data() + i * hw;
      T acc = T(0);
      for (std::size_t j = 0; j < hw; ++j) acc += p[j];
      out[i] = acc / T(hw);
    }
    return out;
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    const std::size_t r = in_shape_.size();
    const std::size_t hw = in_shape_[r - 1] * in_shape_[r - 2];
    Tensor<T> gin(in_shape_);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const T v = g[i] / T(hw);
      T* p = gin.data() + i * hw;
      for (std::size_t j = 0; j < hw; ++j) p[j] = v;
    }
    return gin;
  }
  const char* name() const override { return "gpool"; }

 private:
  std::vector<std::size_t> in_shape_;
};

template <typename T>
class OrAlignLayer : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    input_ = x;
    OrAlignResult<T> r = oralign_batch(x);
    dominant_ = std::move(r.dominant);
    return std::move(r.aligned);
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    return oralign_backward_batch(g, dominant_);
  }
  double stability_margin() const override { return argmax_gap(input_); }
  const char* name() const override { return "oralign"; }

  const std::vector<std::uint32_t>& dominant() const { return dominant_; }

  static double argmax_gap(const Tensor<T>& desc) {
    const std::size_t n = desc.extent(desc.rank() - 1);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < desc.numel() / n; ++f) {
      const T* v = desc.data() + f * n;
      T best = v[0], second = -std::numeric_limits<T>::infinity();
      for (std::size_t i = 1; i < n; ++i) {
        if (v[i] > best) {
          second = best;
          best = v[i];
        } else if (v[i] > second) {
          second = v[i];
        }
      }
      if (n > 1) m = std::min(m, static_cast<double>(best - second));
    }
    return m;
  }

 private:
  Tensor<T> input_;
  std::vector<std::uint32_t> dominant_;
};

template <typename T>
class OrPoolingLayer : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    input_ = x;
    n_ = x.extent(2);
    OrPoolingResult<T> r = orpooling_batch(x);
    argmax_ = std::move(r.argmax);
    return std::move(r.output);
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    return orpooling_backward_batch(g, argmax_, n_);
  }
  double stability_margin() const override {
    return OrAlignLayer<T>::argmax_gap(input_);
  }
  const char* name() const override { return "orpooling"; }

 private:
  Tensor<T> input_;
  std::vector<std::uint32_t> argmax_;
  std::size_t n_ = 0;
};

template <typename T>
class FlattenLayer : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    in_shape_ = x.shape();
    Tensor<T> out(x);
    out.reshape({x.extent(0), x.numel() / x.extent(0)});
    return out;
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    Tensor<T> gin(g);
    gin.reshape(in_shape_);
    return gin;
  }
  const char* name() const override { return "flatten"; }

 private:
  std::vector<std::size_t> in_shape_;
};

template <typename T>
class LinearLayer : public Layer<T> {
 public:
  LinearLayer(std::size_t in_f, std::size_t out_f)
      : weight_({out_f, in_f}),
        bias_({out_f}),
        gweight_({out_f, in_f}),
        gbias_({out_f}) {}

  void init(Rng& rng) {
    const double a = 1.0 / std::sqrt(static_cast<double>(weight_.extent(1)));
    for (std::size_t i = 0; i < weight_.numel(); ++i) {
      weight_[i] = T(rng.uniform(-a, a));
    }
    bias_.fill(T(0));
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng&) override {
    input_ = x;
    return nn::linear(x, weight_, bias_);
  }
  Tensor<T> backward(const Tensor<T>& g) override {
    nn::LinearGrads<T> lg = nn::linear_backward(input_, weight_, g);
    gweight_ = std::move(lg.weight);
    gbias_ = std::move(lg.bias);
    return std::move(lg.input);
  }
  std::vector<Tensor<T>*> params() override { return {&weight_, &bias_}; }
  std::vector<Tensor<T>*> grads() override { return {&gweight_, &gbias_}; }
  std::vector<std::string> param_names(const std::string& p) override {
    return {p + ".weight", p + ".bias"};
  }
  const char* name() const override { return "linear"; }

 private:
  Tensor<T> weight_, bias_, gweight_, gbias_, input_;
};

// ---------------------------------------------------------------------------

namespace detail {

enum class StageDomain { kImage, kOriented, kDescriptor, kFlat };

struct StageShape {
  StageDomain domain = StageDomain::kImage;
  std::size_t c = 0, n = 0, h = 0, w = 0, f = 0;
};

}  // namespace detail

// Instantiated network with hand-wired forward/backward passes. The softmax
// output layer is a spec marker; Network emits logits and the loss is taken
// by nn::softmax_cross_entropy.
template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec);

  void init_params(Rng& rng);

  // Returns logits [B, classes]. When `activations` is non-null every
  // layer's output is copied into it (for inspection/visualization).
  Tensor<T> forward(const Tensor<T>& input, bool train, Rng& rng,
                    std::vector<Tensor<T>>* activations = nullptr);
  // Backpropagates d(loss)/d(logits); leaves per-layer gradients filled.
  void backward(const Tensor<T>& grad_logits);

  std::vector<Tensor<T>*> params();
  std::vector<Tensor<T>*> grads();
  std::vector<std::string> param_names();
  std::size_t parameter_count();

  double stability_margin() const;

  const NetworkSpec& spec() const { return spec_; }
  std::size_t num_classes() const { return classes_; }
  const std::vector<std::unique_ptr<Layer<T>>>& layers() const {
    return layers_;
  }

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::size_t classes_ = 0;
};

// Closed-form materialised parameter count implied by a spec.
std::size_t spec_parameter_count(const NetworkSpec& spec);

// Builds and validates; throws ShapeError naming the failing layer index.
template <typename T>
Network<T> build_network(const NetworkSpec& spec) {
  return Network<T>(spec);
}

// --------------------------- implementation --------------------------------

namespace detail {

inline void spec_error(std::size_t idx, const std::string& msg) {
  throw ShapeError("network spec layer " + std::to_string(idx) + ": " + msg);
}

// Walks the spec, checking plumbing and reporting each layer's input shape.
template <typename Visit>
void walk_spec(const NetworkSpec& spec, Visit&& visit) {
  StageShape s;
  s.domain = StageDomain::kImage;
  s.c = spec.input_channels;
  s.h = spec.input_h;
  s.w = spec.input_w;

  bool saw_output = false;
  bool saw_encoding = false;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (saw_output) spec_error(i, "layer after the output layer");
    visit(i, l, s);
    switch (l.kind) {
      case LayerKind::kExtend:
        if (s.domain != StageDomain::kImage) {
          spec_error(i, "extend expects an image stage");
        }
        if (l.orientations < 1) spec_error(i, "extend needs N >= 1");
        s.domain = StageDomain::kOriented;
        s.n = l.orientations;
        break;
      case LayerKind::kConv: {
        if (s.domain != StageDomain::kImage) {
          spec_error(i, "conv expects an image stage");
        }
        if (l.kernel % 2 == 0) spec_error(i, "kernel must be odd");
        if (s.h + 2 * l.padding < l.kernel || s.w + 2 * l.padding < l.kernel) {
          spec_error(i, "spatial extent too small for kernel");
        }
        s.c = l.channels;
        s.h = s.h + 2 * l.padding - l.kernel + 1;
        s.w = s.w + 2 * l.padding - l.kernel + 1;
        break;
      }
      case LayerKind::kOrConv: {
        if (s.domain != StageDomain::kOriented) {
          spec_error(i, "orconv expects an oriented stage (insert extend)");
        }
        if (saw_encoding) spec_error(i, "orconv after invariant encoding");
        if (l.kernel % 2 == 0) spec_error(i, "kernel must be odd");
        if (s.h + 2 * l.padding < l.kernel || s.w + 2 * l.padding < l.kernel) {
          spec_error(i, "spatial extent too small for kernel");
        }
        s.c = l.channels;
        s.h = s.h + 2 * l.padding - l.kernel + 1;
        s.w = s.w + 2 * l.padding - l.kernel + 1;
        break;
      }
      case LayerKind::kRelu:
      case LayerKind::kDropout:
        break;
      case LayerKind::kMaxPool:
        if (s.domain != StageDomain::kImage &&
            s.domain != StageDomain::kOriented) {
          spec_error(i, "maxpool expects a spatial stage");
        }
        if (s.h % 2 || s.w % 2) {
          spec_error(i, "maxpool needs even extents, got " +
                            std::to_string(s.h) + "x" + std::to_string(s.w));
        }
        s.h /= 2;
        s.w /= 2;
        break;
      case LayerKind::kGlobalAvgPool:
        if (s.domain == StageDomain::kImage) {
          s.domain = StageDomain::kFlat;
          s.f = s.c;
        } else if (s.domain == StageDomain::kOriented) {
          s.domain = StageDomain::kDescriptor;
        } else {
          spec_error(i, "global pool expects a spatial stage");
        }
        s.h = s.w = 1;
        break;
      case LayerKind::kOrAlign:
        if (s.domain != StageDomain::kDescriptor) {
          spec_error(i, "oralign expects a 1x1xN descriptor stage");
        }
        if (saw_encoding) spec_error(i, "duplicate invariant encoding");
        saw_encoding = true;
        break;
      case LayerKind::kOrPooling:
        if (s.domain != StageDomain::kDescriptor) {
          spec_error(i, "orpooling expects a 1x1xN descriptor stage");
        }
        if (saw_encoding) spec_error(i, "duplicate invariant encoding");
        saw_encoding = true;
        s.domain = StageDomain::kFlat;
        s.f = s.c;
        break;
      case LayerKind::kFlatten:
        if (s.domain == StageDomain::kDescriptor) {
          s.f = s.c * s.n;
        } else if (s.domain == StageDomain::kImage) {
          s.f = s.c * s.h * s.w;
        } else if (s.domain == StageDomain::kOriented) {
          s.f = s.c * s.n * s.h * s.w;
        } else {
          s.f = s.f;
        }
        s.domain = StageDomain::kFlat;
        break;
      case LayerKind::kLinear:
        if (s.domain != StageDomain::kFlat) {
          spec_error(i, "linear expects a flat stage (insert flatten)");
        }
        s.f = l.channels;
        break;
      case LayerKind::kSoftmaxOutput:
        if (s.domain != StageDomain::kFlat) {
          spec_error(i, "output expects a flat stage");
        }
        saw_output = true;
        break;
    }
  }
  if (!saw_output) {
    spec_error(spec.layers.size(), "spec must end with a softmax output layer");
  }
}

}  // namespace detail

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  // Validate the whole plumbing first so a bad spec reports its failing
  // layer index instead of an error from a half-built layer.
  detail::walk_spec(spec_,
                    [](std::size_t, const LayerSpec&, const detail::StageShape&) {});
  detail::walk_spec(spec_, [&](std::size_t i, const LayerSpec& l,
                               const detail::StageShape& s) {
    switch (l.kind) {
      case LayerKind::kExtend:
        layers_.push_back(std::make_unique<ExtendLayer<T>>(l.orientations));
        break;
      case LayerKind::kConv:
        layers_.push_back(std::make_unique<ConvLayer<T>>(s.c, l.channels,
                                                         l.kernel, l.padding));
        break;
      case LayerKind::kOrConv:
        layers_.push_back(std::make_unique<OrConvLayer<T>>(
            s.c, l.channels, l.kernel, s.n, l.padding));
        break;
      case LayerKind::kRelu:
        layers_.push_back(std::make_unique<ReluLayer<T>>());
        break;
      case LayerKind::kMaxPool:
        layers_.push_back(std::make_unique<MaxPoolLayer<T>>());
        break;
      case LayerKind::kDropout:
        layers_.push_back(std::make_unique<DropoutLayer<T>>(l.rate));
        break;
      case LayerKind::kGlobalAvgPool:
        layers_.push_back(std::make_unique<GlobalAvgPoolLayer<T>>());
        break;
      case LayerKind::kOrAlign:
        layers_.push_back(std::make_unique<OrAlignLayer<T>>());
        break;
      case LayerKind::kOrPooling:
        layers_.push_back(std::make_unique<OrPoolingLayer<T>>());
        break;
      case LayerKind::kFlatten:
        layers_.push_back(std::make_unique<FlattenLayer<T>>());
        break;
      case LayerKind::kLinear:
        layers_.push_back(std::make_unique<LinearLayer<T>>(s.f, l.channels));
        break;
      case LayerKind::kSoftmaxOutput:
        classes_ = s.f;
        break;
    }
  });
}

template <typename T>
void Network<T>::init_params(Rng& rng) {
  for (auto& l : layers_) {
    if (auto* c = dynamic_cast<ConvLayer<T>*>(l.get())) c->init(rng);
    if (auto* o = dynamic_cast<OrConvLayer<T>*>(l.get())) o->init(rng);
    if (auto* f = dynamic_cast<LinearLayer<T>*>(l.get())) f->init(rng);
  }
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& input, bool train, Rng& rng,
                              std::vector<Tensor<T>>* activations) {
  Tensor<T> x = input;
  if (activations) activations->clear();
  for (auto& l : layers_) {
    x = l->forward(x, train, rng);
    if (activations) activations->push_back(x);
  }
  return x;
}

template <typename T>
void Network<T>::backward(const Tensor<T>& grad_logits) {
  Tensor<T> g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
}

template <typename T>
std::vector<Tensor<T>*> Network<T>::params() {
  std::vector<Tensor<T>*> out;
  for (auto& l : layers_) {
    for (auto* p : l->params()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>*> Network<T>::grads() {
  std::vector<Tensor<T>*> out;
  for (auto& l : layers_) {
    for (auto* g : l->grads()) out.push_back(g);
  }
  return out;
}

template <typename T>
std::vector<std::string> Network<T>::param_names() {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string prefix =
        "L" + std::to_string(i) + "." + layers_[i]->name();
    for (auto& n : layers_[i]->param_names(prefix)) out.push_back(n);
  }
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() {
  std::size_t n = 0;
  for (auto* p : params()) n += p->numel();
  return n;
}

template <typename T>
double Network<T>::stability_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& l : layers_) m = std::min(m, l->stability_margin());
  return m;
}

}  // namespace orn

#endif  // ORN_NETWORK_HPP_
