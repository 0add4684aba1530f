#include "orn/network.hpp"

namespace orn {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kExtend: return "extend";
    case LayerKind::kConv: return "conv";
    case LayerKind::kOrConv: return "orconv";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kGlobalAvgPool: return "gpool";
    case LayerKind::kOrAlign: return "oralign";
    case LayerKind::kOrPooling: return "orpooling";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kLinear: return "linear";
    case LayerKind::kSoftmaxOutput: return "softmax";
  }
  return "?";
}

namespace {

LayerSpec conv(std::size_t c, std::size_t pad) {
  return {LayerKind::kConv, c, 3, pad};
}
LayerSpec orconv(std::size_t c, std::size_t pad) {
  return {LayerKind::kOrConv, c, 3, pad};
}
LayerSpec simple(LayerKind k) { return {k}; }
LayerSpec linear(std::size_t f) { return {LayerKind::kLinear, f}; }

void append_head(NetworkSpec& s, double dropout_rate) {
  s.layers.push_back(linear(256));
  s.layers.push_back(simple(LayerKind::kRelu));
  s.layers.push_back({LayerKind::kDropout, 0, 3, 0, dropout_rate});
  s.layers.push_back(linear(10));
  s.layers.push_back(simple(LayerKind::kSoftmaxOutput));
}

}  // namespace

NetworkSpec baseline_spec() {
  NetworkSpec s;
  s.layers = {
      conv(32, 1),  simple(LayerKind::kRelu), simple(LayerKind::kMaxPool),
      conv(64, 1),  simple(LayerKind::kRelu), simple(LayerKind::kMaxPool),
      conv(128, 0), simple(LayerKind::kRelu),
      conv(256, 0), simple(LayerKind::kRelu),
      simple(LayerKind::kGlobalAvgPool),
  };
  append_head(s, 0.5);
  return s;
}

NetworkSpec orn_spec(std::size_t orientations, Encoding encoding) {
  NetworkSpec s;
  // Filter counts are one eighth of the baseline's per layer.
  s.layers = {
      {LayerKind::kExtend, 0, 3, 0, 0.5, orientations},
      orconv(4, 1),  simple(LayerKind::kRelu), simple(LayerKind::kMaxPool),
      orconv(8, 1),  simple(LayerKind::kRelu), simple(LayerKind::kMaxPool),
      orconv(16, 0), simple(LayerKind::kRelu),
      orconv(32, 0), simple(LayerKind::kRelu),
      simple(LayerKind::kGlobalAvgPool),
  };
  switch (encoding) {
    case Encoding::kNone:
      s.layers.push_back(simple(LayerKind::kFlatten));
      break;
    case Encoding::kOrAlign:
      s.layers.push_back(simple(LayerKind::kOrAlign));
      s.layers.push_back(simple(LayerKind::kFlatten));
      break;
    case Encoding::kOrPooling:
      s.layers.push_back(simple(LayerKind::kOrPooling));
      break;
  }
  append_head(s, 0.5);
  return s;
}

std::size_t spec_parameter_count(const NetworkSpec& spec) {
  std::size_t total = 0;
  detail::walk_spec(spec, [&](std::size_t, const LayerSpec& l,
                              const detail::StageShape& s) {
    switch (l.kind) {
      case LayerKind::kConv:
        total += l.channels * s.c * l.kernel * l.kernel + l.channels;
        break;
      case LayerKind::kOrConv:
        total += l.channels * s.c * l.kernel * l.kernel * s.n + l.channels;
        break;
      case LayerKind::kLinear:
        total += l.channels * s.f + l.channels;
        break;
      default:
        break;
    }
  });
  return total;
}

}  // namespace orn
