// Command-line front end: dataset building, training, evaluation, gradient
// checking, and feature-map visualization. Exit codes: 0 success, 1 usage
// error, 2 data error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "orn/blas.hpp"
#include "orn/checkpoint.hpp"
#include "orn/dataset.hpp"
#include "orn/gradcheck.hpp"
#include "orn/network.hpp"
#include "orn/pgm.hpp"
#include "orn/train.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Flat key=value experiment configuration. Every run resolves one of these
// and writes it next to its outputs so results are traceable.
struct Config {
  std::map<std::string, std::string> kv = {
      {"network", "orn8"},      {"encoding", "oralign"},
      {"variant", "rot"},       {"images", ""},
      {"labels", ""},           {"synth_count", "12000"},
      {"epochs", "30"},         {"batch", "128"},
      {"dropout", "0.5"},       {"val_size", "1000"},
      {"seed", "0"},            {"threads", "1"},
      {"out", "run"},           {"resume", ""},
  };

  void set(const std::string& key, const std::string& value) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw UsageError("unknown config key '" + key + "'");
    }
    it->second = value;
  }

  const std::string& str(const std::string& key) const { return kv.at(key); }
  std::size_t num(const std::string& key) const {
    return static_cast<std::size_t>(std::stoull(kv.at(key)));
  }
  double real(const std::string& key) const { return std::stod(kv.at(key)); }

  void load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw orn::data::DataError(path + ": cannot open config");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw UsageError(path + ":" + std::to_string(lineno) +
                         ": expected key = value");
      }
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  void write_resolved(const std::string& path) const {
    std::ofstream f(path);
    for (const auto& [k, v] : kv) f << k << " = " << v << "\n";
  }
};

orn::NetworkSpec spec_from_config(const Config& cfg) {
  const std::string& net = cfg.str("network");
  const std::string& enc = cfg.str("encoding");
  orn::Encoding encoding;
  if (enc == "none") {
    encoding = orn::Encoding::kNone;
  } else if (enc == "oralign") {
    encoding = orn::Encoding::kOrAlign;
  } else if (enc == "orpooling") {
    encoding = orn::Encoding::kOrPooling;
  } else {
    throw UsageError("unknown encoding '" + enc +
                     "' (expected none|oralign|orpooling)");
  }
  if (net == "baseline") return orn::baseline_spec();
  if (net == "orn4") return orn::orn_spec(4, encoding);
  if (net == "orn8") return orn::orn_spec(8, encoding);
  throw UsageError("unknown network '" + net +
                   "' (expected baseline|orn4|orn8)");
}

// Base data: explicit IDX files when given, otherwise the procedural corpus.
orn::data::LabeledImageSet load_base(const Config& cfg) {
  const std::string& images = cfg.str("images");
  const std::string& labels = cfg.str("labels");
  if (!images.empty() || !labels.empty()) {
    if (images.empty() || labels.empty()) {
      throw UsageError("--images and --labels must be given together");
    }
    return orn::data::load_idx(images, labels);
  }
  return orn::data::synth_digits(cfg.num("synth_count"), cfg.num("seed"));
}

orn::data::LabeledImageSet load_variant(const Config& cfg) {
  const orn::data::Variant v = orn::data::parse_variant(cfg.str("variant"));
  return orn::data::build_variant(load_base(cfg), v, cfg.num("seed"));
}

void prepare_out(const Config& cfg) {
  fs::create_directories(cfg.str("out"));
  cfg.write_resolved(cfg.str("out") + "/config.resolved");
}

void print_confusion(std::ostream& os, const orn::EvalResult& ev) {
  os << "confusion (rows = true, cols = predicted):\n";
  for (std::size_t t = 0; t < ev.classes; ++t) {
    for (std::size_t p = 0; p < ev.classes; ++p) {
      os << std::setw(6) << ev.at(t, p);
    }
    os << "\n";
  }
}

void write_confusion_csv(const orn::EvalResult& ev, const std::string& path) {
  std::ofstream f(path);
  for (std::size_t t = 0; t < ev.classes; ++t) {
    for (std::size_t p = 0; p < ev.classes; ++p) {
      f << ev.at(t, p) << (p + 1 < ev.classes ? "," : "\n");
    }
  }
}

int cmd_build_data(const Config& cfg) {
  prepare_out(cfg);
  orn::data::LabeledImageSet set = load_variant(cfg);
  const std::string stem =
      cfg.str("out") + "/" + set.provenance.variant;
  orn::data::save_idx(set, stem + "-images-idx3-ubyte",
                      stem + "-labels-idx1-ubyte");
  orn::data::write_metadata(set, stem + "-metadata.txt");
  std::cout << "wrote " << set.size() << " samples: " << stem
            << "-{images-idx3,labels-idx1}-ubyte\n";
  return kExitOk;
}

int cmd_synth(const Config& cfg) {
  prepare_out(cfg);
  orn::data::LabeledImageSet set =
      orn::data::synth_digits(cfg.num("synth_count"), cfg.num("seed"));
  const std::string stem = cfg.str("out") + "/synth";
  orn::data::save_idx(set, stem + "-images-idx3-ubyte",
                      stem + "-labels-idx1-ubyte");
  orn::data::write_metadata(set, stem + "-metadata.txt");
  std::cout << "wrote " << set.size() << " samples: " << stem
            << "-{images-idx3,labels-idx1}-ubyte\n";
  return kExitOk;
}

int cmd_train(const Config& cfg) {
  prepare_out(cfg);
  orn::data::LabeledImageSet full = load_variant(cfg);
  auto [train, val] =
      orn::split_train_val(full, cfg.num("val_size"), cfg.num("seed"));

  orn::TrainConfig tc;
  tc.epochs = cfg.num("epochs");
  tc.batch_size = cfg.num("batch");
  tc.dropout = cfg.real("dropout");
  tc.val_size = cfg.num("val_size");
  tc.seed = cfg.num("seed");

  orn::Network<float> net(spec_from_config(cfg));
  orn::Trainer trainer(net, tc);
  if (!cfg.str("resume").empty()) {
    trainer.restore(orn::ckpt::load(cfg.str("resume")));
    std::cout << "resumed at epoch " << trainer.epoch() << "\n";
  }

  const std::string metrics_path = cfg.str("out") + "/metrics.csv";
  const bool append = !cfg.str("resume").empty() && fs::exists(metrics_path);
  std::ofstream metrics(metrics_path,
                        append ? std::ios::app : std::ios::out);
  if (!append) metrics << orn::metrics_csv_header() << "\n";

  const std::string ckpt_path = cfg.str("out") + "/checkpoint.ornc";
  try {
    trainer.run(train, val, [&](const orn::EpochMetrics& m) {
      metrics << orn::metrics_csv_row(m) << "\n" << std::flush;
      std::cout << "epoch " << m.epoch << " train_loss " << m.train_loss
                << " train_err " << m.train_err << " val_err " << m.val_err
                << " (" << m.wall_seconds << "s)\n";
      orn::ckpt::save(trainer.checkpoint(), ckpt_path);
      return true;
    });
  } catch (const orn::TrainAbort& e) {
    orn::ckpt::save(trainer.checkpoint(), ckpt_path);
    throw NumericError(e.what());
  }
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return kExitOk;
}

int cmd_eval(const Config& cfg, const std::string& checkpoint) {
  orn::Network<float> net(spec_from_config(cfg));
  orn::TrainConfig tc;
  tc.seed = cfg.num("seed");
  orn::Trainer trainer(net, tc);
  trainer.restore(orn::ckpt::load(checkpoint));

  orn::data::LabeledImageSet set = load_variant(cfg);
  orn::EvalResult ev = orn::Trainer::evaluate(net, set, cfg.num("batch"));
  std::cout << "samples " << set.size() << "  loss " << ev.loss << "  error "
            << 100.0 * ev.error << "%\n";
  print_confusion(std::cout, ev);
  if (!cfg.str("out").empty()) {
    prepare_out(cfg);
    write_confusion_csv(ev, cfg.str("out") + "/confusion.csv");
  }
  return kExitOk;
}

int cmd_gradcheck(double tolerance) {
  using orn::LayerKind;
  struct Case {
    const char* name;
    orn::NetworkSpec spec;
  };
  auto tiny = [](std::vector<orn::LayerSpec> layers, std::size_t h,
                 std::size_t w) {
    orn::NetworkSpec s;
    s.layers = std::move(layers);
    s.input_channels = 1;
    s.input_h = h;
    s.input_w = w;
    return s;
  };
  auto orc = [&](std::size_t kernel, std::size_t n) {
    return tiny({{.kind = LayerKind::kExtend, .orientations = n},
                 {.kind = LayerKind::kOrConv, .channels = 2, .kernel = kernel},
                 {.kind = LayerKind::kGlobalAvgPool},
                 {.kind = LayerKind::kFlatten},
                 {.kind = LayerKind::kLinear, .channels = 3},
                 {.kind = LayerKind::kSoftmaxOutput}},
                std::max<std::size_t>(kernel + 1, 5),
                std::max<std::size_t>(kernel + 1, 5));
  };
  std::vector<Case> cases;
  cases.push_back(
      {"conv", tiny({{.kind = LayerKind::kConv, .channels = 2, .kernel = 3},
                     {.kind = LayerKind::kRelu},
                     {.kind = LayerKind::kMaxPool},
                     {.kind = LayerKind::kFlatten},
                     {.kind = LayerKind::kLinear, .channels = 3},
                     {.kind = LayerKind::kSoftmaxOutput}},
                    6, 6)});
  cases.push_back({"orconv_w1n4", orc(1, 4)});
  cases.push_back({"orconv_w1n8", orc(1, 8)});
  cases.push_back({"orconv_w3n8", orc(3, 8)});
  cases.push_back({"orconv_w5n8", orc(5, 8)});
  {
    auto s = orc(3, 8);
    s.layers.insert(s.layers.begin() + 3,
                    orn::LayerSpec{.kind = LayerKind::kOrAlign});
    cases.push_back({"orconv_oralign", s});
  }
  {
    auto s = orc(3, 8);
    s.layers[3] = orn::LayerSpec{.kind = LayerKind::kOrPooling};
    // orpooling flattens the descriptor itself.
    cases.push_back({"orconv_orpooling", s});
  }

  bool all_pass = true;
  for (const auto& c : cases) {
    orn::GradcheckReport r =
        orn::gradcheck_network(c.spec, tolerance, /*seed=*/7);
    std::cout << std::setw(18) << std::left << c.name << " " << r.summary()
              << "\n";
    all_pass = all_pass && r.passed;
  }
  if (!all_pass) throw NumericError("gradient check failed");
  return kExitOk;
}

int cmd_visualize(const Config& cfg, const std::string& checkpoint,
                  std::size_t sample, std::size_t layer_index,
                  std::size_t channel) {
  prepare_out(cfg);
  orn::Network<float> net(spec_from_config(cfg));
  orn::TrainConfig tc;
  orn::Trainer trainer(net, tc);
  if (!checkpoint.empty()) trainer.restore(orn::ckpt::load(checkpoint));

  orn::data::LabeledImageSet set = load_variant(cfg);
  if (sample >= set.size()) {
    throw orn::data::DataError("sample index " + std::to_string(sample) +
                               " out of range (dataset has " +
                               std::to_string(set.size()) + ")");
  }
  const std::size_t h = set.height(), w = set.width();
  orn::Tensor<float> x({1, 1, h, w});
  std::copy(set.images.data() + sample * h * w,
            set.images.data() + (sample + 1) * h * w, x.data());

  std::vector<orn::Tensor<float>> acts;
  orn::Rng rng(0);
  net.forward(x, false, rng, &acts);
  if (layer_index >= acts.size()) {
    throw UsageError("layer index " + std::to_string(layer_index) +
                     " out of range (network has " +
                     std::to_string(acts.size()) + " layers)");
  }
  const orn::Tensor<float>& a = acts[layer_index];
  if (a.rank() != 5) {
    throw UsageError("layer " + std::to_string(layer_index) +
                     " output has no orientation channels (shape " +
                     a.shape_str() + ")");
  }
  const std::size_t C = a.extent(1), N = a.extent(2);
  const std::size_t fh = a.extent(3), fw = a.extent(4);
  if (channel >= C) {
    throw UsageError("feature channel " + std::to_string(channel) +
                     " out of range (layer has " + std::to_string(C) + ")");
  }
  // One tile per orientation channel, jointly normalised to [0, 1].
  orn::Tensor<float> tiles({N, fh, fw});
  const float* src = a.data() + channel * N * fh * fw;
  float lo = src[0], hi = src[0];
  for (std::size_t i = 0; i < N * fh * fw; ++i) {
    lo = std::min(lo, src[i]);
    hi = std::max(hi, src[i]);
  }
  const float range = hi > lo ? hi - lo : 1.0f;
  for (std::size_t i = 0; i < N * fh * fw; ++i) {
    tiles[i] = (src[i] - lo) / range;
  }
  const std::string path = cfg.str("out") + "/layer" +
                           std::to_string(layer_index) + "_c" +
                           std::to_string(channel) + ".pgm";
  orn::pgm::write_grid(tiles, path, N);
  std::cout << "wrote " << path << " (" << N << " orientation tiles)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oriented-response convolutional network toolkit"};
  app.require_subcommand(1);

  Config cfg;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    for (auto& [key, value] : cfg.kv) {
      // Every config key doubles as a long flag.
      sub->add_option_function<std::string>(
          "--" + key,
          [&overrides, k = key](const std::string& v) {
            overrides.emplace_back(k, v);
          });
    }
    return sub;
  };

  auto* build = add_common(app.add_subcommand(
      "build-data", "Build a dataset variant as IDX files"));
  auto* synth = add_common(app.add_subcommand(
      "synth", "Emit the procedural digit corpus as IDX files"));
  auto* train = add_common(app.add_subcommand("train", "Train a network"));

  auto* eval = add_common(
      app.add_subcommand("eval", "Evaluate a checkpoint on a dataset"));
  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Finite-difference check of all backward passes");
  double tolerance = 1e-5;
  gradcheck->add_option("--tolerance", tolerance, "max relative error");

  auto* vis = add_common(app.add_subcommand(
      "visualize", "Write a per-orientation feature-map grid as PGM"));
  std::string vis_checkpoint;
  std::size_t vis_sample = 0, vis_layer = 1, vis_channel = 0;
  vis->add_option("--checkpoint", vis_checkpoint,
                  "checkpoint file (optional: random weights if omitted)");
  vis->add_option("--sample", vis_sample, "dataset sample index");
  vis->add_option("--layer", vis_layer, "layer index (forward order)");
  vis->add_option("--channel", vis_channel, "feature channel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help/usage text
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    orn::blas::set_threads(static_cast<int>(cfg.num("threads")));

    if (build->parsed()) return cmd_build_data(cfg);
    if (synth->parsed()) return cmd_synth(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (eval->parsed()) return cmd_eval(cfg, checkpoint);
    if (gradcheck->parsed()) return cmd_gradcheck(tolerance);
    if (vis->parsed()) {
      return cmd_visualize(cfg, vis_checkpoint, vis_sample, vis_layer,
                           vis_channel);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const orn::data::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
