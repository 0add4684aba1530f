#ifndef ORN_TRAIN_HPP_
#define ORN_TRAIN_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "orn/adadelta.hpp"
#include "orn/checkpoint.hpp"
#include "orn/dataset.hpp"
#include "orn/network.hpp"
#include "orn/nn_ops.hpp"
#include "orn/rng.hpp"

namespace orn {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double dropout = 0.5;  // recorded; the rate is wired into the spec's layers
  std::size_t val_size = 0;
  std::uint64_t seed = 0;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0, train_err = 0;
  double val_loss = 0, val_err = 0;
  double wall_seconds = 0;
};

inline const char* metrics_csv_header() {
  return "epoch,train_loss,train_err,val_loss,val_err,wall_seconds";
}

inline std::string metrics_csv_row(const EpochMetrics& m) {
  std::ostringstream s;
  s << m.epoch << ',' << m.train_loss << ',' << m.train_err << ','
    << m.val_loss << ',' << m.val_err << ',' << m.wall_seconds;
  return s.str();
}

struct EvalResult {
  double loss = 0;
  double error = 0;  // top-1 error in [0, 1]
  std::vector<std::size_t> confusion;  // classes x classes, row = true label
  std::size_t classes = 0;

  std::size_t at(std::size_t truth, std::size_t pred) const {
    return confusion[truth * classes + pred];
  }
};

// Deterministic shuffled split; the tail `val_size` samples of the permuted
// order become the validation set.
inline std::pair<data::LabeledImageSet, data::LabeledImageSet> split_train_val(
    const data::LabeledImageSet& set, std::size_t val_size,
    std::uint64_t seed) {
  if (val_size >= set.size()) {
    throw data::DataError("split_train_val: validation size " +
                          std::to_string(val_size) + " >= dataset size " +
                          std::to_string(set.size()));
  }
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed ^ 0x5eedf00d);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_int(i)]);
  }
  const std::size_t h = set.height(), w = set.width();
  auto take = [&](std::size_t begin, std::size_t count) {
    data::LabeledImageSet out;
    out.images = Tensor<float>({count, h, w});
    out.labels.resize(count);
    out.provenance = set.provenance;
    out.provenance.angles.clear();
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t src = order[begin + i];
      std::copy(set.images.data() + src * h * w,
                set.images.data() + (src + 1) * h * w,
                out.images.data() + i * h * w);
      out.labels[i] = set.labels[src];
    }
    return out;
  };
  const std::size_t train_n = set.size() - val_size;
  return {take(0, train_n), take(train_n, val_size)};
}

// Gathers a contiguous [n, 1, H, W] batch from index list positions
// [begin, begin+n).
inline Tensor<float> gather_batch(const data::LabeledImageSet& set,
                                  const std::vector<std::size_t>& idx,
                                  std::size_t begin, std::size_t n,
                                  std::vector<int>* labels) {
  const std::size_t h = set.height(), w = set.width();
  Tensor<float> x({n, 1, h, w});
  if (labels) labels->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = idx[begin + i];
    std::copy(set.images.data() + src * h * w,
              set.images.data() + (src + 1) * h * w, x.data() + i * h * w);
    if (labels) (*labels)[i] = set.labels[src];
  }
  return x;
}

class TrainAbort : public std::runtime_error {
 public:
  explicit TrainAbort(const std::string& what) : std::runtime_error(what) {}
};

// Adadelta training loop around a Network<float>. Owns the optimizer state,
// the epoch counter, and the RNG, so a Trainer can be checkpointed and
// resumed mid-run.
class Trainer {
 public:
  Trainer(Network<float>& net, const TrainConfig& cfg)
      : net_(net), cfg_(cfg), rng_(cfg.seed) {
    net_.init_params(rng_);
    for (auto* p : net_.params()) {
      opt_.emplace_back(p->shape());
    }
  }

  Network<float>& net() { return net_; }
  std::vector<AdadeltaState<float>>& opt_state() { return opt_; }
  std::uint64_t epoch() const { return epoch_; }
  Rng& rng() { return rng_; }

  ckpt::Checkpoint checkpoint() const {
    return ckpt::capture(net_, opt_, epoch_, rng_);
  }
  void restore(const ckpt::Checkpoint& c) {
    ckpt::restore(c, net_, opt_, &epoch_, &rng_);
  }

  // One pass over `train` in shuffled batches. A non-finite batch loss rolls
  // the parameters back to the epoch's entry state and raises TrainAbort.
  EpochMetrics run_epoch(const data::LabeledImageSet& train,
                         const data::LabeledImageSet& val) {
    const auto t0 = std::chrono::steady_clock::now();
    const ckpt::Checkpoint last_good = checkpoint();

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng_.uniform_int(i)]);
    }

    const auto params = net_.params();
    double loss_sum = 0;
    std::size_t wrong = 0;
    std::vector<int> labels;
    for (std::size_t begin = 0; begin < train.size();
         begin += cfg_.batch_size) {
      const std::size_t n = std::min(cfg_.batch_size, train.size() - begin);
      Tensor<float> x = gather_batch(train, order, begin, n, &labels);
      Tensor<float> logits = net_.forward(x, /*train=*/true, rng_);
      auto sx = nn::softmax_cross_entropy(logits, labels);
      if (!std::isfinite(static_cast<double>(sx.loss))) {
        restore(last_good);
        throw TrainAbort("epoch " + std::to_string(epoch_ + 1) +
                         ": non-finite loss at sample offset " +
                         std::to_string(begin) +
                         "; parameters rolled back to last completed epoch");
      }
      loss_sum += static_cast<double>(sx.loss) * n;
      wrong += count_errors(sx.probs, labels);
      net_.backward(sx.grad);
      const auto grads = net_.grads();
      for (std::size_t i = 0; i < params.size(); ++i) {
        adadelta_step(*params[i], *grads[i], opt_[i]);
      }
    }
    ++epoch_;

    EpochMetrics m;
    m.epoch = epoch_;
    m.train_loss = loss_sum / train.size();
    m.train_err = static_cast<double>(wrong) / train.size();
    if (val.size() > 0) {
      EvalResult ev = evaluate(net_, val, cfg_.batch_size, &rng_);
      m.val_loss = ev.loss;
      m.val_err = ev.error;
    } else {
      m.val_loss = std::nan("");
      m.val_err = std::nan("");
    }
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return m;
  }

  // Runs until cfg.epochs total epochs have elapsed (resume-aware). The
  // callback fires after each epoch; returning false stops early.
  std::vector<EpochMetrics> run(
      const data::LabeledImageSet& train, const data::LabeledImageSet& val,
      const std::function<bool(const EpochMetrics&)>& on_epoch = nullptr) {
    std::vector<EpochMetrics> history;
    while (epoch_ < cfg_.epochs) {
      history.push_back(run_epoch(train, val));
      if (on_epoch && !on_epoch(history.back())) break;
    }
    return history;
  }

  // Dropout-free forward over the whole split with a per-class confusion
  // matrix (row = true label, column = prediction).
  static EvalResult evaluate(Network<float>& net,
                             const data::LabeledImageSet& set,
                             std::size_t batch_size = 128, Rng* rng = nullptr) {
    Rng local(0);
    Rng& r = rng ? *rng : local;
    const std::size_t classes = net.num_classes();
    EvalResult out;
    out.classes = classes;
    out.confusion.assign(classes * classes, 0);
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<int> labels;
    double loss_sum = 0;
    std::size_t wrong = 0;
    for (std::size_t begin = 0; begin < set.size(); begin += batch_size) {
      const std::size_t n = std::min(batch_size, set.size() - begin);
      Tensor<float> x = gather_batch(set, order, begin, n, &labels);
      Tensor<float> logits = net.forward(x, /*train=*/false, r);
      auto sx = nn::softmax_cross_entropy(logits, labels);
      loss_sum += static_cast<double>(sx.loss) * n;
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t pred = argmax_row(sx.probs, b, classes);
        out.confusion[static_cast<std::size_t>(labels[b]) * classes + pred]++;
        if (pred != static_cast<std::size_t>(labels[b])) ++wrong;
      }
    }
    out.loss = loss_sum / set.size();
    out.error = static_cast<double>(wrong) / set.size();
    return out;
  }

 private:
  static std::size_t argmax_row(const Tensor<float>& probs, std::size_t b,
                                std::size_t k) {
    const float* p = probs.data() + b * k;
    return static_cast<std::size_t>(std::max_element(p, p + k) - p);
  }

  static std::size_t count_errors(const Tensor<float>& probs,
                                  const std::vector<int>& labels) {
    const std::size_t k = probs.extent(1);
    std::size_t wrong = 0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
      if (argmax_row(probs, b, k) != static_cast<std::size_t>(labels[b])) {
        ++wrong;
      }
    }
    return wrong;
  }

  Network<float>& net_;
  TrainConfig cfg_;
  std::vector<AdadeltaState<float>> opt_;
  std::uint64_t epoch_ = 0;
  Rng rng_;
};

}  // namespace orn

#endif  // ORN_TRAIN_HPP_
