#ifndef ORN_GRADCHECK_HPP_
#define ORN_GRADCHECK_HPP_

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "orn/network.hpp"
#include "orn/nn_ops.hpp"
#include "orn/rng.hpp"
#include "orn/tensor.hpp"

namespace orn {

struct GradcheckEntry {
  std::string param;       // parameter tensor name
  std::size_t flat_index;  // worst coordinate inside that tensor
  double analytic = 0;
  double numeric = 0;
  double rel_error = 0;
};

struct GradcheckReport {
  bool passed = false;
  double tolerance = 0;
  double max_rel_error = 0;
  std::vector<GradcheckEntry> per_param;   // worst coordinate of each tensor
  std::vector<GradcheckEntry> failures;    // coordinates over tolerance
  std::size_t resamples = 0;               // inputs rejected for tiny margins

  std::string summary() const {
    std::ostringstream s;
    s << (passed ? "PASS" : "FAIL") << " max_rel_error=" << max_rel_error
      << " tolerance=" << tolerance;
    for (const auto& f : failures) {
      s << "\n  " << f.param << "[" << f.flat_index
        << "] analytic=" << f.analytic << " numeric=" << f.numeric
        << " rel=" << f.rel_error;
    }
    return s.str();
  }
};

// Central-difference check of every parameter gradient of a small 64-bit
// network. The loss is softmax cross-entropy against random labels. Inputs
// whose forward pass lands too near an argmax tie or ReLU kink are
// resampled, since the finite-difference probe would straddle the
// discontinuity.
inline GradcheckReport gradcheck_network(const NetworkSpec& spec,
                                         double tolerance,
                                         std::uint64_t seed = 1,
                                         std::size_t batch = 2,
                                         double h = 1e-5,
                                         double min_margin = 1e-3) {
  Network<double> net = build_network<double>(spec);
  Rng rng(seed);
  net.init_params(rng);

  Tensor<double> x({batch, spec.input_channels, spec.input_h, spec.input_w});
  std::vector<int> labels(batch);
  GradcheckReport report;
  report.tolerance = tolerance;

  // Draw inputs until the decision-boundary margin is comfortable.
  for (int attempt = 0;; ++attempt) {
    if (attempt > 200) {
      throw std::runtime_error(
          "gradcheck_network: could not find an input with margin > " +
          std::to_string(min_margin));
    }
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-1.0, 1.0);
    for (auto& l : labels) {
      l = static_cast<int>(rng.uniform_int(net.num_classes()));
    }
    net.forward(x, /*train=*/false, rng);
    if (net.stability_margin() > min_margin) break;
    ++report.resamples;
  }

  auto loss_at = [&]() -> double {
    Tensor<double> logits = net.forward(x, false, rng);
    return static_cast<double>(nn::softmax_cross_entropy(logits, labels).loss);
  };

  // One analytic pass.
  {
    Tensor<double> logits = net.forward(x, false, rng);
    auto sx = nn::softmax_cross_entropy(logits, labels);
    net.backward(sx.grad);
  }
  const auto params = net.params();
  const auto grads = net.grads();
  const auto names = net.param_names();

  for (std::size_t p = 0; p < params.size(); ++p) {
    GradcheckEntry worst;
    worst.param = names[p];
    for (std::size_t i = 0; i < params[p]->numel(); ++i) {
      const double saved = (*params[p])[i];
      (*params[p])[i] = saved + h;
      const double lp = loss_at();
      (*params[p])[i] = saved - h;
      const double lm = loss_at();
      (*params[p])[i] = saved;

      const double fd = (lp - lm) / (2 * h);
      const double an = (*grads[p])[i];
      const double rel = std::abs(an - fd) /
                         std::max({std::abs(an), std::abs(fd), 1e-3});
      if (rel >= worst.rel_error) {
        worst.flat_index = i;
        worst.analytic = an;
        worst.numeric = fd;
        worst.rel_error = rel;
      }
      if (rel > tolerance) {
        report.failures.push_back({names[p], i, an, fd, rel});
      }
      report.max_rel_error = std::max(report.max_rel_error, rel);
    }
    report.per_param.push_back(worst);
  }
  report.passed = report.failures.empty();
  return report;
}

}  // namespace orn

#endif  // ORN_GRADCHECK_HPP_
