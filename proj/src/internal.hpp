#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "assist/history.hpp"
#include "assist/protocol.hpp"

namespace assist::detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Computes per-round rows for supervised runs. The training column is the
// global sum loss divided by the total record count (the plain sum for
// record-free quadratic objectives). Without a provider it is the learner's
// own-data loss.
class SupervisedEvaluator {
 public:
  SupervisedEvaluator(const Party& learner, const Party* provider, const Dataset* test)
      : learner_(learner), provider_(provider), test_(test) {}
  SupervisedEvaluator(const Party& learner, const Party& provider, const Dataset* test)
      : SupervisedEvaluator(learner, &provider, test) {}

  double global_sum_loss(std::span<const double> theta) const {
    double total = learner_.local_loss(theta);
    if (provider_) total += provider_->local_loss(theta);
    return total;
  }

  MetricsRow row(const std::string& algorithm, std::uint64_t seed, int round,
                 std::span<const double> theta, double wall_ms) const {
    std::size_t n = learner_.size() + (provider_ ? provider_->size() : 0);
    MetricsRow out;
    out.algorithm = algorithm;
    out.seed = seed;
    out.round = round;
    out.global_train_loss = global_sum_loss(theta) / static_cast<double>(n == 0 ? 1 : n);
    if (test_ && !test_->empty() && learner_.spec.is_classifier())
      out.test_metric_1 = accuracy(learner_.spec, theta, *test_);
    out.wall_ms = wall_ms;
    return out;
  }

 private:
  const Party& learner_;
  const Party* provider_;
  const Dataset* test_;
};

}  // namespace assist::detail
