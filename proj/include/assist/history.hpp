#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "assist/models.hpp"

namespace assist {

// One output row of an experiment: the round's global training objective and
// up to two test metrics (accuracy for supervised runs, Test I/II mean return
// for policy-gradient runs).
struct MetricsRow {
  std::string algorithm;
  std::uint64_t seed = 0;
  int round = 0;
  double global_train_loss = 0.0;
  std::optional<double> test_metric_1;
  std::optional<double> test_metric_2;
  double wall_ms = 0.0;
};

// Per-round protocol trace. Values are global objectives (sum form) of
// theta^{r-1}, the provider's starting model, and theta^r.
struct RoundRecord {
  int round = 0;
  double global_loss_before = 0.0;
  double provider_init_loss = 0.0;
  double global_loss_after = 0.0;
  std::int64_t learner_pick_iter = 0;   // chosen from the learner's packet
  std::int64_t provider_pick_iter = 0;  // chosen from the provider's packet
  double wall_ms = 0.0;
};

struct TrainingHistory {
  std::string algorithm;
  std::uint64_t seed = 0;
  bool full_batch = false;
  std::vector<ParamVector> models;  // theta^0 .. theta^R
  std::vector<RoundRecord> rounds;  // empty for baselines
  std::vector<MetricsRow> metrics;  // rounds 0 .. R
  ParamVector best;
};

}  // namespace assist
