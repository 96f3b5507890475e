#pragma once

#include <optional>

#include "assist/protocol.hpp"

namespace assist {

// The comparison algorithms. All of them consume the same AssistConfig, so a
// round means the same iteration budget (T + T') everywhere, and all emit
// rows for rounds 0..R.

// Plain SGD on the pooled objective (see merge_parties).
TrainingHistory run_centralized(const AssistConfig& config, const Party& pooled,
                                const Dataset* test_data = nullptr,
                                std::optional<ParamVector> initial = std::nullopt);

// Plain SGD on the learner's records only; the training column holds the
// learner's own mean loss.
TrainingHistory run_learner_only(const AssistConfig& config, const Party& learner,
                                 const Dataset* test_data = nullptr,
                                 std::optional<ParamVector> initial = std::nullopt);

// Two-agent FedAvg: each agent runs its T or T' local steps from the global
// model, which is then replaced by the size-weighted average of the two.
TrainingHistory run_fedavg(const AssistConfig& config, const Party& learner,
                           const Party& provider, const Dataset* test_data = nullptr,
                           std::optional<ParamVector> initial = std::nullopt);

// Per-round iteration budget shared by every algorithm.
std::int64_t round_budget(const AssistConfig& config);

// Aggregation weights (w_L, w_P) for the given sizes; equal when both are 0.
std::pair<double, double> fedavg_weights(std::size_t learner_size, std::size_t provider_size);

}  // namespace assist
