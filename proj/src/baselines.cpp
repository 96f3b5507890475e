#include "assist/baselines.hpp"

#include <chrono>

#include "internal.hpp"

namespace assist {

std::int64_t round_budget(const AssistConfig& config) {
  if (config.explicit_split) return config.explicit_split->first + config.explicit_split->second;
  return config.local_iters;
}

std::pair<double, double> fedavg_weights(std::size_t learner_size, std::size_t provider_size) {
  const std::size_t total = learner_size + provider_size;
  if (total == 0) return {0.5, 0.5};
  const double wl = static_cast<double>(learner_size) / static_cast<double>(total);
  return {wl, 1.0 - wl};
}

namespace {

// Single-party SGD in blocks of round_budget() steps.
TrainingHistory run_single_party(const char* name, const AssistConfig& config,
                                 const Party& party, const detail::SupervisedEvaluator& eval,
                                 std::optional<ParamVector> initial) {
  config.validate();
  TrainingHistory history;
  history.algorithm = name;
  history.seed = config.seed;
  history.full_batch = config.full_batch();
  ParamVector theta = initial ? std::move(*initial) : init_params(party.spec, config.seed);
  history.models.push_back(theta);
  history.metrics.push_back(eval.row(name, config.seed, 0, theta, 0.0));

  Rng rng = make_rng(config.seed, {stream::kLearner});
  LocalTrainOptions options{round_budget(config), 0.0, config.batch_size, config.sample_period,
                            config.privacy};
  for (int r = 1; r <= config.rounds; ++r) {
    const auto start = std::chrono::steady_clock::now();
    options.eta = config.eta.at(r);
    // Only the final iterate is needed; a period equal to the budget keeps the
    // packet at two checkpoints.
    options.sample_period = std::max<std::int64_t>(1, options.iters);
    auto packet = local_train(party, theta, options, rng, PartyRole::kLearner, r);
    theta = std::move(packet.checkpoints.back().params);
    history.metrics.push_back(eval.row(name, config.seed, r, theta, detail::elapsed_ms(start)));
    history.models.push_back(theta);
  }
  history.best = theta;
  return history;
}

}  // namespace

TrainingHistory run_centralized(const AssistConfig& config, const Party& pooled,
                                const Dataset* test_data, std::optional<ParamVector> initial) {
  const detail::SupervisedEvaluator eval(pooled, nullptr, test_data);
  return run_single_party("centralized", config, pooled, eval, std::move(initial));
}

TrainingHistory run_learner_only(const AssistConfig& config, const Party& learner,
                                 const Dataset* test_data, std::optional<ParamVector> initial) {
  const detail::SupervisedEvaluator eval(learner, nullptr, test_data);
  return run_single_party("learner_only", config, learner, eval, std::move(initial));
}

TrainingHistory run_fedavg(const AssistConfig& config, const Party& learner,
                           const Party& provider, const Dataset* test_data,
                           std::optional<ParamVector> initial) {
  config.validate();
  TrainingHistory history;
  history.algorithm = "fedavg";
  history.seed = config.seed;
  history.full_batch = config.full_batch();
  const detail::SupervisedEvaluator eval(learner, provider, test_data);
  ParamVector theta = initial ? std::move(*initial) : init_params(learner.spec, config.seed);
  history.models.push_back(theta);
  history.metrics.push_back(eval.row(history.algorithm, config.seed, 0, theta, 0.0));

  RoundStreams streams = RoundStreams::from_seed(config.seed);
  const auto [t_learner, t_provider] = config.split(learner.size(), provider.size());
  const auto [w_learner, w_provider] = fedavg_weights(learner.size(), provider.size());
  for (int r = 1; r <= config.rounds; ++r) {
    const auto start = std::chrono::steady_clock::now();
    LocalTrainOptions options{t_learner, config.eta.at(r), config.batch_size,
                              std::max<std::int64_t>(1, t_learner), config.privacy};
    const auto learner_packet =
        local_train(learner, theta, options, streams.learner, PartyRole::kLearner, r);
    options.iters = t_provider;
    options.sample_period = std::max<std::int64_t>(1, t_provider);
    const auto provider_packet =
        local_train(provider, theta, options, streams.provider, PartyRole::kProvider, r);
    const auto& a = learner_packet.checkpoints.back().params;
    const auto& b = provider_packet.checkpoints.back().params;
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = w_learner * a[i] + w_provider * b[i];
    history.metrics.push_back(
        eval.row(history.algorithm, config.seed, r, theta, detail::elapsed_ms(start)));
    history.models.push_back(theta);
  }
  history.best = theta;
  return history;
}

}  // namespace assist
