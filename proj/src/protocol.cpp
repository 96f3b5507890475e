#include "assist/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "assist/errors.hpp"
#include "internal.hpp"

namespace assist {

const char* to_string(PartyRole role) {
  return role == PartyRole::kLearner ? "learner" : "provider";
}

double Party::local_loss(std::span<const double> params) const {
  return loss(spec, params, data, Aggregation::kSum);
}

Party merge_parties(const Party& a, const Party& b) {
  if (a.spec.kind != b.spec.kind || a.spec.param_count() != b.spec.param_count())
    throw InvalidArgument("cannot merge parties with different models");
  if (a.spec.kind != ModelKind::kQuadratic) return {a.spec, Dataset::concat(a.data, b.data)};

  // wa/2|x-ca|^2 + wb/2|x-cb|^2 = w/2|x-c|^2 + wa*wb/(2w)|ca-cb|^2
  const auto& sa = a.spec;
  const auto& sb = b.spec;
  const double w = sa.quadratic_weight + sb.quadratic_weight;
  ParamVector center(sa.input_dim);
  double gap = 0.0;
  for (std::size_t i = 0; i < center.size(); ++i) {
    center[i] = (sa.quadratic_weight * sa.quadratic_center[i] +
                 sb.quadratic_weight * sb.quadratic_center[i]) / w;
    const double d = sa.quadratic_center[i] - sb.quadratic_center[i];
    gap += d * d;
  }
  ModelSpec merged = ModelSpec::quadratic(std::move(center));
  merged.quadratic_weight = w;
  merged.quadratic_offset = sa.quadratic_offset + sb.quadratic_offset +
                            sa.quadratic_weight * sb.quadratic_weight / (2.0 * w) * gap;
  return {merged, Dataset()};
}

void TrajectoryPacket::validate() const {
  if (checkpoints.empty()) throw InvalidArgument("empty trajectory packet");
  if (checkpoints.front().iter_index != 0)
    throw InvalidArgument("trajectory packet must start at iteration 0");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!std::isfinite(checkpoints[i].local_value))
      throw InvalidArgument("non-finite local value in packet");
    if (i > 0 && checkpoints[i].iter_index <= checkpoints[i - 1].iter_index)
      throw InvalidArgument("packet iteration indices must strictly increase");
  }
}

double LearningRate::at(int round) const {
  return initial * std::pow(decay, static_cast<double>(round));
}

std::vector<std::int64_t> checkpoint_indices(std::int64_t iters, std::int64_t period) {
  if (iters < 0) throw InvalidArgument("iteration count must be non-negative");
  if (period < 1) throw InvalidArgument("sample period must be at least 1");
  std::vector<std::int64_t> out{0};
  for (std::int64_t t = period; t < iters; t += period) out.push_back(t);
  if (iters > 0) out.push_back(iters);
  return out;
}

EpochSampler::EpochSampler(std::size_t n, std::size_t batch_size)
    : order_(n), batch_size_(std::min(batch_size, n)), cursor_(n) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

std::span<const std::size_t> EpochSampler::next(Rng& rng) {
  if (cursor_ >= order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng);
    cursor_ = 0;
  }
  const std::size_t take = std::min(batch_size_, order_.size() - cursor_);
  std::span<const std::size_t> batch(order_.data() + cursor_, take);
  cursor_ += take;
  return batch;
}

TrajectoryPacket local_train(const Party& party, ParamVector start,
                             const LocalTrainOptions& options, Rng& rng, PartyRole role,
                             int round, const IterateObserver& observer) {
  if (start.size() != party.spec.param_count())
    throw InvalidArgument("start model does not match the party's model");
  if (!(options.eta > 0.0) || !std::isfinite(options.eta))
    throw InvalidArgument("learning rate must be positive");
  const auto indices = checkpoint_indices(options.iters, options.sample_period);

  const bool has_records = party.spec.is_classifier();
  const bool full = options.batch_size == kFullBatch || options.batch_size >= party.size();
  EpochSampler sampler(party.size(), full ? party.size() : options.batch_size);

  TrajectoryPacket packet{role, round, {}};
  packet.checkpoints.reserve(indices.size());
  ParamVector theta = std::move(start);
  auto record = [&](std::int64_t t) {
    const double value = party.local_loss(theta);
    if (!std::isfinite(value)) throw DivergenceError(t);
    packet.checkpoints.push_back({t, theta, value});
  };

  std::size_t next_checkpoint = 0;
  for (std::int64_t t = 0;; ++t) {
    if (observer) observer(role, theta);
    if (next_checkpoint < indices.size() && indices[next_checkpoint] == t) {
      record(t);
      ++next_checkpoint;
    }
    if (t == options.iters) break;

    ParamVector grad;
    if (!has_records || full) {
      grad = gradient(party.spec, theta, party.data, Aggregation::kMean);
    } else {
      grad = batch_gradient(party.spec, theta, party.data, sampler.next(rng));
    }
    if (options.privacy) grad = dp_perturb(grad, *options.privacy, rng);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] -= options.eta * grad[i];
      if (!std::isfinite(theta[i])) throw DivergenceError(t + 1);
    }
  }
  return packet;
}

Selection select_best(const TrajectoryPacket& packet, const Party& receiver) {
  packet.validate();
  Selection best;
  bool have = false;
  for (std::size_t i = 0; i < packet.checkpoints.size(); ++i) {
    const auto& cp = packet.checkpoints[i];
    const double global = cp.local_value + receiver.local_loss(cp.params);
    if (!have || global < best.global_value) {
      best = {cp, global, i};
      have = true;
    }
  }
  return best;
}

void AssistConfig::validate() const {
  if (rounds < 1) throw InvalidArgument("rounds must be at least 1");
  if (local_iters < 0) throw InvalidArgument("local_iters must be non-negative");
  if (explicit_split && (explicit_split->first < 0 || explicit_split->second < 0))
    throw InvalidArgument("explicit iteration split must be non-negative");
  if (sample_period < 1) throw InvalidArgument("sample_period must be at least 1");
  for (int r = 1; r <= rounds; ++r)
    if (!(eta.at(r) > 0.0) || !std::isfinite(eta.at(r)))
      throw InvalidArgument("learning rate must be positive in every round");
  if (privacy) privacy->validate();
}

std::pair<std::int64_t, std::int64_t> AssistConfig::split(std::size_t learner_size,
                                                          std::size_t provider_size) const {
  if (explicit_split) return *explicit_split;
  const std::size_t total = learner_size + provider_size;
  const double share = total == 0 ? 0.5
                                  : static_cast<double>(learner_size) / static_cast<double>(total);
  const auto t_learner = static_cast<std::int64_t>(
      std::floor(static_cast<double>(local_iters) * share + 0.5));
  return {t_learner, local_iters - t_learner};
}

RoundStreams RoundStreams::from_seed(std::uint64_t seed) {
  return {make_rng(seed, {stream::kLearner}), make_rng(seed, {stream::kProvider})};
}

std::pair<ParamVector, RoundRecord> assist_round(int round, const ParamVector& theta_prev,
                                                 const AssistConfig& config,
                                                 const Party& learner, const Party& provider,
                                                 RoundStreams& streams,
                                                 const IterateObserver& observer) {
  const auto clock_start = std::chrono::steady_clock::now();
  const auto [t_learner, t_provider] = config.split(learner.size(), provider.size());
  LocalTrainOptions options{0, config.eta.at(round), config.batch_size, config.sample_period,
                            config.privacy};

  // Learner -> provider.
  options.iters = t_learner;
  const TrajectoryPacket learner_packet =
      local_train(learner, theta_prev, options, streams.learner, PartyRole::kLearner, round,
                  observer);

  // Provider: pick, train, reply.
  const Selection provider_init = select_best(learner_packet, provider);
  options.iters = t_provider;
  const TrajectoryPacket provider_packet =
      local_train(provider, provider_init.checkpoint.params, options, streams.provider,
                  PartyRole::kProvider, round, observer);

  // Learner picks the round output.
  const Selection output = select_best(provider_packet, learner);

  RoundRecord record;
  record.round = round;
  // Checkpoint 0 of the learner's packet is theta^{r-1}.
  record.global_loss_before =
      learner_packet.checkpoints.front().local_value +
      provider.local_loss(learner_packet.checkpoints.front().params);
  record.provider_init_loss = provider_init.global_value;
  record.global_loss_after = output.global_value;
  record.learner_pick_iter = provider_init.checkpoint.iter_index;
  record.provider_pick_iter = output.checkpoint.iter_index;
  record.wall_ms = detail::elapsed_ms(clock_start);
  return {output.checkpoint.params, record};
}

TrainingHistory run_assist_sgd(const AssistConfig& config, const Party& learner,
                               const Party& provider, const Dataset* test_data,
                               std::optional<ParamVector> initial,
                               const IterateObserver& observer) {
  config.validate();
  TrainingHistory history;
  history.algorithm = "assist";
  history.seed = config.seed;
  history.full_batch = config.full_batch();

  ParamVector theta = initial ? std::move(*initial) : init_params(learner.spec, config.seed);
  const detail::SupervisedEvaluator eval(learner, provider, test_data);
  history.models.push_back(theta);
  history.metrics.push_back(eval.row(history.algorithm, config.seed, 0, theta, 0.0));

  RoundStreams streams = RoundStreams::from_seed(config.seed);
  double best_loss = 0.0;
  for (int r = 1; r <= config.rounds; ++r) {
    auto [next, record] = assist_round(r, theta, config, learner, provider, streams, observer);
    theta = std::move(next);
    if (r == 1 || record.global_loss_after < best_loss) {
      best_loss = record.global_loss_after;
      history.best = theta;
    }
    history.metrics.push_back(eval.row(history.algorithm, config.seed, r, theta, record.wall_ms));
    history.models.push_back(theta);
    history.rounds.push_back(record);
  }
  return history;
}

}  // namespace assist
