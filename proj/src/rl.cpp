#include "assist/rl.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "assist/baselines.hpp"
#include "assist/errors.hpp"
#include "internal.hpp"

namespace assist::rl {

void CartPoleParams::validate() const {
  if (!(pole_length > 0.0 && gravity >= 0.0 && cart_mass > 0.0 && pole_mass > 0.0 &&
        force_magnitude > 0.0 && tau > 0.0 && angle_threshold > 0.0 && position_threshold > 0.0))
    throw InvalidArgument("cart-pole parameters must be positive");
  if (max_steps < 1) throw InvalidArgument("max_steps must be at least 1");
}

StepResult cartpole_step(const CartPoleParams& p, const EnvState& s, Action action) {
  const double force = action == Action::kRight ? p.force_magnitude : -p.force_magnitude;
  const double total_mass = p.cart_mass + p.pole_mass;
  const double polemass_length = p.pole_mass * p.pole_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (p.gravity * sin_t - cos_t * temp) /
      (p.pole_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

  StepResult out;
  out.state.x = s.x + p.tau * s.x_dot;
  out.state.x_dot = s.x_dot + p.tau * x_acc;
  out.state.theta = s.theta + p.tau * s.theta_dot;
  out.state.theta_dot = s.theta_dot + p.tau * theta_acc;
  out.state.steps = s.steps + 1;
  out.reward = 1.0;
  out.done = std::abs(out.state.theta) > p.angle_threshold ||
             std::abs(out.state.x) > p.position_threshold || out.state.steps >= p.max_steps ||
             !std::isfinite(out.state.theta) || !std::isfinite(out.state.x);
  return out;
}

EnvState cartpole_reset(Rng& rng) {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  EnvState s;
  s.x = u(rng);
  s.x_dot = u(rng);
  s.theta = u(rng);
  s.theta_dot = u(rng);
  return s;
}

EnvDistribution EnvDistribution::uniform(double low, double high) {
  EnvDistribution d;
  d.kind = Kind::kUniform;
  d.low = low;
  d.high = high;
  return d;
}

EnvDistribution EnvDistribution::mixture(double p, double alpha, double beta, double low,
                                         double high) {
  EnvDistribution d = uniform(low, high);
  d.kind = Kind::kMixture;
  d.mixture_prob = p;
  d.alpha = alpha;
  d.beta = beta;
  return d;
}

EnvDistribution EnvDistribution::affine_beta(double scale, double offset, double alpha,
                                             double beta) {
  EnvDistribution d;
  d.kind = Kind::kAffineBeta;
  d.scale = scale;
  d.offset = offset;
  d.alpha = alpha;
  d.beta = beta;
  return d;
}

void EnvDistribution::validate() const {
  if (kind != Kind::kAffineBeta && !(low < high))
    throw InvalidArgument("uniform bounds need low < high");
  if (kind != Kind::kUniform && !(alpha > 0.0 && beta > 0.0))
    throw InvalidArgument("beta shape parameters must be positive");
  if (kind == Kind::kMixture && !(mixture_prob >= 0.0 && mixture_prob <= 1.0))
    throw InvalidArgument("mixture probability must lie in [0, 1]");
}

namespace {

double sample_beta(double alpha, double beta, Rng& rng) {
  std::gamma_distribution<double> ga(alpha, 1.0), gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

double EnvDistribution::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  switch (kind) {
    case Kind::kUniform:
      return low + (high - low) * u01(rng);
    case Kind::kMixture:
      if (u01(rng) < mixture_prob) return sample_beta(alpha, beta, rng);
      return low + (high - low) * u01(rng);
    case Kind::kAffineBeta:
      return scale * sample_beta(alpha, beta, rng) + offset;
  }
  return low;
}

std::vector<CartPoleParams> sample_environments(const EnvDistribution& dist, std::size_t n,
                                                std::uint64_t seed,
                                                const CartPoleParams& base) {
  dist.validate();
  Rng rng(derive_seed(seed, {stream::kEnvs}));
  std::vector<CartPoleParams> out(n, base);
  for (auto& env : out) {
    double value = dist.sample(rng);
    // The parameter must stay strictly positive; a draw of exactly 0 is redrawn.
    while (!(value > 0.0)) value = dist.sample(rng);
    if (dist.parameter == EnvParameter::kPoleLength) {
      env.pole_length = value;
    } else {
      env.force_magnitude = value;
    }
  }
  return out;
}

double Episode::recompute_return(double gamma) const {
  double total = 0.0, discount = 1.0;
  for (const auto& tr : transitions) {
    total += discount * tr.reward;
    discount *= gamma;
  }
  return total;
}

ModelSpec policy_spec(std::size_t hidden) { return ModelSpec::mlp(4, {hidden}, 2); }

Episode rollout(std::span<const double> policy, const ModelSpec& spec,
                const CartPoleParams& env, double gamma, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Episode ep;
  EnvState state = cartpole_reset(rng);
  double discount = 1.0;
  for (;;) {
    const double obs[4] = {state.x, state.x_dot, state.theta, state.theta_dot};
    const auto probs = class_probabilities(spec, policy, obs);
    const Action action = u01(rng) < probs[0] ? Action::kLeft : Action::kRight;
    const StepResult step = cartpole_step(env, state, action);
    ep.transitions.push_back({state, action, step.reward});
    ep.discounted_return += discount * step.reward;
    discount *= gamma;
    state = step.state;
    if (step.done) break;
  }
  return ep;
}

ParamVector pg_gradient(std::span<const double> policy, const ModelSpec& spec,
                        std::span<const Episode> episodes) {
  if (episodes.empty()) throw InvalidArgument("policy gradient needs at least one episode");
  Dataset records(4);
  std::vector<double> weights;
  for (const auto& ep : episodes) {
    for (const auto& tr : ep.transitions) {
      const double obs[4] = {tr.state.x, tr.state.x_dot, tr.state.theta, tr.state.theta_dot};
      records.append(obs, static_cast<int>(tr.action));
      weights.push_back(ep.discounted_return);
    }
  }
  ParamVector grad = weighted_log_prob_gradient(spec, policy, records, weights);
  const double inv = 1.0 / static_cast<double>(episodes.size());
  for (double& g : grad) g *= inv;
  return grad;
}

double estimate_J(std::span<const double> policy, const ModelSpec& spec,
                  std::span<const CartPoleParams> envs, double gamma,
                  std::size_t eval_episodes, std::uint64_t seed) {
  if (eval_episodes == 0) throw InvalidArgument("eval_episodes must be positive");
  double total = 0.0;
  for (const auto& env : envs) {
    double sum = 0.0;
    for (std::size_t e = 0; e < eval_episodes; ++e) {
      Rng rng(derive_seed(seed, {e}));
      sum += rollout(policy, spec, env, gamma, rng).discounted_return;
    }
    total += sum / static_cast<double>(eval_episodes);
  }
  return total;
}

void RLAssistConfig::validate() const {
  if (rounds < 1) throw InvalidArgument("rounds must be at least 1");
  if (local_iters < 0) throw InvalidArgument("local_iters must be non-negative");
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  if (batch_episodes == 0) throw InvalidArgument("batch_episodes must be positive");
  if (sample_period < 1) throw InvalidArgument("sample_period must be at least 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0, 1]");
  if (eval_episodes == 0) throw InvalidArgument("eval_episodes must be positive");
  if (learner_envs.empty() || provider_envs.empty())
    throw InvalidArgument("both parties need at least one environment");
  for (const auto* set : {&learner_envs, &provider_envs, &test1_envs, &test2_envs})
    for (const auto& env : *set) env.validate();
}

std::pair<std::int64_t, std::int64_t> RLAssistConfig::split() const {
  AssistConfig proxy;
  proxy.local_iters = local_iters;
  return proxy.split(learner_envs.size(), provider_envs.size());
}

std::uint64_t checkpoint_eval_seed(const RLAssistConfig& config, int round, PartyRole role,
                                   std::int64_t iter) {
  return derive_seed(config.seed, {stream::kEval, static_cast<std::uint64_t>(round),
                                   static_cast<std::uint64_t>(role),
                                   static_cast<std::uint64_t>(iter)});
}

namespace {

using CheckpointHook = std::function<void(std::int64_t, const ParamVector&)>;

// Gradient ascent with batches cycling through envs. Calls hook(t, theta)
// for t = 0..iters before each update.
ParamVector pg_ascent(const ModelSpec& spec, std::span<const CartPoleParams> envs,
                      ParamVector theta, std::int64_t iters, const RLAssistConfig& config,
                      Rng& rng, const CheckpointHook& hook) {
  if (envs.empty()) throw InvalidArgument("policy-gradient training needs an environment");
  std::vector<Episode> batch(config.batch_episodes);
  std::size_t next_env = 0;
  for (std::int64_t t = 0;; ++t) {
    if (hook) hook(t, theta);
    if (t == iters) break;
    for (auto& ep : batch) {
      Rng ep_rng(rng());
      ep = rollout(theta, spec, envs[next_env], config.gamma, ep_rng);
      next_env = (next_env + 1) % envs.size();
    }
    const ParamVector grad = pg_gradient(theta, spec, batch);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] += config.eta * grad[i];
      if (!std::isfinite(theta[i])) throw DivergenceError(t + 1);
    }
  }
  return theta;
}

class RLEvaluator {
 public:
  RLEvaluator(const RLAssistConfig& config, const ModelSpec& spec)
      : config_(config), spec_(spec) {
    train_envs_ = config.learner_envs;
    train_envs_.insert(train_envs_.end(), config.provider_envs.begin(),
                       config.provider_envs.end());
  }

  double mean_return(std::span<const double> theta, std::span<const CartPoleParams> envs,
                     int round, std::uint64_t which) const {
    const std::uint64_t seed =
        derive_seed(config_.seed, {stream::kMetric, static_cast<std::uint64_t>(round), which});
    return estimate_J(theta, spec_, envs, config_.gamma, config_.eval_episodes, seed) /
           static_cast<double>(envs.size());
  }

  MetricsRow row(const std::string& algorithm, int round, std::span<const double> theta,
                 double wall_ms) const {
    MetricsRow out;
    out.algorithm = algorithm;
    out.seed = config_.seed;
    out.round = round;
    out.global_train_loss = mean_return(theta, train_envs_, round, 0);
    if (!config_.test1_envs.empty())
      out.test_metric_1 = mean_return(theta, config_.test1_envs, round, 1);
    if (!config_.test2_envs.empty())
      out.test_metric_2 = mean_return(theta, config_.test2_envs, round, 2);
    out.wall_ms = wall_ms;
    return out;
  }

  const std::vector<CartPoleParams>& train_envs() const { return train_envs_; }

 private:
  const RLAssistConfig& config_;
  const ModelSpec& spec_;
  std::vector<CartPoleParams> train_envs_;
};

TrainingHistory start_history(const char* name, const RLAssistConfig& config,
                              const ModelSpec& spec, const RLEvaluator& eval,
                              std::optional<ParamVector>& initial, ParamVector& theta) {
  config.validate();
  spec.validate();
  TrainingHistory history;
  history.algorithm = name;
  history.seed = config.seed;
  theta = initial ? std::move(*initial) : init_params(spec, config.seed);
  history.models.push_back(theta);
  history.metrics.push_back(eval.row(name, 0, theta, 0.0));
  return history;
}

TrainingHistory run_single_party_pg(const char* name, const RLAssistConfig& config,
                                    const ModelSpec& spec, std::span<const CartPoleParams> envs,
                                    std::optional<ParamVector> initial) {
  const RLEvaluator eval(config, spec);
  ParamVector theta;
  TrainingHistory history = start_history(name, config, spec, eval, initial, theta);
  Rng rng = make_rng(config.seed, {stream::kLearner});
  for (int r = 1; r <= config.rounds; ++r) {
    const auto start = std::chrono::steady_clock::now();
    theta = pg_ascent(spec, envs, std::move(theta), config.local_iters, config, rng, {});
    history.metrics.push_back(eval.row(name, r, theta, detail::elapsed_ms(start)));
    history.models.push_back(theta);
  }
  history.best = theta;
  return history;
}

}  // namespace

TrajectoryPacket local_pg_train(const ModelSpec& spec, std::span<const CartPoleParams> envs,
                                ParamVector start, std::int64_t iters,
                                const RLAssistConfig& config, Rng& rng, PartyRole role,
                                int round) {
  if (start.size() != spec.param_count())
    throw InvalidArgument("start policy does not match the policy spec");
  const auto indices = checkpoint_indices(iters, config.sample_period);
  TrajectoryPacket packet{role, round, {}};
  std::size_t next = 0;
  pg_ascent(spec, envs, std::move(start), iters, config, rng,
            [&](std::int64_t t, const ParamVector& theta) {
              if (next < indices.size() && indices[next] == t) {
                const double value =
                    estimate_J(theta, spec, envs, config.gamma, config.eval_episodes,
                               checkpoint_eval_seed(config, round, role, t));
                packet.checkpoints.push_back({t, theta, value});
                ++next;
              }
            });
  return packet;
}

Selection select_best_return(const TrajectoryPacket& packet, const ModelSpec& spec,
                             std::span<const CartPoleParams> receiver_envs,
                             const RLAssistConfig& config) {
  packet.validate();
  Selection best;
  for (std::size_t i = 0; i < packet.checkpoints.size(); ++i) {
    const auto& cp = packet.checkpoints[i];
    const double own =
        estimate_J(cp.params, spec, receiver_envs, config.gamma, config.eval_episodes,
                   checkpoint_eval_seed(config, packet.round, packet.party, cp.iter_index));
    const double global = cp.local_value + own;
    if (i == 0 || global > best.global_value) best = {cp, global, i};
  }
  return best;
}

TrainingHistory run_assist_pg(const RLAssistConfig& config, const ModelSpec& spec,
                              std::optional<ParamVector> initial) {
  const RLEvaluator eval(config, spec);
  ParamVector theta;
  TrainingHistory history = start_history("assist", config, spec, eval, initial, theta);
  RoundStreams streams = RoundStreams::from_seed(config.seed);
  const auto [t_learner, t_provider] = config.split();
  double best_value = 0.0;
  for (int r = 1; r <= config.rounds; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const auto learner_packet = local_pg_train(spec, config.learner_envs, theta, t_learner,
                                               config, streams.learner, PartyRole::kLearner, r);
    const Selection provider_init =
        select_best_return(learner_packet, spec, config.provider_envs, config);
    const auto provider_packet =
        local_pg_train(spec, config.provider_envs, provider_init.checkpoint.params, t_provider,
                       config, streams.provider, PartyRole::kProvider, r);
    const Selection output = select_best_return(provider_packet, spec, config.learner_envs, config);

    RoundRecord record;
    record.round = r;
    record.global_loss_before = learner_packet.checkpoints.front().local_value +
                                estimate_J(theta, spec, config.provider_envs, config.gamma,
                                           config.eval_episodes,
                                           checkpoint_eval_seed(config, r, PartyRole::kLearner, 0));
    record.provider_init_loss = provider_init.global_value;
    record.global_loss_after = output.global_value;
    record.learner_pick_iter = provider_init.checkpoint.iter_index;
    record.provider_pick_iter = output.checkpoint.iter_index;
    theta = output.checkpoint.params;
    if (r == 1 || record.global_loss_after > best_value) {
      best_value = record.global_loss_after;
      history.best = theta;
    }
    record.wall_ms = detail::elapsed_ms(start);
    history.metrics.push_back(eval.row(history.algorithm, r, theta, record.wall_ms));
    history.models.push_back(theta);
    history.rounds.push_back(record);
  }
  return history;
}

TrainingHistory run_centralized_pg(const RLAssistConfig& config, const ModelSpec& spec,
                                   std::optional<ParamVector> initial) {
  const RLEvaluator eval(config, spec);
  return run_single_party_pg("centralized", config, spec, eval.train_envs(), std::move(initial));
}

TrainingHistory run_learner_pg(const RLAssistConfig& config, const ModelSpec& spec,
                               std::optional<ParamVector> initial) {
  return run_single_party_pg("learner_only", config, spec, config.learner_envs,
                             std::move(initial));
}

TrainingHistory run_fedavg_pg(const RLAssistConfig& config, const ModelSpec& spec,
                              std::optional<ParamVector> initial) {
  const RLEvaluator eval(config, spec);
  ParamVector theta;
  TrainingHistory history = start_history("fedavg", config, spec, eval, initial, theta);
  RoundStreams streams = RoundStreams::from_seed(config.seed);
  const auto [t_learner, t_provider] = config.split();
  const auto [w_learner, w_provider] =
      fedavg_weights(config.learner_envs.size(), config.provider_envs.size());
  for (int r = 1; r <= config.rounds; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const ParamVector a =
        pg_ascent(spec, config.learner_envs, theta, t_learner, config, streams.learner, {});
    const ParamVector b =
        pg_ascent(spec, config.provider_envs, theta, t_provider, config, streams.provider, {});
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = w_learner * a[i] + w_provider * b[i];
    history.metrics.push_back(eval.row(history.algorithm, r, theta, detail::elapsed_ms(start)));
    history.models.push_back(theta);
  }
  history.best = theta;
  return history;
}

PGBaselines run_pg_baselines(const RLAssistConfig& config, const ModelSpec& spec) {
  return {run_centralized_pg(config, spec), run_learner_pg(config, spec),
          run_fedavg_pg(config, spec)};
}

}  // namespace assist::rl
