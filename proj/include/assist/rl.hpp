#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "assist/history.hpp"
#include "assist/models.hpp"
#include "assist/protocol.hpp"
#include "assist/rng.hpp"

namespace assist::rl {

// Classic cart-pole constants; pole_length is the half-length.
struct CartPoleParams {
  double pole_length = 0.5;
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double force_magnitude = 10.0;
  double tau = 0.02;
  double angle_threshold = 12.0 * 2.0 * std::numbers::pi / 360.0;
  double position_threshold = 2.4;
  int max_steps = 200;

  void validate() const;
};

struct EnvState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  int steps = 0;  // transitions taken so far
};

enum class Action : int { kLeft = 0, kRight = 1 };

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;
};

// One explicit Euler step. Reward is 1 for every step taken; done when the
// pole angle or cart position leaves its threshold or max_steps is reached.
StepResult cartpole_step(const CartPoleParams& params, const EnvState& state, Action action);

// Each state variable uniform in [-0.05, 0.05].
EnvState cartpole_reset(Rng& rng);

// Which CartPoleParams field a distribution draws.
enum class EnvParameter { kPoleLength, kForceMagnitude };

struct EnvDistribution {
  enum class Kind { kUniform, kMixture, kAffineBeta };
  Kind kind = Kind::kUniform;
  double low = 0.0, high = 1.0;        // uniform(low, high)
  double alpha = 1.0, beta = 1.0;      // Beta(alpha, beta)
  double mixture_prob = 0.0;           // mixture: P(Beta draw)
  double scale = 1.0, offset = 0.0;    // affine-beta: scale * Beta + offset
  EnvParameter parameter = EnvParameter::kPoleLength;

  static EnvDistribution uniform(double low, double high);
  // Beta(alpha, beta) with probability p, else uniform(low, high).
  static EnvDistribution mixture(double p, double alpha, double beta, double low, double high);
  static EnvDistribution affine_beta(double scale, double offset, double alpha, double beta);

  void validate() const;
  double sample(Rng& rng) const;
};

// n environments that differ from `base` only in the distribution's parameter.
std::vector<CartPoleParams> sample_environments(const EnvDistribution& dist, std::size_t n,
                                                std::uint64_t seed,
                                                const CartPoleParams& base = {});

struct Transition {
  EnvState state;  // state the action was taken in
  Action action = Action::kLeft;
  double reward = 0.0;
};

struct Episode {
  std::vector<Transition> transitions;
  double discounted_return = 0.0;

  // sum_t gamma^(t-1) r_t recomputed from the transitions.
  double recompute_return(double gamma) const;
};

// 4 state inputs -> tanh hidden layer -> softmax over {left, right}.
ModelSpec policy_spec(std::size_t hidden = 4);

Episode rollout(std::span<const double> policy, const ModelSpec& spec,
                const CartPoleParams& env, double gamma, Rng& rng);

// Mean over episodes of R(tau) * sum_t grad log pi(a_t | s_t); an ascent
// direction.
ParamVector pg_gradient(std::span<const double> policy, const ModelSpec& spec,
                        std::span<const Episode> episodes);

// Sum over environments of the mean discounted return of eval_episodes
// rollouts. Episode e uses the stream derive_seed(seed, {e}) in every
// environment, so equal seeds give paired estimates.
double estimate_J(std::span<const double> policy, const ModelSpec& spec,
                  std::span<const CartPoleParams> envs, double gamma,
                  std::size_t eval_episodes, std::uint64_t seed);

struct RLAssistConfig {
  int rounds = 10;
  std::int64_t local_iters = 20;  // per round, split by env-set sizes
  double eta = 5e-3;
  std::size_t batch_episodes = 32;
  std::int64_t sample_period = 4;
  double gamma = 0.99;
  std::size_t eval_episodes = 32;
  std::vector<CartPoleParams> learner_envs;
  std::vector<CartPoleParams> provider_envs;
  std::vector<CartPoleParams> test1_envs;
  std::vector<CartPoleParams> test2_envs;
  std::uint64_t seed = 0;

  void validate() const;
  std::pair<std::int64_t, std::int64_t> split() const;
};

// Local policy-gradient ascent for `iters` steps. Batches cycle through
// `envs`; checkpoints carry the summed return estimate over `envs` evaluated
// with the seed eval_seed(iter_index).
TrajectoryPacket local_pg_train(const ModelSpec& spec, std::span<const CartPoleParams> envs,
                                ParamVector start, std::int64_t iters,
                                const RLAssistConfig& config, Rng& rng, PartyRole role,
                                int round);

// Seed used to evaluate checkpoint `iter` of `role`'s packet in `round`; the
// receiving party evaluates with the same seed.
std::uint64_t checkpoint_eval_seed(const RLAssistConfig& config, int round, PartyRole role,
                                   std::int64_t iter);

// Maximizes transmitted value + the receiver's own summed estimate; ties go
// to the earliest iteration.
Selection select_best_return(const TrajectoryPacket& packet, const ModelSpec& spec,
                             std::span<const CartPoleParams> receiver_envs,
                             const RLAssistConfig& config);

// Rows hold mean training return over both env sets and the Test I/II mean
// returns. Round records carry summed return estimates.
TrainingHistory run_assist_pg(const RLAssistConfig& config, const ModelSpec& spec,
                              std::optional<ParamVector> initial = std::nullopt);

TrainingHistory run_centralized_pg(const RLAssistConfig& config, const ModelSpec& spec,
                                   std::optional<ParamVector> initial = std::nullopt);
TrainingHistory run_learner_pg(const RLAssistConfig& config, const ModelSpec& spec,
                               std::optional<ParamVector> initial = std::nullopt);
TrainingHistory run_fedavg_pg(const RLAssistConfig& config, const ModelSpec& spec,
                              std::optional<ParamVector> initial = std::nullopt);

struct PGBaselines {
  TrainingHistory centralized;
  TrainingHistory learner_only;
  TrainingHistory fedavg;
};

PGBaselines run_pg_baselines(const RLAssistConfig& config, const ModelSpec& spec);

}  // namespace assist::rl
