#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "assist/history.hpp"
#include "assist/models.hpp"
#include "assist/privacy.hpp"
#include "assist/rng.hpp"

namespace assist {

enum class PartyRole { kLearner, kProvider };

const char* to_string(PartyRole role);

// One party's private objective: its model family and its own records.
struct Party {
  ModelSpec spec;
  Dataset data;

  std::size_t size() const { return data.size(); }
  // Full-dataset local loss with sum aggregation.
  double local_loss(std::span<const double> params) const;
};

// A party whose sum loss is exactly the sum of the two inputs' sum losses.
// Dense models concatenate records; quadratics merge into one quadratic.
Party merge_parties(const Party& a, const Party& b);

// A sampled model and the sender's own objective at it. For supervised
// training the value is the full-dataset sum loss; for policy-gradient
// training it is the summed return estimate over the sender's environments.
struct Checkpoint {
  std::int64_t iter_index = 0;
  ParamVector params;
  double local_value = 0.0;
};

// The only object that crosses the party boundary.
struct TrajectoryPacket {
  PartyRole party = PartyRole::kLearner;
  int round = 1;
  std::vector<Checkpoint> checkpoints;

  // Nonempty, starts at iteration 0, strictly increasing, finite values.
  void validate() const;
};

// eta(r) = initial * decay^r; decay = 1 gives a constant rate.
struct LearningRate {
  double initial = 0.1;
  double decay = 1.0;

  double at(int round) const;
};

inline constexpr std::size_t kFullBatch = 0;

// Called with every iterate a party produces, including the start model.
using IterateObserver = std::function<void(PartyRole, std::span<const double>)>;

struct LocalTrainOptions {
  std::int64_t iters = 0;
  double eta = 0.1;
  std::size_t batch_size = kFullBatch;
  std::int64_t sample_period = 1;
  std::optional<PrivacySpec> privacy;
};

// {0} u {I, 2I, ...} u {T}
std::vector<std::int64_t> checkpoint_indices(std::int64_t iters, std::int64_t period);

// Shuffles record indices once per epoch and hands out consecutive batches
// without replacement; the last batch of an epoch may be short.
class EpochSampler {
 public:
  EpochSampler(std::size_t n, std::size_t batch_size);
  std::span<const std::size_t> next(Rng& rng);

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t cursor_;
};

// Runs T steps of theta <- theta - eta * g from `start` and records the
// sampled checkpoints with the full-dataset local loss.
TrajectoryPacket local_train(const Party& party, ParamVector start,
                             const LocalTrainOptions& options, Rng& rng,
                             PartyRole role = PartyRole::kLearner, int round = 1,
                             const IterateObserver& observer = {});

struct Selection {
  Checkpoint checkpoint;
  double global_value = 0.0;
  std::size_t position = 0;  // index inside the packet
};

// Picks the checkpoint minimizing transmitted local loss + the receiver's own
// loss; ties go to the earliest iteration.
Selection select_best(const TrajectoryPacket& packet, const Party& receiver);

struct AssistConfig {
  int rounds = 1;
  // Per-round local iterations shared as T:T' in proportion to data sizes
  // unless an explicit split is given.
  std::int64_t local_iters = 1;
  std::optional<std::pair<std::int64_t, std::int64_t>> explicit_split;
  LearningRate eta;
  std::size_t batch_size = kFullBatch;
  std::int64_t sample_period = 1;
  std::uint64_t seed = 0;
  std::optional<PrivacySpec> privacy;

  void validate() const;
  bool full_batch() const { return batch_size == kFullBatch && !privacy; }
  // (T, T') for the given data sizes.
  std::pair<std::int64_t, std::int64_t> split(std::size_t learner_size,
                                              std::size_t provider_size) const;
};

// Both parties appear here only because the exchange is simulated in one
// process; each step touches one party's data and the packet it received.
struct RoundStreams {
  Rng learner;
  Rng provider;

  static RoundStreams from_seed(std::uint64_t seed);
};

std::pair<ParamVector, RoundRecord> assist_round(int round, const ParamVector& theta_prev,
                                                 const AssistConfig& config,
                                                 const Party& learner, const Party& provider,
                                                 RoundStreams& streams,
                                                 const IterateObserver& observer = {});

// Runs R assistance rounds. history.models holds theta^0..theta^R and
// history.best the round output with the smallest global loss.
TrainingHistory run_assist_sgd(const AssistConfig& config, const Party& learner,
                               const Party& provider, const Dataset* test_data = nullptr,
                               std::optional<ParamVector> initial = std::nullopt,
                               const IterateObserver& observer = {});

}  // namespace assist
