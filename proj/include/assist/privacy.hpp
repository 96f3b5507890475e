#pragma once

#include <cstdint>

#include "assist/models.hpp"
#include "assist/rng.hpp"

namespace assist {

// Per-step (epsilon, delta) guarantee with the clipping norm applied to each
// gradient before noise is added.
struct PrivacySpec {
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;

  void validate() const;
  // sigma^2 = 2 * log(1/delta) / epsilon^2
  double noise_variance() const;
};

struct CompositionResult {
  double eps_prime = 0.0;
  double delta_prime = 0.0;
};

// Rescales grad to norm <= clip_norm, then adds i.i.d. N(0, noise_variance())
// to every coordinate.
ParamVector dp_perturb(std::span<const double> grad, const PrivacySpec& spec, Rng& rng);

// Strong composition over `steps` noisy steps with batch fraction q:
// eps' = 2 q eps sqrt(T log(1/delta)), delta' = q T delta.
CompositionResult compose(const PrivacySpec& spec, std::int64_t steps, double batch_fraction);

}  // namespace assist
