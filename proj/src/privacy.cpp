#include "assist/privacy.hpp"

#include <cmath>
#include <random>

#include "assist/errors.hpp"

namespace assist {

void PrivacySpec::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("privacy epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("privacy delta must lie in (0, 1)");
  if (!(clip_norm > 0.0)) throw InvalidArgument("privacy clip_norm must be positive");
}

double PrivacySpec::noise_variance() const {
  return 2.0 * std::log(1.0 / delta) / (epsilon * epsilon);
}

ParamVector dp_perturb(std::span<const double> grad, const PrivacySpec& spec, Rng& rng) {
  spec.validate();
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  const double scale = norm > spec.clip_norm ? spec.clip_norm / norm : 1.0;
  std::normal_distribution<double> noise(0.0, std::sqrt(spec.noise_variance()));
  ParamVector out(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) out[i] = grad[i] * scale + noise(rng);
  return out;
}

CompositionResult compose(const PrivacySpec& spec, std::int64_t steps, double batch_fraction) {
  spec.validate();
  if (steps < 0) throw InvalidArgument("composition steps must be non-negative");
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0))
    throw InvalidArgument("batch fraction must lie in (0, 1]");
  const double t = static_cast<double>(steps);
  return {2.0 * batch_fraction * spec.epsilon * std::sqrt(t * std::log(1.0 / spec.delta)),
          batch_fraction * t * spec.delta};
}

}  // namespace assist
