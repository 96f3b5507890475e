#include <algorithm>
#include <cmath>
#include <sstream>

#include "assist/errors.hpp"
#include "assist/harness.hpp"

namespace assist {

double theorem_eta(double rounds, double lipschitz, double local_iters, double grad_bound,
                   double delta0) {
  if (!(rounds > 0 && lipschitz > 0 && local_iters > 0 && grad_bound > 0) || delta0 < 0)
    throw InvalidArgument("theorem_eta needs positive R, L, T, G and delta0 >= 0");
  return std::sqrt(delta0 / (3.0 * rounds * lipschitz * local_iters * grad_bound * grad_bound));
}

double theorem_bound(double rounds, double lipschitz, double local_iters, double grad_bound,
                     double delta0) {
  if (!(rounds > 0 && lipschitz > 0 && local_iters > 0 && grad_bound > 0) || delta0 < 0)
    throw InvalidArgument("theorem_bound needs positive R, L, T, G and delta0 >= 0");
  return std::sqrt(12.0 * lipschitz * local_iters * grad_bound * grad_bound * delta0 / rounds);
}

MonotonicityReport verify_monotonicity(const TrainingHistory& history, double tolerance) {
  MonotonicityReport report;
  if (!history.full_batch) {
    report.status = MonotonicityReport::Status::kNotApplicable;
    report.message = "not applicable: stochastic (mini-batch or private) training";
    return report;
  }
  for (const auto& rec : history.rounds) {
    const bool chain_ok = rec.provider_init_loss <= rec.global_loss_before + tolerance &&
                          rec.global_loss_after <= rec.provider_init_loss + tolerance;
    if (rec.global_loss_after > rec.global_loss_before + tolerance || !chain_ok) {
      report.status = MonotonicityReport::Status::kFail;
      report.first_violation_round = rec.round;
      report.before = rec.global_loss_before;
      report.after = rec.global_loss_after;
      std::ostringstream msg;
      msg.precision(17);
      msg << "global loss increased in round " << rec.round << ": " << rec.global_loss_before
          << " -> " << rec.provider_init_loss << " -> " << rec.global_loss_after;
      report.message = msg.str();
      return report;
    }
  }
  // Consecutive rounds must also chain: before(r) equals after(r-1).
  for (std::size_t i = 1; i < history.rounds.size(); ++i) {
    const auto& prev = history.rounds[i - 1];
    const auto& cur = history.rounds[i];
    if (cur.global_loss_after > prev.global_loss_after + tolerance) {
      report.status = MonotonicityReport::Status::kFail;
      report.first_violation_round = cur.round;
      report.before = prev.global_loss_after;
      report.after = cur.global_loss_after;
      report.message = "global loss increased in round " + std::to_string(cur.round);
      return report;
    }
  }
  report.message = "non-increasing over " + std::to_string(history.rounds.size()) + " rounds";
  return report;
}

StationarityReport verify_stationarity(const TrainingHistory& history, const Party& learner,
                                       const Party& provider, std::int64_t local_iters,
                                       double eta, double grad_bound,
                                       double realized_grad_bound) {
  if (learner.spec.kind != ModelKind::kQuadratic || provider.spec.kind != ModelKind::kQuadratic)
    throw InvalidArgument("stationarity check expects a quadratic pair");
  if (history.models.size() < 2) throw InvalidArgument("history needs at least one round");
  const Party global = merge_parties(learner, provider);

  StationarityReport report;
  report.rounds = static_cast<int>(history.models.size()) - 1;
  report.eta = eta;
  report.lipschitz = global.spec.quadratic_weight;
  report.local_iters = local_iters;
  report.realized_grad_bound = realized_grad_bound;
  report.grad_bound = std::max(grad_bound, realized_grad_bound);
  report.delta0 = global.local_loss(history.models.front()) - global.spec.quadratic_offset;

  for (const auto& theta : history.models) {
    const auto g = gradient(global.spec, theta, global.data);
    double sq = 0.0;
    for (double v : g) sq += v * v;
    report.grad_sq.push_back(sq);
  }
  report.min_grad_sq = *std::min_element(report.grad_sq.begin(), report.grad_sq.end() - 1);
  report.bound = report.grad_bound > 0.0
                     ? theorem_bound(report.rounds, report.lipschitz,
                                     static_cast<double>(std::max<std::int64_t>(1, local_iters)),
                                     report.grad_bound, report.delta0)
                     : 0.0;
  report.pass = report.min_grad_sq <= report.bound;
  return report;
}

double quadratic_hull_grad_bound(const QuadraticSetup& setup) {
  const auto& cl = setup.learner_center;
  const auto& cp = setup.provider_center;
  double g = 0.0;
  for (const auto* v : {&setup.initial, &cl, &cp}) {
    double dl = 0.0, dp = 0.0, dg = 0.0;
    for (std::size_t i = 0; i < v->size(); ++i) {
      dl += ((*v)[i] - cl[i]) * ((*v)[i] - cl[i]);
      dp += ((*v)[i] - cp[i]) * ((*v)[i] - cp[i]);
      const double gi = 2.0 * (*v)[i] - cl[i] - cp[i];
      dg += gi * gi;
    }
    g = std::max({g, std::sqrt(dl), std::sqrt(dp), std::sqrt(dg)});
  }
  return g;
}

StationarityReport run_stationarity_check(const QuadraticSetup& setup, int rounds,
                                          std::int64_t learner_iters,
                                          std::int64_t provider_iters, double eta_scale) {
  const Party learner{ModelSpec::quadratic(setup.learner_center), {}};
  const Party provider{ModelSpec::quadratic(setup.provider_center), {}};
  learner.spec.validate();
  provider.spec.validate();
  if (setup.initial.size() != learner.spec.param_count())
    throw InvalidArgument("initial model length must match the centers");
  const Party global = merge_parties(learner, provider);

  const double lipschitz = global.spec.quadratic_weight;
  const std::int64_t t = std::max<std::int64_t>(1, std::max(learner_iters, provider_iters));
  const double g = quadratic_hull_grad_bound(setup);
  const double delta0 = global.local_loss(setup.initial) - global.spec.quadratic_offset;
  const double eta =
      g > 0.0 ? eta_scale * theorem_eta(rounds, lipschitz, static_cast<double>(t), g, delta0)
              : 0.0;

  TrainingHistory history;
  double realized = 0.0;
  if (eta > 0.0) {
    AssistConfig config;
    config.rounds = rounds;
    config.explicit_split = {{learner_iters, provider_iters}};
    config.eta = {eta, 1.0};
    config.batch_size = kFullBatch;
    config.sample_period = 1;
    const IterateObserver observer = [&](PartyRole, std::span<const double> theta) {
      for (const Party* p : {&learner, &provider, &global}) {
        const auto grad = gradient(p->spec, theta, p->data);
        double sq = 0.0;
        for (double v : grad) sq += v * v;
        realized = std::max(realized, std::sqrt(sq));
      }
    };
    history = run_assist_sgd(config, learner, provider, nullptr, setup.initial, observer);
  } else {
    // Already stationary: every round returns the start model.
    history.full_batch = true;
    history.models.assign(static_cast<std::size_t>(rounds) + 1, setup.initial);
  }
  return verify_stationarity(history, learner, provider, t, eta, g, realized);
}

}  // namespace assist
