#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "assist/config.hpp"
#include "assist/history.hpp"
#include "assist/protocol.hpp"

namespace assist {

// ---- Theory checks -------------------------------------------------------

// Step size sqrt(delta0 / (3 R L T G^2)) from the stationarity analysis.
double theorem_eta(double rounds, double lipschitz, double local_iters, double grad_bound,
                   double delta0);

// sqrt(12 L T G^2 delta0 / R), the bound on min_r |grad f(theta^r)|^2.
double theorem_bound(double rounds, double lipschitz, double local_iters, double grad_bound,
                     double delta0);

struct MonotonicityReport {
  enum class Status { kPass, kFail, kNotApplicable };
  Status status = Status::kPass;
  int first_violation_round = -1;
  double before = 0.0;
  double after = 0.0;
  std::string message;
};

inline constexpr double kMonotonicityTolerance = 1e-12;

// Passes iff f(theta^r) <= f(theta^{r-1}) + tolerance for every round of a
// full-batch run, and the per-round chain
//   f(theta^r) <= f(provider start) <= f(theta^{r-1})
// holds. Mini-batch histories are not applicable.
MonotonicityReport verify_monotonicity(const TrainingHistory& history,
                                       double tolerance = kMonotonicityTolerance);

struct StationarityReport {
  bool pass = false;
  int rounds = 0;
  double eta = 0.0;
  double lipschitz = 0.0;
  std::int64_t local_iters = 0;  // T in the bound: max(T, T')
  double grad_bound = 0.0;       // G used in the bound
  double realized_grad_bound = 0.0;
  double delta0 = 0.0;
  double min_grad_sq = 0.0;  // min over r < R of |grad f(theta^r)|^2
  double bound = 0.0;
  std::vector<double> grad_sq;  // |grad f(theta^r)|^2 for r = 0..R
};

// Checks the bound on an existing full-batch history of the quadratic pair.
// grad_bound is G; realized_grad_bound is the largest gradient norm observed
// along the trajectory (0 when unknown).
StationarityReport verify_stationarity(const TrainingHistory& history, const Party& learner,
                                       const Party& provider, std::int64_t local_iters,
                                       double eta, double grad_bound,
                                       double realized_grad_bound = 0.0);

// Runs full-batch AssistSGD on the quadratic pair with eta =
// eta_scale * theorem_eta(...) and analytically derived L, G, delta0, then
// verifies the bound.
StationarityReport run_stationarity_check(const QuadraticSetup& setup, int rounds,
                                          std::int64_t learner_iters,
                                          std::int64_t provider_iters,
                                          double eta_scale = 1.0);

// Largest of the learner, provider and global gradient norms over the convex
// hull of {theta^0, c_L, c_P}; a valid G whenever every step size is <= 1.
double quadratic_hull_grad_bound(const QuadraticSetup& setup);

// ---- Metrics files -------------------------------------------------------

inline constexpr const char* kMetricsHeader =
    "algorithm,seed,round,global_train_loss,test_metric_1,test_metric_2,wall_ms";

std::string format_number(double value);

// Rows are written in the given order; wall_ms is written as 0 unless
// include_wall_time is set, which keeps reruns byte-identical.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows,
                       bool include_wall_time);

// Generic CSV table: header names and string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws InvalidArgument naming the column when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

// ---- Experiments ---------------------------------------------------------

struct ExperimentResult {
  std::vector<std::filesystem::path> files;  // metrics first
  std::vector<MetricsRow> rows;
  bool verification_failed = false;
  std::string summary;
};

// One party pair and its held-out records, drawn for one seed.
struct SupervisedSetup {
  Party learner;
  Party provider;
  Dataset test;
};

SupervisedSetup prepare_supervised(const RunConfig& config, std::uint64_t seed);

// A single (algorithm, seed) cell of a supervised experiment.
TrainingHistory run_supervised(const std::string& algorithm, const RunConfig& config,
                               const SupervisedSetup& setup, std::uint64_t seed,
                               const std::optional<PrivacySpec>& privacy);

// Environment sets for one seed.
rl::RLAssistConfig prepare_rl(const RunConfig& config, std::uint64_t seed);

TrainingHistory run_rl(const std::string& algorithm, const RunConfig& config,
                       std::uint64_t seed);

// Executes every (algorithm, seed) cell of the configured experiment and
// writes the outputs under config.out_dir. Throws ConfigError for invalid
// inputs and DivergenceError when training diverges.
ExperimentResult run_experiment(const RunConfig& config);

// ---- Plots ---------------------------------------------------------------

struct PlotSpec {
  std::filesystem::path out_dir;
  // Columns to plot; empty means every metric column with at least one value.
  std::vector<std::string> metrics;
};

// One SVG per metric comparing all algorithms: mean across seeds with a
// min/max band when more than one seed is present.
std::vector<std::filesystem::path> emit_plot(const std::filesystem::path& metrics_csv,
                                             const PlotSpec& spec);

}  // namespace assist
