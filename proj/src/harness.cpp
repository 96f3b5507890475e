#include "assist/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "assist/baselines.hpp"
#include "assist/data.hpp"
#include "assist/errors.hpp"
#include "assist/rl.hpp"

namespace assist {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows,
                       bool include_wall_time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.seed << ',' << r.round << ','
        << format_number(r.global_train_loss) << ','
        << (r.test_metric_1 ? format_number(*r.test_metric_1) : "") << ','
        << (r.test_metric_2 ? format_number(*r.test_metric_2) : "") << ','
        << (include_wall_time ? format_number(r.wall_ms) : "0") << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidArgument("missing column \"" + name + "\"");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  auto split_line = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream s(l);
    while (std::getline(s, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty file");
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    cells.resize(table.header.size());
    table.rows.push_back(std::move(cells));
  }
  return table;
}

namespace {

using Task = std::function<std::vector<MetricsRow>()>;

// Runs tasks on a small pool; results keep task order. The first failure in
// task order is rethrown.
std::vector<std::vector<MetricsRow>> run_tasks(const std::vector<Task>& tasks, unsigned threads) {
  std::vector<std::vector<MetricsRow>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

std::vector<double> unit_mean(std::size_t dim, std::size_t k, double scale) {
  std::vector<double> m(dim, 0.0);
  m[k] = scale;
  return m;
}

std::string epsilon_label(double eps) {
  std::string s = format_number(eps);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

// Mean final-round metric per algorithm, for the run summary.
std::string summarize(const std::vector<MetricsRow>& rows, const std::vector<std::string>& order) {
  std::ostringstream out;
  for (const auto& name : order) {
    int last_round = -1;
    for (const auto& r : rows)
      if (r.algorithm == name) last_round = std::max(last_round, r.round);
    double loss = 0.0, m1 = 0.0, m2 = 0.0;
    int n = 0, n1 = 0, n2 = 0;
    for (const auto& r : rows) {
      if (r.algorithm != name || r.round != last_round) continue;
      loss += r.global_train_loss;
      ++n;
      if (r.test_metric_1) m1 += *r.test_metric_1, ++n1;
      if (r.test_metric_2) m2 += *r.test_metric_2, ++n2;
    }
    if (n == 0) continue;
    out << name << ": round " << last_round << " train=" << format_number(loss / n);
    if (n1) out << " test1=" << format_number(m1 / n1);
    if (n2) out << " test2=" << format_number(m2 / n2);
    out << '\n';
  }
  return out.str();
}

ExperimentResult run_theory(const RunConfig& config) {
  ExperimentResult result;
  const auto [tl, tp] = config.assist.explicit_split.value_or(std::pair<std::int64_t, std::int64_t>{10, 10});
  std::vector<StationarityReport> reports;
  for (int rounds : config.theory_rounds)
    reports.push_back(
        run_stationarity_check(config.quadratic, rounds, tl, tp, config.theory_eta_scale));

  const auto path = config.out_dir / "theory.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "rounds,eta,lipschitz,local_iters,grad_bound,realized_grad_bound,delta0,min_grad_sq,"
         "bound,pass\n";
  std::ostringstream summary;
  for (const auto& r : reports) {
    out << r.rounds << ',' << format_number(r.eta) << ',' << format_number(r.lipschitz) << ','
        << r.local_iters << ',' << format_number(r.grad_bound) << ','
        << format_number(r.realized_grad_bound) << ',' << format_number(r.delta0) << ','
        << format_number(r.min_grad_sq) << ',' << format_number(r.bound) << ','
        << (r.pass ? "true" : "false") << '\n';
    summary << "R=" << r.rounds << " eta=" << format_number(r.eta)
            << " min|grad|^2=" << format_number(r.min_grad_sq)
            << " bound=" << format_number(r.bound) << (r.pass ? " PASS" : " FAIL") << '\n';
    if (!r.pass) result.verification_failed = true;
  }
  // With R ascending the realized minimum should shrink.
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].rounds > reports[i - 1].rounds &&
        !(reports[i].min_grad_sq < reports[i - 1].min_grad_sq)) {
      result.verification_failed = true;
      summary << "realized minimum did not decrease from R=" << reports[i - 1].rounds
              << " to R=" << reports[i].rounds << '\n';
    }
  }
  result.files.push_back(path);
  result.summary = summary.str();
  return result;
}

}  // namespace

SupervisedSetup prepare_supervised(const RunConfig& config, std::uint64_t seed) {
  SupervisedSetup s;
  if (config.model.kind == ModelKind::kQuadratic) {
    s.learner.spec = ModelSpec::quadratic(config.quadratic.learner_center);
    s.provider.spec = ModelSpec::quadratic(config.quadratic.provider_center);
    return s;
  }
  const auto& d = config.data;
  Dataset train, test;
  if (d.source == DataSetup::Source::kGaussian) {
    GaussianMixtureSpec mix;
    for (std::size_t k = 0; k < d.classes; ++k) {
      mix.classes.push_back(
          {d.means.empty() ? unit_mean(d.dim, k, d.mean_scale) : d.means[k], d.sigma, d.per_class});
    }
    mix.seed = seed;
    train = generate_gaussian(mix);
    for (auto& c : mix.classes) c.count = d.test_per_class;
    mix.seed = derive_seed(seed, {stream::kTestData});
    test = generate_gaussian(mix);
  } else {
    try {
      train = load_csv(d.csv);
      if (!d.test_csv.empty()) test = load_csv(d.test_csv);
    } catch (const std::exception& e) {
      throw ConfigError("data.csv", e.what());
    }
  }
  if (train.dim() != config.model.input_dim)
    throw ConfigError("data.dim", "data has " + std::to_string(train.dim()) +
                                      " features but the model expects " +
                                      std::to_string(config.model.input_dim));
  PartyData parts;
  try {
    if (d.split == DataSetup::Split::kClassFraction) {
      std::map<int, double> fractions;
      for (std::size_t k = 0; k < d.learner_fractions.size(); ++k)
        fractions[static_cast<int>(k)] = d.learner_fractions[k];
      parts = split_by_class_fraction(train, fractions, seed);
    } else {
      parts = partition(train, PartitionSpec{d.rho, d.gamma_l, d.primary_class, seed});
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("data.split", e.what());
  }
  if (parts.first.empty() || parts.second.empty())
    throw ConfigError("data.split", "both parties need at least one record");
  s.learner = {config.model, std::move(parts.first)};
  s.provider = {config.model, std::move(parts.second)};
  s.test = std::move(test);
  return s;
}

namespace {

ParamVector initial_model(const RunConfig& config, const Party& learner, std::uint64_t seed) {
  if (config.model.kind == ModelKind::kQuadratic) return config.quadratic.initial;
  return init_params(learner.spec, seed);
}

}  // namespace

TrainingHistory run_supervised(const std::string& algorithm, const RunConfig& config,
                               const SupervisedSetup& s, std::uint64_t seed,
                               const std::optional<PrivacySpec>& privacy) {
  AssistConfig ac = config.assist;
  ac.seed = seed;
  ac.privacy = privacy;
  const Dataset* test = s.test.empty() ? nullptr : &s.test;
  ParamVector init = initial_model(config, s.learner, seed);
  if (algorithm == "assist") return run_assist_sgd(ac, s.learner, s.provider, test, init);
  if (algorithm == "centralized")
    return run_centralized(ac, merge_parties(s.learner, s.provider), test, init);
  if (algorithm == "learner_only") return run_learner_only(ac, s.learner, test, init);
  if (algorithm == "fedavg") return run_fedavg(ac, s.learner, s.provider, test, init);
  throw ConfigError("run.algorithms", "unknown algorithm '" + algorithm + "'");
}

rl::RLAssistConfig prepare_rl(const RunConfig& config, std::uint64_t seed) {
  rl::RLAssistConfig p = config.rl.protocol;
  p.seed = seed;
  const auto& r = config.rl;
  p.learner_envs = rl::sample_environments(r.learner_dist, r.learner_envs, derive_seed(seed, {1}));
  p.provider_envs =
      rl::sample_environments(r.provider_dist, r.provider_envs, derive_seed(seed, {2}));
  p.test1_envs = rl::sample_environments(r.test1_dist, r.test_envs, derive_seed(seed, {3}));
  p.test2_envs = rl::sample_environments(r.test2_dist, r.test_envs, derive_seed(seed, {4}));
  return p;
}

TrainingHistory run_rl(const std::string& algorithm, const RunConfig& config, std::uint64_t seed) {
  const auto protocol = prepare_rl(config, seed);
  const auto spec = rl::policy_spec(config.rl.hidden);
  if (algorithm == "assist") return rl::run_assist_pg(protocol, spec);
  if (algorithm == "centralized") return rl::run_centralized_pg(protocol, spec);
  if (algorithm == "learner_only") return rl::run_learner_pg(protocol, spec);
  if (algorithm == "fedavg") return rl::run_fedavg_pg(protocol, spec);
  throw ConfigError("run.algorithms", "unknown algorithm '" + algorithm + "'");
}

ExperimentResult run_experiment(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw ConfigError("output.dir", "cannot create " + config.out_dir.string());

  if (config.kind == ExperimentKind::kTheory) return run_theory(config);

  ExperimentResult result;
  std::vector<Task> tasks;
  std::vector<std::string> labels;
  std::atomic<bool> monotonicity_failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  auto supervised_task = [&](const std::string& algo, const std::string& label,
                             std::uint64_t seed, std::optional<PrivacySpec> privacy) -> Task {
    return [&, algo, label, seed, privacy] {
      const auto setup = prepare_supervised(config, seed);
      auto history = run_supervised(algo, config, setup, seed, privacy);
      if (algo == "assist") {
        const auto report = verify_monotonicity(history);
        if (report.status == MonotonicityReport::Status::kFail) {
          monotonicity_failed = true;
          std::lock_guard lock(failure_mutex);
          if (failure_message.empty())
            failure_message = label + " seed " + std::to_string(seed) + ": " + report.message;
        }
      }
      for (auto& row : history.metrics) row.algorithm = label;
      return history.metrics;
    };
  };

  switch (config.kind) {
    case ExperimentKind::kDl:
      for (const auto& algo : config.algorithms) {
        labels.push_back(algo);
        for (auto seed : config.seeds) tasks.push_back(supervised_task(algo, algo, seed, config.privacy));
      }
      break;
    case ExperimentKind::kDp:
      for (const auto& algo : config.algorithms) {
        for (double eps : config.dp_epsilons) {
          const std::string label = algo + "_eps" + epsilon_label(eps);
          labels.push_back(label);
          const PrivacySpec spec{eps, config.dp_base.delta, config.dp_base.clip_norm};
          for (auto seed : config.seeds) tasks.push_back(supervised_task(algo, label, seed, spec));
        }
      }
      break;
    case ExperimentKind::kRl:
      for (const auto& algo : config.algorithms) {
        labels.push_back(algo);
        for (auto seed : config.seeds)
          tasks.push_back([&config, algo, seed] { return run_rl(algo, config, seed).metrics; });
      }
      break;
    case ExperimentKind::kTheory:
      break;
  }

  for (auto& rows : run_tasks(tasks, config.threads))
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  const auto metrics_path = config.out_dir / "metrics.csv";
  write_metrics_csv(metrics_path, result.rows, config.wall_time);
  result.files.push_back(metrics_path);
  result.summary = summarize(result.rows, labels);

  if (config.kind == ExperimentKind::kDp) {
    // Accounting for one data draw: q = batch / |D|, T = rounds * local steps.
    const auto setup = prepare_supervised(config, config.seeds.front());
    const auto [tl, tp] = config.assist.split(setup.learner.size(), setup.provider.size());
    const auto path = config.out_dir / "composition.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "epsilon,delta,party,steps,batch_fraction,eps_prime,delta_prime\n";
    for (double eps : config.dp_epsilons) {
      const PrivacySpec spec{eps, config.dp_base.delta, config.dp_base.clip_norm};
      for (const auto& [party, size, iters] :
           {std::tuple{"learner", setup.learner.size(), tl},
            std::tuple{"provider", setup.provider.size(), tp}}) {
        const double q =
            config.assist.batch_size == kFullBatch || size == 0
                ? 1.0
                : std::min(1.0, static_cast<double>(config.assist.batch_size) /
                                    static_cast<double>(size));
        const std::int64_t steps = static_cast<std::int64_t>(config.assist.rounds) * iters;
        const auto c = compose(spec, steps, q);
        out << format_number(eps) << ',' << format_number(spec.delta) << ',' << party << ','
            << steps << ',' << format_number(q) << ',' << format_number(c.eps_prime) << ','
            << format_number(c.delta_prime) << '\n';
      }
    }
    result.files.push_back(path);
  }

  if (monotonicity_failed) {
    result.verification_failed = true;
    result.summary += "monotonicity violated: " + failure_message + '\n';
  }
  return result;
}

}  // namespace assist
