#include "assist/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "assist/errors.hpp"

namespace assist {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  // Accept simple fractions such as 1/9.
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    const double num = to_double(key, t.substr(0, slash));
    const double den = to_double(key, t.substr(slash + 1));
    if (den == 0.0) throw ConfigError(key, "division by zero in '" + t + "'");
    return num / den;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "expected a number, got '" + t + "'");
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "expected an integer, got '" + t + "'");
}

std::size_t to_count(const std::string& key, const std::string& text) {
  const auto v = to_int(key, text);
  if (v < 0) throw ConfigError(key, "must be non-negative");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + t + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::size_t> to_counts(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(to_count(key, item));
  return out;
}

}  // namespace

const std::vector<std::string>& KeyValueConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "experiment",
      "run.seeds", "run.algorithms", "run.threads",
      "output.dir", "output.wall_time",
      "model.kind", "model.hidden",
      "data.source", "data.classes", "data.dim", "data.per_class", "data.sigma",
      "data.means", "data.mean_scale", "data.test_per_class", "data.csv", "data.test_csv",
      "data.split", "data.learner_fractions", "data.rho", "data.gamma", "data.primary_class",
      "quadratic.learner_center", "quadratic.provider_center", "quadratic.init",
      "assist.rounds", "assist.local_iters", "assist.learner_iters", "assist.provider_iters",
      "assist.eta", "assist.eta_decay", "assist.batch_size", "assist.sample_period",
      "privacy.enabled", "privacy.epsilon", "privacy.epsilons", "privacy.delta",
      "privacy.clip_norm",
      "rl.parameter", "rl.learner_dist", "rl.provider_dist", "rl.test1_dist", "rl.test2_dist",
      "rl.learner_envs", "rl.provider_envs", "rl.test_envs", "rl.hidden", "rl.gamma",
      "rl.batch_episodes", "rl.eval_episodes", "rl.eta", "rl.rounds", "rl.local_iters",
      "rl.sample_period",
      "theory.rounds", "theory.eta_scale",
  };
  return keys;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw ConfigError(key, "unknown configuration key");
  entries_[key] = trim(value);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no), "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (cfg.entries_.count(key)) throw ConfigError(key, "duplicate key");
    cfg.set(key, line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kDl: return "dl";
    case ExperimentKind::kRl: return "rl";
    case ExperimentKind::kTheory: return "theory";
    case ExperimentKind::kDp: return "dp";
  }
  return "dl";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& text) {
  for (auto kind : {ExperimentKind::kDl, ExperimentKind::kRl, ExperimentKind::kTheory,
                    ExperimentKind::kDp})
    if (text == to_string(kind)) return kind;
  return std::nullopt;
}

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {"assist", "centralized", "learner_only",
                                                 "fedavg"};
  return names;
}

rl::EnvDistribution parse_env_distribution(const std::string& text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')')
    throw InvalidArgument("malformed distribution '" + t + "'");
  const std::string name = trim(t.substr(0, open));
  std::vector<double> args;
  for (const auto& item : split(t.substr(open + 1, t.size() - open - 2), ','))
    args.push_back(to_double(name, item));
  auto expect = [&](std::size_t n) {
    if (args.size() != n)
      throw InvalidArgument(name + " takes " + std::to_string(n) + " arguments");
  };
  rl::EnvDistribution d;
  if (name == "uniform") {
    expect(2);
    d = rl::EnvDistribution::uniform(args[0], args[1]);
  } else if (name == "beta") {
    expect(2);
    d = rl::EnvDistribution::affine_beta(1.0, 0.0, args[0], args[1]);
  } else if (name == "mixture") {
    expect(5);
    d = rl::EnvDistribution::mixture(args[0], args[1], args[2], args[3], args[4]);
  } else if (name == "affine_beta") {
    expect(4);
    d = rl::EnvDistribution::affine_beta(args[0], args[1], args[2], args[3]);
  } else {
    throw InvalidArgument("unknown distribution '" + name + "'");
  }
  d.validate();
  return d;
}

RunConfig RunConfig::from(const KeyValueConfig& kv) {
  RunConfig c;
  auto get = [&](const char* key) { return kv.get(key); };

  const auto kind_text = get("experiment");
  if (!kind_text) throw ConfigError("experiment", "missing (one of dl, rl, theory, dp)");
  const auto kind = parse_experiment_kind(*kind_text);
  if (!kind) throw ConfigError("experiment", "unknown experiment '" + *kind_text + "'");
  c.kind = *kind;

  if (auto v = get("run.seeds")) {
    c.seeds.clear();
    for (const auto& s : split(*v, ',')) {
      const auto seed = to_int("run.seeds", s);
      if (seed < 0) throw ConfigError("run.seeds", "seeds must be non-negative");
      c.seeds.push_back(static_cast<std::uint64_t>(seed));
    }
  }
  if (c.seeds.empty()) throw ConfigError("run.seeds", "seed list must be nonempty");
  {
    std::set<std::uint64_t> unique(c.seeds.begin(), c.seeds.end());
    if (unique.size() != c.seeds.size()) throw ConfigError("run.seeds", "duplicate seed");
  }

  const std::string algos = get("run.algorithms").value_or("all");
  if (algos == "all") {
    c.algorithms = algorithm_names();
  } else {
    for (const auto& name : split(algos, ',')) {
      const auto& known = algorithm_names();
      if (std::find(known.begin(), known.end(), name) == known.end())
        throw ConfigError("run.algorithms", "unknown algorithm '" + name + "'");
      if (std::find(c.algorithms.begin(), c.algorithms.end(), name) == c.algorithms.end())
        c.algorithms.push_back(name);
    }
    // Canonical order regardless of how the list was written.
    std::vector<std::string> ordered;
    for (const auto& name : algorithm_names())
      if (std::find(c.algorithms.begin(), c.algorithms.end(), name) != c.algorithms.end())
        ordered.push_back(name);
    c.algorithms = ordered;
  }
  if (c.algorithms.empty()) throw ConfigError("run.algorithms", "no algorithm selected");
  if (auto v = get("run.threads")) c.threads = static_cast<unsigned>(to_count("run.threads", *v));
  if (auto v = get("output.dir")) c.out_dir = *v;
  if (auto v = get("output.wall_time")) c.wall_time = to_bool("output.wall_time", *v);

  // Data.
  auto& d = c.data;
  if (auto v = get("data.source")) {
    if (*v == "gaussian") d.source = DataSetup::Source::kGaussian;
    else if (*v == "csv") d.source = DataSetup::Source::kCsv;
    else throw ConfigError("data.source", "expected gaussian or csv");
  }
  if (auto v = get("data.classes")) d.classes = to_count("data.classes", *v);
  if (auto v = get("data.dim")) d.dim = to_count("data.dim", *v);
  if (auto v = get("data.per_class")) d.per_class = to_count("data.per_class", *v);
  if (auto v = get("data.sigma")) d.sigma = to_double("data.sigma", *v);
  if (auto v = get("data.mean_scale")) d.mean_scale = to_double("data.mean_scale", *v);
  if (auto v = get("data.test_per_class")) d.test_per_class = to_count("data.test_per_class", *v);
  if (auto v = get("data.means")) {
    for (const auto& m : split(*v, ';')) d.means.push_back(to_doubles("data.means", m));
    d.classes = d.means.size();
    d.dim = d.means.empty() ? 0 : d.means.front().size();
    for (const auto& m : d.means)
      if (m.size() != d.dim) throw ConfigError("data.means", "means differ in dimension");
  }
  if (auto v = get("data.csv")) d.csv = *v;
  if (auto v = get("data.test_csv")) d.test_csv = *v;
  if (auto v = get("data.split")) {
    if (*v == "class_fraction") d.split = DataSetup::Split::kClassFraction;
    else if (*v == "partition") d.split = DataSetup::Split::kPartition;
    else throw ConfigError("data.split", "expected class_fraction or partition");
  }
  if (auto v = get("data.learner_fractions"))
    d.learner_fractions = to_doubles("data.learner_fractions", *v);
  if (auto v = get("data.rho")) d.rho = to_double("data.rho", *v);
  if (auto v = get("data.gamma")) d.gamma_l = to_double("data.gamma", *v);
  if (auto v = get("data.primary_class"))
    d.primary_class = static_cast<int>(to_count("data.primary_class", *v));
  if (d.source == DataSetup::Source::kGaussian) {
    if (d.classes < 2) throw ConfigError("data.classes", "need at least two classes");
    if (d.dim == 0) throw ConfigError("data.dim", "must be positive");
    if (!(d.sigma > 0.0)) throw ConfigError("data.sigma", "must be positive");
    if (d.means.empty() && d.dim < d.classes)
      throw ConfigError("data.dim", "unit-vector means need dim >= classes");
  } else if (d.csv.empty()) {
    throw ConfigError("data.csv", "required when data.source = csv");
  }
  for (double f : d.learner_fractions)
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("data.learner_fractions", "must lie in [0, 1]");
  if (!(d.rho > 0.0)) throw ConfigError("data.rho", "must be positive");
  if (!(d.gamma_l > 0.0 && d.gamma_l <= 1.0)) throw ConfigError("data.gamma", "must lie in (0, 1]");

  // Model.
  const std::string model_kind =
      get("model.kind").value_or(c.kind == ExperimentKind::kTheory ? "quadratic" : "logistic");
  std::vector<std::size_t> hidden;
  if (auto v = get("model.hidden")) hidden = to_counts("model.hidden", *v);
  for (auto h : hidden) if (h == 0) throw ConfigError("model.hidden", "sizes must be positive");
  if (model_kind == "logistic") {
    c.model = ModelSpec::logistic(d.dim, d.classes);
  } else if (model_kind == "mlp") {
    if (hidden.empty()) throw ConfigError("model.hidden", "required for mlp");
    c.model = ModelSpec::mlp(d.dim, hidden, d.classes);
  } else if (model_kind == "quadratic") {
    c.model.kind = ModelKind::kQuadratic;
  } else {
    throw ConfigError("model.kind", "expected logistic, mlp or quadratic");
  }

  auto& q = c.quadratic;
  if (auto v = get("quadratic.learner_center")) q.learner_center = to_doubles("quadratic.learner_center", *v);
  if (auto v = get("quadratic.provider_center")) q.provider_center = to_doubles("quadratic.provider_center", *v);
  if (auto v = get("quadratic.init")) q.initial = to_doubles("quadratic.init", *v);
  if (q.learner_center.empty() || q.learner_center.size() != q.provider_center.size())
    throw ConfigError("quadratic.provider_center", "centers must have equal nonzero length");
  if (q.initial.size() != q.learner_center.size())
    throw ConfigError("quadratic.init", "length must match the centers");

  // Protocol.
  auto& a = c.assist;
  a.rounds = 10;
  a.local_iters = 100;
  a.eta = {0.1, 1.0};
  if (auto v = get("assist.rounds")) a.rounds = static_cast<int>(to_int("assist.rounds", *v));
  if (auto v = get("assist.local_iters")) a.local_iters = to_int("assist.local_iters", *v);
  const auto li = get("assist.learner_iters");
  const auto pi = get("assist.provider_iters");
  if (li.has_value() != pi.has_value())
    throw ConfigError(li ? "assist.provider_iters" : "assist.learner_iters",
                      "learner_iters and provider_iters must be given together");
  if (li) a.explicit_split = {{to_int("assist.learner_iters", *li), to_int("assist.provider_iters", *pi)}};
  if (c.kind == ExperimentKind::kTheory && !a.explicit_split) a.explicit_split = {{10, 10}};
  if (auto v = get("assist.eta")) a.eta.initial = to_double("assist.eta", *v);
  if (auto v = get("assist.eta_decay")) a.eta.decay = to_double("assist.eta_decay", *v);
  if (auto v = get("assist.batch_size")) {
    if (*v == "full") a.batch_size = kFullBatch;
    else {
      a.batch_size = to_count("assist.batch_size", *v);
      if (a.batch_size == 0) throw ConfigError("assist.batch_size", "must be positive or full");
    }
  }
  if (auto v = get("assist.sample_period")) a.sample_period = to_int("assist.sample_period", *v);
  if (a.rounds < 1) throw ConfigError("assist.rounds", "must be at least 1");
  if (a.local_iters < 0) throw ConfigError("assist.local_iters", "must be non-negative");
  if (a.explicit_split && (a.explicit_split->first < 0 || a.explicit_split->second < 0))
    throw ConfigError("assist.learner_iters", "must be non-negative");
  if (!(a.eta.initial > 0.0)) throw ConfigError("assist.eta", "must be positive");
  if (!(a.eta.decay > 0.0)) throw ConfigError("assist.eta_decay", "must be positive");
  if (a.sample_period < 1) throw ConfigError("assist.sample_period", "must be at least 1");

  // Privacy.
  if (auto v = get("privacy.delta")) c.dp_base.delta = to_double("privacy.delta", *v);
  if (auto v = get("privacy.clip_norm")) c.dp_base.clip_norm = to_double("privacy.clip_norm", *v);
  if (auto v = get("privacy.epsilon")) c.dp_base.epsilon = to_double("privacy.epsilon", *v);
  if (auto v = get("privacy.epsilons")) c.dp_epsilons = to_doubles("privacy.epsilons", *v);
  try {
    c.dp_base.validate();
    for (double e : c.dp_epsilons) PrivacySpec{e, c.dp_base.delta, c.dp_base.clip_norm}.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("privacy", e.what());
  }
  if (c.kind == ExperimentKind::kDp && c.dp_epsilons.empty())
    throw ConfigError("privacy.epsilons", "at least one epsilon required");
  if (auto v = get("privacy.enabled"); v && to_bool("privacy.enabled", *v)) c.privacy = c.dp_base;

  // Reinforcement learning.
  auto& r = c.rl;
  auto& p = r.protocol;
  rl::EnvParameter parameter = rl::EnvParameter::kPoleLength;
  if (auto v = get("rl.parameter")) {
    if (*v == "pole_length") parameter = rl::EnvParameter::kPoleLength;
    else if (*v == "force_magnitude") {
      parameter = rl::EnvParameter::kForceMagnitude;
      r.learner_dist = rl::EnvDistribution::uniform(10.0, 15.0);
      r.provider_dist = rl::EnvDistribution::uniform(35.0, 40.0);
      r.test1_dist = rl::EnvDistribution::uniform(10.0, 40.0);
      r.test2_dist = rl::EnvDistribution::affine_beta(30.0, 10.0, 5.0, 1.0);
    } else {
      throw ConfigError("rl.parameter", "expected pole_length or force_magnitude");
    }
  }
  for (auto [key, dist] : {std::pair{"rl.learner_dist", &r.learner_dist},
                           std::pair{"rl.provider_dist", &r.provider_dist},
                           std::pair{"rl.test1_dist", &r.test1_dist},
                           std::pair{"rl.test2_dist", &r.test2_dist}}) {
    if (auto v = get(key)) {
      try {
        *dist = parse_env_distribution(*v);
      } catch (const InvalidArgument& e) {
        throw ConfigError(key, e.what());
      }
    }
    dist->parameter = parameter;
  }
  if (auto v = get("rl.learner_envs")) r.learner_envs = to_count("rl.learner_envs", *v);
  if (auto v = get("rl.provider_envs")) r.provider_envs = to_count("rl.provider_envs", *v);
  if (auto v = get("rl.test_envs")) r.test_envs = to_count("rl.test_envs", *v);
  if (auto v = get("rl.hidden")) r.hidden = to_count("rl.hidden", *v);
  if (auto v = get("rl.gamma")) p.gamma = to_double("rl.gamma", *v);
  if (auto v = get("rl.batch_episodes")) p.batch_episodes = to_count("rl.batch_episodes", *v);
  if (auto v = get("rl.eval_episodes")) p.eval_episodes = to_count("rl.eval_episodes", *v);
  if (auto v = get("rl.eta")) p.eta = to_double("rl.eta", *v);
  if (auto v = get("rl.rounds")) p.rounds = static_cast<int>(to_int("rl.rounds", *v));
  if (auto v = get("rl.local_iters")) p.local_iters = to_int("rl.local_iters", *v);
  if (auto v = get("rl.sample_period")) p.sample_period = to_int("rl.sample_period", *v);
  if (r.learner_envs == 0) throw ConfigError("rl.learner_envs", "must be positive");
  if (r.provider_envs == 0) throw ConfigError("rl.provider_envs", "must be positive");
  if (r.hidden == 0) throw ConfigError("rl.hidden", "must be positive");
  if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw ConfigError("rl.gamma", "must lie in (0, 1]");
  if (p.batch_episodes == 0) throw ConfigError("rl.batch_episodes", "must be positive");
  if (p.eval_episodes == 0) throw ConfigError("rl.eval_episodes", "must be positive");
  if (!(p.eta > 0.0)) throw ConfigError("rl.eta", "must be positive");
  if (p.rounds < 1) throw ConfigError("rl.rounds", "must be at least 1");
  if (p.local_iters < 0) throw ConfigError("rl.local_iters", "must be non-negative");
  if (p.sample_period < 1) throw ConfigError("rl.sample_period", "must be at least 1");

  // Theory.
  if (auto v = get("theory.rounds")) {
    c.theory_rounds.clear();
    for (auto n : to_counts("theory.rounds", *v)) c.theory_rounds.push_back(static_cast<int>(n));
  }
  for (int n : c.theory_rounds)
    if (n < 1) throw ConfigError("theory.rounds", "round counts must be positive");
  if (c.theory_rounds.empty()) throw ConfigError("theory.rounds", "at least one round count");
  if (auto v = get("theory.eta_scale")) c.theory_eta_scale = to_double("theory.eta_scale", *v);
  if (!(c.theory_eta_scale > 0.0)) throw ConfigError("theory.eta_scale", "must be positive");

  return c;
}

}  // namespace assist
