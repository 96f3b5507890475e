#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "assist/data.hpp"
#include "assist/models.hpp"
#include "assist/privacy.hpp"
#include "assist/protocol.hpp"
#include "assist/rl.hpp"

namespace assist {

// Flat `key = value` text with dotted section keys. `#` starts a comment;
// blank lines are ignored. Keys must belong to the known schema.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<text>");
  static KeyValueConfig load(const std::filesystem::path& path);

  // Throws ConfigError for keys outside the schema.
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> entries_;
};

enum class ExperimentKind { kDl, kRl, kTheory, kDp };

const char* to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& text);

// Canonical order of algorithm names; also the CSV row order.
const std::vector<std::string>& algorithm_names();

struct DataSetup {
  enum class Source { kGaussian, kCsv };
  enum class Split { kClassFraction, kPartition };
  Source source = Source::kGaussian;
  std::size_t classes = 2;
  std::size_t dim = 2;
  std::size_t per_class = 50;
  double sigma = 1.5;
  std::vector<std::vector<double>> means;  // empty: mean_scale * unit vectors
  double mean_scale = 1.0;
  std::size_t test_per_class = 1000;
  std::filesystem::path csv;
  std::filesystem::path test_csv;
  Split split = Split::kClassFraction;
  std::vector<double> learner_fractions{0.9, 0.1};
  double rho = 1.0;
  double gamma_l = 1.0;
  int primary_class = 0;
};

struct QuadraticSetup {
  ParamVector learner_center{-1.0, -1.0};
  ParamVector provider_center{1.0, -1.25};
  ParamVector initial{0.0, 0.0};
};

struct RLSetup {
  rl::EnvDistribution learner_dist = rl::EnvDistribution::uniform(4.0, 5.0);
  rl::EnvDistribution provider_dist = rl::EnvDistribution::uniform(0.0, 1.0);
  rl::EnvDistribution test1_dist = rl::EnvDistribution::uniform(0.0, 5.0);
  rl::EnvDistribution test2_dist = rl::EnvDistribution::mixture(0.2, 1.0, 5.0, 0.0, 5.0);
  std::size_t learner_envs = 5;
  std::size_t provider_envs = 5;
  std::size_t test_envs = 10;
  std::size_t hidden = 4;
  rl::RLAssistConfig protocol;  // env lists and seed are filled per run
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::kDl;
  std::vector<std::string> algorithms;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path out_dir = "out";
  bool wall_time = false;
  unsigned threads = 0;  // 0: hardware concurrency

  ModelSpec model;  // for quadratic kinds the centers come from `quadratic`
  DataSetup data;
  QuadraticSetup quadratic;
  AssistConfig assist;  // seed is replaced per run

  std::optional<PrivacySpec> privacy;  // dl runs with privacy.enabled
  std::vector<double> dp_epsilons{1.0, 5.0, 10.0};
  PrivacySpec dp_base;

  RLSetup rl;

  std::vector<int> theory_rounds{4, 16, 64};
  double theory_eta_scale = 1.0;

  // Builds and validates; throws ConfigError naming the offending key.
  static RunConfig from(const KeyValueConfig& kv);
};

// Parses "uniform(a,b)", "beta(a,b)", "mixture(p,alpha,beta,a,b)" and
// "affine_beta(scale,offset,alpha,beta)".
rl::EnvDistribution parse_env_distribution(const std::string& text);

}  // namespace assist
