#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "assist/models.hpp"

namespace assist {

struct GaussianClass {
  std::vector<double> mean;
  double sigma = 1.0;  // isotropic standard deviation
  std::size_t count = 0;
};

struct GaussianMixtureSpec {
  std::vector<GaussianClass> classes;  // class index = position
  std::uint64_t seed = 0;
};

// Learner/provider recipe: rho = |D_L| / |D_P|, gamma_L = share of the
// learner's records taken from primary_class.
struct PartitionSpec {
  double rho = 1.0;
  double gamma_l = 1.0;
  int primary_class = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Learner-side split first, provider second.
using PartyData = std::pair<Dataset, Dataset>;

// Round half up, the rounding rule used for every fractional count.
std::size_t round_half_up(double x);

Dataset generate_gaussian(const GaussianMixtureSpec& spec);

// Per class, round_half_up(fraction * count) records chosen uniformly without
// replacement go to the learner; the rest go to the provider. Classes missing
// from the map keep all their records with the provider. Both outputs keep
// the input order.
PartyData split_by_class_fraction(const Dataset& data,
                                  const std::map<int, double>& learner_fraction,
                                  std::uint64_t seed);

PartyData partition(const Dataset& data, const PartitionSpec& spec);

// Header row required; a column named `label` holds integer class indices
// and every other column is a numeric feature in file order.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace assist
