#include "assist/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "assist/errors.hpp"
#include "assist/rng.hpp"

namespace assist {

std::size_t round_half_up(double x) {
  if (!(x >= 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

void PartitionSpec::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be positive");
  if (!(gamma_l > 0.0 && gamma_l <= 1.0)) throw InvalidArgument("gamma_L must lie in (0, 1]");
  if (primary_class < 0) throw InvalidArgument("primary_class must be non-negative");
}

Dataset generate_gaussian(const GaussianMixtureSpec& spec) {
  if (spec.classes.empty()) return Dataset();
  const std::size_t dim = spec.classes.front().mean.size();
  for (const auto& c : spec.classes) {
    if (c.mean.size() != dim) throw InvalidArgument("class means differ in dimension");
    if (!(c.sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  }
  Rng rng(derive_seed(spec.seed, {stream::kData}));
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out(dim);
  std::vector<double> row(dim);
  for (std::size_t k = 0; k < spec.classes.size(); ++k) {
    const auto& c = spec.classes[k];
    for (std::size_t n = 0; n < c.count; ++n) {
      for (std::size_t j = 0; j < dim; ++j) row[j] = c.mean[j] + c.sigma * normal(rng);
      out.append(row, static_cast<int>(k));
    }
  }
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> shuffled_pools(const Dataset& data, Rng& rng) {
  const auto counts = data.class_counts();
  std::vector<std::vector<std::size_t>> pools(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) pools[k].reserve(counts[k]);
  for (std::size_t i = 0; i < data.size(); ++i)
    pools[static_cast<std::size_t>(data.label(i))].push_back(i);
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);
  return pools;
}

PartyData materialize(const Dataset& data, std::vector<std::size_t> learner,
                      std::vector<std::size_t> provider) {
  std::sort(learner.begin(), learner.end());
  std::sort(provider.begin(), provider.end());
  return {data.subset(learner), data.subset(provider)};
}

// Index of the class with the most records left after `taken`, ties to the
// smallest index; skips `excluded`.
std::size_t largest_remaining(const std::vector<std::size_t>& available,
                              const std::vector<std::size_t>& taken, std::size_t excluded) {
  std::size_t best = available.size();
  for (std::size_t k = 0; k < available.size(); ++k) {
    if (k == excluded) continue;
    if (best == available.size() || available[k] - taken[k] > available[best] - taken[best])
      best = k;
  }
  return best;
}

}  // namespace

PartyData split_by_class_fraction(const Dataset& data,
                                  const std::map<int, double>& learner_fraction,
                                  std::uint64_t seed) {
  for (const auto& [cls, frac] : learner_fraction)
    if (!(frac >= 0.0 && frac <= 1.0))
      throw InvalidArgument("class fraction for class " + std::to_string(cls) +
                            " must lie in [0, 1]");
  Rng rng(derive_seed(seed, {stream::kData}));
  auto pools = shuffled_pools(data, rng);
  std::vector<std::size_t> learner, provider;
  for (std::size_t k = 0; k < pools.size(); ++k) {
    const auto it = learner_fraction.find(static_cast<int>(k));
    const double frac = it == learner_fraction.end() ? 0.0 : it->second;
    const std::size_t take =
        std::min(pools[k].size(), round_half_up(frac * static_cast<double>(pools[k].size())));
    learner.insert(learner.end(), pools[k].begin(), pools[k].begin() + static_cast<std::ptrdiff_t>(take));
    provider.insert(provider.end(), pools[k].begin() + static_cast<std::ptrdiff_t>(take), pools[k].end());
  }
  return materialize(data, std::move(learner), std::move(provider));
}

PartyData partition(const Dataset& data, const PartitionSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, {stream::kData}));
  auto pools = shuffled_pools(data, rng);
  const std::size_t num_classes = pools.size();
  if (num_classes < 2) throw InvalidArgument("partition needs at least two classes");
  const auto primary = static_cast<std::size_t>(spec.primary_class);
  if (primary >= num_classes) throw InvalidArgument("primary_class not present in data");

  const std::size_t n = data.size();
  const std::size_t n_learner =
      std::min(n, round_half_up(static_cast<double>(n) * spec.rho / (1.0 + spec.rho)));
  const std::size_t n_provider = n - n_learner;

  std::vector<std::size_t> available(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) available[k] = pools[k].size();

  // Learner: primary share, then an even split over the other classes.
  std::vector<std::size_t> learner_take(num_classes, 0);
  learner_take[primary] = std::min(n_learner, round_half_up(spec.gamma_l * static_cast<double>(n_learner)));
  const std::size_t rest = n_learner - learner_take[primary];
  const std::size_t others = num_classes - 1;
  for (std::size_t k = 0; k < num_classes; ++k)
    if (k != primary) learner_take[k] = rest / others;
  for (std::size_t r = 0; r < rest % others; ++r)
    ++learner_take[largest_remaining(available, learner_take, primary)];
  for (std::size_t k = 0; k < num_classes; ++k)
    if (learner_take[k] > available[k])
      throw InvalidArgument("learner needs " + std::to_string(learner_take[k]) +
                            " records of class " + std::to_string(k) + " but only " +
                            std::to_string(available[k]) + " exist");

  // Provider: balanced quota from the remaining pool; any class that runs dry
  // hands its shortfall to the largest remaining class.
  std::vector<std::size_t> used = learner_take;
  std::vector<std::size_t> provider_take(num_classes, n_provider / num_classes);
  for (std::size_t k = 0; k < n_provider % num_classes; ++k) ++provider_take[k];
  std::size_t shortfall = 0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    const std::size_t left = available[k] - used[k];
    if (provider_take[k] > left) {
      shortfall += provider_take[k] - left;
      provider_take[k] = left;
    }
    used[k] += provider_take[k];
  }
  while (shortfall > 0) {
    const std::size_t k = largest_remaining(available, used, num_classes);
    if (available[k] == used[k])
      throw InvalidArgument("not enough records to fill the provider's share");
    ++provider_take[k];
    ++used[k];
    --shortfall;
  }

  std::vector<std::size_t> learner, provider;
  for (std::size_t k = 0; k < num_classes; ++k) {
    auto first = pools[k].begin();
    auto mid = first + static_cast<std::ptrdiff_t>(learner_take[k]);
    auto last = mid + static_cast<std::ptrdiff_t>(provider_take[k]);
    learner.insert(learner.end(), first, mid);
    provider.insert(provider.end(), mid, last);
  }
  return materialize(data, std::move(learner), std::move(provider));
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_fields(line);
  for (auto& h : header) h = trim(h);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end())
    throw InvalidArgument(path.string() + ": missing `label` column");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  Dataset out(header.size() - 1);
  std::vector<double> row;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw InvalidArgument(path.string() + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    row.clear();
    int label = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string cell = trim(fields[c]);
      std::size_t consumed = 0;
      bool ok = !cell.empty();
      try {
        if (c == label_col) {
          const long v = std::stol(cell, &consumed);
          ok = ok && consumed == cell.size() && v >= 0;
          label = static_cast<int>(v);
        } else {
          const double v = std::stod(cell, &consumed);
          ok = ok && consumed == cell.size() && std::isfinite(v);
          row.push_back(v);
        }
      } catch (const std::exception&) {
        ok = false;
      }
      if (!ok)
        throw InvalidArgument(path.string() + ": cannot parse row " + std::to_string(line_no) +
                              ", column \"" + header[c] + "\": '" + cell + "'");
    }
    out.append(row, label);
  }
  return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
  out << "label\n";
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << v << ',';
    out << data.label(i) << '\n';
  }
}

}  // namespace assist
