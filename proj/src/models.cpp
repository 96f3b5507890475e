#include "assist/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "assist/errors.hpp"
#include "assist/rng.hpp"

namespace assist {

ModelSpec ModelSpec::quadratic(ParamVector center) {
  ModelSpec spec;
  spec.kind = ModelKind::kQuadratic;
  spec.input_dim = center.size();
  spec.num_classes = 0;
  spec.quadratic_center = std::move(center);
  return spec;
}

ModelSpec ModelSpec::logistic(std::size_t input_dim, std::size_t num_classes) {
  ModelSpec spec;
  spec.kind = ModelKind::kLogistic;
  spec.input_dim = input_dim;
  spec.num_classes = num_classes;
  return spec;
}

ModelSpec ModelSpec::mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                         std::size_t num_classes) {
  ModelSpec spec;
  spec.kind = ModelKind::kMlp;
  spec.input_dim = input_dim;
  spec.hidden_sizes = std::move(hidden);
  spec.num_classes = num_classes;
  return spec;
}

std::vector<std::size_t> ModelSpec::layer_sizes() const {
  std::vector<std::size_t> sizes{input_dim};
  if (kind == ModelKind::kMlp) sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes.push_back(num_classes);
  return sizes;
}

std::size_t ModelSpec::param_count() const {
  if (kind == ModelKind::kQuadratic) return input_dim;
  const auto sizes = layer_sizes();
  std::size_t count = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) count += sizes[l] * sizes[l - 1] + sizes[l];
  return count;
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw InvalidArgument("model input_dim must be positive");
  switch (kind) {
    case ModelKind::kQuadratic:
      if (quadratic_center.size() != input_dim)
        throw InvalidArgument("quadratic_center length must equal input_dim");
      if (!(quadratic_weight > 0.0)) throw InvalidArgument("quadratic_weight must be positive");
      return;
    case ModelKind::kMlp:
      for (std::size_t h : hidden_sizes)
        if (h == 0) throw InvalidArgument("hidden layer sizes must be positive");
      [[fallthrough]];
    case ModelKind::kLogistic:
      if (num_classes == 0) throw InvalidArgument("num_classes must be positive");
      return;
  }
}

Dataset::Dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels)
    : dim_(dim), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.size() != labels_.size() * dim_)
    throw InvalidArgument("feature matrix size does not match labels x dim");
}

void Dataset::append(std::span<const double> row, int label) {
  if (row.size() != dim_) throw InvalidArgument("row width does not match dataset dim");
  features_.insert(features_.end(), row.begin(), row.end());
  labels_.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out(dim_);
  out.features_.reserve(indices.size() * dim_);
  out.labels_.reserve(indices.size());
  for (std::size_t i : indices) out.append(row(i), labels_[i]);
  return out;
}

std::vector<std::size_t> Dataset::class_counts(std::size_t num_classes) const {
  std::size_t k = num_classes;
  for (int y : labels_) k = std::max<std::size_t>(k, static_cast<std::size_t>(y) + 1);
  std::vector<std::size_t> counts(k, 0);
  for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.dim_ != b.dim_) throw InvalidArgument("cannot concatenate datasets of different dim");
  Dataset out = a;
  out.features_.insert(out.features_.end(), b.features_.begin(), b.features_.end());
  out.labels_.insert(out.labels_.end(), b.labels_.begin(), b.labels_.end());
  return out;
}

namespace {

void check_params(const ModelSpec& spec, std::span<const double> params) {
  if (params.size() != spec.param_count())
    throw InvalidArgument("parameter length " + std::to_string(params.size()) +
                          " does not match model (" + std::to_string(spec.param_count()) + ")");
}

void check_data(const ModelSpec& spec, const Dataset& data) {
  if (data.empty()) throw InvalidArgument("empty dataset for a classification model");
  if (data.dim() != spec.input_dim)
    throw InvalidArgument("dataset dim " + std::to_string(data.dim()) +
                          " does not match model input_dim " + std::to_string(spec.input_dim));
  for (int y : data.labels())
    if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes)
      throw InvalidArgument("label " + std::to_string(y) + " out of range");
}

double quadratic_loss(const ModelSpec& spec, std::span<const double> params) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double d = params[i] - spec.quadratic_center[i];
    sq += d * d;
  }
  return 0.5 * spec.quadratic_weight * sq + spec.quadratic_offset;
}

ParamVector quadratic_gradient(const ModelSpec& spec, std::span<const double> params) {
  ParamVector g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    g[i] = spec.quadratic_weight * (params[i] - spec.quadratic_center[i]);
  return g;
}

// Forward/backward pass over a dense tanh network with a softmax head.
class DenseNet {
 public:
  DenseNet(const ModelSpec& spec, std::span<const double> params)
      : sizes_(spec.layer_sizes()), params_(params) {
    offsets_.reserve(sizes_.size());
    std::size_t off = 0;
    for (std::size_t l = 1; l < sizes_.size(); ++l) {
      offsets_.push_back(off);
      off += sizes_[l] * sizes_[l - 1] + sizes_[l];
    }
    activations_.resize(sizes_.size());
    for (std::size_t l = 0; l < sizes_.size(); ++l) activations_[l].resize(sizes_[l]);
    delta_.resize(*std::max_element(sizes_.begin(), sizes_.end()));
    next_delta_.resize(delta_.size());
  }

  // Fills activations; the last layer holds logits.
  const std::vector<double>& forward(std::span<const double> input) {
    std::copy(input.begin(), input.end(), activations_[0].begin());
    const std::size_t layers = sizes_.size() - 1;
    for (std::size_t l = 1; l <= layers; ++l) {
      const std::size_t in = sizes_[l - 1], out = sizes_[l];
      const double* w = params_.data() + offsets_[l - 1];
      const double* b = w + out * in;
      const auto& prev = activations_[l - 1];
      auto& cur = activations_[l];
      for (std::size_t j = 0; j < out; ++j) {
        double z = b[j];
        const double* wj = w + j * in;
        for (std::size_t i = 0; i < in; ++i) z += wj[i] * prev[i];
        cur[j] = (l == layers) ? z : std::tanh(z);
      }
    }
    return activations_.back();
  }

  // Cross-entropy of the last forward pass; leaves softmax - onehot in delta_.
  double cross_entropy(int label) {
    const auto& logits = activations_.back();
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - max_logit);
    const double lse = max_logit + std::log(denom);
    for (std::size_t k = 0; k < logits.size(); ++k) delta_[k] = std::exp(logits[k] - lse);
    delta_[static_cast<std::size_t>(label)] -= 1.0;
    return lse - logits[static_cast<std::size_t>(label)];
  }

  // Accumulates weight * d(cross_entropy)/d(theta) into grad.
  void backward(double weight, std::span<double> grad) {
    for (std::size_t l = sizes_.size() - 1; l >= 1; --l) {
      const std::size_t in = sizes_[l - 1], out = sizes_[l];
      const double* w = params_.data() + offsets_[l - 1];
      double* gw = grad.data() + offsets_[l - 1];
      double* gb = gw + out * in;
      const auto& prev = activations_[l - 1];
      for (std::size_t j = 0; j < out; ++j) {
        const double d = weight * delta_[j];
        double* gwj = gw + j * in;
        for (std::size_t i = 0; i < in; ++i) gwj[i] += d * prev[i];
        gb[j] += d;
      }
      if (l == 1) break;
      for (std::size_t i = 0; i < in; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < out; ++j) s += w[j * in + i] * delta_[j];
        next_delta_[i] = s * (1.0 - prev[i] * prev[i]);
      }
      std::copy(next_delta_.begin(), next_delta_.begin() + static_cast<std::ptrdiff_t>(in),
                delta_.begin());
    }
  }

 private:
  std::vector<std::size_t> sizes_;
  std::span<const double> params_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<double>> activations_;
  std::vector<double> delta_;
  std::vector<double> next_delta_;
};

template <typename IndexRange>
double accumulate(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
                  const IndexRange& indices, double weight, ParamVector* grad) {
  DenseNet net(spec, params);
  double total = 0.0;
  for (std::size_t i : indices) {
    net.forward(data.row(i));
    total += net.cross_entropy(data.label(i));
    if (grad) net.backward(weight, *grad);
  }
  return total;
}

struct AllRecords {
  std::size_t n;
  struct Iter {
    std::size_t i;
    std::size_t operator*() const { return i; }
    Iter& operator++() { ++i; return *this; }
    bool operator!=(const Iter& o) const { return i != o.i; }
  };
  Iter begin() const { return {0}; }
  Iter end() const { return {n}; }
};

}  // namespace

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector params(spec.param_count(), 0.0);
  if (spec.kind != ModelKind::kMlp) return params;
  Rng rng(derive_seed(seed, {stream::kInit}));
  const auto sizes = spec.layer_sizes();
  std::size_t off = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    const std::size_t in = sizes[l - 1], out = sizes[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t k = 0; k < in * out; ++k) params[off + k] = dist(rng);
    off += in * out + out;
  }
  return params;
}

double loss(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
            Aggregation aggregation) {
  check_params(spec, params);
  if (spec.kind == ModelKind::kQuadratic) return quadratic_loss(spec, params);
  check_data(spec, data);
  const double total = accumulate(spec, params, data, AllRecords{data.size()}, 0.0, nullptr);
  return aggregation == Aggregation::kSum ? total : total / static_cast<double>(data.size());
}

ParamVector gradient(const ModelSpec& spec, std::span<const double> params,
                     const Dataset& data, Aggregation aggregation) {
  check_params(spec, params);
  if (spec.kind == ModelKind::kQuadratic) return quadratic_gradient(spec, params);
  check_data(spec, data);
  const double w = aggregation == Aggregation::kSum ? 1.0 : 1.0 / static_cast<double>(data.size());
  ParamVector grad(params.size(), 0.0);
  accumulate(spec, params, data, AllRecords{data.size()}, w, &grad);
  return grad;
}

ParamVector batch_gradient(const ModelSpec& spec, std::span<const double> params,
                           const Dataset& data, std::span<const std::size_t> indices) {
  check_params(spec, params);
  if (spec.kind == ModelKind::kQuadratic) return quadratic_gradient(spec, params);
  if (indices.empty()) throw InvalidArgument("empty mini-batch");
  check_data(spec, data);
  ParamVector grad(params.size(), 0.0);
  accumulate(spec, params, data, indices, 1.0 / static_cast<double>(indices.size()), &grad);
  return grad;
}

ParamVector weighted_log_prob_gradient(const ModelSpec& spec, std::span<const double> params,
                                       const Dataset& records,
                                       std::span<const double> weights) {
  check_params(spec, params);
  if (!spec.is_classifier()) throw InvalidArgument("log-probabilities need a classifier");
  if (weights.size() != records.size())
    throw InvalidArgument("one weight per record required");
  ParamVector grad(params.size(), 0.0);
  if (records.empty()) return grad;
  check_data(spec, records);
  DenseNet net(spec, params);
  for (std::size_t i = 0; i < records.size(); ++i) {
    net.forward(records.row(i));
    net.cross_entropy(records.label(i));
    // grad log pi = -grad cross-entropy
    net.backward(-weights[i], grad);
  }
  return grad;
}

std::vector<double> class_scores(const ModelSpec& spec, std::span<const double> params,
                                 std::span<const double> input) {
  check_params(spec, params);
  if (!spec.is_classifier()) throw InvalidArgument("class scores need a classifier");
  if (input.size() != spec.input_dim) throw InvalidArgument("input width mismatch");
  DenseNet net(spec, params);
  return net.forward(input);
}

std::vector<double> class_probabilities(const ModelSpec& spec, std::span<const double> params,
                                        std::span<const double> input) {
  auto p = class_scores(spec, params, input);
  const double m = *std::max_element(p.begin(), p.end());
  double denom = 0.0;
  for (double& z : p) denom += (z = std::exp(z - m));
  for (double& z : p) z /= denom;
  return p;
}

int predict(const ModelSpec& spec, std::span<const double> params,
            std::span<const double> input) {
  const auto scores = class_scores(spec, params, input);
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

double accuracy(const ModelSpec& spec, std::span<const double> params, const Dataset& data) {
  if (!spec.is_classifier()) throw InvalidArgument("accuracy is undefined for quadratic models");
  check_params(spec, params);
  check_data(spec, data);
  DenseNet net(spec, params);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& logits = net.forward(data.row(i));
    const auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
    if (best == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace assist
