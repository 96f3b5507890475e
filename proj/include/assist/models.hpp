#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace assist {

// Model parameters theta. Layout for dense models is, per layer, the weight
// matrix (out x in, row-major) followed by the bias vector.
using ParamVector = std::vector<double>;

enum class ModelKind { kQuadratic, kLogistic, kMlp };

struct ModelSpec {
  ModelKind kind = ModelKind::kLogistic;
  std::size_t input_dim = 0;
  std::size_t num_classes = 2;
  std::vector<std::size_t> hidden_sizes;  // mlp only
  // Quadratic objective: weight/2 * ||theta - center||^2 + offset. A single
  // party uses weight 1 and offset 0; merging two parties keeps the sum exact.
  ParamVector quadratic_center;
  double quadratic_weight = 1.0;
  double quadratic_offset = 0.0;

  static ModelSpec quadratic(ParamVector center);
  static ModelSpec logistic(std::size_t input_dim, std::size_t num_classes);
  static ModelSpec mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                       std::size_t num_classes);

  bool is_classifier() const { return kind != ModelKind::kQuadratic; }
  std::size_t param_count() const;
  // Layer widths from input to output (dense kinds only).
  std::vector<std::size_t> layer_sizes() const;
  // Throws InvalidArgument when fields are inconsistent.
  void validate() const;
};

// n x d feature matrix (row-major) with integer class labels.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t dim) : dim_(dim) {}
  Dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& features() const { return features_; }

  void append(std::span<const double> row, int label);
  Dataset subset(std::span<const std::size_t> indices) const;
  // Number of records per class, sized to max(num_classes, max label + 1).
  std::vector<std::size_t> class_counts(std::size_t num_classes = 0) const;

  static Dataset concat(const Dataset& a, const Dataset& b);

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

// kSum makes f(theta; A u B) = f(theta; A) + f(theta; B) exact; kMean is the
// per-record average used for reporting and as the SGD step direction.
enum class Aggregation { kMean, kSum };

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

double loss(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
            Aggregation aggregation = Aggregation::kMean);

ParamVector gradient(const ModelSpec& spec, std::span<const double> params,
                     const Dataset& data, Aggregation aggregation = Aggregation::kMean);

// Mean gradient over the listed records. Quadratic kinds ignore the indices.
ParamVector batch_gradient(const ModelSpec& spec, std::span<const double> params,
                           const Dataset& data, std::span<const std::size_t> indices);

// Sum over records of weight_i * grad_theta log softmax(x_i)[label_i], the
// weighted score function used by the policy-gradient estimator.
ParamVector weighted_log_prob_gradient(const ModelSpec& spec,
                                       std::span<const double> params,
                                       const Dataset& records,
                                       std::span<const double> weights);

// Raw class scores (logits) for one input.
std::vector<double> class_scores(const ModelSpec& spec, std::span<const double> params,
                                 std::span<const double> input);

// Softmax probabilities for one input.
std::vector<double> class_probabilities(const ModelSpec& spec,
                                        std::span<const double> params,
                                        std::span<const double> input);

// Argmax class, ties toward the smallest index.
int predict(const ModelSpec& spec, std::span<const double> params,
            std::span<const double> input);

double accuracy(const ModelSpec& spec, std::span<const double> params, const Dataset& data);

}  // namespace assist
