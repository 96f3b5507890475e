#include "assist/assist.h"

#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "assist/config.hpp"
#include "assist/errors.hpp"
#include "assist/harness.hpp"
#include "assist/models.hpp"
#include "assist/privacy.hpp"

struct assist_config {
  assist::KeyValueConfig kv;
};

struct assist_result {
  std::vector<std::string> files;
  std::string summary;
};

struct assist_model {
  assist::ModelSpec spec;
};

namespace {

thread_local std::string g_last_error;

assist_status fail(assist_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps the library's exception types onto status codes.
template <typename Fn>
assist_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const assist::ConfigError& e) {
    return fail(ASSIST_ERR_CONFIG, e.what());
  } catch (const assist::DivergenceError& e) {
    return fail(ASSIST_ERR_DIVERGENCE, e.what());
  } catch (const assist::IoError& e) {
    return fail(ASSIST_ERR_IO, e.what());
  } catch (const assist::InvalidArgument& e) {
    return fail(ASSIST_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ASSIST_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ASSIST_ERR_INTERNAL, "unknown error");
  }
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  if (!text) return out;
  std::string item;
  for (const char* p = text;; ++p) {
    if (*p == ',' || *p == '\0') {
      if (!item.empty()) out.push_back(item);
      item.clear();
      if (*p == '\0') break;
    } else if (*p != ' ') {
      item += *p;
    }
  }
  return out;
}

assist::Dataset make_dataset(const assist_model* model, const double* features,
                             const int* labels, std::size_t n) {
  const std::size_t d = model->spec.input_dim;
  if (n > 0 && (!features || !labels)) throw assist::InvalidArgument("null data pointer");
  return assist::Dataset(d, std::vector<double>(features, features + n * d),
                         std::vector<int>(labels, labels + n));
}

}  // namespace

extern "C" {

const char* assist_last_error(void) { return g_last_error.c_str(); }

const char* assist_version(void) { return "1.0.0"; }

assist_status assist_config_load(const char* path, assist_config** out) {
  return guarded([&] {
    if (!path || !out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null argument");
    *out = new assist_config{assist::KeyValueConfig::load(path)};
    return ASSIST_OK;
  });
}

assist_status assist_config_parse(const char* text, assist_config** out) {
  return guarded([&] {
    if (!text || !out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null argument");
    *out = new assist_config{assist::KeyValueConfig::parse(text)};
    return ASSIST_OK;
  });
}

assist_status assist_config_set(assist_config* config, const char* key, const char* value) {
  return guarded([&] {
    if (!config || !key || !value) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null argument");
    config->kv.set(key, value);
    return ASSIST_OK;
  });
}

assist_status assist_config_validate(const assist_config* config) {
  return guarded([&] {
    if (!config) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null config");
    assist::RunConfig::from(config->kv);
    return ASSIST_OK;
  });
}

void assist_config_destroy(assist_config* config) { delete config; }

assist_status assist_run(const assist_config* config, const char* experiment,
                         assist_result** out) {
  return guarded([&] {
    if (!config || !out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    assist::KeyValueConfig kv = config->kv;
    if (experiment) {
      if (!assist::parse_experiment_kind(experiment))
        throw assist::ConfigError("experiment", std::string("unknown experiment '") + experiment + "'");
      if (auto existing = kv.get("experiment"); existing && *existing != experiment)
        throw assist::ConfigError("experiment", "config declares '" + *existing +
                                                    "' but '" + experiment + "' was requested");
      kv.set("experiment", experiment);
    }
    const auto run_config = assist::RunConfig::from(kv);
    const auto result = assist::run_experiment(run_config);
    auto* handle = new assist_result;
    for (const auto& f : result.files) handle->files.push_back(f.string());
    handle->summary = result.summary;
    *out = handle;
    if (result.verification_failed)
      return fail(ASSIST_ERR_VERIFICATION, "verification failed:\n" + result.summary);
    return ASSIST_OK;
  });
}

assist_status assist_plot(const char* metrics_csv, const char* out_dir, const char* metrics,
                          assist_result** out) {
  return guarded([&] {
    if (!metrics_csv || !out_dir || !out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null argument");
    assist::PlotSpec spec{out_dir, split_list(metrics)};
    const auto files = assist::emit_plot(metrics_csv, spec);
    auto* handle = new assist_result;
    for (const auto& f : files) handle->files.push_back(f.string());
    *out = handle;
    return ASSIST_OK;
  });
}

size_t assist_result_file_count(const assist_result* result) {
  return result ? result->files.size() : 0;
}

const char* assist_result_file(const assist_result* result, size_t index) {
  if (!result || index >= result->files.size()) return nullptr;
  return result->files[index].c_str();
}

const char* assist_result_summary(const assist_result* result) {
  return result ? result->summary.c_str() : "";
}

void assist_result_destroy(assist_result* result) { delete result; }

assist_status assist_model_create(assist_model_kind kind, size_t input_dim, size_t num_classes,
                                  const size_t* hidden, size_t num_hidden, const double* center,
                                  assist_model** out) {
  return guarded([&] {
    if (!out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null output handle");
    assist::ModelSpec spec;
    switch (kind) {
      case ASSIST_MODEL_QUADRATIC:
        if (!center) return fail(ASSIST_ERR_INVALID_ARGUMENT, "quadratic model needs a center");
        spec = assist::ModelSpec::quadratic({center, center + input_dim});
        break;
      case ASSIST_MODEL_LOGISTIC:
        spec = assist::ModelSpec::logistic(input_dim, num_classes);
        break;
      case ASSIST_MODEL_MLP:
        if (num_hidden > 0 && !hidden) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null hidden sizes");
        spec = assist::ModelSpec::mlp(input_dim, {hidden, hidden + num_hidden}, num_classes);
        break;
      default:
        return fail(ASSIST_ERR_INVALID_ARGUMENT, "unknown model kind");
    }
    spec.validate();
    *out = new assist_model{std::move(spec)};
    return ASSIST_OK;
  });
}

size_t assist_model_param_count(const assist_model* model) {
  return model ? model->spec.param_count() : 0;
}

assist_status assist_model_init(const assist_model* model, uint64_t seed, double* params,
                                size_t num_params) {
  return guarded([&] {
    if (!model || !params) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null argument");
    if (num_params != model->spec.param_count())
      return fail(ASSIST_ERR_INVALID_ARGUMENT, "parameter buffer has the wrong length");
    const auto init = assist::init_params(model->spec, seed);
    std::memcpy(params, init.data(), init.size() * sizeof(double));
    return ASSIST_OK;
  });
}

assist_status assist_model_loss(const assist_model* model, const double* params,
                                size_t num_params, const double* features, const int* labels,
                                size_t n, int sum, double* out) {
  return guarded([&] {
    if (!model || !params || !out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null argument");
    const auto data = make_dataset(model, features, labels, n);
    *out = assist::loss(model->spec, {params, num_params}, data,
                        sum ? assist::Aggregation::kSum : assist::Aggregation::kMean);
    return ASSIST_OK;
  });
}

assist_status assist_model_gradient(const assist_model* model, const double* params,
                                    size_t num_params, const double* features,
                                    const int* labels, size_t n, int sum, double* grad_out) {
  return guarded([&] {
    if (!model || !params || !grad_out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null argument");
    const auto data = make_dataset(model, features, labels, n);
    const auto grad = assist::gradient(model->spec, {params, num_params}, data,
                                       sum ? assist::Aggregation::kSum : assist::Aggregation::kMean);
    std::memcpy(grad_out, grad.data(), grad.size() * sizeof(double));
    return ASSIST_OK;
  });
}

void assist_model_destroy(assist_model* model) { delete model; }

assist_status assist_theorem_eta(double rounds, double lipschitz, double local_iters,
                                 double grad_bound, double delta0, double* out) {
  return guarded([&] {
    if (!out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null output");
    *out = assist::theorem_eta(rounds, lipschitz, local_iters, grad_bound, delta0);
    return ASSIST_OK;
  });
}

assist_status assist_theorem_bound(double rounds, double lipschitz, double local_iters,
                                   double grad_bound, double delta0, double* out) {
  return guarded([&] {
    if (!out) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null output");
    *out = assist::theorem_bound(rounds, lipschitz, local_iters, grad_bound, delta0);
    return ASSIST_OK;
  });
}

assist_status assist_dp_compose(double epsilon, double delta, int64_t steps,
                                double batch_fraction, double* eps_prime, double* delta_prime) {
  return guarded([&] {
    if (!eps_prime || !delta_prime) return fail(ASSIST_ERR_INVALID_ARGUMENT, "null output");
    const auto c = assist::compose({epsilon, delta, 1.0}, steps, batch_fraction);
    *eps_prime = c.eps_prime;
    *delta_prime = c.delta_prime;
    return ASSIST_OK;
  });
}

}  // extern "C"
