// Command-line driver. Talks to the library only through the C interface.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "assist/assist.h"

namespace {

struct RunOptions {
  std::string config;
  std::string out;
  std::string seeds;
  std::string algorithms;
};

int report(assist_status status, assist_result* result) {
  if (result) {
    for (size_t i = 0; i < assist_result_file_count(result); ++i)
      std::printf("wrote %s\n", assist_result_file(result, i));
    std::fputs(assist_result_summary(result), stdout);
    assist_result_destroy(result);
  }
  if (status != ASSIST_OK) std::fprintf(stderr, "error: %s\n", assist_last_error());
  return static_cast<int>(status);
}

int run(const char* experiment, const RunOptions& opts) {
  assist_config* config = nullptr;
  assist_status status = assist_config_load(opts.config.c_str(), &config);
  if (status != ASSIST_OK) return report(status, nullptr);
  const std::pair<const char*, const std::string*> overrides[] = {
      {"output.dir", &opts.out}, {"run.seeds", &opts.seeds}, {"run.algorithms", &opts.algorithms}};
  for (const auto& [key, value] : overrides) {
    if (value->empty()) continue;
    status = assist_config_set(config, key, value->c_str());
    if (status != ASSIST_OK) {
      assist_config_destroy(config);
      return report(status, nullptr);
    }
  }
  assist_result* result = nullptr;
  status = assist_run(config, experiment, &result);
  assist_config_destroy(config);
  return report(status, result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-party assisted learning experiments"};
  app.require_subcommand(1);

  RunOptions opts;
  for (const char* name : {"dl", "rl", "theory", "dp"}) {
    auto* sub = app.add_subcommand(name, std::string("Run the ") + name + " experiment");
    sub->add_option("--config", opts.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output directory (overrides output.dir)");
    sub->add_option("--seeds", opts.seeds, "Comma-separated seeds (overrides run.seeds)");
    sub->add_option("--algorithms", opts.algorithms,
                    "assist,centralized,learner_only,fedavg or all");
  }

  std::string metrics_csv, plot_out = "plots", plot_metrics;
  auto* plot = app.add_subcommand("plot", "Render metrics CSV curves as SVG");
  plot->add_option("metrics_csv", metrics_csv, "Metrics CSV written by a run")->required();
  plot->add_option("--out", plot_out, "Output directory");
  plot->add_option("--metrics", plot_metrics, "Comma-separated metric columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ASSIST_ERR_CONFIG);
  }

  if (plot->parsed()) {
    assist_result* result = nullptr;
    const assist_status status = assist_plot(metrics_csv.c_str(), plot_out.c_str(),
                                             plot_metrics.empty() ? nullptr : plot_metrics.c_str(),
                                             &result);
    return report(status, result);
  }
  for (auto* sub : app.get_subcommands())
    return run(sub->get_name().c_str(), opts);
  return static_cast<int>(ASSIST_ERR_CONFIG);
}
