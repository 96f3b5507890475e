#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "assist/assist.h"

namespace {

namespace fs = std::filesystem;

TEST(CApi, VersionAndNullArguments) {
  EXPECT_STREQ(assist_version(), "1.0.0");
  EXPECT_EQ(assist_config_parse(nullptr, nullptr), ASSIST_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(assist_last_error()), "");
  EXPECT_EQ(assist_result_file_count(nullptr), 0u);
  EXPECT_EQ(assist_result_file(nullptr, 0), nullptr);
  assist_config_destroy(nullptr);
  assist_result_destroy(nullptr);
  assist_model_destroy(nullptr);
}

TEST(CApi, ConfigErrors) {
  assist_config* cfg = nullptr;
  EXPECT_EQ(assist_config_parse("experiment = dl\nbogus.key = 1\n", &cfg), ASSIST_ERR_CONFIG);
  EXPECT_NE(std::string(assist_last_error()).find("bogus.key"), std::string::npos);
  ASSERT_EQ(assist_config_parse("experiment = dl\n", &cfg), ASSIST_OK);
  EXPECT_EQ(assist_config_set(cfg, "nope", "1"), ASSIST_ERR_CONFIG);
  ASSERT_EQ(assist_config_set(cfg, "run.algorithms", "assist,magic"), ASSIST_OK);
  EXPECT_EQ(assist_config_validate(cfg), ASSIST_ERR_CONFIG);
  EXPECT_NE(std::string(assist_last_error()).find("run.algorithms"), std::string::npos);
  ASSERT_EQ(assist_config_set(cfg, "run.algorithms", "assist"), ASSIST_OK);
  EXPECT_EQ(assist_config_validate(cfg), ASSIST_OK);
  assist_result* res = nullptr;
  EXPECT_EQ(assist_run(cfg, "rl", &res), ASSIST_ERR_CONFIG);
  EXPECT_EQ(assist_run(cfg, "xx", &res), ASSIST_ERR_CONFIG);
  EXPECT_EQ(res, nullptr);
  assist_config_destroy(cfg);
  EXPECT_EQ(assist_config_load("/nonexistent/assist.conf", &cfg), ASSIST_ERR_CONFIG);
}

TEST(CApi, RunAndPlot) {
  const fs::path dir = fs::temp_directory_path() / "assist_capi_run";
  fs::remove_all(dir);
  assist_config* cfg = nullptr;
  ASSERT_EQ(assist_config_parse("experiment = dl\nrun.seeds = 1,2\nassist.rounds = 2\n"
                                "assist.local_iters = 5\ndata.test_per_class = 20\n",
                                &cfg),
            ASSIST_OK);
  ASSERT_EQ(assist_config_set(cfg, "output.dir", dir.c_str()), ASSIST_OK);
  assist_result* res = nullptr;
  ASSERT_EQ(assist_run(cfg, "dl", &res), ASSIST_OK) << assist_last_error();
  ASSERT_EQ(assist_result_file_count(res), 1u);
  const std::string metrics = assist_result_file(res, 0);
  EXPECT_TRUE(fs::exists(metrics));
  EXPECT_NE(std::string(assist_result_summary(res)).find("assist"), std::string::npos);
  assist_result_destroy(res);

  ASSERT_EQ(assist_plot(metrics.c_str(), (dir / "plots").c_str(), "test_metric_1", &res), ASSIST_OK);
  ASSERT_EQ(assist_result_file_count(res), 1u);
  EXPECT_TRUE(fs::exists(assist_result_file(res, 0)));
  assist_result_destroy(res);
  EXPECT_EQ(assist_plot(metrics.c_str(), dir.c_str(), "nope", &res), ASSIST_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(assist_plot("/nonexistent.csv", dir.c_str(), nullptr, &res), ASSIST_ERR_IO);
  assist_config_destroy(cfg);
  fs::remove_all(dir);
}

TEST(CApi, ModelKernel) {
  assist_model* m = nullptr;
  ASSERT_EQ(assist_model_create(ASSIST_MODEL_LOGISTIC, 1, 2, nullptr, 0, nullptr, &m), ASSIST_OK);
  ASSERT_EQ(assist_model_param_count(m), 4u);
  std::vector<double> p(4, 1.0);
  ASSERT_EQ(assist_model_init(m, 7, p.data(), p.size()), ASSIST_OK);
  for (double v : p) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(assist_model_init(m, 7, p.data(), 3), ASSIST_ERR_INVALID_ARGUMENT);

  const double x[] = {2.0};
  const int y[] = {1};
  p = {0.0, 1.0, 0.0, 0.0};
  double value = 0.0;
  ASSERT_EQ(assist_model_loss(m, p.data(), p.size(), x, y, 1, 0, &value), ASSIST_OK);
  EXPECT_NEAR(value, std::log1p(std::exp(-2.0)), 1e-15);
  std::vector<double> g(4);
  ASSERT_EQ(assist_model_gradient(m, p.data(), p.size(), x, y, 1, 1, g.data()), ASSIST_OK);
  const double p1 = 1.0 / (1.0 + std::exp(-2.0));
  EXPECT_NEAR(g[1], (p1 - 1.0) * 2.0, 1e-15);
  EXPECT_EQ(assist_model_loss(m, p.data(), p.size(), nullptr, nullptr, 0, 0, &value),
            ASSIST_ERR_INVALID_ARGUMENT);
  assist_model_destroy(m);

  const double center[] = {1.0, -1.25};
  ASSERT_EQ(assist_model_create(ASSIST_MODEL_QUADRATIC, 2, 0, nullptr, 0, center, &m), ASSIST_OK);
  const double theta[] = {0.0, 0.0};
  ASSERT_EQ(assist_model_gradient(m, theta, 2, nullptr, nullptr, 0, 0, g.data()), ASSIST_OK);
  EXPECT_EQ(g[0], -1.0);
  EXPECT_EQ(g[1], 1.25);
  assist_model_destroy(m);

  const size_t hidden[] = {4};
  ASSERT_EQ(assist_model_create(ASSIST_MODEL_MLP, 4, 2, hidden, 1, nullptr, &m), ASSIST_OK);
  EXPECT_EQ(assist_model_param_count(m), 30u);
  assist_model_destroy(m);
  EXPECT_EQ(assist_model_create(static_cast<assist_model_kind>(9), 1, 2, nullptr, 0, nullptr, &m),
            ASSIST_ERR_INVALID_ARGUMENT);
}

TEST(CApi, Scalars) {
  double v = 0.0, d = 0.0;
  ASSERT_EQ(assist_theorem_eta(1, 1, 1, 1, 1, &v), ASSIST_OK);
  EXPECT_NEAR(v, 1.0 / std::sqrt(3.0), 1e-15);
  ASSERT_EQ(assist_theorem_bound(12, 1, 1, 1, 1, &v), ASSIST_OK);
  EXPECT_NEAR(v, 1.0, 1e-15);
  EXPECT_EQ(assist_theorem_bound(0, 1, 1, 1, 1, &v), ASSIST_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(assist_dp_compose(1.0, 1e-5, 2000, 0.05, &v, &d), ASSIST_OK);
  EXPECT_NEAR(v, 0.1 * std::sqrt(2000.0 * std::log(1e5)), 1e-9);
  EXPECT_NEAR(d, 1e-3, 1e-15);
  EXPECT_EQ(assist_dp_compose(1.0, 2.0, 10, 0.1, &v, &d), ASSIST_ERR_INVALID_ARGUMENT);
}

}  // namespace
