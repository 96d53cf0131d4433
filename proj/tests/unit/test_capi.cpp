#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "yyfilter/yyfilter.h"

namespace fs = std::filesystem;

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(yyf_version(), "");
  EXPECT_STREQ(yyf_status_name(YYF_ERR_UNKNOWN_NAME), "unknown name");
}

TEST(CApi, UnknownModelSetsLastError) {
  yyf_model* m = nullptr;
  EXPECT_EQ(yyf_model_builtin("nope", &m), YYF_ERR_UNKNOWN_NAME);
  EXPECT_EQ(m, nullptr);
  EXPECT_NE(std::string(yyf_last_error()).find("linear1d"), std::string::npos);
  ASSERT_EQ(yyf_model_builtin("linear1d", &m), YYF_OK);
  EXPECT_STREQ(yyf_last_error(), "");
  yyf_model_free(m);
}

TEST(CApi, NullArguments) {
  EXPECT_EQ(yyf_model_builtin(nullptr, nullptr), YYF_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(yyf_run_filter(nullptr, nullptr, nullptr, nullptr, 0, 4, nullptr), YYF_ERR_INVALID_ARGUMENT);
  yyf_model_free(nullptr);
  yyf_output_free(nullptr);
}

TEST(CApi, BadGridIsDomainOrArgumentError) {
  yyf_grid* g = nullptr;
  EXPECT_NE(yyf_grid_create(1, 6.0, 240, &g), YYF_OK);
  EXPECT_EQ(g, nullptr);
}

TEST(CApi, FilterAgreesWithKalman) {
  yyf_model* m = nullptr;
  yyf_grid* g = nullptr;
  yyf_paths* p = nullptr;
  yyf_output* yy = nullptr;
  yyf_output* kf = nullptr;
  ASSERT_EQ(yyf_model_builtin("linear1d", &m), YYF_OK);
  ASSERT_EQ(yyf_grid_create(1, 6.0, 241, &g), YYF_OK);
  EXPECT_EQ(yyf_grid_node_count(g), 241u);
  ASSERT_EQ(yyf_simulate(m, 1.0, 100, 1, 3, &p), YYF_OK);
  EXPECT_EQ(yyf_paths_steps(p), 100u);
  double y0 = 1.0;
  ASSERT_EQ(yyf_paths_observation(p, 0, &y0, 1), YYF_OK);
  EXPECT_EQ(y0, 0.0);
  EXPECT_EQ(yyf_paths_observation(p, 101, &y0, 1), YYF_ERR_INVALID_ARGUMENT);
  const char* labels[] = {"x", "x^2"};
  ASSERT_EQ(yyf_run_filter(m, g, p, labels, 2, 4, &yy), YYF_OK);
  ASSERT_EQ(yyf_run_kalman(m, p, labels, 2, &kf), YYF_OK);
  EXPECT_EQ(yyf_output_knots(yy), 101u);
  EXPECT_EQ(yyf_output_functions(yy), 2u);
  EXPECT_LT(yyf_output_max_clamped_mass(yy), 1e-8);
  for (size_t k = 0; k <= 100; ++k) {
    double a = 0, b = 0;
    ASSERT_EQ(yyf_output_estimate(yy, k, 0, &a), YYF_OK);
    ASSERT_EQ(yyf_output_estimate(kf, k, 0, &b), YYF_OK);
    EXPECT_NEAR(a, b, 5e-3);
  }
  const auto file = (fs::temp_directory_path() / "yyf_capi_filter.csv").string();
  ASSERT_EQ(yyf_output_write_csv(yy, file.c_str()), YYF_OK);
  std::ifstream is(file);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("# yyfilter ", 0), 0u);
  fs::remove(file);
  yyf_output_free(yy);
  yyf_output_free(kf);
  yyf_paths_free(p);
  yyf_grid_free(g);
  yyf_model_free(m);
}

TEST(CApi, KalmanRefusesNonlinearModel) {
  yyf_model* m = nullptr;
  yyf_paths* p = nullptr;
  yyf_output* o = nullptr;
  ASSERT_EQ(yyf_model_builtin("benes", &m), YYF_OK);
  ASSERT_EQ(yyf_simulate(m, 1.0, 10, 1, 0, &p), YYF_OK);
  EXPECT_EQ(yyf_run_kalman(m, p, nullptr, 0, &o), YYF_ERR_INVALID_ARGUMENT);
  yyf_paths_free(p);
  yyf_model_free(m);
}

TEST(CApi, ConfigAndCommand) {
  const fs::path out = fs::temp_directory_path() / "yyf_capi_cmd";
  fs::remove_all(out);
  yyf_config* c = nullptr;
  ASSERT_EQ(yyf_config_parse("model=linear1d\nT=1\nK=20\nR=6\nM=121\nseeds=2\n", nullptr, &c), YYF_OK);
  EXPECT_EQ(std::string(yyf_config_hash(c)).size(), 16u);
  ASSERT_EQ(yyf_config_set_seed_base(c, 40), YYF_OK);
  ASSERT_EQ(yyf_command_run(c, "filter", out.string().c_str(), 2), YYF_OK);
  EXPECT_TRUE(fs::exists(out / "filter_seed40.csv"));
  EXPECT_TRUE(fs::exists(out / "filter_seed41.csv"));
  std::ifstream is(out / "filter_seed40.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_NE(line.find(std::string("config=") + yyf_config_hash(c)), std::string::npos);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 1 + 21);
  EXPECT_EQ(yyf_command_run(c, "plot", out.string().c_str(), 1), YYF_ERR_UNKNOWN_NAME);
  yyf_config_free(c);
  fs::remove_all(out);
}

TEST(CApi, ConfigErrors) {
  yyf_config* c = nullptr;
  EXPECT_EQ(yyf_config_parse("model=linear1d\nK=0\n", nullptr, &c), YYF_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(yyf_last_error()).find("K must be"), std::string::npos);
  EXPECT_EQ(yyf_config_load("/nonexistent/config.ini", nullptr, &c), YYF_ERR_IO);
  EXPECT_EQ(yyf_config_parse("[grid\n", nullptr, &c), YYF_ERR_PARSE);
}
