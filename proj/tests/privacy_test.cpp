#include <cmath>

#include <gtest/gtest.h>

#include "assist/errors.hpp"
#include "assist/privacy.hpp"

namespace assist {
namespace {

TEST(Privacy, NoiseVariance) {
  EXPECT_NEAR((PrivacySpec{1.0, 1e-5, 1.0}).noise_variance(), 2.0 * std::log(1e5), 1e-12);
  EXPECT_NEAR((PrivacySpec{1.0, 1e-5, 1.0}).noise_variance(), 23.0259, 1e-4);
}

TEST(Privacy, ComposeHandValues) {
  const auto c = compose({1.0, 1e-5, 1.0}, 2000, 0.05);
  EXPECT_NEAR(c.eps_prime, 2.0 * 0.05 * std::sqrt(2000.0 * std::log(1e5)), 1e-9);
  EXPECT_NEAR(c.eps_prime, 15.17, 0.005);
  EXPECT_NEAR(c.delta_prime, 1e-3, 1e-12);
  const auto zero = compose({1.0, 1e-5, 1.0}, 0, 0.05);
  EXPECT_EQ(zero.eps_prime, 0.0);
  EXPECT_EQ(zero.delta_prime, 0.0);
}

TEST(Privacy, ComposeIsLinear) {
  const auto a = compose({1.5, 1e-6, 1.0}, 700, 0.02);
  const auto b = compose({3.0, 1e-6, 1.0}, 700, 0.02);
  const auto c = compose({1.5, 1e-6, 1.0}, 700, 0.04);
  EXPECT_DOUBLE_EQ(b.eps_prime, 2.0 * a.eps_prime);
  EXPECT_DOUBLE_EQ(c.eps_prime, 2.0 * a.eps_prime);
  EXPECT_DOUBLE_EQ(c.delta_prime, 0.04 * 700 * 1e-6);
}

TEST(Privacy, InvalidSpecs) {
  EXPECT_THROW((PrivacySpec{0.0, 1e-5, 1.0}).validate(), InvalidArgument);
  EXPECT_THROW((PrivacySpec{1.0, 1.0, 1.0}).validate(), InvalidArgument);
  EXPECT_THROW((PrivacySpec{1.0, 1e-5, 0.0}).validate(), InvalidArgument);
  EXPECT_THROW(compose({1.0, 1e-5, 1.0}, -1, 0.1), InvalidArgument);
  EXPECT_THROW(compose({1.0, 1e-5, 1.0}, 10, 0.0), InvalidArgument);
}

TEST(Privacy, HugeEpsilonOnlyClips) {
  const PrivacySpec spec{1e6, 1e-5, 1.0};
  Rng rng(1);
  const std::vector<double> g{3.0, 4.0};  // norm 5
  const auto out = dp_perturb(g, spec, rng);
  EXPECT_NEAR(out[0], 0.6, 1e-4);
  EXPECT_NEAR(out[1], 0.8, 1e-4);
}

TEST(Privacy, ClipToExactlyC) {
  // delta close to 1 and large epsilon leave almost no noise.
  const PrivacySpec spec{1e9, 0.5, 2.0};
  Rng rng(1);
  const std::vector<double> g{0.0, 4.0, 0.0};  // norm 2C
  const auto out = dp_perturb(g, spec, rng);
  EXPECT_NEAR(std::hypot(out[0], out[1], out[2]), 2.0, 1e-8);
  // Short gradients are left alone.
  const std::vector<double> small{0.3, -0.4};
  const auto kept = dp_perturb(small, spec, rng);
  EXPECT_NEAR(kept[0], 0.3, 1e-8);
  EXPECT_NEAR(kept[1], -0.4, 1e-8);
}

TEST(Privacy, NoiseVarianceEmpirical) {
  const PrivacySpec spec{1.0, 1e-5, 1.0};
  Rng rng(2024);
  const std::vector<double> g{0.6, -0.8};  // already within the clip norm
  double sum[2] = {0, 0}, sq[2] = {0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto out = dp_perturb(g, spec, rng);
    for (int j = 0; j < 2; ++j) {
      const double z = out[j] - g[j];
      sum[j] += z;
      sq[j] += z * z;
    }
  }
  for (int j = 0; j < 2; ++j) {
    const double mean = sum[j] / n;
    const double var = (sq[j] - n * mean * mean) / (n - 1);
    EXPECT_NEAR(var / spec.noise_variance(), 1.0, 0.05);
  }
}

TEST(Privacy, DeterministicForFixedStream) {
  const PrivacySpec spec{2.0, 1e-5, 1.0};
  Rng a(5), b(5);
  const std::vector<double> g{1.0, 2.0, 3.0};
  EXPECT_EQ(dp_perturb(g, spec, a), dp_perturb(g, spec, b));
}

}  // namespace
}  // namespace assist
