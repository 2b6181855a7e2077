// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "pforge/metrics.hpp"
#include "pforge/testkit.hpp"

using namespace pforge;

namespace {

std::vector<ExpressionCode> random_codes(uint64_t seed, int frames, int dims) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ExpressionCode> codes;
  for (int t = 0; t < frames; ++t)
    codes.push_back(
        ExpressionCode{Eigen::VectorXd::NullaryExpr(dims, [&](Eigen::Index) { return gauss(rng); })});
  return codes;
}

}  // namespace

TEST_CASE("l1_error: trivial values and shape checks") {
  const Image zeros(4, 4, 3, 0.0f);
  const Image ones(4, 4, 3, 1.0f);
  CHECK(l1_error(zeros, zeros) == 0.0);
  CHECK(l1_error(zeros, ones) == 1.0);
  CHECK_THROWS_AS(l1_error(zeros, Image(4, 5, 3)), Error);
}

TEST_CASE("l1_error: matches direct summation, symmetric, triangle inequality") {
  const Image a = testkit::make_random_image(1, 6, 5, 3);
  const Image b = testkit::make_random_image(2, 6, 5, 3);
  const Image c = testkit::make_random_image(3, 6, 5, 3);

  double sum = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i)
    sum += std::abs(static_cast<double>(a.data()[i]) - b.data()[i]);
  CHECK(l1_error(a, b) == doctest::Approx(sum / a.data().size()).epsilon(1e-12));

  CHECK(l1_error(a, b) == l1_error(b, a));
  CHECK(l1_error(a, c) <= l1_error(a, b) + l1_error(b, c) + 1e-12);
  CHECK(l1_error(a, b) > 0.0);
}

TEST_CASE("psnr: sentinel infinity, closed form, direct formula") {
  const Image a = testkit::make_random_image(4, 8, 8, 3);
  CHECK(std::isinf(psnr(a, a)));

  // MSE of 0.01 -> 20 dB (at f32 precision of the 0.1 difference).
  Image b(10, 10, 1, 0.0f);
  Image c(10, 10, 1, 0.1f);
  CHECK(psnr(b, c) == doctest::Approx(20.0).epsilon(1e-7));

  const Image d = testkit::make_random_image(5, 8, 8, 3);
  double mse = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    const double diff = static_cast<double>(a.data()[i]) - d.data()[i];
    mse += diff * diff;
  }
  mse /= a.data().size();
  CHECK(psnr(a, d) == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-12));
}

TEST_CASE("expression_recon_error: trivial and derived values") {
  const auto a = random_codes(1, 5, 4);
  CHECK(expression_recon_error(a, a) == 0.0);

  std::vector<ExpressionCode> one_a = {ExpressionCode{Eigen::VectorXd::Zero(1)}};
  std::vector<ExpressionCode> one_b = {ExpressionCode{Eigen::VectorXd::Ones(1)}};
  CHECK(expression_recon_error(one_a, one_b) == 1.0);

  const auto b = random_codes(2, 5, 4);
  double sum = 0.0;
  for (int t = 0; t < 5; ++t) sum += (a[t].values - b[t].values).squaredNorm();
  CHECK(expression_recon_error(a, b) == doctest::Approx(sum / 20.0).epsilon(1e-12));
  CHECK(expression_recon_error(a, b) == expression_recon_error(b, a));

  CHECK_THROWS_AS(expression_recon_error(a, random_codes(3, 4, 4)), Error);
  CHECK_THROWS_AS(expression_recon_error(a, random_codes(3, 5, 3)), Error);
}
