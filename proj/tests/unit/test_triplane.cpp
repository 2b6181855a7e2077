// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "pforge/testkit.hpp"
#include "pforge/triplane.hpp"
#include "test_util.hpp"

using namespace pforge;

namespace {

TriPlane negated(const TriPlane& tp) {
  TriPlane out = tp;
  for (int p = 0; p < TriPlane::kNumPlanes; ++p)
    for (auto& v : out.plane(p)) v = -v;
  return out;
}

bool planes_equal(const TriPlane& a, const TriPlane& b) {
  if (!a.same_shape(b)) return false;
  for (int p = 0; p < TriPlane::kNumPlanes; ++p)
    if (a.plane(p) != b.plane(p)) return false;
  return true;
}

Eigen::Vector3d random_point(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> uni(-1.3 * extent, 1.3 * extent);
  return {uni(rng), uni(rng), uni(rng)};
}

}  // namespace

TEST_CASE("TriPlane defaults follow the published feature-map size") {
  const TriPlane tp;
  CHECK(tp.resolution() == 256);
  CHECK(tp.channels() == 32);
  CHECK(TriPlane::kNumPlanes == 3);
}

TEST_CASE("sample: zero planes give a zero feature") {
  const TriPlane tp(16, 4, 1.0);
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd f = sample(tp, random_point(rng, 1.0));
    CHECK(f.size() == 4);
    CHECK(f.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("sample: constant planes sum to 3v (or average to v)") {
  const float v = 0.37f;
  const TriPlane tp(8, 2, 1.0, v);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = random_point(rng, 1.0);
    const Eigen::VectorXd s = sample(tp, p);
    CHECK(s[0] == doctest::Approx(3.0 * v).epsilon(1e-6));
    CHECK(s[1] == doctest::Approx(3.0 * v).epsilon(1e-6));
    const Eigen::VectorXd m = sample(tp, p, PlaneAggregation::Mean);
    CHECK(m[0] == doctest::Approx(v).epsilon(1e-6));
  }
}

TEST_CASE("sample: matches the gather-and-lerp oracle") {
  const TriPlane tp = testkit::make_random_triplane(11, 17, 6, 0.8, 1.0f);
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = random_point(rng, 0.8);
    const Eigen::VectorXd fast = sample(tp, p);
    const Eigen::VectorXd slow = testkit::brute_force_sample(tp, p);
    CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("sample: clamps to the border outside the extent") {
  const TriPlane tp = testkit::make_random_triplane(21, 9, 3, 1.0, 1.0f);
  const Eigen::Vector3d far_out(4.0, -7.0, 9.0);
  const Eigen::Vector3d clamped(1.0, -1.0, 1.0);
  CHECK((sample(tp, far_out) - sample(tp, clamped)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sample: linear in the plane contents") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const TriPlane a = testkit::make_random_triplane(41, 12, 4, 1.0, 1.0f);
  const TriPlane b = testkit::make_random_triplane(42, 12, 4, 1.0, 1.0f);
  for (int rep = 0; rep < 50; ++rep) {
    const double alpha = coef(rng);
    const double beta = coef(rng);
    TriPlane mix(12, 4, 1.0);
    for (int p = 0; p < TriPlane::kNumPlanes; ++p)
      for (size_t i = 0; i < mix.plane(p).size(); ++i)
        mix.plane(p)[i] = static_cast<float>(alpha * a.plane(p)[i] + beta * b.plane(p)[i]);
    const auto point = random_point(rng, 1.0);
    const Eigen::VectorXd lhs = sample(mix, point);
    const Eigen::VectorXd rhs = alpha * sample(a, point) + beta * sample(b, point);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("sample: continuous across grid-cell boundaries") {
  const TriPlane tp = testkit::make_random_triplane(51, 9, 2, 1.0, 1.0f);
  // Cell boundaries sit at multiples of 2/(R-1) from -extent.
  const double cell = 2.0 / (tp.resolution() - 1);
  for (int k = 1; k < tp.resolution() - 1; ++k) {
    const double x = -1.0 + k * cell;
    for (const double eps : {1e-7, 1e-9}) {
      const Eigen::VectorXd lo = sample(tp, {x - eps, 0.1, -0.2});
      const Eigen::VectorXd hi = sample(tp, {x + eps, 0.1, -0.2});
      CHECK((hi - lo).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }
}

TEST_CASE("apply_motion: additive identity and inverse") {
  const TriPlane cano = testkit::make_dyadic_triplane(61, 10, 3, 1.0);
  SUBCASE("zero diff returns cano exactly") {
    const DiffPlane zero(10, 3, 1.0);
    CHECK(planes_equal(apply_motion(cano, zero), cano));
  }
  SUBCASE("adding then subtracting a dyadic diff is exact") {
    const DiffPlane diff = testkit::make_dyadic_triplane(62, 10, 3, 1.0);
    const TriPlane there = apply_motion(cano, diff);
    const TriPlane back = apply_motion(there, negated(diff));
    CHECK(planes_equal(back, cano));
  }
  SUBCASE("inputs are not modified") {
    const TriPlane cano_copy = cano;
    const DiffPlane diff = testkit::make_dyadic_triplane(63, 10, 3, 1.0);
    const DiffPlane diff_copy = diff;
    (void)apply_motion(cano, diff);
    CHECK(planes_equal(cano, cano_copy));
    CHECK(planes_equal(diff, diff_copy));
  }
}

TEST_CASE("apply_motion: matches the elementwise-sum oracle") {
  const TriPlane a = testkit::make_random_triplane(71, 7, 5, 1.0, 2.0f);
  const DiffPlane d = testkit::make_random_triplane(72, 7, 5, 1.0, 2.0f);
  const TriPlane sum = apply_motion(a, d);
  for (int p = 0; p < TriPlane::kNumPlanes; ++p)
    for (size_t i = 0; i < sum.plane(p).size(); ++i)
      CHECK(sum.plane(p)[i] == a.plane(p)[i] + d.plane(p)[i]);
}

TEST_CASE("apply_motion: shape mismatch names both shapes") {
  const TriPlane a(8, 4, 1.0);
  const DiffPlane d(8, 2, 1.0);
  try {
    apply_motion(a, d);
    FAIL("expected an error");
  } catch (const Error& err) {
    const std::string what = err.what();
    CHECK(what.find("4") != std::string::npos);
    CHECK(what.find("2") != std::string::npos);
  }
}

TEST_CASE("apply_motion commutes with sampling") {
  const TriPlane cano = testkit::make_random_triplane(81, 11, 4, 1.0, 1.0f);
  const DiffPlane diff = testkit::make_random_triplane(82, 11, 4, 1.0, 1.0f);
  const TriPlane moved = apply_motion(cano, diff);
  std::mt19937_64 rng(83);
  for (int rep = 0; rep < 100; ++rep) {
    const auto p = random_point(rng, 1.0);
    const Eigen::VectorXd lhs = sample(moved, p);
    const Eigen::VectorXd rhs = sample(cano, p) + sample(diff, p);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("diffplane_laplacian: trivial values") {
  const DiffPlane a = testkit::make_random_triplane(91, 6, 2, 1.0, 1.0f);
  CHECK(diffplane_laplacian(a, a, a) == 0.0);

  const DiffPlane zeros(6, 2, 1.0);
  const DiffPlane ones(6, 2, 1.0, 1.0f);
  CHECK(diffplane_laplacian(zeros, ones, zeros) == doctest::Approx(1.0));
}

TEST_CASE("diffplane_laplacian: vanishes on arithmetic sequences") {
  const DiffPlane base = testkit::make_dyadic_triplane(95, 8, 3, 1.0);
  const DiffPlane step = testkit::make_dyadic_triplane(96, 8, 3, 1.0);
  TriPlane mid = apply_motion(base, step);
  TriPlane far = apply_motion(mid, step);
  CHECK(diffplane_laplacian(base, mid, far) <= 1e-12);
}

TEST_CASE("diffplane_laplacian: matches brute-force summation") {
  const DiffPlane a = testkit::make_random_triplane(101, 5, 3, 1.0, 1.0f);
  const DiffPlane b = testkit::make_random_triplane(102, 5, 3, 1.0, 1.0f);
  const DiffPlane c = testkit::make_random_triplane(103, 5, 3, 1.0, 1.0f);
  double sum = 0.0;
  size_t count = 0;
  for (int p = 0; p < TriPlane::kNumPlanes; ++p)
    for (size_t i = 0; i < a.plane(p).size(); ++i) {
      const double g = static_cast<double>(b.plane(p)[i]) -
                       0.5 * (static_cast<double>(a.plane(p)[i]) + c.plane(p)[i]);
      sum += g * g;
      ++count;
    }
  const double expected = sum / static_cast<double>(count);
  CHECK(diffplane_laplacian(a, b, c) == doctest::Approx(expected).epsilon(1e-9));
}
