// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/metrics.hpp"

#include <cmath>
#include <limits>

namespace pforge {

static void check_shapes(const Image& a, const Image& b, const char* op) {
  if (!a.same_shape(b))
    throw_data(op, ": shape mismatch ", a.width(), "x", a.height(), "x",
               a.channels(), " vs ", b.width(), "x", b.height(), "x",
               b.channels());
  if (a.empty()) throw_data(op, ": empty images");
}

double l1_error(const Image& a, const Image& b) {
  check_shapes(a, b, "l1_error");
  double sum = 0.0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (size_t i = 0; i < da.size(); ++i) sum += std::abs(static_cast<double>(da[i]) - db[i]);
  return sum / static_cast<double>(da.size());
}

double psnr(const Image& a, const Image& b) {
  check_shapes(a, b, "psnr");
  double sum = 0.0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(da.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double expression_recon_error(const std::vector<ExpressionCode>& a,
                              const std::vector<ExpressionCode>& b) {
  if (a.size() != b.size())
    throw_data("expression_recon_error: sequence lengths differ, ", a.size(),
               " vs ", b.size());
  if (a.empty()) throw_data("expression_recon_error: empty sequences");
  double sum = 0.0;
  size_t count = 0;
  for (size_t t = 0; t < a.size(); ++t) {
    if (a[t].values.size() != b[t].values.size())
      throw_data("expression_recon_error: frame ", t, " dims differ, ",
                 a[t].values.size(), " vs ", b[t].values.size());
    sum += (a[t].values - b[t].values).squaredNorm();
    count += a[t].values.size();
  }
  if (count == 0) throw_data("expression_recon_error: zero-dimensional codes");
  return sum / static_cast<double>(count);
}

}  // namespace pforge
