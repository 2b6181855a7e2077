// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "pforge/image.hpp"
#include "pforge/morphable.hpp"

namespace pforge {

struct MetricReport {
  std::string name;
  double value = 0.0;
  std::optional<std::vector<double>> per_frame;
};

// Mean absolute per-channel difference.
double l1_error(const Image& a, const Image& b);

// 10*log10(1/MSE) with peak 1.0; identical inputs report +infinity.
double psnr(const Image& a, const Image& b);

// Mean squared difference over frames and components of two expression
// code sequences.
double expression_recon_error(const std::vector<ExpressionCode>& a,
                              const std::vector<ExpressionCode>& b);

}  // namespace pforge
