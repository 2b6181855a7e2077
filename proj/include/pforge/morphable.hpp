// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "pforge/error.hpp"

namespace pforge {

struct IdentityCode {
  Eigen::VectorXd values;
};

struct ExpressionCode {
  Eigen::VectorXd values;
};

// Linear morphable face model. Vertices are recovered as
//   mean + identity_basis * i + expression_basis * e,
// flattened (x0,y0,z0, x1,y1,z1, ...).
struct MorphableModel {
  Eigen::VectorXd mean_vertices;     // 3N
  Eigen::MatrixXd identity_basis;    // 3N x D_id
  Eigen::MatrixXd expression_basis;  // 3N x D_exp
  std::vector<std::array<int, 3>> triangles;
  Eigen::MatrixXd ncc_colors;        // N x 3, componentwise in [0,1]
  std::map<std::string, std::vector<int>> keypoint_sets;

  int vertex_count() const { return static_cast<int>(mean_vertices.size() / 3); }
  int d_id() const { return static_cast<int>(identity_basis.cols()); }
  int d_exp() const { return static_cast<int>(expression_basis.cols()); }

  Eigen::Vector3d mean_vertex(int v) const { return mean_vertices.segment<3>(3 * v); }

  // Checks all type invariants: index bounds, basis row counts, NCC range and
  // per-channel min 0 / max 1. Throws on the first violation.
  void validate() const;
};

std::vector<Eigen::Vector3d> reconstruct_vertices(const MorphableModel& model,
                                                  const IdentityCode& identity,
                                                  const ExpressionCode& expression);

// Same reconstruction, kept flat (3N); the fitting hot path works on this.
Eigen::VectorXd reconstruct_flat(const MorphableModel& model,
                                 const IdentityCode& identity,
                                 const ExpressionCode& expression);

std::vector<Eigen::Vector3d> select_keypoints(const std::vector<Eigen::Vector3d>& vertices,
                                              const std::string& set_name,
                                              const MorphableModel& model);

const std::vector<int>& keypoint_indices(const MorphableModel& model,
                                         const std::string& set_name);

// Per-axis min-max normalization of the mean shape into [0,1]^3; this is the
// colormap rasterized into PNCC images.
Eigen::MatrixXd compute_ncc(const Eigen::VectorXd& mean_vertices);

}  // namespace pforge
