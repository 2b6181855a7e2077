// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/morphable.hpp"

#include <cmath>
#include <limits>

namespace pforge {

void MorphableModel::validate() const {
  const int n = vertex_count();
  if (n <= 0) throw_data("MorphableModel has no vertices");
  if (mean_vertices.size() != 3 * static_cast<Eigen::Index>(n))
    throw_data("MorphableModel mean size must be a multiple of 3");
  if (identity_basis.rows() != mean_vertices.size())
    throw_data("identity_basis has ", identity_basis.rows(), " rows, expected ",
               mean_vertices.size());
  if (expression_basis.rows() != mean_vertices.size())
    throw_data("expression_basis has ", expression_basis.rows(),
               " rows, expected ", mean_vertices.size());
  for (const auto& tri : triangles)
    for (int idx : tri)
      if (idx < 0 || idx >= n)
        throw_data("triangle index ", idx, " out of range [0, ", n, ")");
  for (const auto& [name, indices] : keypoint_sets)
    for (int idx : indices)
      if (idx < 0 || idx >= n)
        throw_data("keypoint set '", name, "' index ", idx,
                   " out of range [0, ", n, ")");
  if (ncc_colors.rows() != n || ncc_colors.cols() != 3)
    throw_data("ncc_colors must be Nx3, got ", ncc_colors.rows(), "x",
               ncc_colors.cols());
  for (int c = 0; c < 3; ++c) {
    const double lo = ncc_colors.col(c).minCoeff();
    const double hi = ncc_colors.col(c).maxCoeff();
    if (lo < -1e-9 || hi > 1.0 + 1e-9)
      throw_data("ncc_colors channel ", c, " outside [0,1]: [", lo, ", ", hi, "]");
    if (std::abs(lo) > 1e-6 || std::abs(hi - 1.0) > 1e-6)
      throw_data("ncc_colors channel ", c, " must span [0,1], spans [", lo,
                 ", ", hi, "]");
  }
}

static void check_code_dims(const MorphableModel& model, const IdentityCode& identity,
                            const ExpressionCode& expression) {
  if (identity.values.size() != model.identity_basis.cols())
    throw_data("identity code length ", identity.values.size(),
               " does not match basis columns ", model.identity_basis.cols());
  if (expression.values.size() != model.expression_basis.cols())
    throw_data("expression code length ", expression.values.size(),
               " does not match basis columns ", model.expression_basis.cols());
}

Eigen::VectorXd reconstruct_flat(const MorphableModel& model,
                                 const IdentityCode& identity,
                                 const ExpressionCode& expression) {
  check_code_dims(model, identity, expression);
  Eigen::VectorXd flat = model.mean_vertices;
  if (identity.values.size() > 0) flat += model.identity_basis * identity.values;
  if (expression.values.size() > 0) flat += model.expression_basis * expression.values;
  return flat;
}

std::vector<Eigen::Vector3d> reconstruct_vertices(const MorphableModel& model,
                                                  const IdentityCode& identity,
                                                  const ExpressionCode& expression) {
  const Eigen::VectorXd flat = reconstruct_flat(model, identity, expression);
  std::vector<Eigen::Vector3d> out(model.vertex_count());
  for (int v = 0; v < model.vertex_count(); ++v) out[v] = flat.segment<3>(3 * v);
  return out;
}

const std::vector<int>& keypoint_indices(const MorphableModel& model,
                                         const std::string& set_name) {
  auto it = model.keypoint_sets.find(set_name);
  if (it == model.keypoint_sets.end()) {
    std::string available;
    for (const auto& [name, _] : model.keypoint_sets) {
      if (!available.empty()) available += ", ";
      available += name;
    }
    throw_data("unknown keypoint set '", set_name, "'; available sets: [",
               available, "]");
  }
  return it->second;
}

std::vector<Eigen::Vector3d> select_keypoints(const std::vector<Eigen::Vector3d>& vertices,
                                              const std::string& set_name,
                                              const MorphableModel& model) {
  const auto& indices = keypoint_indices(model, set_name);
  std::vector<Eigen::Vector3d> out;
  out.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= static_cast<int>(vertices.size()))
      throw_data("keypoint index ", idx, " out of range for ", vertices.size(),
                 " vertices");
    out.push_back(vertices[idx]);
  }
  return out;
}

Eigen::MatrixXd compute_ncc(const Eigen::VectorXd& mean_vertices) {
  const int n = static_cast<int>(mean_vertices.size() / 3);
  if (n < 2 || mean_vertices.size() != 3 * static_cast<Eigen::Index>(n))
    throw_data("compute_ncc requires at least two vertices");
  Eigen::Vector3d lo(std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (int v = 0; v < n; ++v) {
    const Eigen::Vector3d p = mean_vertices.segment<3>(3 * v);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  for (int c = 0; c < 3; ++c)
    if (!(hi[c] > lo[c]))
      throw_data("compute_ncc: degenerate axis ", c, " (min == max == ", lo[c], ")");
  Eigen::MatrixXd colors(n, 3);
  for (int v = 0; v < n; ++v)
    for (int c = 0; c < 3; ++c)
      colors(v, c) = (mean_vertices[3 * v + c] - lo[c]) / (hi[c] - lo[c]);
  return colors;
}

}  // namespace pforge
