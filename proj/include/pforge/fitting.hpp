// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "pforge/camera.hpp"
#include "pforge/morphable.hpp"

namespace pforge {

// 2D landmark observations aligned with a named keypoint set of the model.
struct LandmarkTrack {
  std::string set_name = "kp68";
  std::vector<std::vector<Eigen::Vector2d>> frames;
  // Optional per-frame visibility flags; empty means everything visible.
  std::vector<std::vector<uint8_t>> visibility;

  void validate() const;
  bool visible(size_t frame, size_t landmark) const {
    return visibility.empty() || visibility[frame][landmark] != 0;
  }
};

struct FitConfig {
  double lambda_identity = 1e-3;
  double lambda_expression = 1e-3;
  double lambda_laplacian = 1e-2;
  int max_iterations = 200;
  double convergence_tol = 1e-10;
  double damping_init = 1e-3;

  void validate() const;
};

struct FitResult {
  IdentityCode identity;
  std::vector<ExpressionCode> expressions;
  std::vector<FacePose> poses;
  double final_rmse_px = 0.0;
  std::vector<double> per_frame_rmse_px;
  int iterations_used = 0;
};

// Left-multiplicative local pose update used by the optimizer and by the
// finite-difference checks: R <- exp([omega]_x) R, t <- t + delta_t.
FacePose apply_pose_delta(const FacePose& pose, const Eigen::Vector3d& omega,
                          const Eigen::Vector3d& delta_t);

// Flattened (u,v) reprojection residuals, predicted - observed. Invisible or
// behind-camera landmarks contribute zero rows.
Eigen::VectorXd reprojection_residuals(const MorphableModel& model, const Camera& camera,
                                       const IdentityCode& identity,
                                       const ExpressionCode& expression,
                                       const FacePose& pose,
                                       const std::vector<Eigen::Vector2d>& landmarks,
                                       const std::vector<uint8_t>& visibility,
                                       const std::string& set_name);

struct ResidualJacobian {
  Eigen::VectorXd residuals;  // 2K
  // Columns: [omega (3), delta_t (3), identity (D_id), expression (D_exp)].
  Eigen::MatrixXd jacobian;
};

ResidualJacobian reprojection_jacobian(const MorphableModel& model, const Camera& camera,
                                       const IdentityCode& identity,
                                       const ExpressionCode& expression,
                                       const FacePose& pose,
                                       const std::vector<Eigen::Vector2d>& landmarks,
                                       const std::vector<uint8_t>& visibility,
                                       const std::string& set_name);

// Damped Gauss-Newton (Levenberg-Marquardt) fit of one shared identity code
// plus per-frame expressions and poses, alternating a per-frame pose block
// with a joint linear code solve. Steps are accepted only on strict objective
// decrease. `initial` seeds the optimizer; otherwise poses start from a
// weak-perspective estimate and codes from zero.
FitResult fit_sequence(const MorphableModel& model, const Camera& camera,
                       const LandmarkTrack& track, const FitConfig& config,
                       const std::optional<FitResult>& initial = std::nullopt);

// Mean squared 3D distance between keypoints reconstructed from two
// expression sequences that share one identity.
double landmark_recon_error(const MorphableModel& model, const IdentityCode& identity,
                            const std::vector<ExpressionCode>& expressions_a,
                            const std::vector<ExpressionCode>& expressions_b,
                            const std::string& set_name);

// Mean over interior frames of ||e_t - (e_{t-1}+e_{t+1})/2||^2.
double expression_laplacian(const std::vector<ExpressionCode>& expressions);

}  // namespace pforge
