// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <optional>
#include <vector>

#include "pforge/error.hpp"

namespace pforge {

// Coordinate convention used across the project: right-handed; the camera
// looks down -z in its own frame (x right, y down, z toward the viewer);
// image origin is the top-left corner with y growing downward. Depth is the
// distance along the viewing axis, i.e. d = -z_cam for points in front.

// Rigid transform applied as p' = R*p + t. Stored as a unit quaternion so
// repeated (de)serialization cannot drift away from orthonormality.
class FacePose {
public:
  FacePose() : rotation_(Eigen::Quaterniond::Identity()), translation_(Eigen::Vector3d::Zero()) {}

  FacePose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation.normalized()), translation_(translation) {}

  // Validates orthonormality (1e-6) and det = +1 before accepting the matrix.
  static FacePose from_matrix(const Eigen::Matrix3d& rotation,
                              const Eigen::Vector3d& translation);

  const Eigen::Quaterniond& rotation_quat() const { return rotation_; }
  Eigen::Matrix3d rotation() const { return rotation_.toRotationMatrix(); }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation_ * p + translation_;
  }

  FacePose inverse() const {
    Eigen::Quaterniond rinv = rotation_.conjugate();
    return FacePose(rinv, -(rinv * translation_));
  }

private:
  Eigen::Quaterniond rotation_;
  Eigen::Vector3d translation_;
};

struct Camera {
  FacePose pose;  // world-to-camera
  double focal = 0.0;
  Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();
  int width = 0;
  int height = 0;
  double near_plane = 0.1;
  double far_plane = 10.0;
  std::optional<double> radius;  // camera-to-origin distance, when meaningful

  // Throws on: focal <= 0, non-positive image size, near >= far, or a radius
  // outside [2.4, 5.0].
  void validate() const;
};

constexpr double kCameraRadiusMin = 2.4;
constexpr double kCameraRadiusMax = 5.0;

struct ProjectedPoint {
  Eigen::Vector2d uv;
  double depth = 0.0;
  bool in_front = false;
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;  // unit norm
  double t_near = 0.0;
  double t_far = 0.0;

  Eigen::Vector3d point_at(double t) const { return origin + t * direction; }
};

std::vector<Eigen::Vector3d> transform_points(const FacePose& pose,
                                              const std::vector<Eigen::Vector3d>& points);

// Pinhole projection of a camera-frame point; in_front is false when the
// point lies at or behind the camera plane.
ProjectedPoint project_camera_point(const Camera& camera, const Eigen::Vector3d& p_cam);

// World-frame points through the camera's pose and intrinsics.
std::vector<ProjectedPoint> project_points(const Camera& camera,
                                           const std::vector<Eigen::Vector3d>& points_world);

// One ray per pixel center, row-major. When the requested resolution differs
// from the camera's native image size, focal and principal point are scaled
// proportionally.
std::vector<Ray> generate_rays(const Camera& camera, int res_width, int res_height);

}  // namespace pforge
