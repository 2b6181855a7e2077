// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/camera.hpp"

#include <cmath>

namespace pforge {

FacePose FacePose::from_matrix(const Eigen::Matrix3d& rotation,
                               const Eigen::Vector3d& translation) {
  const double ortho_err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                               .cwiseAbs()
                               .maxCoeff();
  if (ortho_err > 1e-6)
    throw_data("FacePose rotation is not orthonormal (max |R^T R - I| = ", ortho_err, ")");
  const double det = rotation.determinant();
  if (std::abs(det - 1.0) > 1e-6)
    throw_data("FacePose rotation must have det +1, got ", det);
  return FacePose(Eigen::Quaterniond(rotation), translation);
}

void Camera::validate() const {
  if (focal <= 0.0) throw_data("Camera focal must be positive, got ", focal);
  if (width <= 0 || height <= 0)
    throw_data("Camera image size must be positive, got ", width, "x", height);
  if (!(near_plane > 0.0) || !(far_plane > 0.0) || !(near_plane < far_plane))
    throw_data("Camera requires 0 < near < far, got near=", near_plane,
               " far=", far_plane);
  if (radius && (*radius < kCameraRadiusMin || *radius > kCameraRadiusMax))
    throw_data("Camera radius ", *radius, " outside the allowed range [",
               kCameraRadiusMin, ", ", kCameraRadiusMax, "]");
}

std::vector<Eigen::Vector3d> transform_points(const FacePose& pose,
                                              const std::vector<Eigen::Vector3d>& points) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(points.size());
  const Eigen::Matrix3d R = pose.rotation();
  const Eigen::Vector3d& t = pose.translation();
  for (const auto& p : points) out.emplace_back(R * p + t);
  return out;
}

ProjectedPoint project_camera_point(const Camera& camera, const Eigen::Vector3d& p_cam) {
  ProjectedPoint out;
  const double depth = -p_cam.z();
  out.depth = depth;
  if (depth <= 0.0) {
    out.in_front = false;
    out.uv.setZero();
    return out;
  }
  out.in_front = true;
  out.uv.x() = camera.focal * p_cam.x() / depth + camera.principal_point.x();
  out.uv.y() = camera.focal * p_cam.y() / depth + camera.principal_point.y();
  return out;
}

std::vector<ProjectedPoint> project_points(const Camera& camera,
                                           const std::vector<Eigen::Vector3d>& points_world) {
  std::vector<ProjectedPoint> out;
  out.reserve(points_world.size());
  const Eigen::Matrix3d R = camera.pose.rotation();
  const Eigen::Vector3d& t = camera.pose.translation();
  for (const auto& p : points_world)
    out.push_back(project_camera_point(camera, R * p + t));
  return out;
}

std::vector<Ray> generate_rays(const Camera& camera, int res_width, int res_height) {
  if (res_width <= 0 || res_height <= 0)
    throw_data("generate_rays requires a positive resolution, got ", res_width,
               "x", res_height);
  const double sx = static_cast<double>(res_width) / camera.width;
  const double sy = static_cast<double>(res_height) / camera.height;
  const double fx = camera.focal * sx;
  const double fy = camera.focal * sy;
  const double cx = camera.principal_point.x() * sx;
  const double cy = camera.principal_point.y() * sy;

  const FacePose cam_to_world = camera.pose.inverse();
  const Eigen::Matrix3d R_cw = cam_to_world.rotation();
  const Eigen::Vector3d origin = cam_to_world.translation();

  std::vector<Ray> rays;
  rays.reserve(static_cast<size_t>(res_width) * res_height);
  for (int py = 0; py < res_height; ++py) {
    for (int px = 0; px < res_width; ++px) {
      const double u = px + 0.5;
      const double v = py + 0.5;
      Eigen::Vector3d dir_cam((u - cx) / fx, (v - cy) / fy, -1.0);
      Eigen::Vector3d dir = (R_cw * dir_cam).normalized();
      rays.push_back(Ray{origin, dir, camera.near_plane, camera.far_plane});
    }
  }
  return rays;
}

}  // namespace pforge
