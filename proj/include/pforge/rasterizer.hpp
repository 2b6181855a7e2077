// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "pforge/camera.hpp"
#include "pforge/image.hpp"
#include "pforge/morphable.hpp"

namespace pforge {

// Z-buffer triangle rasterizer, pixel-center sampling, no antialiasing.
//
// Fragment rules (fixed for bit-exact reproducibility):
//  - a pixel center exactly on an edge belongs to the triangle when the edge
//    is a top or left edge of that triangle (top-left fill rule);
//  - depth is the perspective-correct camera-frame depth at the pixel center;
//    colors interpolate with plain screen-space barycentric weights;
//  - the nearest fragment wins, depth ties keep the lower triangle index;
//  - triangles with any vertex at depth <= 0 are skipped (no clipping);
//  - degenerate (zero screen area) triangles are skipped.
PnccImage rasterize(const std::vector<Eigen::Vector3d>& vertices,
                    const std::vector<std::array<int, 3>>& triangles,
                    const Eigen::MatrixXd& vertex_colors,
                    const Camera& camera);

// Same, additionally reporting the winning triangle index per pixel
// (-1 where uncovered).
PnccImage rasterize(const std::vector<Eigen::Vector3d>& vertices,
                    const std::vector<std::array<int, 3>>& triangles,
                    const Eigen::MatrixXd& vertex_colors,
                    const Camera& camera,
                    std::vector<int>* winner_out);

// The fixed frontal camera PNCC is rendered with: on the +z axis at radius
// 2.7 looking at the origin, principal point at the image center, focal equal
// to min(width, height). Models are expected in canonical units (head within
// roughly the unit sphere).
Camera canonical_camera(int width, int height);

constexpr double kCanonicalRadius = 2.7;

// PNCC of a (identity, expression) pair: the model mesh rendered from the
// canonical camera with NCC vertex colors. Takes no pose on purpose; the
// motion representation must not depend on head pose.
PnccImage render_pncc(const MorphableModel& model, const IdentityCode& identity,
                      const ExpressionCode& expression, int resolution);

// Torso-driving keypoints: keypoints of the posed mesh projected through the
// given camera intrinsics.
std::vector<Eigen::Vector2d> project_keypoints(const MorphableModel& model,
                                               const IdentityCode& identity,
                                               const ExpressionCode& expression,
                                               const FacePose& pose,
                                               const Camera& camera,
                                               const std::string& set_name);

}  // namespace pforge
