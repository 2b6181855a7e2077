// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "pforge/error.hpp"

namespace pforge {

enum class PlaneAggregation { Sum, Mean };

// Three axis-aligned feature planes (xy, xz, yz) spanning the cube
// [-extent, extent]^3. Each plane is R x R with C channels, stored
// channel-major: value(plane, c, row, col) at ((c * R) + row) * R + col.
// Rows index the second plane axis, columns the first (e.g. on the xy plane,
// col follows x and row follows y).
class TriPlane {
public:
  static constexpr int kDefaultResolution = 256;
  static constexpr int kDefaultChannels = 32;
  static constexpr int kNumPlanes = 3;

  TriPlane() : TriPlane(kDefaultResolution, kDefaultChannels, 1.0) {}
  TriPlane(int resolution, int channels, double extent, float fill = 0.0f);

  int resolution() const { return resolution_; }
  int channels() const { return channels_; }
  double extent() const { return extent_; }

  float& at(int plane, int channel, int row, int col) {
    return planes_[plane][(static_cast<size_t>(channel) * resolution_ + row) * resolution_ + col];
  }
  float at(int plane, int channel, int row, int col) const {
    return planes_[plane][(static_cast<size_t>(channel) * resolution_ + row) * resolution_ + col];
  }

  std::vector<float>& plane(int p) { return planes_[p]; }
  const std::vector<float>& plane(int p) const { return planes_[p]; }

  bool same_shape(const TriPlane& other) const {
    return resolution_ == other.resolution_ && channels_ == other.channels_;
  }

private:
  int resolution_ = 0;
  int channels_ = 0;
  double extent_ = 1.0;
  std::array<std::vector<float>, kNumPlanes> planes_;
};

// A residual motion plane added element-wise to a canonical tri-plane. Same
// storage and shape rules as the plane it edits.
using DiffPlane = TriPlane;

// Feature of a 3D point: project onto the three planes, bilinearly
// interpolate each, aggregate across planes (sum by default). Points outside
// the extent clamp to the plane border.
Eigen::VectorXd sample(const TriPlane& triplane, const Eigen::Vector3d& point,
                       PlaneAggregation aggregation = PlaneAggregation::Sum);

// Element-wise cano + diff; inputs are untouched.
TriPlane apply_motion(const TriPlane& cano, const DiffPlane& diff);

// Mean squared element-wise second difference of three consecutive
// diff-planes: ||d_curr - (d_prev + d_next)/2||^2 / element count.
double diffplane_laplacian(const DiffPlane& d_prev, const DiffPlane& d_curr,
                           const DiffPlane& d_next);

}  // namespace pforge
