// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include "pforge/camera.hpp"
#include "pforge/image.hpp"
#include "pforge/triplane.hpp"

namespace pforge {

// Two dense layers, hidden width 64: feature (C) -> 64 -> 1 density + 3 color.
// Raw density maps through exp() to [0, inf); color through a sigmoid to
// [0,1]. An all-zero network is therefore a uniform unit-density gray fog.
struct MlpDecoder {
  static constexpr int kHiddenWidth = 64;
  static constexpr int kNumLayers = 2;
  static constexpr int kOutputs = 4;

  Eigen::MatrixXd w0;  // 64 x C
  Eigen::VectorXd b0;  // 64
  Eigen::MatrixXd w1;  // 4 x 64
  Eigen::VectorXd b1;  // 4

  int input_channels() const { return static_cast<int>(w0.cols()); }

  static MlpDecoder zeros(int input_channels);
  // Throws when layer shapes are inconsistent with C/64/4.
  void validate() const;
};

// Closed-form density/color fields used as rendering oracles. They ignore the
// sampled feature vector entirely.
struct AnalyticDecoder {
  enum class Kind { ConstantSlab, Sphere, GaussianBlob };

  Kind kind = Kind::ConstantSlab;
  double density = 1.0;              // peak / interior density
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;               // sphere radius or gaussian width
  double z_min = -0.5, z_max = 0.5;  // slab bounds (world z)
  Eigen::Vector3d color = Eigen::Vector3d(1.0, 1.0, 1.0);
};

// Sum of analytic fields (densities add, colors mix density-weighted).
// Test plumbing for occlusion scenarios; not serializable.
struct UnionDecoder {
  std::vector<AnalyticDecoder> parts;
};

using RadianceDecoder = std::variant<MlpDecoder, AnalyticDecoder, UnionDecoder>;

struct Decoded {
  double density = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
};

Decoded decode(const RadianceDecoder& decoder, const Eigen::VectorXd& feature,
               const Eigen::Vector3d& point);

struct SamplingConfig {
  int samples_per_ray = 64;
  bool stratified_jitter = false;
  uint64_t seed = 0;

  void validate() const;
};

struct RenderOutput {
  ColorImage rgb;    // HxWx3 in [0,1]
  MaskImage mask;    // HxW accumulated opacity in [0,1]
  Image depth;       // HxW expected termination depth
};

// Emission-absorption quadrature along per-pixel rays:
//   alpha_i = 1 - exp(-sigma_i * delta), T_i = prod_{j<i} (1 - alpha_j),
//   rgb = sum T_i alpha_i c_i, mask = sum T_i alpha_i,
//   depth = sum T_i alpha_i t_i / max(mask, 1e-8).
// Samples sit at bin midpoints of [t_near, t_far]; stratified jitter (when
// enabled) is seeded per pixel so results do not depend on thread count.
RenderOutput render(const TriPlane& triplane, const RadianceDecoder& decoder,
                    const Camera& camera, const SamplingConfig& sampling,
                    int res_width = 128, int res_height = 128);

// Eq-style motion rendering: render(cano + diff) without mutating either.
RenderOutput render_head(const TriPlane& cano, const DiffPlane& diff,
                         const RadianceDecoder& decoder, const Camera& camera,
                         const SamplingConfig& sampling, int res_width = 128,
                         int res_height = 128);

}  // namespace pforge
