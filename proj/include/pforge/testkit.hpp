// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pforge/camera.hpp"
#include "pforge/fitting.hpp"
#include "pforge/image.hpp"
#include "pforge/inpaint.hpp"
#include "pforge/morphable.hpp"
#include "pforge/rasterizer.hpp"
#include "pforge/triplane.hpp"
#include "pforge/volume.hpp"

// Deterministic synthetic data and transparently-correct oracles. Everything
// here is a pure function of its seed; the oracles are asymptotically naive
// on purpose and exist to pin down the fast implementations exactly.
namespace pforge::testkit {

struct SyntheticSpec {
  uint64_t seed = 0;
  int vertex_count = 1200;   // approximate; sphere topology rounds it
  int triangle_count = 0;    // 0 = whatever the topology yields
  int d_id = 80;
  int d_exp = 64;
  double identity_amplitude = 0.05;
  double expression_amplitude = 0.03;
};

// Ellipsoid head mesh with smooth random bases, valid NCC colors and kp68 /
// kp468 keypoint sets. Passes MorphableModel::validate().
MorphableModel make_model(const SyntheticSpec& spec);

struct Trajectory {
  IdentityCode identity;
  std::vector<ExpressionCode> expressions;
  std::vector<FacePose> poses;
};

// Smooth sinusoidal expression codes plus a +/-15 degree yaw sweep with mild
// pitch/roll wobble, placed in front of the fitting camera.
Trajectory make_trajectory(const SyntheticSpec& spec, int frames);

// Intrinsics-only camera used by the fitting fixtures (512x512, identity
// extrinsics).
Camera default_fit_camera();

LandmarkTrack synthesize_landmarks(const MorphableModel& model, const Trajectory& trajectory,
                                   const Camera& camera, const std::string& set_name = "kp68");

struct AnalyticScene {
  TriPlane triplane;  // zeros; analytic decoders ignore features
  AnalyticDecoder decoder;
};

// Named presets: "slab", "sphere", "blob".
AnalyticScene make_analytic_scene(const std::string& name);

// Seeded random helpers shared by tests and gen-fixtures.
TriPlane make_random_triplane(uint64_t seed, int resolution, int channels, double extent,
                              float amplitude);
// Values quantized to multiples of 2^-12 so element-wise sums stay exact in
// f32 (used by the additive-inverse checks).
TriPlane make_dyadic_triplane(uint64_t seed, int resolution, int channels, double extent);
MlpDecoder make_random_decoder(uint64_t seed, int channels, double scale);
Image make_random_image(uint64_t seed, int width, int height, int channels);
std::vector<uint8_t> make_random_mask(uint64_t seed, int width, int height,
                                      double foreground_fraction);

struct FixtureOptions {
  uint64_t seed = 0;
  int frames = 24;
  int plane_resolution = 64;
  int plane_channels = 8;
  int head_resolution = 128;
  int composite_resolution = 512;
};

// Writes a complete, self-contained pipeline fixture directory: model,
// trajectory, landmark track, ground-truth fit result, tri-planes, decoder,
// torso layers, background and pipeline.json. Deterministic per options.
void write_fixture_set(const std::filesystem::path& dir, const FixtureOptions& options);

// Exhaustive per-pixel point-in-triangle + depth-sort rasterizer; must agree
// bit-exactly with pforge::rasterize.
PnccImage brute_force_rasterize(const std::vector<Eigen::Vector3d>& vertices,
                                const std::vector<std::array<int, 3>>& triangles,
                                const Eigen::MatrixXd& vertex_colors, const Camera& camera,
                                std::vector<int>* winner_out = nullptr);

// O(F*B) nearest-background search with the row-major tie rule; must agree
// bit-exactly with pforge::knn_inpaint.
ColorImage brute_force_knn(const SegmentedImage& seg, int k);

// Direct gather-and-lerp tri-plane sampling.
Eigen::VectorXd brute_force_sample(const TriPlane& triplane, const Eigen::Vector3d& point,
                                   PlaneAggregation aggregation = PlaneAggregation::Sum);

}  // namespace pforge::testkit
