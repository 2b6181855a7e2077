// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pforge/camera.hpp"
#include "pforge/fitting.hpp"
#include "pforge/image.hpp"
#include "pforge/morphable.hpp"
#include "pforge/triplane.hpp"
#include "pforge/volume.hpp"

namespace pforge {

// In-memory view of a PFT1 tensor file: magic "PFT1", little-endian uint32
// JSON header length, JSON header (dtype/shape/axis_labels/metadata), then
// row-major little-endian f32 payload. See FORMATS.md for the byte layout.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<std::string> axis_labels;
  std::map<std::string, std::string> metadata;
  std::vector<float> data;

  int64_t element_count() const {
    int64_t n = 1;
    for (int64_t s : shape) n *= s;
    return n;
  }
};

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& path);

// Rejects (AxisLabelMismatch) unless the tensor carries exactly these labels.
void require_axis_labels(const Tensor& tensor, const std::vector<std::string>& expected,
                         const std::string& context);

// Morphable model container: a JSON manifest referencing tensor payloads.
void save_model(const std::filesystem::path& manifest_path, const MorphableModel& model);
MorphableModel load_model(const std::filesystem::path& manifest_path);

// Radiance decoder container: a JSON manifest, either analytic parameters or
// named MLP layer tensors (2 layers x 64 hidden, enforced on load).
void save_decoder(const std::filesystem::path& manifest_path, const MlpDecoder& decoder);
void save_decoder(const std::filesystem::path& manifest_path, const AnalyticDecoder& decoder);
RadianceDecoder load_decoder(const std::filesystem::path& manifest_path);

// Tri-plane / diff-plane tensor file: shape [3, C, R, R], axis labels
// [plane, channel, row, col], metadata extent and plane_order.
void save_triplane(const std::filesystem::path& path, const TriPlane& plane);
TriPlane load_triplane(const std::filesystem::path& path);

struct CameraTrajectory {
  Camera camera;                // shared intrinsics
  std::vector<FacePose> poses;  // per-frame world-to-camera head poses
};

void save_pose(const std::filesystem::path& path, const FacePose& pose);
FacePose load_pose(const std::filesystem::path& path);
void save_camera(const std::filesystem::path& path, const Camera& camera);
Camera load_camera(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const CameraTrajectory& traj);
CameraTrajectory load_trajectory(const std::filesystem::path& path);

void save_track(const std::filesystem::path& path, const LandmarkTrack& track);
LandmarkTrack load_track(const std::filesystem::path& path);

void save_fit_result(const std::filesystem::path& path, const FitResult& result);
FitResult load_fit_result(const std::filesystem::path& path);

// Expression code sequences on their own (driving codes without a full fit).
void save_expression_sequence(const std::filesystem::path& path,
                              const std::vector<ExpressionCode>& codes);
std::vector<ExpressionCode> load_expression_sequence(const std::filesystem::path& path);

// 8-bit PNG, values rounded from [0,1]; grayscale for single-channel images.
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

// Image <-> tensor bridges ([H, W, C] with labels [row, col, channel]).
Tensor image_to_tensor(const Image& image);
Image tensor_to_image(const Tensor& tensor);

}  // namespace pforge
