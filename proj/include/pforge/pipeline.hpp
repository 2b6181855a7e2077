// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pforge/fitting.hpp"
#include "pforge/volume.hpp"

namespace pforge {

// Everything the end-to-end pipeline consumes. Learned assets (tri-planes,
// diff-planes, decoder weights, torso layers) arrive as files; this library
// does the deterministic geometry, rendering and composition around them.
struct PipelineConfig {
  std::filesystem::path model_path;
  std::filesystem::path decoder_path;
  std::filesystem::path cano_plane_path;
  std::vector<std::filesystem::path> diff_plane_paths;   // optional, per frame
  std::vector<std::filesystem::path> torso_image_paths;  // per frame
  std::vector<std::filesystem::path> torso_mask_paths;   // per frame
  std::filesystem::path background_path;
  std::filesystem::path background_mask_path;
  std::filesystem::path trajectory_path;
  std::filesystem::path fit_result_path;  // codes source when track_path is empty
  std::filesystem::path track_path;       // when set, fit first
  FitConfig fit_config;
  SamplingConfig sampling;
  int head_resolution = 128;
  int composite_resolution = 512;
  int pncc_resolution = 128;
  int knn_k = 1;
  int jobs = 0;  // frame-level parallelism cap; 0 = auto
  std::filesystem::path output_dir;

  void validate() const;  // existence and shape checks, throws Config errors
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct StageRecord {
  std::string name;
  double milliseconds = 0.0;
  std::vector<std::string> outputs;
};

struct PipelineManifest {
  int frames = 0;
  std::vector<StageRecord> stages;
};

// fit (optional) -> PNCC diagnostics -> per-frame head rendering -> one-time
// background inpainting -> per-frame composition. Writes numbered frames and
// run_manifest.json into output_dir; outputs are byte-deterministic for fixed
// inputs (the manifest's timings are the only varying bytes).
PipelineManifest run_pipeline(const PipelineConfig& config);

}  // namespace pforge
