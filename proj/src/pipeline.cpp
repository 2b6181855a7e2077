// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pforge/compositor.hpp"
#include "pforge/inpaint.hpp"
#include "pforge/io.hpp"
#include "pforge/parallel.hpp"
#include "pforge/rasterizer.hpp"

namespace pforge {

using nlohmann::json;

namespace {

std::string frame_name(const char* prefix, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", prefix, index, ext);
  return buf;
}

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw_config("pipeline config: missing ", what, " path");
  if (!std::filesystem::exists(p))
    throw_config("pipeline config: ", what, " file does not exist: ", p.string());
}

// Quantize to the 8-bit grid PNG storage uses, so in-memory composition
// matches composing from the written PNG files byte for byte.
Image png_roundtrip(const Image& img) {
  Image out = img;
  for (auto& v : out.data()) {
    const float c = std::min(std::max(v, 0.0f), 1.0f);
    v = static_cast<float>(std::lround(c * 255.0f)) / 255.0f;
  }
  return out;
}

class StageTimer {
public:
  explicit StageTimer(PipelineManifest& manifest, std::string name)
      : manifest_(manifest), start_(std::chrono::steady_clock::now()) {
    record_.name = std::move(name);
  }
  void output(const std::string& name) { record_.outputs.push_back(name); }
  void finish() {
    const auto end = std::chrono::steady_clock::now();
    record_.milliseconds =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start_)
            .count();
    manifest_.stages.push_back(std::move(record_));
  }

private:
  PipelineManifest& manifest_;
  StageRecord record_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

void PipelineConfig::validate() const {
  require_file(model_path, "model");
  require_file(decoder_path, "decoder");
  require_file(cano_plane_path, "cano_plane");
  require_file(trajectory_path, "trajectory");
  require_file(background_path, "background");
  require_file(background_mask_path, "background_mask");
  if (track_path.empty() && fit_result_path.empty())
    throw_config("pipeline config: needs either a track (to fit) or a fit_result");
  if (!track_path.empty()) require_file(track_path, "track");
  if (track_path.empty()) require_file(fit_result_path, "fit_result");
  for (const auto& p : diff_plane_paths) require_file(p, "diff_plane");
  for (const auto& p : torso_image_paths) require_file(p, "torso_image");
  for (const auto& p : torso_mask_paths) require_file(p, "torso_mask");
  if (torso_image_paths.size() != torso_mask_paths.size())
    throw_config("pipeline config: ", torso_image_paths.size(), " torso images but ",
                 torso_mask_paths.size(), " torso masks");
  if (head_resolution < 2 || composite_resolution < head_resolution)
    throw_config("pipeline config: bad resolutions head=", head_resolution,
                 " composite=", composite_resolution);
  if (pncc_resolution < 2)
    throw_config("pipeline config: bad pncc_resolution ", pncc_resolution);
  if (knn_k < 1) throw_config("pipeline config: knn_k must be >= 1");
  if (output_dir.empty()) throw_config("pipeline config: missing output_dir");
  try {
    sampling.validate();
    fit_config.validate();
  } catch (const Error& e) {
    throw_config("pipeline config: ", e.what());
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_config("cannot open pipeline config: ", path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw_config("pipeline config ", path.string(), " is not valid JSON: ", e.what());
  }
  const auto dir = path.parent_path();
  auto resolve = [&](const std::string& rel) { return dir / rel; };

  PipelineConfig cfg;
  auto get_path = [&](const char* key, std::filesystem::path& dst) {
    if (j.contains(key)) dst = resolve(j.at(key).get<std::string>());
  };
  get_path("model", cfg.model_path);
  get_path("decoder", cfg.decoder_path);
  get_path("cano_plane", cfg.cano_plane_path);
  get_path("background", cfg.background_path);
  get_path("background_mask", cfg.background_mask_path);
  get_path("trajectory", cfg.trajectory_path);
  get_path("fit_result", cfg.fit_result_path);
  get_path("track", cfg.track_path);
  get_path("output_dir", cfg.output_dir);
  auto get_list = [&](const char* key, std::vector<std::filesystem::path>& dst) {
    if (!j.contains(key)) return;
    for (const auto& rel : j.at(key)) dst.push_back(resolve(rel.get<std::string>()));
  };
  get_list("diff_planes", cfg.diff_plane_paths);
  get_list("torso_images", cfg.torso_image_paths);
  get_list("torso_masks", cfg.torso_mask_paths);

  if (j.contains("sampling")) {
    const json& s = j.at("sampling");
    if (s.contains("samples_per_ray")) cfg.sampling.samples_per_ray = s.at("samples_per_ray");
    if (s.contains("stratified_jitter")) cfg.sampling.stratified_jitter = s.at("stratified_jitter");
    if (s.contains("seed")) cfg.sampling.seed = s.at("seed");
  }
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    if (f.contains("lambda_identity")) cfg.fit_config.lambda_identity = f.at("lambda_identity");
    if (f.contains("lambda_expression"))
      cfg.fit_config.lambda_expression = f.at("lambda_expression");
    if (f.contains("lambda_laplacian")) cfg.fit_config.lambda_laplacian = f.at("lambda_laplacian");
    if (f.contains("max_iterations")) cfg.fit_config.max_iterations = f.at("max_iterations");
    if (f.contains("convergence_tol")) cfg.fit_config.convergence_tol = f.at("convergence_tol");
    if (f.contains("damping_init")) cfg.fit_config.damping_init = f.at("damping_init");
  }
  if (j.contains("head_resolution")) cfg.head_resolution = j.at("head_resolution");
  if (j.contains("composite_resolution")) cfg.composite_resolution = j.at("composite_resolution");
  if (j.contains("pncc_resolution")) cfg.pncc_resolution = j.at("pncc_resolution");
  if (j.contains("knn_k")) cfg.knn_k = j.at("knn_k");
  if (j.contains("jobs")) cfg.jobs = j.at("jobs");
  return cfg;
}

PipelineManifest run_pipeline(const PipelineConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  const auto& out_dir = config.output_dir;

  const MorphableModel model = load_model(config.model_path);
  const RadianceDecoder decoder = load_decoder(config.decoder_path);
  const TriPlane cano = load_triplane(config.cano_plane_path);
  const CameraTrajectory traj = load_trajectory(config.trajectory_path);
  const int frames = static_cast<int>(traj.poses.size());

  PipelineManifest manifest;
  manifest.frames = frames;

  // Stage: fit (optional) or load fitted codes.
  FitResult fit;
  if (!config.track_path.empty()) {
    StageTimer timer(manifest, "fit");
    const LandmarkTrack track = load_track(config.track_path);
    fit = fit_sequence(model, traj.camera, track, config.fit_config);
    save_fit_result(out_dir / "fit_result.json", fit);
    timer.output("fit_result.json");
    timer.finish();
  } else {
    fit = load_fit_result(config.fit_result_path);
  }
  if (static_cast<int>(fit.expressions.size()) < frames)
    throw_config("pipeline: ", fit.expressions.size(),
                 " expression frames but trajectory has ", frames);
  if (!config.diff_plane_paths.empty() &&
      static_cast<int>(config.diff_plane_paths.size()) < frames)
    throw_config("pipeline: ", config.diff_plane_paths.size(),
                 " diff-planes but trajectory has ", frames);
  if (static_cast<int>(config.torso_image_paths.size()) < frames)
    throw_config("pipeline: ", config.torso_image_paths.size(),
                 " torso layers but trajectory has ", frames);

  // Stage: PNCC motion-map diagnostics.
  {
    StageTimer timer(manifest, "pncc");
    for (int t = 0; t < frames; ++t) {
      const PnccImage pncc =
          render_pncc(model, fit.identity, fit.expressions[t], config.pncc_resolution);
      const auto png = frame_name("pncc", t, "png");
      const auto pft = frame_name("pncc", t, "pft");
      write_png(out_dir / png, pncc.pixels);
      write_tensor(out_dir / pft, image_to_tensor(pncc.pixels));
      timer.output(png);
      timer.output(pft);
    }
    timer.finish();
  }

  // Stage: per-frame low-resolution head rendering.
  std::vector<RenderOutput> heads(frames);
  {
    StageTimer timer(manifest, "render");
    parallel_chunks(
        frames,
        [&](int begin, int end) {
          for (int t = begin; t < end; ++t) {
            Camera cam = traj.camera;
            cam.pose = traj.poses[t];
            if (config.diff_plane_paths.empty()) {
              heads[t] = render(cano, decoder, cam, config.sampling,
                                config.head_resolution, config.head_resolution);
            } else {
              const DiffPlane diff = load_triplane(config.diff_plane_paths[t]);
              heads[t] = render_head(cano, diff, decoder, cam, config.sampling,
                                     config.head_resolution, config.head_resolution);
            }
          }
        },
        config.jobs);
    for (int t = 0; t < frames; ++t) {
      const auto rgb = frame_name("head", t, "png");
      const auto mask = frame_name("head_mask", t, "png");
      const auto depth = frame_name("head_depth", t, "pft");
      write_png(out_dir / rgb, heads[t].rgb);
      write_png(out_dir / mask, heads[t].mask);
      write_tensor(out_dir / depth, image_to_tensor(heads[t].depth));
      timer.output(rgb);
      timer.output(mask);
      timer.output(depth);
    }
    timer.finish();
  }

  // Stage: one-time background inpainting.
  ColorImage background;
  {
    StageTimer timer(manifest, "inpaint");
    SegmentedImage seg;
    seg.image = read_png(config.background_path);
    const Image mask = read_png(config.background_mask_path);
    if (!mask.same_shape(Image(seg.image.width(), seg.image.height(), 1)))
      throw_data("pipeline: background mask must be ", seg.image.width(), "x",
                 seg.image.height(), "x1");
    seg.foreground.resize(mask.data().size());
    for (size_t i = 0; i < seg.foreground.size(); ++i)
      seg.foreground[i] = mask.data()[i] > 0.5f ? 1 : 0;
    background = knn_inpaint(seg, config.knn_k);
    write_png(out_dir / "background_inpainted.png", background);
    timer.output("background_inpainted.png");
    timer.finish();
  }

  // Stage: per-frame composition at full resolution.
  {
    StageTimer timer(manifest, "composite");
    // Quantize before resizing: composing from the written PNG must yield the
    // same bytes as this in-memory path.
    Layer bg_layer;
    const ColorImage bg_q = png_roundtrip(background);
    bg_layer.image = (bg_q.width() == config.composite_resolution &&
                      bg_q.height() == config.composite_resolution)
                         ? bg_q
                         : upsample_bilinear(bg_q, config.composite_resolution,
                                             config.composite_resolution);
    std::vector<std::string> frame_files(frames), person_files(frames);
    parallel_chunks(
        frames,
        [&](int begin, int end) {
          for (int t = begin; t < end; ++t) {
            Layer head;
            head.image = png_roundtrip(heads[t].rgb);
            head.mask = png_roundtrip(heads[t].mask);
            Layer torso;
            torso.image = read_png(config.torso_image_paths[t]);
            torso.mask = read_png(config.torso_mask_paths[t]);
            const CompositeFrame frame =
                fuse(head, torso, bg_layer, config.composite_resolution);
            frame_files[t] = frame_name("frame", t, "png");
            person_files[t] = frame_name("person_mask", t, "png");
            write_png(out_dir / frame_files[t], frame.image);
            write_png(out_dir / person_files[t], frame.person_mask);
          }
        },
        config.jobs);
    for (int t = 0; t < frames; ++t) {
      timer.output(frame_files[t]);
      timer.output(person_files[t]);
    }
    timer.finish();
  }

  // Run manifest; timings are the only non-deterministic bytes.
  {
    json j;
    j["format"] = "portrait-forge-run";
    j["frames"] = frames;
    j["settings"] = {{"head_resolution", config.head_resolution},
                     {"composite_resolution", config.composite_resolution},
                     {"pncc_resolution", config.pncc_resolution},
                     {"samples_per_ray", config.sampling.samples_per_ray},
                     {"stratified_jitter", config.sampling.stratified_jitter},
                     {"seed", config.sampling.seed},
                     {"knn_k", config.knn_k}};
    j["stages"] = json::array();
    for (const auto& s : manifest.stages)
      j["stages"].push_back(
          {{"name", s.name}, {"milliseconds", s.milliseconds}, {"outputs", s.outputs}});
    j["metrics"] = json::object();  // reserved for external perceptual metrics
    std::ofstream out(out_dir / "run_manifest.json");
    if (!out) throw_data("cannot write run manifest in ", out_dir.string());
    out << j.dump(2) << "\n";
  }

  return manifest;
}

}  // namespace pforge
