// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "pforge/compositor.hpp"
#include "pforge/inpaint.hpp"
#include "pforge/io.hpp"
#include "pforge/metrics.hpp"
#include "pforge/pipeline.hpp"
#include "pforge/rasterizer.hpp"
#include "pforge/testkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 2 config error, 3 data/format error, 4 numerical
// failure (documented in the README).
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string frame_name(const char* prefix, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", prefix, index, ext);
  return buf;
}

int run_fit(const fs::path& model_path, const fs::path& track_path,
            const fs::path& camera_path, const fs::path& out_path,
            const pforge::FitConfig& cfg) {
  const auto model = pforge::load_model(model_path);
  const auto track = pforge::load_track(track_path);
  const auto camera = pforge::load_camera(camera_path);
  const auto result = pforge::fit_sequence(model, camera, track, cfg);
  pforge::save_fit_result(out_path, result);
  std::cout << "fit: " << track.frames.size() << " frames, rmse " << result.final_rmse_px
            << " px, " << result.iterations_used << " iterations -> " << out_path.string()
            << "\n";
  return kExitOk;
}

int run_pncc(const fs::path& model_path, const fs::path& codes_path, int resolution,
             const fs::path& out_dir) {
  const auto model = pforge::load_model(model_path);
  const auto fit = pforge::load_fit_result(codes_path);
  fs::create_directories(out_dir);
  for (size_t t = 0; t < fit.expressions.size(); ++t) {
    const auto pncc = pforge::render_pncc(model, fit.identity, fit.expressions[t],
                                          resolution);
    pforge::write_png(out_dir / frame_name("pncc", static_cast<int>(t), "png"), pncc.pixels);
    pforge::write_tensor(out_dir / frame_name("pncc", static_cast<int>(t), "pft"),
                         pforge::image_to_tensor(pncc.pixels));
  }
  std::cout << "pncc: wrote " << fit.expressions.size() << " frames to " << out_dir.string()
            << "\n";
  return kExitOk;
}

int run_render(const fs::path& plane_path, const std::vector<fs::path>& diff_paths,
               const fs::path& decoder_path, const fs::path& trajectory_path,
               const pforge::SamplingConfig& sampling, int resolution,
               const fs::path& out_dir) {
  const auto cano = pforge::load_triplane(plane_path);
  const auto decoder = pforge::load_decoder(decoder_path);
  const auto traj = pforge::load_trajectory(trajectory_path);
  if (!diff_paths.empty() && diff_paths.size() < traj.poses.size())
    pforge::throw_config("render: ", diff_paths.size(), " diff-planes for ",
                         traj.poses.size(), " poses");
  fs::create_directories(out_dir);
  for (size_t t = 0; t < traj.poses.size(); ++t) {
    pforge::Camera cam = traj.camera;
    cam.pose = traj.poses[t];
    pforge::RenderOutput out;
    if (diff_paths.empty()) {
      out = pforge::render(cano, decoder, cam, sampling, resolution, resolution);
    } else {
      const auto diff = pforge::load_triplane(diff_paths[t]);
      out = pforge::render_head(cano, diff, decoder, cam, sampling, resolution, resolution);
    }
    const int ti = static_cast<int>(t);
    pforge::write_png(out_dir / frame_name("head", ti, "png"), out.rgb);
    pforge::write_png(out_dir / frame_name("head_mask", ti, "png"), out.mask);
    pforge::write_tensor(out_dir / frame_name("head_depth", ti, "pft"),
                         pforge::image_to_tensor(out.depth));
  }
  std::cout << "render: wrote " << traj.poses.size() << " frames to " << out_dir.string()
            << "\n";
  return kExitOk;
}

int run_inpaint(const fs::path& image_path, const fs::path& mask_path, int k,
                const fs::path& out_path) {
  pforge::SegmentedImage seg;
  seg.image = pforge::read_png(image_path);
  const pforge::Image mask = pforge::read_png(mask_path);
  if (mask.width() != seg.image.width() || mask.height() != seg.image.height() ||
      mask.channels() != 1)
    pforge::throw_data("inpaint: mask must be single-channel ", seg.image.width(), "x",
                       seg.image.height());
  seg.foreground.resize(mask.data().size());
  for (size_t i = 0; i < seg.foreground.size(); ++i)
    seg.foreground[i] = mask.data()[i] > 0.5f ? 1 : 0;
  pforge::write_png(out_path, pforge::knn_inpaint(seg, k));
  std::cout << "inpaint: wrote " << out_path.string() << "\n";
  return kExitOk;
}

int run_composite(const fs::path& head_path, const fs::path& head_mask_path,
                  const fs::path& torso_path, const fs::path& torso_mask_path,
                  const fs::path& background_path, int size, const fs::path& out_path,
                  const fs::path& person_mask_out) {
  pforge::Layer head{pforge::read_png(head_path), pforge::read_png(head_mask_path)};
  pforge::Layer torso{pforge::read_png(torso_path), pforge::read_png(torso_mask_path)};
  pforge::Layer background;
  {
    const pforge::ColorImage bg = pforge::read_png(background_path);
    background.image = (bg.width() == size && bg.height() == size)
                           ? bg
                           : pforge::upsample_bilinear(bg, size, size);
  }
  const pforge::CompositeFrame frame = pforge::fuse(head, torso, background, size);
  pforge::write_png(out_path, frame.image);
  if (!person_mask_out.empty()) pforge::write_png(person_mask_out, frame.person_mask);
  std::cout << "composite: wrote " << out_path.string() << "\n";
  return kExitOk;
}

json metric_json(const std::string& name, double value,
                 const std::vector<double>& per_frame) {
  json j;
  j["name"] = name;
  if (std::isinf(value))
    j["value"] = "inf";
  else
    j["value"] = value;
  if (!per_frame.empty()) {
    j["per_frame"] = json::array();
    for (double v : per_frame)
      if (std::isinf(v))
        j["per_frame"].push_back("inf");
      else
        j["per_frame"].push_back(v);
  }
  return j;
}

int run_metrics(const fs::path& dir_a, const fs::path& dir_b, const fs::path& codes_a,
                const fs::path& codes_b, const fs::path& out_path) {
  json report;
  report["format"] = "portrait-forge-metrics";
  report["reports"] = json::array();

  if (!dir_a.empty() || !dir_b.empty()) {
    if (dir_a.empty() || dir_b.empty())
      pforge::throw_config("metrics: need both --dir-a and --dir-b");
    std::vector<fs::path> names;
    for (const auto& entry : fs::directory_iterator(dir_a))
      if (entry.path().extension() == ".png") names.push_back(entry.path().filename());
    std::sort(names.begin(), names.end());
    if (names.empty()) pforge::throw_data("metrics: no PNG files in ", dir_a.string());
    std::vector<double> l1s, psnrs;
    for (const auto& name : names) {
      const fs::path pb = dir_b / name;
      if (!fs::exists(pb)) pforge::throw_data("metrics: missing counterpart ", pb.string());
      const auto a = pforge::read_png(dir_a / name);
      const auto b = pforge::read_png(pb);
      l1s.push_back(pforge::l1_error(a, b));
      psnrs.push_back(pforge::psnr(a, b));
    }
    double l1_mean = 0.0;
    for (double v : l1s) l1_mean += v;
    l1_mean /= static_cast<double>(l1s.size());
    double psnr_mean = 0.0;
    bool psnr_inf = false;
    for (double v : psnrs) {
      if (std::isinf(v)) psnr_inf = true;
      psnr_mean += v;
    }
    psnr_mean = psnr_inf ? std::numeric_limits<double>::infinity()
                         : psnr_mean / static_cast<double>(psnrs.size());
    report["reports"].push_back(metric_json("l1", l1_mean, l1s));
    report["reports"].push_back(metric_json("psnr", psnr_mean, psnrs));
  }

  if (!codes_a.empty() || !codes_b.empty()) {
    if (codes_a.empty() || codes_b.empty())
      pforge::throw_config("metrics: need both --codes-a and --codes-b");
    const auto a = pforge::load_expression_sequence(codes_a);
    const auto b = pforge::load_expression_sequence(codes_b);
    report["reports"].push_back(
        metric_json("expression_recon", pforge::expression_recon_error(a, b), {}));
    if (a.size() >= 3)
      report["reports"].push_back(
          metric_json("expression_laplacian_a", pforge::expression_laplacian(a), {}));
    if (b.size() >= 3)
      report["reports"].push_back(
          metric_json("expression_laplacian_b", pforge::expression_laplacian(b), {}));
  }

  if (report["reports"].empty())
    pforge::throw_config("metrics: nothing to compare (set --dir-a/--dir-b or --codes-a/--codes-b)");

  if (out_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) pforge::throw_data("metrics: cannot write ", out_path.string());
    out << report.dump(2) << "\n";
    std::cout << "metrics: wrote " << out_path.string() << "\n";
  }
  return kExitOk;
}

int run_gen_fixtures(const fs::path& out_dir, uint64_t seed, int frames, int plane_res,
                     int plane_channels, int head_res, int composite_res) {
  pforge::testkit::FixtureOptions options;
  options.seed = seed;
  options.frames = frames;
  options.plane_resolution = plane_res;
  options.plane_channels = plane_channels;
  options.head_resolution = head_res;
  options.composite_resolution = composite_res;
  pforge::testkit::write_fixture_set(out_dir, options);
  std::cout << "gen-fixtures: wrote fixture set (" << frames << " frames) to "
            << out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"portrait-forge: deterministic 3D talking-portrait pipeline core"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit identity/expression/pose from landmarks");
  fs::path fit_model, fit_track, fit_camera, fit_out = "fit_result.json";
  pforge::FitConfig fit_cfg;
  fit->add_option("--model", fit_model, "Model manifest")->required();
  fit->add_option("--track", fit_track, "Landmark track JSON")->required();
  fit->add_option("--camera", fit_camera, "Camera JSON")->required();
  fit->add_option("--out", fit_out, "Output fit result JSON");
  fit->add_option("--lambda-id", fit_cfg.lambda_identity, "Identity ridge weight");
  fit->add_option("--lambda-exp", fit_cfg.lambda_expression, "Expression ridge weight");
  fit->add_option("--lambda-lap", fit_cfg.lambda_laplacian, "Temporal Laplacian weight");
  fit->add_option("--max-iter", fit_cfg.max_iterations, "Max outer iterations");
  fit->add_option("--tol", fit_cfg.convergence_tol, "Relative decrease tolerance");

  // pncc
  auto* pncc = app.add_subcommand("pncc", "Rasterize PNCC motion maps from fitted codes");
  fs::path pncc_model, pncc_codes, pncc_out = "pncc_out";
  int pncc_res = 128;
  pncc->add_option("--model", pncc_model, "Model manifest")->required();
  pncc->add_option("--codes", pncc_codes, "Fit result JSON with codes")->required();
  pncc->add_option("--resolution", pncc_res, "Output resolution");
  pncc->add_option("--out-dir", pncc_out, "Output directory");

  // render
  auto* render = app.add_subcommand("render", "Volume-render head frames along a trajectory");
  fs::path render_plane, render_decoder, render_traj, render_out = "render_out";
  std::vector<fs::path> render_diffs;
  pforge::SamplingConfig render_sampling;
  int render_res = 128;
  render->add_option("--plane", render_plane, "Canonical tri-plane tensor")->required();
  render->add_option("--diff", render_diffs, "Per-frame diff-plane tensors");
  render->add_option("--decoder", render_decoder, "Decoder manifest")->required();
  render->add_option("--trajectory", render_traj, "Camera trajectory JSON")->required();
  render->add_option("--samples", render_sampling.samples_per_ray, "Samples per ray");
  render->add_flag("--jitter", render_sampling.stratified_jitter, "Stratified jitter");
  render->add_option("--seed", render_sampling.seed, "Jitter seed");
  render->add_option("--resolution", render_res, "Render resolution");
  render->add_option("--out-dir", render_out, "Output directory");

  // inpaint
  auto* inpaint = app.add_subcommand("inpaint", "KNN-inpaint the background of an image");
  fs::path inp_image, inp_mask, inp_out = "inpainted.png";
  int inp_k = 1;
  inpaint->add_option("--image", inp_image, "Source PNG")->required();
  inpaint->add_option("--mask", inp_mask, "Foreground mask PNG (white = fill)")->required();
  inpaint->add_option("--k", inp_k, "Neighbor count");
  inpaint->add_option("--out", inp_out, "Output PNG");

  // composite
  auto* composite = app.add_subcommand("composite", "Fuse head/torso/background layers");
  fs::path cmp_head, cmp_head_mask, cmp_torso, cmp_torso_mask, cmp_bg, cmp_out = "frame.png";
  fs::path cmp_person_out;
  int cmp_size = pforge::kCompositeSize;
  composite->add_option("--head", cmp_head, "Head PNG")->required();
  composite->add_option("--head-mask", cmp_head_mask, "Head mask PNG")->required();
  composite->add_option("--torso", cmp_torso, "Torso PNG")->required();
  composite->add_option("--torso-mask", cmp_torso_mask, "Torso mask PNG")->required();
  composite->add_option("--background", cmp_bg, "Background PNG")->required();
  composite->add_option("--size", cmp_size, "Composite resolution");
  composite->add_option("--out", cmp_out, "Output PNG");
  composite->add_option("--person-mask-out", cmp_person_out, "Optional person mask PNG");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Compare image directories or code sequences");
  fs::path met_dir_a, met_dir_b, met_codes_a, met_codes_b, met_out;
  metrics->add_option("--dir-a", met_dir_a, "First PNG directory");
  metrics->add_option("--dir-b", met_dir_b, "Second PNG directory");
  metrics->add_option("--codes-a", met_codes_a, "First expression sequence JSON");
  metrics->add_option("--codes-b", met_codes_b, "Second expression sequence JSON");
  metrics->add_option("--out", met_out, "Report JSON (stdout when omitted)");

  // gen-fixtures
  auto* gen = app.add_subcommand("gen-fixtures", "Write a synthetic fixture directory");
  fs::path gen_out = "fixtures";
  uint64_t gen_seed = 0;
  int gen_frames = 24, gen_plane_res = 64, gen_plane_channels = 8;
  int gen_head_res = 128, gen_composite_res = pforge::kCompositeSize;
  gen->add_option("--out", gen_out, "Fixture directory");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--frames", gen_frames, "Frame count");
  gen->add_option("--plane-res", gen_plane_res, "Tri-plane resolution");
  gen->add_option("--plane-channels", gen_plane_channels, "Tri-plane channels");
  gen->add_option("--head-res", gen_head_res, "Head render resolution");
  gen->add_option("--composite-res", gen_composite_res, "Composite resolution");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run the full frame pipeline from a config");
  fs::path pipe_config;
  fs::path pipe_out_override;
  int pipe_jobs = -1, pipe_samples = -1, pipe_head_res = -1, pipe_composite_res = -1;
  int pipe_knn = -1;
  int64_t pipe_seed = -1;
  pipeline->add_option("--config", pipe_config, "Pipeline config JSON")->required();
  pipeline->add_option("--output-dir", pipe_out_override, "Override output directory");
  pipeline->add_option("--jobs", pipe_jobs, "Frame-parallel jobs (0 = auto)");
  pipeline->add_option("--samples", pipe_samples, "Samples per ray");
  pipeline->add_option("--seed", pipe_seed, "Jitter seed");
  pipeline->add_option("--head-res", pipe_head_res, "Head resolution");
  pipeline->add_option("--composite-res", pipe_composite_res, "Composite resolution");
  pipeline->add_option("--knn-k", pipe_knn, "Inpainting neighbor count");

  try {
    app.parse(argc, argv);

    if (fit->parsed())
      return run_fit(fit_model, fit_track, fit_camera, fit_out, fit_cfg);
    if (pncc->parsed()) return run_pncc(pncc_model, pncc_codes, pncc_res, pncc_out);
    if (render->parsed())
      return run_render(render_plane, render_diffs, render_decoder, render_traj,
                        render_sampling, render_res, render_out);
    if (inpaint->parsed()) return run_inpaint(inp_image, inp_mask, inp_k, inp_out);
    if (composite->parsed())
      return run_composite(cmp_head, cmp_head_mask, cmp_torso, cmp_torso_mask, cmp_bg,
                           cmp_size, cmp_out, cmp_person_out);
    if (metrics->parsed())
      return run_metrics(met_dir_a, met_dir_b, met_codes_a, met_codes_b, met_out);
    if (gen->parsed())
      return run_gen_fixtures(gen_out, gen_seed, gen_frames, gen_plane_res,
                              gen_plane_channels, gen_head_res, gen_composite_res);
    if (pipeline->parsed()) {
      pforge::PipelineConfig cfg = pforge::load_pipeline_config(pipe_config);
      // Flag > config > default.
      if (!pipe_out_override.empty()) cfg.output_dir = pipe_out_override;
      if (pipe_jobs >= 0) cfg.jobs = pipe_jobs;
      if (pipe_samples > 0) cfg.sampling.samples_per_ray = pipe_samples;
      if (pipe_seed >= 0) cfg.sampling.seed = static_cast<uint64_t>(pipe_seed);
      if (pipe_head_res > 0) cfg.head_resolution = pipe_head_res;
      if (pipe_composite_res > 0) cfg.composite_resolution = pipe_composite_res;
      if (pipe_knn > 0) cfg.knn_k = pipe_knn;
      const pforge::PipelineManifest manifest = pforge::run_pipeline(cfg);
      std::cout << "pipeline: " << manifest.frames << " frames";
      for (const auto& s : manifest.stages)
        std::cout << ", " << s.name << " " << static_cast<long>(s.milliseconds) << "ms";
      std::cout << " -> " << cfg.output_dir.string() << "\n";
      return kExitOk;
    }
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const pforge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case pforge::ErrorKind::Config: return kExitConfig;
      case pforge::ErrorKind::Data: return kExitData;
      case pforge::ErrorKind::Numeric: return kExitNumeric;
    }
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
