// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>

#include "pforge/compositor.hpp"
#include "pforge/inpaint.hpp"
#include "pforge/io.hpp"
#include "pforge/pipeline.hpp"
#include "pforge/testkit.hpp"
#include "test_util.hpp"

using namespace pforge;
namespace fs = std::filesystem;
namespace tk = pforge::testkit;

namespace {

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

tk::FixtureOptions small_options() {
  tk::FixtureOptions o;
  o.seed = 3;
  o.frames = 2;
  o.plane_resolution = 16;
  o.plane_channels = 4;
  o.head_resolution = 32;
  o.composite_resolution = 64;
  return o;
}

}  // namespace

TEST_CASE("pipeline: config loading resolves paths and honors overrides") {
  const auto dir = pforge_test::temp_dir("pipe_cfg");
  tk::write_fixture_set(dir, small_options());
  PipelineConfig cfg = load_pipeline_config(dir / "pipeline.json");
  CHECK(cfg.model_path == dir / "model.json");
  CHECK(cfg.head_resolution == 32);
  CHECK(cfg.composite_resolution == 64);
  CHECK(cfg.knn_k == 1);
  cfg.output_dir = dir / "out";
  cfg.validate();
}

TEST_CASE("pipeline: rerun with identical inputs is byte-identical") {
  const auto dir = pforge_test::temp_dir("pipe_det");
  tk::write_fixture_set(dir, small_options());
  PipelineConfig cfg = load_pipeline_config(dir / "pipeline.json");

  cfg.output_dir = dir / "out_a";
  const PipelineManifest m1 = run_pipeline(cfg);
  cfg.output_dir = dir / "out_b";
  const PipelineManifest m2 = run_pipeline(cfg);
  CHECK(m1.frames == 2);
  REQUIRE(m1.stages.size() == m2.stages.size());

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "out_a")) {
    const auto name = entry.path().filename();
    if (name == "run_manifest.json") continue;  // timings differ
    CHECK(slurp(entry.path()) == slurp(dir / "out_b" / name));
    ++compared;
  }
  CHECK(compared > 10);
}

TEST_CASE("pipeline: equals the manual chaining of its stages") {
  const auto dir = pforge_test::temp_dir("pipe_chain");
  tk::write_fixture_set(dir, small_options());
  PipelineConfig cfg = load_pipeline_config(dir / "pipeline.json");
  cfg.output_dir = dir / "out";
  run_pipeline(cfg);

  // Rebuild frame 0 by hand from the stage outputs on disk.
  Layer head{read_png(dir / "out" / "head_0000.png"),
             read_png(dir / "out" / "head_mask_0000.png")};
  Layer torso{read_png(dir / "torso_0000.png"), read_png(dir / "torso_mask_0000.png")};
  Layer bg{read_png(dir / "out" / "background_inpainted.png"), std::nullopt};
  const CompositeFrame frame = fuse(head, torso, bg, cfg.composite_resolution);

  const auto tmp = dir / "manual_frame.png";
  write_png(tmp, frame.image);
  CHECK(slurp(tmp) == slurp(dir / "out" / "frame_0000.png"));

  // The inpaint stage matches a direct library call on the same inputs.
  SegmentedImage seg;
  seg.image = read_png(dir / "background.png");
  const Image mask = read_png(dir / "background_mask.png");
  seg.foreground.resize(mask.data().size());
  for (size_t i = 0; i < seg.foreground.size(); ++i)
    seg.foreground[i] = mask.data()[i] > 0.5f ? 1 : 0;
  const ColorImage inpainted = knn_inpaint(seg, cfg.knn_k);
  write_png(dir / "manual_bg.png", inpainted);
  CHECK(slurp(dir / "manual_bg.png") == slurp(dir / "out" / "background_inpainted.png"));
}

TEST_CASE("pipeline: missing decoder file is a config error naming the path") {
  const auto dir = pforge_test::temp_dir("pipe_missing");
  tk::write_fixture_set(dir, small_options());
  fs::remove(dir / "decoder.json");
  PipelineConfig cfg = load_pipeline_config(dir / "pipeline.json");
  cfg.output_dir = dir / "out";
  try {
    run_pipeline(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("decoder.json") != std::string::npos);
  }
}

TEST_CASE("pipeline: too few torso layers is a config error") {
  const auto dir = pforge_test::temp_dir("pipe_short");
  tk::write_fixture_set(dir, small_options());
  PipelineConfig cfg = load_pipeline_config(dir / "pipeline.json");
  cfg.output_dir = dir / "out";
  cfg.torso_image_paths.pop_back();
  cfg.torso_mask_paths.pop_back();
  CHECK_THROWS_AS(run_pipeline(cfg), Error);
}

TEST_CASE("pipeline: frame parallelism does not change bytes") {
  const auto dir = pforge_test::temp_dir("pipe_jobs");
  tk::write_fixture_set(dir, small_options());
  PipelineConfig cfg = load_pipeline_config(dir / "pipeline.json");
  cfg.output_dir = dir / "out_serial";
  cfg.jobs = 1;
  run_pipeline(cfg);
  cfg.output_dir = dir / "out_par";
  cfg.jobs = 4;
  run_pipeline(cfg);
  for (const auto& entry : fs::directory_iterator(dir / "out_serial")) {
    const auto name = entry.path().filename();
    if (name == "run_manifest.json") continue;
    CHECK(slurp(entry.path()) == slurp(dir / "out_par" / name));
  }
}

TEST_CASE("pipeline: fit path produces a usable fit result") {
  const auto dir = pforge_test::temp_dir("pipe_fit");
  auto options = small_options();
  tk::write_fixture_set(dir, options);
  PipelineConfig cfg = load_pipeline_config(dir / "pipeline.json");
  cfg.track_path = dir / "track.json";
  cfg.fit_config.max_iterations = 40;
  cfg.output_dir = dir / "out";
  const PipelineManifest manifest = run_pipeline(cfg);
  REQUIRE(manifest.stages.size() == 5);
  CHECK(manifest.stages[0].name == "fit");
  const FitResult fit = load_fit_result(dir / "out" / "fit_result.json");
  CHECK(fit.final_rmse_px < 0.5);
}
