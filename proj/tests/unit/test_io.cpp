// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <random>

#include "pforge/io.hpp"
#include "pforge/testkit.hpp"
#include "test_util.hpp"

using namespace pforge;
namespace fs = std::filesystem;

namespace {

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("tensor round trip of a full-size plane is byte-identical") {
  const auto dir = pforge_test::temp_dir("tensor_roundtrip");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> uni(-2.0f, 2.0f);
  Tensor t;
  t.shape = {256, 256, 32};
  t.axis_labels = {"row", "col", "channel"};
  t.metadata["note"] = "roundtrip";
  t.data.resize(256 * 256 * 32);
  for (auto& v : t.data) v = uni(rng);

  write_tensor(dir / "a.pft", t);
  const Tensor back = read_tensor(dir / "a.pft");
  CHECK(back.shape == t.shape);
  CHECK(back.axis_labels == t.axis_labels);
  CHECK(back.metadata.at("note") == "roundtrip");
  CHECK(back.data == t.data);

  write_tensor(dir / "b.pft", back);
  CHECK(slurp(dir / "a.pft") == slurp(dir / "b.pft"));
}

TEST_CASE("scalar tensor has a 4-byte payload") {
  const auto dir = pforge_test::temp_dir("tensor_scalar");
  Tensor t;
  t.shape = {};
  t.axis_labels = {};
  t.data = {3.5f};
  write_tensor(dir / "s.pft", t);
  const Tensor back = read_tensor(dir / "s.pft");
  CHECK(back.data.size() == 1);
  CHECK(back.data[0] == 3.5f);

  const auto bytes = slurp(dir / "s.pft");
  const uint32_t header_len = static_cast<uint8_t>(bytes[4]) |
                              (static_cast<uint8_t>(bytes[5]) << 8) |
                              (static_cast<uint8_t>(bytes[6]) << 16) |
                              (static_cast<uint8_t>(bytes[7]) << 24);
  CHECK(bytes.size() == 8 + header_len + 4);
}

TEST_CASE("tensor loader reports distinct error kinds") {
  const auto dir = pforge_test::temp_dir("tensor_errors");
  Tensor t;
  t.shape = {2, 2};
  t.axis_labels = {"row", "col"};
  t.data = {1, 2, 3, 4};
  write_tensor(dir / "ok.pft", t);

  SUBCASE("bad magic") {
    auto bytes = slurp(dir / "ok.pft");
    bytes[0] = 'X';
    std::ofstream(dir / "bad_magic.pft", std::ios::binary)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      read_tensor(dir / "bad_magic.pft");
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(e.code() == IoCode::BadMagic);
    }
  }
  SUBCASE("truncated payload") {
    auto bytes = slurp(dir / "ok.pft");
    bytes.resize(bytes.size() - 6);
    std::ofstream(dir / "trunc.pft", std::ios::binary)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      read_tensor(dir / "trunc.pft");
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(e.code() == IoCode::Truncated);
    }
  }
  SUBCASE("payload longer than the shape") {
    auto bytes = slurp(dir / "ok.pft");
    bytes.insert(bytes.end(), {0, 0, 0, 0});
    std::ofstream(dir / "long.pft", std::ios::binary)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      read_tensor(dir / "long.pft");
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(e.code() == IoCode::ShapePayloadMismatch);
    }
  }
}

TEST_CASE("tri-plane loader rejects permuted axis labels, naming the expectation") {
  const auto dir = pforge_test::temp_dir("plane_labels");
  const TriPlane plane = testkit::make_random_triplane(5, 8, 2, 1.25, 1.0f);
  save_triplane(dir / "p.pft", plane);

  const TriPlane loaded = load_triplane(dir / "p.pft");
  CHECK(loaded.resolution() == 8);
  CHECK(loaded.channels() == 2);
  CHECK(loaded.extent() == doctest::Approx(1.25).epsilon(1e-15));
  for (int p = 0; p < 3; ++p) CHECK(loaded.plane(p) == plane.plane(p));

  Tensor t = read_tensor(dir / "p.pft");
  std::swap(t.axis_labels[1], t.axis_labels[2]);  // channel <-> row
  write_tensor(dir / "permuted.pft", t);
  try {
    load_triplane(dir / "permuted.pft");
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(e.code() == IoCode::AxisLabelMismatch);
    const std::string what = e.what();
    CHECK(what.find("plane") != std::string::npos);
    CHECK(what.find("channel") != std::string::npos);
  }
}

TEST_CASE("model container round trip preserves values and enforces invariants") {
  const auto dir = pforge_test::temp_dir("model_rt");
  testkit::SyntheticSpec spec;
  spec.seed = 21;
  spec.vertex_count = 700;
  const MorphableModel model = testkit::make_model(spec);
  save_model(dir / "model.json", model);
  const MorphableModel back = load_model(dir / "model.json");
  back.validate();
  CHECK(back.vertex_count() == model.vertex_count());
  CHECK(back.d_id() == model.d_id());
  CHECK(back.d_exp() == model.d_exp());
  CHECK(back.triangles == model.triangles);
  CHECK(back.keypoint_sets == model.keypoint_sets);
  // Tensors store f32; compare at that precision.
  CHECK((back.mean_vertices.cast<float>() - model.mean_vertices.cast<float>())
            .cwiseAbs()
            .maxCoeff() == 0.0f);
  CHECK((back.identity_basis.cast<float>() - model.identity_basis.cast<float>())
            .cwiseAbs()
            .maxCoeff() == 0.0f);
}

TEST_CASE("decoder manifests: mlp round trip and Table-4 shape enforcement") {
  const auto dir = pforge_test::temp_dir("decoder_rt");
  const MlpDecoder mlp = testkit::make_random_decoder(31, 8, 0.5);
  save_decoder(dir / "dec.json", mlp);
  const RadianceDecoder loaded = load_decoder(dir / "dec.json");
  const auto* back = std::get_if<MlpDecoder>(&loaded);
  REQUIRE(back != nullptr);
  CHECK(back->input_channels() == 8);
  CHECK((back->w0.cast<float>() - mlp.w0.cast<float>()).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((back->w1.cast<float>() - mlp.w1.cast<float>()).cwiseAbs().maxCoeff() == 0.0f);

  SUBCASE("hidden width other than 64 is rejected") {
    auto manifest = slurp(dir / "dec.json");
    std::string text(manifest.begin(), manifest.end());
    const auto pos = text.find("\"hidden_width\": 64");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"hidden_width\": 64").size(), "\"hidden_width\": 32");
    std::ofstream(dir / "bad.json") << text;
    try {
      load_decoder(dir / "bad.json");
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(e.code() == IoCode::SchemaViolation);
      CHECK(std::string(e.what()).find("64") != std::string::npos);
    }
  }
  SUBCASE("analytic round trip") {
    AnalyticDecoder slab;
    slab.kind = AnalyticDecoder::Kind::ConstantSlab;
    slab.density = 2.5;
    slab.z_min = -0.75;
    slab.z_max = 0.25;
    slab.color = Eigen::Vector3d(0.1, 0.2, 0.3);
    save_decoder(dir / "slab.json", slab);
    const RadianceDecoder loaded2 = load_decoder(dir / "slab.json");
    const auto* back2 = std::get_if<AnalyticDecoder>(&loaded2);
    REQUIRE(back2 != nullptr);
    CHECK(back2->density == 2.5);
    CHECK(back2->z_min == -0.75);
    CHECK(back2->color == Eigen::Vector3d(0.1, 0.2, 0.3));
  }
}

TEST_CASE("pose, camera and trajectory round trips") {
  const auto dir = pforge_test::temp_dir("pose_rt");
  const FacePose pose(
      Eigen::Quaterniond(Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 2, 3).normalized())),
      Eigen::Vector3d(0.1, -0.2, -2.6));
  save_pose(dir / "pose.json", pose);
  const FacePose back = load_pose(dir / "pose.json");
  CHECK((back.rotation() - pose.rotation()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(back.translation() == pose.translation());

  Camera cam = testkit::default_fit_camera();
  cam.radius = 3.1;
  save_camera(dir / "cam.json", cam);
  const Camera cam_back = load_camera(dir / "cam.json");
  CHECK(cam_back.focal == cam.focal);
  CHECK(cam_back.radius == cam.radius);

  SUBCASE("radius outside [2.4, 5.0] is rejected at load") {
    auto text = slurp(dir / "cam.json");
    std::string s(text.begin(), text.end());
    const auto pos = s.find("\"radius\": 3.1");
    REQUIRE(pos != std::string::npos);
    s.replace(pos, std::string("\"radius\": 3.1").size(), "\"radius\": 2.0");
    std::ofstream(dir / "bad_cam.json") << s;
    CHECK_THROWS_AS(load_camera(dir / "bad_cam.json"), IoError);
  }

  CameraTrajectory traj{cam, {pose, pose.inverse(), FacePose()}};
  save_trajectory(dir / "traj.json", traj);
  const CameraTrajectory traj_back = load_trajectory(dir / "traj.json");
  CHECK(traj_back.poses.size() == 3);
  CHECK(traj_back.poses[0].translation() == pose.translation());
}

TEST_CASE("fit result and track round trips are value-identical") {
  const auto dir = pforge_test::temp_dir("fit_rt");
  testkit::SyntheticSpec spec;
  spec.seed = 3;
  const auto traj = testkit::make_trajectory(spec, 4);

  FitResult fit;
  fit.identity = traj.identity;
  fit.expressions = traj.expressions;
  fit.poses = traj.poses;
  fit.final_rmse_px = 0.12345678901234567;
  fit.per_frame_rmse_px = {0.1, 0.2, 0.3, 0.4};
  fit.iterations_used = 17;
  save_fit_result(dir / "fit.json", fit);
  const FitResult back = load_fit_result(dir / "fit.json");
  CHECK(back.identity.values == fit.identity.values);
  REQUIRE(back.expressions.size() == 4);
  for (int t = 0; t < 4; ++t)
    CHECK(back.expressions[t].values == fit.expressions[t].values);
  CHECK(back.final_rmse_px == fit.final_rmse_px);
  CHECK(back.iterations_used == 17);

  const auto model = testkit::make_model(spec);
  const auto track =
      testkit::synthesize_landmarks(model, traj, testkit::default_fit_camera(), "kp68");
  save_track(dir / "track.json", track);
  const LandmarkTrack track_back = load_track(dir / "track.json");
  CHECK(track_back.set_name == "kp68");
  REQUIRE(track_back.frames.size() == track.frames.size());
  for (size_t t = 0; t < track.frames.size(); ++t)
    for (size_t k = 0; k < track.frames[t].size(); ++k)
      CHECK(track_back.frames[t][k] == track.frames[t][k]);

  std::vector<ExpressionCode> codes = traj.expressions;
  save_expression_sequence(dir / "codes.json", codes);
  const auto codes_back = load_expression_sequence(dir / "codes.json");
  REQUIRE(codes_back.size() == codes.size());
  for (size_t t = 0; t < codes.size(); ++t)
    CHECK(codes_back[t].values == codes[t].values);
}

TEST_CASE("png round trip preserves quantized values") {
  const auto dir = pforge_test::temp_dir("png_rt");
  // Start from already-quantized values so the round trip is exact.
  Image rgb = testkit::make_random_image(7, 20, 14, 3);
  for (auto& v : rgb.data())
    v = static_cast<float>(std::lround(v * 255.0f)) / 255.0f;
  write_png(dir / "rgb.png", rgb);
  const Image rgb_back = read_png(dir / "rgb.png");
  CHECK(rgb_back.channels() == 3);
  CHECK(pforge_test::images_equal(rgb, rgb_back));

  Image gray = testkit::make_random_image(8, 9, 9, 1);
  for (auto& v : gray.data())
    v = static_cast<float>(std::lround(v * 255.0f)) / 255.0f;
  write_png(dir / "gray.png", gray);
  const Image gray_back = read_png(dir / "gray.png");
  CHECK(gray_back.channels() == 1);
  CHECK(pforge_test::images_equal(gray, gray_back));

  SUBCASE("non-png input is a BadMagic error") {
    std::ofstream(dir / "not.png") << "hello";
    try {
      read_png(dir / "not.png");
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(e.code() == IoCode::BadMagic);
    }
  }
}

TEST_CASE("image/tensor bridge round trips") {
  const Image img = testkit::make_random_image(9, 6, 4, 3);
  const Tensor t = image_to_tensor(img);
  CHECK(t.shape == std::vector<int64_t>{4, 6, 3});
  const Image back = tensor_to_image(t);
  CHECK(pforge_test::images_equal(img, back));
}
