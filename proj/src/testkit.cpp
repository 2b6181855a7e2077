// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "pforge/io.hpp"

namespace pforge::testkit {

namespace {

constexpr double kPi = std::numbers::pi;

// Smooth random displacement field: a short sum of random-direction sinusoids
// evaluated at the vertex position. Low frequencies keep neighboring vertices
// moving together.
struct SmoothField {
  struct Wave {
    Eigen::Vector3d direction;
    Eigen::Vector3d frequency;
    double phase;
  };
  std::vector<Wave> waves;

  static SmoothField random(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> freq(0.5, 2.5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    SmoothField f;
    for (int m = 0; m < 3; ++m) {
      Wave w;
      w.direction = Eigen::Vector3d(uni(rng), uni(rng), uni(rng)).normalized();
      w.frequency = Eigen::Vector3d(freq(rng), freq(rng), freq(rng));
      w.phase = phase(rng);
      f.waves.push_back(w);
    }
    return f;
  }

  Eigen::Vector3d at(const Eigen::Vector3d& p) const {
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    for (const auto& w : waves)
      d += w.direction * std::sin(w.frequency.dot(p) + w.phase);
    return d / static_cast<double>(waves.size());
  }
};

}  // namespace

MorphableModel make_model(const SyntheticSpec& spec) {
  if (spec.vertex_count < 600)
    throw_data("make_model needs vertex_count >= 600 for the kp468 set, got ",
               spec.vertex_count);
  if (spec.d_id < 1 || spec.d_exp < 1)
    throw_data("make_model needs positive basis dimensions");

  std::mt19937_64 rng(spec.seed);

  // UV-sphere topology squashed into an ellipsoid head.
  const int rings = std::max(5, static_cast<int>(std::lround(std::sqrt(spec.vertex_count / 2.0))));
  const int segments = 2 * rings;
  const int n = rings * segments + 2;
  const Eigen::Vector3d radii(1.0, 1.15, 0.95);

  Eigen::VectorXd mean(3 * n);
  mean.segment<3>(0) = Eigen::Vector3d(0, radii.y(), 0);            // top pole
  mean.segment<3>(3 * (n - 1)) = Eigen::Vector3d(0, -radii.y(), 0); // bottom pole
  for (int r = 0; r < rings; ++r) {
    const double theta = kPi * (r + 1) / (rings + 1);  // from +y toward -y
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * kPi * s / segments;
      const Eigen::Vector3d p(radii.x() * std::sin(theta) * std::sin(phi),
                              radii.y() * std::cos(theta),
                              radii.z() * std::sin(theta) * std::cos(phi));
      mean.segment<3>(3 * (1 + r * segments + s)) = p;
    }
  }

  std::vector<std::array<int, 3>> triangles;
  auto ring_vertex = [&](int r, int s) { return 1 + r * segments + (s % segments); };
  for (int s = 0; s < segments; ++s)
    triangles.push_back({0, ring_vertex(0, s + 1), ring_vertex(0, s)});
  for (int r = 0; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      const int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      const int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      triangles.push_back({a, b, c});
      triangles.push_back({b, d, c});
    }
  }
  for (int s = 0; s < segments; ++s)
    triangles.push_back({n - 1, ring_vertex(rings - 1, s), ring_vertex(rings - 1, s + 1)});
  if (spec.triangle_count > 0 && static_cast<int>(triangles.size()) > spec.triangle_count)
    triangles.resize(spec.triangle_count);

  // Smooth random displacement columns with a small white-noise floor; the
  // floor keeps the column family full-rank so the conditioning step below
  // cannot blow up.
  std::normal_distribution<double> white(0.0, 0.25);
  auto raw_basis = [&](int dims) {
    Eigen::MatrixXd basis(3 * n, dims);
    for (int j = 0; j < dims; ++j) {
      const SmoothField field = SmoothField::random(rng);
      for (int v = 0; v < n; ++v)
        basis.block<3, 1>(3 * v, j) =
            field.at(mean.segment<3>(3 * v)) +
            Eigen::Vector3d(white(rng), white(rng), white(rng));
    }
    return basis;
  };

  MorphableModel model;
  model.mean_vertices = mean;
  model.identity_basis = raw_basis(spec.d_id);
  model.expression_basis = raw_basis(spec.d_exp);
  model.triangles = std::move(triangles);
  model.ncc_colors = compute_ncc(mean);

  // Keypoints prefer the +z (camera-facing) side; when a small mesh has too
  // few vertices past the threshold, the most front-facing ones fill in.
  auto pick_front = [&](double z_threshold, int count, const char* name) {
    std::vector<int> front;
    for (int v = 0; v < n; ++v)
      if (mean[3 * v + 2] > z_threshold) front.push_back(v);
    if (static_cast<int>(front.size()) < count) {
      std::vector<int> by_z(n);
      for (int v = 0; v < n; ++v) by_z[v] = v;
      std::stable_sort(by_z.begin(), by_z.end(), [&](int a, int b) {
        return mean[3 * a + 2] > mean[3 * b + 2];
      });
      if (n < count)
        throw_data("make_model: only ", n, " vertices for ", name);
      front.assign(by_z.begin(), by_z.begin() + count);
      std::sort(front.begin(), front.end());
    }
    std::vector<int> chosen;
    chosen.reserve(count);
    for (int i = 0; i < count; ++i)
      chosen.push_back(front[(static_cast<size_t>(i) * front.size()) / count]);
    return chosen;
  };
  model.keypoint_sets["kp68"] = pick_front(0.25, 68, "kp68");
  model.keypoint_sets["kp468"] = pick_front(0.0, 468, "kp468");

  // Condition the bases on the kp68 rows: QR-orthonormalize the restricted
  // columns jointly, map the mixing back onto the full mesh, then scale so a
  // unit code entry moves a keypoint coordinate by the amplitude on average.
  // Keeps columns smooth while making codes identifiable from landmarks.
  {
    const auto& kp = model.keypoint_sets["kp68"];
    const int rows = 3 * static_cast<int>(kp.size());
    const int total = spec.d_id + spec.d_exp;
    if (total <= rows) {
      Eigen::MatrixXd full(3 * n, total);
      full << model.identity_basis, model.expression_basis;
      Eigen::MatrixXd restricted(rows, total);
      for (size_t k = 0; k < kp.size(); ++k)
        restricted.middleRows(3 * k, 3) = full.middleRows(3 * kp[k], 3);
      const Eigen::HouseholderQR<Eigen::MatrixXd> qr(restricted);
      const Eigen::MatrixXd r_full =
          qr.matrixQR().topRows(total).triangularView<Eigen::Upper>();
      const Eigen::MatrixXd conditioned =
          r_full.triangularView<Eigen::Upper>()
              .solve<Eigen::OnTheRight>(full);  // full * R^{-1}
      const double root_rows = std::sqrt(static_cast<double>(rows));
      model.identity_basis =
          conditioned.leftCols(spec.d_id) * (spec.identity_amplitude * root_rows);
      model.expression_basis =
          conditioned.rightCols(spec.d_exp) * (spec.expression_amplitude * root_rows);
    }
  }

  model.validate();
  return model;
}

Camera default_fit_camera() {
  Camera cam;
  cam.pose = FacePose();  // identity extrinsics
  cam.focal = 440.0;
  cam.principal_point = Eigen::Vector2d(256.0, 256.0);
  cam.width = 512;
  cam.height = 512;
  cam.near_plane = 0.5;
  cam.far_plane = 6.0;
  return cam;
}

Trajectory make_trajectory(const SyntheticSpec& spec, int frames) {
  if (frames < 1) throw_data("make_trajectory needs at least one frame");
  std::mt19937_64 rng(spec.seed ^ 0x5eedf00dULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  Trajectory traj;
  traj.identity.values = Eigen::VectorXd::Zero(spec.d_id);
  for (int j = 0; j < std::min(spec.d_id, 10); ++j) traj.identity.values[j] = 0.4 * uni(rng);

  const int active = std::min(spec.d_exp, 8);
  std::vector<double> amp(active), cycles(active), phase(active);
  for (int j = 0; j < active; ++j) {
    amp[j] = 0.2 + 0.2 * std::abs(uni(rng));
    cycles[j] = 0.5 + 1.5 * std::abs(uni(rng));
    phase[j] = kPi * uni(rng);
  }

  for (int t = 0; t < frames; ++t) {
    const double tau = frames > 1 ? static_cast<double>(t) / (frames - 1) : 0.0;
    ExpressionCode e;
    e.values = Eigen::VectorXd::Zero(spec.d_exp);
    for (int j = 0; j < active; ++j)
      e.values[j] = amp[j] * std::sin(2.0 * kPi * cycles[j] * tau + phase[j]);
    traj.expressions.push_back(std::move(e));

    const double yaw = (2.0 * tau - 1.0) * 15.0 * kPi / 180.0;  // -15 to +15 deg
    const double pitch = 3.0 * kPi / 180.0 * std::sin(2.0 * kPi * tau);
    const double roll = 2.0 * kPi / 180.0 * std::sin(2.0 * kPi * tau + 1.0);
    const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
                                 Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()) *
                                 Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ());
    const Eigen::Vector3d t_pose(0.05 * std::sin(2.0 * kPi * tau),
                                 0.03 * std::cos(2.0 * kPi * tau),
                                 -2.7 + 0.1 * std::sin(kPi * tau));
    traj.poses.emplace_back(q, t_pose);
  }
  return traj;
}

LandmarkTrack synthesize_landmarks(const MorphableModel& model, const Trajectory& trajectory,
                                   const Camera& camera, const std::string& set_name) {
  if (trajectory.expressions.size() != trajectory.poses.size())
    throw_data("synthesize_landmarks: trajectory has ", trajectory.expressions.size(),
               " expressions but ", trajectory.poses.size(), " poses");
  LandmarkTrack track;
  track.set_name = set_name;
  for (size_t t = 0; t < trajectory.poses.size(); ++t)
    track.frames.push_back(project_keypoints(model, trajectory.identity,
                                             trajectory.expressions[t], trajectory.poses[t],
                                             camera, set_name));
  track.validate();
  return track;
}

AnalyticScene make_analytic_scene(const std::string& name) {
  AnalyticScene scene;
  scene.triplane = TriPlane(8, 4, 1.0);
  if (name == "slab") {
    scene.decoder.kind = AnalyticDecoder::Kind::ConstantSlab;
    scene.decoder.density = 1.0;
    scene.decoder.z_min = -0.5;
    scene.decoder.z_max = 0.5;
    scene.decoder.color = Eigen::Vector3d(1.0, 0.5, 0.25);
  } else if (name == "sphere") {
    scene.decoder.kind = AnalyticDecoder::Kind::Sphere;
    scene.decoder.density = 50.0;
    scene.decoder.center = Eigen::Vector3d::Zero();
    scene.decoder.radius = 0.8;
    scene.decoder.color = Eigen::Vector3d(0.2, 0.9, 0.4);
  } else if (name == "blob") {
    scene.decoder.kind = AnalyticDecoder::Kind::GaussianBlob;
    scene.decoder.density = 4.0;
    scene.decoder.center = Eigen::Vector3d::Zero();
    scene.decoder.radius = 0.35;
    scene.decoder.color = Eigen::Vector3d(0.9, 0.8, 0.1);
  } else {
    throw_data("unknown analytic scene '", name, "' (slab, sphere, blob)");
  }
  return scene;
}

TriPlane make_random_triplane(uint64_t seed, int resolution, int channels, double extent,
                              float amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(-amplitude, amplitude);
  TriPlane tp(resolution, channels, extent);
  for (int p = 0; p < TriPlane::kNumPlanes; ++p)
    for (auto& v : tp.plane(p)) v = uni(rng);
  return tp;
}

TriPlane make_dyadic_triplane(uint64_t seed, int resolution, int channels, double extent) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ticks(-4096, 4096);
  TriPlane tp(resolution, channels, extent);
  for (int p = 0; p < TriPlane::kNumPlanes; ++p)
    for (auto& v : tp.plane(p)) v = static_cast<float>(ticks(rng)) * 0x1p-12f;
  return tp;
}

MlpDecoder make_random_decoder(uint64_t seed, int channels, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  MlpDecoder d = MlpDecoder::zeros(channels);
  for (Eigen::Index i = 0; i < d.w0.size(); ++i) d.w0.data()[i] = gauss(rng);
  for (Eigen::Index i = 0; i < d.b0.size(); ++i) d.b0[i] = gauss(rng);
  for (Eigen::Index i = 0; i < d.w1.size(); ++i) d.w1.data()[i] = gauss(rng);
  for (Eigen::Index i = 0; i < d.b1.size(); ++i) d.b1[i] = gauss(rng);
  return d;
}

Image make_random_image(uint64_t seed, int width, int height, int channels) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  Image img(width, height, channels);
  for (auto& v : img.data()) v = uni(rng);
  return img;
}

std::vector<uint8_t> make_random_mask(uint64_t seed, int width, int height,
                                      double foreground_fraction) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<uint8_t> mask(static_cast<size_t>(width) * height);
  for (auto& m : mask) m = uni(rng) < foreground_fraction ? 1 : 0;
  return mask;
}

// ---------------------------------------------------------------------------
// Fixture sets

namespace {

std::string fixture_frame_name(const char* prefix, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", prefix, index, ext);
  return buf;
}

ColorImage fixture_background(int size) {
  ColorImage bg(size, size, 3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const float fx = static_cast<float>(x) / (size - 1);
      const float fy = static_cast<float>(y) / (size - 1);
      bg.at(x, y, 0) = 0.25f + 0.5f * fx;
      bg.at(x, y, 1) = 0.3f + 0.4f * fy;
      bg.at(x, y, 2) = 0.6f - 0.3f * fx * fy;
    }
  return bg;
}

void fixture_torso(int size, double sway, ColorImage& image, MaskImage& mask) {
  image = ColorImage(size, size, 3);
  mask = MaskImage(size, size, 1);
  const double cx = size * (0.5 + 0.02 * sway);
  const double cy = size * 0.95;
  const double rx = size * 0.33;
  const double ry = size * 0.45;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double nx = (x - cx) / rx;
      const double ny = (y - cy) / ry;
      const double r = nx * nx + ny * ny;
      mask.at(x, y) =
          r <= 1.0 ? 1.0f : (r <= 1.2 ? static_cast<float>((1.2 - r) / 0.2) : 0.0f);
      image.at(x, y, 0) = 0.45f + 0.1f * static_cast<float>(std::sin(6.0 * nx));
      image.at(x, y, 1) = 0.3f;
      image.at(x, y, 2) = 0.5f - 0.2f * static_cast<float>(y) / size;
    }
}

}  // namespace

void write_fixture_set(const std::filesystem::path& dir, const FixtureOptions& options) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  fs::create_directories(dir);

  SyntheticSpec spec;
  spec.seed = options.seed;

  const MorphableModel model = make_model(spec);
  save_model(dir / "model.json", model);

  const Trajectory traj = make_trajectory(spec, options.frames);
  const Camera camera = default_fit_camera();
  save_camera(dir / "camera.json", camera);
  save_track(dir / "track.json", synthesize_landmarks(model, traj, camera, "kp68"));

  // Ground truth doubles as a precomputed fit result (codes + poses).
  FitResult truth;
  truth.identity = traj.identity;
  truth.expressions = traj.expressions;
  truth.poses = traj.poses;
  truth.per_frame_rmse_px.assign(options.frames, 0.0);
  save_fit_result(dir / "fit_result.json", truth);
  save_trajectory(dir / "trajectory.json", CameraTrajectory{camera, traj.poses});

  save_triplane(dir / "cano.pft",
                make_random_triplane(options.seed + 1, options.plane_resolution,
                                     options.plane_channels, 1.0, 0.5f));
  json diff_list = json::array();
  for (int t = 0; t < options.frames; ++t) {
    const auto name = fixture_frame_name("diff", t, "pft");
    save_triplane(dir / name,
                  make_random_triplane(options.seed + 100 + t, options.plane_resolution,
                                       options.plane_channels, 1.0, 0.05f));
    diff_list.push_back(name);
  }

  MlpDecoder decoder = make_random_decoder(options.seed + 2, options.plane_channels, 0.4);
  // Pull the density bias down so the fog clumps instead of filling the
  // frustum; keeps head masks in the interesting mid range.
  decoder.b1[0] -= 3.0;
  save_decoder(dir / "decoder.json", decoder);

  write_png(dir / "background.png", fixture_background(options.composite_resolution));
  {
    const int size = options.composite_resolution;
    MaskImage person(size, size, 1);
    const double cx = size * 0.5, cy = size * 0.6, r = size * 0.25;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        person.at(x, y) = ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) ? 1.0f : 0.0f;
    write_png(dir / "background_mask.png", person);
  }

  json torso_images = json::array(), torso_masks = json::array();
  for (int t = 0; t < options.frames; ++t) {
    ColorImage image;
    MaskImage mask;
    const double tau =
        options.frames > 1 ? static_cast<double>(t) / (options.frames - 1) : 0.0;
    fixture_torso(options.composite_resolution, std::sin(2.0 * kPi * tau), image, mask);
    const auto img_name = fixture_frame_name("torso", t, "png");
    const auto mask_name = fixture_frame_name("torso_mask", t, "png");
    write_png(dir / img_name, image);
    write_png(dir / mask_name, mask);
    torso_images.push_back(img_name);
    torso_masks.push_back(mask_name);
  }

  json cfg;
  cfg["format"] = "portrait-forge-pipeline";
  cfg["model"] = "model.json";
  cfg["decoder"] = "decoder.json";
  cfg["cano_plane"] = "cano.pft";
  cfg["diff_planes"] = diff_list;
  cfg["torso_images"] = torso_images;
  cfg["torso_masks"] = torso_masks;
  cfg["background"] = "background.png";
  cfg["background_mask"] = "background_mask.png";
  cfg["trajectory"] = "trajectory.json";
  cfg["fit_result"] = "fit_result.json";
  cfg["head_resolution"] = options.head_resolution;
  cfg["composite_resolution"] = options.composite_resolution;
  cfg["pncc_resolution"] = options.head_resolution;
  cfg["sampling"] = {{"samples_per_ray", 64}, {"stratified_jitter", false}, {"seed", 0}};
  cfg["knn_k"] = 1;
  cfg["output_dir"] = "out";
  std::ofstream out(dir / "pipeline.json");
  if (!out) throw_data("cannot write pipeline config in ", dir.string());
  out << cfg.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

inline double oracle_edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double px,
                          double py) {
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

inline bool oracle_top_left(double dx, double dy) {
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

inline bool oracle_edge_accepts(double e, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                double sign) {
  if (e > 0.0) return true;
  if (e < 0.0) return false;
  return oracle_top_left(sign * (b.x() - a.x()), sign * (b.y() - a.y()));
}

}  // namespace

PnccImage brute_force_rasterize(const std::vector<Eigen::Vector3d>& vertices,
                                const std::vector<std::array<int, 3>>& triangles,
                                const Eigen::MatrixXd& vertex_colors, const Camera& camera,
                                std::vector<int>* winner_out) {
  camera.validate();
  const int w = camera.width;
  const int h = camera.height;
  PnccImage out;
  out.pixels = ColorImage(w, h, 3, 0.0f);
  out.coverage.assign(static_cast<size_t>(w) * h, 0);
  out.depth.assign(static_cast<size_t>(w) * h, PnccImage::kNoDepth);
  std::vector<int> winner(static_cast<size_t>(w) * h, -1);

  std::vector<ProjectedPoint> projected;
  const Eigen::Matrix3d rot = camera.pose.rotation();
  const Eigen::Vector3d& tr = camera.pose.translation();
  for (const auto& v : vertices)
    projected.push_back(project_camera_point(camera, rot * v + tr));

  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const double cx = px + 0.5;
      const double cy = py + 0.5;
      double best_depth = std::numeric_limits<double>::infinity();
      int best_tri = -1;
      Eigen::Vector3d best_color = Eigen::Vector3d::Zero();

      for (size_t ti = 0; ti < triangles.size(); ++ti) {
        const auto& tri = triangles[ti];
        const ProjectedPoint& a = projected[tri[0]];
        const ProjectedPoint& b = projected[tri[1]];
        const ProjectedPoint& c = projected[tri[2]];
        if (!a.in_front || !b.in_front || !c.in_front) continue;
        const double area2 = oracle_edge(a.uv, b.uv, c.uv.x(), c.uv.y());
        if (area2 == 0.0) continue;
        const double sign = area2 > 0.0 ? 1.0 : -1.0;
        const double e0 = sign * oracle_edge(b.uv, c.uv, cx, cy);
        const double e1 = sign * oracle_edge(c.uv, a.uv, cx, cy);
        const double e2 = sign * oracle_edge(a.uv, b.uv, cx, cy);
        if (!oracle_edge_accepts(e0, b.uv, c.uv, sign) ||
            !oracle_edge_accepts(e1, c.uv, a.uv, sign) ||
            !oracle_edge_accepts(e2, a.uv, b.uv, sign))
          continue;
        const double area = e0 + e1 + e2;
        const double l0 = e0 / area;
        const double l1 = e1 / area;
        const double l2 = e2 / area;
        const double depth = 1.0 / (l0 / a.depth + l1 / b.depth + l2 / c.depth);
        if (depth < best_depth) {
          best_depth = depth;
          best_tri = static_cast<int>(ti);
          for (int ch = 0; ch < 3; ++ch)
            best_color[ch] = l0 * vertex_colors(tri[0], ch) +
                             l1 * vertex_colors(tri[1], ch) +
                             l2 * vertex_colors(tri[2], ch);
        }
      }

      if (best_tri >= 0) {
        const size_t pix = static_cast<size_t>(py) * w + px;
        out.coverage[pix] = 1;
        out.depth[pix] = static_cast<float>(best_depth);
        winner[pix] = best_tri;
        for (int ch = 0; ch < 3; ++ch)
          out.pixels.at(px, py, ch) = static_cast<float>(best_color[ch]);
      }
    }
  }
  if (winner_out) *winner_out = std::move(winner);
  return out;
}

ColorImage brute_force_knn(const SegmentedImage& seg, int k) {
  seg.validate();
  const int w = seg.image.width();
  const int h = seg.image.height();

  struct Site {
    int64_t dist2;
    int64_t index;
    bool operator<(const Site& o) const {
      return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index;
    }
  };

  std::vector<int64_t> background;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!seg.foreground[static_cast<size_t>(y) * w + x])
        background.push_back(static_cast<int64_t>(y) * w + x);
  if (background.empty()) throw_data("brute_force_knn: no background pixels");
  if (static_cast<size_t>(k) > background.size())
    throw_data("brute_force_knn: k exceeds background count");

  ColorImage out = seg.image;
  std::vector<Site> sites;
  sites.reserve(background.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!seg.foreground[static_cast<size_t>(y) * w + x]) continue;
      sites.clear();
      for (int64_t idx : background) {
        const int64_t sy = idx / w, sx = idx % w;
        const int64_t dx = sx - x, dy = sy - y;
        sites.push_back(Site{dx * dx + dy * dy, idx});
      }
      std::partial_sort(sites.begin(), sites.begin() + k, sites.end());
      double acc[3] = {0.0, 0.0, 0.0};
      for (int i = 0; i < k; ++i) {
        const int sy = static_cast<int>(sites[i].index / w);
        const int sx = static_cast<int>(sites[i].index % w);
        for (int c = 0; c < 3; ++c) acc[c] += seg.image.at(sx, sy, c);
      }
      if (k == 1) {
        const int sy = static_cast<int>(sites[0].index / w);
        const int sx = static_cast<int>(sites[0].index % w);
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = seg.image.at(sx, sy, c);
      } else {
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(acc[c] / k);
      }
    }
  }
  return out;
}

Eigen::VectorXd brute_force_sample(const TriPlane& tp, const Eigen::Vector3d& point,
                                   PlaneAggregation aggregation) {
  const int r = tp.resolution();
  Eigen::VectorXd feature = Eigen::VectorXd::Zero(tp.channels());
  const double coords[3][2] = {{point.x(), point.y()},
                               {point.x(), point.z()},
                               {point.y(), point.z()}};
  for (int p = 0; p < TriPlane::kNumPlanes; ++p) {
    double u = (coords[p][0] / tp.extent() * 0.5 + 0.5) * (r - 1);
    double v = (coords[p][1] / tp.extent() * 0.5 + 0.5) * (r - 1);
    u = std::clamp(u, 0.0, static_cast<double>(r - 1));
    v = std::clamp(v, 0.0, static_cast<double>(r - 1));
    const int u0 = std::min(static_cast<int>(u), r - 2);
    const int v0 = std::min(static_cast<int>(v), r - 2);
    const double fu = u - u0;
    const double fv = v - v0;
    for (int ch = 0; ch < tp.channels(); ++ch) {
      const double top = (1.0 - fu) * tp.at(p, ch, v0, u0) + fu * tp.at(p, ch, v0, u0 + 1);
      const double bot = (1.0 - fu) * tp.at(p, ch, v0 + 1, u0) + fu * tp.at(p, ch, v0 + 1, u0 + 1);
      feature[ch] += (1.0 - fv) * top + fv * bot;
    }
  }
  if (aggregation == PlaneAggregation::Mean) feature /= 3.0;
  return feature;
}

}  // namespace pforge::testkit
