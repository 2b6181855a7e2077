// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "pforge/camera.hpp"
#include "pforge/image.hpp"
#include "pforge/morphable.hpp"

namespace pforge_test {

inline uint64_t fnv1a(const void* data, size_t bytes) {
  const auto* p = static_cast<const uint8_t*>(data);
  uint64_t h = 1469598103934665603ULL;
  for (size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline uint64_t hash_pncc(const pforge::PnccImage& img) {
  uint64_t h = fnv1a(img.pixels.data().data(), img.pixels.data().size() * sizeof(float));
  h ^= fnv1a(img.coverage.data(), img.coverage.size());
  h ^= fnv1a(img.depth.data(), img.depth.size() * sizeof(float));
  return h;
}

// Two-vertex-basis toy model small enough for hand computation.
inline pforge::MorphableModel tiny_model() {
  pforge::MorphableModel m;
  m.mean_vertices = Eigen::VectorXd::Zero(12);  // 4 vertices at origin-ish
  m.mean_vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1;
  m.identity_basis = Eigen::MatrixXd::Zero(12, 2);
  m.identity_basis(0, 0) = 1.0;   // id[0] moves v0.x
  m.identity_basis(4, 1) = 1.0;   // id[1] moves v1.y
  m.expression_basis = Eigen::MatrixXd::Zero(12, 1);
  m.expression_basis(11, 0) = 1.0;  // e[0] moves v3.z
  m.triangles = {{0, 1, 2}, {1, 3, 2}};
  m.ncc_colors = pforge::compute_ncc(m.mean_vertices);
  m.keypoint_sets["all"] = {0, 1, 2, 3};
  m.keypoint_sets["pair"] = {2, 0};
  return m;
}

struct RandomScene {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
  Eigen::MatrixXd colors;
  pforge::Camera camera;
};

// Triangles scattered inside the view frustum of a small camera; used by the
// rasterizer equivalence suites.
inline RandomScene random_scene(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size_dist(8, 64);
  std::uniform_int_distribution<int> tri_dist(1, 50);
  std::uniform_real_distribution<double> xy(-1.2, 1.2);
  std::uniform_real_distribution<double> z(-1.0, 1.0);
  std::uniform_real_distribution<double> color(0.0, 1.0);

  RandomScene scene;
  const int tris = tri_dist(rng);
  const int verts = 3 * tris;
  scene.colors.resize(verts, 3);
  for (int v = 0; v < verts; ++v) {
    scene.vertices.emplace_back(xy(rng), xy(rng), z(rng));
    for (int c = 0; c < 3; ++c) scene.colors(v, c) = color(rng);
  }
  for (int t = 0; t < tris; ++t) scene.triangles.push_back({3 * t, 3 * t + 1, 3 * t + 2});

  const int w = size_dist(rng);
  const int h = size_dist(rng);
  scene.camera.pose = pforge::FacePose(Eigen::Quaterniond::Identity(),
                                       Eigen::Vector3d(0, 0, -2.7));
  scene.camera.focal = 0.9 * std::min(w, h);
  scene.camera.principal_point = Eigen::Vector2d(w * 0.5, h * 0.5);
  scene.camera.width = w;
  scene.camera.height = h;
  scene.camera.near_plane = 0.2;
  scene.camera.far_plane = 8.0;
  return scene;
}

inline bool images_equal(const pforge::Image& a, const pforge::Image& b) {
  return a.same_shape(b) && a.data() == b.data();
}

inline std::filesystem::path temp_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "pforge_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pforge_test
