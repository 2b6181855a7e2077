// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/rasterizer.hpp"

#include <algorithm>
#include <cmath>

#include "pforge/parallel.hpp"

namespace pforge {

namespace {

struct ScreenTriangle {
  Eigen::Vector2d p0, p1, p2;
  double d0, d1, d2;  // camera-frame depths, all > 0
  double sign;        // orientation flip making the interior positive
  int x_min, x_max, y_min, y_max;  // inclusive pixel bounds
  int color_index;    // row into the vertex color matrix (triangle corners)
  int i0, i1, i2;
};

inline double edge_value(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                         double px, double py) {
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

// Tie rule for pixel centers exactly on an edge, with the interior on the
// positive side: accept top edges (horizontal, pointing +x) and left edges
// (pointing -y).
inline bool top_left_edge(double dx, double dy) {
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

inline bool edge_accepts(double e, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                         double sign) {
  if (e > 0.0) return true;
  if (e < 0.0) return false;
  return top_left_edge(sign * (b.x() - a.x()), sign * (b.y() - a.y()));
}

}  // namespace

PnccImage rasterize(const std::vector<Eigen::Vector3d>& vertices,
                    const std::vector<std::array<int, 3>>& triangles,
                    const Eigen::MatrixXd& vertex_colors,
                    const Camera& camera) {
  return rasterize(vertices, triangles, vertex_colors, camera, nullptr);
}

PnccImage rasterize(const std::vector<Eigen::Vector3d>& vertices,
                    const std::vector<std::array<int, 3>>& triangles,
                    const Eigen::MatrixXd& vertex_colors,
                    const Camera& camera,
                    std::vector<int>* winner_out) {
  camera.validate();
  if (vertex_colors.rows() != static_cast<Eigen::Index>(vertices.size()) ||
      vertex_colors.cols() != 3)
    throw_data("rasterize: vertex_colors must be ", vertices.size(), "x3, got ",
               vertex_colors.rows(), "x", vertex_colors.cols());

  const int w = camera.width;
  const int h = camera.height;
  PnccImage out;
  out.pixels = ColorImage(w, h, 3, 0.0f);
  out.coverage.assign(static_cast<size_t>(w) * h, 0);
  out.depth.assign(static_cast<size_t>(w) * h, PnccImage::kNoDepth);
  std::vector<int> winner(static_cast<size_t>(w) * h, -1);
  std::vector<double> zbuf(static_cast<size_t>(w) * h,
                           std::numeric_limits<double>::infinity());

  // Project once; triangles with any vertex behind the camera are dropped.
  std::vector<ProjectedPoint> projected;
  projected.reserve(vertices.size());
  {
    const Eigen::Matrix3d R = camera.pose.rotation();
    const Eigen::Vector3d& t = camera.pose.translation();
    for (const auto& v : vertices)
      projected.push_back(project_camera_point(camera, R * v + t));
  }

  std::vector<ScreenTriangle> tris;
  tris.reserve(triangles.size());
  for (size_t ti = 0; ti < triangles.size(); ++ti) {
    const auto& tri = triangles[ti];
    for (int idx : tri)
      if (idx < 0 || idx >= static_cast<int>(vertices.size()))
        throw_data("rasterize: triangle index ", idx, " out of range");
    const ProjectedPoint& a = projected[tri[0]];
    const ProjectedPoint& b = projected[tri[1]];
    const ProjectedPoint& c = projected[tri[2]];
    if (!a.in_front || !b.in_front || !c.in_front) continue;
    ScreenTriangle st;
    st.p0 = a.uv; st.p1 = b.uv; st.p2 = c.uv;
    st.d0 = a.depth; st.d1 = b.depth; st.d2 = c.depth;
    const double area2 = edge_value(st.p0, st.p1, st.p2.x(), st.p2.y());
    if (area2 == 0.0) continue;
    st.sign = area2 > 0.0 ? 1.0 : -1.0;
    const double lo_x = std::min({st.p0.x(), st.p1.x(), st.p2.x()});
    const double hi_x = std::max({st.p0.x(), st.p1.x(), st.p2.x()});
    const double lo_y = std::min({st.p0.y(), st.p1.y(), st.p2.y()});
    const double hi_y = std::max({st.p0.y(), st.p1.y(), st.p2.y()});
    st.x_min = std::max(0, static_cast<int>(std::ceil(lo_x - 0.5)));
    st.x_max = std::min(w - 1, static_cast<int>(std::floor(hi_x - 0.5)));
    st.y_min = std::max(0, static_cast<int>(std::ceil(lo_y - 0.5)));
    st.y_max = std::min(h - 1, static_cast<int>(std::floor(hi_y - 0.5)));
    if (st.x_min > st.x_max || st.y_min > st.y_max) continue;
    st.color_index = static_cast<int>(ti);
    st.i0 = tri[0]; st.i1 = tri[1]; st.i2 = tri[2];
    tris.push_back(st);
  }

  // Row bands are owned by one worker each; every band walks the triangle
  // list in index order, which keeps depth-tie resolution deterministic.
  parallel_chunks(h, [&](int row_begin, int row_end) {
    for (const ScreenTriangle& st : tris) {
      const int y0 = std::max(st.y_min, row_begin);
      const int y1 = std::min(st.y_max, row_end - 1);
      for (int py = y0; py <= y1; ++py) {
        const double cy = py + 0.5;
        for (int px = st.x_min; px <= st.x_max; ++px) {
          const double cx = px + 0.5;
          const double e0 = st.sign * edge_value(st.p1, st.p2, cx, cy);
          const double e1 = st.sign * edge_value(st.p2, st.p0, cx, cy);
          const double e2 = st.sign * edge_value(st.p0, st.p1, cx, cy);
          if (!edge_accepts(e0, st.p1, st.p2, st.sign) ||
              !edge_accepts(e1, st.p2, st.p0, st.sign) ||
              !edge_accepts(e2, st.p0, st.p1, st.sign))
            continue;
          const double area = e0 + e1 + e2;
          const double l0 = e0 / area;
          const double l1 = e1 / area;
          const double l2 = e2 / area;
          const double inv_depth = l0 / st.d0 + l1 / st.d1 + l2 / st.d2;
          const double depth = 1.0 / inv_depth;
          const size_t pix = static_cast<size_t>(py) * w + px;
          if (depth < zbuf[pix]) {
            zbuf[pix] = depth;
            winner[pix] = st.color_index;
            out.depth[pix] = static_cast<float>(depth);
            out.coverage[pix] = 1;
            for (int ch = 0; ch < 3; ++ch) {
              const double col = l0 * vertex_colors(st.i0, ch) +
                                 l1 * vertex_colors(st.i1, ch) +
                                 l2 * vertex_colors(st.i2, ch);
              out.pixels.at(px, py, ch) = static_cast<float>(col);
            }
          }
        }
      }
    }
  });

  if (winner_out) *winner_out = std::move(winner);
  return out;
}

Camera canonical_camera(int width, int height) {
  if (width <= 0 || height <= 0)
    throw_data("canonical_camera requires a positive resolution, got ", width,
               "x", height);
  Camera cam;
  cam.pose = FacePose(Eigen::Quaterniond::Identity(),
                      Eigen::Vector3d(0.0, 0.0, -kCanonicalRadius));
  cam.focal = static_cast<double>(std::min(width, height));
  cam.principal_point = Eigen::Vector2d(width * 0.5, height * 0.5);
  cam.width = width;
  cam.height = height;
  cam.near_plane = 0.1;
  cam.far_plane = kCanonicalRadius + 2.0;
  cam.radius = kCanonicalRadius;
  cam.validate();
  return cam;
}

PnccImage render_pncc(const MorphableModel& model, const IdentityCode& identity,
                      const ExpressionCode& expression, int resolution) {
  const auto vertices = reconstruct_vertices(model, identity, expression);
  return rasterize(vertices, model.triangles, model.ncc_colors,
                   canonical_camera(resolution, resolution));
}

std::vector<Eigen::Vector2d> project_keypoints(const MorphableModel& model,
                                               const IdentityCode& identity,
                                               const ExpressionCode& expression,
                                               const FacePose& pose,
                                               const Camera& camera,
                                               const std::string& set_name) {
  const auto vertices = reconstruct_vertices(model, identity, expression);
  const auto keypoints = select_keypoints(vertices, set_name, model);
  const auto posed = transform_points(pose, keypoints);
  std::vector<Eigen::Vector2d> out;
  out.reserve(posed.size());
  const Eigen::Matrix3d R = camera.pose.rotation();
  const Eigen::Vector3d& t = camera.pose.translation();
  for (const auto& p : posed)
    out.push_back(project_camera_point(camera, R * p + t).uv);
  return out;
}

}  // namespace pforge
