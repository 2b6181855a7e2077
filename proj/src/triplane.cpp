// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/triplane.hpp"

#include <algorithm>
#include <cmath>

namespace pforge {

TriPlane::TriPlane(int resolution, int channels, double extent, float fill)
    : resolution_(resolution), channels_(channels), extent_(extent) {
  if (resolution < 2) throw_data("TriPlane resolution must be >= 2, got ", resolution);
  if (channels < 1) throw_data("TriPlane channels must be >= 1, got ", channels);
  if (!(extent > 0.0)) throw_data("TriPlane extent must be positive, got ", extent);
  for (auto& p : planes_)
    p.assign(static_cast<size_t>(channels) * resolution * resolution, fill);
}

namespace {

// Maps [-extent, extent] to [0, R-1] with border clamp ("align corners").
inline double grid_coord(double v, double extent, int resolution) {
  const double u = (v / extent * 0.5 + 0.5) * (resolution - 1);
  return std::clamp(u, 0.0, static_cast<double>(resolution - 1));
}

}  // namespace

Eigen::VectorXd sample(const TriPlane& tp, const Eigen::Vector3d& point,
                       PlaneAggregation aggregation) {
  const int r = tp.resolution();
  const int c = tp.channels();
  Eigen::VectorXd feature = Eigen::VectorXd::Zero(c);

  // Plane p takes its (col, row) axes from the point: xy -> (x, y),
  // xz -> (x, z), yz -> (y, z).
  static constexpr int kColAxis[3] = {0, 0, 1};
  static constexpr int kRowAxis[3] = {1, 2, 2};

  for (int p = 0; p < TriPlane::kNumPlanes; ++p) {
    const double u = grid_coord(point[kColAxis[p]], tp.extent(), r);
    const double v = grid_coord(point[kRowAxis[p]], tp.extent(), r);
    const int u0 = std::min(static_cast<int>(u), r - 2);
    const int v0 = std::min(static_cast<int>(v), r - 2);
    const double fu = u - u0;
    const double fv = v - v0;
    const double w00 = (1.0 - fu) * (1.0 - fv);
    const double w10 = fu * (1.0 - fv);
    const double w01 = (1.0 - fu) * fv;
    const double w11 = fu * fv;
    for (int ch = 0; ch < c; ++ch) {
      feature[ch] += w00 * tp.at(p, ch, v0, u0) + w10 * tp.at(p, ch, v0, u0 + 1) +
                     w01 * tp.at(p, ch, v0 + 1, u0) + w11 * tp.at(p, ch, v0 + 1, u0 + 1);
    }
  }
  if (aggregation == PlaneAggregation::Mean)
    feature /= static_cast<double>(TriPlane::kNumPlanes);
  return feature;
}

TriPlane apply_motion(const TriPlane& cano, const DiffPlane& diff) {
  if (!cano.same_shape(diff))
    throw_data("apply_motion shape mismatch: cano ", cano.resolution(), "x",
               cano.resolution(), "x", cano.channels(), " vs diff ",
               diff.resolution(), "x", diff.resolution(), "x", diff.channels());
  TriPlane out = cano;
  for (int p = 0; p < TriPlane::kNumPlanes; ++p) {
    auto& dst = out.plane(p);
    const auto& add = diff.plane(p);
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += add[i];
  }
  return out;
}

double diffplane_laplacian(const DiffPlane& d_prev, const DiffPlane& d_curr,
                           const DiffPlane& d_next) {
  if (!d_prev.same_shape(d_curr) || !d_curr.same_shape(d_next))
    throw_data("diffplane_laplacian shape mismatch: ", d_prev.resolution(), "/",
               d_curr.resolution(), "/", d_next.resolution(), " resolutions, ",
               d_prev.channels(), "/", d_curr.channels(), "/",
               d_next.channels(), " channels");
  double sum = 0.0;
  size_t count = 0;
  for (int p = 0; p < TriPlane::kNumPlanes; ++p) {
    const auto& a = d_prev.plane(p);
    const auto& b = d_curr.plane(p);
    const auto& c = d_next.plane(p);
    for (size_t i = 0; i < b.size(); ++i) {
      const double second = static_cast<double>(b[i]) - 0.5 * (static_cast<double>(a[i]) + c[i]);
      sum += second * second;
    }
    count += b.size();
  }
  return sum / static_cast<double>(count);
}

}  // namespace pforge
