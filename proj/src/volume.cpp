// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/volume.hpp"

#include <cmath>
#include <random>

#include "pforge/parallel.hpp"

namespace pforge {

MlpDecoder MlpDecoder::zeros(int input_channels) {
  MlpDecoder d;
  d.w0 = Eigen::MatrixXd::Zero(kHiddenWidth, input_channels);
  d.b0 = Eigen::VectorXd::Zero(kHiddenWidth);
  d.w1 = Eigen::MatrixXd::Zero(kOutputs, kHiddenWidth);
  d.b1 = Eigen::VectorXd::Zero(kOutputs);
  return d;
}

void MlpDecoder::validate() const {
  if (w0.rows() != kHiddenWidth || b0.size() != kHiddenWidth)
    throw_data("MlpDecoder first layer must have width ", kHiddenWidth,
               ", got w0 ", w0.rows(), "x", w0.cols(), ", b0 ", b0.size());
  if (w1.rows() != kOutputs || w1.cols() != kHiddenWidth || b1.size() != kOutputs)
    throw_data("MlpDecoder second layer must be ", kOutputs, "x", kHiddenWidth,
               ", got w1 ", w1.rows(), "x", w1.cols(), ", b1 ", b1.size());
  if (w0.cols() < 1) throw_data("MlpDecoder needs at least one input channel");
}

void SamplingConfig::validate() const {
  if (samples_per_ray < 2)
    throw_data("SamplingConfig requires samples_per_ray >= 2, got ", samples_per_ray);
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Decoded decode_mlp(const MlpDecoder& d, const Eigen::VectorXd& feature) {
  if (feature.size() != d.w0.cols())
    throw_data("decode: feature length ", feature.size(),
               " does not match decoder input channels ", d.w0.cols());
  Eigen::VectorXd h = d.w0 * feature + d.b0;
  h = h.cwiseMax(0.0);  // ReLU
  const Eigen::Vector4d raw = d.w1 * h + d.b1;
  Decoded out;
  out.density = std::exp(raw[0]);
  out.color = Eigen::Vector3d(sigmoid(raw[1]), sigmoid(raw[2]), sigmoid(raw[3]));
  return out;
}

Decoded decode_analytic(const AnalyticDecoder& d, const Eigen::Vector3d& p) {
  Decoded out;
  out.color = d.color;
  switch (d.kind) {
    case AnalyticDecoder::Kind::ConstantSlab:
      out.density = (p.z() >= d.z_min && p.z() <= d.z_max) ? d.density : 0.0;
      break;
    case AnalyticDecoder::Kind::Sphere:
      out.density = ((p - d.center).norm() <= d.radius) ? d.density : 0.0;
      break;
    case AnalyticDecoder::Kind::GaussianBlob: {
      const double r2 = (p - d.center).squaredNorm();
      out.density = d.density * std::exp(-r2 / (2.0 * d.radius * d.radius));
      break;
    }
  }
  return out;
}

}  // namespace

Decoded decode(const RadianceDecoder& decoder, const Eigen::VectorXd& feature,
               const Eigen::Vector3d& point) {
  if (const auto* mlp = std::get_if<MlpDecoder>(&decoder)) return decode_mlp(*mlp, feature);
  if (const auto* analytic = std::get_if<AnalyticDecoder>(&decoder))
    return decode_analytic(*analytic, point);
  const auto& parts = std::get<UnionDecoder>(decoder).parts;
  Decoded out;
  Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
  for (const auto& part : parts) {
    const Decoded d = decode_analytic(part, point);
    out.density += d.density;
    weighted += d.density * d.color;
  }
  if (out.density > 0.0) out.color = weighted / out.density;
  return out;
}

RenderOutput render(const TriPlane& triplane, const RadianceDecoder& decoder,
                    const Camera& camera, const SamplingConfig& sampling,
                    int res_width, int res_height) {
  camera.validate();
  sampling.validate();
  if (const auto* mlp = std::get_if<MlpDecoder>(&decoder)) {
    mlp->validate();
    if (mlp->input_channels() != triplane.channels())
      throw_data("render: decoder expects ", mlp->input_channels(),
                 " channels but tri-plane has ", triplane.channels());
  }

  RenderOutput out;
  out.rgb = ColorImage(res_width, res_height, 3, 0.0f);
  out.mask = MaskImage(res_width, res_height, 1, 0.0f);
  out.depth = Image(res_width, res_height, 1, 0.0f);

  const std::vector<Ray> rays = generate_rays(camera, res_width, res_height);
  const int n = sampling.samples_per_ray;
  const bool jitter = sampling.stratified_jitter;
  // Analytic decoders ignore features; skip the tri-plane gather for them.
  const bool needs_features = std::holds_alternative<MlpDecoder>(decoder);

  parallel_chunks(res_height, [&](int row_begin, int row_end) {
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Eigen::VectorXd feature;
    for (int py = row_begin; py < row_end; ++py) {
      for (int px = 0; px < res_width; ++px) {
        const size_t pix = static_cast<size_t>(py) * res_width + px;
        const Ray& ray = rays[pix];
        const double delta = (ray.t_far - ray.t_near) / n;
        if (jitter) rng.seed(sampling.seed * 0x9e3779b97f4a7c15ULL + pix + 1);

        double transmittance = 1.0;
        double mask = 0.0;
        double depth_acc = 0.0;
        Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
        for (int i = 0; i < n; ++i) {
          const double offset = jitter ? uni(rng) : 0.5;
          const double t = ray.t_near + (i + offset) * delta;
          const Eigen::Vector3d p = ray.point_at(t);
          if (needs_features) feature = sample(triplane, p);
          const Decoded dec = decode(decoder, feature, p);
          if (!std::isfinite(dec.density) || !dec.color.allFinite())
            throw_numeric("render: non-finite decoder output at pixel (", px,
                          ",", py, ") sample ", i);
          const double alpha = 1.0 - std::exp(-dec.density * delta);
          const double weight = transmittance * alpha;
          rgb += weight * dec.color;
          mask += weight;
          depth_acc += weight * t;
          transmittance *= 1.0 - alpha;
        }
        const double depth = depth_acc / std::max(mask, 1e-8);
        // Telescoping keeps mask in [0,1]; trim accumulated rounding spill.
        mask = std::min(std::max(mask, 0.0), 1.0);
        out.rgb.at(px, py, 0) = static_cast<float>(rgb.x());
        out.rgb.at(px, py, 1) = static_cast<float>(rgb.y());
        out.rgb.at(px, py, 2) = static_cast<float>(rgb.z());
        out.mask.at(px, py) = static_cast<float>(mask);
        out.depth.at(px, py) = static_cast<float>(depth);
      }
    }
  });

  return out;
}

RenderOutput render_head(const TriPlane& cano, const DiffPlane& diff,
                         const RadianceDecoder& decoder, const Camera& camera,
                         const SamplingConfig& sampling, int res_width,
                         int res_height) {
  const TriPlane morphed = apply_motion(cano, diff);
  return render(morphed, decoder, camera, sampling, res_width, res_height);
}

}  // namespace pforge
