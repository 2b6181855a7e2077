// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/fitting.hpp"

#include <algorithm>
#include <cmath>

namespace pforge {

void LandmarkTrack::validate() const {
  if (frames.empty()) throw_data("LandmarkTrack has no frames");
  const size_t count = frames.front().size();
  if (count == 0) throw_data("LandmarkTrack frames have no landmarks");
  for (size_t t = 0; t < frames.size(); ++t)
    if (frames[t].size() != count)
      throw_data("LandmarkTrack frame ", t, " has ", frames[t].size(),
                 " landmarks, expected ", count);
  if (!visibility.empty()) {
    if (visibility.size() != frames.size())
      throw_data("LandmarkTrack visibility has ", visibility.size(),
                 " frames, expected ", frames.size());
    for (size_t t = 0; t < visibility.size(); ++t)
      if (visibility[t].size() != count)
        throw_data("LandmarkTrack visibility frame ", t, " has ",
                   visibility[t].size(), " flags, expected ", count);
  }
}

void FitConfig::validate() const {
  if (lambda_identity < 0 || lambda_expression < 0 || lambda_laplacian < 0)
    throw_data("FitConfig regularization weights must be >= 0");
  if (!(std::isfinite(lambda_identity) && std::isfinite(lambda_expression) &&
        std::isfinite(lambda_laplacian)))
    throw_data("FitConfig regularization weights must be finite");
  if (max_iterations < 1) throw_data("FitConfig max_iterations must be >= 1");
  if (!(convergence_tol > 0)) throw_data("FitConfig convergence_tol must be > 0");
  if (!(damping_init > 0)) throw_data("FitConfig damping_init must be > 0");
}

FacePose apply_pose_delta(const FacePose& pose, const Eigen::Vector3d& omega,
                          const Eigen::Vector3d& delta_t) {
  const double angle = omega.norm();
  Eigen::Quaterniond dq = Eigen::Quaterniond::Identity();
  if (angle > 0.0)
    dq = Eigen::Quaterniond(Eigen::AngleAxisd(angle, omega / angle));
  return FacePose(dq * pose.rotation_quat(), pose.translation() + delta_t);
}

namespace {

// Model restricted to one keypoint set; the fitting hot path never touches
// full-mesh bases.
struct KeypointModel {
  Eigen::VectorXd mean;   // 3K
  Eigen::MatrixXd b_id;   // 3K x D_id
  Eigen::MatrixXd b_exp;  // 3K x D_exp
  int count = 0;
};

KeypointModel restrict_model(const MorphableModel& model, const std::string& set_name) {
  const auto& indices = keypoint_indices(model, set_name);
  KeypointModel kp;
  kp.count = static_cast<int>(indices.size());
  kp.mean.resize(3 * kp.count);
  kp.b_id.resize(3 * kp.count, model.identity_basis.cols());
  kp.b_exp.resize(3 * kp.count, model.expression_basis.cols());
  for (int k = 0; k < kp.count; ++k) {
    const int v = indices[k];
    kp.mean.segment<3>(3 * k) = model.mean_vertices.segment<3>(3 * v);
    kp.b_id.middleRows(3 * k, 3) = model.identity_basis.middleRows(3 * v, 3);
    kp.b_exp.middleRows(3 * k, 3) = model.expression_basis.middleRows(3 * v, 3);
  }
  return kp;
}

Eigen::VectorXd keypoint_positions(const KeypointModel& kp, const Eigen::VectorXd& id,
                                   const Eigen::VectorXd& exp) {
  Eigen::VectorXd v = kp.mean;
  if (id.size() > 0) v += kp.b_id * id;
  if (exp.size() > 0) v += kp.b_exp * exp;
  return v;
}

struct FrameEval {
  Eigen::VectorXd residuals;  // 2K, zeros where invalid
  Eigen::MatrixXd j_pose;     // 2K x 6
  Eigen::MatrixXd j_id;       // 2K x D_id
  Eigen::MatrixXd j_exp;      // 2K x D_exp
  int valid_count = 0;        // landmarks contributing residuals
};

// Residuals and (optionally) analytic Jacobians for one frame. The local pose
// parameterization matches apply_pose_delta.
FrameEval evaluate_frame(const KeypointModel& kp, const Camera& camera,
                         const Eigen::VectorXd& id, const Eigen::VectorXd& exp,
                         const FacePose& pose,
                         const std::vector<Eigen::Vector2d>& landmarks,
                         const std::vector<uint8_t>& visibility,
                         bool with_jacobian) {
  if (static_cast<int>(landmarks.size()) != kp.count)
    throw_data("landmark count ", landmarks.size(),
               " does not match keypoint set size ", kp.count);
  if (!visibility.empty() && visibility.size() != landmarks.size())
    throw_data("visibility count ", visibility.size(),
               " does not match landmark count ", landmarks.size());

  const int k_count = kp.count;
  const int d_id = static_cast<int>(kp.b_id.cols());
  const int d_exp = static_cast<int>(kp.b_exp.cols());

  FrameEval ev;
  ev.residuals = Eigen::VectorXd::Zero(2 * k_count);
  if (with_jacobian) {
    ev.j_pose = Eigen::MatrixXd::Zero(2 * k_count, 6);
    ev.j_id = Eigen::MatrixXd::Zero(2 * k_count, d_id);
    ev.j_exp = Eigen::MatrixXd::Zero(2 * k_count, d_exp);
  }

  const Eigen::VectorXd verts = keypoint_positions(kp, id, exp);
  const Eigen::Matrix3d r_pose = pose.rotation();
  const Eigen::Vector3d& t_pose = pose.translation();
  const Eigen::Matrix3d r_cam = camera.pose.rotation();
  const Eigen::Vector3d& t_cam = camera.pose.translation();
  const Eigen::Matrix3d r_eff = r_cam * r_pose;

  for (int k = 0; k < k_count; ++k) {
    if (!visibility.empty() && visibility[k] == 0) continue;
    const Eigen::Vector3d v = verts.segment<3>(3 * k);
    const Eigen::Vector3d rv = r_pose * v;              // rotated, pre-translation
    const Eigen::Vector3d q = rv + t_pose;              // world frame
    const Eigen::Vector3d p = r_cam * q + t_cam;        // camera frame
    const double depth = -p.z();
    if (depth <= 0.0) continue;  // behind camera: invalid, zero weight
    ev.valid_count += 1;

    const double inv_d = 1.0 / depth;
    const double u = camera.focal * p.x() * inv_d + camera.principal_point.x();
    const double vv = camera.focal * p.y() * inv_d + camera.principal_point.y();
    ev.residuals[2 * k] = u - landmarks[k].x();
    ev.residuals[2 * k + 1] = vv - landmarks[k].y();

    if (!with_jacobian) continue;

    // d(u,v)/d(p_cam); depth = -z so the z column picks up a sign flip twice.
    Eigen::Matrix<double, 2, 3> duv_dp;
    duv_dp << camera.focal * inv_d, 0.0, camera.focal * p.x() * inv_d * inv_d,
              0.0, camera.focal * inv_d, camera.focal * p.y() * inv_d * inv_d;

    // Rotation perturbation acts on R*v only: d(exp([w]x) R v)/dw = -[Rv]_x.
    Eigen::Matrix3d skew_rv;
    skew_rv << 0, -rv.z(), rv.y(),
               rv.z(), 0, -rv.x(),
               -rv.y(), rv.x(), 0;
    const Eigen::Matrix<double, 2, 3> duv_dw = duv_dp * (r_cam * (-skew_rv));
    const Eigen::Matrix<double, 2, 3> duv_dt = duv_dp * r_cam;
    ev.j_pose.block<2, 3>(2 * k, 0) = duv_dw;
    ev.j_pose.block<2, 3>(2 * k, 3) = duv_dt;

    const Eigen::Matrix<double, 2, 3> duv_dv = duv_dp * r_eff;
    ev.j_id.middleRows(2 * k, 2) = duv_dv * kp.b_id.middleRows(3 * k, 3);
    ev.j_exp.middleRows(2 * k, 2) = duv_dv * kp.b_exp.middleRows(3 * k, 3);
  }
  return ev;
}

// POS-style weak-perspective pose estimate from the mean face; falls back to
// a frontal pose at canonical distance when degenerate.
FacePose initial_pose_estimate(const KeypointModel& kp, const Camera& camera,
                               const std::vector<Eigen::Vector2d>& landmarks,
                               const std::vector<uint8_t>& visibility) {
  const FacePose fallback(Eigen::Quaterniond::Identity(), Eigen::Vector3d(0, 0, -2.7));

  std::vector<int> vis;
  for (int k = 0; k < kp.count; ++k)
    if (visibility.empty() || visibility[k] != 0) vis.push_back(k);
  if (vis.size() < 4) return fallback;

  Eigen::Vector3d centroid3 = Eigen::Vector3d::Zero();
  Eigen::Vector2d centroid2 = Eigen::Vector2d::Zero();
  for (int k : vis) {
    centroid3 += kp.mean.segment<3>(3 * k);
    centroid2 += landmarks[k];
  }
  centroid3 /= static_cast<double>(vis.size());
  centroid2 /= static_cast<double>(vis.size());

  Eigen::MatrixXd a(vis.size(), 3);
  Eigen::VectorXd bu(vis.size()), bv(vis.size());
  for (size_t i = 0; i < vis.size(); ++i) {
    a.row(i) = (kp.mean.segment<3>(3 * vis[i]) - centroid3).transpose();
    bu[i] = landmarks[vis[i]].x() - centroid2.x();
    bv[i] = landmarks[vis[i]].y() - centroid2.y();
  }
  const Eigen::Matrix3d ata = a.transpose() * a;
  if (std::abs(ata.determinant()) < 1e-12) return fallback;
  const Eigen::LDLT<Eigen::Matrix3d> solver(ata);
  const Eigen::Vector3d r1 = solver.solve(a.transpose() * bu);
  const Eigen::Vector3d r2 = solver.solve(a.transpose() * bv);
  const double s1 = r1.norm(), s2 = r2.norm();
  if (s1 < 1e-12 || s2 < 1e-12) return fallback;
  const double scale = 0.5 * (s1 + s2);

  Eigen::Matrix3d rot;
  rot.row(0) = (r1 / s1).transpose();
  rot.row(1) = (r2 / s2).transpose();
  rot.row(2) = rot.row(0).cross(rot.row(1));
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(rot, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r_est = svd.matrixU() * svd.matrixV().transpose();
  if (r_est.determinant() < 0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r_est = svd.matrixU() * flip * svd.matrixV().transpose();
  }

  const double depth = camera.focal / scale;
  const Eigen::Vector3d p0((centroid2.x() - camera.principal_point.x()) * depth / camera.focal,
                           (centroid2.y() - camera.principal_point.y()) * depth / camera.focal,
                           -depth);
  const Eigen::Vector3d t_est = p0 - r_est * centroid3;

  // The estimate lives in the camera frame; strip the camera extrinsics.
  const FacePose cam_inv = camera.pose.inverse();
  return FacePose(cam_inv.rotation_quat() * Eigen::Quaterniond(r_est),
                  cam_inv.rotation() * t_est + cam_inv.translation());
}

struct FitState {
  Eigen::VectorXd id;
  std::vector<Eigen::VectorXd> exps;
  std::vector<FacePose> poses;
};

double data_objective_frame(const FrameEval& ev) { return ev.residuals.squaredNorm(); }

double regularizer_objective(const FitState& st, const FitConfig& cfg) {
  double obj = cfg.lambda_identity * st.id.squaredNorm();
  for (const auto& e : st.exps) obj += cfg.lambda_expression * e.squaredNorm();
  for (size_t t = 1; t + 1 < st.exps.size(); ++t) {
    const Eigen::VectorXd g = st.exps[t] - 0.5 * (st.exps[t - 1] + st.exps[t + 1]);
    obj += cfg.lambda_laplacian * g.squaredNorm();
  }
  return obj;
}

}  // namespace

Eigen::VectorXd reprojection_residuals(const MorphableModel& model, const Camera& camera,
                                       const IdentityCode& identity,
                                       const ExpressionCode& expression,
                                       const FacePose& pose,
                                       const std::vector<Eigen::Vector2d>& landmarks,
                                       const std::vector<uint8_t>& visibility,
                                       const std::string& set_name) {
  const KeypointModel kp = restrict_model(model, set_name);
  return evaluate_frame(kp, camera, identity.values, expression.values, pose,
                        landmarks, visibility, false)
      .residuals;
}

ResidualJacobian reprojection_jacobian(const MorphableModel& model, const Camera& camera,
                                       const IdentityCode& identity,
                                       const ExpressionCode& expression,
                                       const FacePose& pose,
                                       const std::vector<Eigen::Vector2d>& landmarks,
                                       const std::vector<uint8_t>& visibility,
                                       const std::string& set_name) {
  const KeypointModel kp = restrict_model(model, set_name);
  const FrameEval ev = evaluate_frame(kp, camera, identity.values, expression.values,
                                      pose, landmarks, visibility, true);
  ResidualJacobian out;
  out.residuals = ev.residuals;
  out.jacobian.resize(ev.residuals.size(), 6 + kp.b_id.cols() + kp.b_exp.cols());
  out.jacobian << ev.j_pose, ev.j_id, ev.j_exp;
  return out;
}

FitResult fit_sequence(const MorphableModel& model, const Camera& camera,
                       const LandmarkTrack& track, const FitConfig& config,
                       const std::optional<FitResult>& initial) {
  track.validate();
  config.validate();
  camera.validate();
  const KeypointModel kp = restrict_model(model, track.set_name);
  const int frames = static_cast<int>(track.frames.size());
  const int d_id = static_cast<int>(kp.b_id.cols());
  const int d_exp = static_cast<int>(kp.b_exp.cols());

  for (int t = 0; t < frames; ++t) {
    int visible = 0;
    for (size_t k = 0; k < track.frames[t].size(); ++k)
      if (track.visible(t, k)) ++visible;
    if (visible == 0)
      throw_data("fit_sequence: frame ", t, " has zero visible landmarks");
  }

  static const std::vector<uint8_t> kAllVisible;
  auto frame_visibility = [&](int t) -> const std::vector<uint8_t>& {
    return track.visibility.empty() ? kAllVisible : track.visibility[t];
  };

  FitState st;
  if (initial) {
    if (static_cast<int>(initial->expressions.size()) != frames ||
        static_cast<int>(initial->poses.size()) != frames)
      throw_data("fit_sequence: initial result has ", initial->expressions.size(),
                 " expressions / ", initial->poses.size(), " poses, expected ", frames);
    st.id = initial->identity.values;
    for (const auto& e : initial->expressions) st.exps.push_back(e.values);
    st.poses = initial->poses;
  } else {
    st.id = Eigen::VectorXd::Zero(d_id);
    st.exps.assign(frames, Eigen::VectorXd::Zero(d_exp));
    st.poses.reserve(frames);
    for (int t = 0; t < frames; ++t)
      st.poses.push_back(
          initial_pose_estimate(kp, camera, track.frames[t], frame_visibility(t)));
  }

  auto total_objective = [&](const FitState& state) {
    double obj = regularizer_objective(state, config);
    for (int t = 0; t < frames; ++t) {
      const FrameEval ev = evaluate_frame(kp, camera, state.id, state.exps[t],
                                          state.poses[t], track.frames[t],
                                          frame_visibility(t), false);
      obj += data_objective_frame(ev);
    }
    if (!std::isfinite(obj))
      throw_numeric("fit_sequence: objective became non-finite");
    return obj;
  };

  double objective = total_objective(st);
  std::vector<double> pose_mu(frames, config.damping_init);
  double code_mu = config.damping_init;
  int iterations_used = 0;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const double objective_before = objective;

    // Pose block: damped 6-parameter steps per frame. The pose subproblem is
    // cheap, so it runs to local convergence inside each outer iteration.
    for (int t = 0; t < frames; ++t) {
      double mu = pose_mu[t];
      for (int inner = 0; inner < 8; ++inner) {
        const FrameEval ev = evaluate_frame(kp, camera, st.id, st.exps[t], st.poses[t],
                                            track.frames[t], frame_visibility(t), true);
        const double frame_obj = data_objective_frame(ev);
        const Eigen::Matrix<double, 6, 6> h = ev.j_pose.transpose() * ev.j_pose;
        const Eigen::Matrix<double, 6, 1> g = ev.j_pose.transpose() * ev.residuals;
        bool accepted = false;
        for (int attempt = 0; attempt < 5; ++attempt) {
          Eigen::Matrix<double, 6, 6> damped = h;
          for (int d = 0; d < 6; ++d)
            damped(d, d) += mu * std::max(h(d, d), 1e-12);
          const Eigen::Matrix<double, 6, 1> delta = -damped.ldlt().solve(g);
          if (!delta.allFinite()) break;
          const FacePose cand =
              apply_pose_delta(st.poses[t], delta.head<3>(), delta.tail<3>());
          const FrameEval cand_ev =
              evaluate_frame(kp, camera, st.id, st.exps[t], cand, track.frames[t],
                             frame_visibility(t), false);
          const double cand_obj = data_objective_frame(cand_ev);
          if (cand_obj < frame_obj) {
            objective -= frame_obj - cand_obj;
            st.poses[t] = cand;
            mu = std::max(mu / 3.0, 1e-12);
            accepted = true;
            if (frame_obj - cand_obj <=
                config.convergence_tol * std::max(frame_obj, 1e-300))
              inner = 8;  // frame converged
            break;
          }
          mu *= 4.0;
        }
        if (!accepted) break;
      }
      pose_mu[t] = mu;
    }

    // Joint block: one damped Gauss-Newton step over
    // [identity | e_0..e_{T-1} | pose_0..pose_{T-1}]. Pure two-block
    // alternation stalls in the coupled pose/code valley (hundreds of rounds
    // on clean 20-frame fixtures); the joint step restores the expected LM
    // convergence rate while the pose polish above keeps it well seeded.
    {
      const int n = d_id + frames * d_exp + 6 * frames;
      const int pose_base = d_id + frames * d_exp;
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      for (int t = 0; t < frames; ++t) {
        const FrameEval ev = evaluate_frame(kp, camera, st.id, st.exps[t],
                                            st.poses[t], track.frames[t],
                                            frame_visibility(t), true);
        const int et = d_id + t * d_exp;
        const int pt = pose_base + 6 * t;
        h.topLeftCorner(d_id, d_id) += ev.j_id.transpose() * ev.j_id;
        h.block(0, et, d_id, d_exp) += ev.j_id.transpose() * ev.j_exp;
        h.block(et, 0, d_exp, d_id) += ev.j_exp.transpose() * ev.j_id;
        h.block(et, et, d_exp, d_exp) += ev.j_exp.transpose() * ev.j_exp;
        h.block(0, pt, d_id, 6) += ev.j_id.transpose() * ev.j_pose;
        h.block(pt, 0, 6, d_id) += ev.j_pose.transpose() * ev.j_id;
        h.block(et, pt, d_exp, 6) += ev.j_exp.transpose() * ev.j_pose;
        h.block(pt, et, 6, d_exp) += ev.j_pose.transpose() * ev.j_exp;
        h.block(pt, pt, 6, 6) += ev.j_pose.transpose() * ev.j_pose;
        g.head(d_id) += ev.j_id.transpose() * ev.residuals;
        g.segment(et, d_exp) += ev.j_exp.transpose() * ev.residuals;
        g.segment(pt, 6) += ev.j_pose.transpose() * ev.residuals;
      }
      // Ridge terms.
      for (int d = 0; d < d_id; ++d) h(d, d) += config.lambda_identity;
      g.head(d_id) += config.lambda_identity * st.id;
      for (int t = 0; t < frames; ++t) {
        const int et = d_id + t * d_exp;
        for (int d = 0; d < d_exp; ++d) h(et + d, et + d) += config.lambda_expression;
        g.segment(et, d_exp) += config.lambda_expression * st.exps[t];
      }
      // Temporal Laplacian: couples e_{t-1}, e_t, e_{t+1} with weights
      // (-1/2, 1, -1/2).
      for (int t = 1; t + 1 < frames; ++t) {
        const Eigen::VectorXd gt =
            st.exps[t] - 0.5 * (st.exps[t - 1] + st.exps[t + 1]);
        const int idx[3] = {d_id + (t - 1) * d_exp, d_id + t * d_exp,
                            d_id + (t + 1) * d_exp};
        const double coef[3] = {-0.5, 1.0, -0.5};
        for (int a = 0; a < 3; ++a) {
          g.segment(idx[a], d_exp) += config.lambda_laplacian * coef[a] * gt;
          for (int b = 0; b < 3; ++b)
            for (int d = 0; d < d_exp; ++d)
              h(idx[a] + d, idx[b] + d) += config.lambda_laplacian * coef[a] * coef[b];
        }
      }

      double mu = code_mu;
      for (int attempt = 0; attempt < 5; ++attempt) {
        Eigen::MatrixXd damped = h;
        for (int d = 0; d < n; ++d) damped(d, d) += mu * std::max(h(d, d), 1e-12);
        const Eigen::VectorXd delta = -damped.ldlt().solve(g);
        if (!delta.allFinite()) break;
        FitState cand = st;
        cand.id += delta.head(d_id);
        for (int t = 0; t < frames; ++t) {
          cand.exps[t] += delta.segment(d_id + t * d_exp, d_exp);
          const int pt = pose_base + 6 * t;
          cand.poses[t] = apply_pose_delta(cand.poses[t], delta.segment<3>(pt),
                                           delta.segment<3>(pt + 3));
        }
        const double cand_obj = total_objective(cand);
        if (cand_obj < objective) {
          st = std::move(cand);
          objective = cand_obj;
          mu = std::max(mu / 3.0, 1e-12);
          break;
        }
        mu *= 4.0;
      }
      code_mu = mu;
    }

    const double decrease = objective_before - objective;
    if (decrease <= config.convergence_tol * std::max(objective_before, 1e-300))
      break;
    iterations_used = iter + 1;
  }

  FitResult result;
  result.identity.values = st.id;
  result.expressions.reserve(frames);
  for (const auto& e : st.exps) result.expressions.push_back(ExpressionCode{e});
  result.poses = st.poses;
  result.iterations_used = iterations_used;

  double sq_sum = 0.0;
  size_t n_total = 0;
  result.per_frame_rmse_px.resize(frames, 0.0);
  for (int t = 0; t < frames; ++t) {
    const FrameEval ev = evaluate_frame(kp, camera, st.id, st.exps[t], st.poses[t],
                                        track.frames[t], frame_visibility(t), false);
    double frame_sq = 0.0;
    int frame_n = 0;
    for (int k = 0; k < kp.count; ++k) {
      if (!track.visible(t, k)) continue;
      frame_sq += ev.residuals.segment<2>(2 * k).squaredNorm();
      frame_n += 1;
    }
    result.per_frame_rmse_px[t] = frame_n > 0 ? std::sqrt(frame_sq / frame_n) : 0.0;
    sq_sum += frame_sq;
    n_total += frame_n;
  }
  result.final_rmse_px = n_total > 0 ? std::sqrt(sq_sum / static_cast<double>(n_total)) : 0.0;
  return result;
}

double landmark_recon_error(const MorphableModel& model, const IdentityCode& identity,
                            const std::vector<ExpressionCode>& expressions_a,
                            const std::vector<ExpressionCode>& expressions_b,
                            const std::string& set_name) {
  if (expressions_a.size() != expressions_b.size())
    throw_data("landmark_recon_error: sequence lengths differ, ",
               expressions_a.size(), " vs ", expressions_b.size());
  if (expressions_a.empty()) throw_data("landmark_recon_error: empty sequences");
  const KeypointModel kp = restrict_model(model, set_name);
  double sum = 0.0;
  for (size_t t = 0; t < expressions_a.size(); ++t) {
    const Eigen::VectorXd va =
        keypoint_positions(kp, identity.values, expressions_a[t].values);
    const Eigen::VectorXd vb =
        keypoint_positions(kp, identity.values, expressions_b[t].values);
    sum += (va - vb).squaredNorm();
  }
  return sum / (static_cast<double>(expressions_a.size()) * kp.count);
}

double expression_laplacian(const std::vector<ExpressionCode>& expressions) {
  if (expressions.size() < 3)
    throw_data("expression_laplacian needs at least 3 frames, got ",
               expressions.size());
  double sum = 0.0;
  for (size_t t = 1; t + 1 < expressions.size(); ++t) {
    const Eigen::VectorXd g = expressions[t].values -
                              0.5 * (expressions[t - 1].values + expressions[t + 1].values);
    sum += g.squaredNorm();
  }
  return sum / static_cast<double>(expressions.size() - 2);
}

}  // namespace pforge
