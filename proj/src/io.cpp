// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace pforge {

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts are unsupported");

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'F', 'T', '1'};

json read_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw_data("cannot open ", what, " file: ", path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError(IoCode::SchemaViolation,
                  msg(what, " file ", path.string(), " is not valid JSON: ", e.what()));
  }
  return j;
}

void write_json_file(const std::filesystem::path& path, const json& j, const char* what) {
  std::ofstream out(path);
  if (!out) throw_data("cannot write ", what, " file: ", path.string());
  out << j.dump(2) << "\n";
}

template <typename T>
T require_field(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key))
    throw IoError(IoCode::SchemaViolation, msg(context, ": missing field '", key, "'"));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(IoCode::SchemaViolation,
                  msg(context, ": field '", key, "' has wrong type: ", e.what()));
  }
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  for (int64_t s : tensor.shape)
    if (s <= 0) throw_data("tensor shape entries must be positive, got ", s);
  if (tensor.axis_labels.size() != tensor.shape.size())
    throw_data("tensor has ", tensor.axis_labels.size(), " axis labels for rank ",
               tensor.shape.size());
  if (static_cast<int64_t>(tensor.data.size()) != tensor.element_count())
    throw_data("tensor data has ", tensor.data.size(), " elements, shape wants ",
               tensor.element_count());

  json header;
  header["dtype"] = "f32le";
  header["shape"] = tensor.shape;
  header["axis_labels"] = tensor.axis_labels;
  header["metadata"] = tensor.metadata;
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write tensor file: ", path.string());
  out.write(kMagic, 4);
  const uint32_t len = static_cast<uint32_t>(header_str.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(header_str.data(), header_str.size());
  out.write(reinterpret_cast<const char*>(tensor.data.data()),
            static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
  if (!out) throw_data("short write on tensor file: ", path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open tensor file: ", path.string());

  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4)
    throw IoError(IoCode::Truncated, msg("tensor file ", path.string(), " shorter than magic"));
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw IoError(IoCode::BadMagic,
                  msg("tensor file ", path.string(), " has bad magic (expected PFT1)"));

  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  if (in.gcount() != 4)
    throw IoError(IoCode::Truncated, msg("tensor file ", path.string(), " missing header length"));
  std::string header_str(len, '\0');
  in.read(header_str.data(), len);
  if (in.gcount() != static_cast<std::streamsize>(len))
    throw IoError(IoCode::Truncated, msg("tensor file ", path.string(), " has truncated header"));

  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::parse_error& e) {
    throw IoError(IoCode::SchemaViolation,
                  msg("tensor file ", path.string(), " header is not valid JSON: ", e.what()));
  }
  const std::string context = "tensor file " + path.string();
  const std::string dtype = require_field<std::string>(header, "dtype", context);
  if (dtype != "f32le")
    throw IoError(IoCode::SchemaViolation,
                  msg(context, ": unsupported dtype '", dtype, "' (only f32le)"));

  Tensor tensor;
  tensor.shape = require_field<std::vector<int64_t>>(header, "shape", context);
  tensor.axis_labels = require_field<std::vector<std::string>>(header, "axis_labels", context);
  if (header.contains("metadata"))
    tensor.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
  for (int64_t s : tensor.shape)
    if (s <= 0)
      throw IoError(IoCode::SchemaViolation, msg(context, ": non-positive shape entry ", s));
  if (tensor.axis_labels.size() != tensor.shape.size())
    throw IoError(IoCode::SchemaViolation,
                  msg(context, ": rank ", tensor.shape.size(), " but ",
                      tensor.axis_labels.size(), " axis labels"));

  const int64_t count = tensor.element_count();
  tensor.data.resize(static_cast<size_t>(count));
  in.read(reinterpret_cast<char*>(tensor.data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(float)))
    throw IoError(IoCode::Truncated,
                  msg(context, ": payload shorter than shape requires (", count, " floats)"));
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0)
    throw IoError(IoCode::ShapePayloadMismatch,
                  msg(context, ": payload longer than shape requires (", count, " floats)"));
  return tensor;
}

void require_axis_labels(const Tensor& tensor, const std::vector<std::string>& expected,
                         const std::string& context) {
  if (tensor.axis_labels != expected) {
    std::string want, got;
    for (const auto& s : expected) want += s + " ";
    for (const auto& s : tensor.axis_labels) got += s + " ";
    throw IoError(IoCode::AxisLabelMismatch,
                  msg(context, ": axis labels [", got, "] do not match expected [", want, "]"));
  }
}

// ---------------------------------------------------------------------------
// Morphable model container

namespace {

Tensor matrix_tensor(const Eigen::MatrixXd& m, std::vector<int64_t> shape,
                     std::vector<std::string> labels) {
  Tensor t;
  t.shape = std::move(shape);
  t.axis_labels = std::move(labels);
  t.data.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      t.data.push_back(static_cast<float>(m(r, c)));
  return t;
}

Eigen::MatrixXd tensor_matrix(const Tensor& t) {
  if (t.shape.size() != 2)
    throw IoError(IoCode::SchemaViolation, msg("expected rank-2 tensor, got rank ", t.shape.size()));
  Eigen::MatrixXd m(t.shape[0], t.shape[1]);
  size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[i++];
  return m;
}

}  // namespace

void save_model(const std::filesystem::path& manifest_path, const MorphableModel& model) {
  model.validate();
  const auto dir = manifest_path.parent_path();
  const std::string stem = manifest_path.stem().string();
  const int n = model.vertex_count();

  auto tensor_name = [&](const char* part) { return stem + "_" + part + ".pft"; };

  {
    Tensor t;
    t.shape = {n, 3};
    t.axis_labels = {"vertex", "coord"};
    t.data.reserve(static_cast<size_t>(n) * 3);
    for (Eigen::Index i = 0; i < model.mean_vertices.size(); ++i)
      t.data.push_back(static_cast<float>(model.mean_vertices[i]));
    write_tensor(dir / tensor_name("mean"), t);
  }
  write_tensor(dir / tensor_name("id_basis"),
               matrix_tensor(model.identity_basis, {3 * n, model.identity_basis.cols()},
                             {"flat_coord", "component"}));
  write_tensor(dir / tensor_name("exp_basis"),
               matrix_tensor(model.expression_basis, {3 * n, model.expression_basis.cols()},
                             {"flat_coord", "component"}));
  write_tensor(dir / tensor_name("ncc"),
               matrix_tensor(model.ncc_colors, {n, 3}, {"vertex", "channel"}));
  {
    Tensor t;
    t.shape = {static_cast<int64_t>(model.triangles.size()), 3};
    t.axis_labels = {"triangle", "corner"};
    for (const auto& tri : model.triangles)
      for (int idx : tri) t.data.push_back(static_cast<float>(idx));
    write_tensor(dir / tensor_name("tris"), t);
  }

  json manifest;
  manifest["format"] = "portrait-forge-model";
  manifest["version"] = 1;
  manifest["vertex_count"] = n;
  manifest["d_id"] = model.d_id();
  manifest["d_exp"] = model.d_exp();
  manifest["keypoint_sets"] = model.keypoint_sets;
  manifest["tensors"] = {{"mean_vertices", tensor_name("mean")},
                         {"identity_basis", tensor_name("id_basis")},
                         {"expression_basis", tensor_name("exp_basis")},
                         {"ncc_colors", tensor_name("ncc")},
                         {"triangles", tensor_name("tris")}};
  write_json_file(manifest_path, manifest, "model manifest");
}

MorphableModel load_model(const std::filesystem::path& manifest_path) {
  const json manifest = read_json_file(manifest_path, "model manifest");
  const std::string context = "model manifest " + manifest_path.string();
  if (require_field<std::string>(manifest, "format", context) != "portrait-forge-model")
    throw IoError(IoCode::SchemaViolation, msg(context, ": wrong format tag"));
  const int n = require_field<int>(manifest, "vertex_count", context);
  const int d_id = require_field<int>(manifest, "d_id", context);
  const int d_exp = require_field<int>(manifest, "d_exp", context);
  const auto dir = manifest_path.parent_path();
  const json tensors = require_field<json>(manifest, "tensors", context);

  auto load_named = [&](const char* key, const std::vector<std::string>& labels) {
    const std::string rel = require_field<std::string>(tensors, key, context);
    Tensor t = read_tensor(dir / rel);
    require_axis_labels(t, labels, msg(context, " tensor '", key, "'"));
    return t;
  };

  MorphableModel model;
  {
    const Tensor t = load_named("mean_vertices", {"vertex", "coord"});
    if (t.shape != std::vector<int64_t>{n, 3})
      throw IoError(IoCode::SchemaViolation,
                    msg(context, ": mean_vertices shape does not match vertex_count ", n));
    model.mean_vertices.resize(3 * n);
    for (int i = 0; i < 3 * n; ++i) model.mean_vertices[i] = t.data[i];
  }
  {
    const Tensor t = load_named("identity_basis", {"flat_coord", "component"});
    if (t.shape != std::vector<int64_t>{3 * n, d_id})
      throw IoError(IoCode::SchemaViolation,
                    msg(context, ": identity_basis shape must be [", 3 * n, ", ", d_id, "]"));
    model.identity_basis = tensor_matrix(t);
  }
  {
    const Tensor t = load_named("expression_basis", {"flat_coord", "component"});
    if (t.shape != std::vector<int64_t>{3 * n, d_exp})
      throw IoError(IoCode::SchemaViolation,
                    msg(context, ": expression_basis shape must be [", 3 * n, ", ", d_exp, "]"));
    model.expression_basis = tensor_matrix(t);
  }
  {
    const Tensor t = load_named("ncc_colors", {"vertex", "channel"});
    if (t.shape != std::vector<int64_t>{n, 3})
      throw IoError(IoCode::SchemaViolation, msg(context, ": ncc_colors shape must be [", n, ", 3]"));
    model.ncc_colors = tensor_matrix(t);
  }
  {
    const Tensor t = load_named("triangles", {"triangle", "corner"});
    if (t.shape.size() != 2 || t.shape[1] != 3)
      throw IoError(IoCode::SchemaViolation, msg(context, ": triangles tensor must be [T, 3]"));
    model.triangles.reserve(static_cast<size_t>(t.shape[0]));
    for (int64_t i = 0; i < t.shape[0]; ++i) {
      std::array<int, 3> tri;
      for (int c = 0; c < 3; ++c) {
        const float v = t.data[static_cast<size_t>(3 * i + c)];
        if (v != std::floor(v) || v < 0)
          throw IoError(IoCode::SchemaViolation,
                        msg(context, ": triangle entry ", v, " is not a vertex index"));
        tri[c] = static_cast<int>(v);
      }
      model.triangles.push_back(tri);
    }
  }
  model.keypoint_sets =
      require_field<std::map<std::string, std::vector<int>>>(manifest, "keypoint_sets", context);
  try {
    model.validate();
  } catch (const Error& e) {
    throw IoError(IoCode::SchemaViolation, msg(context, ": ", e.what()));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Decoders

void save_decoder(const std::filesystem::path& manifest_path, const MlpDecoder& decoder) {
  decoder.validate();
  const auto dir = manifest_path.parent_path();
  const std::string stem = manifest_path.stem().string();

  auto dump = [&](const char* part, const Eigen::MatrixXd& m,
                  std::vector<int64_t> shape, std::vector<std::string> labels) {
    const std::string name = stem + "_" + part + ".pft";
    write_tensor(dir / name, matrix_tensor(m, std::move(shape), std::move(labels)));
    return name;
  };

  json manifest;
  manifest["format"] = "portrait-forge-decoder";
  manifest["version"] = 1;
  manifest["type"] = "mlp";
  manifest["input_channels"] = decoder.input_channels();
  manifest["hidden_width"] = MlpDecoder::kHiddenWidth;
  manifest["layers"] = MlpDecoder::kNumLayers;
  manifest["tensors"] = {
      {"w0", dump("w0", decoder.w0, {MlpDecoder::kHiddenWidth, decoder.input_channels()},
                  {"hidden", "channel"})},
      {"b0", dump("b0", decoder.b0, {MlpDecoder::kHiddenWidth, 1}, {"hidden", "one"})},
      {"w1", dump("w1", decoder.w1, {MlpDecoder::kOutputs, MlpDecoder::kHiddenWidth},
                  {"output", "hidden"})},
      {"b1", dump("b1", decoder.b1, {MlpDecoder::kOutputs, 1}, {"output", "one"})}};
  write_json_file(manifest_path, manifest, "decoder manifest");
}

void save_decoder(const std::filesystem::path& manifest_path, const AnalyticDecoder& decoder) {
  json manifest;
  manifest["format"] = "portrait-forge-decoder";
  manifest["version"] = 1;
  manifest["type"] = "analytic";
  switch (decoder.kind) {
    case AnalyticDecoder::Kind::ConstantSlab: manifest["name"] = "constant_slab"; break;
    case AnalyticDecoder::Kind::Sphere: manifest["name"] = "sphere"; break;
    case AnalyticDecoder::Kind::GaussianBlob: manifest["name"] = "gaussian_blob"; break;
  }
  manifest["density"] = decoder.density;
  manifest["center"] = {decoder.center.x(), decoder.center.y(), decoder.center.z()};
  manifest["radius"] = decoder.radius;
  manifest["z_min"] = decoder.z_min;
  manifest["z_max"] = decoder.z_max;
  manifest["color"] = {decoder.color.x(), decoder.color.y(), decoder.color.z()};
  write_json_file(manifest_path, manifest, "decoder manifest");
}

RadianceDecoder load_decoder(const std::filesystem::path& manifest_path) {
  const json manifest = read_json_file(manifest_path, "decoder manifest");
  const std::string context = "decoder manifest " + manifest_path.string();
  if (require_field<std::string>(manifest, "format", context) != "portrait-forge-decoder")
    throw IoError(IoCode::SchemaViolation, msg(context, ": wrong format tag"));
  const std::string type = require_field<std::string>(manifest, "type", context);

  if (type == "analytic") {
    AnalyticDecoder d;
    const std::string name = require_field<std::string>(manifest, "name", context);
    if (name == "constant_slab") d.kind = AnalyticDecoder::Kind::ConstantSlab;
    else if (name == "sphere") d.kind = AnalyticDecoder::Kind::Sphere;
    else if (name == "gaussian_blob") d.kind = AnalyticDecoder::Kind::GaussianBlob;
    else
      throw IoError(IoCode::SchemaViolation, msg(context, ": unknown analytic field '", name, "'"));
    d.density = require_field<double>(manifest, "density", context);
    const auto center = require_field<std::vector<double>>(manifest, "center", context);
    const auto color = require_field<std::vector<double>>(manifest, "color", context);
    if (center.size() != 3 || color.size() != 3)
      throw IoError(IoCode::SchemaViolation, msg(context, ": center/color must have 3 entries"));
    d.center = Eigen::Vector3d(center[0], center[1], center[2]);
    d.color = Eigen::Vector3d(color[0], color[1], color[2]);
    d.radius = require_field<double>(manifest, "radius", context);
    d.z_min = require_field<double>(manifest, "z_min", context);
    d.z_max = require_field<double>(manifest, "z_max", context);
    return d;
  }
  if (type != "mlp")
    throw IoError(IoCode::SchemaViolation, msg(context, ": unknown decoder type '", type, "'"));

  const int hidden = require_field<int>(manifest, "hidden_width", context);
  const int layers = require_field<int>(manifest, "layers", context);
  if (hidden != MlpDecoder::kHiddenWidth || layers != MlpDecoder::kNumLayers)
    throw IoError(IoCode::SchemaViolation,
                  msg(context, ": decoder must be ", MlpDecoder::kNumLayers, " layers x ",
                      MlpDecoder::kHiddenWidth, " channels, got ", layers, " x ", hidden));
  const int channels = require_field<int>(manifest, "input_channels", context);
  const json tensors = require_field<json>(manifest, "tensors", context);
  const auto dir = manifest_path.parent_path();

  auto load_named = [&](const char* key, int64_t rows, int64_t cols,
                        const std::vector<std::string>& labels) {
    const std::string rel = require_field<std::string>(tensors, key, context);
    Tensor t = read_tensor(dir / rel);
    require_axis_labels(t, labels, msg(context, " tensor '", key, "'"));
    if (t.shape != std::vector<int64_t>{rows, cols})
      throw IoError(IoCode::SchemaViolation,
                    msg(context, ": tensor '", key, "' must be [", rows, ", ", cols, "]"));
    return tensor_matrix(t);
  };

  MlpDecoder d;
  d.w0 = load_named("w0", MlpDecoder::kHiddenWidth, channels, {"hidden", "channel"});
  d.b0 = load_named("b0", MlpDecoder::kHiddenWidth, 1, {"hidden", "one"});
  d.w1 = load_named("w1", MlpDecoder::kOutputs, MlpDecoder::kHiddenWidth, {"output", "hidden"});
  d.b1 = load_named("b1", MlpDecoder::kOutputs, 1, {"output", "one"});
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// Tri-planes

void save_triplane(const std::filesystem::path& path, const TriPlane& plane) {
  Tensor t;
  const int r = plane.resolution();
  const int c = plane.channels();
  t.shape = {TriPlane::kNumPlanes, c, r, r};
  t.axis_labels = {"plane", "channel", "row", "col"};
  {
    std::ostringstream os;
    os.precision(17);
    os << plane.extent();
    t.metadata["extent"] = os.str();
  }
  t.metadata["plane_order"] = "xy,xz,yz";
  t.data.reserve(static_cast<size_t>(TriPlane::kNumPlanes) * c * r * r);
  for (int p = 0; p < TriPlane::kNumPlanes; ++p)
    t.data.insert(t.data.end(), plane.plane(p).begin(), plane.plane(p).end());
  write_tensor(path, t);
}

TriPlane load_triplane(const std::filesystem::path& path) {
  const Tensor t = read_tensor(path);
  const std::string context = "tri-plane file " + path.string();
  require_axis_labels(t, {"plane", "channel", "row", "col"}, context);
  if (t.shape.size() != 4 || t.shape[0] != TriPlane::kNumPlanes || t.shape[2] != t.shape[3])
    throw IoError(IoCode::SchemaViolation,
                  msg(context, ": shape must be [3, C, R, R]"));
  auto order = t.metadata.find("plane_order");
  if (order == t.metadata.end() || order->second != "xy,xz,yz")
    throw IoError(IoCode::SchemaViolation,
                  msg(context, ": plane_order metadata must be 'xy,xz,yz'"));
  double extent = 1.0;
  if (auto it = t.metadata.find("extent"); it != t.metadata.end()) {
    try {
      extent = std::stod(it->second);
    } catch (const std::exception&) {
      throw IoError(IoCode::SchemaViolation, msg(context, ": bad extent '", it->second, "'"));
    }
  }
  if (!(extent > 0))
    throw IoError(IoCode::SchemaViolation, msg(context, ": extent must be positive"));

  const int c = static_cast<int>(t.shape[1]);
  const int r = static_cast<int>(t.shape[2]);
  TriPlane plane(r, c, extent);
  const size_t per_plane = static_cast<size_t>(c) * r * r;
  for (int p = 0; p < TriPlane::kNumPlanes; ++p)
    std::copy(t.data.begin() + p * per_plane, t.data.begin() + (p + 1) * per_plane,
              plane.plane(p).begin());
  return plane;
}

// ---------------------------------------------------------------------------
// Poses, cameras, trajectories

namespace {

json pose_json(const FacePose& pose) {
  const auto& q = pose.rotation_quat();
  return json{{"rotation_quat", {q.w(), q.x(), q.y(), q.z()}},
              {"translation",
               {pose.translation().x(), pose.translation().y(), pose.translation().z()}}};
}

FacePose pose_from_json(const json& j, const std::string& context) {
  const auto q = require_field<std::vector<double>>(j, "rotation_quat", context);
  const auto t = require_field<std::vector<double>>(j, "translation", context);
  if (q.size() != 4)
    throw IoError(IoCode::SchemaViolation, msg(context, ": rotation_quat needs 4 entries"));
  if (t.size() != 3)
    throw IoError(IoCode::SchemaViolation, msg(context, ": translation needs 3 entries"));
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (!(norm > 1e-12))
    throw IoError(IoCode::SchemaViolation, msg(context, ": zero-norm quaternion"));
  return FacePose(Eigen::Quaterniond(q[0], q[1], q[2], q[3]),
                  Eigen::Vector3d(t[0], t[1], t[2]));
}

json camera_json(const Camera& cam) {
  json j;
  j["pose"] = pose_json(cam.pose);
  j["focal"] = cam.focal;
  j["principal_point"] = {cam.principal_point.x(), cam.principal_point.y()};
  j["image_size"] = {cam.width, cam.height};
  j["near"] = cam.near_plane;
  j["far"] = cam.far_plane;
  if (cam.radius) j["radius"] = *cam.radius;
  return j;
}

Camera camera_from_json(const json& j, const std::string& context) {
  Camera cam;
  cam.pose = pose_from_json(require_field<json>(j, "pose", context), context);
  cam.focal = require_field<double>(j, "focal", context);
  const auto pp = require_field<std::vector<double>>(j, "principal_point", context);
  const auto size = require_field<std::vector<int>>(j, "image_size", context);
  if (pp.size() != 2 || size.size() != 2)
    throw IoError(IoCode::SchemaViolation,
                  msg(context, ": principal_point/image_size need 2 entries"));
  cam.principal_point = Eigen::Vector2d(pp[0], pp[1]);
  cam.width = size[0];
  cam.height = size[1];
  cam.near_plane = require_field<double>(j, "near", context);
  cam.far_plane = require_field<double>(j, "far", context);
  if (j.contains("radius")) cam.radius = j.at("radius").get<double>();
  try {
    cam.validate();
  } catch (const Error& e) {
    throw IoError(IoCode::SchemaViolation, msg(context, ": ", e.what()));
  }
  return cam;
}

}  // namespace

void save_pose(const std::filesystem::path& path, const FacePose& pose) {
  write_json_file(path, pose_json(pose), "pose");
}

FacePose load_pose(const std::filesystem::path& path) {
  return pose_from_json(read_json_file(path, "pose"), "pose file " + path.string());
}

void save_camera(const std::filesystem::path& path, const Camera& camera) {
  camera.validate();
  write_json_file(path, camera_json(camera), "camera");
}

Camera load_camera(const std::filesystem::path& path) {
  return camera_from_json(read_json_file(path, "camera"), "camera file " + path.string());
}

void save_trajectory(const std::filesystem::path& path, const CameraTrajectory& traj) {
  traj.camera.validate();
  json j;
  j["format"] = "portrait-forge-trajectory";
  j["camera"] = camera_json(traj.camera);
  j["poses"] = json::array();
  for (const auto& p : traj.poses) j["poses"].push_back(pose_json(p));
  write_json_file(path, j, "trajectory");
}

CameraTrajectory load_trajectory(const std::filesystem::path& path) {
  const json j = read_json_file(path, "trajectory");
  const std::string context = "trajectory file " + path.string();
  if (require_field<std::string>(j, "format", context) != "portrait-forge-trajectory")
    throw IoError(IoCode::SchemaViolation, msg(context, ": wrong format tag"));
  CameraTrajectory traj;
  traj.camera = camera_from_json(require_field<json>(j, "camera", context), context);
  const json poses = require_field<json>(j, "poses", context);
  for (const auto& p : poses) traj.poses.push_back(pose_from_json(p, context));
  if (traj.poses.empty())
    throw IoError(IoCode::SchemaViolation, msg(context, ": trajectory has no poses"));
  return traj;
}

// ---------------------------------------------------------------------------
// Landmark tracks, fit results, code sequences

void save_track(const std::filesystem::path& path, const LandmarkTrack& track) {
  track.validate();
  json j;
  j["format"] = "portrait-forge-track";
  j["set_name"] = track.set_name;
  j["frames"] = json::array();
  for (const auto& frame : track.frames) {
    json f = json::array();
    for (const auto& lm : frame) f.push_back({lm.x(), lm.y()});
    j["frames"].push_back(std::move(f));
  }
  if (!track.visibility.empty()) {
    j["visibility"] = json::array();
    for (const auto& frame : track.visibility) {
      json f = json::array();
      for (uint8_t vis : frame) f.push_back(vis != 0);
      j["visibility"].push_back(std::move(f));
    }
  }
  write_json_file(path, j, "landmark track");
}

LandmarkTrack load_track(const std::filesystem::path& path) {
  const json j = read_json_file(path, "landmark track");
  const std::string context = "landmark track " + path.string();
  if (require_field<std::string>(j, "format", context) != "portrait-forge-track")
    throw IoError(IoCode::SchemaViolation, msg(context, ": wrong format tag"));
  LandmarkTrack track;
  track.set_name = require_field<std::string>(j, "set_name", context);
  const json frames = require_field<json>(j, "frames", context);
  for (const auto& f : frames) {
    std::vector<Eigen::Vector2d> frame;
    for (const auto& lm : f) {
      const auto v = lm.get<std::vector<double>>();
      if (v.size() != 2)
        throw IoError(IoCode::SchemaViolation, msg(context, ": landmark needs 2 coordinates"));
      frame.emplace_back(v[0], v[1]);
    }
    track.frames.push_back(std::move(frame));
  }
  if (j.contains("visibility")) {
    for (const auto& f : j.at("visibility")) {
      std::vector<uint8_t> frame;
      for (const auto& vis : f) frame.push_back(vis.get<bool>() ? 1 : 0);
      track.visibility.push_back(std::move(frame));
    }
  }
  try {
    track.validate();
  } catch (const Error& e) {
    throw IoError(IoCode::SchemaViolation, msg(context, ": ", e.what()));
  }
  return track;
}

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  return v;
}

}  // namespace

void save_fit_result(const std::filesystem::path& path, const FitResult& result) {
  json j;
  j["format"] = "portrait-forge-fit";
  j["identity"] = vector_json(result.identity.values);
  j["expressions"] = json::array();
  for (const auto& e : result.expressions) j["expressions"].push_back(vector_json(e.values));
  j["poses"] = json::array();
  for (const auto& p : result.poses) j["poses"].push_back(pose_json(p));
  j["final_rmse_px"] = result.final_rmse_px;
  j["per_frame_rmse_px"] = result.per_frame_rmse_px;
  j["iterations_used"] = result.iterations_used;
  write_json_file(path, j, "fit result");
}

FitResult load_fit_result(const std::filesystem::path& path) {
  const json j = read_json_file(path, "fit result");
  const std::string context = "fit result " + path.string();
  if (require_field<std::string>(j, "format", context) != "portrait-forge-fit")
    throw IoError(IoCode::SchemaViolation, msg(context, ": wrong format tag"));
  FitResult result;
  result.identity.values = vector_from_json(require_field<json>(j, "identity", context));
  for (const auto& e : require_field<json>(j, "expressions", context))
    result.expressions.push_back(ExpressionCode{vector_from_json(e)});
  for (const auto& p : require_field<json>(j, "poses", context))
    result.poses.push_back(pose_from_json(p, context));
  result.final_rmse_px = require_field<double>(j, "final_rmse_px", context);
  result.per_frame_rmse_px = require_field<std::vector<double>>(j, "per_frame_rmse_px", context);
  result.iterations_used = require_field<int>(j, "iterations_used", context);
  if (result.expressions.size() != result.poses.size())
    throw IoError(IoCode::SchemaViolation,
                  msg(context, ": expressions/poses frame counts differ"));
  return result;
}

void save_expression_sequence(const std::filesystem::path& path,
                              const std::vector<ExpressionCode>& codes) {
  json j;
  j["format"] = "portrait-forge-codes";
  j["frames"] = json::array();
  for (const auto& e : codes) j["frames"].push_back(vector_json(e.values));
  write_json_file(path, j, "expression sequence");
}

std::vector<ExpressionCode> load_expression_sequence(const std::filesystem::path& path) {
  const json j = read_json_file(path, "expression sequence");
  const std::string context = "expression sequence " + path.string();
  if (require_field<std::string>(j, "format", context) != "portrait-forge-codes")
    throw IoError(IoCode::SchemaViolation, msg(context, ": wrong format tag"));
  std::vector<ExpressionCode> codes;
  for (const auto& e : require_field<json>(j, "frames", context))
    codes.push_back(ExpressionCode{vector_from_json(e)});
  return codes;
}

// ---------------------------------------------------------------------------
// Image <-> tensor bridges

Tensor image_to_tensor(const Image& image) {
  Tensor t;
  t.shape = {image.height(), image.width(), image.channels()};
  t.axis_labels = {"row", "col", "channel"};
  t.data = image.data();
  return t;
}

Image tensor_to_image(const Tensor& t) {
  require_axis_labels(t, {"row", "col", "channel"}, "image tensor");
  if (t.shape.size() != 3)
    throw IoError(IoCode::SchemaViolation, "image tensor must be rank 3 [row, col, channel]");
  Image img(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[0]),
            static_cast<int>(t.shape[2]));
  img.data() = t.data;
  return img;
}

}  // namespace pforge
