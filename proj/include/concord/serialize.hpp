#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "concord/concordance.hpp"

namespace concord {

using json = nlohmann::json;

namespace io {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::io, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(errc::io, "parse error in '" + path + "': " + e.what());
  }
  return j;
}

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), errc::io, "cannot write '" + path + "'");
  out << text;
}

inline json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

}  // namespace io

// --------------------------------------------------------------------------
// Mesh: coordinates written with 17 significant digits.
// --------------------------------------------------------------------------

inline std::string mesh_to_json_string(const DiskMesh& m) {
  std::ostringstream s;
  s << "{\n  \"boundary_loop\": [";
  for (int i = 0; i < m.num_boundary(); ++i) s << (i ? "," : "") << m.boundary_loop[i];
  s << "],\n  \"refinement_level\": " << m.refinement_level << ",\n  \"triangles\": [";
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    s << (t ? "," : "") << "[" << tri[0] << "," << tri[1] << "," << tri[2] << "]";
  }
  s << "],\n  \"vertices\": [";
  for (int v = 0; v < m.num_vertices(); ++v)
    s << (v ? "," : "") << "[" << io::fmt17(m.vertices[v].x()) << ","
      << io::fmt17(m.vertices[v].y()) << "]";
  s << "]\n}\n";
  return s.str();
}

inline void write_mesh(const DiskMesh& m, const std::string& path) {
  io::save_text(path, mesh_to_json_string(m));
}

inline std::shared_ptr<const DiskMesh> mesh_from_json(const json& j) {
  DiskMesh m;
  for (const auto& v : j.at("vertices"))
    m.vertices.push_back(Vec2(v.at(0).get<double>(), v.at(1).get<double>()));
  for (const auto& t : j.at("triangles"))
    m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  m.refinement_level = j.at("refinement_level").get<int>();
  std::vector<int> loop;
  for (const auto& b : j.at("boundary_loop")) loop.push_back(b.get<int>());
  m.finalize();
  require(loop == m.boundary_loop, errc::io, "stored boundary loop is inconsistent with triangles");
  m.validate();
  return std::make_shared<const DiskMesh>(std::move(m));
}

inline std::shared_ptr<const DiskMesh> read_mesh(const std::string& path) {
  return mesh_from_json(io::load_json(path));
}

// --------------------------------------------------------------------------
// Metric
// --------------------------------------------------------------------------

inline json metric_to_json(const ConformalMetric& h) {
  json j;
  j["mesh_ref"] = json::parse(mesh_to_json_string(*h.mesh));
  j["w"] = io::vec_to_json(h.w);
  j["label"] = h.label;
  return j;
}

inline std::shared_ptr<const DiskMesh> mesh_ref_from_json(const json& ref) {
  if (ref.is_string()) return read_mesh(ref.get<std::string>());
  return mesh_from_json(ref);
}

inline ConformalMetric metric_from_json(const json& j) {
  ConformalMetric h{mesh_ref_from_json(j.at("mesh_ref")), io::vec_from_json(j.at("w")),
                    j.value("label", "")};
  h.check();
  return h;
}

// --------------------------------------------------------------------------
// Spectral result
// --------------------------------------------------------------------------

inline json spectral_to_json(const SpectralResult& r) {
  json j;
  j["lambda1"] = r.lambda1;
  j["residual"] = r.residual;
  j["u"] = io::vec_to_json(r.u.values);
  j["mesh_level"] = r.u.mesh->refinement_level;
  return j;
}

// --------------------------------------------------------------------------
// Path
// --------------------------------------------------------------------------

inline json path_to_json(const MetricPath& p) {
  json j;
  j["times"] = io::vec_to_json(p.times);
  json w = json::array();
  for (const auto& wi : p.w) w.push_back(io::vec_to_json(wi));
  j["w"] = std::move(w);
  j["sigma"] = io::vec_to_json(p.sigma);
  j["provenance"] = p.provenance;
  j["mesh_ref"] = json::parse(mesh_to_json_string(*p.mesh));
  return j;
}

inline MetricPath path_from_json(const json& j) {
  MetricPath p;
  p.mesh = mesh_ref_from_json(j.at("mesh_ref"));
  p.times = io::vec_from_json(j.at("times"));
  for (const auto& wi : j.at("w")) p.w.push_back(io::vec_from_json(wi));
  p.sigma = io::vec_from_json(j.at("sigma"));
  if (j.contains("provenance"))
    for (auto& [k, v] : j.at("provenance").items()) p.provenance[k] = v.get<std::string>();
  p.check();
  return p;
}

// --------------------------------------------------------------------------
// Sweep report
// --------------------------------------------------------------------------

inline json sweep_to_json(const SweepReport& r) {
  json j;
  j["times"] = io::vec_to_json(r.times);
  j["lambda"] = io::vec_to_json(r.lambda);
  j["error_estimate"] = io::vec_to_json(r.error_estimate);
  j["lambda_star"] = r.lambda_star;
  j["path_in_class"] = verdict_name(r.path_in_class);
  j["max_eigenfunction_jump"] = r.max_eigenfunction_jump;
  j["failed_at"] = r.failed_at;
  if (!r.failure_message.empty()) j["failure_message"] = r.failure_message;
  return j;
}

// --------------------------------------------------------------------------
// Flow result
// --------------------------------------------------------------------------

inline json flow_to_json(const FlowResult& f) {
  json j;
  j["times"] = io::vec_to_json(f.times);
  json seeds = json::array();
  for (const auto& s : f.seeds) seeds.push_back({s.x(), s.y()});
  j["seeds"] = std::move(seeds);
  json trajs = json::array();
  for (const auto& tr : f.trajectories) {
    json t = json::array();
    for (const auto& p : tr) t.push_back({p.x(), p.y()});
    trajs.push_back(std::move(t));
  }
  j["trajectories"] = std::move(trajs);
  j["jacobian_log"] = io::vec_to_json(f.jacobian_log);
  j["volume_drift"] = io::vec_to_json(f.volume_drift);
  j["cell_drift"] = io::vec_to_json(f.cell_drift);
  j["compatibility"] = io::vec_to_json(f.compatibility);
  j["max_displacement"] = f.max_displacement;
  j["max_boundary_offset"] = f.max_boundary_offset;
  j["max_boundary_normal"] = f.max_boundary_normal;
  j["max_pde_residual"] = f.max_pde_residual;
  return j;
}

// --------------------------------------------------------------------------
// Cylinder + certificate
// --------------------------------------------------------------------------

inline json check_to_json(const CertCheck& c) {
  return json{{"value", c.value},
              {"error_estimate", c.error_estimate},
              {"tolerance", c.tolerance},
              {"pass", c.pass}};
}

inline CertCheck check_from_json(const json& j) {
  CertCheck c;
  c.value = j.at("value").get<double>();
  c.error_estimate = j.at("error_estimate").get<double>();
  c.tolerance = j.at("tolerance").get<double>();
  c.pass = j.at("pass").get<bool>();
  return c;
}

inline json certificate_to_json(const ConcordanceCertificate& c) {
  json j;
  j["mode"] = mode_name(c.mode);
  j["pass"] = c.pass;
  j["A"] = c.A;
  j["epsilon"] = c.epsilon;
  if (std::isfinite(c.lambda_star)) j["lambda_star"] = c.lambda_star;
  j["min_R"] = check_to_json(c.min_R);
  j["min_R"]["sample"] = c.min_R_sample;
  j["min_R"]["vertex"] = c.min_R_vertex;
  j["H_cyl"] = check_to_json(c.max_abs_H_cyl);
  j["base_H0"] = check_to_json(c.base_H0);
  j["base_H1"] = check_to_json(c.base_H1);
  j["endpoint0"] = check_to_json(c.endpoint0);
  j["endpoint1"] = check_to_json(c.endpoint1);
  j["collars_ok"] = c.collars_ok;
  if (c.mode == ConcordanceMode::outward_bent) j["ladder_c"] = check_to_json(c.ladder_c);
  j["slice_H_min"] = io::vec_to_json(c.slice_H_min);
  j["provenance"] = c.provenance;
  return j;
}

inline json cylinder_to_json(const CylinderMetric& cyl) {
  json j;
  j["path"] = path_to_json(cyl.path);
  j["warp_kind"] = warp_kind_name(cyl.warp_kind);
  json warp = json::array();
  for (const auto& u : cyl.warp) warp.push_back(io::vec_to_json(u));
  j["warp"] = std::move(warp);
  if (cyl.warp_kind == WarpKind::eigen) j["lambda"] = io::vec_to_json(cyl.lambda);
  j["A"] = cyl.A;
  j["epsilon"] = cyl.epsilon;
  j["provenance"] = cyl.provenance;
  return j;
}

inline CylinderMetric cylinder_from_json(const json& j) {
  CylinderMetric cyl;
  cyl.path = path_from_json(j.at("path"));
  std::string kind = j.at("warp_kind").get<std::string>();
  if (kind == "eigen")
    cyl.warp_kind = WarpKind::eigen;
  else if (kind == "unit")
    cyl.warp_kind = WarpKind::unit;
  else
    fail(errc::io, "unknown warp kind '" + kind + "'");
  for (const auto& u : j.at("warp")) cyl.warp.push_back(io::vec_from_json(u));
  if (cyl.warp_kind == WarpKind::eigen) cyl.lambda = io::vec_from_json(j.at("lambda"));
  cyl.A = j.at("A").get<double>();
  cyl.epsilon = j.at("epsilon").get<double>();
  if (j.contains("provenance"))
    for (auto& [k, v] : j.at("provenance").items()) cyl.provenance[k] = v.get<std::string>();
  cyl.check();
  return cyl;
}

// --------------------------------------------------------------------------
// Plot series (CSV, full precision)
// --------------------------------------------------------------------------

struct PlotSeries {
  std::string name;    // file stem, e.g. "lambda_t"
  std::string header;  // CSV header line
  Eigen::VectorXd t;
  Eigen::VectorXd y;
};

inline void write_csv(const PlotSeries& s, const std::string& dir) {
  std::ostringstream out;
  out << s.header << "\n";
  for (int i = 0; i < s.t.size(); ++i)
    out << io::fmt17(s.t[i]) << "," << io::fmt17(s.y[i]) << "\n";
  io::save_text((std::filesystem::path(dir) / (s.name + ".csv")).string(), out.str());
}

}  // namespace concord
