// Batch front-end over the disk-metric library: mesh generation, eigenvalue
// queries, path construction, volume-normalizing flows, concordance builds
// and certificate checks, all as composable subcommands over JSON files.
//
// Exit codes: 0 success / certificate pass, 2 certificate or verdict fail,
// 1 software or input error (machine-readable JSON on stderr).

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <random>

#include "concord/serialize.hpp"

using namespace concord;
namespace fs = std::filesystem;

namespace {

std::string resolve_out(const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  const char* base = std::getenv("CONCORD_OUT_DIR");
  if (base && *base) return (fs::path(base) / p).string();
  return path;
}

void write_json(const json& j, const std::string& out) {
  io::save_text(resolve_out(out), j.dump(2) + "\n");
}

/// Metric specs understood on the command line: the named families plus
/// "rand_bump", whose parameters derive deterministically from --seed.
ConformalMetric cli_metric(std::shared_ptr<const DiskMesh> mesh, const std::string& spec,
                           unsigned seed) {
  if (spec == "rand_bump") {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(-0.4, 0.4), off(-0.5, 0.5), width(0.3, 0.8);
    double a = amp(rng), r0 = off(rng), s = width(rng);
    auto h = bump_metric(std::move(mesh), a, r0, s);
    h.label = "rand_bump";
    return h;
  }
  return named_metric(std::move(mesh), spec);
}

MetricPath build_path_from_flags(const std::string& from, const std::string& to, int level, int N,
                                 bool clamp, bool match, unsigned seed) {
  auto mesh = generate_disk_mesh(level);
  auto h0 = cli_metric(mesh, from, seed);
  auto h1 = cli_metric(mesh, to, seed + 1);
  MetricPath p = conformal_segment(h0, h1, N);
  if (clamp) p = clamp_reparametrize(p);
  if (match) p = volume_match(p);
  return p;
}

std::vector<Vec2> parse_seeds(const std::string& spec) {
  if (spec.rfind("grid:", 0) == 0) {
    int lvl = std::stoi(spec.substr(5));
    require(lvl >= 0 && lvl <= 8, errc::bounds, "seed grid level out of range");
    return generate_disk_mesh(lvl)->vertices;
  }
  if (spec.rfind("file:", 0) == 0) {
    json j = io::load_json(spec.substr(5));
    std::vector<Vec2> seeds;
    for (const auto& p : j) seeds.push_back(Vec2(p.at(0).get<double>(), p.at(1).get<double>()));
    return seeds;
  }
  fail(errc::config, "seeds must be 'grid:<level>' or 'file:<path>'");
}

int run(int argc, char** argv) {
  CLI::App app{"spectral positivity, isotopies and concordance certificates on the disk"};
  app.require_subcommand(1);

  int level = 5, N = 64, substeps = 8, A_max = 20;
  double tol = 1e-10, epsilon = 0.0, margin = 0.0;
  unsigned seed = 1;
  bool verbose = false;
  std::string out, metric_spec = "flat", from = "flat", to = "hemisphere";
  std::string path_file, cyl_file, in_file, mode_str, seeds_spec = "grid:2", outdir = ".";
  bool clamp = false, match = false;

  app.add_flag("-v,--verbose", verbose, "chatty progress on stdout");

  auto* mesh_cmd = app.add_subcommand("mesh", "mesh operations");
  auto* mesh_gen = mesh_cmd->add_subcommand("gen", "generate the structured disk mesh");
  mesh_gen->add_option("--level", level, "refinement level")->check(CLI::Range(0, 10));
  mesh_gen->add_option("-o,--out", out, "output mesh JSON")->required();

  auto* lam = app.add_subcommand("lambda1", "principal eigenvalue of a named metric");
  lam->add_option("--metric", metric_spec, "flat|hemisphere|scaled_flat:c|bump:a,r0,s|rand_bump");
  lam->add_option("--level", level)->check(CLI::Range(0, 10));
  lam->add_option("--tol", tol);
  lam->add_option("--seed", seed);
  lam->add_option("--margin", margin, "positivity margin");
  lam->add_option("-o,--out", out, "output report JSON");

  auto* path_cmd = app.add_subcommand("path", "metric path operations");
  auto* path_build = path_cmd->add_subcommand("build", "conformal segment between named metrics");
  path_build->add_option("--from", from);
  path_build->add_option("--to", to);
  path_build->add_option("--level", level)->check(CLI::Range(0, 10));
  path_build->add_option("-N,--samples", N, "number of time intervals");
  path_build->add_flag("--clamp", clamp, "reparametrize to constant outer thirds");
  path_build->add_flag("--volume-match", match, "normalize total area along the path");
  path_build->add_option("--seed", seed);
  path_build->add_option("-o,--out", out)->required();

  auto* path_sweep = path_cmd->add_subcommand("sweep", "eigenvalue sweep along a path");
  path_sweep->add_option("--path", path_file)->required();
  path_sweep->add_option("--tol", tol);
  path_sweep->add_option("-o,--out", out);

  auto* moser_cmd = app.add_subcommand("moser", "volume-normalizing flow");
  auto* moser_run = moser_cmd->add_subcommand("run", "integrate the flow of a matched path");
  moser_run->add_option("--path", path_file)->required();
  moser_run->add_option("--seeds", seeds_spec, "grid:<level> or file:<json points>");
  moser_run->add_option("--substeps", substeps);
  moser_run->add_option("-o,--out", out);

  auto* conc = app.add_subcommand("concordance", "cylinder builders and certificates");
  auto* cbuild = conc->add_subcommand("build", "build a cylinder over a path");
  std::string kind = "warped";
  cbuild->add_option("--kind", kind, "warped|product|bent");
  cbuild->add_option("--from", from);
  cbuild->add_option("--to", to);
  cbuild->add_option("--level", level)->check(CLI::Range(0, 10));
  cbuild->add_option("-N,--samples", N);
  cbuild->add_option("--path", path_file, "use a stored path instead of --from/--to");
  cbuild->add_option("--epsilon", epsilon);
  cbuild->add_option("--A-max", A_max, "doubling-search exponent limit");
  cbuild->add_option("--tol", tol);
  cbuild->add_option("--mode", mode_str, "certificate mode (default from kind)");
  cbuild->add_option("--seed", seed);
  cbuild->add_option("-o,--out", out)->required();

  auto* cverify = conc->add_subcommand("verify", "verify a stored cylinder");
  cverify->add_option("--cyl", cyl_file)->required();
  cverify->add_option("--mode", mode_str);
  cverify->add_option("--tol", tol);
  cverify->add_option("-o,--out", out);

  auto* report = app.add_subcommand("report", "report generation");
  auto* plotdata = report->add_subcommand("plotdata", "emit CSV series from a stored artifact");
  plotdata->add_option("--in", in_file)->required();
  plotdata->add_option("--outdir", outdir);

  CLI11_PARSE(app, argc, argv);

  if (*mesh_gen) {
    auto mesh = generate_disk_mesh(level);
    write_mesh(*mesh, resolve_out(out));
    if (verbose)
      std::cout << "mesh level " << level << ": " << mesh->num_vertices() << " vertices\n";
    return 0;
  }

  if (*lam) {
    auto mesh = generate_disk_mesh(level);
    auto h = cli_metric(mesh, metric_spec, seed);
    SpectralResult r = principal_eigenpair(h, tol);
    json j = spectral_to_json(r);
    j["metric"] = metric_spec;
    if (level >= 1) {
      auto rep = spectral_positivity(h, margin, tol);
      j["positivity"] = {{"verdict", verdict_name(rep.verdict)},
                         {"lambda_coarse", rep.lambda_coarse},
                         {"error_estimate", rep.error_estimate}};
    }
    if (!out.empty()) write_json(j, out);
    std::cout << "lambda1 = " << io::fmt17(r.lambda1) << " (residual " << r.residual << ")\n";
    return 0;
  }

  if (*path_build) {
    MetricPath p = build_path_from_flags(from, to, level, N, clamp, match, seed);
    write_json(path_to_json(p), out);
    return 0;
  }

  if (*path_sweep) {
    MetricPath p = path_from_json(io::load_json(path_file));
    SweepReport rep = spectral_sweep(p, tol);
    if (!out.empty()) write_json(sweep_to_json(rep), out);
    std::cout << "lambda_* = " << io::fmt17(rep.lambda_star) << ", path in class: "
              << verdict_name(rep.path_in_class) << "\n";
    return rep.path_in_class == Verdict::yes ? 0 : 2;
  }

  if (*moser_run) {
    MetricPath p = path_from_json(io::load_json(path_file));
    FlowOptions opt;
    opt.substeps = substeps;
    FlowResult f = moser_flow(p, parse_seeds(seeds_spec), opt);
    if (!out.empty()) write_json(flow_to_json(f), out);
    std::cout << "volume drift " << io::fmt17(f.volume_drift.maxCoeff()) << ", compatibility "
              << io::fmt17(f.compatibility.cwiseAbs().maxCoeff()) << "\n";
    return 0;
  }

  if (*cbuild) {
    MetricPath p = path_file.empty()
                       ? build_path_from_flags(from, to, level, N, /*clamp=*/true,
                                               /*match=*/kind == "bent", seed)
                       : path_from_json(io::load_json(path_file));
    BuildOptions bopt;
    bopt.A_max_exponent = A_max;
    bopt.tol = tol;
    CylinderMetric cyl;
    ConcordanceMode mode;
    if (kind == "warped") {
      cyl = build_warped_concordance(p, bopt);
      mode = ConcordanceMode::weak_min;
    } else if (kind == "product") {
      cyl = build_product_concordance(p, bopt);
      mode = ConcordanceMode::strong_min;
    } else if (kind == "bent") {
      cyl = build_outward_bent(p, epsilon, bopt);
      mode = epsilon > 0.0 ? ConcordanceMode::outward_bent : ConcordanceMode::weak_min;
    } else {
      fail(errc::config, "unknown cylinder kind '" + kind + "'");
    }
    if (!mode_str.empty()) mode = mode_from_name(mode_str);
    ConcordanceCertificate cert = verify_concordance(cyl, mode, tol);
    json j = cylinder_to_json(cyl);
    j["certificate"] = certificate_to_json(cert);
    write_json(j, out);
    std::cout << "A = " << cyl.A << ", certificate " << (cert.pass ? "PASS" : "FAIL") << " ("
              << mode_name(mode) << ", min R = " << io::fmt17(cert.min_R.value) << ")\n";
    return cert.pass ? 0 : 2;
  }

  if (*cverify) {
    json j = io::load_json(cyl_file);
    CylinderMetric cyl = cylinder_from_json(j);
    ConcordanceMode mode = ConcordanceMode::weak_min;
    if (!mode_str.empty())
      mode = mode_from_name(mode_str);
    else if (j.contains("certificate"))
      mode = mode_from_name(j.at("certificate").at("mode").get<std::string>());
    ConcordanceCertificate cert = verify_concordance(cyl, mode, tol);
    if (!out.empty()) write_json(certificate_to_json(cert), out);
    std::cout << "certificate " << (cert.pass ? "PASS" : "FAIL") << " (" << mode_name(mode)
              << ", min R = " << io::fmt17(cert.min_R.value) << ", max|H_cyl| = "
              << io::fmt17(cert.max_abs_H_cyl.value) << ")\n";
    return cert.pass ? 0 : 2;
  }

  if (*plotdata) {
    json j = io::load_json(in_file);
    std::vector<std::string> warnings;
    int written = 0;
    if (j.contains("lambda") && j.contains("times")) {  // sweep report
      write_csv({"lambda_t", "t,lambda", io::vec_from_json(j["times"]),
                 io::vec_from_json(j["lambda"])},
                outdir);
      ++written;
    } else {
      warnings.push_back("no eigenvalue series in input");
    }
    if (j.contains("warp_kind")) {  // cylinder: recompute the certified fields
      CylinderMetric cyl = cylinder_from_json(j);
      CylinderFields f = evaluate_cylinder(cyl);
      int n = cyl.samples();
      Eigen::VectorXd minR(n), hcyl(n), hslice(n), lam(n);
      for (int i = 0; i < n; ++i) {
        minR[i] = (f.spatial[i] - f.time_coeff[i] / (cyl.A * cyl.A)).minCoeff();
        hcyl[i] = f.H_cyl[i].cwiseAbs().maxCoeff();
        hslice[i] = f.slice_H_min(i, cyl.A);
      }
      write_csv({"minR_t", "t,min_R", f.times, minR}, outdir);
      write_csv({"Hcyl_t", "t,max_abs_H_cyl", f.times, hcyl}, outdir);
      write_csv({"Hslice_t", "t,min_H_slice", f.times, hslice}, outdir);
      written += 3;
      if (cyl.warp_kind == WarpKind::eigen) {
        write_csv({"lambda_t", "t,lambda", f.times, cyl.lambda}, outdir);
        ++written;
      }
    } else {
      warnings.push_back("no cylinder fields in input");
    }
    if (!warnings.empty()) std::cerr << json{{"warnings", warnings}}.dump() << "\n";
    require(written > 0, errc::config, "input contains no plottable series");
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"kind", errc_name(e.code())}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
}
