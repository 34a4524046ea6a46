// Command-line front end: generate model meshes, compute spectra and
// kernels, run verification suites, persist reports.
//
// Exit codes: 0 success, 1 solver/runtime failure, 2 validation findings,
// 3 verification failure, 64 usage error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hodgelab/heat.hpp"
#include "hodgelab/report.hpp"
#include "hodgelab/surface.hpp"
#include "hodgelab/verify.hpp"

namespace {

using namespace hodgelab;

struct MeshArgs {
  std::string mesh_path;
  std::string model;
  int level = 3;
  int n = 16, m = 16;

  SimplicialSurface build() const {
    if (!mesh_path.empty()) return load_surface(mesh_path);
    if (model == "icosphere") return make_icosphere(level);
    if (model == "torus") return make_flat_torus(n, m);
    throw CLI::ValidationError("--model must be icosphere or torus (or use --mesh)");
  }
};

void add_mesh_options(CLI::App* cmd, MeshArgs& args, bool require_source) {
  auto* mesh = cmd->add_option("--mesh", args.mesh_path, "input OFF file");
  auto* model = cmd->add_option("--model", args.model, "model surface: icosphere | torus");
  cmd->add_option("--level", args.level, "icosphere subdivision level");
  cmd->add_option("--n", args.n, "torus grid columns");
  cmd->add_option("--m", args.m, "torus grid rows");
  if (require_source) {
    mesh->excludes(model);
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  if (vals.empty()) throw CLI::ValidationError("empty grid");
  return vals;
}

int cmd_mesh_gen(const MeshArgs& args, const std::string& out) {
  SimplicialSurface s = args.build();
  save_off(s, out);
  if (s.curvature) {
    std::ofstream side(out + ".constants");
    side << "K = " << s.curvature->K << "\nN = " << s.curvature->N << "\n";
  }
  std::cout << "wrote " << out << " (V=" << s.vertex_count() << " E=" << s.edge_count()
            << " F=" << s.face_count() << ")\n";
  return 0;
}

int cmd_mesh_validate(const std::string& path) {
  SimplicialSurface s = load_surface(path);
  MeshDiagnostics d = validate_surface(s);
  std::cout << "vertices " << s.vertex_count() << ", edges " << s.edge_count() << ", faces "
            << s.face_count() << "\n"
            << "euler characteristic " << s.euler_characteristic() << "\n"
            << "manifold " << (d.manifold && d.closed ? "yes" : "no") << ", oriented "
            << (d.oriented ? "yes" : "no") << "\n"
            << "edge length range [" << d.min_edge_length << ", " << d.max_edge_length << "]\n"
            << "mesh size h = " << d.max_edge_length << "\n"
            << "non-Delaunay edges " << d.non_delaunay_edges << " (degenerate "
            << d.degenerate_delaunay_edges << "), min cot weight " << d.min_cot_weight << "\n";
  for (const auto& f : d.findings) std::cout << "finding: " << f << "\n";
  return d.clean() ? 0 : 2;
}

int cmd_spectrum(const MeshArgs& args, int degree, int count, const std::string& out) {
  SimplicialSurface s = args.build();
  DecOperators ops = build_dec(s);
  int dof = ops.dof(degree);
  if (count > dof) {
    std::cerr << "warning: --count " << count << " exceeds " << dof << " DOF, clamping\n";
    count = dof;
  }
  SpectralData spec = eigensolve_auto(ops, degree, count);
  {
    std::ofstream csv(out + ".csv");
    csv << "index,eigenvalue\n";
    csv.precision(17);
    for (int i = 0; i < spec.count(); ++i) csv << i << ',' << spec.eigenvalues[i] << '\n';
  }
  {
    std::ofstream js(out + ".json");
    js.precision(17);
    js << "{\n  \"degree\": " << degree << ",\n  \"count\": " << spec.count()
       << ",\n  \"full\": " << (spec.full ? "true" : "false")
       << ",\n  \"residual_bound\": " << spec.residual_bound << ",\n  \"lambda_min\": "
       << spec.eigenvalues[0] << ",\n  \"lambda_max\": "
       << spec.eigenvalues[spec.count() - 1] << "\n}\n";
  }
  std::cout << "wrote " << out << ".csv and " << out << ".json (" << spec.count()
            << " eigenvalues)\n";
  return 0;
}

int cmd_verify(const MeshArgs& args, const std::string& suite, const std::string& t_grid,
               std::uint64_t seed, const std::string& config, const std::string& out) {
  SimplicialSurface s = args.build();
  SuiteConfig cfg;
  if (!config.empty()) cfg = SuiteConfig::from_file(config);
  if (!t_grid.empty()) cfg.t_grid = parse_grid(t_grid);
  cfg.seed = seed;

  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t fingerprint = mesh_fingerprint(s);
  auto t1 = std::chrono::steady_clock::now();
  SuiteResult result = run_suite(s, suite, cfg);
  auto t2 = std::chrono::steady_clock::now();

  ReportDocument doc;
  doc.config_echo = "suite=" + suite + " " + cfg.echo();
  doc.mesh_fingerprint = fingerprint;
  doc.records = result.records;
  doc.timings.push_back({"fingerprint", std::chrono::duration<double>(t1 - t0).count()});
  doc.timings.push_back({"suite", std::chrono::duration<double>(t2 - t1).count()});
  doc.write_json(out + ".json");
  doc.write_jsonl(out + ".jsonl");
  doc.write_csv(out + ".csv");

  int failures = 0;
  for (const auto& r : doc.records)
    if (!r.passed()) ++failures;
  std::cout << doc.records.size() << " records, " << failures << " failures"
            << (result.strictly_delaunay ? "" : " (non-Delaunay: diagnostics only)") << "\n";
  return failures == 0 ? 0 : 3;
}

int cmd_study(const std::string& check, const std::string& levels_text, const SuiteConfig& base,
              const std::string& out) {
  auto dots = levels_text.find("..");
  if (dots == std::string::npos) throw CLI::ValidationError("--levels expects a..b");
  int lo = std::stoi(levels_text.substr(0, dots));
  int hi = std::stoi(levels_text.substr(dots + 2));
  std::vector<int> levels;
  for (int l = lo; l <= hi; ++l) levels.push_back(l);
  if (levels.size() < 3) throw CLI::ValidationError("need at least 3 levels");

  SuiteConfig cfg = base;
  double final_tol = check == "commutation" ? 1e-9 : 1e-2;
  StudyResult res = convergence_study(check, levels, cfg, final_tol);

  std::ofstream plot(out + ".dat");
  plot.precision(17);
  for (std::size_t i = 0; i < res.mesh_h.size(); ++i)
    plot << res.mesh_h[i] << ' ' << res.violation[i] << '\n';

  ReportDocument doc;
  doc.config_echo = "study=" + check + " levels=" + levels_text;
  doc.records.push_back(res.record);
  doc.write_json(out + ".json");

  std::cout << "study " << check << ": final violation " << res.violation.back() << " (tol "
            << final_tol << "), verdict " << res.record.verdict << "\n";
  return res.record.passed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete spectral-geometry laboratory for heat flow on 1-forms"};
  app.require_subcommand(1);

  // mesh gen | mesh validate
  auto* mesh = app.add_subcommand("mesh", "generate or validate meshes");
  mesh->require_subcommand(1);
  MeshArgs gen_args;
  std::string gen_out;
  auto* gen = mesh->add_subcommand("gen", "generate a model mesh");
  add_mesh_options(gen, gen_args, false);
  gen->add_option("--out", gen_out, "output OFF path")->required();
  std::string validate_path;
  auto* validate = mesh->add_subcommand("validate", "validate an OFF mesh");
  validate->add_option("mesh", validate_path, "OFF file")->required();

  // spectrum
  MeshArgs spec_args;
  int spec_degree = 0, spec_count = 20;
  std::string spec_out = "spectrum";
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of one Laplacian");
  add_mesh_options(spectrum, spec_args, true);
  spectrum->add_option("--degree", spec_degree, "0 or 1")->check(CLI::Range(0, 1));
  spectrum->add_option("--count", spec_count, "number of eigenvalues (-1 = all)");
  spectrum->add_option("--out", spec_out, "output prefix");

  // verify
  MeshArgs verify_args;
  std::string verify_suite = "all", verify_tgrid, verify_config, verify_out = "report";
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "run verification suites");
  add_mesh_options(verify, verify_args, true);
  verify->add_option("--suite", verify_suite, "identities|inequalities|spectral|kernel|all");
  verify->add_option("--t-grid", verify_tgrid, "comma-separated times");
  verify->add_option("--seed", verify_seed, "random seed");
  verify->add_option("--config", verify_config, "suite config file");
  verify->add_option("--out", verify_out, "report prefix");

  // study
  std::string study_check, study_levels, study_out = "study";
  auto* study = app.add_subcommand("study", "mesh-refinement convergence study");
  study->add_option("--check", study_check, "check name (hsu, be2, bl_strong, ...)")->required();
  study->add_option("--levels", study_levels, "icosphere levels a..b")->required();
  study->add_option("--out", study_out, "output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (gen->parsed()) return cmd_mesh_gen(gen_args, gen_out);
    if (validate->parsed()) return cmd_mesh_validate(validate_path);
    if (spectrum->parsed()) return cmd_spectrum(spec_args, spec_degree, spec_count, spec_out);
    if (verify->parsed())
      return cmd_verify(verify_args, verify_suite, verify_tgrid, verify_seed, verify_config,
                        verify_out);
    if (study->parsed()) return cmd_study(study_check, study_levels, SuiteConfig{}, study_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 64;
}
