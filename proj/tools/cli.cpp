#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "plasmasym/equilibria/bobnev.hpp"
#include "plasmasym/equilibria/residuals.hpp"
#include "plasmasym/equilibria/stability.hpp"
#include "plasmasym/equilibria/transform.hpp"
#include "plasmasym/error.hpp"
#include "plasmasym/fields/io.hpp"
#include "plasmasym/flux/flux.hpp"
#include "plasmasym/io.hpp"
#include "plasmasym/lie/lie.hpp"

namespace plasmasym::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
namespace eq = plasmasym::equilibria;

namespace {

// Everything a subcommand needs; filled by CLI11 before dispatch.
struct Options {
  std::string out_dir = ".";
  std::string output;
  std::string format = "csv";

  std::string pde_file;
  std::string generator_file;
  std::string dedupe = "exact";

  double R = 1.0;
  double B0 = 1.0;
  double P0 = 0.05;
  int n = 3;
  int grid = 65;
  double lo = -1.2;
  double hi = 1.2;
  std::string pressure = "corrected";

  std::string state_file;
  std::string M;
  std::vector<double> translate;
  std::vector<double> rotate;
  std::vector<double> scale;
  bool scale_squared = false;
  double scale3 = 0.0;

  std::string problem_file;
  int resolution = 0;
  std::string solution_file;
  std::string tau;
  int cart_n = 33;
  int margin = 2;
  double inset = 0.0;
  std::optional<double> z_min;
  std::optional<double> z_max;

  std::string system = "mhd";
  bool stability = false;
  double factor = 10.0;
  double floor = 1e-12;
  std::string coarse_file;
};

// Thrown when a run completes but its verification gate fails.
struct VerificationFailure {};

fields::Format parse_format(const std::string& f) {
  if (f == "csv") return fields::Format::csv;
  if (f == "vtk") return fields::Format::vtk;
  throw ValidationError("--format must be csv or vtk");
}

fs::path output_path(const Options& o, const std::string& fallback) {
  return fs::path(o.out_dir) / (o.output.empty() ? fallback : o.output);
}

json norms_json(const std::vector<eq::ResidualNorm>& norms) {
  json j = json::object();
  for (const auto& n : norms) j[n.name] = {{"linf", n.linf}, {"l2", n.l2}};
  return j;
}

json summary_json(const eq::CriterionSummary& s) {
  return {{"stable", s.stable},
          {"unstable", s.unstable},
          {"not_applicable", s.not_applicable},
          {"indeterminate", s.indeterminate},
          {"max_margin", s.max_margin}};
}

void cmd_lie_detsys(const Options& o, json& rep, std::ostream& out) {
  rep["inputs"]["pde"] = o.pde_file;
  rep["params"]["dedupe"] = o.dedupe;
  lie::Dedupe mode = lie::Dedupe::exact;
  if (o.dedupe == "scalar") {
    mode = lie::Dedupe::scalar_multiple;
  } else if (o.dedupe != "exact") {
    throw ValidationError("--dedupe must be exact or scalar");
  }
  const lie::PdeSystem sys = lie::load_system(o.pde_file);
  const lie::DeterminingSystem det = lie::build_determining_system(sys, mode);
  const fs::path listing = output_path(o, "determining.txt");
  write_text_file(listing, lie::format_listing(det));

  rep["counts"] = {{"count", det.count()}, {"raw", det.raw_count}};
  if (det.expected_count) {
    rep["counts"]["target"] = *det.expected_count;
    rep["counts"]["matches_target"] = det.count() == *det.expected_count;
  }
  rep["assumptions"] = det.assumptions;
  rep["outputs"]["equations"] = listing.string();
  // Counts are a soft gate: a mismatch is reported, not failed.
  rep["pass"] = true;
  out << "determining equations: " << det.count();
  if (det.expected_count) out << " (target " << *det.expected_count << ")";
  out << "\nwritten to " << listing.string() << "\n";
}

void cmd_lie_verify(const Options& o, json& rep, std::ostream& out) {
  rep["inputs"]["pde"] = o.pde_file;
  rep["inputs"]["generator"] = o.generator_file;
  const lie::PdeSystem sys = lie::load_system(o.pde_file);
  const lie::DeterminingSystem det = lie::build_determining_system(sys);
  const lie::CandidateGenerator gen = lie::load_generator(o.generator_file, sys);
  const std::vector<expr::Expr> res = lie::verify_generator(sys, det, gen);

  json nonzero = json::array();
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (res[i].is_zero()) continue;
    if (nonzero.size() < 10) nonzero.push_back({{"equation", i}, {"residual", expr::to_string(res[i], gen.ctx)}});
  }
  int count_nonzero = 0;
  for (const auto& r : res) count_nonzero += r.is_zero() ? 0 : 1;
  rep["counts"] = {{"count", det.count()}, {"nonzero_residuals", count_nonzero}};
  if (det.expected_count) rep["counts"]["target"] = *det.expected_count;
  rep["residuals"] = nonzero;
  rep["assumptions"] = det.assumptions;
  rep["pass"] = count_nonzero == 0;
  out << (count_nonzero == 0 ? "generator verified: all " : "generator rejected: ") << (count_nonzero == 0 ? res.size() : count_nonzero)
      << (count_nonzero == 0 ? " residuals vanish\n" : " nonzero residuals\n");
  if (count_nonzero != 0) throw VerificationFailure{};
}

void cmd_vortex(const Options& o, json& rep, std::ostream& out) {
  eq::PressureForm pf = eq::PressureForm::corrected;
  if (o.pressure == "as-printed") {
    pf = eq::PressureForm::as_printed;
  } else if (o.pressure != "corrected") {
    throw ValidationError("--pressure must be corrected or as-printed");
  }
  if (o.grid < 5) throw ValidationError("--grid must be >= 5");
  if (!(o.hi > o.lo)) throw ValidationError("--hi must exceed --lo");
  const eq::BobnevParams p = eq::BobnevParams::make(o.R, o.B0, o.P0, o.n, pf);
  const CGLState s = eq::bobnev_state(p, fields::Grid3::cube(o.lo, o.hi, o.grid));
  const fs::path path = output_path(o, o.format == "vtk" ? "vortex.vtk" : "vortex.csv");
  fields::export_state(s, path, parse_format(o.format));

  rep["params"] = {{"R", o.R}, {"B0", o.B0}, {"P0", o.P0}, {"n", o.n}, {"grid", o.grid},
                   {"lo", o.lo}, {"hi", o.hi}, {"pressure", o.pressure}, {"lambda", p.lambda},
                   {"gamma_b", p.gamma_b}, {"p_max", eq::BobnevVortex(p).p_max()}};
  rep["outputs"]["state"] = path.string();
  rep["pass"] = true;
  out << "lambda_" << o.n << " = " << fields::format_double(p.lambda) << "\nwritten to " << path.string() << "\n";
}

std::optional<eq::PointSymmetry> point_symmetry(const Options& o) {
  int given = 0;
  std::optional<eq::PointSymmetry> op;
  if (!o.translate.empty()) {
    ++given;
    if (o.translate.size() != 4) throw ValidationError("--translate takes K1 K2 K3 K4");
    op = eq::Translate{o.translate[0], o.translate[1], o.translate[2], o.translate[3], 1.0};
  }
  if (!o.rotate.empty()) {
    ++given;
    if (o.rotate.size() != 3) throw ValidationError("--rotate takes phi theta psi");
    op = eq::Rotate{o.rotate[0], o.rotate[1], o.rotate[2]};
  }
  if (!o.scale.empty()) {
    ++given;
    if (o.scale.size() != 2) throw ValidationError("--scale takes t s");
    op = eq::Scale{o.scale[0], o.scale[1], o.scale_squared};
  }
  if (o.scale3 != 0.0) {
    ++given;
    op = eq::Scale3{o.scale3};
  }
  if (given > 1) throw ValidationError("give at most one point symmetry");
  return op;
}

void cmd_transform(const Options& o, json& rep, std::ostream& out) {
  rep["inputs"]["state"] = o.state_file;
  const auto op = point_symmetry(o);
  if (op.has_value() == !o.M.empty()) throw ValidationError("give exactly one of --M or a point symmetry flag");
  const CGLState in = fields::read_state_csv(o.state_file);
  CGLState res;
  if (!o.M.empty()) {
    const eq::TransformSpec spec(o.M);
    rep["params"]["M"] = spec.text();
    res = eq::apply_infinite_transform(in, spec);
  } else {
    res = eq::apply_point_symmetry(in, *op);
    rep["params"]["point_symmetry"] = res.provenance.substr(res.provenance.rfind("| ") + 2);
  }
  const fs::path path = output_path(o, o.format == "vtk" ? "transformed.vtk" : "transformed.csv");
  fields::export_state(res, path, parse_format(o.format));
  rep["outputs"]["state"] = path.string();
  rep["pass"] = true;
  out << "written to " << path.string() << "\n";
}

void cmd_flux_solve(const Options& o, json& rep, std::ostream& out, std::ostream& err) {
  rep["inputs"]["problem"] = o.problem_file;
  flux::FluxProblem p = flux::load_problem(o.problem_file);
  if (o.resolution != 0) {
    p.grid.nr = p.grid.nu = o.resolution;
    p.validate();
  }
  const flux::FluxSolution s = flux::solve_flux(p);
  const fs::path path = output_path(o, "solution.csv");
  flux::export_solution(s, path);
  rep["params"] = {{"geometry", flux::geometry_name(p.geometry)}, {"nr", p.grid.nr}, {"nu", p.grid.nu},
                   {"tol", p.solver.tol}, {"max_iter", p.solver.max_iter}, {"omega", p.solver.omega}};
  rep["convergence"] = {{"iterations", s.iterations},
                        {"final_update", s.final_update},
                        {"converged", s.converged},
                        {"discrete_residual", s.discrete_residual}};
  if (p.exact) rep["norms"]["error_vs_exact"] = {{"linf", flux::error_vs_exact(s)}};
  rep["warnings"] = s.warnings;
  rep["outputs"]["solution"] = path.string();
  rep["pass"] = s.converged;
  for (const auto& w : s.warnings) err << "warning: " << w << "\n";
  out << (s.converged ? "converged" : "not converged") << " after " << s.iterations << " iterations\nwritten to "
      << path.string() << "\n";
  if (!s.converged) throw VerificationFailure{};
}

void cmd_flux_tocgl(const Options& o, json& rep, std::ostream& out) {
  rep["inputs"]["solution"] = o.solution_file;
  const flux::FluxSolution s = flux::read_solution(o.solution_file);
  flux::CartesianOptions c;
  c.n = o.cart_n;
  c.margin = o.margin;
  c.inset = o.inset;
  c.z_min = o.z_min;
  c.z_max = o.z_max;
  const CGLState st = flux::flux_to_cgl(s, o.tau, c);
  const fs::path path = output_path(o, o.format == "vtk" ? "mapped.vtk" : "mapped.csv");
  fields::export_state(st, path, parse_format(o.format));
  rep["params"] = {{"tau", o.tau}, {"n", o.cart_n}, {"margin", o.margin}, {"inset", o.inset}};
  rep["outputs"]["state"] = path.string();
  rep["pass"] = true;
  out << "written to " << path.string() << "\n";
}

void cmd_check(const Options& o, json& rep, std::ostream& out) {
  rep["inputs"]["state"] = o.state_file;
  const eq::System sys = eq::system_from_name(o.system);
  const CGLState s = fields::read_state_csv(o.state_file);
  const eq::ProbeReport probe = eq::two_grid_check(s, sys, o.factor, o.floor);
  rep["params"] = {{"system", o.system}, {"factor", o.factor}, {"floor", o.floor}};
  json norms = json::object();
  json thresholds = json::object();
  for (const auto& e : probe.entries) {
    norms[e.name] = {{"linf", e.linf_h}, {"l2", e.l2_h}, {"linf_2h", e.linf_2h}, {"estimate", e.estimate},
                     {"pass", e.pass}};
    thresholds[e.name] = e.threshold;
  }
  rep["norms"] = norms;
  rep["thresholds"] = thresholds;
  bool pass = probe.pass;

  if (!o.coarse_file.empty()) {
    rep["inputs"]["coarse"] = o.coarse_file;
    const CGLState coarse = fields::read_state_csv(o.coarse_file);
    const auto nf = eq::residual_norms(s, sys);
    const auto nc = eq::residual_norms(coarse, sys);
    json ratios = json::object();
    for (std::size_t i = 0; i < nf.size(); ++i) ratios[nf[i].name] = nc[i].linf / nf[i].linf;
    rep["convergence_ratios"] = ratios;
    rep["coarse_norms"] = norms_json(nc);
  }
  if (o.stability) {
    const eq::StabilityReport st = eq::stability_report(s);
    rep["stability"] = {{"eps_B", st.eps_B},
                        {"firehose", summary_json(st.firehose_summary)},
                        {"mirror", summary_json(st.mirror_summary)}};
  }
  rep["pass"] = pass;
  for (const auto& e : probe.entries) {
    out << e.name << ": linf " << fields::format_double(e.linf_h) << " threshold "
        << fields::format_double(e.threshold) << (e.pass ? " pass" : " FAIL") << "\n";
  }
  if (!pass) throw VerificationFailure{};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Symmetry and equilibrium workbench for anisotropic plasmas", "plasmasym"};
  app.require_subcommand(1);
  app.add_option("--out", o.out_dir, "Output directory (created if absent)");

  auto* lie_cmd = app.add_subcommand("lie", "Lie point symmetries");
  lie_cmd->require_subcommand(1);
  auto* detsys = lie_cmd->add_subcommand("detsys", "Build the determining system");
  detsys->add_option("pde", o.pde_file, "PDE description")->required()->check(CLI::ExistingFile);
  detsys->add_option("--dedupe", o.dedupe, "exact or scalar")->check(CLI::IsMember({"exact", "scalar"}));
  detsys->add_option("--output", o.output, "Listing file name");
  auto* verify = lie_cmd->add_subcommand("verify", "Verify a candidate generator");
  verify->add_option("pde", o.pde_file, "PDE description")->required()->check(CLI::ExistingFile);
  verify->add_option("generator", o.generator_file, "Generator file")->required()->check(CLI::ExistingFile);

  auto* vortex = app.add_subcommand("vortex", "Sample the Bobnev vortex");
  vortex->add_option("--R", o.R, "Sphere radius");
  vortex->add_option("--B0", o.B0, "Field on the axis");
  vortex->add_option("--P0", o.P0, "Pressure outside the sphere");
  vortex->add_option("--n", o.n, "Root index of the lambda equation");
  vortex->add_option("--grid", o.grid, "Nodes per axis");
  vortex->add_option("--lo", o.lo, "Lower box corner");
  vortex->add_option("--hi", o.hi, "Upper box corner");
  vortex->add_option("--pressure", o.pressure, "corrected or as-printed")
      ->check(CLI::IsMember({"corrected", "as-printed"}));
  vortex->add_option("--format", o.format, "csv or vtk")->check(CLI::IsMember({"csv", "vtk"}));
  vortex->add_option("--output", o.output, "State file name");

  auto* transform = app.add_subcommand("transform", "Apply a symmetry transformation to a state");
  transform->add_option("--state", o.state_file, "Input state CSV")->required()->check(CLI::ExistingFile);
  transform->add_option("--M", o.M, "M(psi) of the infinite transformation");
  transform->add_option("--translate", o.translate, "K1 K2 K3 K4")->expected(4);
  transform->add_option("--rotate", o.rotate, "Euler angles phi theta psi")->expected(3);
  transform->add_option("--scale", o.scale, "t s")->expected(2);
  transform->add_flag("--squared", o.scale_squared, "Scale pressure by s^2 instead of 2s");
  transform->add_option("--scale3", o.scale3, "C of the third scaling");
  transform->add_option("--format", o.format, "csv or vtk")->check(CLI::IsMember({"csv", "vtk"}));
  transform->add_option("--output", o.output, "State file name");

  auto* flux_cmd = app.add_subcommand("flux", "Grad-Shafranov and JFKO solvers");
  flux_cmd->require_subcommand(1);
  auto* solve = flux_cmd->add_subcommand("solve", "Solve a flux problem");
  solve->add_option("problem", o.problem_file, "Problem file")->required()->check(CLI::ExistingFile);
  solve->add_option("--resolution", o.resolution, "Override nodes per axis")->check(CLI::Range(9, 100000));
  solve->add_option("--output", o.output, "Solution CSV name");
  auto* tocgl = flux_cmd->add_subcommand("tocgl", "Map a flux solution to a CGL state");
  tocgl->add_option("solution", o.solution_file, "Solution CSV")->required()->check(CLI::ExistingFile);
  tocgl->add_option("--tau", o.tau, "tau(psi, psi_min, psi_max)")->required();
  tocgl->add_option("--n", o.cart_n, "Cartesian nodes along x and y");
  tocgl->add_option("--margin", o.margin, "Inactive cells next to the domain edge");
  tocgl->add_option("--inset", o.inset, "Minimum distance of active nodes from the domain edge");
  tocgl->add_option("--z-min", o.z_min, "Lower z of the helical extension");
  tocgl->add_option("--z-max", o.z_max, "Upper z of the helical extension");
  tocgl->add_option("--format", o.format, "csv or vtk")->check(CLI::IsMember({"csv", "vtk"}));
  tocgl->add_option("--output", o.output, "State file name");

  auto* check = app.add_subcommand("check", "Residual and stability checks of a state");
  check->add_option("--state", o.state_file, "State CSV")->required()->check(CLI::ExistingFile);
  check->add_option("--system", o.system, "mhd, cgl or alt")->check(CLI::IsMember({"mhd", "cgl", "alt"}));
  check->add_flag("--stability", o.stability, "Evaluate fire-hose and mirror criteria");
  check->add_option("--factor", o.factor, "Pass if Linf <= factor * estimate + floor")->check(CLI::PositiveNumber);
  check->add_option("--floor", o.floor, "Absolute floor of the threshold")->check(CLI::NonNegativeNumber);
  check->add_option("--coarse", o.coarse_file, "Same state on a coarser grid, for refinement ratios")
      ->check(CLI::ExistingFile);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    // Best effort: the report goes wherever --out pointed before parsing stopped.
    try {
      const json rep = {{"command", ""}, {"inputs", json::object()}, {"params", {{"argv", args}}},
                        {"assumptions", json::array()}, {"pass", false}, {"error", e.what()}};
      fs::create_directories(o.out_dir);
      write_text_file(fs::path(o.out_dir) / "report.json", rep.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    return validation_error;
  }

  std::string command;
  for (const CLI::App* a = &app; !a->get_subcommands().empty();) {
    a = a->get_subcommands().front();
    command += (command.empty() ? "" : " ") + a->get_name();
  }
  json rep = {{"command", command}, {"inputs", json::object()}, {"params", json::object()},
              {"assumptions", json::array()}, {"pass", false}};

  int code = ok;
  try {
    fs::create_directories(o.out_dir);
    if (command == "lie detsys") {
      cmd_lie_detsys(o, rep, out);
    } else if (command == "lie verify") {
      cmd_lie_verify(o, rep, out);
    } else if (command == "vortex") {
      cmd_vortex(o, rep, out);
    } else if (command == "transform") {
      cmd_transform(o, rep, out);
    } else if (command == "flux solve") {
      cmd_flux_solve(o, rep, out, err);
    } else if (command == "flux tocgl") {
      cmd_flux_tocgl(o, rep, out);
    } else if (command == "check") {
      cmd_check(o, rep, out);
    }
  } catch (const VerificationFailure&) {
    code = verification_failure;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    rep["error"] = e.what();
    code = validation_error;
  } catch (const Error& e) {
    // Math and convergence failures mean the requested result does not hold.
    err << "error: " << e.what() << "\n";
    rep["error"] = e.what();
    code = verification_failure;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    rep["error"] = e.what();
    code = validation_error;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    rep["error"] = e.what();
    code = internal_error;
  }
  if (code != ok) rep["pass"] = false;
  try {
    write_text_file(fs::path(o.out_dir) / "report.json", rep.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: cannot write report.json: " << e.what() << "\n";
    if (code == ok) code = validation_error;
  }
  return code;
}

}  // namespace plasmasym::cli
