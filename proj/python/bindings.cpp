#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cli.hpp"
#include "plasmasym/equilibria/bobnev.hpp"
#include "plasmasym/equilibria/residuals.hpp"
#include "plasmasym/equilibria/transform.hpp"
#include "plasmasym/error.hpp"
#include "plasmasym/fields/io.hpp"
#include "plasmasym/flux/flux.hpp"
#include "plasmasym/lie/lie.hpp"

namespace py = pybind11;
using namespace plasmasym;
namespace eq = plasmasym::equilibria;

namespace {

// Copies a scalar field into an (nx, ny, nz) array.
py::array_t<double> scalar_array(const fields::ScalarGrid& f) {
  const auto& c = f.grid.counts;
  py::array_t<double> a({c[0], c[1], c[2]});
  std::copy(f.values.begin(), f.values.end(), a.mutable_data());
  return a;
}

py::array_t<double> vector_array(const fields::VectorGrid& f) {
  const auto& c = f.grid.counts;
  py::array_t<double> a({c[0], c[1], c[2], 3});
  double* d = a.mutable_data();
  for (const auto& v : f.values) {
    *d++ = v[0];
    *d++ = v[1];
    *d++ = v[2];
  }
  return a;
}

py::array_t<bool> mask_array(const CGLState& s) {
  const auto& c = s.grid().counts;
  py::array_t<bool> a({c[0], c[1], c[2]});
  bool* d = a.mutable_data();
  for (std::size_t n = 0; n < s.grid().size(); ++n) d[n] = s.is_active(n);
  return a;
}

py::dict norms_dict(const std::vector<eq::ResidualNorm>& norms) {
  py::dict d;
  for (const auto& n : norms) d[py::str(n.name)] = py::make_tuple(n.linf, n.l2);
  return d;
}

}  // namespace

PYBIND11_MODULE(_plasmasym, m) {
  m.doc() = "Symmetry and equilibrium workbench for anisotropic plasmas";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<MathError>(m, "MathError", error.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());

  py::class_<CGLState>(m, "State")
      .def_property_readonly("shape", [](const CGLState& s) {
        const auto& c = s.grid().counts;
        return py::make_tuple(c[0], c[1], c[2]);
      })
      .def_property_readonly("origin", [](const CGLState& s) { return s.grid().origin; })
      .def_property_readonly("spacing", [](const CGLState& s) { return s.grid().h; })
      .def_property_readonly("B", [](const CGLState& s) { return vector_array(s.B); })
      .def_property_readonly("p_perp", [](const CGLState& s) { return scalar_array(s.p_perp); })
      .def_property_readonly("p_par", [](const CGLState& s) { return scalar_array(s.p_par); })
      .def_property_readonly("tau", [](const CGLState& s) { return scalar_array(s.tau); })
      .def_property_readonly("psi", [](const CGLState& s) { return scalar_array(s.psi); })
      .def_property_readonly("active", &mask_array)
      .def_readonly("provenance", &CGLState::provenance)
      .def(
          "save",
          [](const CGLState& s, const std::filesystem::path& path, const std::string& format) {
            fields::export_state(s, path, format == "vtk" ? fields::Format::vtk : fields::Format::csv);
          },
          py::arg("path"), py::arg("format") = "csv");

  m.def("read_state", [](const std::filesystem::path& p) { return fields::read_state_csv(p); }, py::arg("path"));

  m.def("find_lambda", &eq::find_lambda, py::arg("R"), py::arg("n"), "n-th positive root of the vortex lambda equation");

  m.def(
      "vortex",
      [](double R, double B0, double P0, int n, int grid, double lo, double hi, const std::string& pressure) {
        if (pressure != "corrected" && pressure != "as-printed") {
          throw ValidationError("pressure must be corrected or as-printed");
        }
        const auto pf = pressure == "corrected" ? eq::PressureForm::corrected : eq::PressureForm::as_printed;
        return eq::bobnev_state(eq::BobnevParams::make(R, B0, P0, n, pf), fields::Grid3::cube(lo, hi, grid));
      },
      py::arg("R") = 1.0, py::arg("B0") = 1.0, py::arg("P0") = 0.05, py::arg("n") = 3, py::arg("grid") = 65,
      py::arg("lo") = -1.2, py::arg("hi") = 1.2, py::arg("pressure") = "corrected");

  m.def(
      "infinite_transform",
      [](const CGLState& s, const std::string& M) { return eq::apply_infinite_transform(s, eq::TransformSpec(M)); },
      py::arg("state"), py::arg("M"));

  m.def(
      "residual_norms",
      [](const CGLState& s, const std::string& system) {
        return norms_dict(eq::residual_norms(s, eq::system_from_name(system)));
      },
      py::arg("state"), py::arg("system") = "mhd", "Mapping of residual name to (Linf, L2) over active nodes");

  m.def(
      "two_grid_check",
      [](const CGLState& s, const std::string& system, double factor, double floor) {
        const eq::ProbeReport r = eq::two_grid_check(s, eq::system_from_name(system), factor, floor);
        py::dict entries;
        for (const auto& e : r.entries) {
          entries[py::str(e.name)] = py::dict(py::arg("linf") = e.linf_h, py::arg("estimate") = e.estimate,
                                              py::arg("threshold") = e.threshold, py::arg("passed") = e.pass);
        }
        return py::make_tuple(r.pass, entries);
      },
      py::arg("state"), py::arg("system") = "mhd", py::arg("factor") = 10.0, py::arg("floor") = 1e-12);

  m.def(
      "determining_system",
      [](const std::filesystem::path& pde, const std::string& dedupe) {
        if (dedupe != "exact" && dedupe != "scalar") throw ValidationError("dedupe must be exact or scalar");
        const auto det = lie::build_determining_system(
            lie::load_system(pde), dedupe == "exact" ? lie::Dedupe::exact : lie::Dedupe::scalar_multiple);
        py::dict d(py::arg("count") = det.count(), py::arg("raw") = det.raw_count,
                   py::arg("assumptions") = det.assumptions, py::arg("listing") = lie::format_listing(det));
        d["target"] = det.expected_count ? py::cast(*det.expected_count) : py::none();
        return d;
      },
      py::arg("pde"), py::arg("dedupe") = "exact");

  m.def(
      "verify_generator",
      [](const std::filesystem::path& pde, const std::filesystem::path& gen) {
        const auto sys = lie::load_system(pde);
        const auto det = lie::build_determining_system(sys);
        const auto g = lie::load_generator(gen, sys);
        std::vector<std::string> nonzero;
        for (const auto& r : lie::verify_generator(sys, det, g)) {
          if (!r.is_zero()) nonzero.push_back(expr::to_string(r, g.ctx));
        }
        return nonzero;
      },
      py::arg("pde"), py::arg("generator"), "Nonzero residuals; empty means the generator is a symmetry");

  py::class_<flux::FluxSolution>(m, "FluxSolution")
      .def_readonly("iterations", &flux::FluxSolution::iterations)
      .def_readonly("converged", &flux::FluxSolution::converged)
      .def_readonly("final_update", &flux::FluxSolution::final_update)
      .def_readonly("discrete_residual", &flux::FluxSolution::discrete_residual)
      .def_readonly("warnings", &flux::FluxSolution::warnings)
      .def_property_readonly("psi",
                             [](const flux::FluxSolution& s) {
                               py::array_t<double> a({s.grid().nr, s.grid().nu});
                               std::copy(s.psi.begin(), s.psi.end(), a.mutable_data());
                               return a;
                             })
      .def_property_readonly("error_vs_exact",
                             [](const flux::FluxSolution& s) -> py::object {
                               if (!s.problem.exact) return py::none();
                               return py::cast(flux::error_vs_exact(s));
                             })
      .def("save", [](const flux::FluxSolution& s, const std::filesystem::path& p) { flux::export_solution(s, p); });

  m.def(
      "solve_flux", [](const std::string& text) { return flux::solve_flux(flux::parse_problem(text)); },
      py::arg("problem"), "Solves a problem given in the key = value text format");

  m.def(
      "flux_to_cgl",
      [](const flux::FluxSolution& s, const std::string& tau, int n, int margin, double inset) {
        flux::CartesianOptions o;
        o.n = n;
        o.margin = margin;
        o.inset = inset;
        return flux::flux_to_cgl(s, tau, o);
      },
      py::arg("solution"), py::arg("tau"), py::arg("n") = 33, py::arg("margin") = 2, py::arg("inset") = 0.0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (exit code, stdout, stderr)");
}
