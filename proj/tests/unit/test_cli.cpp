#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "plasmasym/fields/io.hpp"
#include "plasmasym/io.hpp"

using namespace plasmasym;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kData = PLASMASYM_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("plasmasym_cli_" + name);
  fs::remove_all(d);
  return d;
}

json report(const fs::path& dir) { return json::parse(read_text_file(dir / "report.json")); }

}  // namespace

TEST_CASE("detsys reports the MHD count against its target") {
  const fs::path d = fresh_dir("detsys");
  const Run r = run({"--out", d.string(), "lie", "detsys", kData + "/mhd_static.pde"});
  REQUIRE(r.code == cli::ok);
  const json rep = report(d);
  CHECK(rep["command"] == "lie detsys");
  CHECK(rep["counts"]["count"] == 133);
  CHECK(rep["counts"]["matches_target"] == true);
  CHECK(rep["pass"] == true);
  CHECK(fs::exists(d / "determining.txt"));
}

TEST_CASE("verify exits 3 on a generator that is not a symmetry") {
  const fs::path d = fresh_dir("verify");
  CHECK(run({"--out", d.string(), "lie", "verify", kData + "/mhd_static.pde", kData + "/generators/mhd_rot.gen"}).code ==
        cli::ok);
  CHECK(run({"--out", d.string(), "lie", "verify", kData + "/mhd_static.pde",
             kData + "/generators/mhd_bogus.gen"})
            .code == cli::verification_failure);
  const json rep = report(d);
  CHECK(rep["pass"] == false);
  CHECK(rep["counts"]["nonzero_residuals"].get<int>() > 0);
}

TEST_CASE("vortex passes the MHD check and M = 1 leaves it unchanged") {
  const fs::path d = fresh_dir("vortex");
  REQUIRE(run({"--out", d.string(), "vortex", "--grid", "33"}).code == cli::ok);
  REQUIRE(run({"--out", d.string(), "check", "--state", (d / "vortex.csv").string(), "--system", "mhd",
               "--stability"})
              .code == cli::ok);
  const json rep = report(d);
  CHECK(rep["pass"] == true);
  CHECK(rep["params"]["factor"] == 10.0);
  CHECK(rep["stability"].contains("firehose"));

  REQUIRE(run({"--out", d.string(), "transform", "--state", (d / "vortex.csv").string(), "--M", "1"}).code ==
          cli::ok);
  const CGLState a = fields::read_state_csv(d / "vortex.csv");
  const CGLState b = fields::read_state_csv(d / "transformed.csv");
  CHECK(a.B.values == b.B.values);
  CHECK(a.p_perp.values == b.p_perp.values);
  CHECK(a.p_par.values == b.p_par.values);
}

TEST_CASE("transformed vortex passes the CGL check") {
  const fs::path d = fresh_dir("pipeline");
  REQUIRE(run({"--out", d.string(), "vortex", "--grid", "33"}).code == cli::ok);
  REQUIRE(run({"--out", d.string(), "transform", "--state", (d / "vortex.csv").string(), "--M", "1 + 0.5*psi^2"})
              .code == cli::ok);
  CHECK(run({"--out", d.string(), "check", "--state", (d / "transformed.csv").string(), "--system", "cgl"}).code ==
        cli::ok);
  CHECK(report(d)["norms"].contains("closure"));
}

TEST_CASE("refinement ratios of the corrected vortex are near 4") {
  const fs::path d = fresh_dir("ratios");
  REQUIRE(run({"--out", d.string(), "vortex", "--grid", "33", "--output", "c.csv"}).code == cli::ok);
  REQUIRE(run({"--out", d.string(), "vortex", "--grid", "65", "--output", "f.csv"}).code == cli::ok);
  REQUIRE(run({"--out", d.string(), "check", "--state", (d / "f.csv").string(), "--coarse", (d / "c.csv").string()})
              .code == cli::ok);
  const double ratio = report(d)["convergence_ratios"]["momentum"];
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("flux solve and tocgl yield a CGL equilibrium") {
  const fs::path d = fresh_dir("flux");
  fs::create_directories(d);
  write_text_file(d / "p.txt",
                  "r_min = 0.5\nr_max = 1.5\nz_min = -0.5\nz_max = 0.5\nresolution = 33\n"
                  "N_prime = -1\nboundary = r^4/8 + r^2*z + 1\n");
  REQUIRE(run({"--out", d.string(), "flux", "solve", (d / "p.txt").string()}).code == cli::ok);
  const json solved = report(d);
  CHECK(solved["convergence"]["converged"] == true);
  CHECK(solved["warnings"].empty());
  REQUIRE(run({"--out", d.string(), "flux", "tocgl", (d / "solution.csv").string(), "--tau", "0.3*psi/psi_max",
               "--inset", "0.2"})
              .code == cli::ok);
  CHECK(run({"--out", d.string(), "check", "--state", (d / "mapped.csv").string(), "--system", "cgl"}).code ==
        cli::ok);
}

TEST_CASE("exit codes") {
  const fs::path d = fresh_dir("codes");
  CHECK(run({"--out", d.string()}).code == cli::validation_error);
  CHECK(run({"--out", d.string(), "vortex", "--n", "0"}).code == cli::validation_error);
  CHECK(report(d).contains("error"));
  CHECK(run({"--out", d.string(), "vortex", "--pressure", "other"}).code == cli::validation_error);
  CHECK(report(d)["pass"] == false);
  CHECK(run({"--out", d.string(), "vortex", "--no-such-flag"}).code == cli::validation_error);
  CHECK(run({"--out", d.string(), "check", "--state", "/nonexistent.csv"}).code == cli::validation_error);
  CHECK(run({"--help"}).code == cli::ok);

  fs::create_directories(d);
  write_text_file(d / "div.txt",
                  "r_min = 0.5\nr_max = 1.5\nz_min = -0.5\nz_max = 0.5\nresolution = 17\n"
                  "N_prime = -400*psi\nboundary = 1 + r\n");
  CHECK(run({"--out", d.string(), "flux", "solve", (d / "div.txt").string()}).code == cli::verification_failure);
  CHECK(report(d)["pass"] == false);
}

TEST_CASE("reports are deterministic") {
  const fs::path d = fresh_dir("det");
  REQUIRE(run({"--out", d.string(), "vortex", "--grid", "17"}).code == cli::ok);
  const std::string first = read_text_file(d / "report.json");
  const std::string state = read_text_file(d / "vortex.csv");
  REQUIRE(run({"--out", d.string(), "vortex", "--grid", "17"}).code == cli::ok);
  CHECK(read_text_file(d / "report.json") == first);
  CHECK(read_text_file(d / "vortex.csv") == state);
}
