#include <doctest.h>

#include <cmath>

#include "plasmasym/equilibria/bobnev.hpp"
#include "plasmasym/equilibria/residuals.hpp"
#include "plasmasym/equilibria/stability.hpp"
#include "plasmasym/equilibria/transform.hpp"
#include "plasmasym/error.hpp"

using namespace plasmasym;
using namespace plasmasym::equilibria;
using fields::Grid3;
using fields::Vec3;

namespace {

const BobnevParams& params3() {
  static const BobnevParams p = BobnevParams::make(1.0, 1.0, 0.05, 3);
  return p;
}

const CGLState& bob(int n) {
  static std::map<int, CGLState> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, bobnev_state(params3(), Grid3::cube(-1.2, 1.2, n))).first;
  return it->second;
}

double linf_of(const std::vector<ResidualNorm>& r, const std::string& name) {
  for (const auto& e : r) {
    if (e.name == name) return e.linf;
  }
  FAIL("missing residual " << name);
  return 0.0;
}

double ratio(const CGLState& coarse, const CGLState& fine, System sys, const std::string& eq) {
  return linf_of(residual_norms(coarse, sys), eq) / linf_of(residual_norms(fine, sys), eq);
}

// |a - b| <= tol * max|b| over the whole field.
bool close_rel(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  double scale = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol * std::max(scale, 1e-300)) return false;
  }
  return true;
}

std::vector<double> flat(const fields::VectorGrid& v) {
  std::vector<double> out;
  for (const auto& x : v.values) out.insert(out.end(), x.begin(), x.end());
  return out;
}

CGLState uniform_state(const Grid3& g, Vec3 B, double p_perp, double p_par) {
  CGLState s;
  s.B = fields::sample([B](const Vec3&) { return B; }, g);
  s.p_perp = fields::constant(g, p_perp);
  s.p_par = fields::constant(g, p_par);
  const double b2 = fields::dot(B, B);
  s.tau = fields::constant(g, b2 > 0 ? (p_par - p_perp) / b2 : 0.0);
  s.psi = fields::constant(g, 0.0);
  return s;
}

}  // namespace

TEST_CASE("lambda roots") {
  CHECK(find_lambda(1, 1) == doctest::Approx(2.882).epsilon(1e-3 / 2.882));
  CHECK(find_lambda(1, 2) == doctest::Approx(4.548).epsilon(1e-3 / 4.548));
  CHECK(find_lambda(1, 3) == doctest::Approx(6.161).epsilon(1e-3 / 6.161));
  for (int n = 1; n <= 10; ++n) CHECK(std::abs(lambda_equation(1.0, find_lambda(1.0, n))) < 1e-10);
  CHECK(find_lambda(2.0, 3) == doctest::Approx(find_lambda(1.0, 3) / 2.0).epsilon(1e-12));
  CHECK(find_lambda(1, 2) > find_lambda(1, 1));
  CHECK_THROWS_AS(find_lambda(0.0, 1), ValidationError);
  CHECK_THROWS_AS(find_lambda(1.0, 0), ValidationError);
}

TEST_CASE("V0 small-argument series") {
  CHECK(v0(0.0) == 1.0);
  CHECK(v0_prime_over_x(0.0) == doctest::Approx(-0.2).epsilon(1e-15));
  // Taylor oracle: V0 = 1 - x^2/10 + x^4/280 - ...
  for (double x : {1e-4, 1e-2, 0.1}) {
    CHECK(v0(x) == doctest::Approx(1 - x * x / 10 + std::pow(x, 4) / 280).epsilon(1e-9));
    CHECK(v0_prime(x) == doctest::Approx(-x / 5 + std::pow(x, 3) / 70).epsilon(1e-8));
  }
  // Branches agree at the switch-over.
  const double lo = std::nextafter(0.5, 0.0);
  CHECK(v0(lo) == doctest::Approx(v0(0.5)).epsilon(1e-13));
  CHECK(v0_prime_over_x(lo) == doctest::Approx(v0_prime_over_x(0.5)).epsilon(1e-12));
  CHECK(v0(-0.7) == v0(0.7));
}

TEST_CASE("Bobnev boundary conditions") {
  const BobnevVortex v(params3());
  const Vec3 b0 = v.B({0, 0, 0});
  CHECK(b0[0] == 0.0);
  CHECK(b0[1] == 0.0);
  CHECK(b0[2] == doctest::Approx(1.0).epsilon(1e-14));
  for (const Vec3& x : {Vec3{1, 0, 0}, Vec3{0, 0, 1}, Vec3{0.6, 0, 0.8}, Vec3{0, -0.6, -0.8}}) {
    const Vec3 b = v.B(x);
    CHECK(std::sqrt(fields::dot(b, b)) < 1e-12);
    CHECK(v.P(x) == doctest::Approx(0.05).epsilon(1e-12));
  }
  CHECK(v.P({2, 0, 0}) == 0.05);
  CHECK(std::abs(v.psi({0.3, 0.1, 0.2})) <= 1.0);
}

TEST_CASE("Bobnev sampling is finite and Psi is normalized") {
  const CGLState& s = bob(65);
  double mx = 0.0;
  for (double p : s.psi.values) mx = std::max(mx, std::abs(p));
  CHECK(mx <= 1.0 + 1e-12);
  CHECK(mx > 0.95);
  for (double t : s.tau.values) CHECK(t == 0.0);
  CHECK(s.p_perp.values == s.p_par.values);
}

TEST_CASE("Bobnev MHD residuals converge at second order") {
  CHECK(ratio(bob(33), bob(65), System::mhd, "momentum") == doctest::Approx(4.0).epsilon(0.15));
  CHECK(ratio(bob(33), bob(65), System::mhd, "div_B") == doctest::Approx(4.0).epsilon(0.15));
  CHECK(two_grid_check(bob(65), System::mhd).pass);
}

TEST_CASE("the as-printed pressure fails force balance") {
  const auto p = BobnevParams::make(1.0, 1.0, 0.05, 3, PressureForm::as_printed);
  const auto c = bobnev_state(p, Grid3::cube(-1.2, 1.2, 33));
  const auto f = bobnev_state(p, Grid3::cube(-1.2, 1.2, 65));
  CHECK(ratio(c, f, System::mhd, "momentum") < 1.5);
  CHECK_FALSE(two_grid_check(f, System::mhd).pass);
}

TEST_CASE("Psi is constant on field lines") {
  auto lin = [](const CGLState& s) {
    const auto d = fields::directional(s.B, s.psi);
    const auto m = fields::crop(s.active, s.grid(), 1);
    return fields::norm(d, fields::Norm::linf, &m);
  };
  CHECK(lin(bob(33)) / lin(bob(65)) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("uniform field with constant pressure has zero MHD residual") {
  const auto s = uniform_state(Grid3::cube(0, 1, 7), {0, 0, 2}, 3, 3);
  for (const auto& r : residual_norms(s, System::mhd)) CHECK(r.linf < 1e-14);
  CHECK(two_grid_check(s, System::mhd).pass);
}

TEST_CASE("alternative form rejects tau >= 1") {
  auto s = uniform_state(Grid3::cube(0, 1, 7), {0, 0, 1}, 1, 3);
  CHECK_THROWS_AS(residual_fields(s, System::alt), MathError);
  CHECK_NOTHROW(residual_fields(s, System::cgl));
  CHECK_THROWS_AS(system_from_name("ideal"), ValidationError);
}

TEST_CASE("infinite transform: identity and pointwise example") {
  const CGLState& s = bob(33);
  const CGLState id = apply_infinite_transform(s, TransformSpec("1"));
  CHECK(id.B.values == s.B.values);
  CHECK(id.p_perp.values == s.p_perp.values);
  CHECK(id.p_par.values == s.p_par.values);
  CHECK(id.tau.values == s.tau.values);
  CHECK(id.psi.values == s.psi.values);

  PointState p;
  p.B = {0.3, -0.4, 1.2};
  p.p_perp = p.p_par = 0.7;
  const PointState q = apply_infinite_transform(p, 2.0);
  const double b2 = fields::dot(p.B, p.B);
  for (std::size_t a = 0; a < 3; ++a) CHECK(q.B[a] == 2 * p.B[a]);
  CHECK(q.tau == 0.75);
  CHECK(q.p_perp == doctest::Approx(0.7 - 1.5 * b2).epsilon(1e-15));
  CHECK(q.p_par == doctest::Approx(q.p_perp + 3 * b2).epsilon(1e-15));

  PointState zero;
  zero.tau = 0.3;
  zero.p_perp = 4;
  const PointState z = apply_infinite_transform(zero, 5.0);
  CHECK(z.tau == 0.3);
  CHECK(z.p_perp == 4);
}

TEST_CASE("transform spec parsing") {
  const TransformSpec t("M = 1 + psi*sin(psi)");
  CHECK(t.M(0.5) == doctest::Approx(1 + 0.5 * std::sin(0.5)));
  CHECK(t.alpha(0.5) == 1);
  CHECK(TransformSpec("-2").alpha(0.0) == -1);
  CHECK(TransformSpec("-2").H(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(t.compose(t.inverse()).M(0.8) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(TransformSpec("N = psi"), ValidationError);
  CHECK_THROWS_AS(TransformSpec("exec(psi)"), ParseError);
  CHECK_THROWS_AS(TransformSpec("psi + x"), ParseError);
}

TEST_CASE("transform rejects M near zero") {
  CHECK_THROWS_WITH_AS(apply_infinite_transform(bob(33), TransformSpec("1e-9*psi")), doctest::Contains("|M(psi)|"),
                       ValidationError);
}

TEST_CASE("transformed Bobnev: invariants and properties") {
  const CGLState& s = bob(33);
  const TransformSpec M("1 + psi*sin(psi)");
  const CGLState t = apply_infinite_transform(s, M);
  const double eps = eps_B(t);
  double inv_scale = 0.0;
  double b_scale = 0.0;
  for (std::size_t n = 0; n < s.grid().size(); ++n) {
    inv_scale = std::max(inv_scale, std::abs(s.p_perp.values[n] + s.tau.values[n] * fields::dot(s.B.values[n], s.B.values[n]) / 2));
    b_scale = std::max(b_scale, fields::dot(s.B.values[n], s.B.values[n]));
  }
  for (std::size_t n = 0; n < s.grid().size(); ++n) {
    const Vec3& b = s.B.values[n];
    const Vec3& b1 = t.B.values[n];
    const double b2 = fields::dot(b, b);
    const double b12 = fields::dot(b1, b1);
    // p_perp + tau B^2/2 is invariant.
    const double before = s.p_perp.values[n] + s.tau.values[n] * b2 / 2;
    const double after = t.p_perp.values[n] + t.tau.values[n] * b12 / 2;
    CHECK(std::abs(after - before) <= 1e-12 * inv_scale);
    // Field lines are kept.
    const Vec3 c = fields::cross(b1, b);
    CHECK(std::sqrt(fields::dot(c, c)) <= 1e-12 * b_scale * 4);
    // Fire-hose sign and consistency.
    CHECK((1 - t.tau.values[n] > 0) == (1 - s.tau.values[n] > 0));
    CHECK(t.tau.values[n] < 1.0);
    if (b12 > eps) {
      CHECK(std::abs(t.p_par.values[n] - t.p_perp.values[n] - t.tau.values[n] * b12) <= 1e-12 * b_scale * 4);
    }
  }
}

TEST_CASE("transform group law and inverse") {
  const CGLState& s = bob(33);
  const TransformSpec m1("1 + psi^2");
  const TransformSpec m2("2 - psi");
  const CGLState a = apply_infinite_transform(apply_infinite_transform(s, m1), m2);
  const CGLState b = apply_infinite_transform(s, m1.compose(m2));
  CHECK(close_rel(flat(a.B), flat(b.B), 1e-12));
  CHECK(close_rel(a.p_perp.values, b.p_perp.values, 1e-12));
  CHECK(close_rel(a.p_par.values, b.p_par.values, 1e-12));
  CHECK(close_rel(a.tau.values, b.tau.values, 1e-12));

  const TransformSpec m("1 + psi*sin(psi)");
  const CGLState back = apply_infinite_transform(apply_infinite_transform(s, m), m.inverse());
  CHECK(close_rel(flat(back.B), flat(s.B), 1e-12));
  CHECK(close_rel(back.p_perp.values, s.p_perp.values, 1e-12));
  CHECK(close_rel(back.p_par.values, s.p_par.values, 1e-12));
  double tmax = 0.0;
  for (std::size_t n = 0; n < s.grid().size(); ++n) tmax = std::max(tmax, std::abs(back.tau.values[n] - s.tau.values[n]));
  CHECK(tmax <= 1e-12);
}

TEST_CASE("transformed Bobnev satisfies the CGL and alternative systems") {
  const TransformSpec M("1 + psi*sin(psi)");
  const CGLState c = apply_infinite_transform(bob(33), M);
  const CGLState f = apply_infinite_transform(bob(65), M);
  for (const char* eq : {"momentum", "div_B", "closure"}) {
    CHECK_MESSAGE(ratio(c, f, System::cgl, eq) == doctest::Approx(4.0).epsilon(0.15), eq);
  }
  for (const char* eq : {"momentum", "div_B", "closure", "invariant_transport"}) {
    CHECK_MESSAGE(ratio(c, f, System::alt, eq) == doctest::Approx(4.0).epsilon(0.15), eq);
  }
  CHECK(two_grid_check(f, System::cgl).pass);
  CHECK(two_grid_check(f, System::alt).pass);
}

TEST_CASE("alternative momentum equals CGL momentum plus half B (B . grad tau)") {
  const TransformSpec M("1 + psi*sin(psi)");
  auto gap = [&](int n) {
    const CGLState s = apply_infinite_transform(bob(n), M);
    const auto cg = residual_fields(s, System::cgl);
    const auto al = residual_fields(s, System::alt);
    const auto& mc = cg.get("momentum").vec;
    const auto& ma = al.get("momentum").vec;
    const auto& cl = cg.get("closure").sca;
    const auto bi = fields::crop(s.B, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < mc.values.size(); ++i) {
      if (!cg.mask[i]) continue;
      for (std::size_t a = 0; a < 3; ++a) {
        const double rec = mc.values[i][a] + 0.5 * bi.values[i][a] * cl.values[i];
        worst = std::max(worst, std::abs(ma.values[i][a] - rec));
      }
    }
    return worst;
  };
  CHECK(gap(33) / gap(65) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("translation") {
  const CGLState& s = bob(33);
  const CGLState t = apply_point_symmetry(s, Translate{0.5, 0, -1, 5, 1});
  CHECK(t.grid().origin[0] == doctest::Approx(s.grid().origin[0] + 0.5));
  CHECK(t.grid().origin[2] == doctest::Approx(s.grid().origin[2] - 1));
  CHECK(t.B.values == s.B.values);
  for (std::size_t n = 0; n < s.grid().size(); ++n) {
    CHECK(t.p_perp.values[n] == doctest::Approx(s.p_perp.values[n] + 5));
  }
  CHECK(two_grid_check(t, System::mhd).pass);
}

TEST_CASE("scaling: literal factor fails, squared factor passes") {
  const CGLState& s = bob(65);
  const CGLState lit = apply_point_symmetry(s, Scale{2, 3, false});
  CHECK(lit.grid().h[0] == doctest::Approx(2 * s.grid().h[0]));
  for (std::size_t n = 0; n < s.grid().size(); n += 97) {
    CHECK(lit.p_perp.values[n] == doctest::Approx(6 * s.p_perp.values[n]));
    CHECK(lit.B.values[n][2] == doctest::Approx(3 * s.B.values[n][2]));
  }
  // Force balance needs the pressure factor s^2; 2s only matches at s = 2.
  auto scaled_ratio = [](const Scale& op) {
    return ratio(apply_point_symmetry(bob(33), op), apply_point_symmetry(bob(65), op), System::mhd, "momentum");
  };
  CHECK(scaled_ratio(Scale{2, 3, false}) < 1.5);
  CHECK(scaled_ratio(Scale{2, 3, true}) == doctest::Approx(4.0).epsilon(0.15));
  CHECK(scaled_ratio(Scale{2, 2, false}) == doctest::Approx(4.0).epsilon(0.15));
  CHECK_THROWS_AS(apply_point_symmetry(s, Scale{0, 1, false}), ValidationError);
}

TEST_CASE("third scaling") {
  auto s = uniform_state(Grid3::cube(0, 1, 5), {1, 0, 0}, 1, 1);
  const CGLState t = apply_point_symmetry(s, Scale3{2});
  CHECK(t.p_perp.values[0] == 2.5);
  CHECK(t.tau.values[0] == -1);
  CHECK(t.p_par.values[0] == 1.5);
  CHECK_THROWS_AS(apply_point_symmetry(s, Scale3{0}), ValidationError);
  CHECK_THROWS_AS(apply_point_symmetry(s, Scale3{-1}), ValidationError);
  const CGLState tb = apply_infinite_transform(bob(65), TransformSpec("1 + psi*sin(psi)"));
  CHECK(two_grid_check(apply_point_symmetry(tb, Scale3{1.5}), System::cgl).pass);
}

TEST_CASE("rotations") {
  const AnalyticState a = BobnevVortex(params3()).analytic();
  // The vortex is axisymmetric about z.
  const AnalyticState rz = apply_point_symmetry(a, Rotate{0.7, 0, 0.2});
  for (const Vec3& x : {Vec3{0.3, 0.2, 0.1}, Vec3{-0.5, 0.1, 0.4}}) {
    const PointState p = a.at(x);
    const PointState q = rz.at(x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(q.B[i] == doctest::Approx(p.B[i]).epsilon(1e-12));
    CHECK(q.p_perp == doctest::Approx(p.p_perp).epsilon(1e-12));
  }
  // A tilt is a genuine symmetry: residuals stay second order.
  const AnalyticState tilt = apply_point_symmetry(a, Rotate{0.3, 0.9, -0.4});
  const CGLState ts = sample_state(tilt, Grid3::cube(-1.2, 1.2, 65));
  CHECK(two_grid_check(ts, System::mhd).pass);
  CHECK(ts.provenance.find("rotate(") != std::string::npos);

  const auto q = euler_matrix({0.3, 0.9, -0.4});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double d = 0;
      for (int k = 0; k < 3; ++k) d += q[i][k] * q[j][k];
      CHECK(d == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
    }
  }

  // Sampled rotation by a quarter turn maps nodes onto nodes.
  const CGLState& s = bob(33);
  const CGLState rs = apply_point_symmetry(s, Rotate{M_PI / 2, 0, 0});
  CHECK(rs.provenance.find("lossy") != std::string::npos);
  const CGLState ra = sample_state(apply_point_symmetry(a, Rotate{M_PI / 2, 0, 0}), s.grid());
  CHECK(close_rel(flat(rs.B), flat(ra.B), 1e-9));
}

TEST_CASE("stability criteria") {
  const Grid3 g = Grid3::cube(0, 1, 2);
  // tau = 0.5 everywhere: fire-hose stable.
  auto s1 = uniform_state(g, {1, 0, 0}, 1.0, 1.5);
  const auto r1 = stability_report(s1);
  CHECK(r1.firehose_summary.stable == 8);
  CHECK(r1.firehose_summary.unstable == 0);
  CHECK(r1.firehose_summary.max_margin < 0);
  // p_par - p_perp = 2 B^2: fire-hose unstable.
  auto s2 = uniform_state(g, {1, 0, 0}, 1.0, 3.0);
  CHECK(stability_report(s2).firehose_summary.unstable == 8);
  CHECK(stability_report(s2).firehose_summary.max_margin == doctest::Approx(1.0));
  // p_perp = 12, p_par = 1, B^2 = 2: mirror unstable.
  CHECK(mirror_flag(12, 1, 2, 0) == Flag::unstable);
  auto s3 = uniform_state(g, {1, 1, 0}, 12, 1);
  CHECK(stability_report(s3).mirror_summary.unstable == 8);

  CHECK(mirror_flag(1, 0, 1, 0) == Flag::indeterminate);
  CHECK(firehose_flag(1, 0, 1, 0) == Flag::stable);
  CHECK(firehose_flag(1, 5, 0, 0) == Flag::not_applicable);
  // Outside the vortex B = 0.
  const auto rb = stability_report(bob(33));
  CHECK(rb.firehose_summary.not_applicable > 0);
  CHECK(rb.firehose_summary.unstable == 0);
}
