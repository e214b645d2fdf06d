#include <doctest.h>

#include <string>

#include "plasmasym/error.hpp"
#include "plasmasym/lie/lie.hpp"

using namespace plasmasym;
using namespace plasmasym::expr;
using namespace plasmasym::lie;

namespace {

const std::string data_dir = PLASMASYM_DATA_DIR;

const PdeSystem& mhd() {
  static const PdeSystem s = load_system(data_dir + "/mhd_static.pde");
  return s;
}
const PdeSystem& cgl() {
  static const PdeSystem s = load_system(data_dir + "/cgl_static.pde");
  return s;
}
const PdeSystem& cgl_eos() {
  static const PdeSystem s = load_system(data_dir + "/cgl_static_eos.pde");
  return s;
}
const DeterminingSystem& det_of(const PdeSystem& s) {
  static std::map<const PdeSystem*, DeterminingSystem> cache;
  auto it = cache.find(&s);
  if (it == cache.end()) it = cache.emplace(&s, build_determining_system(s)).first;
  return it->second;
}

bool verifies(const PdeSystem& s, const std::string& gen) {
  const auto cand = load_generator(data_dir + "/generators/" + gen, s);
  return all_zero(verify_generator(s, det_of(s), cand));
}

Context scalar_ctx(int n) {
  Context ctx;
  ctx.independents = n == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
  ctx.dependents = {"u"};
  return ctx;
}

}  // namespace

TEST_CASE("prolongation of translations, scalings and rotations") {
  const Context c1 = scalar_ctx(1);
  const Expr ux = jet(0, {0});
  CHECK(prolong_coefficients(c1, {Expr(1)}, {Expr(0)}).at(jet(0, {0})).is_zero());
  CHECK(prolong_coefficients(c1, {Expr(independent(0))}, {Expr(0)}).at(jet(0, {0})) == -ux);

  // xi = (y, -x): D_x xi = (0, -1), D_y xi = (1, 0), hence
  // eta1_x = -u_x*0 - u_y*(-1) = u_y and eta1_y = -u_x*1 - u_y*0 = -u_x.
  const Context c2 = scalar_ctx(2);
  const auto p = prolong_coefficients(c2, {Expr(independent(1)), -Expr(independent(0))}, {Expr(0)});
  CHECK(p.at(jet(0, {0})) == Expr(jet(0, {1})));
  CHECK(p.at(jet(0, {1})) == -Expr(jet(0, {0})));

  CHECK_THROWS_AS((void)prolong_coefficients(c2, {Expr(1)}, {Expr(0)}), ValidationError);
}

TEST_CASE("ansatz prolongation is quadratic in jets and covers every first-order jet") {
  const VectorFieldAnsatz a = make_ansatz(mhd());
  CHECK(a.prolonged.size() == 12);
  for (const auto& [j, c] : a.prolonged) {
    CHECK(degree(c, [](const Symbol& s) { return s.kind == SymbolKind::jet; }) <= 2);
  }
  CHECK(a.ctx.unknowns.front() == "xi_x");
  CHECK(a.ctx.unknowns.back() == "eta_P");
}

TEST_CASE("solved forms and genericity assumptions") {
  CHECK(mhd().assumptions.empty());
  CHECK(cgl().assumptions.empty());
  REQUIRE(cgl_eos().assumptions.size() == 1);
  CHECK(cgl_eos().assumptions.front() == "B1 != 0");
  for (const auto* s : {&mhd(), &cgl(), &cgl_eos()}) {
    for (const auto& [v, rhs] : s->solved_form) {
      CHECK_FALSE(contains(rhs, [&](const Symbol& x) { return s->solved_form.contains(x); }));
    }
  }
}

TEST_CASE("determining-system counts") {
  CHECK(det_of(mhd()).count() == 133);
  CHECK(det_of(cgl()).count() == 253);
  CHECK(det_of(cgl_eos()).count() == 199);
  CHECK(det_of(mhd()).expected_count == 133);
  CHECK(det_of(mhd()).raw_count >= det_of(mhd()).count());
}

TEST_CASE("scalar-multiple folding only ever merges equations") {
  const auto folded = build_determining_system(mhd(), Dedupe::scalar_multiple);
  CHECK(folded.count() <= det_of(mhd()).count());
  CHECK(folded.count() > 0);
}

TEST_CASE("determining equations are jet-free, linear, nonzero and distinct") {
  for (const auto* s : {&mhd(), &cgl(), &cgl_eos()}) {
    const auto& det = det_of(*s);
    std::set<Expr> seen;
    for (const auto& d : det.equations) {
      CHECK_FALSE(d.equation.is_zero());
      CHECK_FALSE(contains(d.equation, [](const Symbol& x) { return x.kind == SymbolKind::jet; }));
      CHECK(degree(d.equation, [](const Symbol& x) { return x.kind == SymbolKind::unknown; }) == 1);
      CHECK(seen.insert(d.equation).second);
      CHECK(d.source >= 0);
      CHECK(d.source < s->l());
    }
  }
}

TEST_CASE("build is deterministic") {
  const auto again = build_determining_system(mhd());
  REQUIRE(again.count() == det_of(mhd()).count());
  for (int i = 0; i < again.count(); ++i) {
    CHECK(again.equations[static_cast<std::size_t>(i)].equation ==
          det_of(mhd()).equations[static_cast<std::size_t>(i)].equation);
  }
}

TEST_CASE("listing round-trips through the parser") {
  const auto& det = det_of(cgl_eos());
  const std::string text = format_listing(det);
  CHECK(text.rfind("# count=199 assumptions=B1 != 0\n", 0) == 0);
  const Program back = parse_program(text, det.ctx);
  REQUIRE(back.equations.size() == det.equations.size());
  for (std::size_t i = 0; i < back.equations.size(); ++i) {
    CHECK(back.equations[i] == det.equations[i].equation);
  }
}

TEST_CASE("MHD generators verify") {
  for (const char* g : {"mhd_trans.gen", "mhd_rot.gen", "mhd_scal1.gen", "mhd_scal2.gen"}) {
    CHECK_MESSAGE(verifies(mhd(), g), g);
  }
  CHECK_FALSE(verifies(mhd(), "mhd_bogus.gen"));
}

TEST_CASE("CGL generators verify") {
  for (const char* g :
       {"cgl_trans.gen", "cgl_rot.gen", "cgl_scal1.gen", "cgl_scal2.gen", "cgl_scal3.gen"}) {
    CHECK_MESSAGE(verifies(cgl(), g), g);
  }
  for (const char* g : {"cgl_inf_F1.gen", "cgl_inf_Ftau.gen"}) {
    CHECK_MESSAGE(verifies(cgl_eos(), g), g);
  }
}

TEST_CASE("closure dependence of the infinite family") {
  // Constant F is a constant rescaling, a symmetry of the momentum system
  // alone; a non-constant F needs B . grad tau = 0.
  CHECK(verifies(cgl(), "cgl_inf_F1.gen"));
  CHECK_FALSE(verifies(cgl(), "cgl_inf_Ftau.gen"));
}

TEST_CASE("superposition of verified generators verifies") {
  const auto a = load_generator(data_dir + "/generators/mhd_scal1.gen", mhd());
  const auto b = load_generator(data_dir + "/generators/mhd_scal2.gen", mhd());
  CandidateGenerator sum = a;
  for (std::size_t i = 0; i < sum.xi.size(); ++i) sum.xi[i] += b.xi[i];
  for (std::size_t k = 0; k < sum.eta.size(); ++k) sum.eta[k] += b.eta[k];
  CHECK(all_zero(verify_generator(mhd(), det_of(mhd()), sum)));
}

TEST_CASE("input validation") {
  Context ctx = scalar_ctx(2);
  const Expr ux = jet(0, {0});
  const Expr uy = jet(0, {1});
  CHECK_THROWS_AS((void)make_system(ctx, {ux + uy}, {}), ValidationError);
  CHECK_THROWS_AS((void)make_system(ctx, {ux * ux + uy}, {jet(0, {0})}), ValidationError);
  CHECK_THROWS_AS((void)make_system(ctx, {uy}, {jet(0, {0})}), ValidationError);
  CHECK_THROWS_WITH_AS((void)make_system(ctx, {(Expr(1) + Expr(dependent(0))) * ux + uy}, {jet(0, {0})}),
                       doctest::Contains("single term"), ValidationError);
  CHECK_THROWS_AS((void)make_system(ctx, {Expr(jet(0, {0, 1}))}, {jet(0, {0})}), ValidationError);

  const PdeSystem s = make_system(ctx, {Expr(dependent(0)) * ux + uy}, {jet(0, {0})});
  CHECK(s.assumptions == std::vector<std::string>{"u != 0"});

  CHECK_THROWS_AS((void)parse_generator("xi x = diff(u,x);", s), ValidationError);
  CHECK_THROWS_AS((void)parse_generator("xi x = q;", s), ParseError);
  CHECK_THROWS_AS((void)parse_generator("dep v; xi x = v;", s), ValidationError);
  CHECK_THROWS_AS((void)load_system(data_dir + "/missing.pde"), ValidationError);
}

TEST_CASE("third scaling also verifies with the closure") {
  CHECK(verifies(cgl_eos(), "cgl_scal3.gen"));
}
