#include "plasmasym/fields/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "plasmasym/error.hpp"
#include "plasmasym/io.hpp"

namespace plasmasym::fields {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

namespace {

constexpr const char* kHeader = "x,y,z,B1,B2,B3,p_perp,p_par,tau,psi";

std::filesystem::path meta_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".meta.json");
}

std::string grid_triple(const Vec3& v) {
  return format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]);
}

void write_csv(const CGLState& s, const std::filesystem::path& path) {
  const Grid3& g = s.grid();
  std::string out = std::string(kHeader) + "\n";
  out.reserve(g.size() * 200);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 p = g.point(n);
    const Vec3& b = s.B.values[n];
    for (double v : {p[0], p[1], p[2], b[0], b[1], b[2], s.p_perp.values[n], s.p_par.values[n],
                     s.tau.values[n]}) {
      out += format_double(v);
      out += ',';
    }
    out += format_double(s.psi.values[n]);
    out += '\n';
  }
  write_text_file(path, out);

  nlohmann::json meta;
  meta["provenance"] = s.provenance;
  nlohmann::json rle = nlohmann::json::array();
  if (!s.active.empty()) {
    std::size_t start = 0;
    for (std::size_t n = 1; n <= s.active.size(); ++n) {
      if (n == s.active.size() || s.active[n] != s.active[start]) {
        rle.push_back({s.active[start] != 0, n - start});
        start = n;
      }
    }
  }
  meta["active_rle"] = rle;
  meta["grid"] = {{"origin", g.origin}, {"spacing", g.h}, {"counts", g.counts}};
  write_text_file(meta_path(path), meta.dump(2) + "\n");
}

void write_vtk(const CGLState& s, const std::filesystem::path& path) {
  const Grid3& g = s.grid();
  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\n"
     << (s.provenance.empty() ? std::string("plasmasym state") : s.provenance.substr(0, 255)) << "\n"
     << "ASCII\nDATASET STRUCTURED_POINTS\n"
     << "DIMENSIONS " << g.counts[0] << " " << g.counts[1] << " " << g.counts[2] << "\n"
     << "ORIGIN " << grid_triple(g.origin) << "\n"
     << "SPACING " << grid_triple(g.h) << "\n"
     << "POINT_DATA " << g.size() << "\n";
  // VTK point order is x fastest.
  auto each = [&](auto&& emit) {
    for (int k = 0; k < g.counts[2]; ++k) {
      for (int j = 0; j < g.counts[1]; ++j) {
        for (int i = 0; i < g.counts[0]; ++i) emit(g.index(i, j, k));
      }
    }
  };
  os << "VECTORS B double\n";
  each([&](std::size_t n) { os << grid_triple(s.B.values[n]) << "\n"; });
  const std::pair<const char*, const ScalarGrid*> scalars[] = {
      {"p_perp", &s.p_perp}, {"p_par", &s.p_par}, {"tau", &s.tau}, {"psi", &s.psi}};
  for (const auto& [name, f] : scalars) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    each([&](std::size_t n) { os << format_double(f->values[n]) << "\n"; });
  }
  write_text_file(path, os.str());
}

double parse_double(std::string_view t, std::size_t line) {
  double v = 0.0;
  const auto* end = t.data() + t.size();
  auto [p, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw ParseError("bad number '" + std::string(t) + "'", static_cast<int>(line), 1);
  }
  return v;
}

// Axis lattice from the distinct coordinates seen on that axis.
void recover_axis(std::vector<double> vals, Grid3& g, int a) {
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  g.counts[a] = static_cast<int>(vals.size());
  g.origin[a] = vals.front();
  g.h[a] = vals.size() > 1 ? (vals.back() - vals.front()) / static_cast<double>(vals.size() - 1) : 1.0;
}

}  // namespace

void export_state(const CGLState& state, const std::filesystem::path& path, Format format) {
  state.validate();
  if (format == Format::csv) {
    write_csv(state, path);
  } else {
    write_vtk(state, path);
  }
}

CGLState read_state_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw ParseError("expected CSV header '" + std::string(kHeader) + "'", 1, 1);
  }
  std::vector<std::array<double, 10>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 10> r{};
    std::size_t col = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      if (col >= r.size()) throw ParseError("too many columns", static_cast<int>(lineno), 1);
      r[col++] = parse_double(std::string_view(line).substr(pos, comma - pos), lineno);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (col != r.size()) throw ParseError("expected 10 columns", static_cast<int>(lineno), 1);
    rows.push_back(r);
  }
  if (rows.empty()) throw ValidationError("state CSV has no data rows");

  Grid3 g;
  for (int a = 0; a < 3; ++a) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[static_cast<std::size_t>(a)]);
    recover_axis(std::move(v), g, a);
  }
  if (g.size() != rows.size()) throw ValidationError("CSV nodes do not form a full lattice");

  const auto mp = meta_path(path);
  nlohmann::json meta;
  if (std::filesystem::exists(mp)) {
    try {
      meta = nlohmann::json::parse(read_text_file(mp));
      if (meta.contains("grid")) {
        Grid3 exact;
        exact.origin = meta["grid"].at("origin").get<Vec3>();
        exact.h = meta["grid"].at("spacing").get<Vec3>();
        exact.counts = meta["grid"].at("counts").get<std::array<int, 3>>();
        if (exact.counts != g.counts) throw ValidationError("sidecar grid does not match the CSV");
        g = exact;  // bit-exact spacing; rows are still checked below
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("bad sidecar '" + mp.string() + "': " + e.what());
    }
  }

  CGLState s;
  s.B = {g, std::vector<Vec3>(g.size())};
  for (auto* f : {&s.p_perp, &s.p_par, &s.tau, &s.psi}) *f = {g, std::vector<double>(g.size())};
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& r = rows[n];
    const Vec3 p = g.point(n);
    for (int a = 0; a < 3; ++a) {
      const double tol = 1e-9 * std::max(1.0, std::abs(p[static_cast<std::size_t>(a)]));
      if (std::abs(p[static_cast<std::size_t>(a)] - r[static_cast<std::size_t>(a)]) > tol) {
        throw ValidationError("CSV row " + std::to_string(n + 2) + " is out of lattice order");
      }
    }
    s.B.values[n] = {r[3], r[4], r[5]};
    s.p_perp.values[n] = r[6];
    s.p_par.values[n] = r[7];
    s.tau.values[n] = r[8];
    s.psi.values[n] = r[9];
  }

  if (!meta.is_null()) {
    try {
      s.provenance = meta.value("provenance", std::string());
      for (const auto& run : meta.at("active_rle")) {
        s.active.insert(s.active.end(), run.at(1).get<std::size_t>(),
                        static_cast<std::uint8_t>(run.at(0).get<bool>()));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("bad sidecar '" + mp.string() + "': " + e.what());
    }
    if (!s.active.empty() && s.active.size() != g.size()) {
      throw ValidationError("sidecar mask does not match the CSV grid");
    }
  }
  return s;
}

}  // namespace plasmasym::fields
