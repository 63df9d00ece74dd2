#include "cbie/app.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <omp.h>

#include "cbie/errors.hpp"
#include "cbie/mie.hpp"
#include "cbie/surface_io.hpp"

namespace cbie {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where.empty() ? "<root>" : where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

std::string join(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double get_number(const json& obj, const std::string& where, const char* key, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) bad(join(where, key), "expected a number");
  return v->get<double>();
}

int get_int(const json& obj, const std::string& where, const char* key, int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) bad(join(where, key), "expected an integer");
  return v->get<int>();
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad(join(where, key), "expected true or false");
  return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) bad(join(where, key), "expected a string");
  return v->get<std::string>();
}

Complex to_complex(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  bad(field, "expected a number or a [re, im] pair");
}

Vec3 get_vec3(const json& obj, const std::string& where, const char* key, const Vec3& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  const std::string field = join(where, key);
  if (!v->is_array() || v->size() != 3) bad(field, "expected an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!(*v)[i].is_number()) bad(field, "expected an array of 3 numbers");
    out[i] = (*v)[i].get<double>();
  }
  return out;
}

CVec3 get_cvec3(const json& obj, const std::string& where, const char* key, const CVec3& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  const std::string field = join(where, key);
  if (!v->is_array() || v->size() != 3) bad(field, "expected an array of 3 entries");
  CVec3 out;
  for (int i = 0; i < 3; ++i) out[i] = to_complex((*v)[i], field);
  return out;
}

void positive(double x, const std::string& field) {
  if (!(x > 0.0) || !std::isfinite(x)) bad(field, "must be positive");
}

GeometryConfig parse_geometry(const json& g) {
  const std::string w = "geometry";
  check_keys(g, w, {"kind", "diameter", "center", "edge", "size", "radius", "arm_cross", "arm_length", "gap",
                    "major_radius", "minor_radius", "n_major", "n_minor", "path"});
  GeometryConfig c;
  const json* kind = find(g, "kind");
  if (!kind) bad("geometry.kind", "missing");
  if (!kind->is_string()) bad("geometry.kind", "expected a string");
  c.kind = kind->get<std::string>();
  c.center = get_vec3(g, w, "center", c.center);
  if (c.kind == "sphere") {
    c.diameter = get_number(g, w, "diameter", c.diameter);
    positive(c.diameter, "geometry.diameter");
  } else if (c.kind == "rounded_cube") {
    c.edge = get_number(g, w, "edge", c.edge);
    c.radius = get_number(g, w, "radius", c.radius);
    positive(c.edge, "geometry.edge");
    positive(c.radius, "geometry.radius");
  } else if (c.kind == "rounded_box") {
    c.size = get_vec3(g, w, "size", c.size);
    c.radius = get_number(g, w, "radius", c.radius);
    for (int i = 0; i < 3; ++i) positive(c.size[i], "geometry.size");
    positive(c.radius, "geometry.radius");
  } else if (c.kind == "dipole") {
    c.arm_cross = get_number(g, w, "arm_cross", c.arm_cross);
    c.arm_length = get_number(g, w, "arm_length", c.arm_length);
    c.gap = get_number(g, w, "gap", c.gap);
    c.radius = get_number(g, w, "radius", 0.0025);
    positive(c.arm_cross, "geometry.arm_cross");
    positive(c.arm_length, "geometry.arm_length");
    positive(c.gap, "geometry.gap");
    positive(c.radius, "geometry.radius");
  } else if (c.kind == "torus") {
    c.major_radius = get_number(g, w, "major_radius", c.major_radius);
    c.minor_radius = get_number(g, w, "minor_radius", c.minor_radius);
    c.n_major = get_int(g, w, "n_major", c.n_major);
    c.n_minor = get_int(g, w, "n_minor", c.n_minor);
    positive(c.major_radius, "geometry.major_radius");
    positive(c.minor_radius, "geometry.minor_radius");
  } else if (c.kind == "file") {
    c.path = get_string(g, w, "path", "");
    if (c.path.empty()) bad("geometry.path", "missing");
  } else {
    bad("geometry.kind", "unknown geometry kind '" + c.kind +
                             "' (expected sphere, rounded_cube, rounded_box, dipole, torus or file)");
  }
  return c;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
}

void apply_threads(const RunConfig& c) {
  if (c.threads > 0) omp_set_num_threads(c.threads);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunConfig parse_config(const json& j) {
  check_keys(j, "", {"geometry", "wavelength", "length_unit_m", "n", "formulation", "mfie_grid", "gmres",
                     "quadrature", "excitation", "output", "convergence", "export", "threads"});
  RunConfig c;
  c.source = j;
  const json* g = find(j, "geometry");
  if (!g) bad("geometry", "missing");
  c.geometry = parse_geometry(*g);
  c.wavelength = get_number(j, "", "wavelength", c.wavelength);
  positive(c.wavelength, "wavelength");
  c.length_unit_m = get_number(j, "", "length_unit_m", c.length_unit_m);
  positive(c.length_unit_m, "length_unit_m");
  c.n = get_int(j, "", "n", c.n);
  if (c.n < 4) bad("n", "must be at least 4");
  try {
    c.formulation = parse_formulation(get_string(j, "", "formulation", "efie-closed"));
  } catch (const ConfigError& e) {
    bad("formulation", e.what());
  }
  const std::string grid = get_string(j, "", "mfie_grid", "open");
  if (grid == "open")
    c.mfie_grid = GridKind::open;
  else if (grid == "closed")
    c.mfie_grid = GridKind::closed;
  else
    bad("mfie_grid", "expected \"open\" or \"closed\"");

  if (const json* gm = find(j, "gmres")) {
    check_keys(*gm, "gmres", {"tol", "restart", "max_iter"});
    c.gmres.tol = get_number(*gm, "gmres", "tol", c.gmres.tol);
    c.gmres.restart = get_int(*gm, "gmres", "restart", c.gmres.restart);
    c.gmres.max_iter = get_int(*gm, "gmres", "max_iter", c.gmres.max_iter);
  }
  if (!(c.gmres.tol > 0.0 && c.gmres.tol < 1.0)) bad("gmres.tol", "must lie in (0, 1)");
  if (c.gmres.restart < 1) bad("gmres.restart", "must be positive");
  if (c.gmres.max_iter < 1) bad("gmres.max_iter", "must be positive");

  if (const json* q = find(j, "quadrature")) {
    const std::string w = "quadrature";
    check_keys(*q, w, {"near_threshold", "refinement_factor", "max_levels", "tolerance", "order", "kappa",
                       "max_panel"});
    OperatorConfig& o = c.quadrature;
    o.near_threshold = get_number(*q, w, "near_threshold", o.near_threshold);
    o.refinement_factor = get_number(*q, w, "refinement_factor", o.refinement_factor);
    o.max_levels = get_int(*q, w, "max_levels", o.max_levels);
    o.tolerance = get_number(*q, w, "tolerance", o.tolerance);
    o.order = get_int(*q, w, "order", o.order);
    o.kappa = get_number(*q, w, "kappa", o.kappa);
    o.max_panel = get_number(*q, w, "max_panel", o.max_panel);
  }
  try {
    c.quadrature.validate();
  } catch (const DomainError& e) {
    bad("quadrature", e.what());
  }

  if (const json* e = find(j, "excitation")) {
    const std::string w = "excitation";
    check_keys(*e, w, {"direction", "polarization", "amplitude"});
    c.direction = get_vec3(*e, w, "direction", c.direction);
    c.polarization = get_cvec3(*e, w, "polarization", c.polarization);
    if (const json* a = find(*e, "amplitude")) c.amplitude = to_complex(*a, "excitation.amplitude");
  }
  try {
    plane_wave_of(c).validate();
  } catch (const DomainError& e) {
    bad("excitation", e.what());
  }

  if (const json* o = find(j, "output")) {
    check_keys(*o, "output", {"directory", "density", "rcs"});
    c.output_dir = get_string(*o, "output", "directory", c.output_dir.string());
    c.write_density = get_bool(*o, "output", "density", c.write_density);
    if (const json* r = find(*o, "rcs")) {
      if (r->is_boolean()) {
        if (r->get<bool>()) c.rcs = RcsCutConfig{};
      } else {
        const std::string w = "output.rcs";
        check_keys(*r, w, {"phi_deg", "start_deg", "stop_deg", "count"});
        RcsCutConfig cut;
        cut.phi_deg = get_number(*r, w, "phi_deg", cut.phi_deg);
        cut.start_deg = get_number(*r, w, "start_deg", cut.start_deg);
        cut.stop_deg = get_number(*r, w, "stop_deg", cut.stop_deg);
        cut.count = get_int(*r, w, "count", cut.count);
        if (cut.count < 1) bad("output.rcs.count", "must be positive");
        if (cut.start_deg < -180.0 || cut.stop_deg > 180.0) bad("output.rcs", "angles must lie in [-180, 180]");
        c.rcs = cut;
      }
    }
  }

  if (const json* cv = find(j, "convergence")) {
    const std::string w = "convergence";
    check_keys(*cv, w, {"sweep", "formulations", "reference"});
    if (const json* s = find(*cv, "sweep")) {
      if (!s->is_array()) bad("convergence.sweep", "expected an array of integers");
      for (const json& v : *s) {
        if (!v.is_number_integer()) bad("convergence.sweep", "expected an array of integers");
        if (v.get<int>() < 4) bad("convergence.sweep", "every N must be at least 4");
        c.sweep.push_back(v.get<int>());
      }
    }
    if (const json* f = find(*cv, "formulations")) {
      if (!f->is_array()) bad("convergence.formulations", "expected an array of names");
      for (const json& v : *f) {
        if (!v.is_string()) bad("convergence.formulations", "expected an array of names");
        try {
          c.sweep_formulations.push_back(parse_formulation(v.get<std::string>()));
        } catch (const ConfigError& e) {
          bad("convergence.formulations", e.what());
        }
      }
    }
    c.reference = get_string(*cv, w, "reference", "");
  }

  if (const json* ex = find(j, "export")) {
    check_keys(*ex, "export", {"samples", "path"});
    c.export_samples = get_int(*ex, "export", "samples", c.export_samples);
    if (c.export_samples < 2) bad("export.samples", "must be at least 2");
    c.export_path = get_string(*ex, "export", "path", "");
  }
  c.threads = get_int(j, "", "threads", c.threads);
  if (c.threads < 0) bad("threads", "must be non-negative");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON at byte " + std::to_string(e.byte) +
                      ": " + e.what());
  }
  RunConfig c = parse_config(j);
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  if (c.geometry.kind == "file") {
    std::filesystem::path p = c.geometry.path;
    resolve(p);
    c.geometry.path = p.string();
  }
  resolve(c.output_dir);
  resolve(c.reference);
  resolve(c.export_path);
  return c;
}

MediumParams medium_of(const RunConfig& config) { return MediumParams::free_space(config.wavelength); }

Surface build_surface(const RunConfig& config) {
  const GeometryConfig& g = config.geometry;
  const MediumParams m = medium_of(config);
  if (g.kind == "sphere") return make_sphere(g.diameter, g.center, m);
  if (g.kind == "rounded_cube") return make_rounded_box(Vec3::Constant(g.edge), g.radius, g.center, m);
  if (g.kind == "rounded_box") return make_rounded_box(g.size, g.radius, g.center, m);
  if (g.kind == "dipole") return make_dipole(g.arm_cross, g.arm_length, g.gap, g.radius, m);
  if (g.kind == "torus") return make_torus(g.major_radius, g.minor_radius, g.n_major, g.n_minor, m);
  if (g.kind == "file") return load_surface(g.path).with_medium(m);
  bad("geometry.kind", "unknown geometry kind '" + g.kind + "'");
}

PlaneWave plane_wave_of(const RunConfig& config) {
  PlaneWave pw;
  pw.direction = config.direction;
  pw.polarization = config.polarization;
  pw.amplitude = config.amplitude;
  pw.medium = medium_of(config);
  return pw;
}

void write_density_csv(const std::filesystem::path& path, const Discretization& disc, const VectorXc& density) {
  const std::vector<CVec3> j = to_cartesian(disc, density);
  std::ofstream out = open_out(path);
  out << "patch,u,v,x,y,z,re_jx,im_jx,re_jy,im_jy,re_jz,im_jz,abs_j\n";
  for (int p = 0; p < disc.points(); ++p) {
    const Vec2 uv = disc.uv(p);
    const Vec3& x = disc.position(p);
    out << disc.surface().id(disc.patch_of(p)) << ',' << fmt(uv[0]) << ',' << fmt(uv[1]);
    for (int c = 0; c < 3; ++c) out << ',' << fmt(x[c]);
    for (int c = 0; c < 3; ++c) out << ',' << fmt(j[p][c].real()) << ',' << fmt(j[p][c].imag());
    out << ',' << fmt(j[p].norm()) << '\n';
  }
  finish(out, path);
}

ReferenceDensity::ReferenceDensity(const Surface& surface, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read reference density '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<int> ids;
  std::vector<Vec2> uvs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(std::stod(cell));
    if (f.size() != 13) throw ConfigError("reference density '" + path.string() + "': expected 13 columns");
    ids.push_back(static_cast<int>(f[0]));
    uvs.emplace_back(f[1], f[2]);
    samples_.emplace_back(Complex(f[6], f[7]), Complex(f[8], f[9]), Complex(f[10], f[11]));
  }
  const int m = surface.size();
  if (samples_.empty() || samples_.size() % m) throw ConfigError("reference density does not match the surface");
  n_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(samples_.size() / m))));
  if (static_cast<std::size_t>(n_) * n_ * m != samples_.size())
    throw ConfigError("reference density is not a tensor grid on every patch");
  kind_ = std::abs(std::abs(uvs[0][0]) - 1.0) < 1e-14 ? GridKind::closed : GridKind::open;
  nodes_.emplace(kind_, n_);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const int p = static_cast<int>(i) / (n_ * n_), iu = (static_cast<int>(i) / n_) % n_, iv = static_cast<int>(i) % n_;
    if (ids[i] != surface.id(p) || std::abs(uvs[i][0] - nodes_->node(iu)) > 1e-12 ||
        std::abs(uvs[i][1] - nodes_->node(iv)) > 1e-12)
      throw ConfigError("reference density row " + std::to_string(i + 2) + " does not follow the grid layout");
  }
}

CVec3 ReferenceDensity::current(int patch, double u, double v) const {
  const std::vector<double> cu = nodes_->cardinals(u), cv = nodes_->cardinals(v);
  CVec3 s = CVec3::Zero();
  const std::size_t base = static_cast<std::size_t>(patch) * n_ * n_;
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) s += (cu[a] * cv[b]) * samples_[base + a * n_ + b];
  return s;
}

SolveOutcome run_solve(const RunConfig& config) {
  apply_threads(config);
  prepare_dir(config.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const Surface surface = build_surface(config);
  const PlaneWave pw = plane_wave_of(config);
  const Problem problem(surface, config.formulation, config.n, config.quadrature, config.mfie_grid);
  const VectorXc rhs = assemble_rhs(problem, pw);
  SolveOutcome out;
  out.setup_seconds = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  out.report = gmres([&](const VectorXc& x) { return problem.op().apply(x); }, rhs, config.gmres);
  out.solve_seconds = seconds_since(t1);
  out.n_unique = problem.map().n_unique();
  out.n_full = problem.map().n_full();
  out.groups = problem.map().groups();

  const Discretization& disc = problem.discretization();
  const VectorXc density = problem.map().expand(out.report.solution);
  json files = json::array();
  if (config.write_density) {
    write_density_csv(config.output_dir / "density.csv", disc, density);
    files.push_back("density.csv");
  }
  if (config.rcs) {
    const RcsCutConfig& c = *config.rcs;
    const FarFieldPattern ff = far_field_cut(disc, density, c.phi_deg, c.start_deg, c.stop_deg, c.count);
    const std::vector<double> sigma = ff.rcs(std::abs(config.amplitude));
    const std::filesystem::path path = config.output_dir / "rcs.csv";
    std::ofstream f = open_out(path);
    f << "angle_deg,theta_deg,phi_deg,rcs,rcs_dbsm\n";
    for (int i = 0; i < ff.size(); ++i) {
      f << fmt(cut_angle(c.start_deg, c.stop_deg, i, c.count)) << ',' << fmt(ff.theta[i] * 180.0 / pi) << ','
        << fmt(ff.phi[i] * 180.0 / pi) << ',' << fmt(sigma[i]) << ',' << fmt(to_dbsm(sigma[i], config.length_unit_m))
        << '\n';
    }
    finish(f, path);
    files.push_back("rcs.csv");
  }

  json m;
  m["config"] = config.source;
  m["formulation"] = to_string(config.formulation);
  m["grid"] = disc.kind() == GridKind::closed ? "closed" : "open";
  m["n"] = config.n;
  m["patches"] = disc.patches();
  m["grid_points"] = disc.points();
  m["groups"] = out.groups;
  m["n_unique"] = out.n_unique;
  m["n_full"] = out.n_full;
  m["iterations"] = out.report.iterations;
  m["converged"] = out.report.converged;
  m["final_residual"] = out.report.residual;
  m["residual_history"] = out.report.history;
  m["rcs_units"] = {{"rcs", "model length units squared"},
                    {"rcs_dbsm", "10 log10(m^2)"},
                    {"length_unit_m", config.length_unit_m},
                    {"wavelength", config.wavelength}};
  m["files"] = files;
  m["timing"] = {{"setup_seconds", out.setup_seconds}, {"solve_seconds", out.solve_seconds}};
  const std::filesystem::path path = config.output_dir / "manifest.json";
  std::ofstream f = open_out(path);
  f << m.dump(2) << '\n';
  finish(f, path);
  return out;
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& config) {
  if (config.sweep.empty()) bad("convergence.sweep", "must list at least one N");
  apply_threads(config);
  prepare_dir(config.output_dir);
  const Surface surface = build_surface(config);
  const PlaneWave pw = plane_wave_of(config);
  std::optional<MieSeries> mie;
  std::optional<ReferenceDensity> ref;
  if (!config.reference.empty())
    ref.emplace(surface, config.reference);
  else if (config.geometry.kind == "sphere")
    mie.emplace(config.geometry.diameter, pw, config.geometry.center);
  else
    bad("convergence.reference", "required for geometries without a Mie oracle");

  std::vector<Formulation> forms = config.sweep_formulations;
  if (forms.empty()) forms.push_back(config.formulation);
  std::vector<ConvergenceRow> rows;
  for (Formulation f : forms) {
    for (int n : config.sweep) {
      const Problem problem(surface, f, n, config.quadrature, config.mfie_grid);
      const Discretization& d = problem.discretization();
      std::vector<CVec3> j(static_cast<std::size_t>(d.points()));
      for (int p = 0; p < d.points(); ++p) {
        const Vec2 uv = d.uv(p);
        j[p] = mie ? mie->surface_current(d.position(p)) : ref->current(d.patch_of(p), uv[0], uv[1]);
      }
      const VectorXc exact = problem.project(j);
      const VectorXc rhs = assemble_rhs(problem, pw);
      ConvergenceRow row;
      row.formulation = f;
      row.n = n;
      row.unknowns = problem.op().size();
      row.forward_error = (problem.op().apply(exact) - rhs).norm() / rhs.norm();
      const SolveReport rep = gmres([&](const VectorXc& x) { return problem.op().apply(x); }, rhs, config.gmres);
      row.iterations = rep.iterations;
      row.converged = rep.converged;
      row.solution_error = (rep.solution - exact).norm() / exact.norm();
      rows.push_back(row);
    }
  }
  const std::filesystem::path path = config.output_dir / "convergence.csv";
  std::ofstream out = open_out(path);
  out << "formulation,n,unknowns,forward_error,iterations,converged,solution_error\n";
  for (const ConvergenceRow& r : rows)
    out << to_string(r.formulation) << ',' << r.n << ',' << r.unknowns << ',' << fmt(r.forward_error) << ','
        << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << fmt(r.solution_error) << '\n';
  finish(out, path);
  return rows;
}

void run_export(const RunConfig& config) {
  const Surface surface = build_surface(config);
  std::filesystem::path path = config.export_path;
  if (path.empty()) {
    prepare_dir(config.output_dir);
    path = config.output_dir / "surface.patch";
  }
  save_surface(surface, config.export_samples, path.string());
}

}  // namespace cbie
