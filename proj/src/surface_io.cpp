#include "cbie/surface_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cbie/errors.hpp"

namespace cbie {

InterpolatedPatch::InterpolatedPatch(const std::array<Eigen::MatrixXd, 3>& samples)
    : x_(samples),
      nodes_u_(GridKind::closed, static_cast<int>(samples[0].rows())),
      nodes_v_(GridKind::closed, static_cast<int>(samples[0].cols())) {
  for (int c = 0; c < 3; ++c) {
    if (samples[c].rows() != samples[0].rows() || samples[c].cols() != samples[0].cols()) {
      throw DomainError("InterpolatedPatch: coordinate grids differ in size");
    }
    xu_[c] = nodes_u_.diff_matrix() * x_[c];
    xv_[c] = x_[c] * nodes_v_.diff_matrix().transpose();
  }
}

PatchPoint InterpolatedPatch::eval(double u, double v) const {
  const int nu = rows(), nv = cols();
  Eigen::VectorXd lu(nu), lv(nv);
  nodes_u_.cardinals(u, lu.data());
  nodes_v_.cardinals(v, lv.data());
  PatchPoint p;
  for (int c = 0; c < 3; ++c) {
    p.r[c] = lu.dot(x_[c] * lv);
    p.ru[c] = lu.dot(xu_[c] * lv);
    p.rv[c] = lu.dot(xv_[c] * lv);
  }
  return p;
}

namespace {

struct Token {
  std::string text;
  std::size_t offset;
};

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  /// Next non-empty line split into tokens; false at end of input.
  bool next_line(std::vector<Token>& out) {
    out.clear();
    while (pos_ < text_.size() && out.empty()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      std::size_t i = pos_;
      while (i < end) {
        while (i < end && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
        const std::size_t start = i;
        while (i < end && !std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
        if (i > start) out.push_back({text_.substr(start, i - start), start});
      }
      line_start_ = pos_;
      pos_ = end + 1;
    }
    return !out.empty();
  }
  std::vector<Token> expect_line(const char* what) {
    std::vector<Token> t;
    if (!next_line(t)) throw ParseError(std::string("unexpected end of file, expected ") + what, text_.size());
    return t;
  }
  std::size_t line_offset() const noexcept { return line_start_; }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
};

double to_double(const Token& t) {
  double value = 0.0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  const auto res = std::from_chars(b, e, value);
  if (res.ec != std::errc() || res.ptr != e) throw ParseError("invalid number '" + t.text + "'", t.offset);
  return value;
}

long to_int(const Token& t) {
  long value = 0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  const auto res = std::from_chars(b, e, value);
  if (res.ec != std::errc() || res.ptr != e) throw ParseError("invalid integer '" + t.text + "'", t.offset);
  return value;
}

void expect_keyword(const std::vector<Token>& line, const char* word, std::size_t count) {
  if (line[0].text != word) {
    throw ParseError(std::string("expected '") + word + "', found '" + line[0].text + "'", line[0].offset);
  }
  if (line.size() != count) {
    throw ParseError(std::string("'") + word + "' line needs " + std::to_string(count - 1) + " value(s)",
                     line.back().offset);
  }
}

void check_edges(const Surface& s, double tol) {
  for (const Adjacency& a : s.adjacency()) {
    double worst = 0.0;
    constexpr int samples = 33;
    for (int i = 0; i < samples; ++i) {
      const double t = std::cos(pi * i / (samples - 1));
      const Vec2 pa = edge_uv(a.a.edge, t);
      const Vec2 pb = edge_uv(a.b.edge, a.flip ? -t : t);
      worst = std::max(worst, (s.patch(a.a.patch).point(pa[0], pa[1]) -
                               s.patch(a.b.patch).point(pb[0], pb[1])).norm());
    }
    if (worst > tol) {
      std::ostringstream msg;
      msg << "shared edge mismatch between patch " << s.id(a.a.patch) << " edge " << a.a.edge
          << " and patch " << s.id(a.b.patch) << " edge " << a.b.edge << " (max gap " << worst << ")";
      throw ConformityError(msg.str());
    }
  }
}

}  // namespace

Surface parse_surface(const std::string& text) {
  Reader in(text);
  auto line = in.expect_line("header");
  if (line.size() != 2 || line[0].text != "PATCHSURF" || line[1].text != "v1") {
    throw ParseError("missing 'PATCHSURF v1' header", line[0].offset);
  }
  line = in.expect_line("wavelength");
  expect_keyword(line, "wavelength", 2);
  const double wavelength = to_double(line[1]);
  if (!(wavelength > 0.0)) throw ParseError("wavelength must be positive", line[1].offset);
  line = in.expect_line("patch count");
  expect_keyword(line, "patches", 2);
  const long m = to_int(line[1]);
  if (m < 1) throw ParseError("patch count must be positive", line[1].offset);

  std::vector<PatchPtr> patches;
  std::vector<int> ids;
  std::map<long, int> index_of;
  for (long p = 0; p < m; ++p) {
    line = in.expect_line("patch block");
    expect_keyword(line, "patch", 4);
    const long id = to_int(line[1]);
    const long nu = to_int(line[2]), nv = to_int(line[3]);
    if (nu < 2 || nv < 2) throw ParseError("sample grid must be at least 2x2", line[2].offset);
    if (!index_of.emplace(id, static_cast<int>(p)).second) {
      throw ParseError("duplicate patch id " + std::to_string(id), line[1].offset);
    }
    std::array<Eigen::MatrixXd, 3> xyz;
    for (auto& c : xyz) c.resize(nu, nv);
    for (long i = 0; i < nu; ++i)
      for (long j = 0; j < nv; ++j) {
        line = in.expect_line("sample point");
        if (line.size() != 3) {
          throw ParseError("sample line needs 3 coordinates, found " + std::to_string(line.size()),
                           in.line_offset());
        }
        for (int c = 0; c < 3; ++c) xyz[c](i, j) = to_double(line[c]);
      }
    patches.push_back(std::make_shared<InterpolatedPatch>(xyz));
    ids.push_back(static_cast<int>(id));
  }

  std::vector<Adjacency> adjacency;
  while (in.next_line(line)) {
    expect_keyword(line, "edge", 6);
    auto lookup = [&](const Token& t) {
      auto it = index_of.find(to_int(t));
      if (it == index_of.end()) throw ParseError("edge references unknown patch id " + t.text, t.offset);
      return it->second;
    };
    auto edge = [&](const Token& t) {
      const long e = to_int(t);
      if (e < 0 || e > 3) throw ParseError("edge index must be 0-3", t.offset);
      return static_cast<int>(e);
    };
    const long flip = to_int(line[5]);
    if (flip != 0 && flip != 1) throw ParseError("flip must be 0 or 1", line[5].offset);
    adjacency.push_back({{lookup(line[1]), edge(line[2])}, {lookup(line[3]), edge(line[4])}, flip == 1});
  }

  const MediumParams medium = MediumParams::free_space(wavelength);
  if (adjacency.empty()) return Surface::from_patches(std::move(patches), medium, std::move(ids));
  Surface s(std::move(patches), medium, std::move(adjacency), std::move(ids));
  check_edges(s, 1e-9 * s.diameter());
  return s;
}

Surface load_surface(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open surface file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  if (f.bad()) throw IoError("read failure on '" + path + "'");
  return parse_surface(buf.str());
}

std::string format_surface(const Surface& surface, int n) {
  if (n < 2) throw DomainError("export grid must have at least 2 points per direction");
  const std::vector<double> x = cc_nodes(n);
  std::string out;
  char buf[128];
  auto put = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  out += "PATCHSURF v1\n";
  put("wavelength %.17g\n", surface.medium().wavelength);
  put("patches %d\n", surface.size());
  for (int p = 0; p < surface.size(); ++p) {
    put("patch %d %d %d\n", surface.id(p), n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec3 r = surface.patch(p).point(x[i], x[j]);
        put("%.17g %.17g %.17g\n", r[0], r[1], r[2]);
      }
  }
  for (const Adjacency& a : surface.adjacency()) {
    put("edge %d %d %d %d %d\n", surface.id(a.a.patch), a.a.edge, surface.id(a.b.patch), a.b.edge,
        a.flip ? 1 : 0);
  }
  return out;
}

void save_surface(const Surface& surface, int n, const std::string& path) {
  const std::string text = format_surface(surface, n);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write failure on '" + path + "'");
}

}  // namespace cbie
