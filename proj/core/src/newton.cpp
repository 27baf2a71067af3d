#include "toprec/newton.hpp"

#include "toprec/numeric.hpp"
#include "toprec/series.hpp"

#include <algorithm>
#include <cctype>

namespace toprec::newton {

// --- parsing -------------------------------------------------------------

namespace {

struct Lexer {
  const std::string& s;
  size_t i = 0;
  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool done() {
    skip();
    return i >= s.size();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw EngineError("polynomial parse error at column " + std::to_string(i + 1) + ": " + what);
  }
  long integer() {
    skip();
    size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i) fail("expected a number");
    long v = std::stol(s.substr(i, j - i));
    i = j;
    return v;
  }
  std::string word() {
    skip();
    size_t j = i;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
    std::string w = s.substr(i, j - i);
    i = j;
    return w;
  }
};

MPoly factor(Lexer& lx, const std::string& param) {
  lx.skip();
  if (lx.i < lx.s.size() && std::isdigit(static_cast<unsigned char>(lx.s[lx.i]))) {
    Integer num(lx.integer());
    Integer den(1);
    if (lx.eat('/')) den = Integer(lx.integer());
    if (den == 0) lx.fail("zero denominator");
    return MPoly(Rational(num, den));
  }
  std::string w = lx.word();
  int v;
  if (w == "x") v = kX;
  else if (w == "y") v = kY;
  else if (!param.empty() && w == param) v = kT;
  else lx.fail(w.empty() ? "expected a factor" : "unknown symbol '" + w + "'");
  int e = 1;
  if (lx.eat('^')) e = static_cast<int>(lx.integer());
  return MPoly::var(v, e);
}

}  // namespace

PlanePolynomial PlanePolynomial::parse(const std::string& text, const std::string& param) {
  Lexer lx{text};
  MPoly p;
  bool first = true;
  while (!lx.done()) {
    long sign = 1;
    if (lx.eat('-')) sign = -1;
    else if (!lx.eat('+') && !first) lx.fail("expected + or -");
    first = false;
    MPoly term = factor(lx, param);
    while (lx.eat('*')) term *= factor(lx, param);
    p += sign > 0 ? term : -term;
  }
  if (p.degree(kY) < 1) throw EngineError("polynomial must depend on y");
  return PlanePolynomial{p, param};
}

PlanePolynomial PlanePolynomial::specialize(const Rational& t) const {
  return PlanePolynomial{poly.substitute(kT, MPoly(t)), param};
}

std::map<std::pair<int, int>, MPoly> PlanePolynomial::coeffs() const {
  std::map<std::pair<int, int>, MPoly> out;
  for (auto& [e, c] : poly.terms()) {
    int i = e.size() > 0 ? e[0] : 0, j = e.size() > 1 ? e[1] : 0;
    MPoly::Exps rest(e.begin() + std::min<size_t>(2, e.size()), e.end());
    rest.insert(rest.begin(), {0, 0});
    out[{i, j}] += MPoly::monomial(rest, c);
  }
  return out;
}

std::string PlanePolynomial::str() const { return poly.str({"x", "y", param}); }

// --- Newton polygon --------------------------------------------------------

namespace {

long cross(const Lattice& o, const Lattice& a, const Lattice& b) {
  return long(a.first - o.first) * (b.second - o.second) - long(a.second - o.second) * (b.first - o.first);
}

// Counter-clockwise hull without collinear points.
std::vector<Lattice> hull(std::vector<Lattice> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Lattice> h(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool on_segment(const Lattice& a, const Lattice& b, const Lattice& p) {
  return cross(a, b, p) == 0 && std::min(a.first, b.first) <= p.first && p.first <= std::max(a.first, b.first) &&
         std::min(a.second, b.second) <= p.second && p.second <= std::max(a.second, b.second);
}

bool in_triangle(const Lattice& a, const Lattice& b, const Lattice& c, const Lattice& p) {
  long d1 = cross(a, b, p), d2 = cross(b, c, p), d3 = cross(c, a, p);
  bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

std::vector<Lattice> support(const PlanePolynomial& P) {
  std::vector<Lattice> s;
  for (auto& [ij, c] : P.coeffs()) s.push_back(ij);
  return s;
}

}  // namespace

std::vector<Lattice> interior(const PlanePolynomial& P) {
  auto h = hull(support(P));
  std::vector<Lattice> out;
  if (h.size() < 3) return out;
  int x0 = h[0].first, x1 = x0, y0 = h[0].second, y1 = y0;
  for (auto& p : h) {
    x0 = std::min(x0, p.first), x1 = std::max(x1, p.first);
    y0 = std::min(y0, p.second), y1 = std::max(y1, p.second);
  }
  for (int i = x0; i <= x1; ++i)
    for (int j = y0; j <= y1; ++j) {
      bool inside = true;
      for (size_t k = 0; k < h.size() && inside; ++k) inside = cross(h[k], h[(k + 1) % h.size()], {i, j}) > 0;
      if (inside) out.push_back({i, j});
    }
  return out;
}

// --- discriminant and U -----------------------------------------------------

namespace {

std::vector<MPoly> y_coeffs(const MPoly& p) {
  int d = p.degree(kY);
  std::vector<MPoly> c(d + 1);
  for (int j = 0; j <= d; ++j) c[j] = p.coeff(kY, j);
  return c;
}

// Sylvester matrix of P and P_y in y; rows for P first.
std::vector<std::vector<MPoly>> sylvester(const PlanePolynomial& P) {
  auto p = y_coeffs(P.poly);
  auto q = y_coeffs(P.poly.derivative(kY));
  int m = static_cast<int>(p.size()) - 1, n = static_cast<int>(q.size()) - 1;
  if (q.empty() || (n == 0 && q[0].is_zero())) throw EngineError("P_y vanishes identically");
  int N = m + n;
  std::vector<std::vector<MPoly>> s(N, std::vector<MPoly>(N));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= m; ++j) s[i][i + j] = p[m - j];
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= n; ++j) s[n + i][i + j] = q[n - j];
  return s;
}

}  // namespace

MPoly discriminant(const PlanePolynomial& P) {
  if (P.deg_y() < 1) throw EngineError("P must be nonconstant in y");
  if (P.deg_y() == 1) return P.poly.derivative(kY);  // 1x1 Sylvester matrix
  return determinant(sylvester(P));
}

MPoly reduce_mod(const MPoly& f, const PlanePolynomial& P) {
  const int m = P.deg_y();
  MPoly lc = P.poly.coeff(kY, m);
  if (!lc.is_constant() || lc.is_zero()) throw EngineError("leading coefficient of P in y must be a nonzero constant");
  Rational inv = Rational(1) / lc.constant();
  MPoly r = f;
  for (int k = r.degree(kY); k >= m; k = r.degree(kY)) {
    MPoly top = r.coeff(kY, k);
    r -= top * MPoly::var(kY, k - m) * P.poly * MPoly(inv);
  }
  return r;
}

MPoly u_poly(const PlanePolynomial& P) {
  MPoly delta = discriminant(P);
  const int m = P.deg_y();
  if (m == 1) return MPoly(0);
  auto s = sylvester(P);
  const int n = m - 1, N = m + n;
  // Cramer on the last unknown: Delta = A P + V P_y with V the determinant
  // below, so V = Delta / P_y mod P and U = V^2 / Delta mod P.
  for (int i = 0; i < n; ++i) s[i][N - 1] = MPoly(0);
  for (int i = 0; i < m; ++i) s[n + i][N - 1] = MPoly::var(kY, m - 1 - i);
  MPoly v = determinant(s);
  MPoly v2 = reduce_mod(v * v, P);
  MPoly u;
  try {
    for (int j = 0; j <= v2.degree(kY); ++j) {
      MPoly cj = v2.coeff(kY, j);
      if (!cj.is_zero()) u += cj.divide_exact(delta) * MPoly::var(kY, j);
    }
  } catch (const ScalarError&) {
    throw EngineError("Delta / P_y^2 is not a polynomial modulo P (non-generic curve)");
  }
  return u;
}

// --- kernel polynomials ------------------------------------------------------

namespace {

MPoly mono(int ex, int ey, int ex2, int ey2) {
  if (ex < 0 || ey < 0 || ex2 < 0 || ey2 < 0) throw std::logic_error("negative exponent in Q");
  return MPoly::var(kX, ex) * MPoly::var(kY, ey) * MPoly::var(kX2, ex2) * MPoly::var(kY2, ey2);
}

}  // namespace

MPoly q_poly(const PlanePolynomial& P) {
  auto coeffs = P.coeffs();
  auto inner = interior(P);
  auto is_inner = [&](const Lattice& p) { return std::find(inner.begin(), inner.end(), p) != inner.end(); };
  MPoly Q;
  for (auto& [ij, c1] : coeffs)
    for (auto& [ij2, c2] : coeffs) {
      auto [i, j] = ij;
      auto [i2, j2] = ij2;
      if (i == i2 || j == j2) continue;  // degenerate triangle, all weights vanish
      Lattice corner{i, j2};
      MPoly acc;
      for (int u = std::min(i, i2); u <= std::max(i, i2); ++u)
        for (int v = std::min(j, j2); v <= std::max(j, j2); ++v) {
          Lattice p{u, v};
          if (!in_triangle(ij, ij2, corner, p)) continue;
          long w = long(std::abs(u - i)) * std::abs(v - j2);
          if (w == 0) continue;
          bool inside = is_inner(p), seg = on_segment(ij, ij2, p);
          Lattice mirror{i + i2 - u, j + j2 - v};
          if (!inside && !seg) acc += MPoly(w) * mono(u - 1, v - 1, i + i2 - u - 1, j + j2 - v - 1);
          if (!inside && is_inner(mirror)) acc += MPoly(w) * mono(i + i2 - u - 1, j + j2 - v - 1, u - 1, v - 1);
          if (seg) acc += MPoly(Rational(w, 2)) * mono(u - 1, v - 1, i + i2 - u - 1, j + j2 - v - 1);
        }
      if (!acc.is_zero()) Q += c1 * c2 * acc;
    }
  return Q;
}

MPoly s_poly(const PlanePolynomial& P, const SCoeffs& s) {
  auto inner = interior(P);
  auto is_inner = [&](const Lattice& p) { return std::find(inner.begin(), inner.end(), p) != inner.end(); };
  MPoly S;
  for (auto& [key, c] : s) {
    auto& [p, q] = key;
    if (!is_inner(p) || !is_inner(q)) throw EngineError("S coefficient outside the interior of the Newton polygon");
    auto it = s.find({q, p});
    if (it == s.end() || it->second != c) throw EngineError("S must be symmetric");
    S += MPoly(c) * mono(p.first - 1, p.second - 1, q.first - 1, q.second - 1);
  }
  return S;
}

BKernelData q_kernel(const PlanePolynomial& P, const SCoeffs& s) {
  BKernelData k;
  k.Q = q_poly(P);
  k.S = s_poly(P, s);
  bool monic = P.poly.coeff(kY, P.deg_y()).is_constant();
  if (monic) k.U = u_poly(P);
  return k;
}

MPoly r0_symbolic(const PlanePolynomial& P, const BKernelData& k) {
  auto at_a = [](const MPoly& f) { return f.substitute(kX, MPoly::var(kXA)).substitute(kY, MPoly::var(kYA)); };
  MPoly dxa = MPoly::var(kX) - MPoly::var(kXA), dya = MPoly::var(kY) - MPoly::var(kYA);
  MPoly sx, sy;
  MPoly d = P.poly;
  for (int j = 1; j <= P.deg_x(); ++j) {
    d = d.derivative(kX);
    sx += MPoly(Rational(1) / Rational(factorial(j))) * dxa.pow(j - 1) * at_a(d);
  }
  d = P.poly.derivative(kY);
  for (int j = 2; j <= P.deg_y(); ++j) {
    d = d.derivative(kY);
    sy += MPoly(Rational(1) / Rational(factorial(j))) * dya.pow(j - 2) * at_a(d);
  }
  auto swap_in = [&](const MPoly& f) {
    return at_a(f).substitute(kX2, MPoly::var(kX)).substitute(kY2, MPoly::var(kY));
  };
  return -(sx * sy) + dxa * (swap_in(k.Q) + swap_in(k.S));
}

// --- ComplexPoly2 -----------------------------------------------------------

ComplexPoly2::ComplexPoly2(int dx, int dy) : c_(dx + 1, std::vector<Complex>(dy + 1, Complex(0L))) {}

void ComplexPoly2::grow(int dx, int dy) {
  int ox = this->dx(), oy = this->dy();
  if (dx <= ox && dy <= oy) return;
  int nx = std::max(dx, ox), ny = std::max(dy, oy);
  c_.resize(nx + 1);
  for (auto& row : c_) row.resize(ny + 1, Complex(0L));
}

ComplexPoly2 ComplexPoly2::from(const MPoly& p, const std::map<int, Complex>& values) {
  ComplexPoly2 out;
  for (auto& [e, c] : p.terms()) {
    Complex v(c);
    int ex = 0, ey = 0;
    for (size_t i = 0; i < e.size(); ++i) {
      if (!e[i]) continue;
      if (i == kX) ex = e[i];
      else if (i == kY) ey = e[i];
      else {
        auto it = values.find(static_cast<int>(i));
        if (it == values.end()) throw EngineError("no value for polynomial variable " + std::to_string(i));
        v *= pow(it->second, e[i]);
      }
    }
    out.grow(ex, ey);
    out.c_[ex][ey] += v;
  }
  return out;
}

Complex& ComplexPoly2::at(int i, int j) {
  grow(i, j);
  return c_[i][j];
}

Complex ComplexPoly2::get(int i, int j) const {
  if (i > dx() || j > dy()) return Complex(0L);
  return c_[i][j];
}

ComplexPoly2& ComplexPoly2::operator+=(const ComplexPoly2& o) {
  grow(o.dx(), o.dy());
  for (int i = 0; i <= o.dx(); ++i)
    for (int j = 0; j <= o.dy(); ++j) c_[i][j] += o.c_[i][j];
  return *this;
}

ComplexPoly2& ComplexPoly2::operator-=(const ComplexPoly2& o) {
  grow(o.dx(), o.dy());
  for (int i = 0; i <= o.dx(); ++i)
    for (int j = 0; j <= o.dy(); ++j) c_[i][j] -= o.c_[i][j];
  return *this;
}

ComplexPoly2 operator*(const ComplexPoly2& a, const ComplexPoly2& b) {
  if (a.c_.empty() || b.c_.empty()) return {};
  ComplexPoly2 out(a.dx() + b.dx(), a.dy() + b.dy());
  for (int i = 0; i <= a.dx(); ++i)
    for (int j = 0; j <= a.dy(); ++j) {
      const Complex& x = a.c_[i][j];
      if (x.re == 0 && x.im == 0) continue;
      for (int k = 0; k <= b.dx(); ++k)
        for (int l = 0; l <= b.dy(); ++l) out.c_[i + k][j + l] += x * b.c_[k][l];
    }
  return out;
}

ComplexPoly2 ComplexPoly2::operator*(const Complex& s) const {
  ComplexPoly2 out = *this;
  for (auto& row : out.c_)
    for (auto& v : row) v *= s;
  return out;
}

ComplexPoly2 ComplexPoly2::dX() const {
  if (dx() < 1) return {};
  ComplexPoly2 out(dx() - 1, dy());
  for (int i = 1; i <= dx(); ++i)
    for (int j = 0; j <= dy(); ++j) out.c_[i - 1][j] = c_[i][j] * Complex(long(i));
  return out;
}

ComplexPoly2 ComplexPoly2::dY() const {
  if (dy() < 1) return {};
  ComplexPoly2 out(dx(), dy() - 1);
  for (int i = 0; i <= dx(); ++i)
    for (int j = 1; j <= dy(); ++j) out.c_[i][j - 1] = c_[i][j] * Complex(long(j));
  return out;
}

Complex ComplexPoly2::operator()(const Complex& x, const Complex& y) const {
  Complex s(0L);
  for (int i = dx(); i >= 0; --i) {
    Complex row(0L);
    for (int j = dy(); j >= 0; --j) row = row * y + c_[i][j];
    s = s * x + row;
  }
  return s;
}

std::vector<Complex> ComplexPoly2::on_series(const std::vector<Complex>& x, const std::vector<Complex>& y,
                                             int order) const {
  std::vector<Complex> out(order + 1, Complex(0L));
  if (c_.empty()) return out;
  // Horner in x over rows evaluated by Horner in y.
  for (int i = dx(); i >= 0; --i) {
    std::vector<Complex> row(order + 1, Complex(0L));
    for (int j = dy(); j >= 0; --j) {
      row = series_mul(row, y, order);
      row[0] += c_[i][j];
    }
    out = series_mul(out, x, order);
    for (int k = 0; k <= order; ++k) out[k] += row[k];
  }
  return out;
}

ComplexPoly2 ComplexPoly2::reduce(const ComplexPoly2& p) const {
  const int m = p.dy();
  Complex lc = p.get(0, m);
  for (int i = 1; i <= p.dx(); ++i)
    if (p.get(i, m).re != 0 || p.get(i, m).im != 0)
      throw EngineError("leading coefficient of P in y must be a nonzero constant");
  ComplexPoly2 r = *this;
  Complex inv = Complex(1L) / lc;
  for (int k = r.dy(); k >= m; --k)
    for (int i = 0; i <= r.dx(); ++i) {
      Complex f = r.c_[i][k] * inv;
      if (f.re == 0 && f.im == 0) continue;
      r.grow(i + p.dx(), 0);
      for (int a = 0; a <= p.dx(); ++a)
        for (int b = 0; b <= m; ++b) r.c_[i + a][k - m + b] -= f * p.c_[a][b];
      r.c_[i][k] = Complex(0L);
    }
  ComplexPoly2 out(r.dx(), std::min(r.dy(), m - 1));
  for (int i = 0; i <= r.dx(); ++i)
    for (int j = 0; j <= out.dy(); ++j) out.c_[i][j] = r.c_[i][j];
  return out;
}

ComplexPoly2 ComplexPoly2::divide_linear(const Complex& x0, Real* rem) const {
  if (dx() < 1) throw EngineError("division of a constant by (x - x0)");
  ComplexPoly2 q(dx() - 1, dy());
  Real worst = 0, scale = norm();
  for (int j = 0; j <= dy(); ++j) {
    Complex carry(0L);
    for (int i = dx(); i >= 1; --i) {
      carry = carry * x0 + c_[i][j];
      q.c_[i - 1][j] = carry;
    }
    Complex r = carry * x0 + c_[0][j];
    worst = std::max(worst, Real(abs(r)));
  }
  if (rem) *rem = scale > 0 ? Real(worst / scale) : Real(worst);
  return q;
}

Real ComplexPoly2::norm() const {
  Real m = 0;
  for (auto& row : c_)
    for (auto& v : row) m = std::max(m, Real(abs(v)));
  return m;
}

// --- branch points -----------------------------------------------------------

namespace {

std::vector<Complex> x_coeffs(const MPoly& f) {
  std::vector<Complex> c(std::max(0, f.degree(kX)) + 1, Complex(0L));
  for (auto& [e, v] : f.terms()) {
    if (e.size() > 1 && std::any_of(e.begin() + 1, e.end(), [](int k) { return k != 0; }))
      throw EngineError("expected a polynomial in x only");
    c[e.empty() ? 0 : e[0]] += Complex(v);
  }
  return c;
}

struct Partials {
  ComplexPoly2 p, px, py, pxx, pxy, pyy;
  explicit Partials(const MPoly& P) {
    p = ComplexPoly2::from(P, {});
    px = p.dX();
    py = p.dY();
    pxx = px.dX();
    pxy = px.dY();
    pyy = py.dY();
  }
};

void require_numeric(const PlanePolynomial& P) {
  if (P.has_param()) throw EngineError("specialize the parameter '" + P.param + "' before numeric work");
}

}  // namespace

std::vector<RamificationDatum> ramification_points(const PlanePolynomial& P, unsigned bits) {
  require_numeric(P);
  PrecisionScope scope(bits);
  MPoly delta = discriminant(P);
  auto dc = x_coeffs(delta);
  auto xs = poly_roots(dc, bits);
  if (xs.empty()) throw EngineError("the discriminant has no roots: no branch points");
  Partials d(P.poly);
  const Real tight = boost::multiprecision::ldexp(Real(1), -static_cast<int>(bits) / 2);
  const Real loose = boost::multiprecision::ldexp(Real(1), -static_cast<int>(bits) / 8);
  std::vector<RamificationDatum> out;
  for (auto& x0 : xs) {
    // y-roots of P(x0, .), pick the one closest to a root of P_y.
    std::vector<Complex> yc(P.deg_y() + 1, Complex(0L));
    for (int j = 0; j <= P.deg_y(); ++j)
      for (int i = 0; i <= d.p.dx(); ++i) yc[j] += d.p.get(i, j) * pow(x0, i);
    auto ys = poly_roots(yc, bits);
    if (ys.empty()) throw EngineError("no y over a root of the discriminant");
    Complex y0 = ys[0];
    Real best = abs(d.py(x0, y0));
    for (auto& y : ys)
      if (abs(d.py(x0, y)) < best) best = abs(d.py(x0, y)), y0 = y;
    // Newton on (P, P_y) = 0; the Jacobian determinant is P_x P_yy at a simple point.
    Complex x = x0, y = y0;
    for (int it = 0; it < 200; ++it) {
      Complex f = d.p(x, y), g = d.py(x, y);
      Complex a = d.px(x, y), b = g, c = d.pxy(x, y), e = d.pyy(x, y);
      Complex det = a * e - b * c;
      if (abs(det) == 0) throw EngineError("singular point on the curve (P_x P_yy = 0)");
      Complex dxs = (f * e - b * g) / det, dys = (a * g - c * f) / det;
      x -= dxs;
      y -= dys;
      if (abs(dxs) + abs(dys) < boost::multiprecision::ldexp(Real(1), -static_cast<int>(bits) + 4) * (1 + abs(x) + abs(y))) break;
    }
    RamificationDatum r;
    r.x = x;
    r.y = y;
    r.px = d.px(x, y);
    r.pyy = d.pyy(x, y);
    Real scale = 1 + abs(x) + abs(y);
    if (abs(d.p(x, y)) > tight * scale || abs(d.py(x, y)) > tight * scale)
      throw EngineError("branch point refinement did not converge");
    if (abs(r.px) < loose) throw EngineError("branch point with P_x = 0 is not simple");
    if (abs(r.pyy) < loose) throw EngineError("branch point with P_yy = 0 is not simple");
    for (auto& o : out)
      if (abs(o.x - x) < loose)
        throw EngineError("two branch points over the same x (or a repeated root of the discriminant)");
    r.c = -r.pyy / (Complex(2L) * r.px);
    r.ylocal = {y, Complex(1L)};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Complex> local_y_expansion(const PlanePolynomial& P, const RamificationDatum& a, int kmax) {
  require_numeric(P);
  auto p = ComplexPoly2::from(P.poly, {});
  std::vector<Complex> X{a.x, Complex(0L), a.c};
  std::vector<Complex> Y{a.y, Complex(1L)};
  for (int k = 2; k <= kmax; ++k) {
    Y.push_back(Complex(0L));
    auto r = p.on_series(X, Y, k + 1);
    Y[k] = -r[k + 1] / a.pyy;
  }
  Y.resize(std::max(kmax, 1) + 1, Complex(0L));
  return Y;
}

std::vector<Complex> local_y_recursion(const PlanePolynomial& P, const RamificationDatum& a, int kmax,
                                       bool with_square) {
  require_numeric(P);
  // Partial derivatives P_{x^p y^q}(a).
  std::map<std::pair<int, int>, Complex> D;
  MPoly dx = P.poly;
  for (int p = 0; p <= P.deg_x(); ++p, dx = dx.derivative(kX)) {
    MPoly d = dx;
    for (int q = 0; q <= P.deg_y(); ++q, d = d.derivative(kY)) D[{p, q}] = d.evaluate(std::vector<Complex>{a.x, a.y});
  }
  std::vector<Complex> y(kmax + 1, Complex(0L));
  y[0] = a.y;
  if (kmax >= 1) y[1] = Complex(1L);
  for (int k = 2; k <= kmax; ++k) {
    // w = sum_{j>=2} y_j zeta^{j-1}
    std::vector<Complex> one_w(k + 1, Complex(0L));
    one_w[0] = Complex(1L);
    for (int j = 2; j < k && j - 1 <= k; ++j) one_w[j - 1] = y[j];
    Complex acc(0L);
    for (auto& [pq, v] : D) {
      auto [p, q] = pq;
      int w = 2 * p + q;
      if (w < 3 || w > k + 1) continue;
      auto pw = series_pow(one_w, q, k + 1 - w);
      Complex term = v * pow(a.c, p) / Complex(Rational(factorial(p) * factorial(q)));
      acc += term * pw[k + 1 - w];
    }
    if (with_square) {
      Complex sq(0L);
      for (int j = 2; j < k; ++j) {
        int l = k + 1 - j;
        if (l >= 2 && l < k) sq += y[j] * y[l];
      }
      acc += a.pyy / Complex(2L) * sq;
    }
    y[k] = -acc / a.pyy;
  }
  return y;
}

// --- kernel evaluation -------------------------------------------------------

namespace {

Complex eval4(const MPoly& f, const Complex& x, const Complex& y, const Complex& x2, const Complex& y2) {
  if (f.is_zero()) return Complex(0L);
  return f.evaluate(std::vector<Complex>{x, y, Complex(0L), x2, y2});
}

}  // namespace

Complex b_kernel_eval(const PlanePolynomial& P, const BKernelData& k, const Complex& x, const Complex& y,
                      const Complex& x2, const Complex& y2) {
  require_numeric(P);
  const MPoly& p = P.poly;
  MPoly py = p.derivative(kY), px = p.derivative(kX);
  auto at = [](const MPoly& f, const Complex& a, const Complex& b) { return f.evaluate(std::vector<Complex>{a, b}); };
  Complex qs = eval4(k.Q, x, y, x2, y2) + eval4(k.S, x, y, x2, y2);
  Complex main;
  if (x == x2) {
    if (y == y2) throw PoleError("B at coincident points");
    // limit along the fiber: P(x,y')P(x',y) ~ -P_x(x,y)P_x(x,y')(x-x')^2
    Complex dy = y - y2;
    main = at(px, x, y) * at(px, x, y2) / (dy * dy);
  } else {
    Complex dx = x - x2, dy = y - y2;
    if (y == y2) throw PoleError("B with equal y at distinct x is not handled");
    main = -(at(p, x, y2) * at(p, x2, y)) / (dx * dx * dy * dy);
  }
  return (main + qs) / (at(py, x, y) * at(py, x2, y2));
}

// --- Curve -------------------------------------------------------------------

Complex Curve::Laurent::at(int power) const {
  int i = power - low;
  if (i < 0) return Complex(0L);
  if (i >= static_cast<int>(c.size())) throw EngineError("local expansion truncated below the requested order");
  return c[i];
}

Curve::Curve(const PlanePolynomial& P, CurveOptions opts) : P_(P), opts_(std::move(opts)) {
  require_numeric(P_);
  if (opts_.kmax < 1) throw EngineError("kmax must be at least 1");
  PrecisionScope scope(opts_.bits);
  kernel_ = q_kernel(P_, opts_.s);
  if (!P_.poly.coeff(kY, P_.deg_y()).is_constant())
    throw EngineError("leading coefficient of P in y must be a nonzero constant");
  points_ = ramification_points(P_, opts_.bits);
  Partials d(P_.poly);
  p_ = d.p;
  px_ = d.px;
  py_ = d.py;
  pxy_ = d.pxy;
  pyy_ = d.pyy;
  u_ = ComplexPoly2::from(kernel_.U, {});
  delta_ = x_coeffs(discriminant(P_));
  const int K = opts_.kmax;
  order_ = 2 * K + 6;
  const int N = order_ + 2 * K + 4;
  for (auto& a : points_) {
    a.ylocal = local_y_expansion(P_, a, N);
    norm_.push_back(-Complex(1L) / a.px);
  }
  build_R();
  build_local();
}

void Curve::build_R() {
  const int K = opts_.kmax;
  const int nb = static_cast<int>(points_.size());
  auto r0 = r0_symbolic(P_, kernel_);
  std::vector<Complex> ddelta(nb);
  for (int b = 0; b < nb; ++b) {
    auto [v, dv] = poly_eval(delta_, points_[b].x);
    ddelta[b] = dv;
    R_[b].push_back(ComplexPoly2::from(r0, {{kXA, points_[b].x}, {kYA, points_[b].y}}).reduce(p_));
  }
  auto lin = [](const Complex& x0) {
    ComplexPoly2 l(1, 0);
    l.at(0, 0) = -x0;
    l.at(1, 0) = Complex(1L);
    return l;
  };
  for (int a = 0; a < nb; ++a) {
    const Complex xa = points_[a].x;
    const ComplexPoly2 la = lin(xa);
    for (int k = 0; k < K; ++k) {
      const ComplexPoly2& R = R_[a][k];
      ComplexPoly2 W = (u_ * (px_ * py_ * R.dY() + R * py_ * pxy_ - R * px_ * pyy_)).reduce(p_);
      ComplexPoly2 next = R * Complex(long(-(k + 1))) + la * R.dX() - W * (Complex(1L) / ddelta[a]);
      const int e = opts_.printed_correction ? k : k + 1;
      for (int b = 0; b < nb; ++b) {
        if (b == a) continue;
        const auto& pb = points_[b];
        Complex coef = Complex(2L) * u_(pb.x, pb.y) * R(pb.x, pb.y) / pow(pb.x - xa, e);
        ComplexPoly2 corr = R_[b][0] * coef;
        for (int i = 0; i < e; ++i) corr = corr * la;
        Real rem;
        ComplexPoly2 q = (W - corr).reduce(p_).divide_linear(pb.x, &rem);
        defect_ = std::max(defect_, rem);
        next -= (la * q) * (Complex(1L) / ddelta[b]);
      }
      R_[a].push_back(next.reduce(p_));
    }
  }
}

std::vector<Complex> Curve::x_series(int a) const { return {points_[a].x, Complex(0L), points_[a].c}; }
std::vector<Complex> Curve::y_series(int a) const { return points_[a].ylocal; }

void Curve::build_local() {
  const int K = opts_.kmax;
  const int nb = static_cast<int>(points_.size());
  for (int a = 0; a < nb; ++a) {
    const auto& pa = points_[a];
    const auto& Y = pa.ylocal;
    const int N = static_cast<int>(Y.size()) - 1;
    auto X = x_series(a);
    // P_y(x(zeta), y(zeta)) / zeta
    auto pys = py_.on_series(X, Y, N);
    std::vector<Complex> py1(pys.begin() + 1, pys.end());
    auto inv_py1 = series_inverse(py1, N - 1);
    for (int b = 0; b < nb; ++b) {
      std::vector<Complex> inv_xb;
      if (b != a) {
        std::vector<Complex> xb = X;
        xb[0] -= points_[b].x;
        inv_xb = series_inverse(xb, N - 1);
      }
      for (int k = 0; k <= K; ++k) {
        auto r = R_.at(b)[k].on_series(X, Y, N - 1);
        auto f = series_mul(r, inv_py1, N - 1);
        Complex pre = norm_[b] * Complex(2L) * pa.c;
        for (auto& v : f) v *= pre;
        Laurent L;
        if (b == a) {
          L.low = -2 * k - 2;
          Complex s = Complex(1L) / pow(pa.c, k + 1);
          for (auto& v : f) v *= s;
        } else {
          L.low = 0;
          auto ip = series_pow(inv_xb, k + 1, N - 1);
          f = series_mul(f, ip, N - 1);
        }
        L.c = std::move(f);
        local_[{a, b, k}] = std::move(L);
      }
    }
  }
}

Complex Curve::dxi_dx(int a, int k, const Complex& x, const Complex& y) const {
  const auto& pa = points_.at(a);
  Complex den = pow(x - pa.x, k + 1) * py_(x, y);
  if (den.re == 0 && den.im == 0) throw PoleError("basis evaluated at a pole");
  return norm_[a] * R_.at(a).at(k)(x, y) / den;
}

Complex Curve::b_eval(const Complex& x, const Complex& y, const Complex& x2, const Complex& y2) const {
  PrecisionScope scope(opts_.bits);
  return b_kernel_eval(P_, kernel_, x, y, x2, y2);
}

// --- ABCD ------------------------------------------------------------------

namespace {

// Per-branch-point data of the residue formulas.
struct LocalTables {
  std::vector<std::vector<Complex>> N;  // e_k = sum_j N[k][j] d xi_{a,j}
  std::vector<Complex> Einv;            // 1 / E in powers of zeta^2
  std::vector<Complex> b;               // B(zeta, -zeta) / dzeta^2, from zeta^{-2}
};

LocalTables tables_for(const Curve& cv, int a) {
  const int K = cv.kmax();
  const auto& pa = cv.points()[a];
  LocalTables t;
  // M[k][j] = [zeta^{-2j-2}] d xi_{a,k}; lower triangular.
  std::vector<std::vector<Complex>> M(K + 1, std::vector<Complex>(K + 1, Complex(0L)));
  for (int k = 0; k <= K; ++k)
    for (int j = 0; j <= k; ++j) M[k][j] = cv.local(a, a, k).at(-2 * j - 2);
  t.N.assign(K + 1, std::vector<Complex>(K + 1, Complex(0L)));
  for (int k = 0; k <= K; ++k) {
    t.N[k][k] = Complex(1L) / M[k][k];
    for (int j = k - 1; j >= 0; --j) {
      Complex s(0L);
      for (int i = j + 1; i <= k; ++i) s += t.N[k][i] * M[i][j];
      t.N[k][j] = -s / M[j][j];
    }
  }
  // (y(z) - y(sigma z)) dx = zeta^2 E(zeta^2) dzeta, E = 4c(1 + y_3 zeta^2 + ...)
  const auto& Y = pa.ylocal;
  const int L = K + 2;
  std::vector<Complex> E(L + 1, Complex(0L));
  for (int l = 0; l <= L && 2 * l + 1 < static_cast<int>(Y.size()); ++l)
    E[l] = Complex(4L) * pa.c * Y[2 * l + 1];
  t.Einv = series_inverse(E, L);

  // B(zeta, -zeta): fiber limit of the kernel, times dx^2 = (2 c zeta)^2 dzeta^2.
  const int n = 8;
  auto X = cv.x_series(a);
  std::vector<Complex> Yp(Y.begin(), Y.begin() + std::min<size_t>(Y.size(), n + 5));
  std::vector<Complex> Ym = Yp;
  for (size_t i = 1; i < Ym.size(); i += 2) Ym[i] = -Ym[i];
  const int o = static_cast<int>(Yp.size()) - 1;
  auto P = ComplexPoly2::from(cv.poly().poly, {});
  auto px = P.dX(), py = P.dY();
  auto pxp = px.on_series(X, Yp, o), pxm = px.on_series(X, Ym, o);
  auto pyp = py.on_series(X, Yp, o), pym = py.on_series(X, Ym, o);
  // y - y' = 2 zeta (1 + y_3 zeta^2 + ...) =: zeta D(zeta)
  std::vector<Complex> Dd(o, Complex(0L));
  for (int i = 1; i <= o; ++i) Dd[i - 1] = Yp[i] - Ym[i];
  // P_y(x, y) P_y(x, y') = zeta^2 G(zeta)
  std::vector<Complex> g1(pyp.begin() + 1, pyp.end()), g2(pym.begin() + 1, pym.end());
  const int m = o - 1;
  auto G = series_mul(g1, g2, m - 1);
  auto Ginv = series_inverse(G, m - 1);
  auto D2inv = series_inverse(series_mul(Dd, Dd, m - 1), m - 1);
  // first term: zeta^{-4} P_x P_x' / (D^2 G); Q + S term: zeta^{-2} (Q + S) / G
  auto first = series_mul(series_mul(series_mul(pxp, pxm, m - 1), D2inv, m - 1), Ginv, m - 1);
  MPoly qs = cv.kernel().Q + cv.kernel().S;
  std::vector<Complex> qsv(m, Complex(0L));
  for (auto& [e, c] : qs.terms()) {
    std::vector<Complex> term(m, Complex(0L));
    term[0] = Complex(c);
    auto pw = [&](const std::vector<Complex>& s, int k) { return series_pow(s, k, m - 1); };
    int ex = e.size() > kX ? e[kX] : 0, ey = e.size() > kY ? e[kY] : 0;
    int ex2 = e.size() > kX2 ? e[kX2] : 0, ey2 = e.size() > kY2 ? e[kY2] : 0;
    term = series_mul(term, pw(X, ex + ex2), m - 1);
    term = series_mul(term, pw(Yp, ey), m - 1);
    term = series_mul(term, pw(Ym, ey2), m - 1);
    for (int i = 0; i < m; ++i) qsv[i] += term[i];
  }
  auto second = series_mul(qsv, Ginv, m - 1);
  // F = zeta^{-4} first + zeta^{-2} second; b = 4 c^2 zeta^2 F, from zeta^{-2}
  Complex c2 = Complex(4L) * pa.c * pa.c;
  t.b.assign(m, Complex(0L));
  for (int i = 0; i < m; ++i) {
    t.b[i] += c2 * first[i];
    if (i >= 2) t.b[i] += c2 * second[i - 2];
  }
  return t;
}

struct AbcdTables {
  std::shared_ptr<const Curve> curve;
  std::vector<LocalTables> loc;
  unsigned bits;

  Scalar s(const Complex& z) const { return Scalar::complex(z, bits); }
  int points() const { return static_cast<int>(loc.size()); }
  void check_out(const Index& o) const {
    if (o.point < 0 || o.point >= points()) throw EngineError("unknown branch point in index");
    if (o.degree < 0 || o.degree >= curve->kmax())
      throw EngineError("basis degree " + std::to_string(o.degree) + " needs kmax > " + std::to_string(o.degree));
  }
  // coefficient of zeta^n in d xi_alpha around a
  Complex d(int a, const Index& alpha, int n) const { return curve->local(a, alpha.point, alpha.degree).at(n); }
  int low(int a, const Index& alpha) const { return alpha.point == a ? -2 * alpha.degree - 2 : 0; }
  // largest e_k reached by C at a; the tables stop at kmax
  int c_top(int a, const IndexList& out) const {
    int top = -(low(a, out[0]) + low(a, out[1])) / 2;
    if (top > curve->kmax()) throw EngineError("C entry needs basis degree " + std::to_string(top) + " > kmax");
    return top;
  }
};

}  // namespace

Operators newton_abcd(std::shared_ptr<const Curve> curve) {
  PrecisionScope scope(curve->options().bits);
  auto tab = std::make_shared<AbcdTables>();
  tab->curve = curve;
  tab->bits = curve->options().bits;
  for (int a = 0; a < static_cast<int>(curve->points().size()); ++a) tab->loc.push_back(tables_for(*curve, a));
  const int K = curve->kmax();
  Operators ops;

  ops.A.n = 3;
  ops.A.labels_in = {"a1", "a2", "a3"};
  ops.A.candidates = [tab](const IndexList&) {
    std::vector<IndexList> c;
    for (int a = 0; a < tab->points(); ++a) c.push_back({Index{a, 0}, Index{a, 0}, Index{a, 0}});
    return c;
  };
  ops.A.value = [tab](const IndexList& in, const IndexList&) {
    PrecisionScope scope(tab->bits);
    int a = in[0].point;
    for (auto& i : in)
      if (i.point != a || i.degree != 0) return Scalar(0);
    const auto& t = tab->loc[a];
    return tab->s(Complex(-2L) * t.Einv[0] * pow(t.N[0][0], 3));
  };

  ops.D.n = 1;
  ops.D.h = 1;
  ops.D.labels_in = {"a1"};
  ops.D.candidates = [tab](const IndexList&) {
    std::vector<IndexList> c;
    for (int a = 0; a < tab->points(); ++a)
      for (int d : {0, 1}) c.push_back({Index{a, d}});
    return c;
  };
  ops.D.value = [tab](const IndexList& in, const IndexList&) {
    PrecisionScope scope(tab->bits);
    int a = in[0].point, i1 = in[0].degree;
    const auto& t = tab->loc[a];
    Complex v(0L);
    for (int k = i1; k <= 1; ++k)
      for (int l = 0; k + l <= 1; ++l) v += t.N[k][i1] * t.Einv[l] * t.b[2 - 2 * k - 2 * l];
    return tab->s(v);
  };

  ops.B.n = 2;
  ops.B.m = 1;
  ops.B.labels_in = {"a1", "a2"};
  ops.B.labels_out = {"b"};
  ops.B.candidates = [tab](const IndexList& out) {
    tab->check_out(out[0]);
    std::vector<IndexList> c;
    for (int a = 0; a < tab->points(); ++a) {
      int top = -tab->low(a, out[0]) / 2;
      for (int i1 = 0; i1 <= top; ++i1)
        for (int i2 = 0; i1 + i2 <= top; ++i2) c.push_back({Index{a, i1}, Index{a, i2}});
    }
    return c;
  };
  ops.B.value = [tab, K](const IndexList& in, const IndexList& out) {
    PrecisionScope scope(tab->bits);
    int a = in[0].point;
    if (in[1].point != a) return Scalar(0);
    tab->check_out(out[0]);
    const auto& t = tab->loc[a];
    int i1 = in[0].degree, i2 = in[1].degree;
    int top = -tab->low(a, out[0]) / 2;
    Complex v(0L);
    for (int k = i1; k <= K; ++k)
      for (int m = i2; m <= K && k + m <= top; ++m)
        for (int l = 0; k + m + l <= top; ++l)
          v += t.N[k][i1] * Complex(long(2 * m + 1)) * t.N[m][i2] * t.Einv[l] *
               tab->d(a, out[0], -2 * (k + m + l));
    return tab->s(-v);
  };

  ops.C.n = 1;
  ops.C.m = 2;
  ops.C.labels_in = {"a1"};
  ops.C.labels_out = {"b1", "b2"};
  ops.C.candidates = [tab](const IndexList& out) {
    tab->check_out(out[0]);
    tab->check_out(out[1]);
    std::vector<IndexList> c;
    for (int a = 0; a < tab->points(); ++a) {
      int top = tab->c_top(a, out);
      for (int i = 0; i <= top; ++i) c.push_back({Index{a, i}});
    }
    return c;
  };
  ops.C.value = [tab](const IndexList& in, const IndexList& out) {
    PrecisionScope scope(tab->bits);
    int a = in[0].point, i1 = in[0].degree;
    tab->check_out(out[0]);
    tab->check_out(out[1]);
    const auto& t = tab->loc[a];
    int l0 = tab->low(a, out[0]), l1 = tab->low(a, out[1]);
    int top = tab->c_top(a, out);
    Complex v(0L);
    for (int k = i1; k <= top; ++k)
      for (int l = 0; k + l <= top; ++l) {
        int total = -2 * (k + l);
        for (int m = l0; m <= total - l1; m += 2) v += t.N[k][i1] * t.Einv[l] * tab->d(a, out[0], m) * tab->d(a, out[1], total - m);
      }
    return tab->s(-v);
  };
  return ops;
}

AiryStructure make_structure(std::shared_ptr<const Curve> curve) {
  AiryStructure q;
  q.family = "newton";
  q.params["poly"] = curve->poly().str();
  q.params["kmax"] = std::to_string(curve->kmax());
  q.params["bits"] = std::to_string(curve->options().bits);
  if (!curve->options().s.empty()) q.params["S"] = curve->kernel().S.str({"x", "y", "t", "x'", "y'"});
  if (curve->options().printed_correction) q.params["correction"] = "printed";
  q.points.names.clear();
  for (size_t a = 0; a < curve->points().size(); ++a) q.points.names.push_back("a" + std::to_string(a));
  q.rmax = 2;
  q.kind = Kind::complex;
  auto ops = newton_abcd(curve);
  q.operators[{3, 0, 0}] = ops.A;
  q.operators[{2, 1, 0}] = ops.B;
  q.operators[{1, 2, 0}] = ops.C;
  q.operators[{1, 0, 1}] = ops.D;
  q.basis_eval = [](const Index&, const Scalar&) -> Scalar {
    throw EngineError("newton curves have no global coordinate; use newton::omega_at");
  };
  q.pairing = [](const Index&) -> Scalar { throw EngineError("pairing is not available for newton curves"); };
  return q;
}

Complex omega_at(const AiryStructure& q, const Curve& curve, int g,
                 const std::vector<std::pair<Complex, Complex>>& pts) {
  const unsigned bits = curve.options().bits;
  PrecisionScope scope(bits);
  auto F = q.F(g, static_cast<int>(pts.size()));
  Complex s(0L);
  for (auto& [key, v] : F.entries()) {
    Complex t = v.to_complex(bits);
    for (size_t i = 0; i < key.size(); ++i) t *= curve.dxi_dx(key[i].point, key[i].degree, pts[i].first, pts[i].second);
    s += t;
  }
  return s;
}

}  // namespace toprec::newton
