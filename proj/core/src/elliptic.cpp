#include "toprec/elliptic.hpp"

#include "toprec/numeric.hpp"
#include "toprec/series.hpp"

#include <mutex>
#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

namespace toprec::elliptic {

namespace {

using PSeries = std::vector<MPoly>;  // power series in s = z^2

PSeries pmul(const PSeries& a, const PSeries& b, int order) {
  PSeries c(order + 1);
  for (int i = 0; i < static_cast<int>(a.size()) && i <= order; ++i) {
    if (a[i].is_zero()) continue;
    for (int j = 0; j < static_cast<int>(b.size()) && i + j <= order; ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

// 1 + sum_{l=2}^{lmax} (2l-1) G_{2l} s^l - 1, i.e. the part u with S = 1 + u.
PSeries s_minus_one(int lmax, int order) {
  PSeries u(order + 1);
  for (int l = 2; l <= lmax && l <= order; ++l) u[l] = MPoly(2 * l - 1) * g_var(l);
  return u;
}

Complex cplx(long v, unsigned bits) { return Complex(make_real(v, bits), make_real(0, bits)); }
Complex cplx(const Rational& q, unsigned bits) { return Complex(make_real(q, bits), make_real(0, bits)); }

Complex two_pi_i(unsigned bits) { return Complex(make_real(0, bits), 2 * real_pi(bits)); }

unsigned work_bits(unsigned bits) { return bits + 32; }

Real eps(unsigned bits) { return boost::multiprecision::ldexp(make_real(1, bits + 32), -static_cast<int>(bits) - 16); }

}  // namespace

// ---- Q polynomials ---------------------------------------------------------

MPoly g_var(int l) {
  if (l < 2) throw EngineError("formal Eisenstein generators start at G4");
  return MPoly::var(l - 1);
}

const MPoly& q_poly(int k) {
  static std::mutex mu;
  static std::vector<MPoly> table{MPoly::var(kVarX)};
  if (k < 0) throw EngineError("q_poly needs k >= 0");
  std::lock_guard<std::mutex> lock(mu);
  table.reserve(std::max<size_t>(table.size(), k + 1));
  MPoly x = MPoly::var(kVarX), g4 = g_var(2), g6 = g_var(3);
  MPoly p1 = MPoly(6) * (x * x - MPoly(5) * g4);
  MPoly p2 = MPoly(4) * (x.pow(3) - MPoly(15) * g4 * x - MPoly(35) * g6);
  while (static_cast<int>(table.size()) <= k) {
    int j = static_cast<int>(table.size()) - 1;
    const MPoly& q = table.back();
    MPoly next = p1 * q.derivative(kVarX) + p2 * q.derivative(kVarX).derivative(kVarX);
    next *= MPoly(Rational(1, (2 * j + 3) * (2 * j + 2)));
    table.push_back(std::move(next));
  }
  return table[k];
}

MPoly q_poly_alpha(int k, int j, bool printed_limits) {
  if (k < 1 || j < 0 || j > k + 1) throw EngineError("alpha_{k,j} needs k >= 1 and 0 <= j <= k+1");
  if (j == 0) {
    int order = k + 1;
    PSeries u = s_minus_one(printed_limits ? k : k + 1, order);
    // ln(1+u) = sum_i (-1)^{i+1} u^i / i
    PSeries acc(order + 1), ui(order + 1);
    ui[0] = MPoly(1);
    for (int i = 1; i <= order; ++i) {
      ui = pmul(ui, u, order);
      acc[order] += MPoly(Rational(i % 2 ? 1 : -1, i)) * ui[order];
    }
    return g_var(k + 1) - MPoly(k + 1) * acc[order];
  }
  int order = k + 1 - j;
  PSeries u = s_minus_one(printed_limits ? k - j : k + 1 - j, order);
  // (1+u)^{-j} = sum_i binom(-j, i) u^i
  PSeries ui(order + 1);
  ui[0] = MPoly(1);
  MPoly coef = order == 0 ? MPoly(1) : MPoly();
  for (int i = 1; i <= order; ++i) {
    ui = pmul(ui, u, order);
    coef += MPoly(binomial(Rational(-j), i)) * ui[order];
  }
  return MPoly(Rational(k + 1, j)) * coef;
}

MPoly q_poly_explicit(int k, bool printed_limits) {
  if (k < 0) throw EngineError("q_poly_explicit needs k >= 0");
  if (k == 0) return MPoly::var(kVarX);
  MPoly out;
  for (int j = 0; j <= k + 1; ++j) out += q_poly_alpha(k, j, printed_limits) * MPoly::var(kVarX, j);
  return out;
}

MPoly eisenstein_classical(int n) {
  if (n < 2) throw EngineError("eisenstein_classical needs n >= 2");
  std::vector<MPoly> c(std::max(n + 1, 4));
  c[2] = MPoly(3) * g_var(2);
  c[3] = MPoly(5) * g_var(3);
  for (int m = 4; m <= n; ++m) {
    MPoly s;
    for (int i = 2; i <= m - 2; ++i) s += c[i] * c[m - i];
    c[m] = MPoly(Rational(3, (2 * m + 1) * (m - 3))) * s;
  }
  return MPoly(Rational(1, 2 * n - 1)) * c[n];
}

MPoly reduce_eisenstein(const MPoly& p, const std::map<int, MPoly>& rel) {
  MPoly out = p;
  for (auto it = rel.rbegin(); it != rel.rend(); ++it)
    if (out.degree(it->first - 1) > 0) out = out.substitute(it->first - 1, it->second);
  return out;
}

std::map<int, MPoly> induced_relations(int kmax) {
  std::map<int, MPoly> rel;
  for (int k = 1; k <= kmax; ++k) {
    MPoly diff = reduce_eisenstein(q_poly_explicit(k), rel) - q_poly(k);
    if (k <= 2) {
      if (!diff.is_zero()) throw EngineError("explicit and recursive Q_" + std::to_string(k) + " differ");
      continue;
    }
    int v = k;  // variable of G_{2k+2}
    MPoly a = diff.coeff(v, 1), b = diff.coeff(v, 0);
    if (diff.degree(v) != 1 || !a.is_constant() || a.is_zero())
      throw EngineError("Q_" + std::to_string(k) + " is not linear in G_" + std::to_string(2 * k + 2));
    if (b.degree(kVarX) > 0) throw EngineError("explicit and recursive Q_" + std::to_string(k) + " differ beyond the constant term");
    rel[k + 1] = MPoly(Rational(-1) / a.constant()) * b;
  }
  return rel;
}

// ---- numeric lattice ----------------------------------------------------------

Complex eisenstein(int two_k, const Complex& tau, unsigned bits) {
  if (two_k < 4 || two_k % 2) throw EngineError("eisenstein needs an even weight >= 4");
  if (tau.im <= 0) throw EngineError("eisenstein needs Im tau > 0");
  const unsigned wb = work_bits(bits);
  PrecisionScope scope(wb);
  int k = two_k / 2;
  Complex tpi = two_pi_i(wb);
  Complex q = exp(tpi * tau);
  Real tol = eps(bits);
  Complex sum = cplx(0, wb), qm = cplx(1, wb);
  for (long m = 1;; ++m) {
    qm *= q;
    Complex term = Complex(boost::multiprecision::pow(make_real(m, wb), two_k - 1)) * qm / (cplx(1, wb) - qm);
    sum += term;
    if (abs(term) < tol * (1 + abs(sum)) && m > 2) break;
    if (m > 100000) throw EngineError("eisenstein series did not converge; Im tau too small");
  }
  Complex z2k = zeta_even(k).to_complex(wb);
  Complex pref = cplx(2, wb) * pow(tpi, two_k) / cplx(Rational(factorial(two_k - 1)), wb);
  return cplx(2, wb) * z2k + pref * sum;
}

Complex Lattice::Geis(int n) const {
  if (n < 2) throw EngineError("Geis needs n >= 2");
  if (n < static_cast<int>(G.size())) return G[n];
  // extend on demand (not cached: const access)
  PrecisionScope scope(work_bits(bits));
  std::vector<Complex> c(n + 1, cplx(0, work_bits(bits)));
  for (int m = 2; m <= n; ++m) {
    if (m < static_cast<int>(G.size())) {
      c[m] = cplx(2 * m - 1, work_bits(bits)) * G[m];
      continue;
    }
    Complex s = cplx(0, work_bits(bits));
    for (int i = 2; i <= m - 2; ++i) s += c[i] * c[m - i];
    c[m] = cplx(Rational(3, (2 * m + 1) * (m - 3)), work_bits(bits)) * s;
  }
  return c[n] / cplx(2 * n - 1, work_bits(bits));
}

namespace {

void fill_G(Lattice& L, int nmax) {
  const unsigned wb = work_bits(L.bits);
  L.G.assign(nmax + 1, cplx(0, wb));
  L.G[2] = L.G4;
  L.G[3] = L.G6;
  std::vector<Complex> c(nmax + 1, cplx(0, wb));
  c[2] = cplx(3, wb) * L.G4;
  c[3] = cplx(5, wb) * L.G6;
  for (int m = 4; m <= nmax; ++m) {
    Complex s = cplx(0, wb);
    for (int i = 2; i <= m - 2; ++i) s += c[i] * c[m - i];
    c[m] = cplx(Rational(3, (2 * m + 1) * (m - 3)), wb) * s;
    L.G[m] = c[m] / cplx(2 * m - 1, wb);
  }
}

std::vector<Complex> cubic_roots(const Lattice& L) {
  const unsigned wb = work_bits(L.bits);
  std::vector<Complex> c{cplx(-35, wb) * L.G6, cplx(-15, wb) * L.G4, cplx(0, wb), cplx(1, wb)};
  auto r = poly_roots(c, wb);
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = i + 1; j < r.size(); ++j)
      if (abs(r[i] - r[j]) < boost::multiprecision::ldexp(make_real(1, wb), -static_cast<int>(L.bits) / 2))
        throw EngineError("degenerate lattice: repeated root of x^3 - 15 G4 x - 35 G6");
  return r;
}

// z - (n + m tau) with |Im| <= Im tau / 2 and |Re| <= 1/2 (roughly).
Complex reduce(const Lattice& L, Complex z) {
  Real m = boost::multiprecision::round(z.im / L.tau.im);
  z -= Complex(m) * L.tau;
  Real n = boost::multiprecision::round(z.re);
  z.re -= n;
  return z;
}

// Sum over n >= 1 of f(q^n u) and g(q^n / u), together with the n = 0 term f(u).
template <class F, class G>
Complex lambert(const Lattice& L, const Complex& u, F f, G g) {
  const unsigned wb = work_bits(L.bits);
  Real tol = eps(L.bits);
  Complex ui = cplx(1, wb) / u;
  Complex acc = f(u), qn = cplx(1, wb);
  Real au = abs(u), aui = abs(ui);
  Real big = au > aui ? au : aui;
  for (int n = 1; n < 100000; ++n) {
    qn *= L.q;
    acc += f(qn * u) + g(qn * ui);
    if (abs(qn) * big < tol) return acc;
  }
  throw EngineError("q-series did not converge; point too far from the fundamental domain");
}

}  // namespace

Complex half_period(const Lattice& L, int code) {
  const unsigned wb = work_bits(L.bits);
  Complex h = cplx(0, wb);
  if (code & 1) h += cplx(Rational(1, 2), wb);
  if (code & 2) h += L.tau * cplx(Rational(1, 2), wb);
  return h;
}

Lattice lattice_from_tau(const Complex& tau, unsigned bits) {
  if (tau.im <= 0) throw EngineError("tau must have positive imaginary part");
  Lattice L;
  L.has_tau = true;
  L.bits = bits;
  const unsigned wb = work_bits(bits);
  PrecisionScope scope(wb);
  L.tau = Complex(make_real(0, wb) + tau.re, make_real(0, wb) + tau.im);
  Complex tpi = two_pi_i(wb);
  L.q = exp(tpi * L.tau);
  Complex s = cplx(0, wb), qn = cplx(1, wb);
  Real tol = eps(bits);
  for (int n = 1; n < 100000; ++n) {
    qn *= L.q;
    Complex d = cplx(1, wb) - qn;
    Complex t = qn / (d * d);
    s += t;
    if (abs(t) < tol) break;
  }
  L.wp_const = tpi * tpi * (cplx(Rational(1, 12), wb) - cplx(2, wb) * s);
  L.G4 = eisenstein(4, L.tau, bits);
  L.G6 = eisenstein(6, L.tau, bits);
  fill_G(L, 48);
  auto roots = cubic_roots(L);
  std::vector<bool> used(3, false);
  for (int code = 1; code <= 3; ++code) {
    Complex v = wp(L, half_period(L, code));
    int best = -1;
    for (int i = 0; i < 3; ++i)
      if (!used[i] && (best < 0 || abs(roots[i] - v) < abs(roots[best] - v))) best = i;
    used[best] = true;
    L.e[code] = roots[best];
  }
  L.e[0] = cplx(0, wb);
  return L;
}

Lattice lattice_from_invariants(const Complex& G4, const Complex& G6, unsigned bits) {
  Lattice L;
  L.bits = bits;
  const unsigned wb = work_bits(bits);
  PrecisionScope scope(wb);
  L.G4 = G4;
  L.G6 = G6;
  fill_G(L, 48);
  auto roots = cubic_roots(L);
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    return a.re != b.re ? a.re < b.re : a.im < b.im;
  });
  L.e[0] = cplx(0, wb);
  for (int code = 1; code <= 3; ++code) L.e[code] = roots[code - 1];
  return L;
}

Complex wp(const Lattice& L, const Complex& z) {
  if (!L.has_tau) throw EngineError("wp evaluation needs tau");
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  Complex tpi = two_pi_i(wb);
  Complex u = exp(tpi * reduce(L, z));
  Complex one = cplx(1, wb);
  if (abs(one - u) < eps(L.bits)) throw PoleError("wp has a pole on the lattice");
  auto f = [&](const Complex& w) {
    Complex d = one - w;
    return w / (d * d);
  };
  return L.wp_const + tpi * tpi * lambert(L, u, f, f);
}

Complex wp_prime(const Lattice& L, const Complex& z) {
  if (!L.has_tau) throw EngineError("wp evaluation needs tau");
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  Complex tpi = two_pi_i(wb);
  Complex u = exp(tpi * reduce(L, z));
  Complex one = cplx(1, wb);
  if (abs(one - u) < eps(L.bits)) throw PoleError("wp' has a pole on the lattice");
  auto f = [&](const Complex& w) {
    Complex d = one - w;
    return w * (one + w) / (d * d * d);
  };
  auto g = [&](const Complex& w) { return -f(w); };
  return tpi * tpi * tpi * lambert(L, u, f, g);
}

Complex wp_second(const Lattice& L, const Complex& z) {
  if (!L.has_tau) throw EngineError("wp evaluation needs tau");
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  Complex tpi = two_pi_i(wb);
  Complex u = exp(tpi * reduce(L, z));
  Complex one = cplx(1, wb);
  if (abs(one - u) < eps(L.bits)) throw PoleError("wp'' has a pole on the lattice");
  auto h = [&](const Complex& w) {
    Complex d = one - w;
    Complex d2 = d * d;
    return w * (one + cplx(4, wb) * w + w * w) / (d2 * d2);
  };
  Complex t2 = tpi * tpi;
  return t2 * t2 * lambert(L, u, h, h);
}

Complex zeta(const Lattice& L, const Complex& z) {
  if (!L.has_tau) throw EngineError("zeta evaluation needs tau");
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  if (abs(z.im) >= L.tau.im) throw EngineError("zeta needs |Im z| < Im tau");
  Complex tpi = two_pi_i(wb);
  Complex u = exp(tpi * z);
  Complex one = cplx(1, wb);
  if (abs(one - u) < eps(L.bits)) throw PoleError("zeta has a pole on the lattice");
  auto f = [&](const Complex& w) { return one / (one - w); };
  auto g = [&](const Complex& w) { return -(one / (one - w)); };
  Complex s = lambert(L, u, f, g) - cplx(Rational(1, 2), wb);
  return -(L.wp_const * z) - tpi * s;
}

Complex q_eval(int k, const Complex& x, const Lattice& L) {
  PrecisionScope scope(work_bits(L.bits));
  return q_poly(k).evaluate({x, L.G4, L.G6});
}

Complex wp_hat_half(const Lattice& L, const Complex& G2, int d, int code) {
  if (code <= 0 || code > 3) throw EngineError("wp_hat_half needs a nonzero half period");
  PrecisionScope scope(work_bits(L.bits));
  Complex v = cplx(Rational(factorial(2 * d + 1)), work_bits(L.bits)) * q_eval(d, L.e[code], L);
  if (d == 0) v += G2;
  return v;
}

// ---- Y series ------------------------------------------------------------------

std::vector<Complex> weierstrass_Y(const Lattice& L, int code, int kmax) {
  if (code <= 0 || code > 3) throw EngineError("Weierstrass ramification points are the three half periods");
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  std::vector<Complex> c(kmax + 1);
  for (int k = 0; k <= kmax; ++k) c[k] = cplx((2 * k + 3) * (2 * k + 2), wb) * q_eval(k + 1, L.e[code], L);
  if (abs(c[0]) < eps(L.bits)) throw EngineError("degenerate ramification point");
  auto inv = series_inverse(c, kmax);
  auto y = series_mul(inv, inv, kmax);
  for (auto& v : y) v = v / cplx(2, wb);
  return y;
}

std::vector<Complex> weierstrass_Y_composition(const Lattice& L, int code, int kmax, bool printed) {
  if (code <= 0 || code > 3) throw EngineError("Weierstrass ramification points are the three half periods");
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  std::vector<Complex> b(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    b[k] = q_eval(k + 1, L.e[code], L);
    if (!printed) b[k] *= cplx((2 * k + 3) * (2 * k + 2), wb);
  }
  Complex q1 = q_eval(1, L.e[code], L);
  std::vector<Complex> y(kmax + 1, cplx(0, wb));
  y[0] = cplx(1, wb) / (cplx(72, wb) * q1 * q1);
  std::vector<Complex> tail(kmax + 1, cplx(0, wb));
  for (int k = 1; k <= kmax; ++k) tail[k] = b[k];
  std::vector<Complex> power(kmax + 1, cplx(0, wb));
  power[0] = cplx(1, wb);
  Complex binv = cplx(1, wb) / b[0];
  Complex scale = binv * binv;  // b0^{-l-2}, starting at l = 0
  for (int l = 1; l <= kmax; ++l) {
    power = series_mul(power, tail, kmax);
    scale *= binv;
    Complex coef = cplx(Rational((l % 2 ? -1 : 1) * (l + 1), 2), wb) * scale;
    for (int k = l; k <= kmax; ++k) y[k] += coef * power[k];
  }
  return y;
}

Legendre legendre_modulus(const Lattice& L) {
  if (!L.has_tau) throw EngineError("Legendre data needs tau");
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  Legendre d;
  d.e1 = L.e[1];
  d.e2 = L.e[3];
  d.e3 = L.e[2];
  d.k2 = (d.e2 - d.e3) / (d.e1 - d.e3);
  Real tol = boost::multiprecision::ldexp(make_real(1, wb), -static_cast<int>(L.bits) / 2);
  if (abs(d.k2) < tol || abs(d.k2 - cplx(1, wb)) < tol) throw EngineError("Legendre modulus k^2 must differ from 0 and 1");
  Complex kp = sqrt(cplx(1, wb) - d.k2);
  d.K = Complex(real_pi(wb)) / (cplx(2, wb) * agm(cplx(1, wb), kp, wb));
  return d;
}

namespace {

struct LegendreSeries {
  Complex ea, eo, e3, c;
  std::vector<Complex> P;  // P[j] = (2j+1) m^{2j} Q_j(e_a)
};

LegendreSeries legendre_series(const Lattice& L, int code, int m, int order) {
  if (code != 1 && code != 3) throw EngineError("Legendre ramification points are 1/2 (code 1) and (1+tau)/2 (code 3)");
  if (m < 1) throw EngineError("Legendre scale must be positive");
  const unsigned wb = work_bits(L.bits);
  auto leg = legendre_modulus(L);
  LegendreSeries s;
  s.ea = code == 1 ? leg.e1 : leg.e2;
  s.eo = code == 1 ? leg.e2 : leg.e1;
  s.e3 = leg.e3;
  s.c = cplx(2 * m, wb) * leg.K;
  s.P.resize(order + 1);
  Complex m2 = cplx(m * m, wb), mp = cplx(1, wb);
  for (int j = 0; j <= order; ++j) {
    s.P[j] = cplx(2 * j + 1, wb) * mp * q_eval(j, s.ea, L);
    mp *= m2;
  }
  return s;
}

}  // namespace

std::vector<Complex> legendre_Y(const Lattice& L, int code, int m, int kmax) {
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  auto ls = legendre_series(L, code, m, kmax + 1);
  std::vector<Complex> num(kmax + 1), R(kmax + 1), Po(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    num[k] = ls.P[k];
    R[k] = ls.P[k + 1];
    Po[k] = ls.P[k];
  }
  num[0] -= ls.e3;
  Po[0] -= ls.eo;
  num = series_mul(num, num, kmax);
  auto den = series_mul(R, Po, kmax);
  auto y = series_mul(num, series_inverse(den, kmax), kmax);
  Complex pre = cplx(1, wb) / (cplx(2, wb) * ls.c);
  for (auto& v : y) v *= pre;
  return y;
}

std::vector<Complex> legendre_Y_composition(const Lattice& L, int code, int m, int kmax, bool printed) {
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  auto ls = legendre_series(L, code, m, kmax + 1);
  std::vector<Complex> U(kmax + 1), Ut(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    if (printed) {
      U[k] = k == 0 ? cplx(6, wb) * q_eval(1, ls.ea, L) : q_eval(k + 1, ls.ea, L);
      Ut[k] = k == 0 ? ls.ea - ls.eo : q_eval(k, ls.ea, L);
    } else {
      U[k] = ls.P[k + 1];
      Ut[k] = k == 0 ? ls.ea - ls.eo : ls.P[k];
    }
  }
  U = series_inverse(U, kmax);
  Ut = series_inverse(Ut, kmax);
  std::vector<Complex> left(kmax + 1), right(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    left[k] = (ls.ea - ls.e3) * U[k];
    right[k] = (ls.eo - ls.e3) * Ut[k];
  }
  if (kmax >= 1) left[1] += cplx(1, wb);
  right[0] += cplx(1, wb);
  auto y = series_mul(left, right, kmax);
  if (!printed) {
    Complex pre = cplx(1, wb) / (cplx(2, wb) * ls.c);
    for (auto& v : y) v *= pre;
  }
  return y;
}

std::vector<Complex> painleve6_Y_compose(const std::vector<Complex>& Yw, const Complex& wp_a,
                                         const std::array<Complex, 4>& wpz, const Complex& beta,
                                         const Complex& C, const Lattice& L, int kmax) {
  if (static_cast<int>(Yw.size()) <= kmax) throw EngineError("painleve6_Y_compose needs Yw up to kmax");
  const unsigned wb = work_bits(L.bits);
  PrecisionScope scope(wb);
  std::vector<Complex> q(kmax + 1);
  for (int k = 0; k <= kmax; ++k) q[k] = q_eval(k, wp_a, L);
  std::vector<Complex> acc(Yw.begin(), Yw.begin() + kmax + 1);
  for (int i = 0; i < 4; ++i) {
    auto t = q;
    t[0] -= wpz[i];
    acc = series_mul(acc, t, kmax);
  }
  Complex f = beta / C;
  for (auto& v : acc) v *= f;
  return acc;
}

// ---- curves ------------------------------------------------------------------------

Complex Curve::point(int p) const {
  PrecisionScope scope(work_bits(torus.bits));
  return shift + half_period(torus, codes.at(p));
}

Curve weierstrass_curve(const Complex& tau, const Complex& G2, unsigned bits) {
  Curve c;
  c.family = "weierstrass";
  c.torus = lattice_from_tau(tau, bits);
  PrecisionScope scope(work_bits(bits));
  c.G2 = G2;
  c.shift = cplx(0, work_bits(bits));
  c.codes = {1, 2, 3};
  c.names = {"1/2", "tau/2", "(1+tau)/2"};
  c.params = {{"tau", complex_str(tau)}, {"G2", complex_str(G2)}, {"precision", std::to_string(bits)}};
  Lattice L = c.torus;
  c.Y = [L](int p, int kmax) { return weierstrass_Y(L, p + 1, kmax); };
  return c;
}

Curve legendre_curve(const Complex& tau, const Complex& G2, unsigned bits) {
  Curve c;
  c.family = "legendre";
  Lattice leg = lattice_from_tau(tau, bits);
  legendre_modulus(leg);
  PrecisionScope scope(work_bits(bits));
  c.torus = lattice_from_tau(tau * cplx(Rational(1, 2), work_bits(bits)), bits);
  c.G2 = G2;
  c.shift = cplx(Rational(1, 4), work_bits(bits));
  c.codes = {0, 1, 2, 3};
  c.names = {"1/4", "-1/4", "1/4+tau/4", "-1/4+tau/4"};
  c.params = {{"tau", complex_str(tau)}, {"G2", complex_str(G2)}, {"precision", std::to_string(bits)}};
  c.Y = [leg](int p, int kmax) { return legendre_Y(leg, p < 2 ? 1 : 3, 2, kmax); };
  return c;
}

namespace {

struct Tables {
  Curve curve;
  unsigned bits;
  std::mutex mu;
  std::vector<std::vector<Complex>> Y;
  std::map<std::pair<int, int>, Complex> hat;

  explicit Tables(Curve c) : curve(std::move(c)), bits(curve.torus.bits) {
    for (size_t p = 0; p < curve.codes.size(); ++p) Y.push_back(curve.Y(static_cast<int>(p), 6));
  }
  Complex y(int p, int k) {
    if (k < 0) return cplx(0, bits);
    std::lock_guard<std::mutex> lock(mu);
    auto& t = Y[p];
    if (k >= static_cast<int>(t.size())) t = curve.Y(p, std::max(k, 2 * static_cast<int>(t.size())));
    return t[k];
  }
  // wp_hat^{(2d)} at the difference of points p and r (distinct).
  Complex h(int d, int p, int r) {
    int code = curve.codes[p] ^ curve.codes[r];
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(d, code);
    auto it = hat.find(key);
    if (it == hat.end()) it = hat.emplace(key, wp_hat_half(curve.torus, curve.G2, d, code)).first;
    return it->second;
  }
  // G_{2n}; n = 1 is the chosen G2.
  Complex G(int n) { return n == 1 ? curve.G2 : curve.torus.Geis(n); }
  Scalar out(const Complex& z) const { return Scalar::complex(z, bits); }
};

Complex fact(long n, unsigned bits) { return cplx(Rational(factorial(n)), bits); }

}  // namespace

Operators abcd(const Curve& curve, bool cross_b_half) {
  auto tab = std::make_shared<Tables>(curve);
  const int np = static_cast<int>(curve.codes.size());
  const unsigned wb = work_bits(curve.torus.bits);
  Operators ops;

  ops.A.n = 3;
  ops.A.labels_in = {"a1", "a2", "a3"};
  ops.A.candidates = [np](const IndexList&) {
    std::vector<IndexList> c;
    for (int p = 0; p < np; ++p) c.push_back({Index{p, 0}, Index{p, 0}, Index{p, 0}});
    return c;
  };
  ops.A.value = [tab, wb](const IndexList& in, const IndexList&) {
    for (auto& i : in)
      if (i.point != in[0].point || i.degree != 0) return Scalar(0);
    PrecisionScope scope(wb);
    return tab->out(cplx(-2, wb) * tab->y(in[0].point, 0));
  };

  ops.D.n = 1;
  ops.D.h = 1;
  ops.D.labels_in = {"a1"};
  ops.D.candidates = [np](const IndexList&) {
    std::vector<IndexList> c;
    for (int p = 0; p < np; ++p)
      for (int d : {0, 1}) c.push_back({Index{p, d}});
    return c;
  };
  ops.D.value = [tab, wb](const IndexList& in, const IndexList&) {
    PrecisionScope scope(wb);
    int p = in[0].point;
    if (in[0].degree == 1) return tab->out(-tab->y(p, 0) / cplx(24, wb));
    if (in[0].degree == 0) return tab->out(-(tab->y(p, 1) / cplx(4, wb) + tab->G(1) * tab->y(p, 0)));
    return Scalar(0);
  };

  ops.B.n = 2;
  ops.B.m = 1;
  ops.B.labels_in = {"a1", "a2"};
  ops.B.labels_out = {"b"};
  ops.B.candidates = [np](const IndexList& out) {
    std::vector<IndexList> c;
    int a3 = out[0].point, d3 = out[0].degree;
    for (int p = 0; p < np; ++p) {
      if (p == a3) {
        for (int d1 = 0; d1 <= d3 + 1; ++d1)
          for (int d2 = 0; d1 + d2 <= d3 + 1; ++d2) c.push_back({Index{p, d1}, Index{p, d2}});
      } else {
        c.push_back({Index{p, 0}, Index{p, 0}});
      }
    }
    return c;
  };
  ops.B.value = [tab, wb, cross_b_half](const IndexList& in, const IndexList& out) {
    if (in[0].point != in[1].point) return Scalar(0);
    PrecisionScope scope(wb);
    int a = in[0].point, a3 = out[0].point;
    int d1 = in[0].degree, d2 = in[1].degree, d3 = out[0].degree;
    if (a == a3) {
      int k = 1 + d3 - d1 - d2;
      if (k < 0) return Scalar(0);
      Complex v = tab->y(a, k);
      if (d1 == 0 && d2 == 0) v += tab->G(d3 + 1) * tab->y(a, 0);
      Complex f = fact(2 * d3 + 1, wb) / (fact(2 * d1 + 1, wb) * fact(2 * d2, wb));
      return tab->out(-(f * v));
    }
    if (d1 || d2) return Scalar(0);
    Complex v = tab->y(a, 0) * tab->h(d3, a, a3);
    if (cross_b_half) v = v / cplx(2, wb);
    return tab->out(-v);
  };

  ops.C.n = 1;
  ops.C.m = 2;
  ops.C.labels_in = {"a1"};
  ops.C.labels_out = {"b1", "b2"};
  ops.C.candidates = [np](const IndexList& out) {
    std::vector<IndexList> c;
    for (int p = 0; p < np; ++p) {
      bool s2 = out[0].point == p, s3 = out[1].point == p;
      int top = s2 && s3 ? out[0].degree + out[1].degree + 2 : s2 ? out[0].degree + 1 : s3 ? out[1].degree + 1 : 0;
      for (int d1 = 0; d1 <= top; ++d1) c.push_back({Index{p, d1}});
    }
    return c;
  };
  // one out-leg at a1 (degree ds), the other at point r != a1 (degree dx)
  auto two_same = [tab, wb](int a1, int d1, int ds, int r, int dx) {
    Complex acc = cplx(0, wb);
    if (d1 == 0) acc += tab->G(ds + 1) * tab->y(a1, 0) * tab->h(dx, a1, r);
    for (int m = 0; m <= ds + 1 - d1; ++m)
      acc += tab->y(a1, ds + 1 - d1 - m) * tab->h(dx + m, a1, r) / fact(2 * m, wb);
    return -(fact(2 * ds + 1, wb) / fact(2 * d1 + 1, wb) * acc);
  };
  ops.C.value = [tab, wb, two_same](const IndexList& in, const IndexList& out) {
    PrecisionScope scope(wb);
    int a1 = in[0].point, d1 = in[0].degree;
    int a2 = out[0].point, d2 = out[0].degree, a3 = out[1].point, d3 = out[1].degree;
    bool s2 = a2 == a1, s3 = a3 == a1;
    if (!s2 && !s3) {
      if (d1 != 0) return Scalar(0);
      return tab->out(-(tab->y(a1, 0) * tab->h(d2, a1, a2) * tab->h(d3, a1, a3)));
    }
    if (s2 && !s3) return tab->out(two_same(a1, d1, d2, a3, d3));
    if (!s2 && s3) return tab->out(two_same(a1, d1, d3, a2, d2));
    Complex acc = tab->y(a1, d2 + d3 + 2 - d1);
    for (int j = 0; j <= d3 + 1 - d1; ++j)
      acc += tab->G(d2 + 1 + j) * cplx(Rational(binomial(2 * d2 + 2 * j + 1, 2 * j)), wb) * tab->y(a1, d3 + 1 - d1 - j);
    for (int j = 0; j <= d2 + 1 - d1; ++j)
      acc += tab->G(d3 + 1 + j) * cplx(Rational(binomial(2 * d3 + 2 * j + 1, 2 * j)), wb) * tab->y(a1, d2 + 1 - d1 - j);
    if (d1 == 0) acc += tab->y(a1, 0) * tab->G(d2 + 1) * tab->G(d3 + 1);
    Complex f = fact(2 * d2 + 1, wb) * fact(2 * d3 + 1, wb) / fact(2 * d1 + 1, wb);
    return tab->out(-(f * acc));
  };
  return ops;
}

Complex basis_value(const Curve& c, const Index& idx, const Complex& z) {
  const unsigned wb = work_bits(c.torus.bits);
  PrecisionScope scope(wb);
  Complex w = wp(c.torus, z - c.point(idx.point));
  if (idx.degree == 0) return w + c.G2;
  return fact(2 * idx.degree + 1, wb) * q_poly(idx.degree).evaluate({w, c.torus.G4, c.torus.G6});
}

Complex pairing(const Curve& c, const Index& idx) {
  const unsigned wb = work_bits(c.torus.bits);
  PrecisionScope scope(wb);
  int d = idx.degree;
  if (d == 0) return cplx(0, wb);
  // y x' = (1/2) t^2 / sum_k Y_k t^{2k}; only the pole -(2d)! t^{-2d-1} of xi pairs with it
  auto y = c.Y(idx.point, d - 1);
  auto inv = series_inverse(y, d - 1);
  return fact(2 * d, wb) * inv[d - 1] / cplx(2, wb);
}

AiryStructure make_structure(const Curve& c) {
  AiryStructure q;
  q.family = c.family;
  q.params = c.params;
  q.points.names = c.names;
  q.rmax = 2;
  q.kind = Kind::complex;
  auto ops = abcd(c);
  q.operators[{3, 0, 0}] = ops.A;
  q.operators[{2, 1, 0}] = ops.B;
  q.operators[{1, 2, 0}] = ops.C;
  q.operators[{1, 0, 1}] = ops.D;
  const unsigned bits = c.torus.bits;
  q.basis_eval = [c, bits](const Index& i, const Scalar& z) { return Scalar::complex(basis_value(c, i, z.to_complex(bits + 32)), bits); };
  q.pairing = [c, bits](const Index& i) { return Scalar::complex(pairing(c, i), bits); };
  return q;
}

// ---- text ---------------------------------------------------------------------------

namespace {

Real parse_real(std::string s, unsigned bits) {
  if (s.empty() || s == "+") return make_real(1, bits);
  if (s == "-") return make_real(-1, bits);
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational q;
    if (q.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0 || q.get_den() == 0) throw EngineError("bad number '" + s + "'");
    q.canonicalize();
    return make_real(q, bits);
  }
  if (s[0] == '+') s = s.substr(1);
  Real x = make_real(0, bits);
  if (mpfr_set_str(x.backend().data(), s.c_str(), 10, MPFR_RNDN) != 0) throw EngineError("bad number '" + s + "'");
  return x;
}

}  // namespace

Complex parse_complex(const std::string& text, unsigned bits) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw EngineError("empty complex number");
  const unsigned wb = work_bits(bits);
  if (s.back() != 'i') return Complex(parse_real(s, wb), make_real(0, wb));
  s.pop_back();
  if (!s.empty() && s.back() == '*') s.pop_back();
  // split at the last sign that is not an exponent sign and not leading
  size_t cut = std::string::npos;
  for (size_t i = s.size(); i-- > 1;)
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      cut = i;
      break;
    }
  if (cut == std::string::npos) return Complex(make_real(0, wb), parse_real(s, wb));
  return Complex(parse_real(s.substr(0, cut), wb), parse_real(s.substr(cut), wb));
}

std::string complex_str(const Complex& z, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << z.re;
  if (z.im != 0) os << (z.im < 0 ? "-" : "+") << std::setprecision(digits) << boost::multiprecision::abs(z.im) << "i";
  return os.str();
}

}  // namespace toprec::elliptic
