#include "toprec/numeric.hpp"

#include <stdexcept>

namespace toprec {

std::pair<Complex, Complex> poly_eval(const std::vector<Complex>& c, const Complex& x) {
  Complex p(0), dp(0);
  for (size_t i = c.size(); i-- > 0;) {
    dp = dp * x + p;
    p = p * x + c[i];
  }
  return {p, dp};
}

Real tolerance(unsigned bits, const Real& scale) {
  Real s = scale > 1 ? scale : Real(1);
  return s * boost::multiprecision::ldexp(Real(1), -static_cast<int>(bits));
}

std::vector<Complex> poly_roots(const std::vector<Complex>& c, unsigned bits) {
  PrecisionScope scope(bits + 32);
  size_t n = c.size();
  while (n > 0 && c[n - 1].re == 0 && c[n - 1].im == 0) --n;
  if (n < 2) return {};
  std::vector<Complex> a(c.begin(), c.begin() + n);
  const int deg = static_cast<int>(n) - 1;
  Complex lead = a.back();
  for (auto& x : a) x = x / lead;

  // Cauchy bound for the initial circle.
  Real bound = 0;
  for (int i = 0; i < deg; ++i) bound = std::max(bound, Real(abs(a[i])));
  bound += 1;
  std::vector<Complex> z(deg);
  Real pi = real_pi(bits + 32);
  for (int k = 0; k < deg; ++k) z[k] = Complex(bound / 2) * expi(2 * pi * k / deg + Real(0.4));

  Real tol = boost::multiprecision::ldexp(Real(1), -static_cast<int>(bits) - 8);
  for (int it = 0; it < 2000; ++it) {
    Real worst = 0;
    for (int k = 0; k < deg; ++k) {
      auto [p, dp] = poly_eval(a, z[k]);
      if (p.re == 0 && p.im == 0) continue;
      Complex ratio = p / dp;
      Complex s(0);
      for (int j = 0; j < deg; ++j)
        if (j != k) s += Complex(1) / (z[k] - z[j]);
      Complex w = ratio / (Complex(1) - ratio * s);
      z[k] -= w;
      Real rel = abs(w) / (1 + abs(z[k]));
      if (rel > worst) worst = rel;
    }
    if (worst < tol) break;
  }
  for (auto& r : z)
    for (int it = 0; it < 4; ++it) {
      auto [p, dp] = poly_eval(a, r);
      if (dp.re == 0 && dp.im == 0) break;
      r -= p / dp;
    }
  return z;
}

Complex agm(Complex a, Complex b, unsigned bits) {
  PrecisionScope scope(bits + 16);
  Real tol = boost::multiprecision::ldexp(Real(1), -static_cast<int>(bits) - 4);
  for (int it = 0; it < 200; ++it) {
    Complex m = (a + b) / Complex(2);
    Complex g = sqrt(a * b);
    // pick the root closer to the arithmetic mean
    if (abs(m - g) > abs(m + g)) g = -g;
    a = m;
    b = g;
    if (abs(a - b) <= tol * abs(a)) break;
  }
  return a;
}

}  // namespace toprec
