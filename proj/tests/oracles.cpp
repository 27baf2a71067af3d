#include "oracles.hpp"

#include <algorithm>
#include <functional>

namespace oracle {

namespace {

mpz_class dfact(long n) {
  mpz_class r = 1;
  for (long k = n; k > 1; k -= 2) r *= k;
  return r;
}

std::map<std::pair<int, std::vector<int>>, mpq_class>& memo() {
  static std::map<std::pair<int, std::vector<int>>, mpq_class> m;
  return m;
}

}  // namespace

mpq_class intersection(int g, std::vector<int> d) {
  const int n = static_cast<int>(d.size());
  if (g < 0 || n < 0) return 0;
  int sum = 0;
  for (int x : d) {
    if (x < 0) return 0;
    sum += x;
  }
  if (sum != 3 * g - 3 + n) return 0;
  if (2 * g - 2 + n <= 0) return 0;
  std::sort(d.begin(), d.end());
  if (g == 0 && n == 3) return 1;  // d = (0,0,0)
  if (g == 1 && n == 1) return mpq_class(1, 24);
  auto key = std::make_pair(g, d);
  if (auto it = memo().find(key); it != memo().end()) return it->second;

  mpq_class result = 0;
  if (d[0] == 0) {
    // string equation
    std::vector<int> rest(d.begin() + 1, d.end());
    for (size_t j = 0; j < rest.size(); ++j) {
      if (rest[j] == 0) continue;
      auto r = rest;
      r[j] -= 1;
      result += intersection(g, r);
    }
  } else {
    // DVV on the largest insertion tau_{k+1}
    int k = d.back() - 1;
    std::vector<int> S(d.begin(), d.end() - 1);
    mpq_class acc = 0;
    for (size_t j = 0; j < S.size(); ++j) {
      auto r = S;
      int dj = r[j];
      r[j] = k + dj;
      acc += mpq_class(dfact(2 * k + 2 * dj + 1), dfact(2 * dj - 1)) * intersection(g, r);
    }
    for (int a = 0; a + 1 <= k; ++a) {
      int b = k - 1 - a;
      mpz_class w = dfact(2 * a + 1) * dfact(2 * b + 1);
      auto r = S;
      r.push_back(a);
      r.push_back(b);
      acc += mpq_class(w, 2) * intersection(g - 1, r);
      const int m = static_cast<int>(S.size());
      for (int g1 = 0; g1 <= g; ++g1)
        for (unsigned mask = 0; mask < (1u << m); ++mask) {
          std::vector<int> I{a}, J{b};
          for (int i = 0; i < m; ++i) ((mask >> i) & 1 ? I : J).push_back(S[i]);
          mpq_class x = intersection(g1, I);
          if (x == 0) continue;
          acc += mpq_class(w, 2) * x * intersection(g - g1, J);
        }
    }
    result = acc / mpq_class(dfact(2 * k + 3));
  }
  memo()[key] = result;
  return result;
}

mpq_class airy_f(int g, const std::vector<int>& d) {
  const int n = static_cast<int>(d.size());
  int e = 2 - 2 * g - n;
  mpq_class p = 1;
  if (e >= 0)
    p = mpq_class(mpz_class(1) << e);
  else
    p = mpq_class(1, mpz_class(1) << (-e));
  if (n % 2) p = -p;
  return p * intersection(g, d);
}

std::vector<std::vector<int>> compositions(int total, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n - 1) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int x = 0; x <= left; ++x) {
      cur[i] = x;
      rec(i + 1, left - x);
    }
  };
  if (n == 0) {
    if (total == 0) out.push_back({});
    return out;
  }
  if (total >= 0) rec(0, total);
  return out;
}

}  // namespace oracle

namespace oracle {

using toprec::Complex;
using toprec::make_real;

namespace {

Complex y_of(const GueContour& c, const Complex& z) {
  Complex acc(make_real(0, c.bits));
  for (auto& [j, uj] : c.u) acc += Complex(make_real(uj, c.bits)) / pow(z, j);
  return acc;
}

// (1/2 pi i) \oint f(z) dz around z = a.
template <class F>
Complex residue(const GueContour& c, int a, F f) {
  toprec::Real pi = toprec::real_pi(c.bits);
  toprec::Real r = make_real(c.radius, c.bits);
  Complex acc(make_real(0, c.bits));
  for (int j = 0; j < c.nodes; ++j) {
    Complex step = toprec::expi(2 * pi * j / c.nodes) * Complex(r);
    acc += f(Complex(make_real(a, c.bits)) + step) * step;
  }
  return acc / Complex(make_real(c.nodes, c.bits));
}

// Recursion kernel per dz1 / dz, with sigma(z) = 1/z.
Complex kernel(const GueContour& c, const Complex& z1, const Complex& z) {
  Complex one(make_real(1, c.bits)), half(make_real(mpq_class(1, 2), c.bits));
  Complex zi = one / z;
  Complex ds = half * (one / (z1 - z) - one / (z1 - zi));
  return ds / ((y_of(c, z) - y_of(c, zi)) * (one - zi * zi));
}

}  // namespace

Complex gue_w03(const GueContour& c, const Complex& z1, const Complex& z2, const Complex& z3) {
  Complex total(make_real(0, c.bits));
  for (int a : {-1, 1})
    total += residue(c, a, [&](const Complex& z) {
      Complex one(make_real(1, c.bits));
      Complex zi = one / z;
      auto b = [&](const Complex& w, const Complex& p) { return one / ((w - p) * (w - p)); };
      // B(1/z, p) carries d(1/z) = -dz / z^2
      Complex bb = b(z, z2) * b(zi, z3) + b(z, z3) * b(zi, z2);
      return kernel(c, z1, z) * (-bb / (z * z));
    });
  return total;
}

Complex gue_w11(const GueContour& c, const Complex& z1) {
  Complex total(make_real(0, c.bits));
  for (int a : {-1, 1})
    total += residue(c, a, [&](const Complex& z) {
      Complex one(make_real(1, c.bits));
      Complex zi = one / z;
      Complex d = z - zi;
      return kernel(c, z1, z) * (-one / (z * z * d * d));
    });
  return total;
}

Complex gue_pairing(const GueContour& c, int a, int k) {
  // Res_a F01 dxi = -Res_a xi y dx
  return residue(c, a, [&](const Complex& z) {
    Complex one(make_real(1, c.bits)), av(make_real(a, c.bits));
    Complex xi = pow((z + av) / (z - av), 2 * k + 1);
    return -(xi * y_of(c, z) * (one - one / (z * z)));
  });
}

}  // namespace oracle

#include "toprec/elliptic.hpp"

namespace oracle {

using toprec::Complex;
using toprec::make_real;
namespace ell = toprec::elliptic;

Complex contour(const Complex& a, const mpq_class& radius, int nodes, unsigned bits,
                const std::function<Complex(const Complex&)>& f) {
  toprec::PrecisionScope scope(bits);
  toprec::Real pi = toprec::real_pi(bits);
  toprec::Real r = make_real(radius, bits);
  Complex acc(make_real(0, bits));
  for (int j = 0; j < nodes; ++j) {
    Complex step = toprec::expi(2 * pi * j / nodes) * Complex(r);
    acc += f(a + step) * step;
  }
  return acc / Complex(make_real(nodes, bits));
}

namespace {

unsigned tbits(const TorusTR& t) { return t.curve->torus.bits + 32; }

Complex bk(const TorusTR& t, const Complex& u, const Complex& v) { return ell::wp(t.curve->torus, u - v) + t.curve->G2; }

Complex tkernel(const TorusTR& t, const Complex& z1, const Complex& z, const Complex& sz) {
  const auto& L = t.curve->torus;
  Complex half(make_real(mpq_class(1, 2), tbits(t)));
  Complex ds = half * (ell::zeta(L, z1 - z) - ell::zeta(L, z1 - sz) + t.curve->G2 * (z - sz));
  return ds * t.f(z);
}

template <class F>
Complex sum_res(const TorusTR& t, F body) {
  Complex total(make_real(0, tbits(t)));
  for (size_t p = 0; p < t.curve->codes.size(); ++p) {
    Complex a = t.curve->point(static_cast<int>(p));
    Complex two(make_real(2, tbits(t)));
    total += contour(a, t.radius, t.nodes, tbits(t), [&](const Complex& z) { return body(z, two * a - z); });
  }
  return total;
}

}  // namespace

// Legs at sigma(z) carry d sigma(z) / dz = -1.
Complex torus_w03(const TorusTR& t, const Complex& z1, const Complex& z2, const Complex& z3) {
  toprec::PrecisionScope scope(tbits(t));
  return sum_res(t, [&](const Complex& z, const Complex& sz) {
    return -(tkernel(t, z1, z, sz) * (bk(t, z, z2) * bk(t, sz, z3) + bk(t, z, z3) * bk(t, sz, z2)));
  });
}

Complex torus_w11(const TorusTR& t, const Complex& z1) {
  toprec::PrecisionScope scope(tbits(t));
  return sum_res(t, [&](const Complex& z, const Complex& sz) { return -(tkernel(t, z1, z, sz) * bk(t, z, sz)); });
}

Complex torus_w04(const TorusTR& t, const std::vector<Complex>& zs) {
  toprec::PrecisionScope scope(tbits(t));
  return sum_res(t, [&](const Complex& z, const Complex& sz) {
    Complex acc(make_real(0, tbits(t)));
    for (int j = 1; j <= 3; ++j) {
      std::vector<Complex> rest;
      for (int i = 1; i <= 3; ++i)
        if (i != j) rest.push_back(zs[i]);
      acc += bk(t, z, zs[j]) * t.w03({sz, rest[0], rest[1]}) + t.w03({z, rest[0], rest[1]}) * bk(t, sz, zs[j]);
    }
    return -(tkernel(t, zs[0], z, sz) * acc);
  });
}

Complex torus_w12(const TorusTR& t, const Complex& z1, const Complex& z2) {
  toprec::PrecisionScope scope(tbits(t));
  return sum_res(t, [&](const Complex& z, const Complex& sz) {
    Complex acc = t.w03({z, sz, z2}) + bk(t, z, z2) * t.w11({sz}) + t.w11({z}) * bk(t, sz, z2);
    return -(tkernel(t, z1, z, sz) * acc);
  });
}

}  // namespace oracle

namespace oracle {

namespace {

struct RsSheets {
  const RsContour& c;
  std::vector<Complex> rho;  // rho^j
  explicit RsSheets(const RsContour& c_) : c(c_) {
    toprec::Real pi = toprec::real_pi(c.bits);
    for (int j = 0; j < c.r; ++j) rho.push_back(toprec::expi(2 * pi * j / c.r));
  }
  Complex y(const Complex& z) const { return toprec::pow(z, c.s); }
  // (-1)^{|Z|+1} \int_0^z B(z1, .) / prod (y(z) - y(z')) x'(z), per dz1 / dz^{|Z|}
  Complex kernel(const Complex& z1, const Complex& z, const std::vector<int>& Z) const {
    Complex one(toprec::make_real(1, c.bits));
    Complex k = one / (z1 - z) - one / z1;
    Complex xp = toprec::pow(z, c.r - 1);
    for (int j : Z) k = k / ((y(z) - y(rho[j] * z)) * xp);
    return Z.size() % 2 ? k : -k;
  }
};

Complex bhat(const Complex& u, const Complex& v) {
  Complex d = u - v;
  return Complex(1L) / (d * d);
}

}  // namespace

Complex rs_w03(const RsContour& c, const Complex& z1, const Complex& z2, const Complex& z3) {
  toprec::PrecisionScope scope(c.bits);
  RsSheets sh(c);
  Complex zero(toprec::make_real(0, c.bits));
  return contour(zero, c.radius, c.nodes, c.bits, [&](const Complex& z) {
    Complex acc = zero;
    for (int j = 1; j < c.r; ++j) {
      Complex zj = sh.rho[j] * z;
      acc += sh.kernel(z1, z, {j}) * sh.rho[j] * (bhat(z, z2) * bhat(zj, z3) + bhat(z, z3) * bhat(zj, z2));
    }
    return acc;
  });
}

Complex rs_w11(const RsContour& c, const Complex& z1) {
  toprec::PrecisionScope scope(c.bits);
  RsSheets sh(c);
  Complex zero(toprec::make_real(0, c.bits));
  return contour(zero, c.radius, c.nodes, c.bits, [&](const Complex& z) {
    Complex acc = zero;
    for (int j = 1; j < c.r; ++j) acc += sh.kernel(z1, z, {j}) * sh.rho[j] * bhat(z, sh.rho[j] * z);
    return acc;
  });
}

Complex rs_w04(const RsContour& c, const std::vector<Complex>& zs,
               const std::function<Complex(const Complex&, const Complex&, const Complex&)>& w03) {
  toprec::PrecisionScope scope(c.bits);
  RsSheets sh(c);
  Complex zero(toprec::make_real(0, c.bits));
  const Complex& z1 = zs[0];
  const std::vector<Complex> ext{zs[1], zs[2], zs[3]};
  return contour(zero, c.radius, c.nodes, c.bits, [&](const Complex& z) {
    Complex acc = zero;
    for (int j = 1; j < c.r; ++j) {
      Complex zj = sh.rho[j] * z, w = zero;
      for (int a = 0; a < 3; ++a) {
        const Complex& za = ext[a];
        const Complex& zb = ext[(a + 1) % 3];
        const Complex& zc = ext[(a + 2) % 3];
        w += bhat(z, za) * w03(zj, zb, zc) + w03(z, zb, zc) * bhat(zj, za);
      }
      acc += sh.kernel(z1, z, {j}) * sh.rho[j] * w;
    }
    for (int i = 1; i < c.r; ++i)
      for (int j = i + 1; j < c.r; ++j) {
        std::vector<Complex> pts{z, sh.rho[i] * z, sh.rho[j] * z};
        std::vector<int> perm{0, 1, 2};
        Complex w = zero;
        do {
          w += bhat(pts[0], ext[perm[0]]) * bhat(pts[1], ext[perm[1]]) * bhat(pts[2], ext[perm[2]]);
        } while (std::next_permutation(perm.begin(), perm.end()));
        acc += sh.kernel(z1, z, {i, j}) * sh.rho[i] * sh.rho[j] * w;
      }
    return acc;
  });
}

}  // namespace oracle
