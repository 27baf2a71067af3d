#include "toprec/scalar.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace toprec {

namespace {

unsigned digits10_for(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

unsigned g_bits = kDefaultPrecision;

void round_to(Real& x, unsigned bits) {
  mpfr_prec_round(x.backend().data(), bits, MPFR_RNDN);
}

[[noreturn]] void mismatch(Kind a, Kind b) {
  throw ScalarError(std::string("scalar variant mismatch: ") + kind_name(a) + " vs " + kind_name(b));
}

}  // namespace

void set_working_precision(unsigned bits) {
  g_bits = bits;
  Real::default_precision(digits10_for(bits));
}

unsigned working_precision() { return g_bits; }

PrecisionScope::PrecisionScope(unsigned bits) : saved_(g_bits) {
  set_working_precision(std::max(bits, g_bits));
}

PrecisionScope::~PrecisionScope() { set_working_precision(saved_); }

Real make_real(const Rational& q, unsigned bits) {
  Real x;
  mpfr_set_prec(x.backend().data(), bits);
  mpfr_set_q(x.backend().data(), q.get_mpq_t(), MPFR_RNDN);
  return x;
}

Real make_real(long v, unsigned bits) {
  Real x;
  mpfr_set_prec(x.backend().data(), bits);
  mpfr_set_si(x.backend().data(), v, MPFR_RNDN);
  return x;
}

Real real_pi(unsigned bits) {
  Real x;
  mpfr_set_prec(x.backend().data(), bits);
  mpfr_const_pi(x.backend().data(), MPFR_RNDN);
  return x;
}

// --- Complex -----------------------------------------------------------

Complex::Complex() : re(0), im(0) {}
Complex::Complex(Real r) : re(std::move(r)), im(0) {}
Complex::Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
Complex::Complex(long v) : re(v), im(0) {}
Complex::Complex(const Rational& q) : re(make_real(q, g_bits)), im(0) {}

Complex& Complex::operator+=(const Complex& o) {
  re += o.re;
  im += o.im;
  return *this;
}
Complex& Complex::operator-=(const Complex& o) {
  re -= o.re;
  im -= o.im;
  return *this;
}
Complex& Complex::operator*=(const Complex& o) {
  Real r = re * o.re - im * o.im;
  im = re * o.im + im * o.re;
  re = std::move(r);
  return *this;
}
Complex& Complex::operator/=(const Complex& o) {
  Real d = o.re * o.re + o.im * o.im;
  if (d == 0) throw ScalarError("complex division by zero");
  Real r = (re * o.re + im * o.im) / d;
  im = (im * o.re - re * o.im) / d;
  re = std::move(r);
  return *this;
}

Complex operator+(Complex a, const Complex& b) { return a += b; }
Complex operator-(Complex a, const Complex& b) { return a -= b; }
Complex operator*(Complex a, const Complex& b) { return a *= b; }
Complex operator/(Complex a, const Complex& b) { return a /= b; }
Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }

Real abs(const Complex& z) { return boost::multiprecision::hypot(z.re, z.im); }

Complex exp(const Complex& z) {
  Real m = boost::multiprecision::exp(z.re);
  return {m * boost::multiprecision::cos(z.im), m * boost::multiprecision::sin(z.im)};
}

Complex log(const Complex& z) {
  return {boost::multiprecision::log(abs(z)), boost::multiprecision::atan2(z.im, z.re)};
}

Complex sqrt(const Complex& z) {
  if (z.re == 0 && z.im == 0) return z;
  Real m = abs(z);
  Real a = boost::multiprecision::sqrt((m + z.re) / 2);
  Real b = boost::multiprecision::sqrt((m - z.re) / 2);
  if (z.im < 0) b = -b;
  return {a, b};
}

Complex pow(const Complex& z, long k) {
  if (k < 0) return Complex(1) / pow(z, -k);
  Complex result(1), base = z;
  while (k) {
    if (k & 1) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

Complex pow(const Complex& z, const Real& e) {
  if (z.re == 0 && z.im == 0) return z;
  Complex l = log(z);
  return exp(Complex(l.re * e, l.im * e));
}

Complex expi(const Real& theta) { return {boost::multiprecision::cos(theta), boost::multiprecision::sin(theta)}; }

// --- Pi2Poly / Cyclotomic helpers ---------------------------------------

void Pi2Poly::canonicalize() {
  for (auto it = terms.begin(); it != terms.end();) {
    it->second.canonicalize();
    if (it->second == 0)
      it = terms.erase(it);
    else
      ++it;
  }
}

int euler_phi(int r) {
  int result = r, n = r;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

namespace {

using IntPoly = std::vector<Integer>;

IntPoly poly_exact_div(IntPoly num, const IntPoly& den) {
  IntPoly q(num.size() >= den.size() ? num.size() - den.size() + 1 : 1, 0);
  for (long i = static_cast<long>(num.size()) - 1; i >= static_cast<long>(den.size()) - 1; --i) {
    Integer c = num[i] / den.back();
    q[i - den.size() + 1] = c;
    for (size_t j = 0; j < den.size(); ++j) num[i - den.size() + 1 + j] -= c * den[j];
  }
  return q;
}

std::map<int, IntPoly>& cyclo_cache() {
  static std::map<int, IntPoly> cache;
  return cache;
}
std::mutex& cyclo_mutex() {
  static std::mutex m;
  return m;
}

void cyclo_reduce(Cyclotomic& c, std::vector<Rational> full) {
  const IntPoly phi = cyclotomic_polynomial(c.r);
  const size_t deg = phi.size() - 1;
  for (long i = static_cast<long>(full.size()) - 1; i >= static_cast<long>(deg); --i) {
    if (full[i] == 0) continue;
    Rational lead = full[i];
    for (size_t j = 0; j <= deg; ++j) full[i - deg + j] -= lead * Rational(phi[j]);
  }
  full.resize(deg, Rational(0));
  c.coeffs = std::move(full);
}

Cyclotomic cyclo_embed(const Rational& q, int r) {
  Cyclotomic c;
  c.r = r;
  c.coeffs.assign(euler_phi(r), Rational(0));
  c.coeffs[0] = q;
  return c;
}

Pi2Poly pi2_embed(const Rational& q) {
  Pi2Poly p;
  if (q != 0) p.terms[0] = q;
  return p;
}

ComplexAP complex_embed(const Rational& q, unsigned prec) {
  ComplexAP c;
  c.prec = prec;
  c.z = Complex(make_real(q, prec), make_real(0, prec));
  return c;
}

ComplexAP complex_round(Complex z, unsigned prec) {
  round_to(z.re, prec);
  round_to(z.im, prec);
  return ComplexAP{std::move(z), prec};
}

std::string rational_str(const Rational& q) { return q.get_str(); }

std::string mpfr_to_string(const Real& x, unsigned prec) {
  // Enough decimal digits to round trip at this binary precision.
  size_t digits = static_cast<size_t>(std::ceil(prec * 0.30102999566398120)) + 2;
  mpfr_exp_t e;
  char* s = mpfr_get_str(nullptr, &e, 10, digits, x.backend().data(), MPFR_RNDN);
  std::string m(s);
  mpfr_free_str(s);
  if (mpfr_zero_p(x.backend().data())) return "0";
  if (!mpfr_number_p(x.backend().data())) return m;
  bool neg = m[0] == '-';
  if (neg) m.erase(0, 1);
  std::string out = neg ? "-" : "";
  out += m.substr(0, 1);
  out += ".";
  out += m.substr(1);
  out += "e" + std::to_string(static_cast<long>(e) - 1);
  return out;
}

Real real_from_string(const std::string& s, unsigned prec) {
  Real x;
  mpfr_set_prec(x.backend().data(), prec);
  if (mpfr_set_str(x.backend().data(), s.c_str(), 10, MPFR_RNDN) != 0)
    throw ScalarError("bad decimal: " + s);
  return x;
}

}  // namespace

std::vector<Integer> cyclotomic_polynomial(int r) {
  if (r < 1) throw ScalarError("cyclotomic order must be positive");
  std::lock_guard<std::mutex> lock(cyclo_mutex());
  auto& cache = cyclo_cache();
  if (auto it = cache.find(r); it != cache.end()) return it->second;
  // x^r - 1 divided by Phi_d for every proper divisor d.
  IntPoly p(r + 1, 0);
  p[0] = -1;
  p[r] = 1;
  for (int d = 1; d < r; ++d) {
    if (r % d) continue;
    IntPoly pd;
    if (auto it = cache.find(d); it != cache.end()) {
      pd = it->second;
    } else {
      // compute without holding recursion through the lock
      IntPoly q(d + 1, 0);
      q[0] = -1;
      q[d] = 1;
      for (int e = 1; e < d; ++e)
        if (d % e == 0) q = poly_exact_div(q, cache.at(e));
      cache[d] = q;
      pd = q;
    }
    p = poly_exact_div(p, pd);
  }
  cache[r] = p;
  return p;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::rational: return "rational";
    case Kind::pi2: return "pi2";
    case Kind::cyclotomic: return "cyclotomic";
    case Kind::complex: return "complex";
  }
  return "?";
}

// --- Scalar --------------------------------------------------------------

Scalar::Scalar(Rational q) : v_(std::move(q)) { std::get<Rational>(v_).canonicalize(); }
Scalar::Scalar(Pi2Poly p) : v_(std::move(p)) { std::get<Pi2Poly>(v_).canonicalize(); }
Scalar::Scalar(Cyclotomic c) : v_(std::move(c)) {
  auto& cc = std::get<Cyclotomic>(v_);
  if (cc.r < 1) throw ScalarError("cyclotomic order must be positive");
  if (static_cast<int>(cc.coeffs.size()) != euler_phi(cc.r)) {
    std::vector<Rational> full = cc.coeffs;
    cyclo_reduce(cc, std::move(full));
  }
}
Scalar::Scalar(ComplexAP c) : v_(complex_round(std::move(c.z), c.prec)) {}

Scalar Scalar::complex(const Complex& z, unsigned prec) { return Scalar(ComplexAP{z, prec}); }

Kind Scalar::kind() const { return static_cast<Kind>(v_.index()); }

bool Scalar::is_zero() const {
  switch (kind()) {
    case Kind::rational: return std::get<Rational>(v_) == 0;
    case Kind::pi2: return std::get<Pi2Poly>(v_).terms.empty();
    case Kind::cyclotomic:
      for (auto& c : std::get<Cyclotomic>(v_).coeffs)
        if (c != 0) return false;
      return true;
    case Kind::complex: {
      auto& c = std::get<ComplexAP>(v_);
      return c.z.re == 0 && c.z.im == 0;
    }
  }
  return false;
}

bool Scalar::is_rational() const {
  switch (kind()) {
    case Kind::rational: return true;
    case Kind::pi2: {
      auto& t = std::get<Pi2Poly>(v_).terms;
      return t.empty() || (t.size() == 1 && t.begin()->first == 0);
    }
    case Kind::cyclotomic: {
      auto& c = std::get<Cyclotomic>(v_).coeffs;
      for (size_t i = 1; i < c.size(); ++i)
        if (c[i] != 0) return false;
      return true;
    }
    case Kind::complex: return false;
  }
  return false;
}

Rational Scalar::as_rational() const {
  if (!is_rational()) throw ScalarError("scalar is not rational: " + str());
  switch (kind()) {
    case Kind::rational: return std::get<Rational>(v_);
    case Kind::pi2: {
      auto& t = std::get<Pi2Poly>(v_).terms;
      return t.empty() ? Rational(0) : t.begin()->second;
    }
    case Kind::cyclotomic: return std::get<Cyclotomic>(v_).coeffs[0];
    default: break;
  }
  throw ScalarError("unreachable");
}

const Rational& Scalar::rational() const {
  if (kind() != Kind::rational) throw ScalarError("not a rational scalar");
  return std::get<Rational>(v_);
}
const Pi2Poly& Scalar::pi2() const {
  if (kind() != Kind::pi2) throw ScalarError("not a pi2 scalar");
  return std::get<Pi2Poly>(v_);
}
const Cyclotomic& Scalar::cyclotomic() const {
  if (kind() != Kind::cyclotomic) throw ScalarError("not a cyclotomic scalar");
  return std::get<Cyclotomic>(v_);
}
const ComplexAP& Scalar::complex_ap() const {
  if (kind() != Kind::complex) throw ScalarError("not a complex scalar");
  return std::get<ComplexAP>(v_);
}

Complex Scalar::to_complex(unsigned bits) const {
  switch (kind()) {
    case Kind::rational: return Complex(make_real(rational(), bits), make_real(0, bits));
    case Kind::pi2: {
      Real p2 = real_pi(bits);
      p2 *= p2;
      Real acc = make_real(0, bits);
      for (auto& [p, c] : pi2().terms) acc += make_real(c, bits) * boost::multiprecision::pow(p2, p);
      return Complex(acc, make_real(0, bits));
    }
    case Kind::cyclotomic: {
      auto& c = cyclotomic();
      Real th = real_pi(bits) * 2 / c.r;
      Complex acc(make_real(0, bits), make_real(0, bits));
      for (size_t k = 0; k < c.coeffs.size(); ++k) {
        if (c.coeffs[k] == 0) continue;
        Complex t = expi(th * static_cast<long>(k));
        acc += Complex(make_real(c.coeffs[k], bits)) * t;
      }
      return acc;
    }
    case Kind::complex: return complex_ap().z;
  }
  return {};
}

Scalar Scalar::promote(Kind k, int cyc_order, unsigned prec) const {
  if (kind() == k) return *this;
  if (kind() != Kind::rational) {
    if (k == Kind::complex) return Scalar::complex(to_complex(prec), prec);
    if (is_rational()) return Scalar(as_rational()).promote(k, cyc_order, prec);
    mismatch(kind(), k);
  }
  const Rational& q = rational();
  switch (k) {
    case Kind::rational: return *this;
    case Kind::pi2: return Scalar(pi2_embed(q));
    case Kind::cyclotomic: return Scalar(cyclo_embed(q, cyc_order));
    case Kind::complex: return Scalar(complex_embed(q, prec));
  }
  return *this;
}

namespace {

// Brings a and b to a common variant, embedding rationals.
void unify(Scalar& a, Scalar& b) {
  if (a.kind() == b.kind()) {
    if (a.kind() == Kind::cyclotomic && a.cyclotomic().r != b.cyclotomic().r)
      throw ScalarError("cyclotomic order mismatch");
    return;
  }
  if (a.kind() == Kind::rational) {
    int r = b.kind() == Kind::cyclotomic ? b.cyclotomic().r : 2;
    unsigned p = b.kind() == Kind::complex ? b.complex_ap().prec : kDefaultPrecision;
    a = a.promote(b.kind(), r, p);
    return;
  }
  if (b.kind() == Kind::rational) {
    int r = a.kind() == Kind::cyclotomic ? a.cyclotomic().r : 2;
    unsigned p = a.kind() == Kind::complex ? a.complex_ap().prec : kDefaultPrecision;
    b = b.promote(a.kind(), r, p);
    return;
  }
  mismatch(a.kind(), b.kind());
}

}  // namespace

Scalar& Scalar::operator+=(const Scalar& o) {
  if (kind() == Kind::rational && o.kind() == Kind::rational) {
    std::get<Rational>(v_) += std::get<Rational>(o.v_);
    return *this;
  }
  Scalar b = o;
  unify(*this, b);
  switch (kind()) {
    case Kind::rational: break;
    case Kind::pi2: {
      auto& t = std::get<Pi2Poly>(v_);
      for (auto& [p, c] : b.pi2().terms) t.terms[p] += c;
      t.canonicalize();
      break;
    }
    case Kind::cyclotomic: {
      auto& c = std::get<Cyclotomic>(v_);
      for (size_t i = 0; i < c.coeffs.size(); ++i) c.coeffs[i] += b.cyclotomic().coeffs[i];
      break;
    }
    case Kind::complex: {
      auto& c = std::get<ComplexAP>(v_);
      unsigned p = std::min(c.prec, b.complex_ap().prec);
      *this = Scalar(complex_round(c.z + b.complex_ap().z, p));
      break;
    }
  }
  return *this;
}

Scalar Scalar::operator-() const {
  switch (kind()) {
    case Kind::rational: return Scalar(Rational(-rational()));
    case Kind::pi2: {
      Pi2Poly p = pi2();
      for (auto& [k, c] : p.terms) c = -c;
      return Scalar(std::move(p));
    }
    case Kind::cyclotomic: {
      Cyclotomic c = cyclotomic();
      for (auto& x : c.coeffs) x = -x;
      return Scalar(std::move(c));
    }
    case Kind::complex: {
      ComplexAP c = complex_ap();
      c.z = -c.z;
      return Scalar(std::move(c));
    }
  }
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) { return *this += -o; }

Scalar& Scalar::operator*=(const Scalar& o) {
  if (kind() == Kind::rational && o.kind() == Kind::rational) {
    std::get<Rational>(v_) *= std::get<Rational>(o.v_);
    return *this;
  }
  Scalar b = o;
  unify(*this, b);
  switch (kind()) {
    case Kind::rational: break;
    case Kind::pi2: {
      Pi2Poly out;
      for (auto& [p1, c1] : pi2().terms)
        for (auto& [p2, c2] : b.pi2().terms) out.terms[p1 + p2] += c1 * c2;
      *this = Scalar(std::move(out));
      break;
    }
    case Kind::cyclotomic: {
      auto& x = cyclotomic();
      auto& y = b.cyclotomic();
      std::vector<Rational> full(x.coeffs.size() + y.coeffs.size(), Rational(0));
      for (size_t i = 0; i < x.coeffs.size(); ++i) {
        if (x.coeffs[i] == 0) continue;
        for (size_t j = 0; j < y.coeffs.size(); ++j) full[i + j] += x.coeffs[i] * y.coeffs[j];
      }
      Cyclotomic c;
      c.r = x.r;
      cyclo_reduce(c, std::move(full));
      *this = Scalar(std::move(c));
      break;
    }
    case Kind::complex: {
      unsigned p = std::min(complex_ap().prec, b.complex_ap().prec);
      *this = Scalar(complex_round(complex_ap().z * b.complex_ap().z, p));
      break;
    }
  }
  return *this;
}

namespace {

// Inverse in Q(rho) via the extended Euclidean algorithm against Phi_r.
Cyclotomic cyclo_inverse(const Cyclotomic& a) {
  using QPoly = std::vector<Rational>;
  auto trim = [](QPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
  };
  auto sub_mul = [&](const QPoly& x, const QPoly& q, const QPoly& y) {
    QPoly out = x;
    QPoly prod(q.size() + y.size(), Rational(0));
    for (size_t i = 0; i < q.size(); ++i)
      for (size_t j = 0; j < y.size(); ++j) prod[i + j] += q[i] * y[j];
    if (out.size() < prod.size()) out.resize(prod.size(), Rational(0));
    for (size_t i = 0; i < prod.size(); ++i) out[i] -= prod[i];
    trim(out);
    return out;
  };
  auto divmod = [&](QPoly num, const QPoly& den, QPoly& quo) {
    quo.assign(num.size() >= den.size() ? num.size() - den.size() + 1 : 1, Rational(0));
    while (num.size() >= den.size() && !num.empty()) {
      Rational c = num.back() / den.back();
      size_t shift = num.size() - den.size();
      quo[shift] = c;
      for (size_t j = 0; j < den.size(); ++j) num[shift + j] -= c * den[j];
      trim(num);
    }
    trim(quo);
    return num;
  };
  QPoly phi;
  for (auto& c : cyclotomic_polynomial(a.r)) phi.emplace_back(c);
  QPoly r0 = phi, r1 = a.coeffs;
  trim(r1);
  if (r1.empty()) throw ScalarError("division by zero");
  QPoly s0, s1{Rational(1)};
  while (!(r1.size() == 1)) {
    QPoly q;
    QPoly rem = divmod(r0, r1, q);
    QPoly s2 = sub_mul(s0, q, s1);
    r0 = std::move(r1);
    r1 = std::move(rem);
    s0 = std::move(s1);
    s1 = std::move(s2);
    if (r1.empty()) throw ScalarError("cyclotomic element not invertible");
  }
  Rational inv = 1 / r1[0];
  for (auto& c : s1) c *= inv;
  Cyclotomic out;
  out.r = a.r;
  cyclo_reduce(out, std::move(s1));
  return out;
}

}  // namespace

Scalar& Scalar::operator/=(const Scalar& o) {
  if (o.is_zero()) throw ScalarError("division by zero");
  if (kind() == Kind::rational && o.kind() == Kind::rational) {
    std::get<Rational>(v_) /= std::get<Rational>(o.v_);
    return *this;
  }
  switch (o.kind()) {
    case Kind::rational: return *this *= Scalar(Rational(1 / o.rational()));
    case Kind::pi2: {
      auto& t = o.pi2().terms;
      if (t.size() != 1) throw ScalarError("division by a non-monomial pi^2 polynomial");
      Pi2Poly inv;
      inv.terms[-t.begin()->first] = 1 / t.begin()->second;
      return *this *= Scalar(std::move(inv));
    }
    case Kind::cyclotomic: return *this *= Scalar(cyclo_inverse(o.cyclotomic()));
    case Kind::complex: {
      Scalar a = *this, b = o;
      unify(a, b);
      unsigned p = std::min(a.complex_ap().prec, b.complex_ap().prec);
      *this = Scalar(complex_round(a.complex_ap().z / b.complex_ap().z, p));
      return *this;
    }
  }
  return *this;
}

bool operator==(const Scalar& a0, const Scalar& b0) {
  Scalar a = a0, b = b0;
  if (a.kind() != b.kind()) {
    if (a.kind() != Kind::rational && b.kind() != Kind::rational) return false;
    if (a.is_rational() && b.is_rational()) return a.as_rational() == b.as_rational();
    if (a.kind() == Kind::complex || b.kind() == Kind::complex) {
      unify(a, b);
    } else {
      return false;
    }
  }
  switch (a.kind()) {
    case Kind::rational: return a.rational() == b.rational();
    case Kind::pi2: return a.pi2().terms == b.pi2().terms;
    case Kind::cyclotomic: return a.cyclotomic().r == b.cyclotomic().r && a.cyclotomic().coeffs == b.cyclotomic().coeffs;
    case Kind::complex: return a.complex_ap().z == b.complex_ap().z;
  }
  return false;
}

Scalar Scalar::pow(long k) const {
  if (k < 0) return Scalar(1) / pow(-k);
  Scalar result(1), base = *this;
  if (kind() != Kind::rational) result = result.promote(kind(), kind() == Kind::cyclotomic ? cyclotomic().r : 2,
                                                        kind() == Kind::complex ? complex_ap().prec : kDefaultPrecision);
  while (k) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k) base *= base;
  }
  return result;
}

std::string Scalar::str() const {
  switch (kind()) {
    case Kind::rational: return rational_str(rational());
    case Kind::pi2: {
      auto& t = pi2().terms;
      if (t.empty()) return "0";
      std::string out;
      for (auto& [p, c] : t) {
        std::string coef = rational_str(c);
        if (!out.empty()) {
          if (coef[0] == '-') {
            out += " - ";
            coef.erase(0, 1);
          } else {
            out += " + ";
          }
        }
        out += coef;
        if (p == 1) out += "*pi^2";
        else if (p != 0) out += "*pi^" + std::to_string(2 * p);
      }
      return out;
    }
    case Kind::cyclotomic: {
      auto& c = cyclotomic();
      std::string out;
      for (size_t k = 0; k < c.coeffs.size(); ++k) {
        if (c.coeffs[k] == 0) continue;
        std::string coef = rational_str(c.coeffs[k]);
        if (!out.empty()) {
          if (coef[0] == '-') {
            out += " - ";
            coef.erase(0, 1);
          } else {
            out += " + ";
          }
        }
        out += coef;
        if (k > 0) out += "*rho^" + std::to_string(k);
      }
      return out.empty() ? "0" : out;
    }
    case Kind::complex: {
      auto& c = complex_ap();
      return "(" + mpfr_to_string(c.z.re, c.prec) + "," + mpfr_to_string(c.z.im, c.prec) + ")";
    }
  }
  return "";
}

std::string Scalar::decimal(int digits) const {
  Complex z = to_complex(std::max<unsigned>(kDefaultPrecision, digits * 4));
  auto fmt = [&](const Real& x) {
    std::ostringstream os;
    os << std::setprecision(digits) << x;
    return os.str();
  };
  if (z.im == 0) return fmt(z.re);
  return "(" + fmt(z.re) + "," + fmt(z.im) + ")";
}

std::string Scalar::to_json() const {
  using nlohmann::json;
  json j;
  switch (kind()) {
    case Kind::rational:
      j = {{"kind", "rational"}, {"num", rational().get_num().get_str()}, {"den", rational().get_den().get_str()}};
      break;
    case Kind::pi2: {
      json terms = json::array();
      for (auto& [p, c] : pi2().terms) terms.push_back({p, c.get_num().get_str(), c.get_den().get_str()});
      j = {{"kind", "pi2"}, {"terms", terms}};
      break;
    }
    case Kind::cyclotomic: {
      json coeffs = json::array();
      for (auto& c : cyclotomic().coeffs) coeffs.push_back({c.get_num().get_str(), c.get_den().get_str()});
      j = {{"kind", "cyclotomic"}, {"r", cyclotomic().r}, {"coeffs", coeffs}};
      break;
    }
    case Kind::complex: {
      auto& c = complex_ap();
      j = {{"kind", "complex"}, {"re", mpfr_to_string(c.z.re, c.prec)}, {"im", mpfr_to_string(c.z.im, c.prec)}, {"prec", c.prec}};
      break;
    }
  }
  return j.dump();
}

Scalar Scalar::from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ScalarError(std::string("bad scalar json: ") + e.what());
  }
  auto rat = [](const std::string& n, const std::string& d) {
    Rational q{Integer(n), Integer(d)};
    if (q.get_den() == 0) throw ScalarError("zero denominator");
    q.canonicalize();
    return q;
  };
  try {
    std::string kind = j.at("kind");
    if (kind == "rational") return Scalar(rat(j.at("num"), j.at("den")));
    if (kind == "pi2") {
      Pi2Poly p;
      for (auto& t : j.at("terms")) p.terms[t.at(0).get<int>()] += rat(t.at(1), t.at(2));
      return Scalar(std::move(p));
    }
    if (kind == "cyclotomic") {
      Cyclotomic c;
      c.r = j.at("r");
      for (auto& t : j.at("coeffs")) c.coeffs.push_back(rat(t.at(0), t.at(1)));
      if (static_cast<int>(c.coeffs.size()) != euler_phi(c.r)) throw ScalarError("cyclotomic coefficient count");
      return Scalar(std::move(c));
    }
    if (kind == "complex") {
      unsigned prec = j.at("prec");
      return Scalar(ComplexAP{Complex(real_from_string(j.at("re"), prec), real_from_string(j.at("im"), prec)), prec});
    }
  } catch (const ScalarError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScalarError(std::string("bad scalar json: ") + e.what());
  }
  throw ScalarError("unknown scalar kind");
}

// --- number theory ---------------------------------------------------------

Integer double_factorial(long n) {
  if (n < -1) throw ScalarError("double factorial of " + std::to_string(n));
  Integer r = 1;
  for (long k = n; k > 1; k -= 2) r *= k;
  return r;
}

Integer factorial(long n) {
  if (n < 0) throw ScalarError("factorial of negative");
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
  return r;
}

Integer binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

Rational binomial(const Rational& x, long j) {
  if (j < 0) return 0;
  Rational r = 1;
  for (long i = 0; i < j; ++i) r *= (x - i) / Rational(i + 1);
  return r;
}

Rational bernoulli(long n) {
  if (n < 0) throw ScalarError("bernoulli index");
  // Akiyama-Tanigawa gives B_1 = +1/2; flip to the -1/2 convention.
  std::vector<Rational> a(n + 1);
  for (long m = 0; m <= n; ++m) {
    a[m] = Rational(1, m + 1);
    for (long j = m; j >= 1; --j) a[j - 1] = j * (a[j - 1] - a[j]);
  }
  return n == 1 ? Rational(-1, 2) : a[0];
}

Scalar pi2_power(long p) {
  Pi2Poly out;
  out.terms[static_cast<int>(p)] = 1;
  return Scalar(std::move(out));
}

Scalar zeta_even(long k) {
  if (k < 1) throw ScalarError("zeta_even requires k >= 1");
  // zeta(2k) = (-1)^{k+1} B_{2k} (2 pi)^{2k} / (2 (2k)!)
  Rational c = bernoulli(2 * k) * Rational(Integer(1) << (2 * k)) / Rational(2 * factorial(2 * k));
  if (k % 2 == 0) c = -c;
  Pi2Poly p;
  p.terms[static_cast<int>(k)] = c;
  return Scalar(std::move(p));
}

Scalar cyclotomic_power(int r, long k) {
  if (r < 1) throw ScalarError("cyclotomic order");
  long e = ((k % r) + r) % r;
  std::vector<Rational> full(e + 1, Rational(0));
  full[e] = 1;
  Cyclotomic c;
  c.r = r;
  cyclo_reduce(c, std::move(full));
  return Scalar(std::move(c));
}

Scalar cyclotomic_root(int r) {
  if (r < 2) throw ScalarError("cyclotomic_root requires r >= 2");
  if (r == 2) return Scalar(-1);
  return cyclotomic_power(r, 1);
}

}  // namespace toprec
