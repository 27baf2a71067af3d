#pragma once

#include <gmpxx.h>

#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace toprec {

using Rational = mpq_class;
using Integer = mpz_class;
using Real = boost::multiprecision::mpfr_float;

constexpr unsigned kDefaultPrecision = 256;

class ScalarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sets the working precision (bits) used for freshly constructed Real values
// on the calling thread.
void set_working_precision(unsigned bits);
unsigned working_precision();

// RAII guard restoring the previous working precision.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

Real make_real(const Rational& q, unsigned bits);
Real make_real(long v, unsigned bits);
Real real_pi(unsigned bits);

struct Complex {
  Real re;
  Real im;

  Complex();
  Complex(Real r);
  Complex(Real r, Real i);
  Complex(long v);
  explicit Complex(const Rational& q);

  Complex& operator+=(const Complex& o);
  Complex& operator-=(const Complex& o);
  Complex& operator*=(const Complex& o);
  Complex& operator/=(const Complex& o);

  Complex conj() const { return {re, -im}; }
  Real norm() const { return re * re + im * im; }
};

Complex operator+(Complex a, const Complex& b);
Complex operator-(Complex a, const Complex& b);
Complex operator*(Complex a, const Complex& b);
Complex operator/(Complex a, const Complex& b);
Complex operator-(const Complex& a);
bool operator==(const Complex& a, const Complex& b);

Real abs(const Complex& z);
Complex exp(const Complex& z);
Complex log(const Complex& z);
Complex sqrt(const Complex& z);
Complex pow(const Complex& z, long k);
Complex pow(const Complex& z, const Real& e);  // principal branch
Complex expi(const Real& theta);               // e^{i theta}

// Polynomial in pi^2 with rational coefficients, stored sparsely.
struct Pi2Poly {
  std::map<int, Rational> terms;  // power of pi^2 -> coefficient, no zeros
  void canonicalize();
};

// Element of Q(rho), rho a primitive r-th root of unity, power basis mod Phi_r.
struct Cyclotomic {
  int r = 2;
  std::vector<Rational> coeffs;  // length phi(r)
};

struct ComplexAP {
  Complex z;
  unsigned prec = kDefaultPrecision;
};

enum class Kind { rational, pi2, cyclotomic, complex };
const char* kind_name(Kind k);

class Scalar {
 public:
  Scalar() : v_(Rational(0)) {}
  Scalar(long v) : v_(Rational(v)) {}
  Scalar(int v) : v_(Rational(v)) {}
  Scalar(Rational q);
  Scalar(Pi2Poly p);
  Scalar(Cyclotomic c);
  Scalar(ComplexAP c);
  static Scalar frac(long num, long den) { return Scalar(Rational(num, den)); }
  static Scalar complex(const Complex& z, unsigned prec = kDefaultPrecision);

  Kind kind() const;
  bool is_zero() const;
  bool is_rational() const;  // true also for embedded rationals in other variants
  Rational as_rational() const;
  const Rational& rational() const;
  const Pi2Poly& pi2() const;
  const Cyclotomic& cyclotomic() const;
  const ComplexAP& complex_ap() const;
  Complex to_complex(unsigned bits) const;  // numeric view of any variant

  // Converts to the given variant. cyc_order / prec only used by those kinds.
  Scalar promote(Kind k, int cyc_order = 2, unsigned prec = kDefaultPrecision) const;

  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);
  Scalar operator-() const;

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
  friend bool operator==(const Scalar& a, const Scalar& b);
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

  Scalar pow(long k) const;

  // Canonical exact rendering: "-1/48", "1/24 + 1/12*pi^2", "1/3*rho^1 - 2".
  std::string str() const;
  // Decimal rendering with the given number of significant digits.
  std::string decimal(int digits = 30) const;

  std::string to_json() const;
  static Scalar from_json(const std::string& text);

  using Storage = std::variant<Rational, Pi2Poly, Cyclotomic, ComplexAP>;
  const Storage& storage() const { return v_; }

 private:
  Storage v_;
};

// --- number theory helpers ---------------------------------------------

// (2k+1)!! style double factorial of an odd or even integer; n = -1 gives 1.
Integer double_factorial(long n);
Integer factorial(long n);
Integer binomial(long n, long k);
// binomial(x, j) for rational x.
Rational binomial(const Rational& x, long j);
Rational bernoulli(long n);  // B_1 = -1/2 convention
// zeta(2k) as a rational multiple of pi^{2k}.
Scalar zeta_even(long k);
Scalar pi2_power(long p);  // (pi^2)^p

int euler_phi(int r);
// Integer coefficients of the r-th cyclotomic polynomial, low degree first.
std::vector<Integer> cyclotomic_polynomial(int r);
Scalar cyclotomic_root(int r);
// rho^k in Q(rho) for rho of order r, any integer k.
Scalar cyclotomic_power(int r, long k);

inline std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

}  // namespace toprec
