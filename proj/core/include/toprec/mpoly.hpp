#pragma once

#include "toprec/scalar.hpp"

#include <map>
#include <string>
#include <vector>

namespace toprec {

// Sparse multivariate polynomial with rational coefficients. Variables are
// numbered from 0; exponent vectors carry no trailing zeros.
class MPoly {
 public:
  using Exps = std::vector<int>;

  MPoly() = default;
  MPoly(long c);
  MPoly(const Rational& c);
  static MPoly var(int i, int power = 1);
  static MPoly monomial(Exps e, const Rational& c);

  const std::map<Exps, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant() const;
  int nvars() const;  // one past the highest variable that occurs
  int degree(int v) const;
  int total_degree() const;
  // Coefficient of var^power, as a polynomial in the remaining variables.
  MPoly coeff(int v, int power) const;
  // Leading term in lex order (variable 0 most significant).
  std::pair<Exps, Rational> leading() const;

  MPoly& operator+=(const MPoly& o);
  MPoly& operator-=(const MPoly& o);
  MPoly& operator*=(const MPoly& o);
  MPoly operator-() const;
  friend MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
  friend MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
  friend MPoly operator*(const MPoly& a, const MPoly& b);
  friend bool operator==(const MPoly& a, const MPoly& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const MPoly& a, const MPoly& b) { return !(a == b); }

  MPoly pow(int k) const;
  MPoly derivative(int v) const;
  MPoly substitute(int v, const MPoly& value) const;
  // Exact quotient; throws ScalarError when b does not divide *this.
  MPoly divide_exact(const MPoly& b) const;

  Complex evaluate(const std::vector<Complex>& values) const;
  Rational evaluate(const std::vector<Rational>& values) const;

  // Weighted degree set of all monomials.
  std::vector<int> weights(const std::vector<int>& w) const;

  std::string str(const std::vector<std::string>& names) const;

 private:
  static void trim(Exps& e);
  void add_term(Exps e, const Rational& c);
  std::map<Exps, Rational> terms_;
};

// Determinant by fraction-free Gaussian elimination.
MPoly determinant(std::vector<std::vector<MPoly>> m);

}  // namespace toprec
