#pragma once

#include "toprec/engine.hpp"
#include "toprec/mpoly.hpp"

#include <map>
#include <memory>

// Plane curves P(x, y) = sum P_ij x^i y^j = 0 with simple branch points.
// Exact layer: MPoly in the variables below (t is an optional parameter).
// Numeric layer: ComplexPoly2 in (x, y) once t is fixed.
namespace toprec::newton {

enum Var : int { kX = 0, kY = 1, kT = 2, kX2 = 3, kY2 = 4, kXA = 5, kYA = 6 };

struct PlanePolynomial {
  MPoly poly;  // in x, y and possibly t
  std::string param = "t";

  // Accepts "x^3+y^3+t*x*y+1", "y^2-x", "2/3*x*y^2 - 1/2*t^2*x".
  static PlanePolynomial parse(const std::string& text, const std::string& param = "t");
  bool has_param() const { return poly.degree(kT) > 0; }
  PlanePolynomial specialize(const Rational& t) const;
  // Support N in the (i, j) plane; coefficients are polynomials in t.
  std::map<std::pair<int, int>, MPoly> coeffs() const;
  int deg_x() const { return poly.degree(kX); }
  int deg_y() const { return poly.degree(kY); }
  std::string str() const;
};

using Lattice = std::pair<int, int>;

// Lattice points strictly inside the convex hull of the support.
std::vector<Lattice> interior(const PlanePolynomial& P);

// Resultant of P and P_y in y, from the Sylvester matrix; polynomial in x (and t).
MPoly discriminant(const PlanePolynomial& P);

// U with U * P_y^2 = Delta mod P, reduced to deg_y U < deg_y P. Needs a
// constant leading coefficient in y.
MPoly u_poly(const PlanePolynomial& P);

// Remainder of f modulo P as a polynomial in y (P's y-leading coefficient
// must be a nonzero rational).
MPoly reduce_mod(const MPoly& f, const PlanePolynomial& P);

// S_{(i,j),(i',j')} on interior points; monomial x^{i-1} y^{j-1} x'^{i'-1} y'^{j'-1}.
using SCoeffs = std::map<std::pair<Lattice, Lattice>, Rational>;

struct BKernelData {
  MPoly Q;  // in x, y, t, x', y'
  MPoly S;
  MPoly U;
};

MPoly q_poly(const PlanePolynomial& P);
MPoly s_poly(const PlanePolynomial& P, const SCoeffs& s);
BKernelData q_kernel(const PlanePolynomial& P, const SCoeffs& s = {});

// R_{a,0} with x_a, y_a kept as the symbols kXA, kYA.
MPoly r0_symbolic(const PlanePolynomial& P, const BKernelData& k);

// Dense polynomial in x, y with complex coefficients: c[i][j] x^i y^j.
class ComplexPoly2 {
 public:
  ComplexPoly2() = default;
  ComplexPoly2(int dx, int dy);
  // Evaluates every variable other than x, y (t, x_a, y_a) at the given values.
  static ComplexPoly2 from(const MPoly& p, const std::map<int, Complex>& values);

  int dx() const { return static_cast<int>(c_.size()) - 1; }
  int dy() const { return c_.empty() ? -1 : static_cast<int>(c_[0].size()) - 1; }
  Complex& at(int i, int j);
  Complex get(int i, int j) const;

  ComplexPoly2& operator+=(const ComplexPoly2& o);
  ComplexPoly2& operator-=(const ComplexPoly2& o);
  friend ComplexPoly2 operator+(ComplexPoly2 a, const ComplexPoly2& b) { return a += b; }
  friend ComplexPoly2 operator-(ComplexPoly2 a, const ComplexPoly2& b) { return a -= b; }
  friend ComplexPoly2 operator*(const ComplexPoly2& a, const ComplexPoly2& b);
  ComplexPoly2 operator*(const Complex& s) const;

  ComplexPoly2 dX() const;
  ComplexPoly2 dY() const;
  Complex operator()(const Complex& x, const Complex& y) const;
  // Value on truncated series x(w), y(w), up to w^order.
  std::vector<Complex> on_series(const std::vector<Complex>& x, const std::vector<Complex>& y, int order) const;
  // Remainder modulo p (monic up to a constant in y).
  ComplexPoly2 reduce(const ComplexPoly2& p) const;
  // Quotient by (x - x0) of each y-coefficient; `rem` gets the largest
  // remainder modulus relative to the coefficient scale.
  ComplexPoly2 divide_linear(const Complex& x0, Real* rem) const;
  Real norm() const;

 private:
  void grow(int dx, int dy);
  std::vector<std::vector<Complex>> c_;
};

struct RamificationDatum {
  Complex x, y;
  Complex c;                   // -P_yy(a) / (2 P_x(a))
  std::vector<Complex> ylocal; // y = sum ylocal[k] zeta^k, ylocal[1] = 1
  Complex px, pyy;
};

// Branch points from the roots of Delta, refined on (P, P_y) = 0.
std::vector<RamificationDatum> ramification_points(const PlanePolynomial& P, unsigned bits);

// y_{a,k}, k = 0..kmax, from solving P(x_a + c zeta^2, y(zeta)) = 0 order by order.
std::vector<Complex> local_y_expansion(const PlanePolynomial& P, const RamificationDatum& a, int kmax);
// The closed recursion over 3 <= 2p+q <= k+1. With `with_square` the
// (p, q) = (0, 2) cross terms y_j y_l (j, l >= 2) are kept as well.
std::vector<Complex> local_y_recursion(const PlanePolynomial& P, const RamificationDatum& a, int kmax,
                                       bool with_square);

// B / (dx dx') at two distinct on-curve points.
Complex b_kernel_eval(const PlanePolynomial& P, const BKernelData& k, const Complex& x, const Complex& y,
                      const Complex& x2, const Complex& y2);

struct CurveOptions {
  unsigned bits = 256;
  int kmax = 6;                  // largest basis degree
  SCoeffs s;
  bool printed_correction = false;  // (x-x_a)^k instead of (x-x_a)^{k+1} in the b != a term
};

// All numeric data of one curve: branch points, kernel, R_{a,k} and the local
// expansions of the basis at every branch point.
class Curve {
 public:
  Curve(const PlanePolynomial& P, CurveOptions opts = {});

  const PlanePolynomial& poly() const { return P_; }
  const BKernelData& kernel() const { return kernel_; }
  const std::vector<RamificationDatum>& points() const { return points_; }
  const CurveOptions& options() const { return opts_; }
  int kmax() const { return opts_.kmax; }
  // Unnormalized R_{a,k}, reduced modulo P.
  const ComplexPoly2& R(int a, int k) const { return R_.at(a).at(k); }
  // Largest remainder seen when dividing by (x - x_b) in the recursion.
  const Real& division_defect() const { return defect_; }

  // d xi_{a,k} / dx at an on-curve point, normalized so that d xi_{a,0} ~ d zeta / zeta^2.
  Complex dxi_dx(int a, int k, const Complex& x, const Complex& y) const;
  Complex b_eval(const Complex& x, const Complex& y, const Complex& x2, const Complex& y2) const;

  // Laurent coefficients of d xi_{b,k} / d zeta_a around branch point a:
  // entry i is the coefficient of zeta^{i + low}, low = -2k-2 for b == a.
  struct Laurent {
    int low = 0;
    std::vector<Complex> c;
    Complex at(int power) const;
  };
  const Laurent& local(int a, int b, int k) const { return local_.at({a, b, k}); }
  // Number of trustworthy orders above the lowest in local().
  int local_order() const { return order_; }
  // x(zeta), y(zeta) around a.
  std::vector<Complex> x_series(int a) const;
  std::vector<Complex> y_series(int a) const;

 private:
  void build_R();
  void build_local();

  PlanePolynomial P_;
  CurveOptions opts_;
  BKernelData kernel_;
  std::vector<RamificationDatum> points_;
  ComplexPoly2 p_, px_, py_, pxy_, pyy_, u_;
  std::vector<Complex> delta_;  // Delta(x) coefficients
  std::map<int, std::vector<ComplexPoly2>> R_;
  std::map<std::tuple<int, int, int>, Laurent> local_;
  std::vector<Complex> norm_;  // -1 / P_x(a)
  int order_ = 0;
  Real defect_ = 0;
};

struct Operators {
  RecursionOperator A, B, C, D;
};

// A, B, C, D by residues at each branch point, in the basis d xi_{a,k}.
// Index{a, k} is d xi_{a,k}; in-legs are limited to k <= kmax.
Operators newton_abcd(std::shared_ptr<const Curve> curve);

AiryStructure make_structure(std::shared_ptr<const Curve> curve);

// omega_{g,n} / (dx_1 ... dx_n) at on-curve points from the F tensor.
Complex omega_at(const AiryStructure& q, const Curve& curve, int g, const std::vector<std::pair<Complex, Complex>>& pts);

}  // namespace toprec::newton
