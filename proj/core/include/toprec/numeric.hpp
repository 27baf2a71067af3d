#pragma once

#include "toprec/scalar.hpp"

#include <vector>

namespace toprec {

// All roots of sum_i c[i] x^i (c.back() != 0) by Aberth iteration, then
// Newton polishing at the working precision.
std::vector<Complex> poly_roots(const std::vector<Complex>& c, unsigned bits);

// Value and derivative of sum_i c[i] x^i.
std::pair<Complex, Complex> poly_eval(const std::vector<Complex>& c, const Complex& x);

// Arithmetic-geometric mean with the "right" square root choice at each step.
Complex agm(Complex a, Complex b, unsigned bits);

// 2^-bits relative to max(1, |scale|).
Real tolerance(unsigned bits, const Real& scale);

}  // namespace toprec
