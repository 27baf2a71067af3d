#pragma once

#include "toprec/engine.hpp"

// One-point curves x = z^r / r, y = z^s, B = dz1 dz2 / (z1 - z2)^2, with a
// single ramification point of order r at z = 0. Indices are Index{0, alpha}
// with d xi_alpha(z) = z^{-alpha-1} dz.
namespace toprec::rs {

struct RSCurve {
  int r = 2;
  int s = 1;
};

// Throws EngineError unless r >= 2, s > 1 - r and gcd(r, s) = 1.
RSCurve make_curve(int r, int s);

// C^(h)_n(alpha_2, ..., alpha_n) as a sum over sheet assignments: sigma_2 is
// the integration sheet, sigma_3..sigma_{n+2h} distinct sheets in 1..r-1.
// Signs of out-legs are carried by the caller (alphas are theta_j alpha_j).
// Returns a rational Scalar when the value lies in Q, cyclotomic otherwise.
Scalar c_coeff(const RSCurve& c, int h, int n, const std::vector<long>& alphas);

// A^(h)_{n|m} with the legs in their printed order: the first in-leg after
// alpha_1 (or the first out-leg, or the first pair) sits on the integration
// sheet. Not symmetric in its in-legs for r > 2.
RecursionOperator a_operator(const RSCurve& c, int n, int m, int h);

// The same residue summed over every choice of leg on the integration sheet,
// with the multiplicities of the set-partition recursion (1/m! over labelled
// out-legs, 1/(2^h' h'!) over pairs away from it). This is what the engine's
// general recursion consumes.
RecursionOperator general_operator(const RSCurve& c, int n, int m, int h);

// Positive-integer tuples (alpha_1, ..., alpha_n) with the given sum.
std::vector<IndexList> compositions(long total, int parts);

Scalar basis_eval(const Index& idx, const Scalar& z);
// Res_0 d xi_alpha * z^{r+s} / (r+s).
Scalar pairing(const RSCurve& c, const Index& idx);

AiryStructure make_structure(const RSCurve& c);

}  // namespace toprec::rs
