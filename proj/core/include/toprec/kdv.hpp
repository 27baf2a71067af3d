#pragma once

#include "toprec/engine.hpp"

#include <map>

namespace toprec::kdv {

// Odd-indexed KdV times. Either a finite table or a generator rule.
struct KdVTimes {
  std::map<int, Scalar> table;
  std::function<Scalar(int)> rule;  // used for indices absent from the table when set
  std::string name = "kdv";
  std::map<std::string, std::string> params;

  Scalar at(int k) const;
  bool finite() const { return !rule; }
  int last_nonzero() const;  // only for finite tables
  KdVTimes scaled(const Scalar& lambda) const;
};

KdVTimes airy();
KdVTimes painleve1(const Scalar& u);
KdVTimes weil_petersson();
KdVTimes minimal_model(int p, const std::map<int, Scalar>& coefficients);
// Parses "3:-2,5:1/3".
KdVTimes parse_times(const std::string& text);

// T_0..T_kmax by power-series inversion.
std::vector<Scalar> t_series(const KdVTimes& times, int kmax);
// T_k from the signed composition sum; exponential cost, kept for checking.
Scalar t_composition(const KdVTimes& times, int k);

std::map<int, Scalar> kdv_to_kp(const KdVTimes& times);

struct Operators {
  RecursionOperator A, B, C, D;
};
Operators abcd(const KdVTimes& times);

Scalar basis_eval(const Index& idx, const Scalar& z);
Scalar pairing(const KdVTimes& times, const Index& idx);

AiryStructure make_structure(const KdVTimes& times);

}  // namespace toprec::kdv
