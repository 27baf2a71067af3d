#pragma once

#include "toprec/engine.hpp"

#include <map>

// One-cut matrix model curve x = z + 1/z, y = sum_j u_j z^{-j}.
// Branch points a = -1 (point id 0, name "-1") and a = +1 (point id 1, name "+1").
namespace toprec::gue {

struct Potential {
  std::map<int, Scalar> u;  // j >= 1 -> u_j

  Scalar at(int j) const;
  Potential scaled(const Scalar& lambda) const;
  std::string str() const;
};

Potential pure();
// Parses "1:1,2:-1/4".
Potential parse_potential(const std::string& text);

inline int sign_of(const Index& i) { return i.point == 0 ? -1 : 1; }
inline int point_of(int a) { return a < 0 ? 0 : 1; }

// zeta = (z-1)/(z+1) and back; x = z + 1/z.
Scalar zeta_of(const Scalar& z);
Scalar z_of(const Scalar& zeta);
Scalar x_of(const Scalar& z);

std::vector<Scalar> y_series(const Potential& pot, int a, int kmax);
std::vector<Scalar> Y_series(const Potential& pot, int a, int kmax);

struct Operators {
  RecursionOperator A, B, C, D;
};
Operators abcd(const Potential& pot);

// xi_{a,k}(z) and d xi_{a,k}/dz.
Scalar xi(const Index& idx, const Scalar& z);
Scalar basis_eval(const Index& idx, const Scalar& z);
// Res_a F_{0,1} d xi_{a,k}, computed as -Res_a xi_{a,k} y dx by series expansion in zeta.
Scalar pairing(const Potential& pot, const Index& idx);

AiryStructure make_structure(const Potential& pot);

}  // namespace toprec::gue
