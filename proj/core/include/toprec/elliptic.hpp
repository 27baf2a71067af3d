#pragma once

#include "toprec/engine.hpp"
#include "toprec/mpoly.hpp"

#include <array>
#include <functional>

// Elliptic curves parametrized by the torus C / (Z + tau Z).
namespace toprec::elliptic {

// ---- Q polynomials: wp^{(2k)} = (2k+1)! Q_k(wp) ----------------------------
// Variables: x -> 0, and the formal Eisenstein value G_{2l} -> l - 1
// (so G4 -> 1, G6 -> 2, G8 -> 3, ...).
inline constexpr int kVarX = 0;
MPoly g_var(int l);  // G_{2l}, l >= 2

// From the differential recursion; involves x, G4, G6 only. Thread-safe cache.
const MPoly& q_poly(int k);
// Coefficient extraction from ln(z^2 wp(z) - z^2 x), in formal G4..G_{2k+2}.
// `printed_limits` truncates the inner sums at l <= k - j (and l <= k for the
// constant term) instead of l <= k + 1 - j; kept to exhibit the difference.
MPoly q_poly_explicit(int k, bool printed_limits = false);
MPoly q_poly_alpha(int k, int j, bool printed_limits = false);

// G_{2n}, n >= 4, as a polynomial in G4, G6 from the convolution recurrence
// (2n+1)(n-3) c_n = 3 sum_{m=2}^{n-2} c_m c_{n-m}, c_n = (2n-1) G_{2n}.
MPoly eisenstein_classical(int n);
// Relations forced by q_poly(k) == q_poly_explicit(k) for k = 3..kmax: each
// step fixes G_{2k+2}. Throws EngineError if any other coefficient disagrees.
std::map<int, MPoly> induced_relations(int kmax);
// Substitutes G_{2n} -> rel[n] (repeatedly, highest first).
MPoly reduce_eisenstein(const MPoly& p, const std::map<int, MPoly>& rel);

// ---- numeric lattice data ------------------------------------------------

// G_{2k} by q-expansion. Throws EngineError when Im tau <= 0 or k < 2.
Complex eisenstein(int two_k, const Complex& tau, unsigned bits);

// Half-period codes: 1 -> 1/2, 2 -> tau/2, 3 -> (1+tau)/2; differences add mod 2
// componentwise, i.e. XOR on codes.
struct Lattice {
  bool has_tau = false;
  Complex tau;
  Complex q;         // e^{2 pi i tau}
  Complex wp_const;  // (2 pi i)^2 (1/12 - 2 sum q^n/(1-q^n)^2)
  unsigned bits = kDefaultPrecision;
  Complex G4, G6;
  std::array<Complex, 4> e;  // e[code] = wp(half period); e[0] unused
  std::vector<Complex> G;    // G[n] = G_{2n} for 2 <= n < G.size()

  Complex Geis(int n) const;  // G_{2n}, n >= 2
};
Lattice lattice_from_tau(const Complex& tau, unsigned bits);
// Roots of x^3 - 15 G4 x - 35 G6 assigned to codes 1..3 in lexicographic
// (re, im) order; wp evaluation is unavailable for such lattices.
Lattice lattice_from_invariants(const Complex& G4, const Complex& G6, unsigned bits);

Complex wp(const Lattice& L, const Complex& z);
Complex wp_prime(const Lattice& L, const Complex& z);
Complex wp_second(const Lattice& L, const Complex& z);
// Weierstrass zeta without lattice reduction; needs |Im z| < Im tau.
Complex zeta(const Lattice& L, const Complex& z);
Complex half_period(const Lattice& L, int code);

Complex q_eval(int k, const Complex& x, const Lattice& L);
// wp_hat^{(2d)} at the half period `code`: (2d+1)! Q_d(e_code) + delta_{d,0} G2.
Complex wp_hat_half(const Lattice& L, const Complex& G2, int d, int code);

// ---- Y series ---------------------------------------------------------------
// Y_{a,k}: 1/((y(z) - y(2a - z)) x'(z)) = sum_k Y_{a,k} (z-a)^{2k-2}.

// x = wp(z), y = wp'(z), a the half period `code` (1..3).
std::vector<Complex> weierstrass_Y(const Lattice& L, int code, int kmax);
// Composition sum over compositions of k. `printed` uses Q_{k+1} in place of
// (2k+3)(2k+2) Q_{k+1}, which agrees with the series only at k = 0 after the
// separate 1/72 normalization.
std::vector<Complex> weierstrass_Y_composition(const Lattice& L, int code, int kmax, bool printed = false);

struct Legendre {
  Complex k2;  // modulus squared
  Complex K;   // complete integral via AGM
  Complex e1, e2, e3;  // wp(1/2), wp((1+tau)/2), wp(tau/2)
};
// L is the lattice of tau = i K'/K. Throws EngineError when k^2 is 0 or 1.
Legendre legendre_modulus(const Lattice& L);
// x = sn(2 m K z), y = cn dn. `code` 1 selects the cn zero, 3 the dn zero.
std::vector<Complex> legendre_Y(const Lattice& L, int code, int m, int kmax);
// The U / U-tilde product form. With `printed`, the literal weights: no
// 1/(4mK) prefactor and Q_j in place of (2j+1) m^{2j} Q_j.
std::vector<Complex> legendre_Y_composition(const Lattice& L, int code, int m, int kmax, bool printed = false);

// (beta/C) sum_{k0+...+k4=k} Yw_{k0} prod_i (Q_{k_i}(wp_a) - delta_{k_i,0} wpz_i).
std::vector<Complex> painleve6_Y_compose(const std::vector<Complex>& Yw, const Complex& wp_a,
                                         const std::array<Complex, 4>& wpz, const Complex& beta,
                                         const Complex& C, const Lattice& L, int kmax);

// ---- curves and operators ---------------------------------------------------

struct Curve {
  std::string family;
  std::map<std::string, std::string> params;
  Lattice torus;  // lattice carrying B = (wp(z1-z2) + G2) dz1 dz2
  Complex G2;
  Complex shift;            // ramification point p sits at shift + half_period(codes[p])
  std::vector<int> codes;   // per point
  std::vector<std::string> names;
  std::function<std::vector<Complex>(int point, int kmax)> Y;

  Complex point(int p) const;
};

Curve weierstrass_curve(const Complex& tau, const Complex& G2, unsigned bits);
// x = sn(4Kw), y = cn dn on C / (Z + (tau/2) Z); four ramification points.
Curve legendre_curve(const Complex& tau, const Complex& G2, unsigned bits);

struct Operators {
  RecursionOperator A, B, C, D;
};
// cross_b_half selects the halved cross-point B coefficient.
Operators abcd(const Curve& c, bool cross_b_half = false);

// d xi_{a,d}/dz = wp_hat^{(2d)}(z - a).
Complex basis_value(const Curve& c, const Index& idx, const Complex& z);
// Res_a F_{0,1} d xi_{a,d} from the Y series.
Complex pairing(const Curve& c, const Index& idx);

AiryStructure make_structure(const Curve& c);

// Parses "2i", "0.5+1.2i", "i", "-0.3".
Complex parse_complex(const std::string& text, unsigned bits);
std::string complex_str(const Complex& z, int digits = 20);

}  // namespace toprec::elliptic
