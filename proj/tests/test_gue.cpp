#include <gtest/gtest.h>

#include "oracles.hpp"
#include "toprec/gue.hpp"

#include <algorithm>
#include <random>

using namespace toprec;

namespace {

Index at(int a, int d) { return Index{gue::point_of(a), d}; }

const AiryStructure& pure_gue() {
  static AiryStructure q = gue::make_structure(gue::pure());
  return q;
}

Scalar binom3(int k) { return k < 0 || k > 3 ? Scalar(0) : Scalar(Rational(binomial(3, k))); }

std::vector<std::pair<int, int>> cells(int max_level) {
  std::vector<std::pair<int, int>> out;
  for (int level = 1; level <= max_level; ++level)
    for (int g = 0; 2 * g - 2 < level; ++g) {
      int n = level - 2 * g + 2;
      if (n >= 1) out.push_back({g, n});
    }
  return out;
}

gue::Potential random_potential(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-4, 4);
  gue::Potential p;
  p.u[1] = Scalar(1) + Scalar::frac(num(rng), 20);
  p.u[2] = Scalar::frac(num(rng), 20);
  p.u[3] = Scalar::frac(num(rng), 25);
  return p;
}

oracle::GueContour contour(const gue::Potential& p) {
  oracle::GueContour c;
  for (auto& [j, v] : p.u) c.u[j] = v.rational();
  return c;
}

Real rel_err(const Complex& a, const Complex& b) { return abs(a - b) / abs(b); }

}  // namespace

TEST(GueSeries, PureGue) {
  for (int a : {-1, 1}) {
    auto y = gue::y_series(gue::pure(), a, 6);
    for (int k = 0; k <= 6; ++k) EXPECT_EQ(y[k], Scalar((k + 2) * (k + 1) * a));
    auto Y = gue::Y_series(gue::pure(), a, 10);
    for (int k = 0; k <= 10; ++k) EXPECT_EQ(Y[k], Scalar(a * (k % 2 ? -1 : 1)) * binom3(k) / Scalar(2)) << k;
  }
  auto Y = gue::Y_series(gue::pure(), 1, 3);
  EXPECT_EQ(Y, (std::vector<Scalar>{Scalar::frac(1, 2), Scalar::frac(-3, 2), Scalar::frac(3, 2), Scalar::frac(-1, 2)}));
}

TEST(GueSeries, LeadingTermTwoFormulas) {
  gue::Potential p;
  p.u[2] = Scalar(1);
  EXPECT_EQ(gue::y_series(p, -1, 0)[0], Scalar(4));
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto q = random_potential(rng);
    q.u[4] = Scalar::frac(trial - 7, 9);
    for (int a : {-1, 1}) {
      Scalar expect(0);
      for (auto& [j, u] : q.u) expect += Scalar(2 * j) * u * Scalar(a).pow(j);
      EXPECT_EQ(gue::y_series(q, a, 0)[0], expect);
    }
  }
}

TEST(GueSeries, InverseIdentity) {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto q = random_potential(rng);
    for (int a : {-1, 1}) {
      auto y = gue::y_series(q, a, 9);
      auto Y = gue::Y_series(q, a, 9);
      for (int k = 0; k <= 9; ++k) {
        Scalar s(0);
        for (int j = 0; j <= k; ++j) s += y[j] * Y[k - j];
        ASSERT_EQ(s, Scalar(k == 0 ? 1 : 0));
      }
      // composition-sum form for the first orders
      Scalar y0 = y[0];
      EXPECT_EQ(Y[1], -y[1] / y0.pow(2));
      EXPECT_EQ(Y[2], -y[2] / y0.pow(2) + y[1] * y[1] / y0.pow(3));
    }
  }
}

TEST(GueSeries, DegenerateBranchPoint) {
  gue::Potential p;
  p.u[1] = Scalar(1);
  p.u[2] = Scalar::frac(1, 2);  // y_{-1,0} = 2(-1 + 1) = 0
  EXPECT_THROW(gue::Y_series(p, -1, 3), EngineError);
  EXPECT_THROW(gue::make_structure(p), EngineError);
}

TEST(GueCoordinates, RoundTrip) {
  EXPECT_EQ(gue::zeta_of(Scalar(3)), Scalar::frac(1, 2));
  EXPECT_EQ(gue::x_of(Scalar(3)), Scalar::frac(10, 3));
  Scalar zeta = Scalar::frac(1, 2);
  EXPECT_EQ(Scalar(4) / (Scalar(1) - zeta * zeta) - Scalar(2), Scalar::frac(10, 3));
  for (Scalar z : {Scalar(3), Scalar::frac(-2, 7), Scalar::frac(5, 3)}) {
    EXPECT_EQ(gue::z_of(gue::zeta_of(z)), z);
    EXPECT_EQ(gue::x_of(z), gue::x_of(Scalar(1) / z));
    EXPECT_EQ(gue::zeta_of(Scalar(1) / z), -gue::zeta_of(z));
  }
  EXPECT_THROW(gue::zeta_of(Scalar(-1)), PoleError);
}

TEST(GueAbcd, PureClosedForms) {
  auto ops = gue::abcd(gue::pure());
  for (int a : {-1, 1}) {
    EXPECT_EQ(ops.A.value({at(a, 0), at(a, 0), at(a, 0)}, {}), Scalar::frac(-1, 16));
    EXPECT_EQ(ops.D.value({at(a, 1)}, {}), Scalar::frac(-1, 384));
    EXPECT_EQ(ops.D.value({at(a, 0)}, {}), Scalar::frac(3, 128));
  }
  EXPECT_TRUE(ops.A.value({at(1, 0), at(-1, 0), at(1, 0)}, {}).is_zero());
}

TEST(GueAbcd, PureBAndCAgainstSpecializedForms) {
  auto ops = gue::abcd(gue::pure());
  int checked = 0;
  for (int a : {-1, 1})
    for (int a3 : {-1, 1})
      for (int d1 = 0; d1 <= 3; ++d1)
        for (int d2 = 0; d2 <= 3; ++d2)
          for (int d3 = 0; d3 <= 3; ++d3) {
            int k = a * a3 * d3 - d1 - d2 + (1 + a * a3) / 2;
            Scalar expect = k < 0 ? Scalar(0)
                                  : Scalar(-a * a3 * (2 * d3 + 1) * (k % 2 ? -1 : 1)) * binom3(k) /
                                        Scalar(32 * (2 * d1 + 1));
            ASSERT_EQ(ops.B.value({at(a, d1), at(a, d2)}, {at(a3, d3)}), expect);
            if (!expect.is_zero()) ++checked;
          }
  for (int a1 : {-1, 1})
    for (int a2 : {-1, 1})
      for (int a3 : {-1, 1})
        for (int d1 = 0; d1 <= 4; ++d1)
          for (int d2 = 0; d2 <= 2; ++d2)
            for (int d3 = 0; d3 <= 2; ++d3) {
              int k = a1 * a2 * d2 + a1 * a3 * d3 - d1 + 1 + a1 * (a2 + a3) / 2;
              Scalar expect = k < 0 ? Scalar(0)
                                    : Scalar(-a2 * a3 * (2 * d2 + 1) * (2 * d3 + 1) * (k % 2 ? -1 : 1)) * binom3(k) /
                                          Scalar(32 * (2 * d1 + 1));
              ASSERT_EQ(ops.C.value({at(a1, d1)}, {at(a2, d2), at(a3, d3)}), expect);
              if (!expect.is_zero()) ++checked;
            }
  EXPECT_GE(checked, 10);
}

TEST(GueAbcd, GenericDMatchesY) {
  std::mt19937 rng(8);
  auto p = random_potential(rng);
  auto ops = gue::abcd(p);
  for (int a : {-1, 1}) {
    auto Y = gue::Y_series(p, a, 2);
    EXPECT_EQ(ops.D.value({at(a, 0)}, {}), Scalar::frac(-a, 64) * Y[1]);
    EXPECT_EQ(ops.D.value({at(a, 1)}, {}), Scalar::frac(-a, 192) * Y[0]);
  }
}

TEST(GueAbcd, CandidatesAreSound) {
  std::mt19937 rng(9);
  auto ops = gue::abcd(random_potential(rng));
  for (int a3 : {-1, 1})
    for (int d3 = 0; d3 <= 3; ++d3) {
      auto c = ops.B.candidates({at(a3, d3)});
      for (int a : {-1, 1})
        for (int b : {-1, 1})
          for (int d1 = 0; d1 <= 6; ++d1)
            for (int d2 = 0; d2 <= 6; ++d2) {
              IndexList in{at(a, d1), at(b, d2)};
              if (std::find(c.begin(), c.end(), in) == c.end())
                EXPECT_TRUE(ops.B.value(in, {at(a3, d3)}).is_zero());
            }
    }
  for (int a2 : {-1, 1})
    for (int a3 : {-1, 1}) {
      IndexList out{at(a2, 1), at(a3, 2)};
      auto c = ops.C.candidates(out);
      for (int a1 : {-1, 1})
        for (int d1 = 0; d1 <= 10; ++d1)
          if (std::find(c.begin(), c.end(), IndexList{at(a1, d1)}) == c.end())
            EXPECT_TRUE(ops.C.value({at(a1, d1)}, out).is_zero());
    }
}

TEST(GueBasis, Values) {
  EXPECT_EQ(gue::xi(at(1, 0), Scalar(3)), Scalar(2));
  EXPECT_EQ(gue::basis_eval(at(1, 0), Scalar(3)), Scalar::frac(-1, 2));  // d/dz (z+1)/(z-1)
  EXPECT_EQ(gue::basis_eval(at(-1, 0), Scalar(3)), Scalar::frac(1, 8));  // d/dz (z-1)/(z+1)
  EXPECT_THROW(gue::basis_eval(at(1, 0), Scalar(1)), PoleError);
  EXPECT_THROW(gue::basis_eval(at(-1, 2), Scalar(-1)), PoleError);
  // d xi(1/z) = -d xi(z)
  for (int d = 0; d < 3; ++d) {
    Scalar z = Scalar::frac(5, 2);
    Scalar lhs = gue::basis_eval(at(1, d), Scalar(1) / z) * (Scalar(-1) / (z * z));
    EXPECT_EQ(lhs, -gue::basis_eval(at(1, d), z));
  }
}

TEST(GueBasis, PairingMatchesNumericResidue) {
  std::mt19937 rng(10);
  for (int trial = 0; trial < 2; ++trial) {
    auto p = trial == 0 ? gue::pure() : random_potential(rng);
    auto c = contour(p);
    for (int a : {-1, 1})
      for (int k = 0; k <= 3; ++k) {
        Complex num = oracle::gue_pairing(c, a, k);
        Complex exact = gue::pairing(p, at(a, k)).to_complex(256);
        EXPECT_LT(abs(num - exact), Real("1e-30")) << a << "," << k;
      }
  }
}

// Pure GUE against the genus expansion of Gaussian moments: omega_{g,1}/dx is
// sum_k eps_g(k) x^{-2k-1}, eps_1 = 1, 10, 70, ..., eps_2 = 21, 483, ...
TEST(GueMaps, OnePointFunctions) {
  auto one = [](const Scalar& z) {
    Scalar w = z - Scalar(1) / z, dx = Scalar(1) - Scalar(1) / (z * z), x = z + Scalar(1) / z;
    return std::make_tuple(w, dx, x);
  };
  for (Scalar z : {Scalar(2), Scalar::frac(7, 3), Scalar(-3)}) {
    auto [w, dx, x] = one(z);
    EXPECT_EQ(omega_eval(pure_gue(), 1, 1, {z}), dx / w.pow(5));
    EXPECT_EQ(omega_eval(pure_gue(), 2, 1, {z}), Scalar(21) * (x * x + Scalar(1)) * dx / w.pow(11));
  }
  EXPECT_EQ(omega_eval(pure_gue(), 1, 1, {Scalar(2)}), Scalar::frac(8, 81));
  EXPECT_EQ(omega_eval(pure_gue(), 2, 1, {Scalar(2)}), Scalar::frac(25984, 19683));
}

TEST(GueMaps, FreeEnergies) {
  // B_{2g} / (2g (2g - 2))
  EXPECT_EQ(free_energy(pure_gue(), 2), Scalar::frac(-1, 240));
  EXPECT_EQ(free_energy(pure_gue(), 3), Scalar::frac(1, 1008));
}

TEST(GueResidue, BaseCellsMatchContourIntegrals) {
  PrecisionScope ps(256);
  std::mt19937 rng(21);
  std::vector<Scalar> pts{Scalar(3), Scalar::frac(-5, 2), Scalar::frac(7, 3)};
  for (int trial = 0; trial < 3; ++trial) {
    auto p = random_potential(rng);
    auto q = gue::make_structure(p);
    auto c = contour(p);
    std::vector<Complex> zc;
    for (auto& z : pts) zc.push_back(z.to_complex(256));
    Complex w03 = oracle::gue_w03(c, zc[0], zc[1], zc[2]);
    Complex w11 = oracle::gue_w11(c, zc[0]);
    EXPECT_LT(rel_err(omega_eval(q, 0, 3, pts).to_complex(256), w03), Real("1e-25")) << p.str();
    EXPECT_LT(rel_err(omega_eval(q, 1, 1, {pts[0]}).to_complex(256), w11), Real("1e-25")) << p.str();
    // a second radius must give the same residue
    c.radius = mpq_class(1, 40);
    EXPECT_LT(rel_err(oracle::gue_w03(c, zc[0], zc[1], zc[2]), w03), Real("1e-25"));
  }
}

TEST(GueEngine, FullSymmetry) {
  std::mt19937 rng(30);
  auto q = gue::make_structure(random_potential(rng));
  for (auto [g, n] : cells(4)) {
    auto f = q.F(g, n);
    for (auto& [k, v] : f.entries()) {
      auto perm = k;
      std::sort(perm.begin(), perm.end());
      do {
        ASSERT_EQ(f.at(perm), v) << g << "," << n;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
}

TEST(GueEngine, Homogeneity) {
  std::mt19937 rng(31);
  auto p = random_potential(rng);
  auto q = gue::make_structure(p), q3 = gue::make_structure(p.scaled(Scalar(3)));
  for (auto [g, n] : cells(4)) {
    auto f = q.F(g, n), f3 = q3.F(g, n);
    ASSERT_EQ(f.size(), f3.size());
    Scalar factor = Scalar(3).pow(2 - 2 * g - n);
    for (auto& [k, v] : f.entries()) ASSERT_EQ(f3.at(k), factor * v);
  }
}

TEST(GueEngine, EvenPotentialFlipSymmetry) {
  gue::Potential p;
  p.u[1] = Scalar(1);
  p.u[3] = Scalar::frac(-1, 12);
  auto q = gue::make_structure(p);
  for (auto [g, n] : cells(4)) {
    auto f = q.F(g, n);
    std::vector<Rational> direct, flipped;
    for (auto& [k, v] : f.entries()) {
      direct.push_back(abs(v.rational()));
      IndexList fk = k;
      for (auto& i : fk) i.point = 1 - i.point;
      flipped.push_back(abs(f.at(fk).rational()));
    }
    std::sort(direct.begin(), direct.end());
    std::sort(flipped.begin(), flipped.end());
    EXPECT_EQ(direct, flipped) << g << "," << n;
  }
}

TEST(GueEngine, GeneralRecursionAgrees) {
  for (auto [g, n] : cells(4))
    EXPECT_EQ(pure_gue().F(g, n, Method::abcd).to_json(pure_gue().points),
              pure_gue().F(g, n, Method::general).to_json(pure_gue().points));
}
