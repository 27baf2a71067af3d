#include "toprec/gue.hpp"

#include "toprec/series.hpp"

#include <mutex>
#include <sstream>

namespace toprec::gue {

Scalar Potential::at(int j) const {
  auto it = u.find(j);
  return it == u.end() ? Scalar(0) : it->second;
}

Potential Potential::scaled(const Scalar& lambda) const {
  Potential p = *this;
  for (auto& [j, v] : p.u) v *= lambda;
  return p;
}

std::string Potential::str() const {
  std::string s;
  for (auto& [j, v] : u) {
    if (v.is_zero()) continue;
    if (!s.empty()) s += ",";
    s += std::to_string(j) + ":" + v.str();
  }
  return s;
}

Potential pure() {
  Potential p;
  p.u[1] = Scalar(1);
  return p;
}

Potential parse_potential(const std::string& text) {
  Potential p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw EngineError("bad potential entry '" + item + "'");
    int j = std::stoi(item.substr(0, colon));
    if (j < 1) throw EngineError("potential indices start at 1");
    Rational q;
    if (q.set_str(item.substr(colon + 1), 10) != 0 || q.get_den() == 0) throw EngineError("bad rational in '" + item + "'");
    q.canonicalize();
    p.u[j] = Scalar(q);
  }
  return p;
}

Scalar zeta_of(const Scalar& z) {
  if ((z + Scalar(1)).is_zero()) throw PoleError("zeta is infinite at z = -1");
  return (z - Scalar(1)) / (z + Scalar(1));
}

Scalar z_of(const Scalar& zeta) {
  if ((Scalar(1) - zeta).is_zero()) throw PoleError("z is infinite at zeta = 1");
  return (Scalar(1) + zeta) / (Scalar(1) - zeta);
}

Scalar x_of(const Scalar& z) {
  if (z.is_zero()) throw PoleError("x has a pole at z = 0");
  return z + Scalar(1) / z;
}

std::vector<Scalar> y_series(const Potential& pot, int a, int kmax) {
  std::vector<Scalar> y(kmax + 1, Scalar(0));
  for (auto& [j, uj] : pot.u) {
    if (uj.is_zero()) continue;
    Scalar c = (a < 0 && j % 2) ? -uj : uj;
    for (int k = 0; k <= kmax; ++k) {
      Integer s = 0;
      for (int l = 0; l <= std::min(j - 1, k); ++l) s += binomial(2 * j, 2 * l + 1) * binomial(j + 1 + k - l, j + 1);
      y[k] += c * Scalar(Rational(s));
    }
  }
  return y;
}

std::vector<Scalar> Y_series(const Potential& pot, int a, int kmax) {
  auto y = y_series(pot, a, kmax);
  if (y[0].is_zero()) throw EngineError("degenerate branch point at a = " + std::to_string(a));
  return series_inverse(y, kmax);
}

namespace {

struct YTable {
  Potential pot;
  std::mutex mu;
  std::vector<Scalar> Y[2];

  explicit YTable(Potential p) : pot(std::move(p)) {
    for (int a : {-1, 1}) Y[point_of(a)] = Y_series(pot, a, 8);
  }
  Scalar get(int a, int k) {
    if (k < 0) return Scalar(0);
    std::lock_guard<std::mutex> lock(mu);
    auto& t = Y[point_of(a)];
    if (k >= static_cast<int>(t.size())) t = Y_series(pot, a, std::max(k, 2 * static_cast<int>(t.size())));
    return t[k];
  }
};

Scalar odd(int d) { return Scalar(2 * d + 1); }

}  // namespace

Operators abcd(const Potential& pot) {
  auto tab = std::make_shared<YTable>(pot);
  Operators ops;

  ops.A.n = 3;
  ops.A.labels_in = {"a1", "a2", "a3"};
  ops.A.candidates = [](const IndexList&) {
    std::vector<IndexList> c;
    for (int p : {0, 1}) c.push_back({Index{p, 0}, Index{p, 0}, Index{p, 0}});
    return c;
  };
  ops.A.value = [tab](const IndexList& in, const IndexList&) {
    int p = in[0].point;
    for (auto& i : in)
      if (i.point != p || i.degree != 0) return Scalar(0);
    int a = sign_of(in[0]);
    return Scalar::frac(-a, 8) * tab->get(a, 0);
  };

  ops.D.n = 1;
  ops.D.h = 1;
  ops.D.labels_in = {"a1"};
  ops.D.candidates = [](const IndexList&) {
    std::vector<IndexList> c;
    for (int p : {0, 1})
      for (int d : {0, 1}) c.push_back({Index{p, d}});
    return c;
  };
  ops.D.value = [tab](const IndexList& in, const IndexList&) {
    int a = sign_of(in[0]);
    if (in[0].degree == 0) return Scalar::frac(-a, 64) * tab->get(a, 1);
    if (in[0].degree == 1) return Scalar::frac(-a, 192) * tab->get(a, 0);
    return Scalar(0);
  };

  // B[a,d1; a,d2 | a3,d3]: both in-legs sit at the same branch point.
  ops.B.n = 2;
  ops.B.m = 1;
  ops.B.labels_in = {"a1", "a2"};
  ops.B.labels_out = {"b"};
  ops.B.candidates = [](const IndexList& out) {
    std::vector<IndexList> c;
    int a3 = sign_of(out[0]), d3 = out[0].degree;
    for (int a : {-1, 1}) {
      int p = point_of(a);
      if (a == a3) {
        for (int d1 = 0; d1 <= d3 + 1; ++d1)
          for (int d2 = 0; d1 + d2 <= d3 + 1; ++d2) c.push_back({Index{p, d1}, Index{p, d2}});
      } else if (d3 == 0) {
        c.push_back({Index{p, 0}, Index{p, 0}});
      }
    }
    return c;
  };
  ops.B.value = [tab](const IndexList& in, const IndexList& out) {
    if (in[0].point != in[1].point) return Scalar(0);
    int a = sign_of(in[0]), a3 = sign_of(out[0]);
    int d1 = in[0].degree, d2 = in[1].degree, d3 = out[0].degree;
    int k = a * a3 * d3 - d1 - d2 + (1 + a * a3) / 2;
    if (k < 0) return Scalar(0);
    Scalar Y = tab->get(a, k);
    if (Y.is_zero()) return Y;
    return Scalar(-a3) * odd(d3) * Y / (Scalar(16) * odd(d1));
  };

  ops.C.n = 1;
  ops.C.m = 2;
  ops.C.labels_in = {"a1"};
  ops.C.labels_out = {"b1", "b2"};
  auto top = [](int a1, const IndexList& out) {
    int a2 = sign_of(out[0]), a3 = sign_of(out[1]);
    return a1 * a2 * out[0].degree + a1 * a3 * out[1].degree + 1 + a1 * (a2 + a3) / 2;
  };
  ops.C.candidates = [top](const IndexList& out) {
    std::vector<IndexList> c;
    for (int a1 : {-1, 1})
      for (int d1 = 0; d1 <= top(a1, out); ++d1) c.push_back({Index{point_of(a1), d1}});
    return c;
  };
  ops.C.value = [tab, top](const IndexList& in, const IndexList& out) {
    int a1 = sign_of(in[0]), a2 = sign_of(out[0]), a3 = sign_of(out[1]);
    int k = top(a1, out) - in[0].degree;
    if (k < 0) return Scalar(0);
    Scalar Y = tab->get(a1, k);
    if (Y.is_zero()) return Y;
    return Scalar(-a1 * a2 * a3) * odd(out[0].degree) * odd(out[1].degree) * Y / (Scalar(16) * odd(in[0].degree));
  };
  return ops;
}

Scalar xi(const Index& idx, const Scalar& z) {
  if ((z - Scalar(1)).is_zero() || (z + Scalar(1)).is_zero()) throw PoleError("GUE basis has poles at z = +-1");
  Scalar zeta = zeta_of(z);
  long e = -sign_of(idx) * (2L * idx.degree + 1);
  return zeta.pow(e);
}

Scalar basis_eval(const Index& idx, const Scalar& z) {
  if ((z - Scalar(1)).is_zero() || (z + Scalar(1)).is_zero()) throw PoleError("GUE basis has poles at z = +-1");
  int a = sign_of(idx);
  long e = -a * (2L * idx.degree + 1);
  Scalar zeta = zeta_of(z);
  Scalar dzeta = Scalar(2) / (z + Scalar(1)).pow(2);
  return Scalar(e) * zeta.pow(e - 1) * dzeta;
}

Scalar pairing(const Potential& pot, const Index& idx) {
  int k = idx.degree;
  if (k == 0) return Scalar(0);
  int a = sign_of(idx);
  int order = 2 * k - 1;
  // r(w) = (1-w)/(1+w), f(w) = sum_j u_j a^j r^j / (1-w^2)^2
  std::vector<Scalar> r(order + 1, Scalar(0)), inv1w2(order + 1, Scalar(0));
  r[0] = Scalar(1);
  for (int i = 1; i <= order; ++i) r[i] = Scalar(i % 2 ? -2 : 2);
  for (int i = 0; 2 * i <= order; ++i) inv1w2[2 * i] = Scalar(i + 1);
  std::vector<Scalar> f(order + 1, Scalar(0));
  for (auto& [j, uj] : pot.u) {
    if (uj.is_zero()) continue;
    auto rj = series_pow(r, j, order);
    Scalar c = (a < 0 && j % 2) ? -uj : uj;
    for (int i = 0; i <= order; ++i) f[i] += c * rj[i];
  }
  f = series_mul(f, inv1w2, order);
  return Scalar(-8 * a) * f[order];
}

AiryStructure make_structure(const Potential& pot) {
  for (int a : {-1, 1})
    if (y_series(pot, a, 0)[0].is_zero()) throw EngineError("degenerate branch point at a = " + std::to_string(a));
  AiryStructure q;
  q.family = "gue";
  q.params["potential"] = pot.str();
  q.points.names = {"-1", "+1"};
  q.rmax = 2;
  q.kind = Kind::rational;
  for (auto& [j, v] : pot.u)
    if (static_cast<int>(v.kind()) > static_cast<int>(q.kind)) q.kind = v.kind();
  auto ops = abcd(pot);
  q.operators[{3, 0, 0}] = ops.A;
  q.operators[{2, 1, 0}] = ops.B;
  q.operators[{1, 2, 0}] = ops.C;
  q.operators[{1, 0, 1}] = ops.D;
  q.basis_eval = basis_eval;
  q.pairing = [pot](const Index& i) { return pairing(pot, i); };
  return q;
}

}  // namespace toprec::gue
