#include "toprec/kdv.hpp"

#include "toprec/series.hpp"

#include <mutex>
#include <sstream>

namespace toprec::kdv {

Scalar KdVTimes::at(int k) const {
  if (auto it = table.find(k); it != table.end()) return it->second;
  if (rule && k % 2 == 1) return rule(k);
  return Scalar(0);
}

int KdVTimes::last_nonzero() const {
  if (rule) throw EngineError("times given by a rule have no last index");
  int last = 0;
  for (auto& [k, v] : table)
    if (!v.is_zero()) last = std::max(last, k);
  return last;
}

KdVTimes KdVTimes::scaled(const Scalar& lambda) const {
  KdVTimes t = *this;
  for (auto& [k, v] : t.table) v *= lambda;
  if (rule) {
    auto base = rule;
    t.rule = [base, lambda](int k) { return base(k) * lambda; };
  }
  t.params["scale"] = lambda.str();
  return t;
}

namespace {

std::string table_string(const std::map<int, Scalar>& table) {
  std::string s;
  for (auto& [k, v] : table) {
    if (v.is_zero()) continue;
    if (!s.empty()) s += ",";
    s += std::to_string(k) + ":" + v.str();
  }
  return s;
}

}  // namespace

KdVTimes airy() {
  KdVTimes t;
  t.table[3] = Scalar(-2);
  t.name = "airy";
  t.params["times"] = table_string(t.table);
  return t;
}

KdVTimes painleve1(const Scalar& u) {
  if (u.is_zero()) throw EngineError("painleve1 requires u != 0");
  KdVTimes t;
  t.table[1] = Scalar(-2) * u;
  t.table[3] = Scalar(6) * u;
  t.table[5] = Scalar(-2);
  t.name = "painleve1";
  t.params["u"] = u.str();
  t.params["times"] = table_string(t.table);
  return t;
}

KdVTimes weil_petersson() {
  KdVTimes t;
  // t_{2k+3} = (-1)^k (2 pi)^{2k} / (2k+1)!
  t.rule = [](int idx) {
    if (idx < 3 || idx % 2 == 0) return Scalar(0);
    int k = (idx - 3) / 2;
    Rational c(Integer(1) << (2 * k), factorial(2 * k + 1));
    if (k % 2) c = -c;
    Pi2Poly p;
    p.terms[k] = c;
    return Scalar(std::move(p));
  };
  t.name = "weil-petersson";
  t.params["times"] = "weil-petersson";
  return t;
}

KdVTimes minimal_model(int p, const std::map<int, Scalar>& coefficients) {
  if (p < 1 || p % 2 == 0) throw EngineError("minimal model (p,2) needs odd p >= 1");
  KdVTimes t;
  for (auto& [k, v] : coefficients) {
    if (k % 2 == 0 || k < 1) throw EngineError("KdV times are indexed by odd k >= 1");
    if (k > p + 2 && !v.is_zero()) throw EngineError("minimal model (p,2) has no times beyond p+2");
    t.table[k] = v;
  }
  t.name = "minimal-model";
  t.params["p"] = std::to_string(p);
  t.params["times"] = table_string(t.table);
  return t;
}

KdVTimes parse_times(const std::string& text) {
  KdVTimes t;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw EngineError("bad times entry '" + item + "'");
    int k = std::stoi(item.substr(0, colon));
    if (k < 1 || k % 2 == 0) throw EngineError("KdV times are indexed by odd k >= 1");
    Rational q;
    if (q.set_str(item.substr(colon + 1), 10) != 0 || q.get_den() == 0) throw EngineError("bad rational in '" + item + "'");
    q.canonicalize();
    t.table[k] = Scalar(q);
  }
  t.name = "kdv";
  t.params["times"] = table_string(t.table);
  return t;
}

std::vector<Scalar> t_series(const KdVTimes& times, int kmax) {
  Scalar t3 = times.at(3);
  if (t3.is_zero()) throw EngineError("KdV times need t3 != 0");
  std::vector<Scalar> a(kmax + 1);
  a[0] = Scalar(1);
  for (int k = 1; k <= kmax; ++k) a[k] = times.at(2 * k + 3) / t3;
  return series_inverse(a, kmax);
}

Scalar t_composition(const KdVTimes& times, int k) {
  Scalar t3 = times.at(3);
  if (t3.is_zero()) throw EngineError("KdV times need t3 != 0");
  if (k == 0) return Scalar(1);
  // sum over compositions of k
  Scalar total(0);
  std::function<void(int, int, Scalar)> rec = [&](int left, int parts, Scalar prod) {
    if (left == 0) {
      Scalar sign = parts % 2 ? Scalar(-1) : Scalar(1);
      total += sign * prod / t3.pow(parts);
      return;
    }
    for (int j = 1; j <= left; ++j) rec(left - j, parts + 1, prod * times.at(3 + 2 * j));
  };
  rec(k, 0, Scalar(1));
  return total;
}

std::map<int, Scalar> kdv_to_kp(const KdVTimes& times) {
  int last = times.last_nonzero();
  Scalar t1 = times.at(1);
  std::map<int, Scalar> out;
  for (int k = 1; k <= last; k += 2) {
    Scalar acc = k == 1 ? -t1 : Scalar(0);
    for (int j = 0; k + 2 * j <= last; ++j) {
      Scalar tk = times.at(k + 2 * j);
      if (tk.is_zero()) continue;
      acc += Scalar(binomial(Rational(-k, 2), j)) * tk * t1.pow(j);
    }
    out[k] = acc;
  }
  return out;
}

namespace {

// Lazily extended T_k table shared by the operator closures.
struct TTable {
  KdVTimes times;
  Scalar t3;
  std::mutex mu;
  std::vector<Scalar> T;

  explicit TTable(KdVTimes t) : times(std::move(t)) {
    t3 = times.at(3);
    if (t3.is_zero()) throw EngineError("KdV times need t3 != 0");
    T = t_series(times, 8);
  }
  Scalar get(int k) {
    if (k < 0) return Scalar(0);
    std::lock_guard<std::mutex> lock(mu);
    if (k >= static_cast<int>(T.size())) T = t_series(times, std::max(k, 2 * static_cast<int>(T.size())));
    return T[k];
  }
};

Scalar dfact(long n) { return Scalar(Rational(double_factorial(n))); }

}  // namespace

Operators abcd(const KdVTimes& times) {
  auto tab = std::make_shared<TTable>(times);
  const Scalar t3 = tab->t3;
  Operators ops;

  ops.A.n = 3;
  ops.A.labels_in = {"a1", "a2", "a3"};
  ops.A.candidates = [](const IndexList&) { return std::vector<IndexList>{{Index{0, 0}, Index{0, 0}, Index{0, 0}}}; };
  ops.A.value = [t3](const IndexList& in, const IndexList&) {
    for (auto& i : in)
      if (i.point != 0 || i.degree != 0) return Scalar(0);
    return Scalar(1) / t3;
  };

  ops.D.n = 1;
  ops.D.h = 1;
  ops.D.labels_in = {"a1"};
  ops.D.candidates = [](const IndexList&) { return std::vector<IndexList>{{Index{0, 0}}, {Index{0, 1}}}; };
  ops.D.value = [tab, t3](const IndexList& in, const IndexList&) {
    if (in[0].point != 0) return Scalar(0);
    if (in[0].degree == 1) return Scalar(1) / (Scalar(24) * t3);
    if (in[0].degree == 0) return tab->get(1) / (Scalar(8) * t3);
    return Scalar(0);
  };

  ops.B.n = 2;
  ops.B.m = 1;
  ops.B.labels_in = {"a1", "a2"};
  ops.B.labels_out = {"b"};
  ops.B.candidates = [](const IndexList& out) {
    std::vector<IndexList> c;
    if (out[0].point != 0) return c;
    int s = out[0].degree + 1;
    for (int d1 = 0; d1 <= s; ++d1)
      for (int d2 = 0; d1 + d2 <= s; ++d2) c.push_back({Index{0, d1}, Index{0, d2}});
    return c;
  };
  ops.B.value = [tab, t3](const IndexList& in, const IndexList& out) {
    int d1 = in[0].degree, d2 = in[1].degree, d3 = out[0].degree;
    if (in[0].point || in[1].point || out[0].point || d1 + d2 > d3 + 1) return Scalar(0);
    Scalar T = tab->get(d3 + 1 - d1 - d2);
    if (T.is_zero()) return T;
    return dfact(2 * d3 + 1) * T / (Scalar(2) * t3 * dfact(2 * d1 + 1) * dfact(2 * d2 - 1));
  };

  ops.C.n = 1;
  ops.C.m = 2;
  ops.C.labels_in = {"a1"};
  ops.C.labels_out = {"b1", "b2"};
  ops.C.candidates = [](const IndexList& out) {
    std::vector<IndexList> c;
    if (out[0].point || out[1].point) return c;
    for (int d1 = 0; d1 <= out[0].degree + out[1].degree + 2; ++d1) c.push_back({Index{0, d1}});
    return c;
  };
  ops.C.value = [tab, t3](const IndexList& in, const IndexList& out) {
    int d1 = in[0].degree, d2 = out[0].degree, d3 = out[1].degree;
    if (in[0].point || out[0].point || out[1].point || d1 > d2 + d3 + 2) return Scalar(0);
    Scalar T = tab->get(d2 + d3 + 2 - d1);
    if (T.is_zero()) return T;
    return dfact(2 * d2 + 1) * dfact(2 * d3 + 1) * T / (Scalar(2) * t3 * dfact(2 * d1 + 1));
  };
  return ops;
}

Scalar basis_eval(const Index& idx, const Scalar& z) {
  if (z.is_zero()) throw PoleError("KdV basis has a pole at z = 0");
  if (idx.point != 0) return Scalar(0);
  return dfact(2 * idx.degree + 1) / z.pow(2 * idx.degree + 2);
}

Scalar pairing(const KdVTimes& times, const Index& idx) {
  // Res_0 dxi_d F_{0,1} with F_{0,1} = -sum_k t_k z^k / k
  if (idx.point != 0) return Scalar(0);
  return -dfact(2 * idx.degree - 1) * times.at(2 * idx.degree + 1);
}

AiryStructure make_structure(const KdVTimes& times) {
  AiryStructure q;
  q.family = times.name;
  q.params = times.params;
  q.points.names = {"0"};
  q.rmax = 2;
  q.kind = times.at(3).kind();
  auto ops = abcd(times);
  q.operators[{3, 0, 0}] = ops.A;
  q.operators[{2, 1, 0}] = ops.B;
  q.operators[{1, 2, 0}] = ops.C;
  q.operators[{1, 0, 1}] = ops.D;
  q.basis_eval = basis_eval;
  q.pairing = [times](const Index& i) { return pairing(times, i); };
  return q;
}

}  // namespace toprec::kdv
