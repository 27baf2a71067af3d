#include "toprec/rs.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace toprec::rs {

RSCurve make_curve(int r, int s) {
  if (r < 2) throw EngineError("(r,s) curve needs r >= 2");
  if (s <= 1 - r) throw EngineError("(r,s) curve needs s > 1 - r");
  if (std::gcd(r, s) != 1) throw EngineError("(r,s) curve needs gcd(r, s) = 1");
  return RSCurve{r, s};
}

namespace {

long mod(long a, long r) { return ((a % r) + r) % r; }

Scalar reduce(const Scalar& v) { return v.is_rational() ? Scalar(v.as_rational()) : v; }

// Sheet data in Q(rho) shared by all coefficient evaluations of a curve.
struct Sheets {
  int r, s;
  std::vector<Scalar> rho;    // rho^j
  std::vector<Scalar> den;    // 1 / (1 - rho^{s j}), j = 1..r-1
  std::vector<std::vector<Scalar>> pair;  // rho^{a+b} / (rho^a - rho^b)^2

  explicit Sheets(const RSCurve& c) : r(c.r), s(c.s) {
    for (int j = 0; j < r; ++j) rho.push_back(cyclotomic_power(r, j));
    den.resize(r);
    for (int j = 1; j < r; ++j) den[j] = Scalar(1) / (Scalar(1).promote(Kind::cyclotomic, r) - rho[mod(long(s) * j, r)]);
    pair.assign(r, std::vector<Scalar>(r));
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        if (a == b) continue;
        Scalar d = rho[a] - rho[b];
        pair[a][b] = rho[(a + b) % r] / (d * d);
      }
  }

  // Sum over distinct sheets sigma_3.. in 1..r-1 for a slot layout: `legs`
  // are exponents e (factor rho^{e sigma}), then `pairs` consecutive slot
  // pairs; with `pair_at_z` the first slot pairs with the integration sheet.
  Scalar sum(const std::vector<long>& legs, int pairs, bool pair_at_z) const {
    const int q = static_cast<int>(legs.size()) + 2 * pairs + (pair_at_z ? 1 : 0);
    Scalar total = Scalar(0).promote(Kind::cyclotomic, r);
    if (q > r - 1) return total;
    std::vector<int> sigma(q);
    std::vector<bool> used(r, false);
    std::function<void(int)> rec = [&](int i) {
      if (i == q) {
        Scalar t = Scalar(1).promote(Kind::cyclotomic, r);
        int pos = 0;
        if (pair_at_z) t *= pair[0][sigma[pos++]];
        for (long e : legs) t *= rho[mod(e * sigma[pos++], r)];
        for (int p = 0; p < pairs; ++p, pos += 2) t *= pair[sigma[pos]][sigma[pos + 1]];
        for (int j = 0; j < q; ++j) t *= den[sigma[j]];
        total += t;
        return;
      }
      for (int v = 1; v < r; ++v) {
        if (used[v]) continue;
        used[v] = true;
        sigma[i] = v;
        rec(i + 1);
        used[v] = false;
      }
    };
    rec(0);
    return total;
  }
};

void check_signature(const RSCurve& c, int n, int m, int h) {
  if (n < 1 || m < 0 || h < 0 || n + m + 2 * h < 3 || n + m + 2 * h > c.r + 1)
    throw EngineError("inadmissible (n,m,h) = (" + std::to_string(n) + "," + std::to_string(m) + "," +
                      std::to_string(h) + ") for r = " + std::to_string(c.r));
}

std::vector<std::string> names(const char* stem, int k) {
  std::vector<std::string> v;
  for (int i = 1; i <= k; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

// Residue selection: sum theta_j alpha_j = (n+m+2h-2)(s+r).
long selection_total(const RSCurve& c, int n, int m, int h) { return long(n + m + 2 * h - 2) * (c.s + c.r); }

std::function<std::vector<IndexList>(const IndexList&)> candidates_for(const RSCurve& c, int n, int m, int h) {
  const long base = selection_total(c, n, m, h);
  return [base, n](const IndexList& out) {
    long total = base;
    for (auto& o : out) {
      if (o.point != 0 || o.degree < 1) return std::vector<IndexList>{};
      total += o.degree;
    }
    return compositions(total, n);
  };
}

bool selected(long base, const IndexList& in, const IndexList& out) {
  long t = 0;
  for (auto& i : in) {
    if (i.point != 0 || i.degree < 1) return false;
    t += i.degree;
  }
  for (auto& o : out) {
    if (o.point != 0 || o.degree < 1) return false;
    t -= o.degree;
  }
  return t == base;
}

Scalar in_product(const IndexList& in) {
  Scalar p(1);
  for (size_t j = 1; j < in.size(); ++j) p *= Scalar(long(in[j].degree));
  return p;
}

}  // namespace

Scalar c_coeff(const RSCurve& c, int h, int n, const std::vector<long>& alphas) {
  if (h < 0 || h > c.r / 2 || n < 1 || n + 2 * h > c.r + 1 || n + 2 * h < 3)
    throw EngineError("inadmissible (h, n) for C coefficient");
  if (static_cast<int>(alphas.size()) != n - 1) throw EngineError("C coefficient needs n - 1 arguments");
  Sheets sh(c);
  // alpha_2 sits on sigma_2 = r, so it drops out; with n = 1 the first pair
  // starts on the integration sheet and carries no 1/2.
  std::vector<long> legs(alphas.begin() + (n >= 2 ? 1 : 0), alphas.end());
  Scalar v = n >= 2 ? sh.sum(legs, h, false) : sh.sum(legs, h - 1, true);
  Rational pref = n == 1 && h > 0 ? Rational(2) : Rational(1);
  pref /= Rational(mpz_class(1) << h);
  return reduce(v * Scalar(pref));
}

RecursionOperator a_operator(const RSCurve& c, int n, int m, int h) {
  check_signature(c, n, m, h);
  RecursionOperator op;
  op.n = n;
  op.m = m;
  op.h = h;
  op.labels_in = names("a", n);
  op.labels_out = names("b", m);
  op.candidates = candidates_for(c, n, m, h);
  const long base = selection_total(c, n, m, h);
  op.value = [c, n, m, h, base](const IndexList& in, const IndexList& out) {
    if (!selected(base, in, out)) return Scalar(0);
    std::vector<long> args;
    for (int j = 1; j < n; ++j) args.push_back(in[j].degree);
    for (int j = 0; j < m; ++j) args.push_back(-long(out[j].degree));
    Scalar v = c_coeff(c, h, n + m, args);
    return in_product(in) * v;
  };
  return op;
}

RecursionOperator general_operator(const RSCurve& c, int n, int m, int h) {
  check_signature(c, n, m, h);
  struct Cache {
    Sheets sh;
    std::mutex mu;
    std::map<std::vector<long>, Rational> memo;
    explicit Cache(const RSCurve& c) : sh(c) {}
  };
  auto cache = std::make_shared<Cache>(c);
  RecursionOperator op;
  op.n = n;
  op.m = m;
  op.h = h;
  op.labels_in = names("a", n);
  op.labels_out = names("b", m);
  op.candidates = candidates_for(c, n, m, h);
  const long base = selection_total(c, n, m, h);
  const int r = c.r;
  const Rational inv_mfact = Rational(1) / Rational(factorial(m));

  // Sheet sum for one choice of the leg on the integration sheet; memoized on
  // the residues of the remaining exponents.
  auto layout = [cache, r](std::vector<long> legs, int pairs, bool pair_at_z) {
    for (auto& e : legs) e = mod(e, r);
    std::vector<long> key = legs;
    key.push_back(-1 - pairs);
    key.push_back(pair_at_z ? -1 : -2);
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      auto it = cache->memo.find(key);
      if (it != cache->memo.end()) return it->second;
    }
    Scalar v = cache->sh.sum(legs, pairs, pair_at_z);
    Rational w = v.as_rational();  // Galois invariant
    w /= Rational(factorial(pairs) * (mpz_class(1) << pairs));
    std::lock_guard<std::mutex> lock(cache->mu);
    cache->memo.emplace(key, w);
    return w;
  };

  op.value = [=](const IndexList& in, const IndexList& out) {
    if (!selected(base, in, out)) return Scalar(0);
    std::vector<long> legs;
    for (int j = 1; j < n; ++j) legs.push_back(in[j].degree);
    for (int j = 0; j < m; ++j) legs.push_back(-long(out[j].degree));
    Rational acc = 0;
    for (size_t i = 0; i < legs.size(); ++i) {
      std::vector<long> rest;
      for (size_t j = 0; j < legs.size(); ++j)
        if (j != i) rest.push_back(legs[j]);
      acc += layout(rest, h, false);
    }
    if (h > 0) acc += layout(legs, h - 1, true);
    if (acc == 0) return Scalar(0);
    // kernel sign (-1)^{|Z|+1}, |Z| = n+m+2h-2 sheets besides the integration one
    if ((n + m + 2 * h) % 2 == 0) acc = -acc;
    return in_product(in) * Scalar(acc * inv_mfact);
  };
  return op;
}

std::vector<IndexList> compositions(long total, int parts) {
  std::vector<IndexList> out;
  if (parts < 1 || total < parts) return out;
  IndexList cur(parts);
  std::function<void(int, long)> rec = [&](int i, long left) {
    if (i == parts - 1) {
      cur[i] = Index{0, static_cast<int>(left)};
      out.push_back(cur);
      return;
    }
    for (long v = 1; v <= left - (parts - 1 - i); ++v) {
      cur[i] = Index{0, static_cast<int>(v)};
      rec(i + 1, left - v);
    }
  };
  rec(0, total);
  return out;
}

Scalar basis_eval(const Index& idx, const Scalar& z) {
  if (z.is_zero()) throw PoleError("(r,s) basis has a pole at z = 0");
  if (idx.point != 0 || idx.degree < 1) return Scalar(0);
  return Scalar(1) / z.pow(idx.degree + 1);
}

Scalar pairing(const RSCurve& c, const Index& idx) {
  if (idx.point != 0 || idx.degree != c.r + c.s) return Scalar(0);
  return Scalar::frac(1, c.r + c.s);
}

AiryStructure make_structure(const RSCurve& c) {
  AiryStructure q;
  q.family = "rs";
  q.params = {{"r", std::to_string(c.r)}, {"s", std::to_string(c.s)}};
  q.points.names = {"0"};
  q.rmax = c.r;
  q.kind = Kind::rational;
  for (int h = 0; 2 * h <= c.r; ++h)
    for (int n = 1; n + 2 * h <= c.r + 1; ++n)
      for (int m = 0; n + m + 2 * h <= c.r + 1; ++m) {
        if (n + m + 2 * h < 3) continue;
        q.operators[{n, m, h}] = a_operator(c, n, m, h);
        q.general[{n, m, h}] = general_operator(c, n, m, h);
      }
  if (c.r == 2) {
    // ABCD normalization: the B slot of the set-partition form carries a 2.
    q.operators[{3, 0, 0}] = q.general[{3, 0, 0}];
    q.operators[{2, 1, 0}] = q.general[{2, 1, 0}].scaled(Scalar::frac(1, 2));
    q.operators[{1, 2, 0}] = q.general[{1, 2, 0}];
    q.operators[{1, 0, 1}] = q.general[{1, 0, 1}];
  }
  q.basis_eval = basis_eval;
  q.pairing = [c](const Index& i) { return pairing(c, i); };
  return q;
}

}  // namespace toprec::rs
