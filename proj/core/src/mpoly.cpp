#include "toprec/mpoly.hpp"

#include <algorithm>

namespace toprec {

void MPoly::trim(Exps& e) {
  while (!e.empty() && e.back() == 0) e.pop_back();
}

void MPoly::add_term(Exps e, const Rational& c0) {
  Rational c = c0;
  c.canonicalize();
  if (c == 0) return;
  trim(e);
  auto [it, fresh] = terms_.try_emplace(std::move(e), c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

MPoly::MPoly(long c) {
  if (c != 0) terms_[{}] = Rational(c);
}

MPoly::MPoly(const Rational& c) { add_term({}, c); }

MPoly MPoly::var(int i, int power) {
  Exps e(i + 1, 0);
  e[i] = power;
  return monomial(std::move(e), Rational(1));
}

MPoly MPoly::monomial(Exps e, const Rational& c) {
  MPoly p;
  p.add_term(std::move(e), c);
  return p;
}

bool MPoly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

Rational MPoly::constant() const {
  auto it = terms_.find({});
  return it == terms_.end() ? Rational(0) : it->second;
}

int MPoly::nvars() const {
  int n = 0;
  for (auto& [e, c] : terms_) n = std::max(n, static_cast<int>(e.size()));
  return n;
}

int MPoly::degree(int v) const {
  int d = terms_.empty() ? -1 : 0;
  for (auto& [e, c] : terms_)
    if (v < static_cast<int>(e.size())) d = std::max(d, e[v]);
  return d;
}

int MPoly::total_degree() const {
  int d = terms_.empty() ? -1 : 0;
  for (auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    d = std::max(d, s);
  }
  return d;
}

MPoly MPoly::coeff(int v, int power) const {
  MPoly out;
  for (auto& [e, c] : terms_) {
    int p = v < static_cast<int>(e.size()) ? e[v] : 0;
    if (p != power) continue;
    Exps f = e;
    if (v < static_cast<int>(f.size())) f[v] = 0;
    out.add_term(std::move(f), c);
  }
  return out;
}

std::pair<MPoly::Exps, Rational> MPoly::leading() const {
  if (terms_.empty()) throw ScalarError("leading term of zero polynomial");
  // map order is lexicographic on vectors; pad for comparison so that
  // shorter vectors compare as if zero-extended.
  const Exps* best = nullptr;
  const Rational* bc = nullptr;
  auto less = [](const Exps& a, const Exps& b) {
    size_t n = std::max(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
      int x = i < a.size() ? a[i] : 0, y = i < b.size() ? b[i] : 0;
      if (x != y) return x < y;
    }
    return false;
  };
  for (auto& [e, c] : terms_)
    if (!best || less(*best, e)) {
      best = &e;
      bc = &c;
    }
  return {*best, *bc};
}

MPoly& MPoly::operator+=(const MPoly& o) {
  for (auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

MPoly& MPoly::operator-=(const MPoly& o) {
  for (auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

MPoly operator*(const MPoly& a, const MPoly& b) {
  MPoly out;
  for (auto& [ea, ca] : a.terms_)
    for (auto& [eb, cb] : b.terms_) {
      MPoly::Exps e(std::max(ea.size(), eb.size()), 0);
      for (size_t i = 0; i < ea.size(); ++i) e[i] += ea[i];
      for (size_t i = 0; i < eb.size(); ++i) e[i] += eb[i];
      Rational c = ca * cb;
      out.add_term(std::move(e), c);
    }
  return out;
}

MPoly& MPoly::operator*=(const MPoly& o) { return *this = *this * o; }

MPoly MPoly::operator-() const {
  MPoly out = *this;
  for (auto& [e, c] : out.terms_) c = -c;
  return out;
}

MPoly MPoly::pow(int k) const {
  if (k < 0) throw ScalarError("negative power of a polynomial");
  MPoly out(1), base = *this;
  while (k) {
    if (k & 1) out *= base;
    k >>= 1;
    if (k) base *= base;
  }
  return out;
}

MPoly MPoly::derivative(int v) const {
  MPoly out;
  for (auto& [e, c] : terms_) {
    if (v >= static_cast<int>(e.size()) || e[v] == 0) continue;
    Exps f = e;
    Rational cc = c * f[v];
    f[v] -= 1;
    out.add_term(std::move(f), cc);
  }
  return out;
}

MPoly MPoly::substitute(int v, const MPoly& value) const {
  std::map<int, MPoly> powers;
  MPoly out;
  for (auto& [e, c] : terms_) {
    int p = v < static_cast<int>(e.size()) ? e[v] : 0;
    Exps f = e;
    if (p) f[v] = 0;
    MPoly rest = monomial(std::move(f), c);
    if (p == 0) {
      out += rest;
      continue;
    }
    auto it = powers.find(p);
    if (it == powers.end()) it = powers.emplace(p, value.pow(p)).first;
    out += rest * it->second;
  }
  return out;
}

MPoly MPoly::divide_exact(const MPoly& b) const {
  if (b.is_zero()) throw ScalarError("division by zero polynomial");
  MPoly rem = *this, q;
  auto [lb, lc] = b.leading();
  while (!rem.is_zero()) {
    auto [lr, rc] = rem.leading();
    Exps e(std::max(lr.size(), lb.size()), 0);
    for (size_t i = 0; i < e.size(); ++i) {
      int x = i < lr.size() ? lr[i] : 0, y = i < lb.size() ? lb[i] : 0;
      if (x < y) throw ScalarError("polynomial division is not exact");
      e[i] = x - y;
    }
    MPoly t = monomial(std::move(e), rc / lc);
    q += t;
    rem -= t * b;
  }
  return q;
}

Complex MPoly::evaluate(const std::vector<Complex>& values) const {
  Complex s(0);
  for (auto& [e, c] : terms_) {
    Complex t{Rational(c)};
    for (size_t i = 0; i < e.size(); ++i) {
      if (!e[i]) continue;
      if (i >= values.size()) throw ScalarError("too few values for polynomial evaluation");
      t *= toprec::pow(values[i], e[i]);
    }
    s += t;
  }
  return s;
}

Rational MPoly::evaluate(const std::vector<Rational>& values) const {
  Rational s = 0;
  for (auto& [e, c] : terms_) {
    Rational t = c;
    for (size_t i = 0; i < e.size(); ++i) {
      if (!e[i]) continue;
      if (i >= values.size()) throw ScalarError("too few values for polynomial evaluation");
      mpz_class num, den;
      mpz_pow_ui(num.get_mpz_t(), values[i].get_num_mpz_t(), e[i]);
      mpz_pow_ui(den.get_mpz_t(), values[i].get_den_mpz_t(), e[i]);
      t *= Rational(num, den);
    }
    s += t;
  }
  s.canonicalize();
  return s;
}

std::vector<int> MPoly::weights(const std::vector<int>& w) const {
  std::vector<int> out;
  for (auto& [e, c] : terms_) {
    int s = 0;
    for (size_t i = 0; i < e.size(); ++i) s += e[i] * (i < w.size() ? w[i] : 0);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string MPoly::str(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  // highest total degree first, then lex descending
  std::vector<std::pair<Exps, Rational>> ts(terms_.begin(), terms_.end());
  std::stable_sort(ts.begin(), ts.end(), [](auto& a, auto& b) {
    int da = 0, db = 0;
    for (int x : a.first) da += x;
    for (int x : b.first) db += x;
    if (da != db) return da > db;
    return a.first > b.first;
  });
  std::string s;
  for (auto& [e, c] : ts) {
    bool neg = c < 0;
    Rational a = neg ? Rational(-c) : c;
    std::string mono;
    for (size_t i = 0; i < e.size(); ++i) {
      if (!e[i]) continue;
      if (!mono.empty()) mono += "*";
      mono += i < names.size() ? names[i] : "v" + std::to_string(i);
      if (e[i] > 1) mono += "^" + std::to_string(e[i]);
    }
    std::string term;
    if (mono.empty()) term = a.get_str();
    else if (a == 1) term = mono;
    else term = a.get_str() + "*" + mono;
    if (s.empty()) s = neg ? "-" + term : term;
    else s += (neg ? " - " : " + ") + term;
  }
  return s;
}

MPoly determinant(std::vector<std::vector<MPoly>> m) {
  size_t n = m.size();
  if (n == 0) return MPoly(1);
  int sign = 1;
  MPoly prev(1);
  for (size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k].is_zero()) {
      size_t r = k + 1;
      while (r < n && m[r][k].is_zero()) ++r;
      if (r == n) return MPoly();
      std::swap(m[k], m[r]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i) {
      for (size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]).divide_exact(prev);
      m[i][k] = MPoly();
    }
    prev = m[k][k];
  }
  return sign > 0 ? m[n - 1][n - 1] : -m[n - 1][n - 1];
}

}  // namespace toprec
