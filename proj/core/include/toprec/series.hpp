#pragma once

#include <stdexcept>
#include <vector>

namespace toprec {

// Truncated power series helpers, generic over the coefficient field.

// b with a*b = 1 + O(w^{order+1}); requires a[0] invertible.
template <class T>
std::vector<T> series_inverse(const std::vector<T>& a, int order) {
  if (a.empty()) throw std::invalid_argument("series_inverse of empty series");
  std::vector<T> b(order + 1);
  T inv0 = T(1) / a[0];
  b[0] = inv0;
  for (int k = 1; k <= order; ++k) {
    T acc = T(0);
    for (int j = 1; j <= k && j < static_cast<int>(a.size()); ++j) acc += a[j] * b[k - j];
    b[k] = -(acc * inv0);
  }
  return b;
}

template <class T>
std::vector<T> series_mul(const std::vector<T>& a, const std::vector<T>& b, int order) {
  std::vector<T> c(order + 1, T(0));
  for (int i = 0; i < static_cast<int>(a.size()) && i <= order; ++i)
    for (int j = 0; j < static_cast<int>(b.size()) && i + j <= order; ++j) c[i + j] += a[i] * b[j];
  return c;
}

template <class T>
std::vector<T> series_pow(const std::vector<T>& a, int e, int order) {
  std::vector<T> r(order + 1, T(0));
  r[0] = T(1);
  for (int i = 0; i < e; ++i) r = series_mul(r, a, order);
  return r;
}

}  // namespace toprec
