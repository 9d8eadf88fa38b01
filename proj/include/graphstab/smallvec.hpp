#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "graphstab/dimension.hpp"

namespace gs {

// Fixed-capacity vector/matrix for points and derivative data in R^n,
// n <= kMaxDim. Runtime length n, no heap allocation; hot quadrature loops
// evaluate millions of these.
struct VecN {
  int n = 0;
  std::array<double, kMaxDim> v{};

  VecN() = default;
  explicit VecN(int dim) : n(dim) {}

  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

struct MatN {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim> a{};

  MatN() = default;
  explicit MatN(int dim) : n(dim) {}

  double& at(int i, int j) { return a[static_cast<size_t>(i * kMaxDim + j)]; }
  double at(int i, int j) const {
    return a[static_cast<size_t>(i * kMaxDim + j)];
  }
};

inline double dot(const VecN& a, const VecN& b) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const VecN& a) { return dot(a, a); }
inline double norm(const VecN& a) { return std::sqrt(norm2(a)); }

inline VecN operator+(const VecN& a, const VecN& b) {
  VecN r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] + b[i];
  return r;
}

inline VecN operator-(const VecN& a, const VecN& b) {
  VecN r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] - b[i];
  return r;
}

inline VecN operator*(double s, const VecN& a) {
  VecN r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = s * a[i];
  return r;
}

inline VecN matvec(const MatN& m, const VecN& x) {
  VecN r(x.n);
  for (int i = 0; i < x.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < x.n; ++j) s += m.at(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

inline double trace(const MatN& m) {
  double s = 0.0;
  for (int i = 0; i < m.n; ++i) s += m.at(i, i);
  return s;
}

inline double frobenius2(const MatN& m) {
  double s = 0.0;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) s += m.at(i, j) * m.at(i, j);
  return s;
}

// x^T M x for symmetric M.
inline double quadratic_form(const MatN& m, const VecN& x) {
  return dot(x, matvec(m, x));
}

}  // namespace gs
