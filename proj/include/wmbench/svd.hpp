// Copyright 2026 The wmbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// -----------------------------------------------------------------------------
//
// One-sided Jacobi SVD for the small (<= 64x64) matrices used by the
// singular-value watermark.

#ifndef WMBENCH_SVD_HPP_
#define WMBENCH_SVD_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace wmbench {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;  // row-major

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  static Matrix Identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }

  Matrix Transposed() const {
    Matrix t(cols, rows);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  double FrobeniusNorm() const {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  }
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("Matrix: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

// Thin decomposition m = U diag(sigma) V^T with k = min(rows, cols):
// U is rows x k, V is cols x k, sigma non-increasing and non-negative.
struct Svd {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;

  Matrix Reconstruct() const {
    Matrix us = u;
    for (int r = 0; r < us.rows; ++r)
      for (int c = 0; c < us.cols; ++c) us(r, c) *= sigma[c];
    return us * v.Transposed();
  }
};

namespace detail {

// Completes columns [first, k) of q (n x k) to an orthonormal set by
// Gram-Schmidt against the canonical basis.
inline void CompleteOrthonormal(Matrix& q, int first) {
  int e = 0;
  for (int c = first; c < q.cols; ++c) {
    for (; e < q.rows; ++e) {
      std::vector<double> cand(q.rows, 0.0);
      cand[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < c; ++j) {
          double d = 0.0;
          for (int r = 0; r < q.rows; ++r) d += q(r, j) * cand[r];
          for (int r = 0; r < q.rows; ++r) cand[r] -= d * q(r, j);
        }
      }
      double n = 0.0;
      for (double x : cand) n += x * x;
      n = std::sqrt(n);
      if (n > 1e-6) {
        for (int r = 0; r < q.rows; ++r) q(r, c) = cand[r] / n;
        ++e;
        break;
      }
    }
  }
}

}  // namespace detail

inline Svd SvdSmall(const Matrix& m) {
  if (m.rows <= 0 || m.cols <= 0 || m.rows > 64 || m.cols > 64) {
    throw std::invalid_argument("SvdSmall: supports 1..64 rows and columns");
  }
  for (double x : m.v) {
    if (!std::isfinite(x)) throw std::invalid_argument("SvdSmall: non-finite entry");
  }
  if (m.rows < m.cols) {
    Svd t = SvdSmall(m.Transposed());
    return Svd{std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }
  const int rows = m.rows, n = m.cols;
  Matrix a = m;
  Matrix v = Matrix::Identity(n);
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int r = 0; r < rows; ++r) {
          alpha += a(r, p) * a(r, p);
          beta += a(r, q) * a(r, q);
          gamma += a(r, p) * a(r, q);
        }
        if (gamma == 0.0) continue;
        const double scale = std::sqrt(alpha * beta);
        if (scale == 0.0) continue;
        off = std::max(off, std::abs(gamma) / scale);
        if (std::abs(gamma) <= 1e-15 * scale) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int r = 0; r < rows; ++r) {
          const double ap = a(r, p), aq = a(r, q);
          a(r, p) = c * ap - s * aq;
          a(r, q) = s * ap + c * aq;
        }
        for (int r = 0; r < n; ++r) {
          const double vp = v(r, p), vq = v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
    if (off <= 1e-15) break;
  }

  std::vector<double> norms(n);
  for (int c = 0; c < n; ++c) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r) s += a(r, c) * a(r, c);
    norms[c] = std::sqrt(s);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return norms[i] > norms[j]; });

  const double tiny = 1e-13 * std::max(1.0, norms[order[0]]);
  Svd out{Matrix(rows, n), std::vector<double>(n), Matrix(n, n)};
  int nonzero = 0;
  for (int k = 0; k < n; ++k) {
    const int c = order[k];
    out.sigma[k] = norms[c] > tiny ? norms[c] : 0.0;
    for (int r = 0; r < n; ++r) out.v(r, k) = v(r, c);
    if (out.sigma[k] > 0.0) {
      for (int r = 0; r < rows; ++r) out.u(r, k) = a(r, c) / norms[c];
      ++nonzero;
    }
  }
  detail::CompleteOrthonormal(out.u, nonzero);
  return out;
}

}  // namespace wmbench

#endif  // WMBENCH_SVD_HPP_
