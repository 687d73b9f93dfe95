#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sympflow {

// Minimal dense row-major matrix. Everything here is small (2d x 2d with
// d <= 3 in practice), so no attempt at blocking or vectorization.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Mat mat_mul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw std::invalid_argument("mat_mul: shape mismatch");
  Mat z(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; ++k) {
      double xv = x(i, k);
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < y.cols; ++j) z(i, j) += xv * y(k, j);
    }
  return z;
}

// induced infinity norm (max absolute row sum)
inline double inf_norm(const Mat& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += std::fabs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

inline double max_abs(const Mat& m) {
  double best = 0.0;
  for (double v : m.a) best = std::max(best, std::fabs(v));
  return best;
}

// canonical symplectic form J = [0 I; -I 0] for block dimension d
inline Mat symplectic_form(std::size_t d) {
  Mat j(2 * d, 2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    j(i, d + i) = 1.0;
    j(d + i, i) = -1.0;
  }
  return j;
}

// || D^T J D - J ||_inf, zero iff D is symplectic
inline double symplectic_residual(const Mat& d_mat) {
  if (d_mat.rows != d_mat.cols || d_mat.rows % 2 != 0)
    throw std::invalid_argument("symplectic_residual: need square even-dimensional matrix");
  std::size_t d = d_mat.rows / 2;
  Mat j = symplectic_form(d);
  Mat jd = mat_mul(j, d_mat);
  Mat r(d_mat.rows, d_mat.rows);
  // R = D^T (J D) - J
  for (std::size_t i = 0; i < d_mat.rows; ++i)
    for (std::size_t k = 0; k < d_mat.rows; ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < d_mat.rows; ++l) s += d_mat(l, i) * jd(l, k);
      r(i, k) = s - j(i, k);
    }
  return inf_norm(r);
}

}  // namespace sympflow
