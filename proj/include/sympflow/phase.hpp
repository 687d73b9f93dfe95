#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sympflow {

// Point in 2d-dimensional phase space, stored as separate momentum and
// position blocks. d is implied by the vector lengths and must agree.
struct PhasePoint {
  std::vector<double> p;
  std::vector<double> q;

  PhasePoint() = default;
  PhasePoint(std::vector<double> p_, std::vector<double> q_)
      : p(std::move(p_)), q(std::move(q_)) {
    if (p.size() != q.size()) throw std::invalid_argument("PhasePoint: p/q size mismatch");
  }
  // d = 1 convenience
  PhasePoint(double p0, double q0) : p{p0}, q{q0} {}

  std::size_t dim() const { return p.size(); }

  // concatenated (p,q) layout used by files and dense Jacobians
  std::vector<double> flat() const {
    std::vector<double> z(p);
    z.insert(z.end(), q.begin(), q.end());
    return z;
  }
  static PhasePoint from_flat(const std::vector<double>& z) {
    if (z.size() % 2 != 0) throw std::invalid_argument("PhasePoint: odd flat length");
    std::size_t d = z.size() / 2;
    return PhasePoint(std::vector<double>(z.begin(), z.begin() + d),
                      std::vector<double>(z.begin() + d, z.end()));
  }
};

inline double inf_dist(const PhasePoint& a, const PhasePoint& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inf_dist: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    m = std::max(m, std::fabs(a.p[i] - b.p[i]));
    m = std::max(m, std::fabs(a.q[i] - b.q[i]));
  }
  return m;
}

inline double inf_norm(const PhasePoint& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    m = std::max(m, std::fabs(a.p[i]));
    m = std::max(m, std::fabs(a.q[i]));
  }
  return m;
}

}  // namespace sympflow
