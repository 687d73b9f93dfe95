#include "sympflow/kernels.hpp"

#if defined(__x86_64__)

#include "dvec4.hpp"

namespace sympflow::kernels::avx2 {

void vtanh(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) tanh4(dvec4::load(x + i)).store(y + i);
  for (; i < n; ++i) y[i] = detail::tanh_scalar_core(x[i]);
}

void vtanh_grad(const double* y, double* dy, std::size_t n) {
  std::size_t i = 0;
  const dvec4 one(1.0);
  for (; i + 4 <= n; i += 4) {
    dvec4 v = dvec4::load(y + i);
    fnmadd(v, v, one).store(dy + i);
  }
  for (; i < n; ++i) dy[i] = 1.0 - y[i] * y[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  dvec4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = fmadd(dvec4::load(a + i), dvec4::load(b + i), acc);
  double s = acc.hsum_ordered();
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const dvec4 va(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    fmadd(va, dvec4::load(x + i), dvec4::load(y + i)).store(y + i);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace sympflow::kernels::avx2

#endif  // __x86_64__
