#include "sympflow/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "tanh_core.hpp"

namespace sympflow::kernels {

namespace ref {

void vtanh(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vtanh_grad(const double* y, double* dy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dy[i] = 1.0 - y[i] * y[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace ref

double tanh_poly(double x) { return detail::tanh_scalar_core(x); }

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

struct KernelTable {
  void (*vtanh)(const double*, double*, std::size_t);
  void (*vtanh_grad)(const double*, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  Impl impl;
};

constexpr KernelTable kScalarTable{ref::vtanh, ref::vtanh_grad, ref::dot, ref::axpy,
                                   Impl::Scalar};

#if defined(__x86_64__)
const KernelTable kAvx2Table{avx2::vtanh, avx2::vtanh_grad, avx2::dot, avx2::axpy, Impl::Avx2};
#endif

const KernelTable* resolve() {
  const char* env = std::getenv("SYMPFLOW_KERNELS");
  if (env != nullptr) {
    std::string v(env);
    if (v == "scalar") return &kScalarTable;
    if (v == "avx2") {
#if defined(__x86_64__)
      if (avx2_supported()) return &kAvx2Table;
#endif
      throw std::invalid_argument("SYMPFLOW_KERNELS=avx2 but AVX2 is not available");
    }
    throw std::invalid_argument("SYMPFLOW_KERNELS must be 'scalar' or 'avx2'");
  }
#if defined(__x86_64__)
  if (avx2_supported()) return &kAvx2Table;
#endif
  return &kScalarTable;
}

std::atomic<const KernelTable*> g_table{nullptr};

const KernelTable& table() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = resolve();
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

Impl active_impl() { return table().impl; }

void force_impl(Impl impl) {
  if (impl == Impl::Avx2) {
#if defined(__x86_64__)
    if (avx2_supported()) {
      g_table.store(&kAvx2Table, std::memory_order_release);
      return;
    }
#endif
    throw std::invalid_argument("force_impl: AVX2 not available on this machine");
  }
  g_table.store(&kScalarTable, std::memory_order_release);
}

void vtanh(const double* x, double* y, std::size_t n) { table().vtanh(x, y, n); }
void vtanh_grad(const double* y, double* dy, std::size_t n) { table().vtanh_grad(y, dy, n); }
double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  table().axpy(alpha, x, y, n);
}

#if !defined(__x86_64__)
// keep the header honest on non-x86 builds
namespace avx2 {
void vtanh(const double*, double*, std::size_t) {
  throw std::runtime_error("AVX2 kernels not built on this architecture");
}
void vtanh_grad(const double*, double*, std::size_t) {
  throw std::runtime_error("AVX2 kernels not built on this architecture");
}
double dot(const double*, const double*, std::size_t) {
  throw std::runtime_error("AVX2 kernels not built on this architecture");
}
void axpy(double, const double*, double*, std::size_t) {
  throw std::runtime_error("AVX2 kernels not built on this architecture");
}
}  // namespace avx2
#endif

}  // namespace sympflow::kernels
