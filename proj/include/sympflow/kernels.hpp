#pragma once

#include <cstddef>

// Low-level array kernels with a scalar reference implementation and an AVX2
// variant selected at runtime. The active implementation is resolved once:
// AVX2 when the CPU supports it (avx2+fma), scalar otherwise, overridable via
// SYMPFLOW_KERNELS=scalar|avx2.
//
// Equivalence contract (enforced by tests): for identical inputs the variants
// agree within
//   vtanh       : 1e-15 absolute per element (both also vs std::tanh)
//   vtanh_grad  : 1e-15 absolute per element
//   dot         : 1e-14 relative to sum_i |a_i b_i|
//   axpy        : 1e-14 relative per element
// The variants may differ in summation order and fma contraction; they are
// not bitwise identical. Within one process and one resolved implementation
// every call is deterministic.

namespace sympflow::kernels {

enum class Impl { Scalar, Avx2 };

Impl active_impl();
bool avx2_supported();

// Test hook. Throws std::invalid_argument if the implementation is not
// available on this machine.
void force_impl(Impl impl);

// y[i] = tanh(x[i])
void vtanh(const double* x, double* y, std::size_t n);
// dy[i] = 1 - y[i]^2 where y holds tanh values
void vtanh_grad(const double* y, double* dy, std::size_t n);
// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);
// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// Scalar reference entry points, always available regardless of dispatch.
namespace ref {
void vtanh(const double* x, double* y, std::size_t n);
void vtanh_grad(const double* y, double* dy, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace ref

// AVX2 entry points; call only if avx2_supported().
namespace avx2 {
void vtanh(const double* x, double* y, std::size_t n);
void vtanh_grad(const double* y, double* dy, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

// Portable scalar version of the polynomial tanh used by the SIMD paths;
// exposed so tests can pin down its accuracy against std::tanh directly.
double tanh_poly(double x);

}  // namespace sympflow::kernels
