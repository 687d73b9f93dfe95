#pragma once

// 4-lane double vector on AVX2. Include only from translation units compiled
// with -mavx2 -mfma; callers must gate on kernels::avx2_supported().

#if !defined(__AVX2__)
#error "dvec4.hpp requires an AVX2-enabled translation unit"
#endif

#include <immintrin.h>

#include "tanh_core.hpp"

namespace sympflow::kernels {

struct dvec4 {
  __m256d v;

  dvec4() : v(_mm256_setzero_pd()) {}
  explicit dvec4(__m256d x) : v(x) {}
  explicit dvec4(double x) : v(_mm256_set1_pd(x)) {}

  static dvec4 load(const double* p) { return dvec4(_mm256_loadu_pd(p)); }
  static dvec4 from4(double l0, double l1, double l2, double l3) {
    return dvec4(_mm256_setr_pd(l0, l1, l2, l3));
  }
  void store(double* p) const { _mm256_storeu_pd(p, v); }

  double lane(int i) const {
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, v);
    return tmp[i];
  }

  // lanes summed in index order so reductions stay deterministic
  double hsum_ordered() const {
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, v);
    return ((tmp[0] + tmp[1]) + tmp[2]) + tmp[3];
  }

  friend dvec4 operator+(dvec4 a, dvec4 b) { return dvec4(_mm256_add_pd(a.v, b.v)); }
  friend dvec4 operator-(dvec4 a, dvec4 b) { return dvec4(_mm256_sub_pd(a.v, b.v)); }
  friend dvec4 operator*(dvec4 a, dvec4 b) { return dvec4(_mm256_mul_pd(a.v, b.v)); }
  friend dvec4 operator/(dvec4 a, dvec4 b) { return dvec4(_mm256_div_pd(a.v, b.v)); }
  dvec4& operator+=(dvec4 b) {
    v = _mm256_add_pd(v, b.v);
    return *this;
  }
  dvec4& operator-=(dvec4 b) {
    v = _mm256_sub_pd(v, b.v);
    return *this;
  }
  dvec4& operator*=(dvec4 b) {
    v = _mm256_mul_pd(v, b.v);
    return *this;
  }
  friend dvec4 operator-(dvec4 a) {
    return dvec4(_mm256_sub_pd(_mm256_setzero_pd(), a.v));
  }
};

// a*b + c
inline dvec4 fmadd(dvec4 a, dvec4 b, dvec4 c) {
  return dvec4(_mm256_fmadd_pd(a.v, b.v, c.v));
}
// c - a*b
inline dvec4 fnmadd(dvec4 a, dvec4 b, dvec4 c) {
  return dvec4(_mm256_fnmadd_pd(a.v, b.v, c.v));
}

// vectorized tanh, same algorithm and constants as detail::tanh_scalar_core
inline dvec4 tanh4(dvec4 x) {
  using namespace detail;
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d sign = _mm256_and_pd(x.v, sign_mask);
  __m256d ax = _mm256_andnot_pd(sign_mask, x.v);

  __m256d sat = _mm256_cmp_pd(ax, _mm256_set1_pd(kTanhSatBound), _CMP_GE_OQ);

  __m256d y2 = _mm256_add_pd(ax, ax);
  __m256d kd =
      _mm256_round_pd(_mm256_mul_pd(y2, _mm256_set1_pd(kInvLn2)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(kLn2Hi), y2);
  r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(kLn2Lo), r);

  __m256d s = _mm256_set1_pd(kExpC[11]);
  for (int i = 10; i >= 0; --i) s = _mm256_fmadd_pd(r, s, _mm256_set1_pd(kExpC[i]));
  // em_r = r + r^2 * s
  __m256d em_r = _mm256_fmadd_pd(_mm256_mul_pd(r, r), s, r);

  // 2^k via the exponent field; k in [0, 55]
  __m128i k32 = _mm256_cvtpd_epi32(kd);
  __m256i k64 = _mm256_cvtepi32_epi64(k32);
  __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  __m256d two_k = _mm256_castsi256_pd(bits);

  __m256d em = _mm256_fmadd_pd(two_k, em_r,
                               _mm256_sub_pd(two_k, _mm256_set1_pd(1.0)));
  __m256d t = _mm256_div_pd(em, _mm256_add_pd(em, _mm256_set1_pd(2.0)));

  t = _mm256_blendv_pd(t, _mm256_set1_pd(1.0), sat);
  // NaN lanes: cmp above is false-on-NaN, but the computed path may have
  // produced garbage via the exponent trick, so force NaN back in
  __m256d isnan = _mm256_cmp_pd(x.v, x.v, _CMP_UNORD_Q);
  t = _mm256_blendv_pd(t, x.v, isnan);
  return dvec4(_mm256_or_pd(t, sign));
}

}  // namespace sympflow::kernels
