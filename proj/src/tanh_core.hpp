#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>

// Shared algorithm behind the vectorized tanh: via expm1,
//   tanh(x) = em / (em + 2),  em = e^{2|x|} - 1,  sign restored at the end.
// The expm1 uses Cody-Waite range reduction 2|x| = k ln2 + r, |r| <= ln2/2,
// a degree-13 Taylor polynomial for e^r - 1, and exact 2^k scaling:
//   expm1(2|x|) = 2^k (e^r - 1) + (2^k - 1).
// Going through expm1 keeps the relative error small near zero where the
// naive 1 - 2/(e^{2x}+1) form cancels catastrophically. Observed error vs
// std::tanh is < 1e-15 absolute (see the kernel tests, which sweep the whole
// active range).

namespace sympflow::kernels::detail {

inline constexpr double kTanhSatBound = 19.0625;  // tanh rounds to +-1 beyond this
inline constexpr double kInvLn2 = 1.4426950408889634074;
// fdlibm split: hi part has zeroed tail bits so k*hi is exact for k <= 2^10
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;

// 1/k! for k = 2..13
inline constexpr double kExpC[12] = {
    5.00000000000000000000e-01, 1.66666666666666666667e-01,
    4.16666666666666666667e-02, 8.33333333333333333333e-03,
    1.38888888888888888889e-03, 1.98412698412698412698e-04,
    2.48015873015873015873e-05, 2.75573192239858906526e-06,
    2.75573192239858906526e-07, 2.50521083854417187751e-08,
    2.08767569878680989792e-09, 1.60590438368216145994e-10};

// e^r - 1 for |r| <= ln2/2, relative error ~1 ulp
inline double expm1_poly(double r) {
  double s = kExpC[11];
  for (int i = 10; i >= 0; --i) s = kExpC[i] + r * s;
  return r + r * (r * s);
}

inline double exp2_int(int k) {
  // k in [0, 55]; builds the bit pattern directly
  std::uint64_t bits = static_cast<std::uint64_t>(1023 + k) << 52;
  double out;
  std::memcpy(&out, &bits, sizeof(out));
  return out;
}

inline double tanh_scalar_core(double x) {
  const bool neg = std::signbit(x);  // keeps -0.0 -> -0.0
  double ax = std::fabs(x);
  if (!(ax < kTanhSatBound)) {
    // saturation; NaN falls here and must propagate
    if (ax != ax) return x;
    return neg ? -1.0 : 1.0;
  }
  double y2 = ax + ax;
  double kd = static_cast<double>(static_cast<int>(y2 * kInvLn2 + 0.5));
  double r = (y2 - kd * kLn2Hi) - kd * kLn2Lo;
  double em_r = expm1_poly(r);
  double two_k = exp2_int(static_cast<int>(kd));
  double em = two_k * em_r + (two_k - 1.0);
  double t = em / (em + 2.0);
  return neg ? -t : t;
}

}  // namespace sympflow::kernels::detail
