#pragma once

#include <vector>

#include "sympflow/sympnet.hpp"

// Forward and reverse-mode core shared by the scalar reference path
// (T = double) and the AVX2 batch path (T = dvec4, four samples per lane).
// Parameters are broadcast scalars; h, t and the state are per-lane. The
// backward pass recomputes module clocks with the exact expressions of the
// forward pass.

namespace sympflow::detail {

template <class T>
struct AdOps;

template <>
struct AdOps<double> {
  static double from(double v) { return v; }
  static double zero() { return 0.0; }
  static double fmadd(double a, double b, double c) { return a * b + c; }
  static double act_f(const Activation* act, double x) { return act->f(x); }
  static double act_df(const Activation* act, double y) { return act->df_from_value(y); }
};

// Trace arena layout per sample:
//   [0, (n_mods+1)*2d)             state snapshots at module boundaries
//   [mods[i].s ...]                sigma values of module i
//   [mods[i].chain ...]            states after shear k of a forward chain,
//                                  k = 1..n_sub-1
//   [mods[i].chain2 ...]           TLA only: post-activation state followed by
//                                  states after inverse shears 1..n_sub-1
struct TraceOffsets {
  int s = -1;
  int chain = -1;
  int chain2 = -1;
};

struct TracePlan {
  std::vector<TraceOffsets> mods;
  int total = 0;
};

inline TracePlan make_trace_plan(const SympNetModel& m) {
  TracePlan tp;
  const int dd = 2 * m.d;
  int off = (static_cast<int>(m.mods.size()) + 1) * dd;
  tp.mods.resize(m.mods.size());
  for (std::size_t i = 0; i < m.mods.size(); ++i) {
    const ModuleSlot& s = m.mods[i];
    TraceOffsets& o = tp.mods[i];
    switch (s.type) {
      case ModuleType::Gradient:
        o.s = off;
        off += s.width;
        break;
      case ModuleType::OtlaLinear:
        o.chain = off;
        off += (s.n_sub - 1) * dd;
        break;
      case ModuleType::OtlaActivation:
        o.s = off;
        off += m.d;
        break;
      case ModuleType::TlaBlock:
        o.chain = off;
        off += (s.n_sub - 1) * dd;
        o.s = off;
        off += m.d;
        o.chain2 = off;
        off += s.n_sub * dd;
        break;
    }
  }
  tp.total = off;
  return tp;
}

inline bool shear_is_up(StartParity start, int k /*1-based*/) {
  bool odd = (k % 2) == 1;
  return start == StartParity::UpFirst ? odd : !odd;
}

// x'[dst] += scale * S * x[src], S packed symmetric
template <class T>
inline void shear_apply(T* x, int d, const double* S, T scale, bool up) {
  using O = AdOps<T>;
  T* dst = up ? x : x + d;
  const T* src = up ? x + d : x;
  for (int i = 0; i < d; ++i) {
    T acc = O::zero();
    for (int j = 0; j < d; ++j)
      acc = O::fmadd(O::from(S[packed_sym_index(d, i, j)]), src[j], acc);
    dst[i] = O::fmadd(scale, acc, dst[i]);
  }
}

// adjoint of shear_apply at the stored pre-shear state
template <class T>
inline void shear_backward(const T* state_before, T* xb, int d, const double* S, T scale,
                           bool up, T* gS) {
  using O = AdOps<T>;
  T* ub = up ? xb : xb + d;        // bar of the updated half
  T* db = up ? xb + d : xb;        // bar of the driving half
  const T* drv = up ? state_before + d : state_before;
  for (int i = 0; i < d; ++i) {
    T acc = O::zero();
    for (int j = 0; j < d; ++j)
      acc = O::fmadd(O::from(S[packed_sym_index(d, i, j)]), ub[j], acc);
    db[i] = O::fmadd(scale, acc, db[i]);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      int idx = packed_sym_index(d, i, j);
      T contrib = i == j ? ub[i] * drv[i] : O::fmadd(ub[i], drv[j], ub[j] * drv[i]);
      gS[idx] = O::fmadd(scale, contrib, gS[idx]);
    }
}

template <class T, bool WithTrace>
inline void model_forward_core(const SympNetModel& m, T h, T t0, T* x, const TracePlan* tp,
                               T* trace) {
  using O = AdOps<T>;
  const int d = m.d;
  const int dd = 2 * d;
  const double* P = m.params.data();
  const int nmods = static_cast<int>(m.mods.size());
  const bool timed = kind_time_aware(m.kind);
  const T hm = timed ? h * O::from(1.0 / m.m_count()) : O::zero();

  for (int mi = 0; mi < nmods; ++mi) {
    const ModuleSlot& s = m.mods[mi];
    if constexpr (WithTrace)
      for (int i = 0; i < dd; ++i) trace[mi * dd + i] = x[i];
    const T t_mod = timed ? O::fmadd(O::from(static_cast<double>(mi)), hm, t0) : O::zero();

    switch (s.type) {
      case ModuleType::Gradient: {
        const int n = s.width;
        const double* K = P + s.off_K;
        const double* a = P + s.off_a;
        const double* b = P + s.off_b;
        const double* c = s.has_time ? P + s.off_c : nullptr;
        T* upd = s.dir == Direction::Up ? x : x + d;
        const T* drv = s.dir == Direction::Up ? x + d : x;
        for (int r = 0; r < n; ++r) {
          T u = O::from(b[r]);
          if (s.has_time) u = O::fmadd(O::from(c[r]), t_mod, u);
          for (int j = 0; j < d; ++j) u = O::fmadd(O::from(K[r + j * n]), drv[j], u);
          T sv = O::act_f(m.act, u);
          if constexpr (WithTrace) trace[tp->mods[mi].s + r] = sv;
          T hw = h * O::from(a[r]) * sv;
          for (int j = 0; j < d; ++j) upd[j] = O::fmadd(O::from(K[r + j * n]), hw, upd[j]);
        }
        break;
      }
      case ModuleType::OtlaLinear: {
        const int td = packed_sym_size(d);
        for (int k = 1; k <= s.n_sub; ++k) {
          shear_apply(x, d, P + s.off_S + (k - 1) * td, h, shear_is_up(s.start, k));
          if constexpr (WithTrace)
            if (k < s.n_sub)
              for (int i = 0; i < dd; ++i) trace[tp->mods[mi].chain + (k - 1) * dd + i] = x[i];
        }
        const double* bias = P + s.off_bias;
        for (int i = 0; i < dd; ++i) x[i] = O::fmadd(O::from(bias[i]), h, x[i]);
        break;
      }
      case ModuleType::OtlaActivation: {
        const double* a = P + s.off_a;
        T* upd = s.dir == Direction::Up ? x : x + d;
        const T* drv = s.dir == Direction::Up ? x + d : x;
        for (int i = 0; i < d; ++i) {
          T sv = O::act_f(m.act, drv[i]);
          if constexpr (WithTrace) trace[tp->mods[mi].s + i] = sv;
          upd[i] = O::fmadd(h * O::from(a[i]), sv, upd[i]);
        }
        break;
      }
      case ModuleType::TlaBlock: {
        const int td = packed_sym_size(d);
        const double* S = P + s.off_S;
        for (int k = 1; k <= s.n_sub; ++k) {
          shear_apply(x, d, S + (k - 1) * td, O::from(1.0), shear_is_up(s.start, k));
          if constexpr (WithTrace)
            if (k < s.n_sub)
              for (int i = 0; i < dd; ++i) trace[tp->mods[mi].chain + (k - 1) * dd + i] = x[i];
        }
        const double* a = P + s.off_a;
        const double* b = P + s.off_b;
        const double* c = s.has_time ? P + s.off_c : nullptr;
        T* upd = s.dir == Direction::Up ? x : x + d;
        const T* drv = s.dir == Direction::Up ? x + d : x;
        for (int i = 0; i < d; ++i) {
          T arg = O::from(b[i]);
          if (s.has_time) arg = O::fmadd(O::from(c[i]), t_mod, arg);
          arg = arg + drv[i];
          T sv = O::act_f(m.act, arg);
          if constexpr (WithTrace) trace[tp->mods[mi].s + i] = sv;
          upd[i] = O::fmadd(h * O::from(a[i]), sv, upd[i]);
        }
        if constexpr (WithTrace)
          for (int i = 0; i < dd; ++i) trace[tp->mods[mi].chain2 + i] = x[i];
        for (int k = s.n_sub; k >= 1; --k) {
          shear_apply(x, d, S + (k - 1) * td, O::from(-1.0), shear_is_up(s.start, k));
          if constexpr (WithTrace) {
            int step = s.n_sub - k + 1;  // inverse step just applied
            if (step < s.n_sub)
              for (int i = 0; i < dd; ++i) trace[tp->mods[mi].chain2 + step * dd + i] = x[i];
          }
        }
        break;
      }
    }
  }
  if constexpr (WithTrace)
    for (int i = 0; i < dd; ++i) trace[nmods * dd + i] = x[i];
}

// xb enters as dLoss/d(output) and leaves as dLoss/d(input); parameter
// gradients accumulate into grads (canonical layout, same T).
template <class T>
inline void model_backward_core(const SympNetModel& m, T h, T t0, const TracePlan& tp,
                                const T* trace, T* xb, T* grads) {
  using O = AdOps<T>;
  const int d = m.d;
  const int dd = 2 * d;
  const double* P = m.params.data();
  const int nmods = static_cast<int>(m.mods.size());
  const bool timed = kind_time_aware(m.kind);
  const T hm = timed ? h * O::from(1.0 / m.m_count()) : O::zero();

  for (int mi = nmods - 1; mi >= 0; --mi) {
    const ModuleSlot& s = m.mods[mi];
    const T* x_in = trace + mi * dd;
    const T t_mod = timed ? O::fmadd(O::from(static_cast<double>(mi)), hm, t0) : O::zero();

    switch (s.type) {
      case ModuleType::Gradient: {
        const int n = s.width;
        const double* K = P + s.off_K;
        const double* a = P + s.off_a;
        const T* sv_arr = trace + tp.mods[mi].s;
        T* ub = s.dir == Direction::Up ? xb : xb + d;
        T* db = s.dir == Direction::Up ? xb + d : xb;
        const T* drv = s.dir == Direction::Up ? x_in + d : x_in;
        for (int r = 0; r < n; ++r) {
          T v = O::zero();
          for (int j = 0; j < d; ++j) v = O::fmadd(O::from(K[r + j * n]), ub[j], v);
          T sv = sv_arr[r];
          T sp = O::act_df(m.act, sv);
          grads[s.off_a + r] = O::fmadd(h * sv, v, grads[s.off_a + r]);
          T g = O::from(a[r]) * sp * v;
          T gh = h * g;
          grads[s.off_b + r] = grads[s.off_b + r] + gh;
          if (s.has_time) grads[s.off_c + r] = O::fmadd(t_mod, gh, grads[s.off_c + r]);
          T hw = h * O::from(a[r]) * sv;
          for (int j = 0; j < d; ++j) {
            int ki = s.off_K + r + j * n;
            grads[ki] = O::fmadd(hw, ub[j], grads[ki]);
            grads[ki] = O::fmadd(gh, drv[j], grads[ki]);
            db[j] = O::fmadd(O::from(K[r + j * n]), gh, db[j]);
          }
        }
        break;
      }
      case ModuleType::OtlaLinear: {
        const int td = packed_sym_size(d);
        for (int i = 0; i < dd; ++i)
          grads[s.off_bias + i] = O::fmadd(h, xb[i], grads[s.off_bias + i]);
        for (int k = s.n_sub; k >= 1; --k) {
          const T* before = k == 1 ? x_in : trace + tp.mods[mi].chain + (k - 2) * dd;
          shear_backward(before, xb, d, P + s.off_S + (k - 1) * td, h,
                         shear_is_up(s.start, k), grads + s.off_S + (k - 1) * td);
        }
        break;
      }
      case ModuleType::OtlaActivation: {
        const double* a = P + s.off_a;
        const T* sv_arr = trace + tp.mods[mi].s;
        T* ub = s.dir == Direction::Up ? xb : xb + d;
        T* db = s.dir == Direction::Up ? xb + d : xb;
        for (int i = 0; i < d; ++i) {
          T sv = sv_arr[i];
          T sp = O::act_df(m.act, sv);
          grads[s.off_a + i] = O::fmadd(h * sv, ub[i], grads[s.off_a + i]);
          db[i] = O::fmadd(h * O::from(a[i]) * sp, ub[i], db[i]);
        }
        break;
      }
      case ModuleType::TlaBlock: {
        const int td = packed_sym_size(d);
        const double* S = P + s.off_S;
        const double* a = P + s.off_a;
        // inverse chain applied shears k = n_sub..1 as steps 1..n_sub
        for (int step = s.n_sub; step >= 1; --step) {
          int k = s.n_sub + 1 - step;
          const T* before = trace + tp.mods[mi].chain2 + (step - 1) * dd;
          shear_backward(before, xb, d, S + (k - 1) * td, O::from(-1.0),
                         shear_is_up(s.start, k), grads + s.off_S + (k - 1) * td);
        }
        const T* sv_arr = trace + tp.mods[mi].s;
        T* ub = s.dir == Direction::Up ? xb : xb + d;
        T* db = s.dir == Direction::Up ? xb + d : xb;
        for (int i = 0; i < d; ++i) {
          T sv = sv_arr[i];
          T sp = O::act_df(m.act, sv);
          grads[s.off_a + i] = O::fmadd(h * sv, ub[i], grads[s.off_a + i]);
          T gh = h * O::from(a[i]) * sp * ub[i];
          grads[s.off_b + i] = grads[s.off_b + i] + gh;
          if (s.has_time) grads[s.off_c + i] = O::fmadd(t_mod, gh, grads[s.off_c + i]);
          db[i] = db[i] + gh;
        }
        for (int k = s.n_sub; k >= 1; --k) {
          const T* before = k == 1 ? x_in : trace + tp.mods[mi].chain + (k - 2) * dd;
          shear_backward(before, xb, d, S + (k - 1) * td, O::from(1.0),
                         shear_is_up(s.start, k), grads + s.off_S + (k - 1) * td);
        }
        break;
      }
    }
  }
}

}  // namespace sympflow::detail
