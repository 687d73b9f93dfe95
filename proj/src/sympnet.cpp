#include "sympflow/sympnet.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "ad_core.hpp"
#include "sympflow/rng.hpp"

namespace sympflow {

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::TG: return "tg";
    case Kind::OTLA: return "otla";
    case Kind::TLA: return "tla";
    case Kind::NATG: return "natg";
    case Kind::NATLA: return "natla";
  }
  throw std::logic_error("kind_name: bad enum");
}

Kind kind_from_name(const std::string& name) {
  std::string low;
  low.reserve(name.size());
  for (char ch : name) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (low == "tg") return Kind::TG;
  if (low == "otla") return Kind::OTLA;
  if (low == "tla") return Kind::TLA;
  if (low == "natg") return Kind::NATG;
  if (low == "natla") return Kind::NATLA;
  throw std::invalid_argument("unknown model kind: " + name);
}

bool kind_time_aware(Kind k) { return k == Kind::NATG || k == Kind::NATLA; }

namespace {

double sigmoid_f(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const Activation kTanh{"tanh", [](double x) { return std::tanh(x); },
                       [](double y) { return 1.0 - y * y; }};
const Activation kSigmoid{"sigmoid", sigmoid_f, [](double y) { return y * (1.0 - y); }};

}  // namespace

const Activation* activation_registry(const std::string& name) {
  if (name == "tanh") return &kTanh;
  if (name == "sigmoid") return &kSigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

long param_count(Kind kind, int d, const ArchSpec& arch) {
  if (d < 1) throw std::invalid_argument("param_count: d must be >= 1");
  if (arch.layers < 1) throw std::invalid_argument("param_count: layers must be >= 1");
  long L = arch.layers;
  long td = packed_sym_size(d);
  switch (kind) {
    case Kind::TG:
    case Kind::NATG: {
      if (arch.width < 1) throw std::invalid_argument("param_count: width must be >= 1");
      long per = static_cast<long>(arch.width) * d +
                 (kind == Kind::NATG ? 3l : 2l) * arch.width;
      return L * per;
    }
    case Kind::OTLA: {
      if (arch.sublayers < 1) throw std::invalid_argument("param_count: sublayers must be >= 1");
      return L * (arch.sublayers * td + 2l * d) + (L - 1) * static_cast<long>(d);
    }
    case Kind::TLA:
    case Kind::NATLA: {
      if (arch.sublayers < 1) throw std::invalid_argument("param_count: sublayers must be >= 1");
      long per = arch.sublayers * td + (kind == Kind::NATLA ? 3l : 2l) * d;
      return L * per;
    }
  }
  throw std::logic_error("param_count: bad enum");
}

namespace {

struct Packer {
  std::vector<ModuleSlot> mods;
  std::vector<double> params;

  int push(const std::vector<double>& v) {
    int off = static_cast<int>(params.size());
    params.insert(params.end(), v.begin(), v.end());
    return off;
  }
};

void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void pack_gradient(Packer& pk, const GradientModuleParams& g, int d, bool timed) {
  check(g.width >= 1, "gradient module: width must be >= 1");
  std::size_t n = static_cast<std::size_t>(g.width);
  check(g.K.size() == n * d, "gradient module: K must be width x d");
  check(g.a.size() == n, "gradient module: a must have length width");
  check(g.b.size() == n, "gradient module: b must have length width");
  check(g.c.size() == (timed ? n : 0), "gradient module: c length mismatch for kind");
  ModuleSlot s;
  s.type = ModuleType::Gradient;
  s.dir = g.direction;
  s.width = g.width;
  s.has_time = timed;
  s.off_K = pk.push(g.K);
  s.off_a = pk.push(g.a);
  s.off_b = pk.push(g.b);
  if (timed) s.off_c = pk.push(g.c);
  pk.mods.push_back(s);
}

void pack_linear(Packer& pk, const LinearModuleParams& l, int d, bool with_bias) {
  check(l.n_sub >= 1, "linear module: n_sub must be >= 1");
  check(l.S.size() == static_cast<std::size_t>(l.n_sub) * packed_sym_size(d),
        "linear module: S must hold n_sub packed symmetric blocks");
  if (with_bias)
    check(l.bias.size() == static_cast<std::size_t>(2 * d),
          "linear module: bias must have length 2d");
  else
    check(l.bias.empty(), "linear module: bias must be empty for TLA blocks");
  ModuleSlot s;
  s.type = ModuleType::OtlaLinear;
  s.start = l.start;
  s.n_sub = l.n_sub;
  s.has_bias = with_bias;
  s.off_S = pk.push(l.S);
  if (with_bias) s.off_bias = pk.push(l.bias);
  pk.mods.push_back(s);
}

void finish(SympNetModel& m, Packer&& pk) {
  m.mods = std::move(pk.mods);
  m.params = std::move(pk.params);
}

}  // namespace

SympNetModel make_gradient_model(Kind kind, int d, std::vector<GradientModuleParams> modules,
                                 const std::string& activation) {
  check(kind == Kind::TG || kind == Kind::NATG,
        "make_gradient_model: kind must be TG or NATG");
  check(d >= 1, "make_gradient_model: d must be >= 1");
  check(!modules.empty(), "make_gradient_model: need at least one module");
  SympNetModel m;
  m.kind = kind;
  m.d = d;
  m.act = activation_registry(activation);
  m.arch.layers = static_cast<int>(modules.size());
  m.arch.width = modules.front().width;
  Packer pk;
  for (const auto& g : modules) pack_gradient(pk, g, d, kind == Kind::NATG);
  finish(m, std::move(pk));
  return m;
}

SympNetModel make_otla_model(int d, std::vector<LinearModuleParams> linear,
                             std::vector<ActivationModuleParams> activations,
                             const std::string& activation) {
  check(d >= 1, "make_otla_model: d must be >= 1");
  check(!linear.empty(), "make_otla_model: need at least one linear module");
  check(activations.size() + 1 == linear.size(),
        "make_otla_model: need one activation module between consecutive linear modules");
  SympNetModel m;
  m.kind = Kind::OTLA;
  m.d = d;
  m.act = activation_registry(activation);
  m.arch.layers = static_cast<int>(linear.size());
  m.arch.sublayers = linear.front().n_sub;
  Packer pk;
  for (std::size_t i = 0; i < linear.size(); ++i) {
    pack_linear(pk, linear[i], d, /*with_bias=*/true);
    if (i < activations.size()) {
      const ActivationModuleParams& w = activations[i];
      check(w.a.size() == static_cast<std::size_t>(d),
            "activation module: a must have length d");
      check(w.b.empty() && w.c.empty(),
            "activation module: OTLA activations take neither shift nor time");
      ModuleSlot s;
      s.type = ModuleType::OtlaActivation;
      s.dir = w.direction;
      s.off_a = pk.push(w.a);
      pk.mods.push_back(s);
    }
  }
  finish(m, std::move(pk));
  return m;
}

SympNetModel make_tla_model(Kind kind, int d, std::vector<TlaBlockParams> blocks,
                            const std::string& activation) {
  check(kind == Kind::TLA || kind == Kind::NATLA, "make_tla_model: kind must be TLA or NATLA");
  check(d >= 1, "make_tla_model: d must be >= 1");
  check(!blocks.empty(), "make_tla_model: need at least one block");
  bool timed = kind == Kind::NATLA;
  SympNetModel m;
  m.kind = kind;
  m.d = d;
  m.act = activation_registry(activation);
  m.arch.layers = static_cast<int>(blocks.size());
  m.arch.sublayers = blocks.front().lin.n_sub;
  Packer pk;
  for (const auto& blk : blocks) {
    check(blk.lin.n_sub >= 1, "block: n_sub must be >= 1");
    check(blk.lin.bias.empty(), "block: TLA linear chains carry no bias");
    check(blk.lin.S.size() == static_cast<std::size_t>(blk.lin.n_sub) * packed_sym_size(d),
          "block: S must hold n_sub packed symmetric blocks");
    const ActivationModuleParams& w = blk.act;
    check(w.a.size() == static_cast<std::size_t>(d), "block: activation a must have length d");
    check(w.b.size() == static_cast<std::size_t>(d), "block: activation b must have length d");
    check(w.c.size() == (timed ? static_cast<std::size_t>(d) : 0),
          "block: activation c length mismatch for kind");
    ModuleSlot s;
    s.type = ModuleType::TlaBlock;
    s.dir = w.direction;
    s.start = blk.lin.start;
    s.n_sub = blk.lin.n_sub;
    s.has_shift = true;
    s.has_time = timed;
    s.off_S = pk.push(blk.lin.S);
    s.off_a = pk.push(w.a);
    s.off_b = pk.push(w.b);
    if (timed) s.off_c = pk.push(w.c);
    pk.mods.push_back(s);
  }
  finish(m, std::move(pk));
  return m;
}

SympNetModel init_model(Kind kind, int d, const ArchSpec& arch, std::uint64_t seed,
                        const std::string& activation) {
  param_count(kind, d, arch);  // validates arch, result unused here
  Rng rng(seed);
  const double small = 0.01;
  auto normals = [&rng](std::size_t n, double scale) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.normal();
    return v;
  };

  SympNetModel m;
  switch (kind) {
    case Kind::TG:
    case Kind::NATG: {
      bool timed = kind == Kind::NATG;
      int n = arch.width;
      double kscale = 1.0 / std::sqrt(static_cast<double>(n));
      std::vector<GradientModuleParams> mods;
      for (int i = 0; i < arch.layers; ++i) {
        GradientModuleParams g;
        g.direction = i % 2 == 0 ? Direction::Up : Direction::Low;
        g.width = n;
        g.K = normals(static_cast<std::size_t>(n) * d, kscale);
        g.a = normals(n, small);
        g.b = normals(n, small);
        if (timed) g.c = normals(n, small);
        mods.push_back(std::move(g));
      }
      m = make_gradient_model(kind, d, std::move(mods), activation);
      break;
    }
    case Kind::OTLA: {
      int td = packed_sym_size(d);
      std::vector<LinearModuleParams> lins;
      std::vector<ActivationModuleParams> acts;
      for (int i = 0; i < arch.layers; ++i) {
        LinearModuleParams l;
        l.start = i % 2 == 0 ? StartParity::UpFirst : StartParity::LowFirst;
        l.n_sub = arch.sublayers;
        l.S = normals(static_cast<std::size_t>(arch.sublayers) * td, small);
        l.bias = normals(2 * static_cast<std::size_t>(d), small);
        lins.push_back(std::move(l));
        if (i + 1 < arch.layers) {
          ActivationModuleParams w;
          w.direction = i % 2 == 0 ? Direction::Up : Direction::Low;
          w.a = normals(d, small);
          acts.push_back(std::move(w));
        }
      }
      m = make_otla_model(d, std::move(lins), std::move(acts), activation);
      break;
    }
    case Kind::TLA:
    case Kind::NATLA: {
      bool timed = kind == Kind::NATLA;
      int td = packed_sym_size(d);
      std::vector<TlaBlockParams> blocks;
      for (int i = 0; i < arch.layers; ++i) {
        TlaBlockParams blk;
        blk.lin.start = i % 2 == 0 ? StartParity::UpFirst : StartParity::LowFirst;
        blk.lin.n_sub = arch.sublayers;
        blk.lin.S = normals(static_cast<std::size_t>(arch.sublayers) * td, small);
        blk.act.direction = i % 2 == 0 ? Direction::Up : Direction::Low;
        blk.act.a = normals(d, small);
        blk.act.b = normals(d, small);
        if (timed) blk.act.c = normals(d, small);
        blocks.push_back(std::move(blk));
      }
      m = make_tla_model(kind, d, std::move(blocks), activation);
      break;
    }
  }
  m.arch = arch;
  m.seed = seed;
  return m;
}

namespace {

void validate_eval(const SympNetModel& m, const std::optional<double>& t, const PhasePoint& x) {
  if (m.d < 1 || m.mods.empty()) throw std::invalid_argument("model is empty");
  if (static_cast<int>(x.dim()) != m.d)
    throw std::invalid_argument("forward: point dimension does not match model");
  if (kind_time_aware(m.kind) && !t.has_value())
    throw std::invalid_argument("forward: kind " + kind_name(m.kind) + " requires t");
}

}  // namespace

PhasePoint forward(const SympNetModel& m, double h, std::optional<double> t,
                   const PhasePoint& x) {
  validate_eval(m, t, x);
  std::vector<double> buf = x.flat();
  detail::model_forward_core<double, false>(m, h, t.value_or(0.0), buf.data(), nullptr,
                                            nullptr);
  return PhasePoint::from_flat(buf);
}

std::vector<double> dh_at_zero(const SympNetModel& m, std::optional<double> t,
                               const PhasePoint& x) {
  validate_eval(m, t, x);
  const double e = 1e-6;
  std::vector<double> plus = x.flat(), minus = x.flat();
  detail::model_forward_core<double, false>(m, e, t.value_or(0.0), plus.data(), nullptr,
                                            nullptr);
  detail::model_forward_core<double, false>(m, -e, t.value_or(0.0), minus.data(), nullptr,
                                            nullptr);
  std::vector<double> out(2 * m.d);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (plus[i] - minus[i]) / (2.0 * e);
  return out;
}

namespace {

// J <- [[I, scale*A],[0,I]] * J (up) or the lower mirror; A is d x d dense
void apply_dense_shear(Mat& jac, const std::vector<double>& a_dense, double scale, bool up,
                       int d) {
  int rdst = up ? 0 : d;
  int rsrc = up ? d : 0;
  for (int i = 0; i < d; ++i)
    for (std::size_t c = 0; c < jac.cols; ++c) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += a_dense[i * d + j] * jac(rsrc + j, c);
      jac(rdst + i, c) += scale * acc;
    }
}

void apply_packed_shear(Mat& jac, const double* s_packed, double scale, bool up, int d) {
  int rdst = up ? 0 : d;
  int rsrc = up ? d : 0;
  for (int i = 0; i < d; ++i)
    for (std::size_t c = 0; c < jac.cols; ++c) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += s_packed[packed_sym_index(d, i, j)] * jac(rsrc + j, c);
      jac(rdst + i, c) += scale * acc;
    }
}

void apply_diag_shear(Mat& jac, const std::vector<double>& g, double scale, bool up, int d) {
  int rdst = up ? 0 : d;
  int rsrc = up ? d : 0;
  for (int i = 0; i < d; ++i)
    for (std::size_t c = 0; c < jac.cols; ++c) jac(rdst + i, c) += scale * g[i] * jac(rsrc + i, c);
}

}  // namespace

Mat forward_jacobian(const SympNetModel& m, double h, std::optional<double> t,
                     const PhasePoint& x) {
  validate_eval(m, t, x);
  const int d = m.d;
  // run the forward once to collect every sigma value
  detail::TracePlan tp = detail::make_trace_plan(m);
  std::vector<double> trace(tp.total);
  std::vector<double> buf = x.flat();
  detail::model_forward_core<double, true>(m, h, t.value_or(0.0), buf.data(), &tp,
                                           trace.data());

  Mat jac = Mat::identity(2 * d);
  const double* P = m.params.data();
  for (std::size_t mi = 0; mi < m.mods.size(); ++mi) {
    const ModuleSlot& s = m.mods[mi];
    switch (s.type) {
      case ModuleType::Gradient: {
        const int n = s.width;
        const double* K = P + s.off_K;
        const double* a = P + s.off_a;
        std::vector<double> dense(static_cast<std::size_t>(d) * d, 0.0);
        for (int r = 0; r < n; ++r) {
          double sv = trace[tp.mods[mi].s + r];
          double coef = a[r] * m.act->df_from_value(sv);
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) dense[i * d + j] += coef * K[r + i * n] * K[r + j * n];
        }
        apply_dense_shear(jac, dense, h, s.dir == Direction::Up, d);
        break;
      }
      case ModuleType::OtlaLinear: {
        const int td = packed_sym_size(d);
        for (int k = 1; k <= s.n_sub; ++k)
          apply_packed_shear(jac, P + s.off_S + (k - 1) * td, h,
                             detail::shear_is_up(s.start, k), d);
        break;
      }
      case ModuleType::OtlaActivation: {
        const double* a = P + s.off_a;
        std::vector<double> g(d);
        for (int i = 0; i < d; ++i)
          g[i] = a[i] * m.act->df_from_value(trace[tp.mods[mi].s + i]);
        apply_diag_shear(jac, g, h, s.dir == Direction::Up, d);
        break;
      }
      case ModuleType::TlaBlock: {
        const int td = packed_sym_size(d);
        const double* S = P + s.off_S;
        for (int k = 1; k <= s.n_sub; ++k)
          apply_packed_shear(jac, S + (k - 1) * td, 1.0, detail::shear_is_up(s.start, k), d);
        const double* a = P + s.off_a;
        std::vector<double> g(d);
        for (int i = 0; i < d; ++i)
          g[i] = a[i] * m.act->df_from_value(trace[tp.mods[mi].s + i]);
        apply_diag_shear(jac, g, h, s.dir == Direction::Up, d);
        for (int k = s.n_sub; k >= 1; --k)
          apply_packed_shear(jac, S + (k - 1) * td, -1.0, detail::shear_is_up(s.start, k), d);
        break;
      }
    }
  }
  return jac;
}

namespace {

PhasePoint run_chain(const LinearModuleParams& lin, int d, const PhasePoint& x, bool inverse) {
  if (d < 1) throw std::invalid_argument("linear module: d must be >= 1");
  if (!lin.bias.empty())
    throw std::invalid_argument("linear module apply/inverse expects bias-free shear chains");
  if (lin.n_sub < 1 ||
      lin.S.size() != static_cast<std::size_t>(lin.n_sub) * packed_sym_size(d))
    throw std::invalid_argument("linear module: S must hold n_sub packed symmetric blocks");
  if (static_cast<int>(x.dim()) != d)
    throw std::invalid_argument("linear module: point dimension mismatch");
  const int td = packed_sym_size(d);
  std::vector<double> buf = x.flat();
  if (!inverse) {
    for (int k = 1; k <= lin.n_sub; ++k)
      detail::shear_apply<double>(buf.data(), d, lin.S.data() + (k - 1) * td, 1.0,
                                  detail::shear_is_up(lin.start, k));
  } else {
    for (int k = lin.n_sub; k >= 1; --k)
      detail::shear_apply<double>(buf.data(), d, lin.S.data() + (k - 1) * td, -1.0,
                                  detail::shear_is_up(lin.start, k));
  }
  return PhasePoint::from_flat(buf);
}

}  // namespace

PhasePoint linear_module_apply(const LinearModuleParams& lin, int d, const PhasePoint& x) {
  return run_chain(lin, d, x, false);
}

PhasePoint linear_module_inverse(const LinearModuleParams& lin, int d, const PhasePoint& x) {
  return run_chain(lin, d, x, true);
}

}  // namespace sympflow
