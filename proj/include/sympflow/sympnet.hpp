#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sympflow/linalg.hpp"
#include "sympflow/phase.hpp"

// Symplectic network models. Five kinds:
//
//   TG     gradient modules  p' = p + h K^T diag(a) sigma(Kq + b)   (and the
//          q-updating mirror), alternating up/low
//   OTLA   linear modules (alternating shear chains scaled by h, plus an
//          h-scaled bias) interleaved with h-scaled activation shears
//   TLA    blocks v^{-1} . w(h,.) . v where v is an unscaled shear chain and
//          w an h-scaled activation shear with shift, sharing v's parameters
//   NATG   TG with time input: sigma(Kx + ct + b), the model clock advancing
//          by h/m after each of the m modules
//   NATLA  TLA with time input: sigma(x + ct + b), clock advancing by h/m
//          after each of the m blocks
//
// Every kind is symplectic in x for any parameter values and reduces to the
// identity at h = 0.

namespace sympflow {

enum class Kind { TG, OTLA, TLA, NATG, NATLA };

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& name);
// true for kinds that take a time input
bool kind_time_aware(Kind k);

enum class Direction { Up, Low };
enum class StartParity { UpFirst, LowFirst };

struct Activation {
  std::string name;
  double (*f)(double);
  // derivative expressed through the function value y = f(x)
  double (*df_from_value)(double y);
};

// "tanh" or "sigmoid"; throws for unknown names
const Activation* activation_registry(const std::string& name);

// ---- construction-time parameter bundles ----

struct GradientModuleParams {
  Direction direction = Direction::Up;
  int width = 0;          // n
  std::vector<double> K;  // n x d, column-major (column j occupies [j*n, (j+1)*n))
  std::vector<double> a;  // n
  std::vector<double> b;  // n
  std::vector<double> c;  // n for time-aware kinds, empty otherwise
};

// Chain of alternating symmetric shears. S holds n_sub packed d x d symmetric
// blocks, each stored as the upper triangle row by row (d(d+1)/2 values).
// bias (2d, p-part then q-part) is used by OTLA linear modules and must be
// empty for TLA blocks.
struct LinearModuleParams {
  StartParity start = StartParity::UpFirst;
  int n_sub = 0;
  std::vector<double> S;
  std::vector<double> bias;
};

struct ActivationModuleParams {
  Direction direction = Direction::Up;
  std::vector<double> a;  // d
  std::vector<double> b;  // d shift inside sigma (TLA/NATLA), empty for OTLA
  std::vector<double> c;  // d time coefficients (NATLA), empty otherwise
};

struct TlaBlockParams {
  LinearModuleParams lin;  // shared between v and v^{-1}
  ActivationModuleParams act;
};

// Uniform architecture description. Meaning of layers by kind:
// TG/NATG: gradient modules; OTLA: linear modules (activations go between
// them, so layers-1 of those); TLA/NATLA: blocks.
struct ArchSpec {
  int layers = 0;
  int width = 0;      // TG/NATG only
  int sublayers = 0;  // shears per linear module or block
};

// ---- compiled model ----

enum class ModuleType { Gradient, OtlaLinear, OtlaActivation, TlaBlock };

// Shape and flat-parameter offsets for one module in forward order.
struct ModuleSlot {
  ModuleType type = ModuleType::Gradient;
  Direction dir = Direction::Up;
  StartParity start = StartParity::UpFirst;
  int width = 0;   // gradient module n
  int n_sub = 0;   // shear count
  bool has_shift = false;  // activation b inside sigma
  bool has_time = false;   // c parameters
  bool has_bias = false;   // OTLA linear bias
  int off_K = -1, off_a = -1, off_b = -1, off_c = -1, off_S = -1, off_bias = -1;
};

// Parameters live in one flat vector in canonical order: modules in forward
// order; per gradient module K (column-major), a, b, then c; per OTLA linear
// module S_1..S_n then bias; per OTLA activation module a; per TLA/NATLA
// block S_1..S_n, a, b, then c. Checkpoints, Adam and the gradient vector
// all share this layout.
struct SympNetModel {
  Kind kind = Kind::TG;
  int d = 0;
  const Activation* act = nullptr;
  ArchSpec arch;
  std::uint64_t seed = 0;  // init seed; 0 for hand-built models
  std::vector<ModuleSlot> mods;
  std::vector<double> params;

  int n_params() const { return static_cast<int>(params.size()); }
  // divisor of the h/m clock update; equals the module count (NATG) or block
  // count (NATLA); unused by autonomous kinds
  int m_count() const { return static_cast<int>(mods.size()); }
};

// ---- construction ----

// Number of parameters of a uniform architecture.
long param_count(Kind kind, int d, const ArchSpec& arch);

// Random near-identity initialization: K entries ~ N(0, 1/n), all other
// parameters ~ N(0, 0.01^2), drawn in canonical order from a deterministic
// stream. Module directions and parities alternate starting with up.
SympNetModel init_model(Kind kind, int d, const ArchSpec& arch, std::uint64_t seed,
                        const std::string& activation = "tanh");

// Hand-built models, mostly for tests. Validate shapes and throw
// std::invalid_argument on mismatch.
SympNetModel make_gradient_model(Kind kind, int d, std::vector<GradientModuleParams> modules,
                                 const std::string& activation = "tanh");
SympNetModel make_otla_model(int d, std::vector<LinearModuleParams> linear,
                             std::vector<ActivationModuleParams> activations,
                             const std::string& activation = "tanh");
SympNetModel make_tla_model(Kind kind, int d, std::vector<TlaBlockParams> blocks,
                            const std::string& activation = "tanh");

// ---- evaluation ----

// One step of size h from x. t is required for time-aware kinds (throws if
// missing) and ignored otherwise.
PhasePoint forward(const SympNetModel& m, double h, std::optional<double> t,
                   const PhasePoint& x);

// Exact Jacobian d forward / d x as a 2d x 2d matrix, rows/cols ordered
// (p, q).
Mat forward_jacobian(const SympNetModel& m, double h, std::optional<double> t,
                     const PhasePoint& x);

// d/dh forward(h, t, x) at h = 0, central difference with step 1e-6,
// returned in flat (p, q) order. For separable-generator kinds the first d
// entries depend only on q and the last d only on p.
std::vector<double> dh_at_zero(const SympNetModel& m, std::optional<double> t,
                               const PhasePoint& x);

// Unscaled shear chain of a TLA-style linear module (bias must be empty).
PhasePoint linear_module_apply(const LinearModuleParams& lin, int d, const PhasePoint& x);
// Inverse chain: negated shears in reverse order.
PhasePoint linear_module_inverse(const LinearModuleParams& lin, int d, const PhasePoint& x);

// packed symmetric index helpers shared with tests
inline int packed_sym_size(int d) { return d * (d + 1) / 2; }
inline int packed_sym_index(int d, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * d - i * (i - 1) / 2 + (j - i);
}

}  // namespace sympflow
