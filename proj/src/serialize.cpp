#include "sympflow/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sympflow {

namespace {

constexpr int kFormatVersion = 1;

const char* dir_name(Direction d) { return d == Direction::Up ? "up" : "low"; }
const char* start_name(StartParity s) {
  return s == StartParity::UpFirst ? "up_first" : "low_first";
}

std::vector<double> slice(const std::vector<double>& v, int off, int n) {
  return std::vector<double>(v.begin() + off, v.begin() + off + n);
}

// Copies a named parameter array back into the flat vector, validating size.
void fill(std::vector<double>& params, const nlohmann::json& jmod, const char* key, int off,
          int n) {
  if (!jmod.contains(key) || !jmod[key].is_array())
    throw std::runtime_error(std::string("checkpoint module missing array '") + key + "'");
  const auto& arr = jmod[key];
  if (static_cast<int>(arr.size()) != n)
    throw std::runtime_error(std::string("checkpoint array '") + key + "' has " +
                             std::to_string(arr.size()) + " entries, expected " +
                             std::to_string(n));
  for (int i = 0; i < n; ++i) {
    if (!arr[static_cast<std::size_t>(i)].is_number())
      throw std::runtime_error(std::string("checkpoint array '") + key + "' holds a non-number");
    params[static_cast<std::size_t>(off + i)] = arr[static_cast<std::size_t>(i)].get<double>();
  }
}

void expect_field(const nlohmann::json& jmod, const char* key, const std::string& want) {
  if (!jmod.contains(key) || jmod[key].get<std::string>() != want)
    throw std::runtime_error(std::string("checkpoint module layout mismatch at '") + key +
                             "': expected " + want);
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json model_to_json(const SympNetModel& m) {
  if (m.arch.layers < 1 || param_count(m.kind, m.d, m.arch) != m.n_params())
    throw std::invalid_argument("model_to_json: model does not match a uniform architecture");
  if (m.act == nullptr) throw std::invalid_argument("model_to_json: model has no activation");
  for (double v : m.params)
    if (!std::isfinite(v)) throw std::invalid_argument("model_to_json: non-finite parameter");

  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = kind_name(m.kind);
  j["d"] = m.d;
  j["activation"] = m.act->name;
  j["arch"] = {{"layers", m.arch.layers}, {"width", m.arch.width}, {"sublayers", m.arch.sublayers}};
  j["seed"] = m.seed;

  nlohmann::json mods = nlohmann::json::array();
  const int d = m.d;
  for (const ModuleSlot& s : m.mods) {
    nlohmann::json jm;
    switch (s.type) {
      case ModuleType::Gradient:
        jm["type"] = "gradient";
        jm["dir"] = dir_name(s.dir);
        jm["width"] = s.width;
        jm["K"] = slice(m.params, s.off_K, s.width * d);
        jm["a"] = slice(m.params, s.off_a, s.width);
        jm["b"] = slice(m.params, s.off_b, s.width);
        if (s.has_time) jm["c"] = slice(m.params, s.off_c, s.width);
        break;
      case ModuleType::OtlaLinear:
        jm["type"] = "otla_linear";
        jm["start"] = start_name(s.start);
        jm["n_sub"] = s.n_sub;
        jm["S"] = slice(m.params, s.off_S, s.n_sub * packed_sym_size(d));
        jm["bias"] = slice(m.params, s.off_bias, 2 * d);
        break;
      case ModuleType::OtlaActivation:
        jm["type"] = "otla_activation";
        jm["dir"] = dir_name(s.dir);
        jm["a"] = slice(m.params, s.off_a, d);
        break;
      case ModuleType::TlaBlock:
        jm["type"] = "tla_block";
        jm["start"] = start_name(s.start);
        jm["n_sub"] = s.n_sub;
        jm["S"] = slice(m.params, s.off_S, s.n_sub * packed_sym_size(d));
        jm["a"] = slice(m.params, s.off_a, d);
        jm["b"] = slice(m.params, s.off_b, d);
        if (s.has_time) jm["c"] = slice(m.params, s.off_c, d);
        break;
    }
    mods.push_back(std::move(jm));
  }
  j["modules"] = std::move(mods);
  return j;
}

SympNetModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kFormatVersion)
    throw std::runtime_error("checkpoint: unsupported format_version");
  for (const char* key : {"kind", "d", "activation", "arch", "seed", "modules"})
    if (!j.contains(key))
      throw std::runtime_error(std::string("checkpoint: missing field '") + key + "'");

  const Kind kind = kind_from_name(j["kind"].get<std::string>());
  const int d = j["d"].get<int>();
  ArchSpec arch;
  arch.layers = j["arch"]["layers"].get<int>();
  arch.width = j["arch"]["width"].get<int>();
  arch.sublayers = j["arch"]["sublayers"].get<int>();
  const std::string activation = j["activation"].get<std::string>();

  // The slot layout is a pure function of (kind, d, arch); rebuild it and
  // overwrite every drawn parameter with the stored arrays.
  SympNetModel m = init_model(kind, d, arch, j["seed"].get<std::uint64_t>(), activation);

  const auto& mods = j["modules"];
  if (!mods.is_array() || mods.size() != m.mods.size())
    throw std::runtime_error("checkpoint: module count does not match architecture");
  for (std::size_t i = 0; i < m.mods.size(); ++i) {
    const ModuleSlot& s = m.mods[i];
    const nlohmann::json& jm = mods[i];
    switch (s.type) {
      case ModuleType::Gradient:
        expect_field(jm, "type", "gradient");
        expect_field(jm, "dir", dir_name(s.dir));
        fill(m.params, jm, "K", s.off_K, s.width * d);
        fill(m.params, jm, "a", s.off_a, s.width);
        fill(m.params, jm, "b", s.off_b, s.width);
        if (s.has_time) fill(m.params, jm, "c", s.off_c, s.width);
        break;
      case ModuleType::OtlaLinear:
        expect_field(jm, "type", "otla_linear");
        expect_field(jm, "start", start_name(s.start));
        fill(m.params, jm, "S", s.off_S, s.n_sub * packed_sym_size(d));
        fill(m.params, jm, "bias", s.off_bias, 2 * d);
        break;
      case ModuleType::OtlaActivation:
        expect_field(jm, "type", "otla_activation");
        expect_field(jm, "dir", dir_name(s.dir));
        fill(m.params, jm, "a", s.off_a, d);
        break;
      case ModuleType::TlaBlock:
        expect_field(jm, "type", "tla_block");
        expect_field(jm, "start", start_name(s.start));
        fill(m.params, jm, "S", s.off_S, s.n_sub * packed_sym_size(d));
        fill(m.params, jm, "a", s.off_a, d);
        fill(m.params, jm, "b", s.off_b, d);
        if (s.has_time) fill(m.params, jm, "c", s.off_c, d);
        break;
    }
  }
  for (double v : m.params)
    if (!std::isfinite(v)) throw std::runtime_error("checkpoint: non-finite parameter");
  return m;
}

void save_checkpoint(const std::string& path, const SympNetModel& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << model_to_json(m).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

SympNetModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint " + path + ": " + e.what());
  }
  return model_from_json(j);
}

void write_dataset_jsonl(const std::string& path, const std::vector<TrainingSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const TrainingSample& s : samples) {
    nlohmann::json j;
    j["x"] = s.x.flat();
    if (s.t) j["t"] = *s.t;
    j["h"] = s.h;
    j["y"] = s.y.flat();
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrainingSample> read_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset: " + path);
  std::vector<TrainingSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    TrainingSample s;
    s.x = PhasePoint::from_flat(j.at("x").get<std::vector<double>>());
    s.y = PhasePoint::from_flat(j.at("y").get<std::vector<double>>());
    s.h = j.at("h").get<double>();
    if (j.contains("t")) s.t = j["t"].get<double>();
    if (s.x.dim() != s.y.dim())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": x/y dimension mismatch");
    out.push_back(std::move(s));
  }
  return out;
}

void write_loss_csv(const std::string& path, const std::vector<double>& loss) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss csv: " + path);
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < loss.size(); ++e) out << e << ',' << fmt17(loss[e]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_trajectory_csv(const std::string& path, const std::vector<PhasePoint>& pred,
                          const std::vector<PhasePoint>& ref, double t0, double h) {
  if (pred.size() != ref.size())
    throw std::invalid_argument("write_trajectory_csv: length mismatch");
  for (const auto& traj : {&pred, &ref})
    for (const PhasePoint& x : *traj)
      if (x.dim() != 1) throw std::invalid_argument("write_trajectory_csv: needs d=1 points");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory csv: " + path);
  out << "step,t,p_pred,q_pred,p_ref,q_ref\n";
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    out << k << ',' << fmt17(t) << ',' << fmt17(pred[k].p[0]) << ',' << fmt17(pred[k].q[0])
        << ',' << fmt17(ref[k].p[0]) << ',' << fmt17(ref[k].q[0]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json report_to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["pass"] = r.pass;
  j["measured"] = r.measured;
  j["tolerances"] = r.tolerances;
  return j;
}

}  // namespace sympflow
