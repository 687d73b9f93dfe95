#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sympflow/experiments.hpp"
#include "sympflow/serialize.hpp"
#include "sympflow/training.hpp"
#include "sympflow/verify.hpp"

namespace {

using nlohmann::json;
using namespace sympflow;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  return j;
}

std::pair<double, double> parse_range(const json& j, const char* key) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 2)
    throw std::runtime_error(std::string("field '") + key + "' must be [lo, hi]");
  return {arr[0].get<double>(), arr[1].get<double>()};
}

DatasetSpec parse_dataset_spec(const json& j) {
  DatasetSpec ds;
  ds.system_id = j.at("system").get<std::string>();
  ds.n = j.at("n").get<int>();
  for (const auto& box : j.at("x_box")) {
    if (!box.is_array() || box.size() != 2)
      throw std::runtime_error("x_box entries must be [lo, hi]");
    ds.x_box.push_back({box[0].get<double>(), box[1].get<double>()});
  }
  ds.h_range = parse_range(j, "h_range");
  if (j.contains("t_range")) ds.t_range = parse_range(j, "t_range");
  const std::string labels = j.value("labels", "analytic");
  if (labels == "analytic" || labels == "exact")
    ds.labels = LabelOracle::ExactFlow;
  else if (labels == "composition6")
    ds.labels = LabelOracle::Composition6Substeps;
  else
    throw std::runtime_error("labels must be 'analytic' or 'composition6'");
  ds.substeps = j.value("substeps", 10);
  ds.seed = j.value("seed", std::uint64_t{0});
  return ds;
}

ArchSpec parse_arch(const json& j) {
  ArchSpec a;
  a.layers = j.at("layers").get<int>();
  a.width = j.value("width", 0);
  a.sublayers = j.value("sublayers", 0);
  return a;
}

int cmd_gen_data(const std::string& config, const std::string& system,
                 const std::string& out, std::optional<std::uint64_t> seed) {
  DatasetSpec ds;
  if (!config.empty()) {
    ds = parse_dataset_spec(load_json(config));
  } else {
    ds = experiment_def(system).data;
  }
  if (seed) ds.seed = *seed;
  const auto samples = sample_dataset(ds);
  write_dataset_jsonl(out, samples);
  std::cout << "wrote " << samples.size() << " samples to " << out << '\n';
  return 0;
}

int cmd_train(const std::string& config, std::string out, bool ci,
              std::optional<std::uint64_t> seed) {
  const json j = load_json(config);
  const json& jm = j.at("model");
  const Kind kind = kind_from_name(jm.at("kind").get<std::string>());
  const int d = jm.value("d", 1);
  const ArchSpec arch = parse_arch(jm.at("arch"));
  const std::string activation = jm.value("activation", "tanh");
  const std::uint64_t model_seed = seed ? *seed : jm.value("seed", std::uint64_t{1});

  const auto data = read_dataset_jsonl(j.at("dataset").get<std::string>());

  const json& jt = j.at("train");
  TrainConfig cfg;
  cfg.epochs = jt.at("epochs").get<int>();
  if (ci) cfg.epochs = std::max(1, cfg.epochs / 50);
  cfg.learning_rate = jt.value("learning_rate", 1e-3);
  cfg.seed = model_seed;
  cfg.checkpoint_cadence = jt.value("checkpoint_cadence", 0);

  if (out.empty()) out = ".";
  std::filesystem::create_directories(out);

  SympNetModel model = init_model(kind, d, arch, model_seed, activation);
  TrainCallbacks cb;
  if (cfg.checkpoint_cadence > 0) {
    cb.on_checkpoint = [&](int epoch, const SympNetModel& m) {
      save_checkpoint(out + "/checkpoint_epoch" + std::to_string(epoch) + ".json", m);
    };
  }
  const TrainResult tr = train(model, data, cfg, cb);
  save_checkpoint(out + "/checkpoint.json", tr.model);
  write_loss_csv(out + "/loss.csv", tr.loss_history);
  std::cout << "final loss " << tr.loss_history.back() << " after " << cfg.epochs
            << " epochs; checkpoint in " << out << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config, std::string out) {
  const SympNetModel model = load_checkpoint(checkpoint);
  const json j = load_json(config);
  const HamiltonianSystem sys = make_system(j.at("system").get<std::string>());
  const PhasePoint x0 = PhasePoint::from_flat(j.at("x0").get<std::vector<double>>());
  const double h = j.at("h").get<double>();
  const int k = j.at("k").get<int>();
  std::optional<double> t0;
  if (j.contains("t0")) t0 = j["t0"].get<double>();

  const auto pred = rollout(model, x0, h, k, t0);
  std::vector<PhasePoint> ref = {x0};
  const double t_start = t0.value_or(0.0);
  for (int i = 0; i < k; ++i)
    ref.push_back(sys.exact_flow->eval(t_start + i * h, h, ref.back()));
  double max_err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    max_err = std::max(max_err, inf_dist(pred[i], ref[i]));

  json result;
  result["checkpoint"] = checkpoint;
  result["system"] = sys.id;
  result["k"] = k;
  result["h"] = h;
  result["test_max_error"] = max_err;
  result["energy_drift"] = energy_drift(sys, pred, ref, t0, h);
  std::cout << result.dump(2) << '\n';
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_trajectory_csv(out + "/trajectory.csv", pred, ref, t_start, h);
    std::ofstream f(out + "/eval.json");
    f << result.dump(2) << '\n';
  }
  return 0;
}

VerificationReport parameter_count_report() {
  VerificationReport r;
  r.id = "parameter_counts";
  const long expected[3][4] = {{450, 34, 30, 0}, {450, 55, 48, 0}, {360, 960, 480, 1200}};
  const char* ids[3] = {"pendulum", "linear", "forced_ho"};
  for (int e = 0; e < 3; ++e) {
    const ExperimentDef def = experiment_def(ids[e]);
    for (std::size_t row = 0; row < def.rows.size(); ++row) {
      const long got = param_count(def.rows[row].kind, 1, def.rows[row].arch);
      const std::string key =
          std::string(ids[e]) + "/" + kind_name(def.rows[row].kind) + "_deviation";
      r.measured[key] = static_cast<double>(got - expected[e][row]);
      r.tolerances[key] = 0.0;
    }
  }
  bool pass = true;
  for (const auto& [key, tol] : r.tolerances)
    if (std::fabs(r.measured.at(key)) > tol) pass = false;
  r.pass = pass;
  return r;
}

int cmd_verify(const std::string& suite, const std::string& out) {
  std::vector<VerificationReport> reports;
  const bool all = suite == "all";
  if (all || suite == "counterexample") reports.push_back(counterexample_check());
  if (all || suite == "counts") reports.push_back(parameter_count_report());
  if (all || suite == "structural") {
    std::vector<SympNetModel> models;
    std::uint64_t seed = 1;
    for (Kind k : {Kind::TG, Kind::OTLA, Kind::TLA, Kind::NATG, Kind::NATLA}) {
      for (int d : {1, 2}) {
        ArchSpec a;
        if (k == Kind::TG || k == Kind::NATG) {
          a.layers = 3;
          a.width = 6;
        } else if (k == Kind::OTLA) {
          a.layers = 3;
          a.sublayers = 2;
        } else {
          a.layers = 2;
          a.sublayers = 3;
        }
        models.push_back(init_model(k, d, a, seed++));
      }
    }
    reports.push_back(symplectic_suite(models, 50));
  }
  if (all || suite == "separability") {
    std::uint64_t seed = 40;
    for (Kind k : {Kind::TG, Kind::OTLA, Kind::NATG, Kind::TLA, Kind::NATLA}) {
      ArchSpec a;
      if (k == Kind::TG || k == Kind::NATG) {
        a.layers = 3;
        a.width = 6;
      } else if (k == Kind::OTLA) {
        a.layers = 3;
        a.sublayers = 2;
      } else {
        a.layers = 2;
        a.sublayers = 3;
      }
      const SympNetModel m = init_model(k, 1, a, seed++);
      reports.push_back(separability_diagnostic(
          m, kind_time_aware(k) ? std::optional<double>(0.3) : std::nullopt));
    }
  }
  if (all || suite == "rate") reports.push_back(rate_study_report(run_rate_study("")));
  if (reports.empty()) {
    std::cerr << "unknown suite: " << suite
              << " (use all, counterexample, counts, structural, separability, rate)\n";
    return 2;
  }

  json doc = json::array();
  bool ok = true;
  for (const VerificationReport& r : reports) {
    doc.push_back(report_to_json(r));
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << '\n';
    ok = ok && r.pass;
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << doc.dump(2) << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_experiment(const std::string& id, const std::string& out, bool ci,
                   std::optional<std::uint64_t> seed, std::optional<int> epochs) {
  if (id == "rate_study") {
    const RateStudy rs = run_rate_study(out.empty() ? "out/rate_study" : out);
    const VerificationReport r = rate_study_report(rs);
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << " slope=" << rs.slope << '\n';
    return r.pass ? 0 : 1;
  }
  ExperimentOptions opts;
  opts.out_dir = out.empty() ? ("out/" + id) : out;
  opts.ci = ci;
  opts.epochs_override = epochs;
  if (seed) opts.seed = *seed;
  const ExperimentResult res = run_experiment(id, opts);
  std::cout << res.id << " (" << res.epochs_run << " epochs)\n";
  for (const ModelRunResult& run : res.models) {
    std::cout << "  " << run.kind << ": final_mse=" << run.final_train_mse
              << " test_max_error=" << run.test_max_error
              << " energy_drift=" << run.energy_drift << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-preserving flow-map learning toolkit"};
  app.require_subcommand(1);

  std::string config, out, system = "pendulum", suite = "all", experiment_id;
  std::string checkpoint;
  bool ci = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "override the config seed");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "sample a dataset to JSONL");
  gen->add_option("--config", config, "dataset spec JSON");
  gen->add_option("--system", system, "experiment id for the default protocol");
  gen->add_option("--out", out, "output JSONL path")->required();
  add_seed(gen);

  CLI::App* train_cmd = app.add_subcommand("train", "train a model from a job config");
  train_cmd->add_option("--config", config, "training job JSON")->required();
  train_cmd->add_option("--out", out, "output directory");
  train_cmd->add_flag("--ci", ci, "divide epochs by 50");
  add_seed(train_cmd);

  CLI::App* eval_cmd = app.add_subcommand("eval", "roll out a checkpoint against the flow");
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();
  eval_cmd->add_option("--config", config, "test spec JSON")->required();
  eval_cmd->add_option("--out", out, "output directory");

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  verify_cmd->add_option("suite", suite, "all|counterexample|counts|structural|separability|rate");
  verify_cmd->add_option("--out", out, "write the report JSON here");

  CLI::App* exp_cmd = app.add_subcommand("experiment", "reproduce a full benchmark");
  exp_cmd->add_option("id", experiment_id, "pendulum|linear|forced_ho|rate_study")->required();
  exp_cmd->add_option("--out", out, "output directory (default out/<id>)");
  exp_cmd->add_flag("--ci", ci, "divide epochs by 50");
  exp_cmd->add_option("--epochs", epochs, "override the epoch budget");
  add_seed(exp_cmd);

  CLI::App* rate_cmd = app.add_subcommand("rate-study", "pendulum split-rate study");
  rate_cmd->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(config, system, out, seed);
    if (train_cmd->parsed()) return cmd_train(config, out, ci, seed);
    if (eval_cmd->parsed()) return cmd_eval(checkpoint, config, out);
    if (verify_cmd->parsed()) return cmd_verify(suite, out);
    if (exp_cmd->parsed()) return cmd_experiment(experiment_id, out, ci, seed, epochs);
    if (rate_cmd->parsed())
      return cmd_experiment("rate_study", out.empty() ? "out/rate_study" : out, false, seed,
                            std::nullopt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
