#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sympflow/training.hpp"
#include "sympflow/verify.hpp"

namespace sympflow {

// One architecture row of an experiment's model table.
struct ModelRow {
  Kind kind = Kind::TG;
  ArchSpec arch;
};

// Everything needed to reproduce one benchmark end to end: data protocol,
// training budget, model table, and the test trajectory.
struct ExperimentDef {
  std::string id;
  std::string system_id;
  DatasetSpec data;
  int epochs = 0;
  double learning_rate = 1e-3;
  std::vector<ModelRow> rows;
  PhasePoint x0;
  std::optional<double> t0;
  double h_test = 0.0;
  int k_steps = 0;
};

// Benchmark table: "pendulum" (TG/OTLA/TLA), "linear" (TG/OTLA/TLA on the
// non-separable quadratic), "forced_ho" (TG/TLA plus the clocked NATG/NATLA).
// Throws on unknown id.
ExperimentDef experiment_def(const std::string& id);
std::vector<std::string> experiment_ids();

struct ModelRunResult {
  std::string kind;
  long n_params = 0;
  double final_train_mse = 0.0;
  double test_max_error = 0.0;  // max inf-distance to the reference rollout
  double energy_drift = 0.0;
  // Post-training separability probe of the learned generator; structurally
  // ~0 for TG/OTLA/NATG, free to grow for TLA/NATLA.
  double separability_p_variation = 0.0;
  double separability_q_variation = 0.0;
  std::vector<PhasePoint> rollout_pred;
  std::vector<PhasePoint> rollout_ref;
};

struct ExperimentOptions {
  std::string out_dir;  // empty: compute only, write nothing
  bool ci = false;      // divide the epoch budget by 50
  std::optional<int> epochs_override;
  std::uint64_t seed = 7;
};

struct ExperimentResult {
  std::string id;
  int epochs_run = 0;
  std::vector<ModelRunResult> models;
};

// Generates data, trains every row, rolls out the test trajectory and, when
// out_dir is set, writes dataset.jsonl, per-model checkpoint/loss/trajectory
// files, metrics.json and the phase/loss SVG figures.
ExperimentResult run_experiment(const std::string& id, const ExperimentOptions& opts = {});

// Max drift of H along the predicted rollout: against H(x0) for autonomous
// systems, against H of the reference point at the same clock otherwise.
double energy_drift(const HamiltonianSystem& sys, const std::vector<PhasePoint>& pred,
                    const std::vector<PhasePoint>& ref, std::optional<double> t0, double h);

// Pendulum split-error decay at h=0.5 over a 21x21 grid of [-1,1]^2 with
// m in {4,...,512}; writes rate_study.{csv,svg,json} when out_dir is set.
RateStudy run_rate_study(const std::string& out_dir);

// Pass/fail view of a rate study: slope within 0.3 of -1, errors monotone
// non-increasing, final error at most 1e-2.
VerificationReport rate_study_report(const RateStudy& rs);

}  // namespace sympflow
