#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sympflow/dataset.hpp"
#include "sympflow/sympnet.hpp"
#include "sympflow/verify.hpp"

namespace sympflow {

// Versioned checkpoint document: format_version, kind, d, activation, arch,
// seed, and per-module named parameter arrays. Doubles are emitted in
// shortest-round-trip decimal, so save -> load -> save is byte-stable and
// load reproduces every parameter bitwise. Only models carrying a uniform
// ArchSpec (everything init_model produces) can be checkpointed.
nlohmann::json model_to_json(const SympNetModel& m);
SympNetModel model_from_json(const nlohmann::json& j);

void save_checkpoint(const std::string& path, const SympNetModel& m);
SympNetModel load_checkpoint(const std::string& path);

// JSON-lines dataset, one object per line: {"h":num, "t":num?, "x":[...],
// "y":[...]} with x and y in flat (p, q) order.
void write_dataset_jsonl(const std::string& path, const std::vector<TrainingSample>& samples);
std::vector<TrainingSample> read_dataset_jsonl(const std::string& path);

// "epoch,loss" rows, epochs numbered from 0, values in %.17g.
void write_loss_csv(const std::string& path, const std::vector<double>& loss);

// "step,t,p_pred,q_pred,p_ref,q_ref" rows for d=1 trajectories of equal
// length; t advances as t0 + k*h.
void write_trajectory_csv(const std::string& path, const std::vector<PhasePoint>& pred,
                          const std::vector<PhasePoint>& ref, double t0, double h);

nlohmann::json report_to_json(const VerificationReport& r);

}  // namespace sympflow
