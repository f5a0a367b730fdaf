#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semiadapt/datagen.hpp"
#include "semiadapt/mlp.hpp"
#include "semiadapt/pipeline.hpp"

namespace semiadapt {

// Canonical method labels for the four-way comparison.
inline constexpr const char* kMethodRls = "nn-w-rls-paa";
inline constexpr const char* kMethodIdentifier = "nn-w-id";
inline constexpr const char* kMethodNoRls = "nn-wo-rls-paa";
inline constexpr const char* kMethodNoIdentifier = "nn-wo-id";

// Accepts canonical labels plus the short aliases rls-paa, identifier/id,
// none, none-id.
std::string canonical_method(const std::string& name);

struct MseeSummary {
  Eigen::MatrixXd per_axis_horizon;  // 3 rows (x,y,z) by M horizon columns
  double pooled = 0.0;
  long n_samples = 0;
  int horizon = 0;
};

// Mean squared error per axis per horizon step plus the pooled scalar (mean
// over all coordinates and samples), in the inputs' native units squared.
MseeSummary msee(const std::vector<Eigen::VectorXd>& predictions,
                 const std::vector<Eigen::VectorXd>& truths);

struct DatasetSpec {
  std::string kind = "ti";  // tv | ti | csv
  std::vector<TvParams> tv_sets;
  std::vector<TiParams> ti_sets;
  std::vector<std::string> csv_paths;
  std::string unit;  // default from kind: tv->m, ti->dm, csv->m
};

struct ExperimentConfig {
  DatasetSpec dataset;
  double split = 0.8;
  std::vector<std::string> methods = {kMethodRls, kMethodNoRls};
  std::vector<int> hidden_dims = {40};
  std::optional<std::vector<int>> identifier_hidden_dims;  // alternative baseline net
  TrainHyperparams train_hp;
  PipelineConfig pipeline;
  bool smooth_data = false;
  std::uint64_t seed = 0;
};

struct LatencyStats {
  double mean_seconds = 0.0;
  double total_seconds = 0.0;
  long count = 0;
};

struct MethodReport {
  std::string method;
  std::string arch;  // e.g. "9-40-9"
  MseeSummary errors;                   // native units squared
  Eigen::MatrixXd per_axis_horizon_cm2;
  double pooled_cm2 = 0.0;
  double coverage = 0.0;  // fraction of truths inside the configured ellipsoid
  long coverage_points = 0;
  LatencyStats adapt_latency;
  double uncertainty_seconds_total = 0.0;
  long psd_clips = 0;
  long degeneracy_count = 0;
  // trial_traces[trial][step][h]: squared error at horizon h, averaged over axes
  std::vector<std::vector<std::vector<double>>> trial_traces;
};

struct EvalReport {
  nlohmann::json config_echo;
  std::string unit;
  double cm_scale = 1.0;  // length unit -> cm
  long n_trials = 0, n_train = 0, n_val = 0;
  std::vector<long> val_trial_lengths;   // resolved steps per validation trial
  std::vector<int> val_trial_actions;    // motion-class label per validation trial
  std::vector<MethodReport> methods;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

EvalReport run_experiment(const ExperimentConfig& cfg);

// include_timing=false yields a byte-deterministic document for fixed seeds.
nlohmann::json report_to_json(const EvalReport& report, bool include_timing = true);

// One row per (method, axis, horizon) plus a pooled row per method.
std::string report_to_csv(const EvalReport& report);

// Per-step error traces: method,trial,step,horizon,sqerr_native
std::string traces_to_csv(const EvalReport& report);

}  // namespace semiadapt
