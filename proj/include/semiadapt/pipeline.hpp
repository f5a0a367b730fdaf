#pragma once

#include <Eigen/Dense>
#include <deque>
#include <optional>
#include <vector>

#include <json.hpp>

#include "semiadapt/baseline.hpp"
#include "semiadapt/datagen.hpp"
#include "semiadapt/mlp.hpp"
#include "semiadapt/rls.hpp"
#include "semiadapt/uncertainty.hpp"

namespace semiadapt {

enum class AdaptMethod { RlsPaa, Identifier, None };

AdaptMethod adapt_method_from_string(const std::string& name);
std::string to_string(AdaptMethod method);

struct PipelineConfig {
  int n_past = 3;    // N
  int m_future = 3;  // M
  bool include_action = false;
  bool adaptation_enabled = true;
  AdaptMethod method = AdaptMethod::RlsPaa;
  RlsConfig rls;
  UncertaintyConfig uncertainty;
  IdentifierConfig identifier;
  double confidence = 0.95;
};

struct StepDiagnostics {
  long psd_clips = 0;          // cumulative eigenvalue clips in the MSEE recursion
  bool degeneracy = false;     // gain degeneracy seen at this step
  long rejected_samples = 0;   // cumulative non-finite samples dropped
  double adapt_seconds = 0.0;  // this step's parameter-adaptation time
  double uncertainty_seconds = 0.0;
};

// A prediction paired with its eventually observed ground truth. k is the
// measurement index the prediction was made at; the prediction covers steps
// k+1 .. k+M and resolves once measurement k+M has arrived.
struct StepResult {
  long k = -1;
  double t = 0.0;
  PredictionWithUncertainty prediction;
  Eigen::VectorXd target;
  Eigen::VectorXd apriori_error;  // target - prediction.mean
  StepDiagnostics diag;
};

struct PipelineDiagnostics {
  long rejected_samples = 0;
  long adaptation_count = 0;
  long psd_clips = 0;
  long degeneracy_count = 0;
  double adapt_seconds_total = 0.0;
  double uncertainty_seconds_total = 0.0;
};

// The online loop: per measurement, adapt on the oldest prediction whose
// ground truth just completed, then predict M steps ahead from the last N
// positions. Predictions are emitted only while warm, and resolve M
// measurements later, so a length-L stream yields L - N - M + 1 results.
class Pipeline {
 public:
  Pipeline(MlpModel model, PipelineConfig cfg);

  // Feeds one measurement. Returns the resolved result for step k - M when
  // one completes. Throws StreamError on non-increasing timestamps; rejects
  // non-finite samples with a diagnostic count.
  std::optional<StepResult> push(double t, const Eigen::Vector3d& position, int action = 0);

  const PipelineDiagnostics& diagnostics() const { return diag_; }
  const MlpModel& model() const { return model_; }
  const RlsState& rls_state() const { return rls_; }
  const UncertaintyState& uncertainty_state() const { return unc_; }
  const PipelineConfig& config() const { return cfg_; }

 private:
  struct Pending {
    StepResult result;
    Eigen::VectorXd sample_input;  // full s_k including the trailing 1
    Eigen::VectorXd features;      // hidden features (RLS method only)
  };

  void adapt_front(const Eigen::VectorXd& target);
  StepResult make_prediction(long k, double t);

  MlpModel model_;
  PipelineConfig cfg_;
  RlsState rls_;
  UncertaintyState unc_;
  std::deque<Eigen::Vector3d> recent_;  // last max(N, M) positions
  std::deque<Pending> pending_;
  std::deque<Eigen::VectorXd> residuals_;
  Eigen::VectorXd noise_var_;  // fallback estimate for non-RLS methods
  Eigen::VectorXd noise_prior_;
  long k_ = -1;
  int last_action_ = 0;
  double prev_t_ = 0.0;
  bool have_t_ = false;
  int window_keep_ = 0;
  StepDiagnostics last_step_diag_;
  PipelineDiagnostics diag_;
};

struct StreamRun {
  std::vector<StepResult> results;
  PipelineDiagnostics diagnostics;
};

StreamRun run_stream(const MlpModel& model, const Trajectory& traj, const PipelineConfig& cfg);

// Line-delimited JSON record; timing fields are intentionally left out so
// output is byte-deterministic for a given input and config.
nlohmann::json step_result_to_json(const StepResult& step);

}  // namespace semiadapt
