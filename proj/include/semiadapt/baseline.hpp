#pragma once

#include <Eigen/Dense>

#include "semiadapt/mlp.hpp"

namespace semiadapt {

// Defaults were fixed once by a grid search on one held-out trial per
// artificial system (lowest streaming error among settings stable on all of
// them) and are frozen for every comparison.
struct IdentifierConfig {
  double step_size = 1e-4;
  int steps_per_sample = 20;
};

// Comparison method: adapt every network weight online by gradient descent on
// the instantaneous squared prediction error. Returns the prediction made
// with the pre-update model; the model is updated in place.
Eigen::VectorXd identifier_step(MlpModel& model, const Sample& sample,
                                const IdentifierConfig& cfg);

}  // namespace semiadapt
