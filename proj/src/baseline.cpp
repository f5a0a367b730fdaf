#include "semiadapt/baseline.hpp"

#include <cmath>

#include "semiadapt/errors.hpp"

namespace semiadapt {

Eigen::VectorXd identifier_step(MlpModel& model, const Sample& sample,
                                const IdentifierConfig& cfg) {
  if (cfg.step_size < 0.0) throw ConfigError("identifier step_size must be >= 0");
  if (cfg.steps_per_sample < 1) throw ConfigError("identifier steps_per_sample must be >= 1");

  const Eigen::VectorXd prediction = forward(model, model_input(sample));
  if (cfg.step_size == 0.0) return prediction;

  const std::vector<Sample> batch{sample};
  for (int step = 0; step < cfg.steps_per_sample; ++step) {
    auto [loss, grads] = loss_and_gradients(model, batch);
    (void)loss;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      if (!grads[l].weights.allFinite() || !grads[l].bias.allFinite())
        throw NumericalError("identifier_step: non-finite gradient in layer " +
                             std::to_string(l));
      model.layers[l].weights -= cfg.step_size * grads[l].weights;
      model.layers[l].bias -= cfg.step_size * grads[l].bias;
    }
  }
  return prediction;
}

}  // namespace semiadapt
