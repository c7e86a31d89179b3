#include "fvl/nn/adam.hpp"

#include <cmath>

#include "fvl/common/error.hpp"

namespace fvl::nn {

AdamState::AdamState(const ParamSet& params, AdamOptions opts)
    : options(opts), first_moment(zeros_like(params)), second_moment(zeros_like(params)) {
  if (!(opts.beta1 > 0.0 && opts.beta1 < 1.0 && opts.beta2 > 0.0 && opts.beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in (0, 1)");
  }
  if (!(opts.learning_rate > 0.0) || !(opts.epsilon > 0.0)) {
    throw ValidationError("Adam learning rate and epsilon must be positive");
  }
}

void adam_step(AdamState& state, ParamSet& params, const std::vector<diff::Matrix>& grads) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
    throw DimensionError("adam_step: gradient count does not match parameter count");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (grads[p].shape != params[p].value.shape) {
      throw DimensionError("adam_step: gradient shape mismatch for " + params[p].name);
    }
    for (double g : grads[p].data) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + params[p].name);
    }
  }

  const auto& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& theta = params[p].value.data;
    auto& m = state.first_moment[p].data;
    auto& v = state.second_moment[p].data;
    const auto& g = grads[p].data;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

}  // namespace fvl::nn
