#include "estd3/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace estd3 {

void adam_step(std::vector<double>& params, std::span<const double> grad,
               AdamState& state, double lr) {
  const std::size_t n = params.size();
  if (grad.size() != n || state.first_moment.size() != n ||
      state.second_moment.size() != n) {
    throw std::invalid_argument("adam: parameter/gradient/state length mismatch");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw std::domain_error("adam: non-finite gradient entry");
    }
  }

  state.step_count += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));

  for (std::size_t i = 0; i < n; ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * grad[i];
    v = b2 * v + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = m / bias1;
    const double vhat = v / bias2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

}  // namespace estd3
