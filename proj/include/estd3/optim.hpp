#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace estd3 {

/// Adam moment estimates for one flat parameter vector.
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(std::size_t n)
      : first_moment(n, 0.0), second_moment(n, 0.0) {}
};

/// One Adam step with bias correction, in place. step_count increments by 1.
/// Throws std::invalid_argument on length mismatch, std::domain_error on a
/// non-finite gradient entry.
void adam_step(std::vector<double>& params, std::span<const double> grad,
               AdamState& state, double lr);

}  // namespace estd3
