#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace estd3 {

/// Output-layer activation. Hidden layers are always tanh.
enum class OutputActivation { Tanh, ScaledTanh, Identity };

/// Shape of a dense feed-forward network: layer_sizes = (input, hidden...,
/// output). ScaledTanh squashes the output into [-output_bound, output_bound].
struct MlpSpec {
  std::vector<int> layer_sizes;
  OutputActivation output = OutputActivation::Identity;
  double output_bound = 1.0;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }

  /// Sum over layers of in*out + out.
  long param_count() const;

  /// Throws std::invalid_argument on fewer than two layers, a non-positive
  /// layer size, or a non-positive ScaledTanh bound.
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

/// Dense MLP with per-layer weight matrices and bias vectors.
///
/// Parameter ordering is fixed and load-bearing (flatten, checkpoints,
/// gradients all use it): layer by layer, the weight matrix in row-major
/// order (rows = output units, columns = input units), then the bias vector.
struct Mlp {
  MlpSpec spec;
  std::vector<std::vector<double>> weights;  // weights[l][o * in_size + i]
  std::vector<std::vector<double>> biases;   // biases[l][o]

  std::vector<double> forward(std::span<const double> input) const;
};

/// Activations recorded by forward_cached, consumed by backward.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> pre_activations;   // z_l per layer
  std::vector<std::vector<double>> post_activations;  // act(z_l) per layer
  bool valid = false;
};

struct BackwardResult {
  std::vector<double> param_grad;  // flattened, same ordering as flatten()
  std::vector<double> input_grad;  // d(upstream . output) / d input
};

/// Uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
/// Bit-identical networks for identical (spec, seed).
Mlp mlp_init(const MlpSpec& spec, std::uint64_t seed);

/// Forward pass that records everything backward needs.
ForwardTrace forward_cached(const Mlp& net, std::span<const double> input);

const std::vector<double>& trace_output(const ForwardTrace& trace);

/// Gradient of (upstream_grad . output) with respect to every parameter and
/// to the input. Throws std::logic_error if the trace is not valid.
BackwardResult backward(const Mlp& net, const ForwardTrace& trace,
                        std::span<const double> upstream_grad);

std::vector<double> flatten(const Mlp& net);
Mlp unflatten(const MlpSpec& spec, std::span<const double> values);

/// Text checkpoint: spec plus the flat parameter vector, 17 significant
/// digits. Reloading reproduces forward outputs bit-exactly on one platform.
void save_checkpoint(const Mlp& net, std::ostream& out);
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(std::istream& in);
Mlp load_checkpoint_file(const std::string& path);

}  // namespace estd3
