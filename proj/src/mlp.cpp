#include "estd3/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "estd3/rng.hpp"

namespace estd3 {

namespace {

void check_input_size(const MlpSpec& spec, std::size_t got) {
  if (got != static_cast<std::size_t>(spec.input_size())) {
    throw std::invalid_argument("mlp: input length " + std::to_string(got) +
                                " does not match first layer size " +
                                std::to_string(spec.input_size()));
  }
}

double output_act(const MlpSpec& spec, double z) {
  switch (spec.output) {
    case OutputActivation::Tanh: return std::tanh(z);
    case OutputActivation::ScaledTanh: return spec.output_bound * std::tanh(z);
    case OutputActivation::Identity: return z;
  }
  return z;
}

// Derivative of the output activation at pre-activation z.
double output_act_deriv(const MlpSpec& spec, double z) {
  switch (spec.output) {
    case OutputActivation::Tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case OutputActivation::ScaledTanh: {
      double t = std::tanh(z);
      return spec.output_bound * (1.0 - t * t);
    }
    case OutputActivation::Identity: return 1.0;
  }
  return 1.0;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

long MlpSpec::param_count() const {
  long total = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    total += static_cast<long>(layer_sizes[l]) * layer_sizes[l + 1] +
             layer_sizes[l + 1];
  }
  return total;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("mlp spec: need at least two layer sizes");
  }
  for (int s : layer_sizes) {
    if (s < 1) {
      throw std::invalid_argument("mlp spec: layer sizes must be >= 1");
    }
  }
  if (output == OutputActivation::ScaledTanh && !(output_bound > 0.0)) {
    throw std::invalid_argument("mlp spec: ScaledTanh bound must be positive");
  }
}

Mlp mlp_init(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Mlp net;
  net.spec = spec;
  Rng rng(seed);
  const auto& ls = spec.layer_sizes;
  for (std::size_t l = 0; l + 1 < ls.size(); ++l) {
    const int in = ls[l];
    const int out = ls[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    std::vector<double> w(static_cast<std::size_t>(in) * out);
    for (double& v : w) v = rng.uniform(-scale, scale);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(out, 0.0);
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  check_input_size(spec, input.size());
  std::vector<double> a(input.begin(), input.end());
  const std::size_t layers = weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    std::vector<double> z(out);
    for (int o = 0; o < out; ++o) {
      double acc = biases[l][o];
      const double* wrow = &weights[l][static_cast<std::size_t>(o) * in];
      for (int i = 0; i < in; ++i) acc += wrow[i] * a[i];
      z[o] = acc;
    }
    const bool last = (l + 1 == layers);
    for (int o = 0; o < out; ++o) {
      z[o] = last ? output_act(spec, z[o]) : std::tanh(z[o]);
    }
    a = std::move(z);
  }
  return a;
}

ForwardTrace forward_cached(const Mlp& net, std::span<const double> input) {
  check_input_size(net.spec, input.size());
  ForwardTrace trace;
  trace.input.assign(input.begin(), input.end());
  const std::size_t layers = net.weights.size();
  const std::vector<double>* prev = &trace.input;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = net.spec.layer_sizes[l];
    const int out = net.spec.layer_sizes[l + 1];
    std::vector<double> z(out);
    for (int o = 0; o < out; ++o) {
      double acc = net.biases[l][o];
      const double* wrow = &net.weights[l][static_cast<std::size_t>(o) * in];
      for (int i = 0; i < in; ++i) acc += wrow[i] * (*prev)[i];
      z[o] = acc;
    }
    std::vector<double> act(out);
    const bool last = (l + 1 == layers);
    for (int o = 0; o < out; ++o) {
      act[o] = last ? output_act(net.spec, z[o]) : std::tanh(z[o]);
    }
    trace.pre_activations.push_back(std::move(z));
    trace.post_activations.push_back(std::move(act));
    prev = &trace.post_activations.back();
  }
  trace.valid = true;
  return trace;
}

const std::vector<double>& trace_output(const ForwardTrace& trace) {
  if (!trace.valid) throw std::logic_error("mlp: forward trace not available");
  return trace.post_activations.back();
}

BackwardResult backward(const Mlp& net, const ForwardTrace& trace,
                        std::span<const double> upstream_grad) {
  if (!trace.valid) throw std::logic_error("mlp: forward trace not available");
  const auto& ls = net.spec.layer_sizes;
  if (upstream_grad.size() != static_cast<std::size_t>(ls.back())) {
    throw std::invalid_argument("mlp: upstream gradient length mismatch");
  }

  const std::size_t layers = net.weights.size();
  BackwardResult result;
  result.param_grad.assign(static_cast<std::size_t>(net.spec.param_count()),
                           0.0);

  // Offsets of each layer's weight block within the flat vector.
  std::vector<std::size_t> offsets(layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(ls[l]) * ls[l + 1] + ls[l + 1];
  }

  // delta = d(upstream . output) / d z_l, walked backward.
  std::vector<double> delta(ls.back());
  for (int o = 0; o < ls.back(); ++o) {
    delta[o] = upstream_grad[o] *
               output_act_deriv(net.spec, trace.pre_activations.back()[o]);
  }

  for (std::size_t l = layers; l-- > 0;) {
    const int in = ls[l];
    const int out = ls[l + 1];
    const std::vector<double>& layer_in =
        (l == 0) ? trace.input : trace.post_activations[l - 1];

    double* wgrad = &result.param_grad[offsets[l]];
    double* bgrad = wgrad + static_cast<std::size_t>(in) * out;
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      double* row = wgrad + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) row[i] += d * layer_in[i];
      bgrad[o] += d;
    }

    // Propagate to the layer below (or to the input for l == 0).
    std::vector<double> prev_delta(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      const double* wrow = &net.weights[l][static_cast<std::size_t>(o) * in];
      for (int i = 0; i < in; ++i) prev_delta[i] += d * wrow[i];
    }
    if (l == 0) {
      result.input_grad = std::move(prev_delta);
    } else {
      for (int i = 0; i < in; ++i) {
        const double z = trace.pre_activations[l - 1][i];
        const double t = std::tanh(z);
        prev_delta[i] *= 1.0 - t * t;
      }
      delta = std::move(prev_delta);
    }
  }
  return result;
}

std::vector<double> flatten(const Mlp& net) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(net.spec.param_count()));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    out.insert(out.end(), net.weights[l].begin(), net.weights[l].end());
    out.insert(out.end(), net.biases[l].begin(), net.biases[l].end());
  }
  return out;
}

Mlp unflatten(const MlpSpec& spec, std::span<const double> values) {
  spec.validate();
  if (values.size() != static_cast<std::size_t>(spec.param_count())) {
    throw std::invalid_argument(
        "mlp: parameter vector length " + std::to_string(values.size()) +
        " does not match spec parameter count " +
        std::to_string(spec.param_count()));
  }
  Mlp net;
  net.spec = spec;
  std::size_t pos = 0;
  const auto& ls = spec.layer_sizes;
  for (std::size_t l = 0; l + 1 < ls.size(); ++l) {
    const std::size_t nw = static_cast<std::size_t>(ls[l]) * ls[l + 1];
    net.weights.emplace_back(values.begin() + pos, values.begin() + pos + nw);
    pos += nw;
    net.biases.emplace_back(values.begin() + pos,
                            values.begin() + pos + ls[l + 1]);
    pos += static_cast<std::size_t>(ls[l + 1]);
  }
  return net;
}

void save_checkpoint(const Mlp& net, std::ostream& out) {
  out << "estd3-mlp 1\n";
  out << "layers";
  for (int s : net.spec.layer_sizes) out << ' ' << s;
  out << "\nhidden tanh\noutput ";
  switch (net.spec.output) {
    case OutputActivation::Tanh: out << "tanh"; break;
    case OutputActivation::Identity: out << "identity"; break;
    case OutputActivation::ScaledTanh:
      out << "scaled_tanh " << fmt17(net.spec.output_bound);
      break;
  }
  const std::vector<double> params = flatten(net);
  out << "\nparams " << params.size() << '\n';
  for (double v : params) out << fmt17(v) << '\n';
}

void save_checkpoint(const Mlp& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  save_checkpoint(net, out);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Mlp load_checkpoint(std::istream& in) {
  auto fail = [](const std::string& what) -> Mlp {
    throw std::runtime_error("bad checkpoint: " + what);
  };

  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "estd3-mlp" || version != 1) {
    return fail("expected 'estd3-mlp 1' header");
  }

  if (!(in >> word) || word != "layers") return fail("expected 'layers'");
  MlpSpec spec;
  {
    std::string rest;
    std::getline(in, rest);
    std::istringstream ls(rest);
    int v;
    while (ls >> v) spec.layer_sizes.push_back(v);
  }

  if (!(in >> word) || word != "hidden") return fail("expected 'hidden'");
  if (!(in >> word) || word != "tanh") return fail("unknown hidden activation");

  if (!(in >> word) || word != "output") return fail("expected 'output'");
  if (!(in >> word)) return fail("missing output activation");
  if (word == "tanh") {
    spec.output = OutputActivation::Tanh;
  } else if (word == "identity") {
    spec.output = OutputActivation::Identity;
  } else if (word == "scaled_tanh") {
    spec.output = OutputActivation::ScaledTanh;
    if (!(in >> spec.output_bound)) return fail("missing scaled_tanh bound");
  } else {
    return fail("unknown output activation '" + word + "'");
  }
  spec.validate();

  std::size_t count = 0;
  if (!(in >> word >> count) || word != "params") return fail("expected 'params'");
  if (count != static_cast<std::size_t>(spec.param_count())) {
    return fail("parameter count does not match layer sizes");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> values[i])) return fail("truncated parameter list");
  }
  return unflatten(spec, values);
}

Mlp load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return load_checkpoint(in);
}

}  // namespace estd3
