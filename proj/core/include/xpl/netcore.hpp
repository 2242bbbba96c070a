#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace xpl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// `identity` is an internal test mode (linear network); it participates in
/// no counting operation.
enum class Activation { relu, hard_tanh, tanh, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// True for activations with finitely many linear pieces that define
/// activation patterns (relu, hard_tanh).
constexpr bool has_patterns(Activation a) noexcept {
  return a == Activation::relu || a == Activation::hard_tanh;
}

double activate(Activation a, double h) noexcept;
/// Derivative with the convention phi'(h) = 0 at kinks.
double activate_derivative(Activation a, double h) noexcept;

/// Linear-region code of one neuron. ReLU: 1 iff h > 0. Hard tanh: -1 iff
/// h <= -1, 1 iff h >= 1, else 0. Exact thresholds go to the lower code.
std::int8_t region_code(Activation a, double h);

struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_widths;
  std::size_t output_dim = 1;
  Activation activation = Activation::relu;
  double sigma_w_sq = 1.0;
  double sigma_b_sq = 0.0;
  std::uint64_t seed = 0;

  /// n hidden layers of equal width k.
  static NetworkSpec uniform(std::size_t m, std::size_t k, std::size_t n,
                             Activation act, double sigma_w_sq,
                             double sigma_b_sq, std::uint64_t seed,
                             std::size_t output_dim = 1);

  std::size_t depth() const noexcept { return hidden_widths.size(); }
  std::size_t total_hidden() const noexcept;
  std::size_t max_width() const noexcept;
  /// Fan-in / fan-out of weight layer d, d in [0, depth()].
  std::size_t fan_in(std::size_t d) const;
  std::size_t fan_out(std::size_t d) const;

  /// Throws InvalidSpecError.
  void validate() const;

  bool operator==(const NetworkSpec&) const = default;
};

struct Layer {
  Matrix weights;  // fan_out x fan_in
  Vector bias;     // fan_out
};

/// Fully connected network: depth() hidden layers followed by an affine
/// output layer. layers()[d] maps z^(d) to h^(d); layers().back() is the
/// output layer.
class Network {
 public:
  Network(NetworkSpec spec, std::vector<Layer> layers);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::span<const Layer> layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t d) const { return layers_.at(d); }
  std::size_t depth() const noexcept { return spec_.depth(); }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  Activation activation() const noexcept { return spec_.activation; }

  /// Copy with layer d replaced; dimensions must match.
  Network with_layer(std::size_t d, Layer layer) const;
  /// Copy with a different activation (same weights).
  Network with_activation(Activation a) const;

  bool operator==(const Network& other) const;

 private:
  NetworkSpec spec_;
  std::vector<Layer> layers_;
};

struct LayerTrace {
  Activation activation = Activation::relu;
  /// h^(0..n); the last entry is the network output.
  std::vector<Vector> pre_activations;
  /// z^(0..n) with z^(0) = x.
  std::vector<Vector> activations;

  const Vector& input() const { return activations.front(); }
  const Vector& output() const { return pre_activations.back(); }
};

struct ActivationPattern {
  Activation activation = Activation::relu;
  std::vector<std::int8_t> codes;

  bool operator==(const ActivationPattern& o) const { return codes == o.codes; }
  /// Compact text form: ReLU "0"/"1", hard tanh "-"/"0"/"+".
  std::string to_string() const;
};

/// Weights ~ N(0, sigma_w_sq / fan_in), biases ~ N(0, sigma_b_sq), keyed by
/// (seed, layer, element) so the result does not depend on draw order.
Network init_network(const NetworkSpec& spec);

LayerTrace forward(const Network& net, const Vector& x);
/// Output only, without keeping the trace.
Vector evaluate(const Network& net, const Vector& x);

ActivationPattern activation_pattern(const LayerTrace& trace);
/// Pattern of the hidden layers at x.
ActivationPattern activation_pattern(const Network& net, const Vector& x);

}  // namespace xpl
