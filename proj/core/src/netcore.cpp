#include "xpl/netcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xpl/errors.hpp"
#include "xpl/rng.hpp"

namespace xpl {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::hard_tanh: return "hard_tanh";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "hard_tanh" || name == "hardtanh" || name == "hard-tanh") return Activation::hard_tanh;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw InvalidSpecError("unknown activation '" + std::string(name) + "'");
}

double activate(Activation a, double h) noexcept {
  switch (a) {
    case Activation::relu: return h > 0.0 ? h : 0.0;
    case Activation::hard_tanh: return std::clamp(h, -1.0, 1.0);
    case Activation::tanh: return std::tanh(h);
    case Activation::identity: return h;
  }
  return h;
}

double activate_derivative(Activation a, double h) noexcept {
  switch (a) {
    case Activation::relu: return h > 0.0 ? 1.0 : 0.0;
    case Activation::hard_tanh: return (h > -1.0 && h < 1.0) ? 1.0 : 0.0;
    case Activation::tanh: {
      const double t = std::tanh(h);
      return 1.0 - t * t;
    }
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

std::int8_t region_code(Activation a, double h) {
  switch (a) {
    case Activation::relu: return h > 0.0 ? 1 : 0;
    case Activation::hard_tanh:
      if (h <= -1.0) return -1;
      if (h >= 1.0) return 1;
      return 0;
    default:
      throw UnsupportedActivationError("activation patterns are undefined for " +
                                       std::string(to_string(a)));
  }
}

NetworkSpec NetworkSpec::uniform(std::size_t m, std::size_t k, std::size_t n,
                                 Activation act, double sigma_w_sq,
                                 double sigma_b_sq, std::uint64_t seed,
                                 std::size_t output_dim) {
  NetworkSpec s;
  s.input_dim = m;
  s.hidden_widths.assign(n, k);
  s.output_dim = output_dim;
  s.activation = act;
  s.sigma_w_sq = sigma_w_sq;
  s.sigma_b_sq = sigma_b_sq;
  s.seed = seed;
  return s;
}

std::size_t NetworkSpec::total_hidden() const noexcept {
  return std::accumulate(hidden_widths.begin(), hidden_widths.end(), std::size_t{0});
}

std::size_t NetworkSpec::max_width() const noexcept {
  return hidden_widths.empty() ? 0 : *std::max_element(hidden_widths.begin(), hidden_widths.end());
}

std::size_t NetworkSpec::fan_in(std::size_t d) const {
  if (d > depth()) throw InvalidSpecError("layer index out of range");
  return d == 0 ? input_dim : hidden_widths[d - 1];
}

std::size_t NetworkSpec::fan_out(std::size_t d) const {
  if (d > depth()) throw InvalidSpecError("layer index out of range");
  return d == depth() ? output_dim : hidden_widths[d];
}

void NetworkSpec::validate() const {
  if (input_dim == 0) throw InvalidSpecError("input_dim must be >= 1");
  if (hidden_widths.empty()) throw InvalidSpecError("depth must be >= 1");
  for (std::size_t w : hidden_widths)
    if (w == 0) throw InvalidSpecError("hidden widths must be >= 1");
  if (output_dim == 0) throw InvalidSpecError("output_dim must be >= 1");
  if (!(sigma_w_sq >= 0.0) || !std::isfinite(sigma_w_sq))
    throw InvalidSpecError("sigma_w_sq must be a finite value >= 0");
  if (!(sigma_b_sq >= 0.0) || !std::isfinite(sigma_b_sq))
    throw InvalidSpecError("sigma_b_sq must be a finite value >= 0");
}

Network::Network(NetworkSpec spec, std::vector<Layer> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)) {
  spec_.validate();
  if (layers_.size() != spec_.depth() + 1)
    throw DimensionError("expected " + std::to_string(spec_.depth() + 1) + " layers");
  for (std::size_t d = 0; d < layers_.size(); ++d) {
    const auto& l = layers_[d];
    if (static_cast<std::size_t>(l.weights.rows()) != spec_.fan_out(d) ||
        static_cast<std::size_t>(l.weights.cols()) != spec_.fan_in(d) ||
        static_cast<std::size_t>(l.bias.size()) != spec_.fan_out(d))
      throw DimensionError("layer " + std::to_string(d) + " does not chain");
  }
}

Network Network::with_layer(std::size_t d, Layer layer) const {
  std::vector<Layer> layers = layers_;
  layers.at(d) = std::move(layer);
  return Network(spec_, std::move(layers));
}

Network Network::with_activation(Activation a) const {
  NetworkSpec s = spec_;
  s.activation = a;
  return Network(std::move(s), layers_);
}

bool Network::operator==(const Network& other) const {
  if (!(spec_ == other.spec_)) return false;
  for (std::size_t d = 0; d < layers_.size(); ++d) {
    if (layers_[d].weights != other.layers_[d].weights) return false;
    if (layers_[d].bias != other.layers_[d].bias) return false;
  }
  return true;
}

std::string ActivationPattern::to_string() const {
  std::string s;
  s.reserve(codes.size());
  for (auto c : codes) {
    if (activation == Activation::hard_tanh)
      s.push_back(c < 0 ? '-' : (c > 0 ? '+' : '0'));
    else
      s.push_back(c ? '1' : '0');
  }
  return s;
}

Network init_network(const NetworkSpec& spec) {
  spec.validate();
  const CounterRng root(spec.seed);
  std::vector<Layer> layers;
  layers.reserve(spec.depth() + 1);
  for (std::size_t d = 0; d <= spec.depth(); ++d) {
    const std::size_t rows = spec.fan_out(d);
    const std::size_t cols = spec.fan_in(d);
    const double w_std = std::sqrt(spec.sigma_w_sq / static_cast<double>(cols));
    const double b_std = std::sqrt(spec.sigma_b_sq);
    const CounterRng wr = root.derive({d, 0});
    const CounterRng br = root.derive({d, 1});
    Layer l{Matrix(rows, cols), Vector(rows)};
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j)
        l.weights(i, j) = w_std == 0.0 ? 0.0 : w_std * wr.normal(i * cols + j);
      l.bias(i) = b_std == 0.0 ? 0.0 : b_std * br.normal(i);
    }
    layers.push_back(std::move(l));
  }
  return Network(spec, std::move(layers));
}

namespace {
void check_input(const Network& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.spec().input_dim)
    throw DimensionError("input has dimension " + std::to_string(x.size()) +
                         ", network expects " + std::to_string(net.spec().input_dim));
}
}  // namespace

LayerTrace forward(const Network& net, const Vector& x) {
  check_input(net, x);
  LayerTrace t;
  t.activation = net.activation();
  t.activations.reserve(net.num_layers());
  t.pre_activations.reserve(net.num_layers());
  t.activations.push_back(x);
  for (std::size_t d = 0; d < net.num_layers(); ++d) {
    const Layer& l = net.layer(d);
    Vector h = l.weights * t.activations.back() + l.bias;
    if (d + 1 < net.num_layers()) {
      Vector z = h.unaryExpr([a = net.activation()](double v) { return activate(a, v); });
      t.activations.push_back(std::move(z));
    }
    t.pre_activations.push_back(std::move(h));
  }
  return t;
}

Vector evaluate(const Network& net, const Vector& x) {
  check_input(net, x);
  Vector z = x;
  const Activation a = net.activation();
  for (std::size_t d = 0; d + 1 < net.num_layers(); ++d) {
    const Layer& l = net.layer(d);
    z = (l.weights * z + l.bias).unaryExpr([a](double v) { return activate(a, v); });
  }
  const Layer& out = net.layers().back();
  return out.weights * z + out.bias;
}

ActivationPattern activation_pattern(const LayerTrace& trace) {
  if (!has_patterns(trace.activation))
    throw UnsupportedActivationError("activation patterns are undefined for " +
                                     std::string(to_string(trace.activation)));
  ActivationPattern p;
  p.activation = trace.activation;
  for (std::size_t d = 0; d + 1 < trace.pre_activations.size(); ++d)
    for (double h : trace.pre_activations[d]) p.codes.push_back(region_code(trace.activation, h));
  return p;
}

ActivationPattern activation_pattern(const Network& net, const Vector& x) {
  return activation_pattern(forward(net, x));
}

}  // namespace xpl
