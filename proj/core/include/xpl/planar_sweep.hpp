#pragma once

// Event-driven sweep of a piecewise-linear network along a planar curve.
//
// Inside an interval of constant activation pattern every pre-activation is
// h(t) = c + a f(t) + b g(t) for the curve's basis functions f, g. The sweep
// keeps (c, a, b) for every neuron, finds each neuron's next threshold
// crossing in closed form, jumps to the earliest one, flips the code and
// pushes the resulting coefficient change up through the layers above.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xpl/netcore.hpp"
#include "xpl/trajectory.hpp"

namespace xpl {

enum class Boundary : std::uint8_t { relu_zero, tanh_plus_one, tanh_minus_one };

std::string_view to_string(Boundary b);

struct TransitionEvent {
  double t = 0.0;
  std::uint32_t layer = 0;
  std::uint32_t neuron = 0;
  Boundary boundary = Boundary::relu_zero;
  std::int8_t direction = 1;  // +1: pre-activation increasing through the threshold
};

struct PlanarSweepOptions {
  bool record_events = true;
  bool track_patterns = true;
  /// Keep the full code vector of every interval (small networks only).
  bool record_patterns = false;
  bool track_lengths = false;
  bool track_output_sign = true;
  /// Crossings closer than this in t are treated as simultaneous.
  double root_tol = 1e-12;
  /// Coefficients are rebuilt from the codes every this many events.
  std::size_t refresh_interval = 4096;
};

struct PlanarSweepOutput {
  std::vector<TransitionEvent> events;
  std::size_t num_transitions = 0;
  /// Transitions per swept hidden layer (index relative to first_layer).
  std::vector<std::size_t> layer_transitions;
  std::size_t num_intervals = 1;
  std::size_t num_patterns = 1;
  bool patterns_unique = true;
  /// Smallest gap between consecutive distinct event times (1 if < 2 events).
  double min_event_gap = 1.0;
  std::vector<ActivationPattern> interval_patterns;
  /// Start of each interval, parallel to interval_patterns.
  std::vector<double> interval_starts;
  /// With track_lengths: [input curve, z of each swept hidden layer].
  std::vector<double> layer_lengths;
  /// Sign of output unit 0 right after t = 0 (1 if positive, else 0).
  int initial_output_label = 0;
  std::vector<double> output_sign_change_times;
};

/// Sweeps layers first_layer..depth-1 (hidden) and the output layer, given
/// the pre-activation coefficients of layer first_layer. When first_layer is
/// 0 and the coefficients come from an input curve, input_curve supplies the
/// input-space length term.
PlanarSweepOutput planar_sweep(const Network& net, std::size_t first_layer, PlanarBasis basis,
                               const Vector& hc, const Vector& ha, const Vector& hb,
                               const PlanarSweepOptions& options,
                               const PlanarCurve* input_curve = nullptr);

/// Convenience: sweep the whole network along a trajectory.
PlanarSweepOutput planar_sweep(const Network& net, const Trajectory& traj,
                               const PlanarSweepOptions& options);

}  // namespace xpl
