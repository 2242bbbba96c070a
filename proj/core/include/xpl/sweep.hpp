#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "xpl/netcore.hpp"
#include "xpl/planar_sweep.hpp"
#include "xpl/trajectory.hpp"

namespace xpl {

enum class SweepMethod { exact_affine, exact_trigonometric, adaptive_bisection };

std::string_view to_string(SweepMethod m);

struct SweepResult {
  std::vector<TransitionEvent> events;
  /// Hidden-neuron transitions T.
  std::size_t num_transitions = 0;
  /// Sign changes of output unit 0, reported separately from T.
  std::size_t output_transitions = 0;
  /// Distinct activation patterns A.
  std::size_t num_patterns = 1;
  std::size_t num_intervals = 1;
  bool patterns_unique = true;
  double min_event_gap = 1.0;
  std::vector<std::size_t> layer_transitions;
  SweepMethod method = SweepMethod::exact_affine;
};

/// Exact event sweep. Lines give exact_affine; arcs and loops are swept with
/// the trigonometric form of the same engine (exact_trigonometric).
SweepResult exact_transition_sweep(const Network& net, const Trajectory& traj);

inline constexpr double kMinBisectionTol = 0x1p-40;

/// Adaptive bisection on a dyadic grid of cell size max(2^-16, t_tol rounded
/// up to a power of two). Cells whose endpoint patterns differ are halved
/// until they are shorter than 2 t_tol; each such leaf contributes the L1
/// distance between its endpoint codes. Never overcounts, and the count is
/// non-decreasing as t_tol shrinks.
SweepResult count_transitions_curved(const Network& net, const Trajectory& traj, double t_tol);

struct DichotomyResult {
  std::size_t s = 0;
  std::size_t sweep_layer = 0;
  std::size_t num_dichotomies = 1;
  std::size_t num_label_transitions = 0;
  /// 0 means the count is taken over the continuous sweep.
  std::size_t num_t = 0;
  std::uint64_t seed = 0;
};

/// Labels of each datapoint along W(t) = W0 cos(2 pi t) + W1 sin(2 pi t) for
/// the sweep layer. With num_t > 0 only the labellings at t = i / num_t are
/// counted; with num_t = 0 every labelling the sweep passes through counts.
DichotomyResult weight_sweep_dichotomies(const Network& net, const Matrix& w0, const Matrix& w1,
                                         std::size_t sweep_layer, const std::vector<Vector>& data,
                                         std::size_t num_t);

/// W0 is the sweep layer of init_network(spec with seed), W1 an independent
/// draw of the same layer.
DichotomyResult weight_sweep_dichotomies(const NetworkSpec& spec, std::size_t sweep_layer,
                                         const std::vector<Vector>& data, std::size_t num_t,
                                         std::uint64_t seed);

struct RemainingDepthRow {
  std::size_t sweep_layer = 0;
  /// n - sweep_layer
  std::size_t remaining_depth = 0;
  DichotomyResult result;
};

std::vector<RemainingDepthRow> remaining_depth_dichotomies(const NetworkSpec& spec,
                                                           const std::vector<Vector>& data,
                                                           std::size_t num_t, std::uint64_t seed);

/// Random flips of one of s labels per transition; number of distinct
/// label vectors visited.
std::size_t random_walk_dichotomy_baseline(std::size_t num_transitions, std::size_t s,
                                           std::uint64_t seed);

struct TransitionLengthRecord {
  std::size_t depth = 0;
  std::size_t width = 0;
  double sigma_w_sq = 0.0;
  std::uint64_t seed = 0;
  /// Length of the last hidden layer's image.
  double length = 0.0;
  std::size_t transitions = 0;
  std::size_t patterns = 0;
};

/// One exact sweep per (depth, seed); spec.hidden_widths[0] is used as the
/// width of every layer. Records are ordered by depth, then seed index.
std::vector<TransitionLengthRecord> transitions_vs_length(const NetworkSpec& spec,
                                                          const Trajectory& traj,
                                                          const std::vector<std::size_t>& depths,
                                                          std::size_t num_seeds);

void write_events_csv(std::ostream& os, const std::vector<TransitionEvent>& events);
void write_summary_csv(std::ostream& os, const std::vector<TransitionLengthRecord>& rows);
void write_dichotomies_csv(std::ostream& os, const std::vector<RemainingDepthRow>& rows);

}  // namespace xpl
