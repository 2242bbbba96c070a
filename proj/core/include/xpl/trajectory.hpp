#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xpl/netcore.hpp"

namespace xpl {

enum class TrajectoryKind { line, circular_arc, great_circle_loop };

std::string_view to_string(TrajectoryKind k);
TrajectoryKind parse_trajectory_kind(std::string_view name);

/// How x(t) depends on t inside the plane spanned by the trajectory:
/// x(t) = origin + f(t) u + g(t) v with
///   linear:       f = t,            g = 0
///   quarter_turn: f = cos(pi t/2),  g = sin(pi t/2)
///   full_turn:    f = cos(2 pi t),  g = sin(2 pi t)
enum class PlanarBasis { linear, quarter_turn, full_turn };

/// Angular speed of the trig bases (0 for linear).
double basis_omega(PlanarBasis b) noexcept;
double basis_f(PlanarBasis b, double t) noexcept;
double basis_g(PlanarBasis b, double t) noexcept;

struct PlanarCurve {
  PlanarBasis basis = PlanarBasis::linear;
  Vector origin;
  Vector u;
  Vector v;
};

/// A curve x(t), t in [0, 1].
///   line:              x(t) = t x1 + (1 - t) x0
///   circular_arc:      x(t) = cos(pi t / 2) x0 + sin(pi t / 2) x1
///   great_circle_loop: x(t) = cos(2 pi t) u0 + sin(2 pi t) u1, where u0, u1
///                      are x0, x1 orthogonalized and both scaled to |x0|.
class Trajectory {
 public:
  TrajectoryKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x0_.size()); }
  const Vector& x0() const noexcept { return x0_; }
  const Vector& x1() const noexcept { return x1_; }
  /// Loop basis (great_circle_loop only; empty otherwise).
  const Vector& u0() const noexcept { return curve_.u; }
  const Vector& u1() const noexcept { return curve_.v; }

  Vector at(double t) const;
  const PlanarCurve& planar() const noexcept { return curve_; }
  /// Closed-form arc length of the input-space curve.
  double analytic_length() const;

 private:
  friend Trajectory make_trajectory(TrajectoryKind, const Vector&, const Vector&);
  TrajectoryKind kind_ = TrajectoryKind::line;
  Vector x0_, x1_;
  PlanarCurve curve_;
};

/// Throws DimensionError on mismatched endpoints and DegenerateTrajectoryError
/// when x0 == x1 or the loop basis is linearly dependent.
Trajectory make_trajectory(TrajectoryKind kind, const Vector& x0, const Vector& x1);

/// Endpoints drawn i.i.d. N(0, I_m) from the seed.
Trajectory random_trajectory(TrajectoryKind kind, std::size_t m, std::uint64_t seed);

enum class LengthMethod {
  automatic,  // exact sweep for relu / hard tanh, polyline otherwise
  polyline,
  exact_sweep,
};

struct LengthProfile {
  /// lengths[0] = l(x(t)); lengths[d] = l(z^(d)(t)) for hidden layer d.
  std::vector<double> lengths;
  /// Arc lengths of h^(0..n) (the last entry is the output); polyline only.
  std::vector<double> pre_activation_lengths;
  std::size_t points_used = 0;
  /// Largest relative change between the last two refinements.
  double estimated_rel_error = 0.0;
  bool converged = true;
  LengthMethod method = LengthMethod::polyline;
};

inline constexpr std::size_t kMaxPolylinePoints = std::size_t{1} << 21;

/// Polyline arc length of every layer image. Starts at num_points samples and
/// doubles until every layer changes by less than rel_tol between
/// refinements; hitting max_points returns a result with converged = false.
LengthProfile layer_image_length(const Network& net, const Trajectory& traj,
                                 std::size_t num_points, double rel_tol,
                                 std::size_t max_points = kMaxPolylinePoints);

/// Exact per-layer lengths for piecewise-linear networks, integrated
/// interval by interval during the event sweep.
LengthProfile exact_layer_lengths(const Network& net, const Trajectory& traj);

/// Dispatches on method.
LengthProfile measure_lengths(const Network& net, const Trajectory& traj, LengthMethod method,
                              std::size_t num_points = 1024, double rel_tol = 1e-4);

struct GrowthBounds {
  std::size_t k = 0;
  double sigma_w = 0.0;
  double sigma_b = 0.0;
  Activation activation = Activation::relu;
  double lower_ratio = 0.0;
  double upper_ratio = 0.0;
  /// The perpendicular-component constant of the lower bound is taken as 1,
  /// which is appropriate for random circular arcs.
  static constexpr double perpendicular_constant = 1.0;
};

/// Per-layer expected growth factor bounds for trajectory length.
///   relu lower      = (1/sqrt2) (s_w sqrt(k) / sqrt(2(k+1)) - s_w sqrt(k) / 2^k)
///   hard tanh lower = (s_w/s) (1/sqrt2) ((2pi)^(-1/4) sqrt(s k) / sqrt(s sqrt(2pi) + k - 1)
///                                        - sqrt(k) (1 - 1/s)^(k-1)),  s = sqrt(s_w^2 + s_b^2)
///   upper           = s_w sqrt((k+1)/k)
/// Throws DomainError for k < 2, s_w <= 0, or hard tanh with s < 1, and
/// UnsupportedActivationError for tanh / identity.
GrowthBounds theoretical_growth_bounds(std::size_t k, double sigma_w, double sigma_b,
                                       Activation activation);

struct GrowthRow {
  std::size_t layer = 0;
  double mean_length = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Mean of l_d / l_{d-1} over seeds where both are non-zero (NaN for layer 0).
  double ratio = 0.0;
  double ratio_ci_lo = 0.0;
  double ratio_ci_hi = 0.0;
  std::size_t excluded = 0;
};

struct GrowthCurveOptions {
  LengthMethod method = LengthMethod::automatic;
  std::size_t num_points = 1024;
  double rel_tol = 1e-4;
};

struct GrowthCurve {
  std::vector<GrowthRow> rows;
  /// per_seed_lengths[s][d]
  std::vector<std::vector<double>> per_seed_lengths;
  std::size_t num_seeds = 0;
};

/// Seed s of the ensemble uses spec.seed mixed with s.
std::uint64_t ensemble_seed(std::uint64_t base, std::size_t index) noexcept;

/// Ensemble over num_seeds independent networks drawn from spec.
GrowthCurve growth_ratio_curve(const NetworkSpec& spec, const Trajectory& traj,
                               std::size_t num_seeds, const GrowthCurveOptions& options = {});

/// layer,mean_length,ci_lo,ci_hi,ratio,ratio_ci_lo,ratio_ci_hi,excluded
void write_growth_csv(std::ostream& os, const GrowthCurve& curve);
/// k,sigma_w,sigma_b,activation,lower,upper
void write_bounds_csv(std::ostream& os, const std::vector<GrowthBounds>& rows);

}  // namespace xpl
