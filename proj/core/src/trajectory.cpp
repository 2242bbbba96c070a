#include "xpl/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "xpl/csv.hpp"
#include "xpl/errors.hpp"
#include "xpl/parallel.hpp"
#include "xpl/planar_sweep.hpp"
#include "xpl/rng.hpp"
#include "xpl/stats.hpp"

namespace xpl {

std::string_view to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::line: return "line";
    case TrajectoryKind::circular_arc: return "circular_arc";
    case TrajectoryKind::great_circle_loop: return "great_circle_loop";
  }
  return "?";
}

TrajectoryKind parse_trajectory_kind(std::string_view name) {
  if (name == "line") return TrajectoryKind::line;
  if (name == "circular_arc" || name == "arc") return TrajectoryKind::circular_arc;
  if (name == "great_circle_loop" || name == "loop") return TrajectoryKind::great_circle_loop;
  throw InvalidSpecError("unknown trajectory kind '" + std::string(name) + "'");
}

double basis_omega(PlanarBasis b) noexcept {
  switch (b) {
    case PlanarBasis::linear: return 0.0;
    case PlanarBasis::quarter_turn: return 0.5 * std::numbers::pi;
    case PlanarBasis::full_turn: return 2.0 * std::numbers::pi;
  }
  return 0.0;
}

double basis_f(PlanarBasis b, double t) noexcept {
  return b == PlanarBasis::linear ? t : std::cos(basis_omega(b) * t);
}

double basis_g(PlanarBasis b, double t) noexcept {
  return b == PlanarBasis::linear ? 0.0 : std::sin(basis_omega(b) * t);
}

Vector Trajectory::at(double t) const {
  switch (kind_) {
    case TrajectoryKind::line: return t * x1_ + (1.0 - t) * x0_;
    case TrajectoryKind::circular_arc:
      return basis_f(curve_.basis, t) * x0_ + basis_g(curve_.basis, t) * x1_;
    case TrajectoryKind::great_circle_loop:
      return basis_f(curve_.basis, t) * curve_.u + basis_g(curve_.basis, t) * curve_.v;
  }
  return x0_;
}

double Trajectory::analytic_length() const {
  switch (kind_) {
    case TrajectoryKind::line: return (x1_ - x0_).norm();
    case TrajectoryKind::great_circle_loop: return 2.0 * std::numbers::pi * x0_.norm();
    case TrajectoryKind::circular_arc: {
      // |x'(t)| = (pi/2) sqrt(|x0|^2 sin^2 - 2 x0.x1 sin cos + |x1|^2 cos^2)
      const double aa = x0_.squaredNorm(), bb = x1_.squaredNorm(), ab = x0_.dot(x1_);
      auto speed = [&](double th) {
        const double s = std::sin(th), c = std::cos(th);
        return std::sqrt(std::max(0.0, aa * s * s - 2.0 * ab * s * c + bb * c * c));
      };
      return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          speed, 0.0, 0.5 * std::numbers::pi, 15, 1e-14);
    }
  }
  return 0.0;
}

Trajectory make_trajectory(TrajectoryKind kind, const Vector& x0, const Vector& x1) {
  if (x0.size() != x1.size()) throw DimensionError("trajectory endpoints differ in dimension");
  if (x0.size() == 0) throw DimensionError("trajectory endpoints are empty");
  if (x0 == x1) throw DegenerateTrajectoryError("trajectory endpoints coincide");
  Trajectory tr;
  tr.kind_ = kind;
  tr.x0_ = x0;
  tr.x1_ = x1;
  const auto m = x0.size();
  switch (kind) {
    case TrajectoryKind::line:
      tr.curve_ = {PlanarBasis::linear, x0, x1 - x0, Vector::Zero(m)};
      break;
    case TrajectoryKind::circular_arc:
      tr.curve_ = {PlanarBasis::quarter_turn, Vector::Zero(m), x0, x1};
      break;
    case TrajectoryKind::great_circle_loop: {
      const double r = x0.norm();
      if (r == 0.0) throw DegenerateTrajectoryError("loop start point is the origin");
      const Vector e0 = x0 / r;
      Vector w = x1 - x1.dot(e0) * e0;
      const double wn = w.norm();
      if (!(wn > 1e-12 * std::max(1.0, x1.norm())))
        throw DegenerateTrajectoryError("loop basis is linearly dependent");
      tr.curve_ = {PlanarBasis::full_turn, Vector::Zero(m), x0, w * (r / wn)};
      break;
    }
  }
  return tr;
}

namespace {

struct PolylinePass {
  std::vector<double> z, h;
};

PolylinePass polyline_pass(const Network& net, const Trajectory& traj, std::size_t points) {
  const std::size_t layers = net.num_layers();
  PolylinePass out{std::vector<double>(layers + 1, 0.0), std::vector<double>(layers, 0.0)};
  std::vector<std::vector<double>> zs(layers + 1), hs(layers);
  LayerTrace prev = forward(net, traj.at(0.0));
  for (std::size_t i = 1; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    LayerTrace cur = forward(net, traj.at(t));
    for (std::size_t d = 0; d < cur.activations.size(); ++d)
      zs[d].push_back((cur.activations[d] - prev.activations[d]).norm());
    for (std::size_t d = 0; d < layers; ++d)
      hs[d].push_back((cur.pre_activations[d] - prev.pre_activations[d]).norm());
    prev = std::move(cur);
  }
  for (std::size_t d = 0; d < layers; ++d) {
    out.z[d] = stats::pairwise_sum(zs[d]);
    out.h[d] = stats::pairwise_sum(hs[d]);
  }
  out.z.resize(layers);
  return out;
}

}  // namespace

LengthProfile layer_image_length(const Network& net, const Trajectory& traj, std::size_t num_points,
                                 double rel_tol, std::size_t max_points) {
  if (num_points < 2) throw DomainError("num_points must be at least 2");
  if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
  if (traj.dim() != net.spec().input_dim)
    throw DimensionError("trajectory dimension does not match network input");
  LengthProfile p;
  p.method = LengthMethod::polyline;
  std::size_t n = num_points;
  PolylinePass cur = polyline_pass(net, traj, n);
  p.converged = false;
  p.estimated_rel_error = std::numeric_limits<double>::infinity();
  while (2 * n - 1 <= max_points) {
    const std::size_t next_n = 2 * n - 1;
    PolylinePass next = polyline_pass(net, traj, next_n);
    double worst = 0.0;
    for (std::size_t d = 0; d < next.z.size(); ++d) {
      const double a = cur.z[d], b = next.z[d];
      if (b > 0.0) worst = std::max(worst, std::abs(b - a) / b);
    }
    cur = std::move(next);
    n = next_n;
    p.estimated_rel_error = worst;
    if (worst < rel_tol) {
      p.converged = true;
      break;
    }
  }
  p.points_used = n;
  p.lengths = cur.z;
  p.lengths[0] = traj.analytic_length();
  p.pre_activation_lengths = cur.h;
  return p;
}

LengthProfile exact_layer_lengths(const Network& net, const Trajectory& traj) {
  PlanarSweepOptions opt;
  opt.record_events = false;
  opt.track_patterns = false;
  opt.track_output_sign = false;
  opt.track_lengths = true;
  const PlanarSweepOutput s = planar_sweep(net, traj, opt);
  LengthProfile p;
  p.method = LengthMethod::exact_sweep;
  p.lengths = s.layer_lengths;
  p.lengths[0] = traj.analytic_length();
  p.points_used = s.num_intervals;
  return p;
}

LengthProfile measure_lengths(const Network& net, const Trajectory& traj, LengthMethod method,
                              std::size_t num_points, double rel_tol) {
  switch (method) {
    case LengthMethod::automatic:
      if (has_patterns(net.activation())) return exact_layer_lengths(net, traj);
      return layer_image_length(net, traj, num_points, rel_tol);
    case LengthMethod::polyline: return layer_image_length(net, traj, num_points, rel_tol);
    case LengthMethod::exact_sweep: return exact_layer_lengths(net, traj);
  }
  return {};
}

GrowthBounds theoretical_growth_bounds(std::size_t k, double sigma_w, double sigma_b,
                                       Activation activation) {
  if (activation != Activation::relu && activation != Activation::hard_tanh)
    throw UnsupportedActivationError("growth bounds exist for relu and hard_tanh only");
  if (k < 2) throw DomainError("growth bounds assume width k >= 2");
  if (!(sigma_w > 0.0)) throw DomainError("growth bounds assume sigma_w > 0");
  if (sigma_b < 0.0) throw DomainError("sigma_b must be non-negative");
  GrowthBounds g;
  g.k = k;
  g.sigma_w = sigma_w;
  g.sigma_b = sigma_b;
  g.activation = activation;
  const double kd = static_cast<double>(k);
  const double sk = std::sqrt(kd);
  g.upper_ratio = sigma_w * std::sqrt((kd + 1.0) / kd);
  if (activation == Activation::relu) {
    g.lower_ratio = (1.0 / std::numbers::sqrt2) *
                    (sigma_w * sk / std::sqrt(2.0 * (kd + 1.0)) - sigma_w * sk * std::pow(2.0, -kd));
  } else {
    const double s = std::hypot(sigma_w, sigma_b);
    if (s < 1.0)
      throw DomainError("hard_tanh lower bound assumes sqrt(sigma_w^2 + sigma_b^2) >= 1");
    const double root2pi = std::sqrt(2.0 * std::numbers::pi);
    const double main = std::pow(2.0 * std::numbers::pi, -0.25) * std::sqrt(s * kd) /
                        std::sqrt(s * root2pi + kd - 1.0);
    const double tail = sk * std::pow(1.0 - 1.0 / s, kd - 1.0);
    g.lower_ratio = (sigma_w / s) * (1.0 / std::numbers::sqrt2) * (main - tail);
  }
  return g;
}

std::uint64_t ensemble_seed(std::uint64_t base, std::size_t index) noexcept {
  return CounterRng(base).derive({0xe5e1ULL, static_cast<std::uint64_t>(index)}).key();
}

GrowthCurve growth_ratio_curve(const NetworkSpec& spec, const Trajectory& traj, std::size_t num_seeds,
                               const GrowthCurveOptions& options) {
  if (num_seeds < 2) throw DomainError("growth_ratio_curve needs at least 2 seeds");
  spec.validate();
  GrowthCurve gc;
  gc.num_seeds = num_seeds;
  gc.per_seed_lengths.resize(num_seeds);
  parallel_for(num_seeds, [&](std::size_t s) {
    NetworkSpec sp = spec;
    sp.seed = ensemble_seed(spec.seed, s);
    const Network net = init_network(sp);
    gc.per_seed_lengths[s] =
        measure_lengths(net, traj, options.method, options.num_points, options.rel_tol).lengths;
  });
  const std::size_t layers = spec.depth() + 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t d = 0; d < layers; ++d) {
    GrowthRow row;
    row.layer = d;
    std::vector<double> len, ratio;
    for (const auto& l : gc.per_seed_lengths) {
      len.push_back(l[d]);
      if (d == 0) continue;
      if (l[d] > 0.0 && l[d - 1] > 0.0)
        ratio.push_back(l[d] / l[d - 1]);
      else
        ++row.excluded;
    }
    const auto ci = stats::mean_ci(len);
    row.mean_length = ci.mean;
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    row.ratio = row.ratio_ci_lo = row.ratio_ci_hi = nan;
    if (!ratio.empty()) {
      const auto rc = stats::mean_ci(ratio);
      row.ratio = rc.mean;
      row.ratio_ci_lo = rc.lo;
      row.ratio_ci_hi = rc.hi;
    }
    gc.rows.push_back(row);
  }
  return gc;
}

void write_growth_csv(std::ostream& os, const GrowthCurve& curve) {
  os << "layer,mean_length,ci_lo,ci_hi,ratio,ratio_ci_lo,ratio_ci_hi,excluded\n";
  for (const auto& r : curve.rows)
    csv_row(os, r.layer, r.mean_length, r.ci_lo, r.ci_hi, r.ratio, r.ratio_ci_lo, r.ratio_ci_hi, r.excluded);
}

void write_bounds_csv(std::ostream& os, const std::vector<GrowthBounds>& rows) {
  os << "k,sigma_w,sigma_b,activation,lower,upper\n";
  for (const auto& b : rows)
    csv_row(os, b.k, b.sigma_w, b.sigma_b, to_string(b.activation), b.lower_ratio, b.upper_ratio);
}

Trajectory random_trajectory(TrajectoryKind kind, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw DimensionError("trajectory dimension must be positive");
  const CounterRng rng = CounterRng(seed).derive(0x7a1ULL);
  const auto n = static_cast<Eigen::Index>(m);
  Vector a(n), b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i) = rng.normal(static_cast<std::uint64_t>(i));
    b(i) = rng.normal(static_cast<std::uint64_t>(n + i));
  }
  return make_trajectory(kind, a, b);
}

}  // namespace xpl
