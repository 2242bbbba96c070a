#include "xpl/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>

#include "xpl/csv.hpp"
#include "xpl/errors.hpp"
#include "xpl/parallel.hpp"
#include "xpl/rng.hpp"

namespace xpl {

std::string_view to_string(SweepMethod m) {
  switch (m) {
    case SweepMethod::exact_affine: return "exact_affine";
    case SweepMethod::exact_trigonometric: return "exact_trigonometric";
    case SweepMethod::adaptive_bisection: return "adaptive_bisection";
  }
  return "?";
}

SweepResult exact_transition_sweep(const Network& net, const Trajectory& traj) {
  PlanarSweepOptions opt;
  opt.record_events = true;
  opt.track_patterns = true;
  opt.track_output_sign = true;
  PlanarSweepOutput s = planar_sweep(net, traj, opt);
  SweepResult r;
  r.events = std::move(s.events);
  r.num_transitions = s.num_transitions;
  r.output_transitions = s.output_sign_change_times.size();
  r.num_patterns = s.num_patterns;
  r.num_intervals = s.num_intervals;
  r.patterns_unique = s.patterns_unique;
  r.min_event_gap = s.min_event_gap;
  r.layer_transitions = std::move(s.layer_transitions);
  r.method = traj.kind() == TrajectoryKind::line ? SweepMethod::exact_affine
                                                  : SweepMethod::exact_trigonometric;
  return r;
}

namespace {

bool event_less(const TransitionEvent& a, const TransitionEvent& b) {
  if (a.t != b.t) return a.t < b.t;
  if (a.layer != b.layer) return a.layer < b.layer;
  if (a.neuron != b.neuron) return a.neuron < b.neuron;
  return a.boundary < b.boundary;
}

class Bisector {
 public:
  Bisector(const Network& net, const Trajectory& traj, double t_tol)
      : net_(net), traj_(traj), tol_(t_tol) {
    for (std::size_t d = 0; d < net.depth(); ++d)
      for (std::size_t i = 0; i < net.spec().hidden_widths[d]; ++i) owner_.push_back({d, i});
  }

  std::string codes(double t) {
    const auto p = activation_pattern(net_, traj_.at(t));
    std::string s(p.codes.size(), '\0');
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<char>(p.codes[i]);
    return s;
  }

  void refine(double a, double b, const std::string& ca, const std::string& cb) {
    std::size_t dist = 0;
    for (std::size_t i = 0; i < ca.size(); ++i) dist += static_cast<std::size_t>(std::abs(ca[i] - cb[i]));
    if (dist == 0) return;
    const double mid = 0.5 * (a + b);
    if (0.5 * (b - a) < tol_) {
      emit(mid, ca, cb);
      return;
    }
    const std::string cm = codes(mid);
    refine(a, mid, ca, cm);
    record(cm);
    refine(mid, b, cm, cb);
  }

  SweepResult finish() {
    std::sort(result_.events.begin(), result_.events.end(), event_less);
    result_.num_transitions = result_.events.size();
    result_.num_patterns = seen_.size();
    result_.num_intervals = runs_;
    result_.patterns_unique = runs_ == seen_.size();
    double gap = 1.0;
    for (std::size_t i = 1; i < result_.events.size(); ++i) {
      const double g = result_.events[i].t - result_.events[i - 1].t;
      if (g > 0.0) gap = std::min(gap, g);
    }
    result_.min_event_gap = gap;
    result_.layer_transitions.assign(net_.depth(), 0);
    for (const auto& e : result_.events) ++result_.layer_transitions[e.layer];
    result_.method = SweepMethod::adaptive_bisection;
    return std::move(result_);
  }

  // Call in increasing t so that consecutive runs can be tracked.
  void record(const std::string& s) {
    if (s != last_) {
      ++runs_;
      last_ = s;
    }
    seen_.insert(s);
  }

 private:
  void emit(double t, const std::string& ca, const std::string& cb) {
    const bool relu = net_.activation() == Activation::relu;
    for (std::size_t i = 0; i < ca.size(); ++i) {
      int c = ca[i];
      const int target = cb[i];
      while (c != target) {
        const int dir = target > c ? 1 : -1;
        Boundary b = Boundary::relu_zero;
        if (!relu) {
          const bool plus = dir > 0 ? c == 0 : c == 1;
          b = plus ? Boundary::tanh_plus_one : Boundary::tanh_minus_one;
        }
        result_.events.push_back({t, static_cast<std::uint32_t>(owner_[i].first),
                                  static_cast<std::uint32_t>(owner_[i].second), b,
                                  static_cast<std::int8_t>(dir)});
        c += dir;
      }
    }
  }

  const Network& net_;
  const Trajectory& traj_;
  double tol_;
  std::vector<std::pair<std::size_t, std::size_t>> owner_;
  std::unordered_set<std::string> seen_;
  std::string last_;
  std::size_t runs_ = 0;
  SweepResult result_;
};

}  // namespace

SweepResult count_transitions_curved(const Network& net, const Trajectory& traj, double t_tol) {
  if (!(t_tol >= kMinBisectionTol))
    throw DomainError("t_tol below 2^-40 is beneath the resolution of root separation");
  if (!has_patterns(net.activation()))
    throw UnsupportedActivationError("transition counting needs relu or hard_tanh");
  if (traj.dim() != net.spec().input_dim)
    throw DimensionError("trajectory dimension does not match network input");
  double cell = 0x1p-16;
  if (t_tol > cell) cell = std::min(1.0, std::exp2(std::ceil(std::log2(t_tol))));
  const auto cells = static_cast<std::size_t>(std::llround(1.0 / cell));
  Bisector b(net, traj, t_tol);
  std::string prev = b.codes(0.0);
  b.record(prev);
  for (std::size_t i = 1; i <= cells; ++i) {
    const double t1 = static_cast<double>(i - 1) * cell;
    const double t2 = static_cast<double>(i) * cell;
    std::string cur = b.codes(t2);
    b.refine(t1, t2, prev, cur);
    b.record(cur);
    prev = std::move(cur);
  }
  return b.finish();
}

std::size_t random_walk_dichotomy_baseline(std::size_t num_transitions, std::size_t s,
                                           std::uint64_t seed) {
  if (s == 0) throw DomainError("random walk needs s >= 1");
  RngStream rng(seed);
  const std::size_t words = (s + 63) / 64;
  std::vector<std::uint64_t> labels(words, 0);
  std::set<std::vector<std::uint64_t>> seen{labels};
  for (std::size_t i = 0; i < num_transitions; ++i) {
    const std::size_t j = rng.index(s);
    labels[j / 64] ^= std::uint64_t{1} << (j % 64);
    seen.insert(labels);
  }
  return seen.size();
}

std::vector<TransitionLengthRecord> transitions_vs_length(const NetworkSpec& spec,
                                                          const Trajectory& traj,
                                                          const std::vector<std::size_t>& depths,
                                                          std::size_t num_seeds) {
  if (spec.hidden_widths.empty()) throw InvalidSpecError("spec needs a hidden width");
  const std::size_t width = spec.hidden_widths.front();
  std::vector<TransitionLengthRecord> out(depths.size() * num_seeds);
  parallel_for(out.size(), [&](std::size_t idx) {
    const std::size_t di = idx / num_seeds, s = idx % num_seeds;
    NetworkSpec sp = spec;
    sp.hidden_widths.assign(depths[di], width);
    sp.seed = ensemble_seed(spec.seed, s);
    sp.validate();
    const Network net = init_network(sp);
    PlanarSweepOptions opt;
    opt.record_events = false;
    opt.track_output_sign = false;
    opt.track_lengths = true;
    const PlanarSweepOutput r = planar_sweep(net, traj, opt);
    out[idx] = {depths[di], width, spec.sigma_w_sq, sp.seed, r.layer_lengths.back(), r.num_transitions,
                r.num_patterns};
  });
  return out;
}

void write_events_csv(std::ostream& os, const std::vector<TransitionEvent>& events) {
  os << "t,layer,neuron,boundary,direction\n";
  for (const auto& e : events)
    csv_row(os, e.t, e.layer, e.neuron, to_string(e.boundary), static_cast<int>(e.direction));
}

void write_summary_csv(std::ostream& os, const std::vector<TransitionLengthRecord>& rows) {
  os << "depth,width,sigma_w_sq,seed,length,transitions,patterns\n";
  for (const auto& r : rows)
    csv_row(os, r.depth, r.width, r.sigma_w_sq, r.seed, r.length, r.transitions, r.patterns);
}

void write_dichotomies_csv(std::ostream& os, const std::vector<RemainingDepthRow>& rows) {
  os << "sweep_layer,remaining_depth,s,dichotomies,label_transitions,seed\n";
  for (const auto& r : rows)
    csv_row(os, r.sweep_layer, r.remaining_depth, r.result.s, r.result.num_dichotomies,
            r.result.num_label_transitions, r.result.seed);
}

}  // namespace xpl
