#include "xpl/planar_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

#include <boost/math/special_functions/ellint_2.hpp>

#include "xpl/errors.hpp"
#include "xpl/rng.hpp"

namespace xpl {

std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::relu_zero: return "relu_zero";
    case Boundary::tanh_plus_one: return "tanh_plus_one";
    case Boundary::tanh_minus_one: return "tanh_minus_one";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Coef {
  double c, a, b;
};

/// Curve position at which exits are evaluated; cos and sin are shared by
/// every neuron.
struct Phase {
  double t = 0.0, cs = 1.0, sn = 0.0;
};

struct Basis {
  PlanarBasis kind;
  double omega;

  explicit Basis(PlanarBasis k) : kind(k), omega(basis_omega(k)) {}

  bool linear() const { return kind == PlanarBasis::linear; }

  Phase phase(double t) const {
    if (linear()) return {t, 1.0, 0.0};
    return {t, std::cos(omega * t), std::sin(omega * t)};
  }

  double value(const Coef& h, double t) const {
    if (linear()) return h.c + h.a * t;
    const double th = omega * t;
    return h.c + h.a * std::cos(th) + h.b * std::sin(th);
  }

  /// First crossing of h = thr in direction dir (+1 rising, -1 falling) at
  /// or after t0, or +inf if none before t = 1. Returns t0 when the neuron
  /// is already past the threshold or sits on it moving outward.
  double crossing(const Coef& h, double thr, int dir, const Phase& p) const {
    const double t0 = p.t;
    const double eps = 1e-12 * (1.0 + std::abs(h.c) + std::abs(h.a) + std::abs(h.b));
    if (linear()) {
      const double m = dir * (h.c + h.a * t0 - thr);
      if (m > eps) return t0;
      if (m >= -eps) return dir * h.a > 0.0 ? t0 : kInf;
      if (dir * h.a <= 0.0) return kInf;
      const double r = (thr - h.c) / h.a;
      if (r > 1.0) return kInf;
      return std::max(r, t0);
    }
    const double th0 = omega * t0;
    const double cs = p.cs, sn = p.sn;
    const double m = dir * (h.c + h.a * cs + h.b * sn - thr);
    if (m > eps) return t0;
    const bool on_boundary = m >= -eps;
    if (on_boundary && dir * (-h.a * sn + h.b * cs) > 0.0) return t0;
    const double r = std::hypot(h.a, h.b);
    if (r == 0.0) return kInf;
    const double q = (thr - h.c) / r;
    if (!(q > -1.0 && q < 1.0)) return kInf;
    const double delta = std::acos(q);
    const double phi = std::atan2(h.b, h.a);
    // Rising crossings sit at phi - delta, falling ones at phi + delta.
    const double base = dir > 0 ? phi - delta : phi + delta;
    const double lower = on_boundary ? th0 + 1e-9 : th0 - 1e-12;
    double th = base + kTwoPi * std::ceil((lower - base) / kTwoPi);
    th = std::max(th, th0);
    const double t = th / omega;
    return t > 1.0 ? kInf : t;
  }

  /// A time no later than crossing(), or +inf when the threshold is out of
  /// reach. NaN when only the exact root will do.
  double crossing_bound(const Coef& h, double thr, int dir, const Phase& p) const {
    const double eps = 1e-12 * (1.0 + std::abs(h.c) + std::abs(h.a) + std::abs(h.b));
    const double m = dir * (h.c + h.a * p.cs + h.b * p.sn - thr);
    if (m >= -eps) return std::numeric_limits<double>::quiet_NaN();
    const double r2 = h.a * h.a + h.b * h.b;
    const double q = thr - h.c;
    if (q * q >= r2) return kInf;
    const double t = p.t - m / (omega * std::sqrt(r2));
    return t > 1.0 ? kInf : t;
  }

  /// Length of the image between t1 and t2 given the coefficient sums
  /// saa = sum a^2, sbb = sum b^2, sab = sum a b over a layer.
  double length(double saa, double sbb, double sab, double t1, double t2) const {
    if (t2 <= t1) return 0.0;
    if (linear()) return std::sqrt(std::max(saa, 0.0)) * (t2 - t1);
    // speed^2 = P + R cos(2 th - psi) = (P + R)(1 - k^2 sin^2(th - psi / 2))
    const double p = 0.5 * (saa + sbb);
    const double half = 0.5 * (sbb - saa);
    const double r = std::hypot(half, sab);
    if (!(p + r > 0.0)) return 0.0;
    const double psi = std::atan2(-sab, half);
    const double k = std::min(1.0, std::sqrt(2.0 * r / (p + r)));
    const double v1 = omega * t1 - 0.5 * psi, v2 = omega * t2 - 0.5 * psi;
    return std::sqrt(p + r) * (ellint2(k, v2) - ellint2(k, v1));
  }

  // Incomplete E(phi, k) for any real phi; at k = 1 the integrand is |cos|.
  static double ellint2(double k, double phi) {
    if (k < 1.0) return boost::math::ellint_2(k, phi);
    const double m = std::round(phi / std::numbers::pi);
    return 2.0 * m + std::sin(phi - m * std::numbers::pi);
  }

  /// Zero crossings of h in (t1, t2], ordered, with direction.
  void zero_crossings(const Coef& h, double t1, double t2,
                      std::vector<std::pair<double, int>>& out) const {
    out.clear();
    if (linear()) {
      if (h.a == 0.0) return;
      const double r = -h.c / h.a;
      if (r > t1 && r <= t2) out.emplace_back(r, h.a > 0 ? 1 : -1);
      return;
    }
    const double r = std::hypot(h.a, h.b);
    if (r == 0.0) return;
    const double q = -h.c / r;
    if (!(q > -1.0 && q < 1.0)) return;
    const double delta = std::acos(q);
    const double phi = std::atan2(h.b, h.a);
    const double th1 = omega * t1, th2 = omega * t2;
    for (int dir : {1, -1}) {
      const double base = dir > 0 ? phi - delta : phi + delta;
      for (double th = base + kTwoPi * std::floor((th1 - base) / kTwoPi + 1.0); th <= th2; th += kTwoPi)
        if (th > th1) out.emplace_back(th / omega, dir);
    }
    std::sort(out.begin(), out.end());
  }
};

struct Exit {
  double t = kInf;
  std::int8_t dir = 0;
  /// False when t is only a lower bound.
  bool exact = true;
};

struct PairHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept {
    return static_cast<std::size_t>(p.first ^ mix64(p.second));
  }
};

using SparseDelta = std::vector<std::pair<std::size_t, Coef>>;

class Sweeper {
 public:
  Sweeper(const Network& net, std::size_t first_layer, PlanarBasis basis, const Vector& hc,
          const Vector& ha, const Vector& hb, const PlanarSweepOptions& opt, const PlanarCurve* input)
      : net_(net), first_(first_layer), basis_(basis), opt_(opt), act_(net.activation()) {
    if (!has_patterns(act_))
      throw UnsupportedActivationError("exact sweeps need relu or hard_tanh, got " +
                                       std::string(to_string(act_)));
    if (first_layer >= net.depth()) throw DimensionError("first swept layer must be a hidden layer");
    layers_.resize(net.depth() - first_layer);
    if (static_cast<std::size_t>(hc.size()) != net.spec().fan_out(first_layer) || ha.size() != hc.size() ||
        hb.size() != hc.size())
      throw DimensionError("initial coefficients do not match the swept layer width");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const std::size_t k = net.spec().fan_out(first_ + l);
      auto& L = layers_[l];
      L.hc = Vector::Zero(k);
      L.ha = Vector::Zero(k);
      L.hb = Vector::Zero(k);
      L.zc = Vector::Zero(k);
      L.za = Vector::Zero(k);
      L.zb = Vector::Zero(k);
      L.code.assign(k, 0);
      L.exit.assign(k, Exit{});
      L.offset = total_;
      total_ += k;
    }
    layers_[0].hc = hc;
    layers_[0].ha = ha;
    layers_[0].hb = hb;
    if (input) {
      has_input_ = true;
      input_saa_ = input->u.squaredNorm();
      input_sbb_ = input->v.size() ? input->v.squaredNorm() : 0.0;
      input_sab_ = input->v.size() ? input->u.dot(input->v) : 0.0;
    }
    hash_a_ = CounterRng(0x5eedULL).derive(1);
    hash_b_ = CounterRng(0x5eedULL).derive(2);
  }

  PlanarSweepOutput run() {
    PlanarSweepOutput out;
    out.layer_transitions.assign(layers_.size(), 0);
    if (opt_.track_lengths) out.layer_lengths.assign(layers_.size() + 1, 0.0);
    if (opt_.track_lengths && !has_input_) out.layer_lengths[0] = std::numeric_limits<double>::quiet_NaN();

    initialize();
    const Coef o0 = output_coef();
    {
      const double v = basis_.value(o0, 0.0);
      const double v_eps = basis_.value(o0, 1e-9);
      label_ = v > 0.0 ? 1 : (v < 0.0 ? 0 : (v_eps > 0.0 ? 1 : 0));
      out.initial_output_label = label_;
    }
    record_interval(out, 0.0);

    double t_cur = 0.0;
    double last_event_t = -1.0;
    std::size_t since_refresh = 0;
    std::vector<std::pair<double, int>> roots;
    std::vector<std::size_t> order(layers_.size());
    for (;;) {
      double t_ev = kInf;
      for (std::size_t l = 0; l < order.size(); ++l) order[l] = l;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return layers_[a].min_exit < layers_[b].min_exit; });
      for (std::size_t l : order) {
        if (layers_[l].min_exit > t_ev + opt_.root_tol) break;
        t_ev = std::min(t_ev, resolve(l, t_ev));
      }
      const double t_stop = std::min(t_ev, 1.0);
      advance(out, t_cur, t_stop, roots);
      if (!(t_ev < 1.0)) break;
      t_cur = t_ev;
      phase_ = basis_.phase(t_cur);
      if (last_event_t >= 0.0 && t_ev > last_event_t) out.min_event_gap = std::min(out.min_event_gap, t_ev - last_event_t);
      last_event_t = t_ev;

      std::size_t flips = 0;
      for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto& L = layers_[l];
        if (L.dirty) {
          recompute_exits(l);
        } else if (L.min_exit > t_cur + opt_.root_tol) {
          continue;
        }
        for (std::size_t i = 0; i < L.code.size(); ++i) {
          for (int guard = 0; guard < 4; ++guard) {
            if (L.exit[i].t > t_cur + opt_.root_tol) break;
            if (!L.exit[i].exact) {
              L.exit[i] = next_exit(L, i, phase_);
              continue;
            }
            flip(out, l, i, t_cur);
            ++flips;
          }
        }
        update_min(l);
      }
      since_refresh += flips;
      if (since_refresh >= opt_.refresh_interval) {
        since_refresh = 0;
        rebuild();
        for (std::size_t l = 0; l < layers_.size(); ++l) recompute_exits(l);
      }
      record_interval(out, t_cur);
    }
    out.num_patterns = opt_.track_patterns ? seen_.size() : out.num_intervals;
    out.patterns_unique = out.num_patterns == out.num_intervals;
    return out;
  }

 private:
  struct LayerState {
    Vector hc, ha, hb;
    Vector zc, za, zb;
    std::vector<std::int8_t> code;
    std::vector<Exit> exit;
    double min_exit = kInf;
    bool dirty = true;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    std::size_t offset = 0;
  };

  const Matrix& weights_above(std::size_t l) const { return net_.layer(first_ + l + 1).weights; }
  const Vector& bias_above(std::size_t l) const { return net_.layer(first_ + l + 1).bias; }

  bool passes(std::int8_t code) const {
    return act_ == Activation::relu ? code == 1 : code == 0;
  }

  Coef z_of(const LayerState& L, std::size_t i) const {
    const std::int8_t c = L.code[i];
    if (passes(c)) return {L.hc(i), L.ha(i), L.hb(i)};
    if (act_ == Activation::hard_tanh) return {static_cast<double>(c), 0.0, 0.0};
    return {0.0, 0.0, 0.0};
  }

  Exit next_exit(const LayerState& L, std::size_t i, const Phase& p) const {
    const Coef h{L.hc(i), L.ha(i), L.hb(i)};
    const std::int8_t c = L.code[i];
    if (act_ == Activation::relu) {
      const int dir = c == 0 ? 1 : -1;
      return {basis_.crossing(h, 0.0, dir, p), static_cast<std::int8_t>(dir)};
    }
    if (c == -1) return {basis_.crossing(h, -1.0, 1, p), 1};
    if (c == 1) return {basis_.crossing(h, 1.0, -1, p), -1};
    const double up = basis_.crossing(h, 1.0, 1, p);
    const double down = basis_.crossing(h, -1.0, -1, p);
    return up <= down ? Exit{up, 1} : Exit{down, -1};
  }

  /// Lower bound on the exit, falling back to the exact root when the
  /// neuron is on or past a threshold.
  Exit lazy_exit(const LayerState& L, std::size_t i, const Phase& p) const {
    if (basis_.linear()) return next_exit(L, i, p);
    const Coef h{L.hc(i), L.ha(i), L.hb(i)};
    const std::int8_t c = L.code[i];
    double b;
    if (act_ == Activation::relu) {
      b = basis_.crossing_bound(h, 0.0, c == 0 ? 1 : -1, p);
    } else if (c != 0) {
      b = basis_.crossing_bound(h, static_cast<double>(c), -c, p);
    } else {
      const double up = basis_.crossing_bound(h, 1.0, 1, p);
      const double down = basis_.crossing_bound(h, -1.0, -1, p);
      b = (std::isnan(up) || std::isnan(down)) ? std::numeric_limits<double>::quiet_NaN() : std::min(up, down);
    }
    if (std::isnan(b)) return next_exit(L, i, p);
    if (b == kInf) return {kInf, 0, true};
    return {b, 0, false};
  }

  /// Makes every bound that could beat min(exact layer minimum, cap) exact
  /// and returns the exact minimum (capped).
  double resolve(std::size_t l, double cap) {
    auto& L = layers_[l];
    double e = kInf;
    for (const auto& x : L.exit)
      if (x.exact) e = std::min(e, x.t);
    for (std::size_t i = 0; i < L.exit.size(); ++i) {
      if (L.exit[i].exact || L.exit[i].t > std::min(e, cap) + opt_.root_tol) continue;
      L.exit[i] = next_exit(L, i, phase_);
      e = std::min(e, L.exit[i].t);
    }
    update_min(l);
    return e;
  }

  void set_z(LayerState& L) {
    for (std::size_t i = 0; i < L.code.size(); ++i) {
      const Coef z = z_of(L, i);
      L.zc(i) = z.c;
      L.za(i) = z.a;
      L.zb(i) = z.b;
    }
    L.saa = L.za.squaredNorm();
    L.sbb = L.zb.squaredNorm();
    L.sab = L.za.dot(L.zb);
  }

  void propagate_to(std::size_t l) {
    // h of layer l+1 from z of layer l.
    const Matrix& W = weights_above(l);
    const auto& L = layers_[l];
    if (l + 1 < layers_.size()) {
      auto& N = layers_[l + 1];
      N.hc.noalias() = W * L.zc + bias_above(l);
      N.ha.noalias() = W * L.za;
      N.hb.noalias() = W * L.zb;
    } else {
      oc_.noalias() = W * L.zc + bias_above(l);
      oa_.noalias() = W * L.za;
      ob_.noalias() = W * L.zb;
    }
  }

  void initialize() {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      auto& L = layers_[l];
      for (std::size_t i = 0; i < L.code.size(); ++i) {
        L.code[i] = region_code(act_, basis_.value({L.hc(i), L.ha(i), L.hb(i)}, 0.0));
        // Right limit at t = 0: settle neurons sitting on a threshold.
        for (int guard = 0; guard < 4; ++guard) {
          const Exit e = next_exit(L, i, phase_);
          if (e.t > opt_.root_tol) break;
          L.code[i] = static_cast<std::int8_t>(L.code[i] + e.dir);
        }
        hash_flip(l, i, 0, L.code[i], /*initial=*/true);
      }
      set_z(L);
      propagate_to(l);
      recompute_exits(l);
    }
  }

  void rebuild() {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      set_z(layers_[l]);
      propagate_to(l);
      layers_[l].dirty = true;
    }
  }

  void recompute_exits(std::size_t l) {
    auto& L = layers_[l];
    for (std::size_t i = 0; i < L.code.size(); ++i) L.exit[i] = lazy_exit(L, i, phase_);
    L.dirty = false;
    update_min(l);
  }

  void update_min(std::size_t l) {
    auto& L = layers_[l];
    double m = kInf;
    for (const auto& e : L.exit) m = std::min(m, e.t);
    L.min_exit = m;
  }

  Coef output_coef() const { return {oc_(0), oa_(0), ob_(0)}; }

  void hash_flip(std::size_t l, std::size_t i, std::int8_t old_code, std::int8_t new_code, bool initial) {
    if (!opt_.track_patterns) return;
    const std::uint64_t g = 3 * (layers_[l].offset + i);
    if (!initial) {
      ha_ ^= hash_a_.bits(g + static_cast<std::uint64_t>(old_code + 1));
      hb_ ^= hash_b_.bits(g + static_cast<std::uint64_t>(old_code + 1));
    }
    ha_ ^= hash_a_.bits(g + static_cast<std::uint64_t>(new_code + 1));
    hb_ ^= hash_b_.bits(g + static_cast<std::uint64_t>(new_code + 1));
  }

  void record_interval(PlanarSweepOutput& out, double t) {
    if (t > 0.0) ++out.num_intervals;
    if (opt_.track_patterns) seen_.insert({ha_, hb_});
    if (opt_.record_patterns) {
      ActivationPattern p;
      p.activation = act_;
      p.codes.reserve(total_);
      for (const auto& L : layers_) p.codes.insert(p.codes.end(), L.code.begin(), L.code.end());
      out.interval_patterns.push_back(std::move(p));
      out.interval_starts.push_back(t);
    }
  }

  void advance(PlanarSweepOutput& out, double t1, double t2, std::vector<std::pair<double, int>>& roots) {
    if (!(t2 > t1)) return;
    if (opt_.track_lengths) {
      if (has_input_) out.layer_lengths[0] += basis_.length(input_saa_, input_sbb_, input_sab_, t1, t2);
      for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& L = layers_[l];
        out.layer_lengths[l + 1] += basis_.length(L.saa, L.sbb, L.sab, t1, t2);
      }
    }
    if (opt_.track_output_sign) {
      basis_.zero_crossings(output_coef(), t1, t2, roots);
      for (const auto& [t, dir] : roots) {
        if ((dir > 0 && label_ == 0) || (dir < 0 && label_ == 1)) {
          label_ = dir > 0 ? 1 : 0;
          out.output_sign_change_times.push_back(t);
        }
      }
    }
  }

  void flip(PlanarSweepOutput& out, std::size_t l, std::size_t i, double t) {
    auto& L = layers_[l];
    const Exit e = L.exit[i];
    const std::int8_t old_code = L.code[i];
    const std::int8_t new_code = static_cast<std::int8_t>(old_code + e.dir);
    Boundary boundary = Boundary::relu_zero;
    if (act_ == Activation::hard_tanh) {
      const bool plus = (e.dir > 0) ? (old_code == 0) : (old_code == 1);
      boundary = plus ? Boundary::tanh_plus_one : Boundary::tanh_minus_one;
    }
    const Coef before = z_of(L, i);
    L.code[i] = new_code;
    const Coef after = z_of(L, i);
    hash_flip(l, i, old_code, new_code, false);
    ++out.num_transitions;
    ++out.layer_transitions[l];
    if (opt_.record_events)
      out.events.push_back({t, static_cast<std::uint32_t>(first_ + l), static_cast<std::uint32_t>(i),
                            boundary, e.dir});

    const Coef dz{after.c - before.c, after.a - before.a, after.b - before.b};
    if (dz.c != 0.0 || dz.a != 0.0 || dz.b != 0.0) {
      L.zc(i) = after.c;
      L.za(i) = after.a;
      L.zb(i) = after.b;
      L.saa += after.a * after.a - before.a * before.a;
      L.sbb += after.b * after.b - before.b * before.b;
      L.sab += after.a * after.b - before.a * before.b;
      sparse_.clear();
      sparse_.push_back({i, dz});
      push_delta(l);
    }
    L.exit[i] = lazy_exit(L, i, phase_);
  }

  /// Pushes the sparse z-change of layer l through every layer above it.
  void push_delta(std::size_t l) {
    for (std::size_t src = l; !sparse_.empty(); ++src) {
      const Matrix& W = weights_above(src);
      const Eigen::Index rows = W.rows();
      dc_.setZero(rows);
      da_.setZero(rows);
      db_.setZero(rows);
      double* pc = dc_.data();
      double* pa = da_.data();
      double* pb = db_.data();
      for (const auto& [j, d] : sparse_) {
        const double* w = W.col(static_cast<Eigen::Index>(j)).data();
        for (Eigen::Index r = 0; r < rows; ++r) {
          pc[r] += w[r] * d.c;
          pa[r] += w[r] * d.a;
          pb[r] += w[r] * d.b;
        }
      }
      if (src + 1 == layers_.size()) {
        oc_ += dc_;
        oa_ += da_;
        ob_ += db_;
        return;
      }
      auto& N = layers_[src + 1];
      N.hc += dc_;
      N.ha += da_;
      N.hb += db_;
      N.dirty = true;
      next_.clear();
      for (std::size_t r = 0; r < N.code.size(); ++r) {
        if (!passes(N.code[r])) continue;
        const Coef d{dc_(r), da_(r), db_(r)};
        const double na = N.ha(r), nb = N.hb(r);
        const double oa = N.za(r), ob = N.zb(r);
        N.zc(r) = N.hc(r);
        N.za(r) = na;
        N.zb(r) = nb;
        N.saa += na * na - oa * oa;
        N.sbb += nb * nb - ob * ob;
        N.sab += na * nb - oa * ob;
        next_.push_back({r, d});
      }
      std::swap(sparse_, next_);
    }
  }

  const Network& net_;
  std::size_t first_;
  Basis basis_;
  PlanarSweepOptions opt_;
  Activation act_;
  std::vector<LayerState> layers_;
  std::size_t total_ = 0;
  Vector oc_, oa_, ob_;
  Vector dc_, da_, db_;
  SparseDelta sparse_, next_;
  bool has_input_ = false;
  double input_saa_ = 0.0, input_sbb_ = 0.0, input_sab_ = 0.0;
  int label_ = 0;
  Phase phase_;
  CounterRng hash_a_{0}, hash_b_{0};
  std::uint64_t ha_ = 0, hb_ = 0;
  std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, PairHash> seen_;
};

}  // namespace

PlanarSweepOutput planar_sweep(const Network& net, std::size_t first_layer, PlanarBasis basis,
                               const Vector& hc, const Vector& ha, const Vector& hb,
                               const PlanarSweepOptions& options, const PlanarCurve* input_curve) {
  Sweeper s(net, first_layer, basis, hc, ha, hb, options, input_curve);
  return s.run();
}

PlanarSweepOutput planar_sweep(const Network& net, const Trajectory& traj,
                               const PlanarSweepOptions& options) {
  if (traj.dim() != net.spec().input_dim)
    throw DimensionError("trajectory dimension does not match network input");
  const PlanarCurve& c = traj.planar();
  const Layer& l0 = net.layer(0);
  const Vector hc = l0.weights * c.origin + l0.bias;
  const Vector ha = l0.weights * c.u;
  const Vector hb = c.v.size() ? Vector(l0.weights * c.v) : Vector::Zero(hc.size());
  return planar_sweep(net, 0, c.basis, hc, ha, hb, options, &c);
}

}  // namespace xpl
