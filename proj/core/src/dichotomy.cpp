#include <algorithm>
#include <set>

#include "xpl/errors.hpp"
#include "xpl/parallel.hpp"
#include "xpl/rng.hpp"
#include "xpl/sweep.hpp"

namespace xpl {

namespace {

struct LabelTrack {
  int initial = 0;
  std::vector<double> flips;
};

using Labels = std::vector<std::uint64_t>;

void flip(Labels& l, std::size_t j) { l[j / 64] ^= std::uint64_t{1} << (j % 64); }

}  // namespace

DichotomyResult weight_sweep_dichotomies(const Network& net, const Matrix& w0, const Matrix& w1,
                                         std::size_t sweep_layer, const std::vector<Vector>& data,
                                         std::size_t num_t) {
  if (sweep_layer >= net.depth())
    throw DimensionError("sweep layer must index a hidden layer (0 .. n-1)");
  if (data.empty()) throw DomainError("dichotomies need at least one datapoint");
  if (num_t == 1) throw DomainError("num_t must be 0 (continuous) or at least 2");
  const Layer& swept = net.layer(sweep_layer);
  if (w0.rows() != swept.weights.rows() || w0.cols() != swept.weights.cols() ||
      w1.rows() != w0.rows() || w1.cols() != w0.cols())
    throw DimensionError("sweep endpoints do not match the swept layer");

  const std::size_t s = data.size();
  std::vector<LabelTrack> tracks(s);
  parallel_for(s, [&](std::size_t j) {
    const LayerTrace tr = forward(net, data[j]);
    const Vector& z = tr.activations[sweep_layer];
    PlanarSweepOptions opt;
    opt.record_events = false;
    opt.track_patterns = false;
    opt.track_output_sign = true;
    const Vector ha = w0 * z, hb = w1 * z;
    PlanarSweepOutput r = planar_sweep(net, sweep_layer, PlanarBasis::full_turn, swept.bias, ha, hb, opt);
    tracks[j] = {r.initial_output_label, std::move(r.output_sign_change_times)};
  });

  std::vector<std::pair<double, std::size_t>> flips;
  Labels labels((s + 63) / 64, 0);
  for (std::size_t j = 0; j < s; ++j) {
    if (tracks[j].initial) flip(labels, j);
    for (double t : tracks[j].flips) flips.emplace_back(t, j);
  }
  std::sort(flips.begin(), flips.end());

  DichotomyResult res;
  res.s = s;
  res.sweep_layer = sweep_layer;
  res.num_t = num_t;
  std::set<Labels> seen{labels};
  if (num_t == 0) {
    res.num_label_transitions = flips.size();
    for (std::size_t i = 0; i < flips.size();) {
      const double t = flips[i].first;
      // Flips closer than the root tolerance land together.
      while (i < flips.size() && flips[i].first <= t + 1e-12) flip(labels, flips[i++].second);
      seen.insert(labels);
    }
  } else {
    std::size_t next = 0;
    Labels prev = labels;
    for (std::size_t i = 1; i < num_t; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(num_t);
      while (next < flips.size() && flips[next].first <= t) flip(labels, flips[next++].second);
      for (std::size_t w = 0; w < labels.size(); ++w)
        res.num_label_transitions += static_cast<std::size_t>(__builtin_popcountll(labels[w] ^ prev[w]));
      seen.insert(labels);
      prev = labels;
    }
  }
  res.num_dichotomies = seen.size();
  return res;
}

DichotomyResult weight_sweep_dichotomies(const NetworkSpec& spec, std::size_t sweep_layer,
                                         const std::vector<Vector>& data, std::size_t num_t,
                                         std::uint64_t seed) {
  NetworkSpec sp = spec;
  sp.seed = seed;
  const Network net = init_network(sp);
  if (sweep_layer >= net.depth())
    throw DimensionError("sweep layer must index a hidden layer (0 .. n-1)");
  NetworkSpec other = sp;
  other.seed = CounterRng(seed).derive(0x5177ULL).key();
  const Network net1 = init_network(other);
  DichotomyResult r = weight_sweep_dichotomies(net, net.layer(sweep_layer).weights,
                                               net1.layer(sweep_layer).weights, sweep_layer, data, num_t);
  r.seed = seed;
  return r;
}

std::vector<RemainingDepthRow> remaining_depth_dichotomies(const NetworkSpec& spec,
                                                           const std::vector<Vector>& data,
                                                           std::size_t num_t, std::uint64_t seed) {
  std::vector<RemainingDepthRow> rows;
  for (std::size_t l = 0; l < spec.depth(); ++l)
    rows.push_back({l, spec.depth() - l, weight_sweep_dichotomies(spec, l, data, num_t, seed)});
  return rows;
}

}  // namespace xpl
