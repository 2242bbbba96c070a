#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "xpl/csv.hpp"
#include "xpl/data.hpp"
#include "xpl/errors.hpp"
#include "xpl/netcore.hpp"
#include "xpl/regions.hpp"
#include "xpl/serialize.hpp"
#include "xpl/stats.hpp"
#include "xpl/sweep.hpp"
#include "xpl/train.hpp"
#include "xpl/trajectory.hpp"

namespace xplab {

using namespace xpl;

std::filesystem::path RunContext::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : dir_ / p;
}

void RunContext::csv(const std::string& name, const std::function<void(std::ostream&)>& fill) {
  const auto p = resolve(name);
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  fill(f);
  if (!f) throw IoError("write failed: " + p.string());
  record(p);
}

void RunContext::plot(const std::string& name, const std::vector<Series>& series, const AxesSpec& axes) {
  const auto p = resolve(name);
  emit_plot(series, axes, p.string());
  record(p);
}

namespace {

struct Cell {
  std::size_t width = 0;
  std::size_t depth = 0;
  double sigma_w_sq = 0.0;
};

template <typename T>
std::vector<T> sorted(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<Cell> grid(const Config& c) {
  std::vector<Cell> out;
  for (std::size_t w : sorted(c.counts("width")))
    for (std::size_t d : sorted(c.counts("depth")))
      for (double s : sorted(c.reals("sigma_w_sq"))) out.push_back({w, d, s});
  return out;
}

std::string tag(const Cell& g) {
  return "w" + std::to_string(g.width) + "_n" + std::to_string(g.depth) + "_sw" + fmt_double(g.sigma_w_sq);
}

std::string label(const Cell& g) {
  return "k=" + std::to_string(g.width) + " n=" + std::to_string(g.depth) + " sw2=" + fmt_double(g.sigma_w_sq);
}

NetworkSpec spec_of(const Config& c, const Cell& g, std::size_t m, std::size_t output_dim) {
  return NetworkSpec::uniform(m, g.width, g.depth, parse_activation(c.text("activation")), g.sigma_w_sq,
                              c.real("sigma_b_sq"), c.seed("seed"), output_dim);
}

NetworkSpec spec_of(const Config& c, const Cell& g) { return spec_of(c, g, c.count("input_dim"), c.count("output_dim")); }

void need_patterns(const Config& c) {
  const Activation a = parse_activation(c.text("activation"));
  if (!has_patterns(a))
    throw UnsupportedActivationError("activation " + std::string(to_string(a)) + " has no linear regions");
}

void check_grid(const Config& c, std::size_t m, std::size_t output_dim) {
  for (const Cell& g : grid(c)) spec_of(c, g, m, output_dim).validate();
}

void need_seeds(const Config& c) {
  if (c.count("seeds") == 0) throw ConfigError("seeds must be positive");
}

Trajectory trajectory_of(const Config& c) {
  return random_trajectory(parse_trajectory_kind(c.text("trajectory")), c.count("input_dim"), c.seed("traj_seed"));
}

LengthMethod length_method(const std::string& s) {
  if (s == "automatic") return LengthMethod::automatic;
  if (s == "polyline") return LengthMethod::polyline;
  if (s == "exact_sweep") return LengthMethod::exact_sweep;
  throw ConfigError("method must be automatic, polyline or exact_sweep");
}

std::string big(const BigInt& v) { return v.str(); }

// traj-growth -----------------------------------------------------------------

void check_traj_growth(const Config& c) {
  need_seeds(c);
  check_grid(c, c.count("input_dim"), c.count("output_dim"));
  parse_trajectory_kind(c.text("trajectory"));
  length_method(c.text("method"));
  if (c.count("num_points") < 2) throw ConfigError("num_points must be at least 2");
  if (!(c.real("rel_tol") > 0)) throw ConfigError("rel_tol must be positive");
}

void exec_traj_growth(const Config& c, RunContext& ctx) {
  const Trajectory traj = trajectory_of(c);
  GrowthCurveOptions opt;
  opt.method = length_method(c.text("method"));
  opt.num_points = c.count("num_points");
  opt.rel_tol = c.real("rel_tol");
  std::vector<Series> series;
  for (const Cell& g : grid(c)) {
    const GrowthCurve curve = growth_ratio_curve(spec_of(c, g), traj, c.count("seeds"), opt);
    ctx.csv("growth_" + tag(g) + ".csv", [&](std::ostream& os) { write_growth_csv(os, curve); });
    Series s{label(g), {}, {}};
    for (const auto& r : curve.rows) {
      s.x.push_back(static_cast<double>(r.layer));
      s.y.push_back(r.mean_length);
    }
    series.push_back(std::move(s));
  }
  ctx.plot("growth.svg", series, {"Trajectory length by layer", "layer", "mean length", true});
}

// growth-bounds ---------------------------------------------------------------

void check_growth_bounds(const Config& c) {
  parse_activation(c.text("activation"));
  for (std::size_t k : c.counts("k"))
    if (k == 0) throw ConfigError("k must be positive");
  for (double s : c.reals("sigma_w_sq"))
    if (!(s > 0)) throw ConfigError("sigma_w_sq must be positive");
  if (c.real("sigma_b_sq") < 0) throw ConfigError("sigma_b_sq must be non-negative");
}

void exec_growth_bounds(const Config& c, RunContext& ctx) {
  std::vector<GrowthBounds> rows;
  for (std::size_t k : sorted(c.counts("k")))
    for (double s : sorted(c.reals("sigma_w_sq")))
      rows.push_back(theoretical_growth_bounds(k, std::sqrt(s), std::sqrt(c.real("sigma_b_sq")),
                                               parse_activation(c.text("activation"))));
  ctx.csv("bounds.csv", [&](std::ostream& os) { write_bounds_csv(os, rows); });
  ctx.note("perpendicular_constant", GrowthBounds::perpendicular_constant);
  write_bounds_csv(ctx.out(), rows);
}

// transitions -----------------------------------------------------------------

void check_transitions(const Config& c) {
  need_seeds(c);
  check_grid(c, c.count("input_dim"), c.count("output_dim"));
  need_patterns(c);
  parse_trajectory_kind(c.text("trajectory"));
  const std::string m = c.text("method");
  if (m != "exact" && m != "bisection") throw ConfigError("method must be exact or bisection");
  if (m == "bisection" && !(c.real("t_tol") >= kMinBisectionTol)) throw ConfigError("t_tol below 2^-40");
}

void exec_transitions(const Config& c, RunContext& ctx) {
  const Trajectory traj = trajectory_of(c);
  const bool exact = c.text("method") == "exact";
  const auto cells = grid(c);
  const std::size_t seeds = c.count("seeds");
  std::vector<SweepResult> results(cells.size() * seeds);
  std::vector<std::uint64_t> net_seeds(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    NetworkSpec spec = spec_of(c, cells[i / seeds]);
    spec.seed = net_seeds[i] = ensemble_seed(spec.seed, i % seeds);
    const Network net = init_network(spec);
    results[i] = exact ? exact_transition_sweep(net, traj) : count_transitions_curved(net, traj, c.real("t_tol"));
  }
  ctx.csv("transitions.csv", [&](std::ostream& os) {
    os << "width,depth,sigma_w_sq,seed,method,transitions,patterns,output_transitions,patterns_unique,"
          "min_event_gap,pattern_bound\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const Cell& g = cells[i / seeds];
      const SweepResult& r = results[i];
      csv_row(os, g.width, g.depth, g.sigma_w_sq, net_seeds[i], to_string(r.method), r.num_transitions,
              r.num_patterns, r.output_transitions, int(r.patterns_unique), r.min_event_gap,
              big(activation_pattern_bound(g.depth, g.width, c.count("input_dim"),
                                           parse_activation(c.text("activation")))));
    }
  });
  ctx.note("pattern_bound", "proof-implied bound");
  if (results.size() == 1 && exact)
    ctx.csv("events.csv", [&](std::ostream& os) { write_events_csv(os, results[0].events); });
  for (std::size_t i = 0; i < results.size(); ++i)
    ctx.out() << tag(cells[i / seeds]) << " seed " << net_seeds[i] << ": T=" << results[i].num_transitions
              << " A=" << results[i].num_patterns << '\n';
}

// trans-vs-length -------------------------------------------------------------

void check_trans_vs_length(const Config& c) {
  need_seeds(c);
  check_grid(c, c.count("input_dim"), c.count("output_dim"));
  need_patterns(c);
  parse_trajectory_kind(c.text("trajectory"));
}

void exec_trans_vs_length(const Config& c, RunContext& ctx) {
  const Trajectory traj = trajectory_of(c);
  const auto depths = sorted(c.counts("depth"));
  std::vector<TransitionLengthRecord> all;
  std::vector<Series> series;
  for (std::size_t w : sorted(c.counts("width")))
    for (double s : sorted(c.reals("sigma_w_sq"))) {
      const NetworkSpec spec = spec_of(c, {w, 1, s});
      const auto recs = transitions_vs_length(spec, traj, depths, c.count("seeds"));
      Series ser{"k=" + std::to_string(w) + " sw2=" + fmt_double(s), {}, {}};
      for (std::size_t d = 0; d < depths.size(); ++d) {
        std::vector<double> len, tr;
        for (const auto& r : recs)
          if (r.depth == depths[d]) {
            len.push_back(r.length);
            tr.push_back(static_cast<double>(r.transitions));
          }
        ser.x.push_back(stats::mean(len));
        ser.y.push_back(stats::mean(tr));
      }
      series.push_back(std::move(ser));
      all.insert(all.end(), recs.begin(), recs.end());
    }
  ctx.csv("summary.csv", [&](std::ostream& os) { write_summary_csv(os, all); });
  ctx.plot("trans_vs_length.svg", series, {"Transitions against trajectory length", "final-layer length", "transitions", false});
}

// dichotomies / remaining-depth ---------------------------------------------

void check_dichotomies(const Config& c) {
  need_seeds(c);
  check_grid(c, c.count("input_dim"), c.count("output_dim"));
  need_patterns(c);
  if (c.count("points") == 0) throw ConfigError("points must be positive");
  if (c.count("points") > 63) throw ConfigError("points must be at most 63");
}

void check_dichotomies_layer(const Config& c) {
  check_dichotomies(c);
  for (std::size_t d : c.counts("depth"))
    if (c.count("sweep_layer") >= d) throw ConfigError("sweep_layer must be below every depth");
}

void exec_dichotomies(const Config& c, RunContext& ctx) {
  const auto data = gaussian_points(c.count("points"), c.count("input_dim"), c.seed("data_seed"));
  const auto cells = grid(c);
  const std::size_t seeds = c.count("seeds");
  std::vector<DichotomyResult> res(cells.size() * seeds);
  std::vector<std::size_t> walk(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) {
    const NetworkSpec spec = spec_of(c, cells[i / seeds]);
    const std::uint64_t s = ensemble_seed(spec.seed, i % seeds);
    res[i] = weight_sweep_dichotomies(spec, c.count("sweep_layer"), data, c.count("num_t"), s);
    walk[i] = random_walk_dichotomy_baseline(res[i].num_label_transitions, res[i].s, s);
  }
  ctx.csv("dichotomies.csv", [&](std::ostream& os) {
    os << "width,depth,sigma_w_sq,seed,sweep_layer,remaining_depth,s,dichotomies,label_transitions,random_walk\n";
    for (std::size_t i = 0; i < res.size(); ++i) {
      const Cell& g = cells[i / seeds];
      const auto& r = res[i];
      csv_row(os, g.width, g.depth, g.sigma_w_sq, r.seed, r.sweep_layer, g.depth - r.sweep_layer, r.s,
              r.num_dichotomies, r.num_label_transitions, walk[i]);
    }
  });
  std::map<std::pair<std::size_t, double>, Series> by;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    std::vector<double> v;
    for (std::size_t s = 0; s < seeds; ++s) v.push_back(static_cast<double>(res[ci * seeds + s].num_dichotomies));
    Series& ser = by[{cells[ci].width, cells[ci].sigma_w_sq}];
    ser.label = "k=" + std::to_string(cells[ci].width) + " sw2=" + fmt_double(cells[ci].sigma_w_sq);
    ser.x.push_back(static_cast<double>(cells[ci].depth));
    ser.y.push_back(stats::mean(v));
  }
  std::vector<Series> series;
  for (auto& [key, s] : by) series.push_back(std::move(s));
  ctx.plot("dichotomies.svg", series, {"Dichotomies against depth", "depth", "mean dichotomies", false});
}

void exec_remaining_depth(const Config& c, RunContext& ctx) {
  const auto data = gaussian_points(c.count("points"), c.count("input_dim"), c.seed("data_seed"));
  const auto cells = grid(c);
  const std::size_t seeds = c.count("seeds");
  std::vector<std::vector<RemainingDepthRow>> res(cells.size() * seeds);
  for (std::size_t i = 0; i < res.size(); ++i) {
    NetworkSpec spec = spec_of(c, cells[i / seeds]);
    spec.seed = ensemble_seed(spec.seed, i % seeds);
    res[i] = remaining_depth_dichotomies(spec, data, c.count("num_t"), spec.seed);
  }
  ctx.csv("remaining_depth.csv", [&](std::ostream& os) {
    os << "width,depth,sigma_w_sq,seed,sweep_layer,remaining_depth,s,dichotomies,label_transitions\n";
    for (std::size_t i = 0; i < res.size(); ++i) {
      const Cell& g = cells[i / seeds];
      for (const auto& r : res[i])
        csv_row(os, g.width, g.depth, g.sigma_w_sq, r.result.seed, r.sweep_layer, r.remaining_depth, r.result.s,
                r.result.num_dichotomies, r.result.num_label_transitions);
    }
  });
  std::vector<Series> series;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    Series ser{label(cells[ci]), {}, {}};
    for (std::size_t l = 0; l < cells[ci].depth; ++l) {
      std::vector<double> v;
      for (std::size_t s = 0; s < seeds; ++s)
        v.push_back(static_cast<double>(res[ci * seeds + s][l].result.num_dichotomies));
      ser.x.push_back(static_cast<double>(res[ci * seeds][l].remaining_depth));
      ser.y.push_back(stats::mean(v));
    }
    series.push_back(std::move(ser));
  }
  ctx.plot("remaining_depth.svg", series, {"Dichotomies against remaining depth", "remaining depth", "mean dichotomies", false});
}

// regions2d / region-bounds ---------------------------------------------------

void check_regions2d(const Config& c) {
  need_patterns(c);
  check_grid(c, 2, c.count("output_dim"));
  if (grid(c).size() != 1) throw ConfigError("regions2d draws one network; give single width, depth and sigma_w_sq");
  if (c.real("box") < 0) throw ConfigError("box must be non-negative");
  if (c.count("max_cells") == 0) throw ConfigError("max_cells must be positive");
  if (c.text("out").empty()) throw ConfigError("out must name the figure");
}

void exec_regions2d(const Config& c, RunContext& ctx) {
  const Cell g = grid(c).front();
  const Network net = init_network(spec_of(c, g, 2, c.count("output_dim")));
  const double b = c.real("box");
  const Box2 box = b > 0 ? Box2{-b, -b, b, b} : auto_box(net);
  DecomposeOptions opt;
  opt.max_cells = c.count("max_cells");
  const Decomposition dec = decompose_input_plane(net, box, opt);
  const auto svg = ctx.resolve(c.text("out"));
  render_regions_svg(dec.cells, dec.box, {}, svg.string());
  ctx.record(svg);
  ctx.csv("cells.csv", [&](std::ostream& os) { write_cells_csv(os, dec.cells); });
  ctx.out() << "cells " << dec.cells.size() << (dec.truncated ? " (truncated)" : "") << '\n';
  ctx.note("pattern_bound", "proof-implied bound");
  ctx.out() << "pattern bound " << big(activation_pattern_bound(g.depth, g.width, 2, net.spec().activation)) << '\n';
}

void check_region_bounds(const Config& c) {
  for (std::size_t k : c.counts("k"))
    if (k > 100000) throw ConfigError("k too large");
  for (std::size_t m : c.counts("m"))
    if (m > 100000) throw ConfigError("m too large");
}

void exec_region_bounds(const Config& c, RunContext& ctx) {
  const auto ks = sorted(c.counts("k")), ms = sorted(c.counts("m"));
  json report = json::array();
  ctx.csv("region_bounds.csv", [&](std::ostream& os) {
    os << "k,m,bound,recurrence\n";
    for (std::size_t k : ks)
      for (std::size_t m : ms) {
        const BigInt b = region_bound(k, m), r = region_recurrence(k, m);
        csv_row(os, k, m, big(b), big(r));
        report.push_back({{"k", k}, {"m", m}, {"bound", big(b)}, {"recurrence", big(r)}});
      }
  });
  const auto jp = ctx.resolve("region_bounds.json");
  std::ofstream(jp, std::ios::binary) << report.dump(2) << '\n';
  ctx.record(jp);
  if (ks.size() == 1 && ms.size() == 1) {
    ctx.out() << big(region_bound(ks[0], ms[0])) << '\n';
  } else {
    for (const auto& r : report)
      ctx.out() << r["k"].get<std::size_t>() << ',' << r["m"].get<std::size_t>() << ','
                << r["bound"].get<std::string>() << '\n';
  }
}

// training --------------------------------------------------------------------

bool from_idx(const Config& c) { return !c.text("idx_images").empty(); }

std::pair<Dataset, Dataset> train_data(const Config& c, std::size_t index) {
  const std::uint64_t s = ensemble_seed(c.seed("data_seed"), index);
  const std::size_t limit = c.count("limit");
  const Dataset all = from_idx(c) ? load_idx(c.text("idx_images"), c.text("idx_labels"),
                                             limit ? std::optional<std::size_t>(limit) : std::nullopt)
                                  : synth_blobs(c.count("classes"), c.count("input_dim"), c.count("per_class"),
                                                c.real("spread"), s);
  return train_test_split(all, c.real("test_fraction"), s);
}

TrainConfig train_config(const Config& c) {
  TrainConfig t;
  t.learning_rate = c.real("lr");
  t.batch_size = c.count("batch_size");
  t.epochs = c.count("epochs");
  t.eval_every = c.count("eval_every");
  t.loss = parse_loss(c.text("loss"));
  return t;
}

void check_training(const Config& c) {
  need_seeds(c);
  if (from_idx(c)) {
    if (c.text("idx_labels").empty()) throw ConfigError("idx_labels is required with idx_images");
    if (!std::filesystem::exists(c.text("idx_images"))) throw ConfigError("missing file " + c.text("idx_images"));
    if (!std::filesystem::exists(c.text("idx_labels"))) throw ConfigError("missing file " + c.text("idx_labels"));
  } else {
    if (c.count("classes") < 2) throw ConfigError("classes must be at least 2");
    if (c.count("per_class") == 0) throw ConfigError("per_class must be positive");
    if (!(c.real("spread") >= 0)) throw ConfigError("spread must be non-negative");
    check_grid(c, c.count("input_dim"), c.count("classes"));
  }
  if (!(c.real("test_fraction") > 0 && c.real("test_fraction") < 1)) throw ConfigError("test_fraction must be in (0, 1)");
  for (const Cell& g : grid(c)) train_config(c).validate(g.depth + 1);
}

NetworkSpec train_spec(const Config& c, const Cell& g, const Dataset& ds, std::size_t index) {
  NetworkSpec spec = spec_of(c, g, ds.dim(), static_cast<std::size_t>(ds.num_classes));
  spec.seed = ensemble_seed(spec.seed, index);
  return spec;
}

void check_train_noise(const Config& c) {
  check_training(c);
  if (c.count("noise_draws") == 0) throw ConfigError("noise_draws must be positive");
  for (double m : c.reals("noise"))
    if (m < 0) throw ConfigError("noise magnitudes must be non-negative");
}

void exec_train_noise(const Config& c, RunContext& ctx) {
  const auto cells = grid(c);
  const std::size_t seeds = c.count("seeds");
  const auto mags = sorted(c.reals("noise"));
  std::vector<NoiseTable> tables(cells.size() * seeds);
  std::vector<TrainResult> runs;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto [train, test] = train_data(c, i % seeds);
    const NetworkSpec spec = train_spec(c, cells[i / seeds], train, i % seeds);
    TrainConfig tc = train_config(c);
    tc.seed = spec.seed;
    runs.push_back(sgd_train(init_network(spec), train, test, tc));
    tables[i] = layer_noise_robustness(runs.back().net, test, mags, c.count("noise_draws"), spec.seed);
  }
  ctx.csv("noise.csv", [&](std::ostream& os) {
    os << "width,depth,sigma_w_sq,seed,layer,magnitude,baseline,accuracy,drop\n";
    for (std::size_t i = 0; i < tables.size(); ++i) {
      const Cell& g = cells[i / seeds];
      const NoiseTable& t = tables[i];
      for (std::size_t d = 0; d < t.accuracy.size(); ++d)
        for (std::size_t j = 0; j < mags.size(); ++j)
          csv_row(os, g.width, g.depth, g.sigma_w_sq, i % seeds, d + 1, mags[j], t.baseline, t.accuracy[d][j],
                  t.baseline - t.accuracy[d][j]);
    }
  });
  ctx.csv("train.csv", [&](std::ostream& os) {
    os << "width,depth,sigma_w_sq,seed,train_acc,test_acc,diverged\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const Cell& g = cells[i / seeds];
      const auto& h = runs[i].history;
      const double tr = h.records.empty() ? std::nan("") : h.records.back().train_acc;
      const double te = h.records.empty() ? std::nan("") : h.records.back().test_acc;
      csv_row(os, g.width, g.depth, g.sigma_w_sq, i % seeds, tr, te, int(h.diverged));
    }
  });
  std::vector<Series> series;
  for (std::size_t ci = 0; ci < cells.size(); ++ci)
    for (std::size_t j = 0; j < mags.size(); ++j) {
      Series ser{label(cells[ci]) + " noise " + fmt_double(mags[j]), {}, {}};
      for (std::size_t d = 0; d < tables[ci * seeds].accuracy.size(); ++d) {
        std::vector<double> v;
        for (std::size_t s = 0; s < seeds; ++s) v.push_back(tables[ci * seeds + s].accuracy[d][j]);
        ser.x.push_back(static_cast<double>(d + 1));
        ser.y.push_back(stats::mean(v));
      }
      series.push_back(std::move(ser));
    }
  ctx.plot("noise.svg", series, {"Accuracy after perturbing one layer", "perturbed layer", "test accuracy", false});
}

void exec_train_single_layer(const Config& c, RunContext& ctx) {
  const auto cells = grid(c);
  const std::size_t seeds = c.count("seeds");
  std::vector<std::vector<SingleLayerRow>> res(cells.size() * seeds);
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto [train, test] = train_data(c, i % seeds);
    const NetworkSpec spec = train_spec(c, cells[i / seeds], train, i % seeds);
    TrainConfig tc = train_config(c);
    tc.seed = spec.seed;
    res[i] = train_single_layer_experiment(spec, train, test, tc);
  }
  ctx.csv("single_layer.csv", [&](std::ostream& os) {
    os << "width,depth,sigma_w_sq,seed,layer,train_acc,test_acc,diverged\n";
    for (std::size_t i = 0; i < res.size(); ++i) {
      const Cell& g = cells[i / seeds];
      for (const auto& r : res[i])
        csv_row(os, g.width, g.depth, g.sigma_w_sq, i % seeds, r.layer, r.train_acc, r.test_acc, int(r.diverged));
    }
  });
  std::vector<Series> series;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    Series ser{label(cells[ci]), {}, {}};
    for (std::size_t r = 0; r < res[ci * seeds].size(); ++r) {
      if (res[ci * seeds][r].layer < 0) continue;
      std::vector<double> v;
      for (std::size_t s = 0; s < seeds; ++s) v.push_back(res[ci * seeds + s][r].train_acc);
      ser.x.push_back(res[ci * seeds][r].layer);
      ser.y.push_back(stats::mean(v));
    }
    series.push_back(std::move(ser));
  }
  ctx.plot("single_layer.svg", series, {"Training one layer", "trained layer", "train accuracy", false});
}

void check_train_single_layer(const Config& c) {
  check_training(c);
  for (std::size_t d : c.counts("depth"))
    if (d < 3) throw ConfigError("train-single-layer needs depth >= 3");
}

void check_train_trajlen(const Config& c) {
  check_training(c);
  parse_probe_kind(c.text("probe"));
}

void exec_train_trajlen(const Config& c, RunContext& ctx) {
  const auto cells = grid(c);
  const std::size_t seeds = c.count("seeds");
  std::vector<TrainHistory> hist(cells.size() * seeds);
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const auto [train, test] = train_data(c, i % seeds);
    const NetworkSpec spec = train_spec(c, cells[i / seeds], train, i % seeds);
    TrainConfig tc = train_config(c);
    tc.seed = spec.seed;
    tc.length_probe = make_length_probe(test, parse_probe_kind(c.text("probe")), spec.seed);
    hist[i] = sgd_train(init_network(spec), train, test, tc).history;
    ctx.csv("history_" + tag(cells[i / seeds]) + "_s" + std::to_string(i % seeds) + ".csv",
            [&](std::ostream& os) { write_history_csv(os, hist[i]); });
  }
  ctx.csv("trajlen.csv", [&](std::ostream& os) {
    os << "width,depth,sigma_w_sq,seed,layer,initial_length,final_length,initial_weight_scale,final_weight_scale\n";
    for (std::size_t i = 0; i < hist.size(); ++i) {
      const Cell& g = cells[i / seeds];
      const auto& rec = hist[i].records;
      if (rec.empty()) continue;
      for (std::size_t d = 0; d < rec.front().weight_scale.size(); ++d) {
        const bool has = d + 1 < rec.front().traj_len.size();
        csv_row(os, g.width, g.depth, g.sigma_w_sq, i % seeds, d + 1,
                has ? rec.front().traj_len[d + 1] : std::nan(""), has ? rec.back().traj_len[d + 1] : std::nan(""),
                rec.front().weight_scale[d], rec.back().weight_scale[d]);
      }
    }
  });
  std::vector<Series> series;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const auto& first = hist[ci * seeds].records;
    if (first.empty()) continue;
    for (std::size_t l = 1; l < first.front().traj_len.size(); ++l) {
      Series ser{label(cells[ci]) + " layer " + std::to_string(l), {}, {}};
      for (std::size_t r = 0; r < first.size(); ++r) {
        std::vector<double> v;
        for (std::size_t s = 0; s < seeds; ++s)
          if (r < hist[ci * seeds + s].records.size()) v.push_back(hist[ci * seeds + s].records[r].traj_len[l]);
        ser.x.push_back(static_cast<double>(first[r].step));
        ser.y.push_back(stats::mean(v));
      }
      series.push_back(std::move(ser));
    }
  }
  ctx.plot("trajlen.svg", series, {"Trajectory length during training", "step", "mean length", true});
}

// selftest --------------------------------------------------------------------

bool selftest_bounds() {
  if (region_bound(3, 2) != 7) return false;
  for (std::size_t k = 0; k <= 12; ++k)
    for (std::size_t m = 0; m <= 12; ++m)
      if (region_bound(k, m) != region_recurrence(k, m)) return false;
  return u_chain_increasing(u_chain(64, 2));
}

bool selftest_regions() {
  for (std::size_t k : {3, 5})
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Network net = init_network(NetworkSpec::uniform(2, k, 1, Activation::relu, 2.0, 0.5, s));
      if (decompose_input_plane(net).cells.size() != region_recurrence(k, 2)) return false;
    }
  return true;
}

bool selftest_sweep() {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Network net = init_network(NetworkSpec::uniform(3, 6, 2, Activation::hard_tanh, 8.0, 0.5, s));
    const Trajectory traj = random_trajectory(TrajectoryKind::line, 3, s);
    const SweepResult exact = exact_transition_sweep(net, traj);
    const SweepResult bis = count_transitions_curved(net, traj, 1e-9);
    if (!exact.patterns_unique || bis.num_transitions > exact.num_transitions) return false;
    if (exact.num_patterns > exact.num_transitions + 1) return false;
  }
  return true;
}

bool selftest_gradients() {
  const Network net = init_network(NetworkSpec::uniform(3, 4, 2, Activation::tanh, 1.0, 0.1, 5, 2));
  Matrix x(4, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = std::sin(1.7 * static_cast<double>(i) + 0.3);
  Matrix y = Matrix::Zero(4, 2);
  for (Eigen::Index i = 0; i < 4; ++i) y(i, i % 2) = 1.0;
  const Gradients g = backprop_grads(net, x, y, Loss::squared_error);
  const double h = 1e-6;
  for (std::size_t d = 0; d < net.num_layers(); ++d) {
    Layer lp = net.layer(d), lm = net.layer(d);
    lp.weights(0, 0) += h;
    lm.weights(0, 0) -= h;
    const double fd = (mean_loss(net.with_layer(d, lp), x, y, Loss::squared_error) -
                       mean_loss(net.with_layer(d, lm), x, y, Loss::squared_error)) / (2 * h);
    if (std::abs(fd - g.layers[d].weights(0, 0)) > 1e-6 * std::max(1.0, std::abs(fd))) return false;
  }
  return true;
}

bool selftest_serialize() {
  const Network net = init_network(NetworkSpec::uniform(4, 5, 3, Activation::relu, 2.0, 0.1, 9));
  const Network back = decode_network(encode_network(net));
  for (std::size_t d = 0; d < net.num_layers(); ++d)
    if (back.layer(d).weights != net.layer(d).weights || back.layer(d).bias != net.layer(d).bias) return false;
  return back.spec() == net.spec();
}

void exec_selftest(const Config&, RunContext& ctx) {
  const std::vector<std::pair<std::string, bool (*)()>> checks = {
      {"region_bounds", selftest_bounds}, {"one_layer_regions", selftest_regions}, {"exact_sweep", selftest_sweep},
      {"gradients", selftest_gradients},  {"serialize", selftest_serialize},
  };
  bool ok = true;
  std::vector<std::pair<std::string, bool>> results;
  for (const auto& [name, fn] : checks) {
    const bool pass = fn();
    ok = ok && pass;
    results.emplace_back(name, pass);
    ctx.out() << (pass ? "PASS " : "FAIL ") << name << '\n';
  }
  ctx.csv("selftest.csv", [&](std::ostream& os) {
    os << "check,result\n";
    for (const auto& [name, pass] : results) csv_row(os, name, pass ? "pass" : "fail");
  });
  if (!ok) throw xpl::Error("selftest failed");
}

// registry --------------------------------------------------------------------

using D = std::vector<std::pair<std::string, json>>;

D net(std::size_t m, std::size_t k, std::vector<std::size_t> n, const char* act, std::vector<double> sw, double sb) {
  return {{"input_dim", m}, {"width", json::array({k})}, {"depth", n}, {"output_dim", 1}, {"activation", act},
          {"sigma_w_sq", sw}, {"sigma_b_sq", sb}, {"seed", 1}};
}

D operator+(D a, const D& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

D without(D d, const std::string& key) {
  d.erase(std::remove_if(d.begin(), d.end(), [&](const auto& e) { return e.first == key; }), d.end());
  return d;
}

D out_dir(const std::string& name) { return {{"out_dir", "runs/" + name}}; }

D blobs() {
  return {{"classes", 10}, {"per_class", 100}, {"spread", 0.3}, {"data_seed", 1}, {"test_fraction", 0.2},
          {"idx_images", ""}, {"idx_labels", ""}, {"limit", 0}};
}

D train(std::size_t epochs, double lr) {
  return {{"lr", lr}, {"batch_size", 32}, {"epochs", epochs}, {"eval_every", 0}, {"loss", "softmax_cross_entropy"}};
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = {
      {"traj-growth", "Per-layer trajectory length and growth ratio over an ensemble",
       net(10, 100, {10}, "hard_tanh", {4.0, 16.0}, 1.0) +
           D{{"trajectory", "circular_arc"}, {"traj_seed", 1}, {"method", "automatic"}, {"num_points", 1024},
             {"rel_tol", 1e-4}, {"seeds", 50}} +
           out_dir("traj-growth"),
       check_traj_growth, exec_traj_growth},
      {"growth-bounds", "Lower and upper per-layer growth ratios",
       D{{"k", json::array({100})}, {"sigma_w_sq", json::array({4.0, 16.0})}, {"sigma_b_sq", 1.0},
         {"activation", "hard_tanh"}} +
           out_dir("growth-bounds"),
       check_growth_bounds, exec_growth_bounds},
      {"transitions", "Exact or bisection transition counts along a trajectory",
       net(4, 8, {3}, "hard_tanh", {8.0}, 0.0) +
           D{{"trajectory", "line"}, {"traj_seed", 1}, {"method", "exact"}, {"t_tol", 1e-9}, {"seeds", 1}} +
           out_dir("transitions"),
       check_transitions, exec_transitions},
      {"trans-vs-length", "Transitions and final-layer length across depths",
       net(10, 8, {1, 2, 3, 4, 5, 6, 7, 8}, "hard_tanh", {8.0, 64.0}, 0.0) +
           D{{"width", json::array({8, 64})}, {"trajectory", "circular_arc"}, {"traj_seed", 1}, {"seeds", 20}} +
           out_dir("trans-vs-length"),
       check_trans_vs_length, exec_trans_vs_length},
      {"dichotomies", "Distinct labellings of datapoints under a weight sweep",
       net(10, 128, {2, 4, 6, 8}, "hard_tanh", {8.0}, 0.0) +
           D{{"points", 15}, {"num_t", 65536}, {"sweep_layer", 0}, {"data_seed", 1}, {"seeds", 20}} +
           out_dir("dichotomies"),
       check_dichotomies_layer, exec_dichotomies},
      {"remaining-depth", "Dichotomies for every swept layer",
       net(10, 128, {2, 4, 6, 8}, "hard_tanh", {8.0}, 0.0) +
           D{{"points", 15}, {"num_t", 65536}, {"data_seed", 1}, {"seeds", 20}} + out_dir("remaining-depth"),
       check_dichotomies, exec_remaining_depth},
      {"regions2d", "Activation regions of a network on the plane",
       D{{"width", json::array({4})}, {"depth", json::array({3})}, {"output_dim", 1}, {"activation", "relu"},
         {"sigma_w_sq", json::array({2.0})}, {"sigma_b_sq", 0.5}, {"seed", 1}, {"box", 0.0},
         {"max_cells", 1 << 20}, {"out", "regions.svg"}} +
           out_dir("regions2d"),
       check_regions2d, exec_regions2d},
      {"region-bounds", "Region counts of k hyperplanes in general position in R^m",
       D{{"k", json::array({3})}, {"m", json::array({2})}} + out_dir("region-bounds"), check_region_bounds,
       exec_region_bounds},
      {"train-noise", "Accuracy drop from noise added to one trained layer at a time",
       without(net(20, 64, {6}, "hard_tanh", {2.0}, 0.1), "output_dim") + blobs() + train(20, 0.05) +
           D{{"noise", json::array({0.25})}, {"noise_draws", 20}, {"seeds", 10}} + out_dir("train-noise"),
       check_train_noise, exec_train_noise},
      {"train-single-layer", "Accuracy when only one layer is trained",
       without(net(20, 100, {6}, "hard_tanh", {1.0}, 0.0), "output_dim") + blobs() + train(10, 0.05) + D{{"spread", 0.5}, {"seeds", 10}} +
           out_dir("train-single-layer"),
       check_train_single_layer, exec_train_single_layer},
      {"train-trajlen", "Trajectory length and weight scale during training",
       without(net(20, 64, {4}, "hard_tanh", {2.0, 3.0}, 0.0), "output_dim") + blobs() + train(80, 0.1) +
           D{{"probe", "datapoint_interpolation"}, {"seeds", 10}} + out_dir("train-trajlen"),
       check_train_trajlen, exec_train_trajlen},
      {"selftest", "Quick invariant checks", out_dir("selftest"), [](const Config&) {}, exec_selftest},
  };
  return cmds;
}

}  // namespace xplab
