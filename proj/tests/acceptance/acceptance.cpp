// Acceptance run: one PASS/FAIL line per criterion. Experiments that have a
// CLI command are run through it so the CSV they produce is what gets judged.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "xpl/csv.hpp"
#include "xpl/regions.hpp"
#include "xpl/rng.hpp"
#include "xpl/stats.hpp"
#include "xpl/sweep.hpp"
#include "xpl/train.hpp"
#include "xplab/cli.hpp"

using namespace xpl;
namespace fs = std::filesystem;

namespace {

using Row = std::map<std::string, std::string>;

std::vector<Row> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::vector<Row> rows;
  std::string line;
  std::vector<std::string> header;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(f, line)) return rows;
  header = split(line);
  while (std::getline(f, line)) {
    const auto cells = split(line);
    Row r;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) r[header[i]] = cells[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

double num(const Row& r, const std::string& k) { return std::stod(r.at(k)); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

const fs::path kRoot = fs::temp_directory_path() / "xplab_acceptance";

struct Command {
  std::string name;
  std::vector<std::string> args;
  fs::path dir() const { return kRoot / name; }
};

// Each criterion's command, in the form a user would type it.
const Command kGrowth{"c4", {"traj-growth"}};
const Command kTransLength{"c5", {"trans-vs-length"}};
const Command kDichotomies{"c7", {"remaining-depth"}};
const Command kNoise{"c8", {"train-noise"}};
const Command kSingle{"c9", {"train-single-layer"}};
const Command kTrajLen{"c10", {"train-trajlen"}};

bool run_command(const Command& c, const fs::path& dir) {
  std::vector<std::string> args = c.args;
  args.push_back("--out-dir");
  args.push_back(dir.string());
  std::ostringstream out, err;
  const int code = xplab::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s failed (%d): %s\n", c.args[0].c_str(), code, err.str().c_str());
  return code == 0;
}

bool run_command(const Command& c) { return run_command(c, c.dir()); }

struct Report {
  int failed = 0;
  void line(int id, bool pass, const std::string& title, const std::string& detail, double secs) {
    if (!pass) ++failed;
    std::printf("%s %d %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
  }
};

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Bound compliance gathered from criteria 1, 3 and 5.
struct BoundLedger {
  std::size_t checked = 0;
  std::size_t violations = 0;
  void check(const BigInt& count, const BigInt& bound) {
    ++checked;
    if (count > bound) ++violations;
  }
} g_bounds;

// 1 ---------------------------------------------------------------------------

void criterion1(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t nets = 0, exact = 0;
  for (std::size_t k : {3, 5, 8})
    for (std::uint64_t s = 0; s < 50; ++s) {
      const Network net = init_network(NetworkSpec::uniform(2, k, 1, Activation::relu, 1.0, 1.0, 9000 + 100 * k + s));
      const auto dec = decompose_input_plane(net);
      ++nets;
      exact += dec.cells.size() == oracle::regions_recursive(unsigned(k), 2);
      g_bounds.check(dec.cells.size(), activation_pattern_bound(1, k, 2, Activation::relu));
    }
  const double secs = since(t0);
  rep.line(1, exact == nets && secs < 10, "region-count tightness",
           std::to_string(exact) + "/" + std::to_string(nets) + " nets with 1+k+C(k,2) cells", secs);
}

// 2 ---------------------------------------------------------------------------

void criterion2(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t formula_ok = 0, formula_n = 0;
  for (unsigned k = 0; k <= 30; ++k)
    for (unsigned m = 0; m <= 30; ++m) {
      ++formula_n;
      bool ok = region_bound(k, m) == region_recurrence(k, m);
      if (k <= 20 && m <= 20) ok = ok && region_bound(k, m) == oracle::regions_recursive(k, m);
      formula_ok += ok;
    }
  std::size_t sample_ok = 0;
  std::string misses;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const CounterRng r(777 + s);
    const std::size_t k = 1 + r.bits(0) % 6;
    std::vector<Hyperplane> planes;
    for (std::size_t i = 0; i < k; ++i) {
      const double th = 2 * M_PI * r.uniform(10 + i);
      planes.push_back({Vector{{std::cos(th), std::sin(th)}}, 2 * r.uniform(20 + i) - 1});
    }
    // Tightest box holding every vertex (with a margin), so each region meets it.
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(-1.0), hi = Eigen::Vector2d::Constant(1.0);
    bool any = false;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        Eigen::Matrix2d A;
        A << planes[i].a.transpose(), planes[j].a.transpose();
        const Eigen::Vector2d p = A.fullPivLu().solve(Eigen::Vector2d(planes[i].beta, planes[j].beta));
        lo = any ? lo.cwiseMin(p) : p;
        hi = any ? hi.cwiseMax(p) : p;
        any = true;
      }
    const Eigen::Vector2d pad = 0.05 * (hi - lo) + Eigen::Vector2d::Constant(0.05);
    const Box box{lo - pad, hi + pad};
    const std::size_t got = count_regions_sampling(planes, box, 1000000, s);
    const auto want = oracle::regions_recursive(unsigned(k), 2);
    if (got == want)
      ++sample_ok;
    else
      misses += " [k=" + std::to_string(k) + " got " + std::to_string(got) + " want " + std::to_string(want) + "]";
  }
  const double secs = since(t0);
  rep.line(2, formula_ok == formula_n && sample_ok == 20 && secs < 30, "region formula vs oracles",
           std::to_string(formula_ok) + "/" + std::to_string(formula_n) + " (k,m) exact, " + std::to_string(sample_ok) +
               "/20 sampled arrangements" + misses,
           secs);
}

// 3 ---------------------------------------------------------------------------

void criterion3(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t compared = 0, agree = 0, unique = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const CounterRng r(31337 + s);
    const std::size_t m = 1 + r.bits(0) % 4, k = 1 + r.bits(1) % 8, n = 1 + r.bits(2) % 3;
    const Network net = init_network(NetworkSpec::uniform(m, k, n, Activation::hard_tanh, 8.0, 1.0, 5000 + s));
    const Trajectory traj = random_trajectory(TrajectoryKind::line, m, 6000 + s);
    const SweepResult res = exact_transition_sweep(net, traj);
    unique += res.patterns_unique;
    g_bounds.check(res.num_patterns, activation_pattern_bound(n, k, m, Activation::hard_tanh));
    if (res.min_event_gap <= 2e-6) continue;
    ++compared;
    const Vector a = traj.x0(), b = traj.x1();
    const auto dense = oracle::dense_transitions(
        net, [&](double t) { return oracle::to_std((1 - t) * a + t * b); }, 1000001);
    agree += dense.transitions == res.num_transitions;
  }
  const double secs = since(t0);
  rep.line(3, compared > 0 && agree == compared && unique == 100 && secs < 120, "exact sweep vs dense oracle",
           std::to_string(agree) + "/" + std::to_string(compared) + " comparable nets agree, patterns unique in " +
               std::to_string(unique) + "/100",
           secs);
}

// 4 ---------------------------------------------------------------------------

void criterion4(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool ran = run_command(kGrowth);
  const double secs = since(t0);
  if (!ran) return rep.line(4, false, "exponential depth growth", "command failed", secs);
  bool ok = true;
  std::string detail;
  for (double sw : {4.0, 16.0}) {
    const auto rows = read_csv(kGrowth.dir() / ("growth_w100_n10_sw" + fmt_double(sw) + ".csv"));
    std::vector<double> depth, loglen;
    for (const auto& r : rows)
      if (num(r, "layer") >= 1) {
        depth.push_back(num(r, "layer"));
        loglen.push_back(std::log(num(r, "mean_length")));
      }
    const auto fit = stats::linear_fit(depth, loglen);
    const GrowthBounds b = theoretical_growth_bounds(100, std::sqrt(sw), 1.0, Activation::hard_tanh);
    std::size_t inside = 0, checked = 0;
    for (const auto& r : rows) {
      const double l = num(r, "layer");
      if (l < 2 || l > 9) continue;
      ++checked;
      inside += num(r, "ratio_ci_hi") >= b.lower_ratio && num(r, "ratio_ci_lo") <= b.upper_ratio;
    }
    ok = ok && fit.r2 >= 0.95 && fit.slope > 0 && inside == checked && checked == 8;
    detail += fmt("sw2=%g: R2=%.4f slope=%.3f", sw, fit.r2, fit.slope) +
              fmt(", ratios in [%.3f, %.3f] ", b.lower_ratio, b.upper_ratio) + std::to_string(inside) + "/" +
              std::to_string(checked) + "; ";
  }
  rep.line(4, ok && secs < 300, "exponential depth growth", detail, secs);
}

// 5 ---------------------------------------------------------------------------

void criterion5(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool ran = run_command(kTransLength);
  const double secs = since(t0);
  if (!ran) return rep.line(5, false, "transitions proportional to length", "command failed", secs);
  // (width, sigma_w_sq) -> depth -> (lengths, transitions)
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>>>
      groups;
  for (const auto& r : read_csv(kTransLength.dir() / "summary.csv")) {
    auto& g = groups[{r.at("width"), r.at("sigma_w_sq")}][std::stoul(r.at("depth"))];
    g.first.push_back(num(r, "length"));
    g.second.push_back(num(r, "transitions"));
    g_bounds.check(BigInt(r.at("patterns")),
                   activation_pattern_bound(std::stoul(r.at("depth")), std::stoul(r.at("width")), 10,
                                            Activation::hard_tanh));
  }
  bool ok = groups.size() == 4;
  std::string detail;
  for (const auto& [key, depths] : groups) {
    // One point per depth (ensemble means), as in the figure; per-run pairs reported alongside.
    std::vector<double> ml, mt, al, at;
    for (const auto& [d, v] : depths) {
      ml.push_back(stats::mean(v.first));
      mt.push_back(stats::mean(v.second));
      al.insert(al.end(), v.first.begin(), v.first.end());
      at.insert(at.end(), v.second.begin(), v.second.end());
      ok = ok && v.first.size() == 20;
    }
    const double rho = stats::pearson(ml, mt);
    ok = ok && rho >= 0.99 && depths.size() == 8;
    detail += "k=" + key.first + " sw2=" + key.second + fmt(": r=%.4f (per run %.4f); ", rho, stats::pearson(al, at));
  }
  rep.line(5, ok && secs < 300, "transitions proportional to length", detail, secs);
}

// 6 ---------------------------------------------------------------------------

void criterion6(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<UChainLink> chain;
  for (const auto& l : u_chain(64, 2))
    if (double(l.n) > M_E && double(l.k) > M_E && l.n * l.k == 64) chain.push_back(l);
  const bool chain_ok = chain.size() == 3 && u_chain_increasing(chain);
  const double secs = since(t0);
  rep.line(6, chain_ok && g_bounds.violations == 0 && g_bounds.checked > 0 && secs < 1, "pattern upper bound",
           std::to_string(g_bounds.violations) + " violations in " + std::to_string(g_bounds.checked) +
               " counts; U chain over " + std::to_string(chain.size()) + " splits " +
               (chain_ok ? "increasing" : "not increasing"),
           secs);
}

// 7 ---------------------------------------------------------------------------

void criterion7(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool ran = run_command(kDichotomies);
  const double secs = since(t0);
  if (!ran) return rep.line(7, false, "dichotomies", "command failed", secs);
  // mean[total depth][remaining depth]
  std::map<std::size_t, std::map<std::size_t, std::vector<double>>> by;
  bool capped = true;
  for (const auto& r : read_csv(kDichotomies.dir() / "remaining_depth.csv")) {
    const double dich = num(r, "dichotomies"), lt = num(r, "label_transitions"), s = num(r, "s");
    capped = capped && dich <= std::min(std::pow(2.0, s), lt + 1);
    by[std::stoul(r.at("depth"))][std::stoul(r.at("remaining_depth"))].push_back(dich);
  }
  // Sweeping the first layer: remaining depth equals total depth.
  std::vector<double> first;
  for (auto& [n, rem] : by) first.push_back(stats::mean(rem[n]));
  bool monotone = first.size() == 4;
  for (std::size_t i = 1; i < first.size(); ++i) monotone = monotone && first[i] > first[i - 1];
  double worst = 0.0;
  std::map<std::size_t, std::vector<double>> matched;
  for (auto& [n, rem] : by)
    for (auto& [r, v] : rem) matched[r].push_back(stats::mean(v));
  for (const auto& [r, means] : matched) {
    if (means.size() < 2) continue;
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    worst = std::max(worst, (*hi - *lo) / *hi);
  }
  std::string detail = "first-layer means";
  for (double f : first) detail += fmt(" %.1f", f);
  detail += fmt(", worst spread at matched remaining depth %.1f%%", 100 * worst);
  detail += capped ? ", capped" : ", cap violated";
  rep.line(7, monotone && worst < 0.2 && capped && secs < 300, "dichotomies", detail, secs);
}

// 8-10 ------------------------------------------------------------------------

void criterion8(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool ran = run_command(kNoise);
  const double secs = since(t0);
  if (!ran) return rep.line(8, false, "layer sensitivity ordering", "command failed", secs);
  std::map<std::size_t, std::vector<double>> drops;
  for (const auto& r : read_csv(kNoise.dir() / "noise.csv")) drops[std::stoul(r.at("layer"))].push_back(num(r, "drop"));
  std::vector<double> layer, mean;
  std::string detail = "mean drops";
  for (const auto& [l, v] : drops) {
    layer.push_back(double(l));
    mean.push_back(stats::mean(v));
    detail += fmt(" %.4f", mean.back());
  }
  const double rho = stats::spearman(layer, mean);
  rep.line(8, rho <= -0.8 && drops.begin()->second.size() == 10 && secs < 600, "layer sensitivity ordering",
           detail + fmt(", spearman %.3f", rho), secs);
}

void criterion9(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool ran = run_command(kSingle);
  const double secs = since(t0);
  if (!ran) return rep.line(9, false, "single-layer training ordering", "command failed", secs);
  std::map<int, std::vector<double>> acc;
  for (const auto& r : read_csv(kSingle.dir() / "single_layer.csv"))
    if (std::stoi(r.at("layer")) >= 0) acc[std::stoi(r.at("layer"))].push_back(num(r, "train_acc"));
  std::vector<double> layer, mean;
  std::string detail = "mean train accuracy";
  for (const auto& [l, v] : acc) {
    layer.push_back(l);
    mean.push_back(stats::mean(v));
    detail += fmt(" %.4f", mean.back());
  }
  const double rho = stats::spearman(layer, mean);
  rep.line(9, rho <= -0.8 && acc.begin()->second.size() == 10 && secs < 900, "single-layer training ordering",
           detail + fmt(", spearman %.3f", rho), secs);
}

void criterion10(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool ran = run_command(kTrajLen);
  const double secs = since(t0);
  if (!ran) return rep.line(10, false, "training grows length and weight scale", "command failed", secs);
  const auto rows = read_csv(kTrajLen.dir() / "trajlen.csv");
  bool ok = true;
  std::string detail;
  for (const char* sw : {"2", "3"}) {
    std::size_t depth = 0;
    for (const auto& r : rows)
      if (r.at("sigma_w_sq") == sw) depth = std::stoul(r.at("depth"));
    std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> len, ws;
    for (const auto& r : rows) {
      if (r.at("sigma_w_sq") != sw) continue;
      const std::size_t l = std::stoul(r.at("layer"));
      ws[l].first.push_back(num(r, "initial_weight_scale"));
      ws[l].second.push_back(num(r, "final_weight_scale"));
      if (l <= depth) {
        len[l].first.push_back(num(r, "initial_length"));
        len[l].second.push_back(num(r, "final_length"));
      }
    }
    // Deep layer: the last hidden layer.
    const auto& [l0, l1] = len[depth];
    const double tl = stats::paired_t(l0, l1), pl = stats::t_upper_tail(tl, double(l0.size() - 1));
    const double dl = stats::mean(l1) - stats::mean(l0);
    ok = ok && l0.size() == 10 && dl > 0 && pl < 0.05;
    detail += std::string("sw2=") + sw + fmt(": length +%.3g (p=%.2g), weight scale p", dl, pl);
    for (const auto& [l, v] : ws) {
      const double t = stats::paired_t(v.first, v.second), p = stats::t_upper_tail(t, double(v.first.size() - 1));
      ok = ok && stats::mean(v.second) > stats::mean(v.first) && p < 0.05;
      detail += fmt(" %.1g", p);
    }
    detail += "; ";
  }
  rep.line(10, ok && secs < 900, "training grows length and weight scale", detail, secs);
}

// 11 --------------------------------------------------------------------------

bool clear_of_kinks(const Network& net, const Matrix& x, double gap) {
  if (net.activation() == Activation::tanh) return true;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto pre = oracle::naive_forward(net, oracle::to_std(x.row(r).transpose()));
    for (std::size_t d = 0; d + 1 < pre.size(); ++d)
      for (double h : pre[d]) {
        if (net.activation() == Activation::relu && std::abs(h) < gap) return false;
        if (net.activation() == Activation::hard_tanh && std::abs(std::abs(h) - 1.0) < gap) return false;
      }
  }
  return true;
}

void criterion11(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t nets = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; nets < 20 && s < 1000; ++s) {
    const CounterRng r(424242 + s);
    const std::size_t m = 2 + r.bits(0) % 3, k = 2 + r.bits(1) % 4, n = 1 + r.bits(2) % 3, out = 1 + r.bits(3) % 3;
    const Activation act = std::array{Activation::relu, Activation::hard_tanh, Activation::tanh}[s % 3];
    const Loss loss = s % 2 ? Loss::softmax_cross_entropy : Loss::squared_error;
    const Network net = init_network(NetworkSpec::uniform(m, k, n, act, 2.0, 0.3, 700 + s, out));
    const Eigen::Index B = 4;
    Matrix x(B, Eigen::Index(m)), t = Matrix::Zero(B, Eigen::Index(out));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.normal(100 + std::uint64_t(i));
    for (Eigen::Index i = 0; i < B; ++i) t(i, Eigen::Index(r.bits(200 + std::uint64_t(i)) % out)) = 1.0;
    if (!clear_of_kinks(net, x, 1e-3)) continue;
    ++nets;
    const Gradients g = backprop_grads(net, x, t, loss);
    const double h = 1e-5;
    for (std::size_t d = 0; d < net.num_layers(); ++d)
      for (int bias = 0; bias < 2; ++bias) {
        const Layer& l = net.layer(d);
        for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
          for (Eigen::Index j = 0; j < (bias ? 1 : l.weights.cols()); ++j) {
            Layer lp = l, lm = l;
            (bias ? lp.bias(i) : lp.weights(i, j)) += h;
            (bias ? lm.bias(i) : lm.weights(i, j)) -= h;
            const double fd = (mean_loss(net.with_layer(d, lp), x, t, loss) -
                               mean_loss(net.with_layer(d, lm), x, t, loss)) / (2 * h);
            const double an = bias ? g.layers[d].bias(i) : g.layers[d].weights(i, j);
            worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6}));
          }
      }
  }
  const double secs = since(t0);
  rep.line(11, nets == 20 && worst <= 1e-4 && secs < 10, "gradient correctness",
           std::to_string(nets) + " nets, worst relative error " + fmt("%.2e", worst), secs);
}

// 12 --------------------------------------------------------------------------

void criterion12(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  // A different worker count on the rerun also checks pool independence.
  setenv("XPLAB_THREADS", "2", 1);
  std::size_t files = 0, same = 0;
  std::string diffs;
  for (const Command* c : {&kGrowth, &kTransLength, &kDichotomies, &kNoise, &kSingle, &kTrajLen}) {
    const fs::path again = kRoot / (c->name + "_rerun");
    fs::remove_all(again);
    if (!run_command(*c, again)) {
      diffs += " " + c->name + ":failed";
      continue;
    }
    for (const auto& e : fs::directory_iterator(c->dir())) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) == slurp(again / e.path().filename()))
        ++same;
      else
        diffs += " " + c->name + "/" + e.path().filename().string();
    }
  }
  unsetenv("XPLAB_THREADS");
  const double secs = since(t0);
  rep.line(12, files > 0 && same == files && diffs.empty(), "determinism",
           std::to_string(same) + "/" + std::to_string(files) + " CSV files byte-identical on rerun" + diffs, secs);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int c) { return only.empty() || only.count(c); };
  fs::create_directories(kRoot);
  Report rep;
  const std::vector<std::pair<int, std::function<void(Report&)>>> all = {
      {1, criterion1}, {2, criterion2}, {3, criterion3},   {4, criterion4},   {5, criterion5},   {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}, {12, criterion12}};
  for (const auto& [id, fn] : all)
    if (want(id)) fn(rep);
  return rep.failed == 0 ? 0 : 1;
}
