#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace oracle {

namespace {

double phi(xpl::Activation a, double h) {
  switch (a) {
    case xpl::Activation::relu: return h > 0 ? h : 0;
    case xpl::Activation::hard_tanh: return h < -1 ? -1 : (h > 1 ? 1 : h);
    case xpl::Activation::tanh: return std::tanh(h);
    case xpl::Activation::identity: return h;
  }
  return h;
}

}  // namespace

std::vector<std::vector<double>> naive_forward(const xpl::Network& net, const std::vector<double>& x) {
  std::vector<std::vector<double>> out;
  std::vector<double> z = x;
  for (std::size_t d = 0; d < net.num_layers(); ++d) {
    const auto& W = net.layer(d).weights;
    const auto& b = net.layer(d).bias;
    std::vector<double> h(static_cast<std::size_t>(W.rows()));
    for (long i = 0; i < W.rows(); ++i) {
      long double acc = b(i);
      for (long j = 0; j < W.cols(); ++j) acc += static_cast<long double>(W(i, j)) * z[static_cast<std::size_t>(j)];
      h[static_cast<std::size_t>(i)] = static_cast<double>(acc);
    }
    out.push_back(h);
    z.resize(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) z[i] = phi(net.activation(), h[i]);
  }
  return out;
}

std::vector<int> naive_codes(const xpl::Network& net, const std::vector<double>& x) {
  const auto h = naive_forward(net, x);
  std::vector<int> c;
  for (std::size_t d = 0; d + 1 < h.size(); ++d)
    for (double v : h[d]) {
      if (net.activation() == xpl::Activation::relu)
        c.push_back(v > 0 ? 1 : 0);
      else
        c.push_back(v <= -1 ? -1 : (v >= 1 ? 1 : 0));
    }
  return c;
}

DenseCount dense_transitions(const xpl::Network& net, const std::function<std::vector<double>(double)>& curve,
                             std::size_t samples) {
  DenseCount r;
  std::set<std::vector<int>> seen;
  std::vector<int> prev = naive_codes(net, curve(0.0));
  seen.insert(prev);
  for (std::size_t i = 1; i < samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
    std::vector<int> cur = naive_codes(net, curve(t));
    for (std::size_t j = 0; j < cur.size(); ++j) r.transitions += static_cast<std::size_t>(std::abs(cur[j] - prev[j]));
    if (cur != prev) seen.insert(cur);
    prev = std::move(cur);
  }
  r.distinct_patterns = seen.size();
  return r;
}

std::size_t random_walk(std::size_t transitions, std::size_t s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, s - 1);
  std::vector<bool> labels(s, false);
  std::set<std::vector<bool>> seen{labels};
  for (std::size_t i = 0; i < transitions; ++i) {
    const std::size_t j = pick(gen);
    labels[j] = !labels[j];
    seen.insert(labels);
  }
  return seen.size();
}

std::uint64_t regions_recursive(unsigned k, unsigned m) {
  static std::map<std::pair<unsigned, unsigned>, std::uint64_t> memo;
  if (k == 0 || m == 0) return 1;
  const auto key = std::make_pair(k, m);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const std::uint64_t v = regions_recursive(k - 1, m) + regions_recursive(k - 1, m - 1);
  memo[key] = v;
  return v;
}

std::vector<double> to_std(const xpl::Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace oracle
