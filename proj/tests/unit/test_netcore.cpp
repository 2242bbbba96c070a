#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "xpl/errors.hpp"
#include "xpl/netcore.hpp"
#include "xpl/rng.hpp"
#include "xpl/serialize.hpp"
#include "xpl/stats.hpp"

using namespace xpl;

namespace {

Vector gaussian(std::size_t m, std::uint64_t seed) {
  const CounterRng r(seed);
  Vector v(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) v(static_cast<Eigen::Index>(i)) = r.normal(i);
  return v;
}

}  // namespace

TEST_SUITE("netcore") {

TEST_CASE("zero variance gives an all-zero network") {
  const Network net = init_network(NetworkSpec::uniform(3, 4, 2, Activation::relu, 0, 0, 9));
  for (const auto& l : net.layers()) {
    CHECK(l.weights.isZero(0.0));
    CHECK(l.bias.isZero(0.0));
  }
  const LayerTrace tr = forward(net, gaussian(3, 1));
  for (const auto& h : tr.pre_activations) CHECK(h.isZero(0.0));
  for (std::size_t d = 1; d < tr.activations.size(); ++d) CHECK(tr.activations[d].isZero(0.0));
}

TEST_CASE("init is deterministic and seed dependent") {
  const auto spec = NetworkSpec::uniform(5, 7, 3, Activation::hard_tanh, 2, 0.5, 42);
  CHECK(init_network(spec) == init_network(spec));
  CHECK(encode_network(init_network(spec)) == encode_network(init_network(spec)));
  auto other = spec;
  other.seed = 43;
  CHECK_FALSE(init_network(spec) == init_network(other));
}

TEST_CASE("first-layer weight variance concentrates at sigma_w^2 / k") {
  // 10^4 entries: the sample variance has relative sd sqrt(2/10^4) ~ 1.4%, so
  // a 10% window is more than 7 sd wide.
  int inside = 0;
  const int trials = 100;
  for (int s = 0; s < trials; ++s) {
    const Network net = init_network(NetworkSpec::uniform(100, 100, 1, Activation::hard_tanh, 4, 0, s));
    const Matrix& w = net.layer(0).weights;
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    if (var >= 0.04 * 0.9 && var <= 0.04 * 1.1) ++inside;
  }
  CHECK(inside >= 99);
}

TEST_CASE("invalid specs are rejected") {
  NetworkSpec spec = NetworkSpec::uniform(2, 3, 2, Activation::relu, 1, 0, 0);
  spec.input_dim = 0;
  CHECK_THROWS_AS(init_network(spec), InvalidSpecError);
  spec = NetworkSpec::uniform(2, 3, 2, Activation::relu, 1, 0, 0);
  spec.hidden_widths[1] = 0;
  CHECK_THROWS_AS(init_network(spec), InvalidSpecError);
  spec = NetworkSpec::uniform(2, 3, 2, Activation::relu, 1, 0, 0);
  spec.hidden_widths.clear();
  CHECK_THROWS_AS(init_network(spec), InvalidSpecError);
  spec = NetworkSpec::uniform(2, 3, 2, Activation::relu, -1, 0, 0);
  CHECK_THROWS_AS(init_network(spec), InvalidSpecError);
  CHECK_THROWS_AS(parse_activation("sigmoid"), InvalidSpecError);
}

TEST_CASE("hard tanh saturates") {
  NetworkSpec spec = NetworkSpec::uniform(2, 2, 1, Activation::hard_tanh, 0, 0, 0, 2);
  const Network net(spec, {Layer{Matrix::Identity(2, 2), Vector::Zero(2)},
                           Layer{Matrix::Identity(2, 2), Vector::Zero(2)}});
  const LayerTrace tr = forward(net, Vector{{5.0, -5.0}});
  CHECK(tr.activations[1](0) == 1.0);
  CHECK(tr.activations[1](1) == -1.0);
}

TEST_CASE("forward matches a naive loop implementation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (auto act : {Activation::relu, Activation::hard_tanh, Activation::tanh}) {
      const Network net = init_network(NetworkSpec::uniform(6, 9, 2, act, 3, 0.5, seed, 3));
      const Vector x = gaussian(6, seed + 100);
      const auto ref = oracle::naive_forward(net, oracle::to_std(x));
      const LayerTrace tr = forward(net, x);
      REQUIRE(tr.pre_activations.size() == ref.size());
      for (std::size_t d = 0; d < ref.size(); ++d)
        for (std::size_t i = 0; i < ref[d].size(); ++i) {
          const double got = tr.pre_activations[d](static_cast<Eigen::Index>(i));
          CHECK(std::abs(got - ref[d][i]) <= 1e-12 * std::max(1.0, std::abs(ref[d][i])));
        }
      CHECK(evaluate(net, x).isApprox(tr.output(), 0.0));
    }
  }
}

TEST_CASE("trace satisfies the layer recursion") {
  const Network net = init_network(NetworkSpec::uniform(4, 6, 3, Activation::hard_tanh, 5, 1, 3));
  const LayerTrace tr = forward(net, gaussian(4, 8));
  CHECK(tr.input().isApprox(gaussian(4, 8)));
  for (std::size_t d = 0; d < net.num_layers(); ++d) {
    const Vector h = net.layer(d).weights * tr.activations[d] + net.layer(d).bias;
    CHECK((h - tr.pre_activations[d]).norm() <= 1e-12 * (1 + h.norm()));
    if (d < net.depth())
      for (Eigen::Index i = 0; i < h.size(); ++i)
        CHECK(tr.activations[d + 1](i) == activate(Activation::hard_tanh, tr.pre_activations[d](i)));
  }
}

TEST_CASE("dimension mismatch throws") {
  const Network net = init_network(NetworkSpec::uniform(3, 4, 1, Activation::relu, 1, 0, 0));
  CHECK_THROWS_AS(forward(net, Vector::Zero(2)), DimensionError);
}

TEST_CASE("activation codes follow the boundary convention") {
  CHECK(region_code(Activation::relu, 1.0) == 1);
  CHECK(region_code(Activation::relu, -1.0) == 0);
  CHECK(region_code(Activation::relu, 0.0) == 0);
  CHECK(region_code(Activation::hard_tanh, 2.0) == 1);
  CHECK(region_code(Activation::hard_tanh, -3.0) == -1);
  CHECK(region_code(Activation::hard_tanh, 0.5) == 0);
  CHECK(region_code(Activation::hard_tanh, 1.0) == 1);
  CHECK(region_code(Activation::hard_tanh, -1.0) == -1);

  const Network net = init_network(NetworkSpec::uniform(3, 5, 4, Activation::hard_tanh, 4, 0, 1));
  const auto p = activation_pattern(forward(net, gaussian(3, 2)));
  CHECK(p.codes.size() == 20);
  const auto naive = oracle::naive_codes(net, oracle::to_std(gaussian(3, 2)));
  CHECK(std::equal(p.codes.begin(), p.codes.end(), naive.begin(), naive.end()));

  const Network smooth = init_network(NetworkSpec::uniform(3, 5, 2, Activation::tanh, 1, 0, 1));
  CHECK_THROWS_AS(activation_pattern(forward(smooth, gaussian(3, 2))), UnsupportedActivationError);
}

TEST_CASE("output is affine between points sharing a pattern") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Network net = init_network(NetworkSpec::uniform(3, 6, 3, Activation::relu, 2, 0.1, seed));
    const Vector a = gaussian(3, seed * 3), b = gaussian(3, seed * 3 + 1);
    auto at = [&](double t) { return Vector(a + t * (b - a)); };
    const double t1 = 0.40, t2 = 0.401, t3 = 0.402;
    const auto p1 = activation_pattern(net, at(t1));
    if (!(p1 == activation_pattern(net, at(t2)) && p1 == activation_pattern(net, at(t3)))) continue;
    const Vector y1 = evaluate(net, at(t1)), y2 = evaluate(net, at(t2)), y3 = evaluate(net, at(t3));
    const Vector interp = y1 + (t2 - t1) / (t3 - t1) * (y3 - y1);
    CHECK((y2 - interp).norm() <= 1e-9 * std::max(1.0, y2.norm()));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("binary container round trips bit-exactly") {
  const Network net = init_network(NetworkSpec::uniform(3, 4, 2, Activation::hard_tanh, 2, 1, 77, 2));
  const auto bytes = encode_network(net);
  REQUIRE(bytes.size() > 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "XPNL");
  const Network back = decode_network(bytes);
  CHECK(back == net);
  CHECK(encode_network(back) == bytes);

  auto bad = bytes;
  bad[0] = 'Y';
  CHECK_THROWS_AS(decode_network(bad), FormatError);
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  CHECK_THROWS_AS(decode_network(cut), FormatError);
}

TEST_CASE("spec json round trips and rejects unknown keys") {
  const auto spec = NetworkSpec::uniform(3, 4, 2, Activation::hard_tanh, 2.5, 0.25, 1234567890123ULL);
  CHECK(spec_from_json(spec_to_json(spec)) == spec);
  CHECK_THROWS_AS(spec_from_json(R"({"input_dim": 2, "hidden_widths": [3], "bogus": 1})"), InvalidSpecError);
}

}  // TEST_SUITE
