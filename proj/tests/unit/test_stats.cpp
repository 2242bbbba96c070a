#include <cmath>
#include <vector>

#include "doctest.h"
#include "xpl/errors.hpp"
#include "xpl/parallel.hpp"
#include "xpl/rng.hpp"
#include "xpl/stats.hpp"

using namespace xpl;

TEST_SUITE("stats") {

TEST_CASE("mean, sd and interval") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(stats::mean(v) == 5.0);
  CHECK(stats::stddev(v) == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-15));
  const auto ci = stats::mean_ci(v);
  CHECK(ci.hi - ci.mean == doctest::Approx(stats::kZ95 * std::sqrt(32.0 / 7.0) / std::sqrt(8.0)));
  CHECK(ci.n == 8);
}

TEST_CASE("pairwise sum is exact on integers and order-stable") {
  std::vector<double> v;
  for (int i = 1; i <= 1000; ++i) v.push_back(i);
  CHECK(stats::pairwise_sum(v) == 500500.0);
}

TEST_CASE("correlations") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 6, 8, 10}, z{5, 3, 4, 1, 2};
  CHECK(stats::pearson(x, y) == doctest::Approx(1.0));
  CHECK(stats::spearman(x, z) == doctest::Approx(-0.8));
  CHECK(std::isnan(stats::pearson(x, std::vector<double>(5, 1.0))));
  CHECK(stats::ranks(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
  CHECK_THROWS_AS(stats::pearson(x, std::vector<double>{1, 2}), DimensionError);
}

TEST_CASE("least squares") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = stats::linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
}

TEST_CASE("paired t and its tail") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 3.5, 3.5, 5};
  // diffs 1, 1.5, 0.5, 1: mean 1, sd sqrt(1/6)
  CHECK(stats::paired_t(a, b) == doctest::Approx(1.0 / (std::sqrt(1.0 / 6.0) / 2.0)));
  CHECK(stats::t_upper_tail(0.0, 5) == doctest::Approx(0.5));
  // Tabulated one-sided 95% critical value for df = 9.
  CHECK(stats::t_upper_tail(1.833, 9) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("rng streams are reproducible and roughly uniform") {
  const CounterRng r(123);
  CHECK(r.bits(5) == CounterRng(123).bits(5));
  CHECK(r.derive(1).key() != r.derive(2).key());
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform(i);
    CHECK_MESSAGE((u > 0.0 && u < 1.0), "uniform out of range");
    const double z = r.normal(i);
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  RngStream st(5);
  for (int i = 0; i < 1000; ++i) CHECK(st.index(7) < 7);
}

TEST_CASE("parallel_for fills every slot and rethrows") {
  std::vector<int> out(1000, 0);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i) * 2; });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i) * 2);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 3) throw DomainError("boom");
                  }),
                  DomainError);
}

}  // TEST_SUITE
