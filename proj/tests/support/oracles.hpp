#pragma once

// Brute-force reference implementations used by the tests. None of these
// call into the library's numerical code beyond reading network weights.

#include <cstdint>
#include <functional>
#include <vector>

#include "xpl/netcore.hpp"

namespace oracle {

/// Pre-activations of every layer by explicit loops; the last entry is the output.
std::vector<std::vector<double>> naive_forward(const xpl::Network& net, const std::vector<double>& x);

std::vector<int> naive_codes(const xpl::Network& net, const std::vector<double>& x);

struct DenseCount {
  std::size_t transitions = 0;
  std::size_t distinct_patterns = 0;
};

/// Samples t = i / (samples - 1) and sums the L1 code distance between
/// consecutive samples.
DenseCount dense_transitions(const xpl::Network& net, const std::function<std::vector<double>(double)>& curve,
                             std::size_t samples);

/// Random label flips with std::mt19937_64.
std::size_t random_walk(std::size_t transitions, std::size_t s, std::uint64_t seed);

/// Memoised r(k, m) in 64-bit integers (small arguments only).
std::uint64_t regions_recursive(unsigned k, unsigned m);

std::vector<double> to_std(const xpl::Vector& v);

}  // namespace oracle
