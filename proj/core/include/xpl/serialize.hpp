#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xpl/netcore.hpp"

namespace xpl {

/// Binary container layout (all integers and floats little-endian):
///
///   "XPNL"  u32 version
///   u32 input_dim, u32 depth, u32 width[depth], u32 output_dim,
///   u32 activation (0 relu, 1 hard_tanh, 2 tanh, 3 identity),
///   f64 sigma_w_sq, f64 sigma_b_sq, u64 seed
///   per layer: f64 weights[fan_out * fan_in] (row-major), f64 bias[fan_out]
inline constexpr std::uint32_t kNetworkFormatVersion = 1;

std::vector<std::uint8_t> encode_network(const Network& net);
Network decode_network(std::span<const std::uint8_t> bytes);

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const std::string& text);

}  // namespace xpl
