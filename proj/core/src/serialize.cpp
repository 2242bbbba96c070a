#include "xpl/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "xpl/errors.hpp"

namespace xpl {
namespace {

constexpr char kMagic[4] = {'X', 'P', 'N', 'L'};

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  void raw(char* p, std::size_t n) {
    need(n);
    std::memcpy(p, b_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw FormatError("network container is truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::uint32_t activation_id(Activation a) {
  switch (a) {
    case Activation::relu: return 0;
    case Activation::hard_tanh: return 1;
    case Activation::tanh: return 2;
    case Activation::identity: return 3;
  }
  return 0;
}

Activation activation_from_id(std::uint32_t id) {
  switch (id) {
    case 0: return Activation::relu;
    case 1: return Activation::hard_tanh;
    case 2: return Activation::tanh;
    case 3: return Activation::identity;
    default: throw FormatError("unknown activation id " + std::to_string(id));
  }
}

}  // namespace

std::vector<std::uint8_t> encode_network(const Network& net) {
  const NetworkSpec& s = net.spec();
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kNetworkFormatVersion);
  w.u32(static_cast<std::uint32_t>(s.input_dim));
  w.u32(static_cast<std::uint32_t>(s.depth()));
  for (auto k : s.hidden_widths) w.u32(static_cast<std::uint32_t>(k));
  w.u32(static_cast<std::uint32_t>(s.output_dim));
  w.u32(activation_id(s.activation));
  w.f64(s.sigma_w_sq);
  w.f64(s.sigma_b_sq);
  w.u64(s.seed);
  for (const Layer& l : net.layers()) {
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) w.f64(l.weights(i, j));
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) w.f64(l.bias(i));
  }
  return w.take();
}

Network decode_network(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic: not an XPNL container");
  const std::uint32_t version = r.u32();
  if (version != kNetworkFormatVersion)
    throw FormatError("unsupported XPNL version " + std::to_string(version));
  NetworkSpec s;
  s.input_dim = r.u32();
  const std::uint32_t depth = r.u32();
  if (depth > (1u << 20)) throw FormatError("implausible depth in XPNL header");
  for (std::uint32_t d = 0; d < depth; ++d) s.hidden_widths.push_back(r.u32());
  s.output_dim = r.u32();
  s.activation = activation_from_id(r.u32());
  s.sigma_w_sq = r.f64();
  s.sigma_b_sq = r.f64();
  s.seed = r.u64();
  s.validate();
  std::vector<Layer> layers;
  for (std::size_t d = 0; d <= s.depth(); ++d) {
    const auto rows = static_cast<Eigen::Index>(s.fan_out(d));
    const auto cols = static_cast<Eigen::Index>(s.fan_in(d));
    Layer l{Matrix(rows, cols), Vector(rows)};
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) l.weights(i, j) = r.f64();
    for (Eigen::Index i = 0; i < rows; ++i) l.bias(i) = r.f64();
    layers.push_back(std::move(l));
  }
  if (!r.done()) throw FormatError("trailing bytes after XPNL payload");
  return Network(std::move(s), std::move(layers));
}

void save_network(const Network& net, const std::filesystem::path& path) {
  const auto bytes = encode_network(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_network(bytes);
}

std::string spec_to_json(const NetworkSpec& s) {
  nlohmann::ordered_json j;
  j["input_dim"] = s.input_dim;
  j["hidden_widths"] = s.hidden_widths;
  j["output_dim"] = s.output_dim;
  j["activation"] = std::string(to_string(s.activation));
  j["sigma_w_sq"] = s.sigma_w_sq;
  j["sigma_b_sq"] = s.sigma_b_sq;
  j["seed"] = s.seed;
  return j.dump(2);
}

NetworkSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid spec JSON: ") + e.what());
  }
  static const char* known[] = {"input_dim", "hidden_widths", "output_dim", "activation",
                                "sigma_w_sq", "sigma_b_sq", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known))
      throw InvalidSpecError("unknown spec key '" + it.key() + "'");
  }
  NetworkSpec s;
  try {
    s.input_dim = j.at("input_dim").get<std::size_t>();
    s.hidden_widths = j.at("hidden_widths").get<std::vector<std::size_t>>();
    s.output_dim = j.value("output_dim", std::size_t{1});
    s.activation = parse_activation(j.at("activation").get<std::string>());
    s.sigma_w_sq = j.at("sigma_w_sq").get<double>();
    s.sigma_b_sq = j.value("sigma_b_sq", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpecError(std::string("malformed spec JSON: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace xpl
