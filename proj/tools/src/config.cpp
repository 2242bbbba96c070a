#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace xplab {

const std::vector<KeyDef>& key_defs() {
  static const std::vector<KeyDef> defs = {
      {"input_dim", "network", Kind::count, "input dimension m"},
      {"width", "network", Kind::counts, "hidden width k (list)"},
      {"depth", "network", Kind::counts, "number of hidden layers n (list)"},
      {"output_dim", "network", Kind::count, "output units"},
      {"activation", "network", Kind::text, "relu | hard_tanh | tanh | identity"},
      {"sigma_w_sq", "network", Kind::reals, "weight variance sigma_w^2 (list)"},
      {"sigma_b_sq", "network", Kind::real, "bias variance sigma_b^2"},
      {"seed", "network", Kind::seed, "base seed for network draws"},
      {"trajectory", "trajectory", Kind::text, "line | circular_arc | great_circle_loop"},
      {"traj_seed", "trajectory", Kind::seed, "seed for the trajectory endpoints"},
      {"method", "trajectory", Kind::text, "measurement method"},
      {"num_points", "trajectory", Kind::count, "initial polyline points"},
      {"rel_tol", "trajectory", Kind::real, "polyline refinement tolerance"},
      {"t_tol", "trajectory", Kind::real, "bisection tolerance in t"},
      {"seeds", "ensemble", Kind::count, "ensemble size"},
      {"points", "sweep", Kind::count, "number of datapoints s"},
      {"num_t", "sweep", Kind::count, "sampled t values, 0 = continuous sweep"},
      {"sweep_layer", "sweep", Kind::count, "swept weight layer, 0-based"},
      {"box", "regions", Kind::real, "half-width of the plotted box, 0 = automatic"},
      {"max_cells", "regions", Kind::count, "cell cap"},
      {"k", "bounds", Kind::counts, "hidden units per layer (list)"},
      {"m", "bounds", Kind::counts, "input dimension (list)"},
      {"classes", "data", Kind::count, "blob classes"},
      {"per_class", "data", Kind::count, "blob points per class"},
      {"spread", "data", Kind::real, "blob standard deviation"},
      {"data_seed", "data", Kind::seed, "seed for data generation and splits"},
      {"test_fraction", "data", Kind::real, "held-out fraction"},
      {"idx_images", "data", Kind::text, "IDX image file; empty = synthetic blobs"},
      {"idx_labels", "data", Kind::text, "IDX label file"},
      {"limit", "data", Kind::count, "max IDX records, 0 = all"},
      {"lr", "train", Kind::real, "learning rate"},
      {"batch_size", "train", Kind::count, "minibatch size"},
      {"epochs", "train", Kind::count, "epochs"},
      {"eval_every", "train", Kind::count, "steps between evaluations, 0 = per epoch"},
      {"loss", "train", Kind::text, "softmax_cross_entropy | squared_error"},
      {"noise", "train", Kind::reals, "relative noise magnitudes (list)"},
      {"noise_draws", "train", Kind::count, "noise draws per magnitude"},
      {"probe", "train", Kind::text, "datapoint_interpolation | random_points"},
      {"out_dir", "output", Kind::text, "run directory"},
      {"out", "output", Kind::text, "figure path, relative to out_dir unless absolute"},
  };
  return defs;
}

const KeyDef& key_def(const std::string& name) {
  for (const auto& d : key_defs())
    if (d.name == name) return d;
  throw ConfigError("unknown key: " + name);
}

namespace {

std::uint64_t to_u64(const KeyDef& def, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(def.name + ": expected a non-negative integer, got " + v.dump());
}

double to_real(const KeyDef& def, const json& v) {
  if (!v.is_number() || !std::isfinite(v.get<double>()))
    throw ConfigError(def.name + ": expected a finite number, got " + v.dump());
  return v.get<double>();
}

json parse_scalar(const KeyDef& def, const std::string& s, bool integer) {
  if (integer) {
    std::uint64_t u = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), u);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(def.name + ": not an integer: " + s);
    return u;
  }
  double d = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(d))
    throw ConfigError(def.name + ": not a number: " + s);
  return d;
}

}  // namespace

json coerce(const KeyDef& def, const json& value) {
  switch (def.kind) {
    case Kind::count:
    case Kind::seed:
      return to_u64(def, value);
    case Kind::real:
      return to_real(def, value);
    case Kind::text:
      if (!value.is_string()) throw ConfigError(def.name + ": expected a string");
      return value;
    case Kind::counts:
    case Kind::reals: {
      const json arr = value.is_array() ? value : json::array({value});
      if (arr.empty()) throw ConfigError(def.name + ": list must not be empty");
      json out = json::array();
      for (const auto& v : arr) out.push_back(def.kind == Kind::counts ? json(to_u64(def, v)) : json(to_real(def, v)));
      return out;
    }
  }
  return value;
}

json coerce_flag(const KeyDef& def, const std::vector<std::string>& raw) {
  if (raw.empty()) throw ConfigError(def.name + ": missing value");
  switch (def.kind) {
    case Kind::count:
    case Kind::seed:
      return parse_scalar(def, raw.back(), true);
    case Kind::real:
      return parse_scalar(def, raw.back(), false);
    case Kind::text:
      return raw.back();
    case Kind::counts:
    case Kind::reals: {
      json out = json::array();
      for (const auto& s : raw) out.push_back(parse_scalar(def, s, def.kind == Kind::counts));
      return out;
    }
  }
  return {};
}

const json& Config::at(const std::string& key) const {
  const KeyDef& def = key_def(key);
  const auto b = values_.find(def.block);
  if (b == values_.end() || !b->contains(key)) throw ConfigError("key not available here: " + key);
  return (*b)[key];
}

std::size_t Config::count(const std::string& key) const { return at(key).get<std::size_t>(); }
std::uint64_t Config::seed(const std::string& key) const { return at(key).get<std::uint64_t>(); }
double Config::real(const std::string& key) const { return at(key).get<double>(); }
std::string Config::text(const std::string& key) const { return at(key).get<std::string>(); }
std::vector<std::size_t> Config::counts(const std::string& key) const { return at(key).get<std::vector<std::size_t>>(); }
std::vector<double> Config::reals(const std::string& key) const { return at(key).get<std::vector<double>>(); }

json Config::to_json() const {
  json j = values_;
  j["subcommand"] = subcommand_;
  return j;
}

std::string Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace xplab
