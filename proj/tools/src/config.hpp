#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace xplab {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { count, seed, real, text, counts, reals };

struct KeyDef {
  std::string name;
  std::string block;
  Kind kind;
  std::string help;
};

const std::vector<KeyDef>& key_defs();
const KeyDef& key_def(const std::string& name);

/// Converts a config-file value or a flag's raw strings to the key's type.
json coerce(const KeyDef& def, const json& value);
json coerce_flag(const KeyDef& def, const std::vector<std::string>& raw);

/// Resolved values, nested by block: {"network": {"width": [4]}, ...}.
class Config {
 public:
  Config() = default;
  Config(std::string subcommand, json values) : subcommand_(std::move(subcommand)), values_(std::move(values)) {}

  const std::string& subcommand() const { return subcommand_; }
  const json& values() const { return values_; }

  std::size_t count(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  double real(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;

  /// subcommand plus values.
  json to_json() const;
  /// FNV-1a 64 of the canonical dump of to_json(), as 16 hex digits.
  std::string hash() const;

 private:
  const json& at(const std::string& key) const;
  std::string subcommand_;
  json values_;
};

}  // namespace xplab
