#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "xplab/plot.hpp"

namespace xplab {

class RunContext {
 public:
  RunContext(std::filesystem::path dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {}

  std::ostream& out() { return out_; }
  const std::filesystem::path& dir() const { return dir_; }
  /// Relative paths land in the run directory.
  std::filesystem::path resolve(const std::string& path) const;
  void csv(const std::string& name, const std::function<void(std::ostream&)>& fill);
  void plot(const std::string& name, const std::vector<Series>& series, const AxesSpec& axes);
  void record(const std::filesystem::path& p) { outputs_.push_back(p.string()); }
  const std::vector<std::string>& outputs() const { return outputs_; }
  /// Free-form key/value notes copied into the manifest.
  void note(const std::string& key, json value) { notes_[key] = std::move(value); }
  const json& notes() const { return notes_; }

 private:
  std::filesystem::path dir_;
  std::ostream& out_;
  std::vector<std::string> outputs_;
  json notes_ = json::object();
};

struct Command {
  std::string name;
  std::string summary;
  /// Keys accepted by the command, in help order, with their defaults.
  std::vector<std::pair<std::string, json>> defaults;
  /// Throws ConfigError or xpl::Error; runs before any computation.
  std::function<void(const Config&)> check;
  std::function<void(const Config&, RunContext&)> exec;
};

const std::vector<Command>& commands();

}  // namespace xplab
