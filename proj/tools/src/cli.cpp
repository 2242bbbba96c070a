#include "xplab/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "xpl/errors.hpp"

#ifndef XPLAB_VERSION
#define XPLAB_VERSION "0.0.0"
#endif

namespace xplab {

namespace {

std::string flag_names(const std::string& key) {
  std::string dashed = key;
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  return dashed == key ? "--" + key : "--" + dashed + ",--" + key;
}

std::string display(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (!v.is_array()) return v.dump();
  std::string out;
  for (const auto& e : v) out += (out.empty() ? "" : ",") + e.dump();
  return out;
}

const char* type_name(Kind k) {
  switch (k) {
    case Kind::count: return "UINT";
    case Kind::seed: return "SEED";
    case Kind::real: return "REAL";
    case Kind::text: return "TEXT";
    case Kind::counts: return "UINT,...";
    case Kind::reals: return "REAL,...";
  }
  return "";
}

json defaults_of(const Command& cmd) {
  json v = json::object();
  for (const auto& [key, value] : cmd.defaults) {
    const KeyDef& def = key_def(key);
    v[def.block][key] = coerce(def, value);
  }
  return v;
}

bool allowed(const Command& cmd, const std::string& key) {
  return std::any_of(cmd.defaults.begin(), cmd.defaults.end(), [&](const auto& d) { return d.first == key; });
}

void merge_file(const Command& cmd, const std::string& path, json& values) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [block, body] : doc.items()) {
    if (block == "subcommand") {
      if (body != cmd.name) throw ConfigError("config is for subcommand " + body.dump());
      continue;
    }
    if (!body.is_object()) throw ConfigError("block " + block + " must be an object");
    for (const auto& [key, value] : body.items()) {
      if (!allowed(cmd, key)) throw ConfigError("unknown key " + block + "." + key + " for " + cmd.name);
      const KeyDef& def = key_def(key);
      if (def.block != block) throw ConfigError("key " + key + " belongs to block " + def.block);
      values[block][key] = coerce(def, value);
    }
  }
}

json manifest(const Config& cfg, const RunContext& ctx) {
  json libs = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                             std::to_string(EIGEN_MINOR_VERSION)},
               {"boost", BOOST_LIB_VERSION},
               {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
               {"cli11", CLI11_VERSION}};
  json outputs = json::array();
  for (const auto& o : ctx.outputs()) outputs.push_back(std::filesystem::path(o).lexically_relative(ctx.dir()).string());
  return {{"tool", "xplab"},     {"version", XPLAB_VERSION}, {"subcommand", cfg.subcommand()},
          {"config", cfg.to_json()}, {"config_hash", cfg.hash()}, {"libraries", libs},
          {"outputs", outputs},      {"notes", ctx.notes()}};
}

}  // namespace

std::vector<std::string> subcommands() {
  std::vector<std::string> out;
  for (const auto& c : commands()) out.push_back(c.name);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"xplab: expressivity measurements for random piecewise-linear networks", "xplab"};
  app.set_version_flag("--version", XPLAB_VERSION);
  app.require_subcommand(1);
  app.footer("Every subcommand takes --config FILE (JSON, blocks of keys) and flag overrides; flags win.\n"
             "Lists are comma separated. XPLAB_THREADS caps the worker pool.");

  struct Slot {
    const Command* cmd;
    CLI::App* sub;
    std::string config;
    std::map<std::string, std::vector<std::string>> raw;
    std::map<std::string, CLI::Option*> opts;
  };
  std::vector<Slot> slots(commands().size());
  for (std::size_t i = 0; i < commands().size(); ++i) {
    Slot& s = slots[i];
    s.cmd = &commands()[i];
    s.sub = app.add_subcommand(s.cmd->name, s.cmd->summary);
    s.sub->add_option("--config", s.config, "JSON config file");
    std::vector<std::string> seen;
    for (const auto& [key, value] : s.cmd->defaults) {
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      const KeyDef& def = key_def(key);
      json shown = value;
      for (auto it = s.cmd->defaults.rbegin(); it != s.cmd->defaults.rend(); ++it)
        if (it->first == key) {
          shown = it->second;
          break;
        }
      auto* o = s.sub->add_option(flag_names(key), s.raw[key], def.help);
      o->default_str(display(shown));
      o->type_name(type_name(def.kind));
      o->group(def.block);
      if (def.kind == Kind::counts || def.kind == Kind::reals)
        o->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
      else
        o->expected(1);
      s.opts[key] = o;
    }
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << XPLAB_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  const Slot* chosen = nullptr;
  for (const auto& s : slots)
    if (s.sub->parsed()) chosen = &s;
  if (!chosen) {
    err << app.help();
    return kExitConfig;
  }

  Config cfg;
  try {
    json values = defaults_of(*chosen->cmd);
    if (!chosen->config.empty()) merge_file(*chosen->cmd, chosen->config, values);
    for (const auto& [key, opt] : chosen->opts)
      if (opt->count() > 0) {
        const KeyDef& def = key_def(key);
        values[def.block][key] = coerce_flag(def, chosen->raw.at(key));
      }
    cfg = Config(chosen->cmd->name, values);
    chosen->cmd->check(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const std::filesystem::path dir = cfg.text("out_dir");
    std::filesystem::create_directories(dir);
    RunContext ctx(dir, out);
    chosen->cmd->exec(cfg, ctx);
    std::ofstream m(dir / "manifest.json", std::ios::binary);
    m << manifest(cfg, ctx).dump(2) << '\n';
    if (!m) throw xpl::IoError("cannot write manifest in " + dir.string());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace xplab
