#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "vscrl/algo/config.hpp"
#include "vscrl/envs/env_kind.hpp"

namespace vscrl::cli {

// One run of the command-line tool. Training hyperparameters live in the
// [defaults] section of the config file, everything else under [run].
struct RunConfig {
  std::string command = "train-vscrl";
  std::string env = "multiroom-n2";
  int horizon = 0;  // 0: 40/80/120 for N2/N4/N6
  std::string generator = "scripted";  // scripted | remote | identity | limited
  std::string endpoint;
  std::string api_key_env = "VSCRL_API_KEY";
  int timeout_ms = 5000;
  std::string few_shot;
  std::string out = "runs";
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int episodes = 100;
  std::string checkpoint;
  std::string metrics_dir;
  bool parallel = false;
  algo::TrainConfig train;

  bool operator==(const RunConfig&) const = default;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"train-vscrl", "train-ppo", "eval", "verify", "plot", "render"};
  return c;
}

inline const std::vector<std::string>& generators() {
  static const std::vector<std::string> g{"scripted", "remote", "identity", "limited"};
  return g;
}

namespace detail {

inline Error bad_value(const std::string& key, const std::string& value) {
  return Error("usage-error", "invalid value for " + key + ": '" + value + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw bad_value(key, v);
  return out;
}

template <>
inline double parse_number<double>(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  try {
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw bad_value(key, v);
}

template <class T>
std::string format(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    return std::string(buf, ptr);
  } else if constexpr (std::is_arithmetic_v<T>) {
    return std::to_string(v);
  } else {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  }
}

template <class T>
T parse(const std::string& key, const std::string& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw bad_value(key, v);
  } else if constexpr (std::is_arithmetic_v<T>) {
    return parse_number<T>(key, v);
  } else {
    T out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) throw bad_value(key, v);
      out.push_back(parse_number<typename T::value_type>(key, item));
    }
    return out;
  }
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  std::string path() const { return section + "." + key; }
};

template <class T>
Field run_field(const std::string& key, T RunConfig::*m) {
  return {"run", key, [m](const RunConfig& c) { return format(c.*m); },
          [m, key](RunConfig& c, const std::string& v) { c.*m = parse<T>("run." + key, v); }};
}

template <class T>
Field train_field(const std::string& key, T algo::TrainConfig::*m) {
  return {"defaults", key, [m](const RunConfig& c) { return format(c.train.*m); },
          [m, key](RunConfig& c, const std::string& v) { c.train.*m = parse<T>("defaults." + key, v); }};
}

inline const std::vector<Field>& fields() {
  using algo::TrainConfig;
  static const std::vector<Field> f{
      train_field("batch_size", &TrainConfig::batch_size),
      train_field("total_steps", &TrainConfig::total_steps),
      train_field("discount", &TrainConfig::discount),
      train_field("lr", &TrainConfig::lr),
      train_field("hidden", &TrainConfig::hidden),
      train_field("update_epochs_value", &TrainConfig::update_epochs_value),
      train_field("update_epochs_awr", &TrainConfig::update_epochs_awr),
      train_field("update_epochs_imitation", &TrainConfig::update_epochs_imitation),
      train_field("beta", &TrainConfig::beta),
      train_field("alpha", &TrainConfig::alpha),
      train_field("w_max", &TrainConfig::w_max),
      train_field("imitation_weight", &TrainConfig::imitation_weight),
      train_field("filter_threshold", &TrainConfig::filter_threshold),
      train_field("use_filter", &TrainConfig::use_filter),
      train_field("skip_awr", &TrainConfig::skip_awr),
      train_field("skip_imitation", &TrainConfig::skip_imitation),
      train_field("max_grad_norm", &TrainConfig::max_grad_norm),
      train_field("steps_per_epoch", &TrainConfig::steps_per_epoch),
      train_field("buffer_capacity", &TrainConfig::buffer_capacity),
      train_field("eval_episodes", &TrainConfig::eval_episodes),
      train_field("eval_every", &TrainConfig::eval_every),
      train_field("seed", &TrainConfig::seed),
      train_field("ppo_clip", &TrainConfig::ppo_clip),
      train_field("gae_lambda", &TrainConfig::gae_lambda),
      train_field("entropy_coef", &TrainConfig::entropy_coef),
      train_field("ppo_epochs", &TrainConfig::ppo_epochs),
      train_field("ppo_max_grad_norm", &TrainConfig::ppo_max_grad_norm),
      train_field("ref_demos", &TrainConfig::ref_demos),
      train_field("ref_epochs", &TrainConfig::ref_epochs),
      train_field("ref_noise", &TrainConfig::ref_noise),
      run_field("command", &RunConfig::command),
      run_field("env", &RunConfig::env),
      run_field("horizon", &RunConfig::horizon),
      run_field("generator", &RunConfig::generator),
      run_field("endpoint", &RunConfig::endpoint),
      run_field("api_key_env", &RunConfig::api_key_env),
      run_field("timeout_ms", &RunConfig::timeout_ms),
      run_field("few_shot", &RunConfig::few_shot),
      run_field("out", &RunConfig::out),
      run_field("seeds", &RunConfig::seeds),
      run_field("episodes", &RunConfig::episodes),
      run_field("checkpoint", &RunConfig::checkpoint),
      run_field("metrics_dir", &RunConfig::metrics_dir),
      run_field("parallel", &RunConfig::parallel),
  };
  return f;
}

}  // namespace detail

// Sets one key given as "section.key" or a bare key name.
inline void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : detail::fields()) {
    if (key == f.path() || key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw Error("usage-error", "unknown key " + key);
}

inline RunConfig parse_config(std::istream& is, RunConfig base = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error("usage-error", std::string("malformed config: ") + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error("usage-error", "key outside a section: " + section);
    }
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      bool known = false;
      for (const auto& f : detail::fields()) {
        if (f.path() == path) {
          f.set(base, value.data());
          known = true;
          break;
        }
      }
      if (!known) throw Error("usage-error", "unknown key " + path);
    }
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw Error("usage-error", "cannot read config " + path);
  return parse_config(is, std::move(base));
}

inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : detail::fields()) {
    if (f.section != section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    os << f.key << " = " << f.get(cfg) << '\n';
  }
  return os.str();
}

inline void validate(const RunConfig& cfg) {
  auto one_of = [](const std::string& v, const std::vector<std::string>& allowed) {
    return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
  };
  if (!one_of(cfg.command, commands())) throw Error("usage-error", "run.command: unknown command " + cfg.command);
  if (!one_of(cfg.generator, generators())) throw Error("usage-error", "run.generator: unknown generator " + cfg.generator);
  try {
    envs::parse_env_kind(cfg.env);
  } catch (const Error&) {
    throw Error("usage-error", "run.env: unknown environment " + cfg.env);
  }
  if (cfg.seeds.empty()) throw Error("usage-error", "run.seeds: seed list is empty");
  if (cfg.episodes < 1) throw Error("usage-error", "run.episodes: must be >= 1");
  try {
    cfg.train.validate();
  } catch (const Error& e) {
    throw Error("usage-error", "defaults." + e.detail());
  }
  if (cfg.episodes < 1) throw Error("usage-error", "run.episodes: must be >= 1");
  if (cfg.generator == "remote" && cfg.endpoint.empty()) {
    throw Error("usage-error", "run.endpoint: remote generator needs an endpoint");
  }
  if (cfg.horizon < 0) throw Error("usage-error", "run.horizon: must be >= 0");
  if (cfg.timeout_ms < 1) throw Error("usage-error", "run.timeout_ms: must be >= 1");
  try {
    cfg.train.validate();
  } catch (const Error& e) {
    throw Error("usage-error", std::string("defaults: ") + e.what());
  }
}

}  // namespace vscrl::cli
