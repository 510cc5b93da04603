#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vscrl/error.hpp"

namespace vscrl::algo {

struct MetricsRecord {
  long epoch = 0;
  long env_steps = 0;
  double train_success = 0.0;
  std::optional<double> eval_success;  // only on checkpoint epochs
  double loss_awr = 0.0;
  double loss_value = 0.0;
  double loss_imitation = 0.0;
  double mean_awr_weight = 0.0;
  long wall_ms = 0;
};

inline nlohmann::json to_json(const MetricsRecord& r) {
  nlohmann::json j;
  j["epoch"] = r.epoch;
  j["env_steps"] = r.env_steps;
  j["train_success"] = r.train_success;
  j["eval_success"] = r.eval_success ? nlohmann::json(*r.eval_success) : nlohmann::json(nullptr);
  j["loss_awr"] = r.loss_awr;
  j["loss_value"] = r.loss_value;
  j["loss_imitation"] = r.loss_imitation;
  j["mean_awr_weight"] = r.mean_awr_weight;
  j["wall_ms"] = r.wall_ms;
  return j;
}

inline MetricsRecord metrics_from_json(const nlohmann::json& j) {
  static const char* keys[] = {"epoch", "env_steps", "train_success", "eval_success", "loss_awr",
                               "loss_value", "loss_imitation", "mean_awr_weight", "wall_ms"};
  for (const char* k : keys) {
    if (!j.contains(k)) throw Error("malformed-metrics", std::string("missing key ") + k);
  }
  MetricsRecord r;
  try {
    r.epoch = j.at("epoch").get<long>();
    r.env_steps = j.at("env_steps").get<long>();
    r.train_success = j.at("train_success").get<double>();
    if (!j.at("eval_success").is_null()) r.eval_success = j.at("eval_success").get<double>();
    r.loss_awr = j.at("loss_awr").get<double>();
    r.loss_value = j.at("loss_value").get<double>();
    r.loss_imitation = j.at("loss_imitation").get<double>();
    r.mean_awr_weight = j.at("mean_awr_weight").get<double>();
    r.wall_ms = j.at("wall_ms").get<long>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed-metrics", e.what());
  }
  return r;
}

inline std::vector<MetricsRecord> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing-file", path);
  std::vector<MetricsRecord> out;
  std::string line;
  long last_steps = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed-metrics", e.what());
    }
    auto r = metrics_from_json(j);
    if (r.env_steps < last_steps) throw Error("malformed-metrics", "env_steps decreased");
    last_steps = r.env_steps;
    out.push_back(r);
  }
  return out;
}

// Env steps at the first checkpoint whose eval success reaches `level`.
inline std::optional<long> steps_to_reach(const std::vector<MetricsRecord>& records, double level) {
  for (const auto& r : records) {
    if (r.eval_success && *r.eval_success >= level) return r.env_steps;
  }
  return std::nullopt;
}

inline std::optional<double> final_eval(const std::vector<MetricsRecord>& records) {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->eval_success) return it->eval_success;
  }
  return std::nullopt;
}

// Mean eval success over all checkpoints (area under the learning curve).
inline double mean_eval(const std::vector<MetricsRecord>& records) {
  double s = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.eval_success) {
      s += *r.eval_success;
      ++n;
    }
  }
  return n ? s / n : 0.0;
}

}  // namespace vscrl::algo
