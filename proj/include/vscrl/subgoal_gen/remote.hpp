#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "vscrl/core/hash.hpp"
#include "vscrl/subgoal_gen/plan.hpp"
#include "vscrl/subgoal_gen/scripted.hpp"

namespace vscrl::subgoal_gen {

struct RemoteConfig {
  std::string endpoint;     // http://host:port/path
  int timeout_ms = 5000;
  std::string api_key_env;  // name of the env var holding the credential
};

// Prompt in the few-shot style: worked examples first, then the target goal.
inline std::string build_prompt(const SubgoalRequest& req) {
  std::ostringstream os;
  os << "Decompose the goal into a short ordered list of subgoals that can be "
        "achieved one after another. Answer with numbered lines only.\n";
  if (!req.context.empty()) os << "\nEnvironment: " << req.context << "\n";
  for (const auto& ex : req.examples) {
    os << "\nGoal: " << ex.goal_text << "\nSubgoals:\n";
    for (std::size_t i = 0; i < ex.subgoals.size(); ++i) {
      os << (i + 1) << ". " << ex.subgoals[i] << "\n";
    }
  }
  os << "\nGoal: " << req.goal.text << "\nSubgoals:\n";
  return os.str();
}

inline nlohmann::json request_body(const SubgoalRequest& req) {
  nlohmann::json few = nlohmann::json::array();
  for (const auto& ex : req.examples) {
    few.push_back({{"goal_text", ex.goal_text}, {"subgoals", ex.subgoals}});
  }
  return {{"goal_text", req.goal.text},
          {"context", req.context},
          {"few_shot", few},
          {"prompt", build_prompt(req)}};
}

// Numbered plain-text lines: "1. foo" or "2) bar". Anything else is ignored.
inline std::vector<std::string> parse_numbered_lines(const std::string& body) {
  static const std::regex line_re(R"(^\d+[.)] (.+)$)");
  std::vector<std::string> out;
  std::istringstream is(body);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, line_re)) out.push_back(m[1].str());
  }
  return out;
}

// Few-shot file: one JSON object per line, {"goal_text": ..., "subgoals": [...]}.
inline std::vector<FewShotExample> load_few_shot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing-file", path);
  std::vector<FewShotExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    out.push_back({j.at("goal_text").get<std::string>(),
                   j.at("subgoals").get<std::vector<std::string>>()});
  }
  return out;
}

// Client for a text-model endpoint. One request in flight at a time; plans
// are memoized per (goal id, prompt hash) for the lifetime of the client.
class RemoteGenerator {
 public:
  explicit RemoteGenerator(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    static const std::regex url_re(R"(^(http://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg_.endpoint, m, url_re)) {
      throw Error("invalid-endpoint", cfg_.endpoint);
    }
    base_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
  }

  SubgoalPlan generate(const SubgoalRequest& req) {
    std::lock_guard lock(mu_);
    const std::string prompt = build_prompt(req);
    const std::string key = req.goal.id + "#" + std::to_string(fnv1a(prompt));
    if (auto it = cache_.find(key); it != cache_.end()) {
      SubgoalPlan hit = it->second;
      hit.cached = true;
      return hit;
    }

    httplib::Client cli(base_);
    const auto sec = cfg_.timeout_ms / 1000;
    const auto usec = (cfg_.timeout_ms % 1000) * 1000;
    cli.set_connection_timeout(sec, usec);
    cli.set_read_timeout(sec, usec);
    cli.set_write_timeout(sec, usec);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
      if (const char* key_value = std::getenv(cfg_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key_value);
      }
    }
    auto res = cli.Post(path_, headers, request_body(req).dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::Write ||
          err == httplib::Error::ConnectionTimeout) {
        throw Error("generator-timeout", httplib::to_string(err));
      }
      throw Error("generator-unreachable", httplib::to_string(err));
    }
    if (res->status != 200) {
      throw Error("malformed-plan", "HTTP status " + std::to_string(res->status));
    }
    auto texts = parse_numbered_lines(res->body);
    if (texts.empty()) throw Error("malformed-plan", "no numbered lines in response");
    SubgoalPlan plan = make_plan(req.goal, texts, SubgoalSource::remote, "remote");
    cache_[key] = plan;
    return plan;
  }

  void clear_cache() {
    std::lock_guard lock(mu_);
    cache_.clear();
  }

 private:
  RemoteConfig cfg_;
  std::string base_;
  std::string path_;
  std::mutex mu_;
  std::map<std::string, SubgoalPlan> cache_;
};

// Never fails: remote, then scripted, then the identity plan. Every returned
// plan has passed validation.
inline SubgoalPlan generate_with_fallback(RemoteGenerator* remote, const SubgoalRequest& req,
                                          const std::string& env_kind) {
  if (remote) {
    try {
      SubgoalPlan plan = remote->generate(req);
      validate_plan(plan, req.goal);
      return plan;
    } catch (const Error&) {
    }
  }
  try {
    SubgoalPlan plan = generate_scripted(req.goal, env_kind);
    validate_plan(plan, req.goal);
    return plan;
  } catch (const Error&) {
  }
  return identity_plan(req.goal);
}

}  // namespace vscrl::subgoal_gen
