#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include "vscrl/algo/ppo.hpp"
#include "vscrl/algo/reference.hpp"
#include "vscrl/algo/vscrl.hpp"
#include "vscrl/cli/config.hpp"
#include "vscrl/cli/plot.hpp"
#include "vscrl/nn/checkpoint.hpp"
#include "vscrl/subgoal_gen/remote.hpp"
#include "vscrl/subgoal_gen/scripted.hpp"
#include "vscrl/theory/fuzz.hpp"

namespace vscrl::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kRuntime = 3 };

inline envs::EnvKind multiroom_kind(const RunConfig& cfg) {
  const auto kind = envs::parse_env_kind(cfg.env);
  if (kind == envs::EnvKind::tabular) {
    throw Error("usage-error", "run.env: " + cfg.command + " needs a multiroom environment");
  }
  return kind;
}

// Plan source for the configured generator, memoized per goal. The remote
// generator falls back to the scripted plan and then to the identity plan.
inline algo::PlanProvider make_plan_provider(const RunConfig& cfg, envs::EnvKind kind) {
  std::shared_ptr<subgoal_gen::RemoteGenerator> remote;
  std::vector<subgoal_gen::FewShotExample> examples;
  if (cfg.generator == "remote") {
    remote = std::make_shared<subgoal_gen::RemoteGenerator>(
        subgoal_gen::RemoteConfig{cfg.endpoint, cfg.timeout_ms, cfg.api_key_env});
    if (!cfg.few_shot.empty()) examples = subgoal_gen::load_few_shot(cfg.few_shot);
  }
  auto cache = std::make_shared<std::map<std::string, subgoal_gen::SubgoalPlan>>();
  auto mu = std::make_shared<std::mutex>();
  const std::string generator = cfg.generator;
  return [=](const Goal& goal) {
    std::lock_guard lock(*mu);
    if (auto it = cache->find(goal.id); it != cache->end()) return it->second;
    subgoal_gen::SubgoalPlan plan;
    if (generator == "identity") {
      plan = subgoal_gen::identity_plan(goal);
    } else if (generator == "limited") {
      plan = subgoal_gen::limited_plan(subgoal_gen::generate_scripted(goal, kind));
    } else if (generator == "remote") {
      const std::string context = "a chain of " + std::to_string(envs::rooms_of(kind)) +
                                  " rooms joined by closed doors, numbered from the start room";
      plan = subgoal_gen::generate_with_fallback(remote.get(), {goal, context, examples}, envs::to_string(kind));
    } else {
      plan = subgoal_gen::generate_scripted(goal, kind);
    }
    subgoal_gen::validate_plan(plan, goal);
    cache->emplace(goal.id, plan);
    return plan;
  };
}

inline std::string method_name(const RunConfig& cfg) {
  if (cfg.command == "train-ppo") return "ppo";
  return cfg.generator == "scripted" ? "vscrl" : "vscrl-" + cfg.generator;
}

inline algo::ReferencePolicy build_reference(const algo::TrainConfig& tc, const algo::TaskSpec& task) {
  const auto demos = algo::collect_oracle_demos(task, tc.ref_demos, tc.seed, tc.ref_noise);
  algo::ReferenceTraining opts;
  opts.epochs = tc.ref_epochs;
  opts.batch_size = tc.batch_size;
  opts.lr = tc.lr;
  opts.hidden = tc.hidden;
  opts.seed = tc.seed;
  return algo::pretrain_reference(task, demos, opts);
}

// One training run into `dir`: resolved config, metrics stream, checkpoints.
inline std::string train_one(const RunConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  RunConfig resolved = cfg;
  resolved.seeds = {seed};
  resolved.train.seed = seed;
  std::ofstream(dir / "config.ini") << serialize_config(resolved);

  const auto kind = multiroom_kind(cfg);
  const auto task = algo::multiroom_task(kind, cfg.horizon);
  std::ofstream metrics(dir / "metrics.jsonl");
  if (!metrics) throw Error("io-error", "cannot write " + (dir / "metrics.jsonl").string());
  algo::TrainHooks hooks;
  hooks.on_record = [&metrics](const algo::MetricsRecord& r) { metrics << algo::to_json(r).dump() << '\n' << std::flush; };

  std::ostringstream summary;
  algo::TrainResult result{{}, algo::PolicyNet(task.shape(), resolved.train.hidden, 0)};
  if (cfg.command == "train-ppo") {
    result = algo::train_ppo(resolved.train, task, hooks);
  } else {
    const auto ref = build_reference(resolved.train, task);
    const auto before = ref.parameter_hash();
    nn::save_checkpoint(ref.policy().net(), (dir / "reference.ckpt").string());
    result = algo::train_vscrl(resolved.train, task, make_plan_provider(cfg, kind), algo::scripted_evaluator_factory(),
                               ref, hooks);
    if (ref.parameter_hash() != before) throw Error("reference-mutated", "reference parameters changed during training");
    summary << " reference=" << ref.provenance();
  }
  nn::save_checkpoint(result.policy.net(), (dir / "policy.ckpt").string());
  const auto fin = algo::final_eval(result.records);
  const auto hit = algo::steps_to_reach(result.records, 0.9);
  std::ostringstream line;
  line << method_name(cfg) << ' ' << cfg.env << " seed=" << seed << " final_eval="
       << (fin ? std::to_string(*fin) : "n/a") << " steps_to_0.9=" << (hit ? std::to_string(*hit) : "never")
       << summary.str();
  return line.str();
}

inline int run_train(const RunConfig& cfg, std::ostream& out) {
  namespace fs = std::filesystem;
  const fs::path env_dir = fs::path(cfg.out) / cfg.env;
  const fs::path method_dir = env_dir / method_name(cfg);
  multiroom_kind(cfg);
  std::vector<std::string> lines(cfg.seeds.size());
  std::vector<std::string> failures(cfg.seeds.size());
  auto job = [&](std::size_t i) {
    try {
      lines[i] = train_one(cfg, cfg.seeds[i], method_dir / ("seed-" + std::to_string(cfg.seeds[i])));
    } catch (const std::exception& e) {
      failures[i] = "seed " + std::to_string(cfg.seeds[i]) + ": " + e.what();
    }
  };
  if (cfg.parallel) {
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) threads.emplace_back(job, i);
    for (auto& t : threads) t.join();
  } else {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      job(i);
      if (!failures[i].empty()) break;
    }
  }
  int code = kOk;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (!lines[i].empty()) out << lines[i] << '\n';
    if (!failures[i].empty()) {
      out << "error: " << failures[i] << '\n';
      code = kRuntime;
    }
  }
  if (code == kOk) {
    plot_runs(env_dir.string(), (env_dir / "curves").string());
    out << "plot: " << (env_dir / "curves.svg").string() << '\n';
  }
  return code;
}

// Greedy success of a saved policy; the generator decides the subgoal
// conditioning (use "identity" for PPO checkpoints).
inline double evaluate(const RunConfig& cfg, const std::string& checkpoint, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw Error("usage-error", "run.episodes: must be >= 1");
  const auto kind = multiroom_kind(cfg);
  const auto task = algo::multiroom_task(kind, cfg.horizon);
  const algo::PolicyNet policy(task.shape(), nn::load_checkpoint(checkpoint));
  const auto plan = make_plan_provider(cfg, kind)(task.goal);
  return algo::evaluate_greedy(policy, task, &plan.subgoals, algo::scripted_evaluator_factory(), episodes, seed);
}

inline int run_verify(std::ostream& out) {
  const auto rows = theory::run_verification();
  std::map<std::string, std::pair<int, int>> tally;
  out << std::left << std::setw(16) << "suite" << std::setw(10) << "seed" << std::setw(24) << "lhs" << std::setw(24)
      << "rhs" << "pass\n";
  bool all = true;
  for (const auto& r : rows) {
    out << std::setw(16) << r.suite << std::setw(10) << r.seed << std::setw(24) << std::setprecision(15) << r.lhs
        << std::setw(24) << r.rhs << (r.pass ? "yes" : "NO");
    if (!r.pass && !r.note.empty()) out << "  " << r.note;
    out << '\n';
    auto& t = tally[r.suite];
    t.first += r.pass ? 1 : 0;
    t.second += 1;
    all = all && r.pass;
  }
  for (const auto& [suite, t] : tally) out << suite << ": " << t.first << "/" << t.second << " passed\n";
  return all ? kOk : kCheckFailed;
}

inline int run_render(const RunConfig& cfg, std::ostream& out) {
  envs::GridMultiRoom env = algo::multiroom_task(multiroom_kind(cfg), cfg.horizon).make_env();
  for (auto seed : cfg.seeds) {
    env.reset(seed);
    out << "seed " << seed << ":\n" << env.render() << '\n';
  }
  return kOk;
}

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    if (cfg.command == "train-vscrl" || cfg.command == "train-ppo") return run_train(cfg, out);
    if (cfg.command == "verify") return run_verify(out);
    if (cfg.command == "render") return run_render(cfg, out);
    if (cfg.command == "plot") {
      const std::string dir = cfg.metrics_dir.empty() ? cfg.out : cfg.metrics_dir;
      const auto stem = (std::filesystem::path(cfg.out) / "curves").string();
      std::filesystem::create_directories(cfg.out);
      for (const auto& c : plot_runs(dir, stem)) {
        out << c.label << ": " << c.seeds << " seeds, " << c.points.size() << " checkpoints\n";
      }
      out << "plot: " << stem << ".svg\n";
      return kOk;
    }
    if (cfg.command == "eval") {
      if (cfg.checkpoint.empty()) throw Error("usage-error", "run.checkpoint: eval needs a checkpoint");
      const double s = evaluate(cfg, cfg.checkpoint, cfg.episodes, cfg.seeds.front());
      out << "success " << s << " over " << cfg.episodes << " episodes\n";
      return kOk;
    }
    throw Error("usage-error", "unknown command " + cfg.command);
  } catch (const Error& e) {
    const bool usage = e.code() == "usage-error" || e.code() == "no-runs-found" || e.code() == "unknown-env";
    err << (usage ? "usage error: " : "error: ") << e.what() << '\n';
    return usage ? kUsage : kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace vscrl::cli
