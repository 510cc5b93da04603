#include <iostream>

#include "CLI11.hpp"
#include "vscrl/cli/run.hpp"

int main(int argc, char** argv) {
  using vscrl::cli::RunConfig;
  CLI::App app{"Variational subgoal-conditioned RL: training, evaluation, verification and plots"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string seeds;
  std::string env;
  std::string generator;
  std::string endpoint;
  std::string out;
  std::string checkpoint;
  std::string metrics_dir;
  int episodes = -1;
  bool parallel = false;
  bool print_config = false;
  std::vector<std::string> overrides;

  for (const auto& name : vscrl::cli::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file with [defaults] and [run] sections");
    sub->add_option("--seed", seeds, "comma-separated seed list");
    sub->add_option("--env", env, "multiroom-n2 | multiroom-n4 | multiroom-n6 | tabular");
    sub->add_option("--generator", generator, "scripted | remote | identity | limited");
    sub->add_option("--endpoint", endpoint, "subgoal generator URL (remote)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--episodes", episodes, "evaluation episodes");
    sub->add_option("--checkpoint", checkpoint, "policy checkpoint (eval)");
    sub->add_option("--metrics", metrics_dir, "directory searched for metrics.jsonl (plot)");
    sub->add_option("--set", overrides, "override any config key, e.g. --set beta=0.5");
    sub->add_flag("--parallel", parallel, "train seeds concurrently");
    sub->add_flag("--print-config", print_config, "print the resolved config and exit");
  }
  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = vscrl::cli::load_config(config_path);
    cfg.command = app.get_subcommands().front()->get_name();
    if (!seeds.empty()) vscrl::cli::set_value(cfg, "run.seeds", seeds);
    if (!env.empty()) cfg.env = env;
    if (!generator.empty()) cfg.generator = generator;
    if (!endpoint.empty()) cfg.endpoint = endpoint;
    if (!out.empty()) cfg.out = out;
    if (episodes != -1) cfg.episodes = episodes;
    if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
    if (!metrics_dir.empty()) cfg.metrics_dir = metrics_dir;
    if (parallel) cfg.parallel = true;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw vscrl::Error("usage-error", "--set expects key=value, got " + kv);
      vscrl::cli::set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
  } catch (const vscrl::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return vscrl::cli::kUsage;
  }
  if (print_config) {
    std::cout << vscrl::cli::serialize_config(cfg);
    return 0;
  }
  return vscrl::cli::run(cfg, std::cout, std::cerr);
}
