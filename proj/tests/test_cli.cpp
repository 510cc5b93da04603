#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vscrl/cli/config.hpp"
#include "vscrl/cli/plot.hpp"
#include "vscrl/cli/run.hpp"

using namespace vscrl;
using namespace vscrl::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vscrl-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig tiny_train(const fs::path& out) {
  RunConfig cfg;
  cfg.out = out.string();
  cfg.seeds = {1, 2};
  cfg.train.hidden = {16};
  cfg.train.batch_size = 32;
  cfg.train.steps_per_epoch = 256;
  cfg.train.total_steps = 1024;
  cfg.train.eval_every = 512;
  cfg.train.eval_episodes = 4;
  cfg.train.ref_demos = 3;
  cfg.train.ref_epochs = 1;
  return cfg;
}

struct Shell {
  int code;
  std::string output;
};

Shell shell(const std::string& args) {
  const std::string cmd = std::string(VSCRL_CLI_BINARY) + " " + args + " 2>&1";
  Shell r{-1, {}};
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string usage_detail(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "usage-error");
    return e.what();
  }
  ADD_FAILURE() << "no usage error";
  return {};
}

}  // namespace

TEST(Config, DefaultsFollowTheHyperparameterTable) {
  const RunConfig c;
  EXPECT_EQ(c.train.batch_size, 256);
  EXPECT_EQ(c.train.total_steps, 200000);
  EXPECT_DOUBLE_EQ(c.train.discount, 0.99);
  EXPECT_DOUBLE_EQ(c.train.lr, 1e-3);
  EXPECT_EQ(c.train.hidden.size(), 2u);
  EXPECT_EQ(c.train.update_epochs_awr, 4);
  EXPECT_EQ(c.seeds.size(), 3u);
}

TEST(Config, RoundTripIsIdentity) {
  RunConfig c;
  c.command = "train-ppo";
  c.env = "multiroom-n4";
  c.generator = "limited";
  c.endpoint = "http://localhost:9/plan";
  c.seeds = {4, 5, 6, 7};
  c.parallel = true;
  c.train.beta = 0.1 + 0.2;  // not exactly representable in short decimal
  c.train.lr = 3e-4;
  c.train.hidden = {32, 16, 8};
  c.train.use_filter = false;
  c.train.buffer_capacity = 777;
  std::istringstream in(serialize_config(c));
  const RunConfig back = parse_config(in);
  EXPECT_TRUE(back == c);
  std::istringstream again(serialize_config(back));
  EXPECT_EQ(serialize_config(parse_config(again)), serialize_config(c));
}

TEST(Config, SerializedFormHasBothSections) {
  const std::string text = serialize_config(RunConfig{});
  EXPECT_NE(text.find("[defaults]"), std::string::npos);
  EXPECT_NE(text.find("[run]"), std::string::npos);
  EXPECT_NE(text.find("batch_size = 256"), std::string::npos);
}

TEST(Config, FileValuesOverrideDefaultsAndPartialFilesAreFine) {
  std::istringstream in("[defaults]\nbeta = 0.5\n[run]\nenv = multiroom-n6\nseeds = 9\n");
  const RunConfig c = parse_config(in);
  EXPECT_DOUBLE_EQ(c.train.beta, 0.5);
  EXPECT_EQ(c.env, "multiroom-n6");
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{9});
  EXPECT_EQ(c.train.batch_size, 256);
}

TEST(Config, UnknownKeyNamesTheKey) {
  std::istringstream in("[defaults]\nbogus = 1\n");
  EXPECT_NE(usage_detail([&] { parse_config(in); }).find("defaults.bogus"), std::string::npos);
  RunConfig c;
  EXPECT_NE(usage_detail([&] { set_value(c, "nope", "1"); }).find("nope"), std::string::npos);
}

TEST(Config, BadValueNamesTheKey) {
  std::istringstream in("[defaults]\nbatch_size = lots\n");
  EXPECT_NE(usage_detail([&] { parse_config(in); }).find("defaults.batch_size"), std::string::npos);
  RunConfig c;
  EXPECT_NE(usage_detail([&] { set_value(c, "lr", "1e-3x"); }).find("defaults.lr"), std::string::npos);
  EXPECT_NE(usage_detail([&] { set_value(c, "parallel", "maybe"); }).find("run.parallel"), std::string::npos);
}

TEST(Config, SetValueAcceptsQualifiedAndBareKeys) {
  RunConfig c;
  set_value(c, "defaults.beta", "2");
  set_value(c, "w_max", "7.5");
  set_value(c, "run.seeds", "3,1,2");
  EXPECT_DOUBLE_EQ(c.train.beta, 2.0);
  EXPECT_DOUBLE_EQ(c.train.w_max, 7.5);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 1, 2}));
}

TEST(Config, ValidationNamesTheOffendingKey) {
  RunConfig c;
  c.env = "maze";
  EXPECT_NE(usage_detail([&] { validate(c); }).find("run.env"), std::string::npos);
  c = RunConfig{};
  c.seeds.clear();
  EXPECT_NE(usage_detail([&] { validate(c); }).find("run.seeds"), std::string::npos);
  c = RunConfig{};
  c.generator = "oracle";
  EXPECT_NE(usage_detail([&] { validate(c); }).find("run.generator"), std::string::npos);
  c = RunConfig{};
  c.train.beta = -1.0;
  EXPECT_NE(usage_detail([&] { validate(c); }).find("defaults.beta"), std::string::npos);
}

TEST(Run, PlotOnEmptyDirectoryIsNoRunsFound) {
  const auto dir = scratch("empty");
  RunConfig c;
  c.command = "plot";
  c.metrics_dir = dir.string();
  c.out = (dir / "plots").string();
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kUsage);
  EXPECT_NE(err.str().find("no-runs-found"), std::string::npos);
}

TEST(Run, EvalWithZeroEpisodesIsUsageError) {
  RunConfig c;
  c.command = "eval";
  c.checkpoint = "whatever.ckpt";
  c.episodes = 0;
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kUsage);
  EXPECT_THROW(evaluate(c, "whatever.ckpt", 0, 1), Error);
}

TEST(Run, TabularIsNotTrainable) {
  RunConfig c;
  c.env = "tabular";
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kUsage);
}

TEST(Run, VerifyPasses) {
  RunConfig c;
  c.command = "verify";
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kOk);
  EXPECT_NE(out.str().find("prop2: 1000/1000 passed"), std::string::npos);
  EXPECT_NE(out.str().find("prop1: 100/100 passed"), std::string::npos);
}

TEST(Run, TrainWritesMetricsCheckpointsConfigAndPlot) {
  const auto dir = scratch("train");
  RunConfig c = tiny_train(dir);
  std::ostringstream out, err;
  ASSERT_EQ(run(c, out, err), kOk) << err.str();
  for (auto seed : c.seeds) {
    const auto run_dir = dir / "multiroom-n2" / "vscrl" / ("seed-" + std::to_string(seed));
    EXPECT_TRUE(fs::exists(run_dir / "policy.ckpt"));
    EXPECT_TRUE(fs::exists(run_dir / "reference.ckpt"));
    const auto recs = algo::read_metrics((run_dir / "metrics.jsonl").string());
    ASSERT_FALSE(recs.empty());
    EXPECT_GE(recs.back().env_steps, 1024);
    const RunConfig saved = load_config((run_dir / "config.ini").string());
    EXPECT_EQ(saved.train.seed, seed);
    EXPECT_EQ(saved.seeds, std::vector<std::uint64_t>{seed});
  }
  EXPECT_TRUE(fs::exists(dir / "multiroom-n2" / "curves.svg"));
  EXPECT_TRUE(fs::exists(dir / "multiroom-n2" / "curves.csv"));

  const auto ckpt = (dir / "multiroom-n2" / "vscrl" / "seed-1" / "policy.ckpt").string();
  const double s = evaluate(c, ckpt, 10, 1);
  EXPECT_GE(s, 0.0);
  EXPECT_LE(s, 1.0);

  RunConfig wrong = c;
  wrong.env = "multiroom-n4";
  try {
    evaluate(wrong, ckpt, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "incompatible-checkpoint");
  }
}

TEST(Plot, BandSpansSeedsAndSidecarMatches) {
  const auto dir = scratch("plot");
  for (int seed = 1; seed <= 3; ++seed) {
    const auto run_dir = dir / "ppo" / ("seed-" + std::to_string(seed));
    fs::create_directories(run_dir);
    std::ofstream f(run_dir / "metrics.jsonl");
    for (int k = 1; k <= 3; ++k) {
      algo::MetricsRecord r;
      r.epoch = k;
      r.env_steps = 1000 * k;
      r.eval_success = 0.1 * seed * k;
      f << algo::to_json(r).dump() << '\n';
    }
  }
  const auto curves = plot_runs(dir.string(), (dir / "curves").string());
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_EQ(curves[0].label, "ppo");
  EXPECT_EQ(curves[0].seeds, 3);
  ASSERT_EQ(curves[0].points.size(), 3u);
  EXPECT_NEAR(curves[0].points[1].mean, 0.4, 1e-12);
  EXPECT_NEAR(curves[0].points[1].lo, 0.2, 1e-12);
  EXPECT_NEAR(curves[0].points[1].hi, 0.6, 1e-12);
  std::ifstream csv(dir / "curves.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_NE(header.find("mean"), std::string::npos);
  std::ifstream svg(dir / "curves.svg");
  std::stringstream body;
  body << svg.rdbuf();
  EXPECT_NE(body.str().find("<svg"), std::string::npos);
  EXPECT_NE(body.str().find("<polygon"), std::string::npos);
}

TEST(Plot, MalformedMetricsRejected) {
  const auto dir = scratch("bad");
  fs::create_directories(dir / "m" / "seed-1");
  std::ofstream(dir / "m" / "seed-1" / "metrics.jsonl") << "{\"epoch\": 1}\n";
  try {
    plot_runs(dir.string(), (dir / "curves").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "malformed-metrics");
  }
}

TEST(Binary, VerifyExitsZero) {
  const auto r = shell("verify");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("prop1-guard: 20/20 passed"), std::string::npos);
}

TEST(Binary, UsageErrorsExitTwo) {
  const auto dir = scratch("bin");
  EXPECT_EQ(shell("plot --metrics " + dir.string() + " --out " + (dir / "p").string()).code, 2);
  EXPECT_EQ(shell("eval --checkpoint x.ckpt --episodes 0").code, 2);
  EXPECT_EQ(shell("train-vscrl --set no_such_key=1").code, 2);
  EXPECT_EQ(shell("train-vscrl --env maze --print-config").code, 0);
  EXPECT_NE(shell("").code, 0);
}

TEST(Binary, FlagsOverrideFileValues) {
  const auto dir = scratch("flags");
  std::ofstream(dir / "run.ini") << "[defaults]\nbeta = 0.5\nlr = 0.01\n[run]\nenv = multiroom-n4\nseeds = 1,2\n";
  const auto r = shell("train-ppo --config " + (dir / "run.ini").string() +
                       " --seed 7 --set lr=0.002 --print-config");
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream in(r.output);
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.command, "train-ppo");
  EXPECT_EQ(c.env, "multiroom-n4");
  EXPECT_DOUBLE_EQ(c.train.beta, 0.5);
  EXPECT_DOUBLE_EQ(c.train.lr, 0.002);
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{7});
}

TEST(Binary, RenderPrintsLayout) {
  const auto r = shell("render --env multiroom-n2 --seed 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("seed 3"), std::string::npos);
}
