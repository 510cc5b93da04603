#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "vscrl/subgoal_gen/remote.hpp"
#include "vscrl/subgoal_gen/scripted.hpp"

using namespace vscrl;
using namespace vscrl::subgoal_gen;

namespace {

std::vector<std::string> texts(const SubgoalPlan& p) {
  std::vector<std::string> out;
  for (const auto& sg : p.subgoals) out.push_back(sg.text);
  return out;
}

std::string invalid_reason(const SubgoalPlan& plan, const Goal& goal) {
  try {
    validate_plan(plan, goal);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "invalid-plan");
    return e.detail();
  }
  return "";
}

class MockEndpoint : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/plan", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      res.set_content("Here is the plan:\n1. open door 1\n2) open door 2\n3. reach the goal square\n", "text/plain");
    });
    server_.Post("/empty", [](const httplib::Request&, httplib::Response& res) { res.set_content("", "text/plain"); });
    server_.Post("/prose", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("I would rather not.", "text/plain");
    });
    server_.Post("/fail", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    server_.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(800));
      res.set_content("1. late\n", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::string last_body_;
  std::string last_auth_;
  Goal goal_ = envs::multiroom_goal(3, 60);
};

}  // namespace

TEST(Scripted, MultiRoomPlans) {
  const Goal g2 = envs::multiroom_goal(2, 40);
  const auto p2 = generate_scripted(g2, envs::EnvKind::multiroom_n2);
  EXPECT_EQ(texts(p2), (std::vector<std::string>{"open door 1", "reach the goal square"}));
  const Goal g6 = envs::multiroom_goal(6, 120);
  const auto p6 = generate_scripted(g6, envs::EnvKind::multiroom_n6);
  ASSERT_EQ(p6.size(), 6u);
  EXPECT_EQ(p6.subgoals.back().text, "reach the goal square");
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(p6.subgoals[i].index, static_cast<int>(i + 1));
  EXPECT_EQ(invalid_reason(p6, g6), "");
  EXPECT_EQ(texts(generate_scripted(g6, envs::EnvKind::multiroom_n6)), texts(p6));
}

TEST(Scripted, TabularIsIdentityAndUnknownFails) {
  const Goal g{"t", "tabular goal", 4, 0};
  const auto p = generate_scripted(g, envs::EnvKind::tabular);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.subgoals[0], identity_subgoal(g));
  try {
    generate_scripted(g, "atari");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-script");
  }
}

TEST(Validate, Rules) {
  const Goal g{"g", "goal", 3, 0};
  EXPECT_EQ(invalid_reason(identity_plan(g), g), "");
  EXPECT_EQ(invalid_reason(make_plan(g, {"a", "b", "c", "d"}, SubgoalSource::scripted, "x"), g), "N exceeds horizon");
  auto gap = make_plan(g, {"a", "b"}, SubgoalSource::scripted, "x");
  gap.subgoals[1].index = 3;
  EXPECT_EQ(invalid_reason(gap, g), "non-contiguous");
  EXPECT_EQ(invalid_reason(make_plan(g, {"a", " "}, SubgoalSource::scripted, "x"), g), "empty text");
  EXPECT_EQ(invalid_reason(SubgoalPlan{}, g), "empty plan");
  EXPECT_EQ(invalid_reason(make_plan(Goal{"other", "o", 3, 0}, {"a"}, SubgoalSource::scripted, "x"), g),
            "foreign parent goal");
}

TEST(Limited, KeepsEverySecondEndingWithLast) {
  const Goal g = envs::multiroom_goal(4, 80);
  const auto full = generate_scripted(g, envs::EnvKind::multiroom_n4);
  const auto lim = limited_plan(full);
  EXPECT_EQ(texts(lim), (std::vector<std::string>{"open door 2", "reach the goal square"}));
  EXPECT_EQ(invalid_reason(lim, g), "");
  const auto lim6 = limited_plan(generate_scripted(envs::multiroom_goal(6, 120), envs::EnvKind::multiroom_n6));
  EXPECT_EQ(lim6.size(), 3u);
  EXPECT_EQ(limited_plan(identity_plan(g)).size(), 1u);
}

TEST(Remote, ParseNumberedLines) {
  EXPECT_EQ(parse_numbered_lines("1. a\n2) b b\r\nnoise\n10. c\n3.missing space\n"),
            (std::vector<std::string>{"a", "b b", "c"}));
  EXPECT_TRUE(parse_numbered_lines("").empty());
}

TEST(Remote, PromptCarriesExamplesAndGoal) {
  SubgoalRequest req{envs::multiroom_goal(2, 40), "two rooms", {{"cross one door", {"open door 1", "walk"}}}};
  const auto prompt = build_prompt(req);
  EXPECT_NE(prompt.find("cross one door"), std::string::npos);
  EXPECT_NE(prompt.find("1. open door 1"), std::string::npos);
  EXPECT_NE(prompt.find(req.goal.text), std::string::npos);
  const auto body = request_body(req);
  EXPECT_EQ(body["goal_text"], req.goal.text);
  EXPECT_EQ(body["context"], "two rooms");
  EXPECT_EQ(body["few_shot"].size(), 1u);
}

TEST(Remote, FewShotFile) {
  const auto path = std::filesystem::temp_directory_path() / "vscrl_few_shot.jsonl";
  std::ofstream(path) << R"({"goal_text": "g1", "subgoals": ["a", "b"]})" << "\n\n"
                      << R"({"goal_text": "g2", "subgoals": ["c"]})" << "\n";
  const auto ex = load_few_shot(path.string());
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].subgoals, (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(load_few_shot("/nonexistent/file.jsonl"), Error);
}

TEST_F(MockEndpoint, ThreeLinesInOrderThenCached) {
  ::setenv("VSCRL_TEST_KEY", "sekrit", 1);
  RemoteGenerator gen({url("/plan"), 2000, "VSCRL_TEST_KEY"});
  const SubgoalRequest req{goal_, "", {}};
  const auto plan = gen.generate(req);
  EXPECT_EQ(texts(plan), (std::vector<std::string>{"open door 1", "open door 2", "reach the goal square"}));
  EXPECT_FALSE(plan.cached);
  EXPECT_EQ(plan.subgoals[0].source, SubgoalSource::remote);
  EXPECT_EQ(last_auth_, "Bearer sekrit");
  EXPECT_EQ(nlohmann::json::parse(last_body_)["goal_text"], goal_.text);
  const auto again = gen.generate(req);
  EXPECT_TRUE(again.cached);
  EXPECT_EQ(texts(again), texts(plan));
  EXPECT_EQ(hits_.load(), 1);
  gen.clear_cache();
  gen.generate(req);
  EXPECT_EQ(hits_.load(), 2);
  ::unsetenv("VSCRL_TEST_KEY");
}

TEST_F(MockEndpoint, ErrorContracts) {
  auto code_of = [&](const std::string& path, int timeout_ms) {
    RemoteGenerator gen({url(path), timeout_ms, ""});
    try {
      gen.generate({goal_, "", {}});
    } catch (const Error& e) {
      return e.code();
    }
    return std::string("ok");
  };
  EXPECT_EQ(code_of("/empty", 2000), "malformed-plan");
  EXPECT_EQ(code_of("/prose", 2000), "malformed-plan");
  EXPECT_EQ(code_of("/fail", 2000), "malformed-plan");
  EXPECT_EQ(code_of("/slow", 200), "generator-timeout");
  EXPECT_THROW(RemoteGenerator({"ftp://example", 100, ""}), Error);
}

TEST_F(MockEndpoint, FallbackChain) {
  RemoteGenerator good({url("/plan"), 2000, ""});
  EXPECT_EQ(generate_with_fallback(&good, {goal_, "", {}}, "multiroom-n2").generator, "remote");
  RemoteGenerator bad({url("/empty"), 2000, ""});
  const Goal g2 = envs::multiroom_goal(2, 40);
  const auto scripted = generate_with_fallback(&bad, {g2, "", {}}, "multiroom-n2");
  EXPECT_EQ(scripted.generator, "scripted");
  const auto ident = generate_with_fallback(&bad, {g2, "", {}}, "unknown-env");
  EXPECT_EQ(ident.generator, "identity");
  EXPECT_EQ(generate_with_fallback(nullptr, {g2, "", {}}, "multiroom-n2").generator, "scripted");
}
