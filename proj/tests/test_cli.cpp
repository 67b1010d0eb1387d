// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

#include "funnelforge/app.hpp"
#include "funnelforge/serialize.hpp"
#include "test_util.hpp"

using namespace funnelforge;
using io::Json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "funnelforge_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

app::Options options_for(const std::string& config, const fs::path& out) {
  app::Options o;
  o.config = config;
  o.out = out.string();
  return o;
}

// The example configuration with `edit` applied, written next to `dir`.
std::string edited_config(const fs::path& dir, const std::function<void(Json&)>& edit) {
  Json j = io::read_json_file(testutil::example_config_path());
  edit(j);
  const auto path = (dir / "config.json").string();
  io::write_file_atomic(path, io::dump(j));
  return path;
}

Json square_region(const std::string& name, const std::string& role, double cx, double cy, double h) {
  return {{"name", name},
          {"role", role},
          {"vertices", {{cx - h, cy - h}, {cx + h, cy - h}, {cx + h, cy + h}, {cx - h, cy + h}}}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Balanced elements, one root <svg>, no stray '&' or '<' in text.
bool well_formed_svg(const std::string& text, std::string& why) {
  std::string s = std::regex_replace(text, std::regex(R"(<\?xml[^>]*\?>)"), "");
  s = std::regex_replace(s, std::regex(R"(<!--[\s\S]*?-->)"), "");
  const std::regex tag(R"(<(/?)([A-Za-z][A-Za-z0-9:-]*)((?:\s+[A-Za-z_:][A-Za-z0-9_:.-]*="[^"<]*")*)\s*(/?)>)");
  std::vector<std::string> stack;
  int roots = 0;
  std::size_t pos = 0;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), tag); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const std::string between = s.substr(pos, static_cast<std::size_t>(m.position()) - pos);
    if (between.find('<') != std::string::npos) return why = "unparsed markup: " + between.substr(0, 60), false;
    if (std::regex_search(between, std::regex(R"(&(?!amp;|lt;|gt;|quot;|apos;))"))) return why = "raw '&'", false;
    pos = static_cast<std::size_t>(m.position() + m.length());
    const std::string name = m[2];
    if (m[1] == "/") {
      if (stack.empty() || stack.back() != name) return why = "mismatched </" + name + ">", false;
      stack.pop_back();
    } else if (m[4] != "/") {
      if (stack.empty()) ++roots;
      stack.push_back(name);
    } else if (stack.empty()) {
      return why = "self-closed element outside the root", false;
    }
  }
  if (s.find('<', pos) != std::string::npos) return why = "unparsed trailing markup", false;
  if (!stack.empty()) return why = "unclosed <" + stack.back() + ">", false;
  if (roots != 1) return why = "expected one root element", false;
  return text.find("<svg") != std::string::npos;
}

}  // namespace

TEST(ExitCodes, MapLibraryErrors) {
  EXPECT_EQ(app::exit_code_for(ErrorCode::Infeasible), app::kInfeasible);
  EXPECT_EQ(app::exit_code_for(ErrorCode::Unreachable), app::kInfeasible);
  EXPECT_EQ(app::exit_code_for(ErrorCode::MaxIterations), app::kPlanningFailed);
  EXPECT_EQ(app::exit_code_for(ErrorCode::UnsupportedFragment), app::kUnsupported);
  EXPECT_EQ(app::exit_code_for(ErrorCode::SyntaxError), app::kUnsupported);
  EXPECT_EQ(app::exit_code_for(ErrorCode::SafetyViolation), app::kMissionFailed);
  EXPECT_EQ(app::exit_code_for(ErrorCode::ParseError), app::kConfigError);
  EXPECT_EQ(app::exit_code_for(ErrorCode::IoError), app::kConfigError);
}

TEST(Synth, WritesPairFigureAndManifest) {
  const auto out = scratch("synth");
  std::ostringstream log;
  ASSERT_EQ(app::cmd_synth(options_for(testutil::example_config_path(), out), "a1", log), app::kOk) << log.str();
  ASSERT_TRUE(fs::exists(out / "bp_a1.json"));
  const auto bp = io::barrier_pair_from_json(io::read_json_file((out / "bp_a1.json").string()));
  EXPECT_EQ(bp.provenance.seed, 3u);
  EXPECT_EQ(bp.provenance.config_hash, config::config_hash(testutil::example_bundle()));
  const Json manifest = io::read_json_file((out / "manifest.json").string());
  EXPECT_EQ(manifest["command"], "synth");
  EXPECT_EQ(manifest["artifacts"].size(), 2u);
  std::string why;
  EXPECT_TRUE(well_formed_svg(slurp(out / "bp_a1.svg"), why)) << why;
}

TEST(Synth, UnreachableRegionIsInfeasible) {
  const auto out = scratch("synth_far");
  const auto cfg = edited_config(out, [](Json& j) {
    j["workspace"]["regions"].push_back(square_region("far", "task", 1.5, 0.0, 0.1));
  });
  std::ostringstream log;
  EXPECT_EQ(app::cmd_synth(options_for(cfg, out), "far", log), app::kInfeasible) << log.str();
  EXPECT_NE(log.str().find("Unreachable"), std::string::npos);
}

TEST(Synth, ConfigProblemsExitWithOne) {
  const auto out = scratch("synth_bad");
  std::ostringstream log;
  EXPECT_EQ(app::cmd_synth(options_for((out / "missing.json").string(), out), "a1", log), app::kConfigError);
  EXPECT_EQ(app::cmd_synth(options_for("", out), "a1", log), app::kConfigError);
  EXPECT_EQ(app::cmd_synth(options_for(testutil::example_config_path(), out), "nowhere", log), app::kConfigError);
  auto o = options_for(testutil::example_config_path(), out);
  o.epsilon = 0.5;
  EXPECT_EQ(app::cmd_synth(o, "a1", log), app::kConfigError);
  EXPECT_FALSE(fs::exists(out / "manifest.json"));
}

TEST(Plan, SameRegionGivesTwoPairChain) {
  const auto out = scratch("plan_same");
  std::ostringstream log;
  ASSERT_EQ(app::cmd_plan(options_for(testutil::example_config_path(), out), "a1", "a1", log), app::kOk) << log.str();
  const auto chain = io::chain_from_json(io::read_json_file((out / "chain_a1_a1.json").string()));
  EXPECT_EQ(chain.size(), 2u);
  const auto g = io::graph_from_json(io::read_json_file((out / "graph_a1_a1.json").string()));
  EXPECT_EQ(g.size(), 2u);
  std::string why;
  EXPECT_TRUE(well_formed_svg(slurp(out / "plan_a1_a1.svg"), why)) << why;

  std::ostringstream check_log;
  app::Options co;
  co.config = testutil::example_config_path();
  EXPECT_EQ(app::cmd_check(co, {(out / "chain_a1_a1.json").string(), (out / "graph_a1_a1.json").string(),
                                (out / "manifest.json").string()},
                           check_log),
            app::kOk)
      << check_log.str();
}

TEST(Plan, IterationBudgetExhaustedExitsWithThree) {
  const auto out = scratch("plan_budget");
  const auto cfg = edited_config(out, [](Json& j) { j["planner"]["max_iterations"] = 2; });
  std::ostringstream log;
  EXPECT_EQ(app::cmd_plan(options_for(cfg, out), "a0", "a2", log), app::kPlanningFailed) << log.str();
}

TEST(Run, UnsupportedFormulaExitsWithFour) {
  const auto out = scratch("run_unsupported");
  std::ostringstream log;
  auto cfg = edited_config(out, [](Json& j) { j["mission"]["ltl"] = "a0 && <>a1"; });
  EXPECT_EQ(app::cmd_run(options_for(cfg, out), log), app::kUnsupported) << log.str();
  cfg = edited_config(out, [](Json& j) { j["mission"]["ltl"] = "a0 && []<>a0 && []<>a1 && [](free U (a0 || a1)"; });
  EXPECT_EQ(app::cmd_run(options_for(cfg, out), log), app::kUnsupported) << log.str();
  cfg = edited_config(out, [](Json& j) { j["mission"]["ltl"] = "a0 && []<>a0 && []<>a9 && [](free U (a0 || a9))"; });
  EXPECT_NE(app::cmd_run(options_for(cfg, out), log), app::kOk) << log.str();
}

TEST(Simulate, StoredChainReachesItsGoal) {
  const auto out = scratch("simulate");
  std::ostringstream log;
  const auto opt = options_for(testutil::example_config_path(), out);
  ASSERT_EQ(app::cmd_plan(opt, "a1", "a1", log), app::kOk) << log.str();
  const auto sim_out = out / "sim";
  ASSERT_EQ(app::cmd_simulate(options_for(testutil::example_config_path(), sim_out),
                              (out / "chain_a1_a1.json").string(), "a1", std::nullopt, log),
            app::kOk)
      << log.str();
  EXPECT_TRUE(fs::exists(sim_out / "trace.csv"));
  const auto t = io::trace_from_json(io::read_json_file((sim_out / "trace.json").string()));
  EXPECT_NO_THROW(t.check());
  std::string why;
  EXPECT_TRUE(well_formed_svg(slurp(sim_out / "simulation.svg"), why)) << why;
}

TEST(Check, DetectsTamperingAndBrokenChains) {
  const auto out = scratch("check");
  std::ostringstream log;
  const auto opt = options_for(testutil::example_config_path(), out);
  ASSERT_EQ(app::cmd_synth(opt, "a1", log), app::kOk) << log.str();
  app::Options co;
  EXPECT_EQ(app::cmd_check(co, {(out / "bp_a1.json").string(), (out / "manifest.json").string()}, log), app::kOk)
      << log.str();

  std::ofstream(out / "bp_a1.svg", std::ios::app) << "<!-- edited -->\n";
  std::ostringstream tampered;
  EXPECT_EQ(app::cmd_check(co, {(out / "manifest.json").string()}, tampered), app::kCheckFailed);
  EXPECT_NE(tampered.str().find("hash mismatch"), std::string::npos);

  // Two copies of one pair far apart: the hand-off condition fails.
  auto bp = io::barrier_pair_from_json(io::read_json_file((out / "bp_a1.json").string()));
  Json far = io::barrier_pair_to_json(bp);
  Eigen::VectorXd q = bp.q_e();
  q[0] += 1.0;
  far["q_e"] = io::vector_to_json(q);
  const Json chain = {{"kind", "chain"}, {"pairs", {io::barrier_pair_to_json(bp), far}}};
  io::write_file_atomic((out / "chain.json").string(), io::dump(chain));
  std::ostringstream broken;
  EXPECT_EQ(app::cmd_check(co, {(out / "chain.json").string()}, broken), app::kCheckFailed) << broken.str();

  std::ostringstream unknown;
  io::write_file_atomic((out / "odd.json").string(), io::dump(Json{{"kind", "teapot"}}));
  EXPECT_EQ(app::cmd_check(co, {(out / "odd.json").string()}, unknown), app::kCheckFailed);
  io::write_file_atomic((out / "nokind.json").string(), "[]\n");
  EXPECT_EQ(app::cmd_check(co, {(out / "nokind.json").string()}, unknown), app::kConfigError);
  EXPECT_EQ(app::cmd_check(co, {}, unknown), app::kConfigError);
}
