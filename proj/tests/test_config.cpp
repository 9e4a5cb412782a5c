#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "bcall/config.hpp"
#include "bcall/error.hpp"

using namespace bcall;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughJson) {
  const auto s = load_config(nullptr, {});
  const auto j = to_json(s);
  EXPECT_DOUBLE_EQ(j.at("tau_i_ms").get<double>(), 30.0);
  EXPECT_DOUBLE_EQ(j.at("theta_w").get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(j.at("dt_ms").get<double>(), 0.1);
  EXPECT_EQ(j.at("inhibition").get<std::string>(), "coding_level");
  EXPECT_EQ(to_json(apply_json(s, j)), j);
  EXPECT_EQ(j.size(), param_registry().size());
}

TEST(Config, FlagErrorsNameTheKey) {
  EXPECT_EQ(field_of([] { load_config(nullptr, {{"theta_w", "1.5"}}); }), "theta_w");
  EXPECT_EQ(field_of([] { load_config(nullptr, {{"tau_i_ms", "abc"}}); }), "tau_i_ms");
  EXPECT_EQ(field_of([] { load_config(nullptr, {{"no_such_key", "1"}}); }), "no_such_key");
  EXPECT_EQ(field_of([] { load_config(nullptr, {{"n_class", "1.5"}}); }), "n_class");
  EXPECT_EQ(field_of([] { load_config(nullptr, {{"stop_learning", "maybe"}}); }), "stop_learning");
  EXPECT_EQ(field_of([] { load_config(nullptr, {{"inh_tau_mem_ms", "0"}}); }), "inh_tau_mem_ms");
}

TEST(Config, FlagOverridesFile) {
  const auto p = write_temp("bcall_cfg_a.json", R"({"f_a_hz": 20, "seed": 7})");
  const auto s = load_config(&p, {{"f_a_hz", "25"}});
  EXPECT_DOUBLE_EQ(s.sfnn().f_a_hz, 25.0);
  EXPECT_EQ(s.seed, 7u);
  const auto t = load_config(&p, {});
  EXPECT_DOUBLE_EQ(t.sfnn().f_a_hz, 20.0);
}

TEST(Config, ManifestConfigMemberIsAccepted) {
  const auto p = write_temp("bcall_cfg_b.json", R"({"subcommand": "rsnn", "config": {"tau_s_ms": 500}})");
  const auto s = load_config(&p, {});
  EXPECT_DOUBLE_EQ(s.plasticity.tau_s_s, 0.5);
}

TEST(Config, FileErrors) {
  const auto bad = write_temp("bcall_cfg_c.json", R"({"theta_w": )");
  EXPECT_THROW(load_config(&bad, {}), ParseError);
  const auto unknown = write_temp("bcall_cfg_d.json", R"({"bogus": 1})");
  EXPECT_EQ(field_of([&] { load_config(&unknown, {}); }), "bogus");
  const std::filesystem::path missing = "/nonexistent/bcall.json";
  EXPECT_THROW(load_config(&missing, {}), std::exception);
}

TEST(Config, ListsAndEnums) {
  const auto s = load_config(nullptr, {{"classes", "0,1"}, {"inhibition", "fixed"}, {"stop_learning", "false"}});
  const auto c = s.sfnn();
  EXPECT_EQ(c.classes, (std::vector<int>{0, 1}));
  EXPECT_EQ(c.inhibition, InhibitionMode::fixed);
  EXPECT_FALSE(c.stop_learning);
}

TEST(Config, SharedParametersReachExperiments) {
  const auto s = load_config(nullptr, {{"theta_u", "0.4"}, {"v_thr_mv", "-55"}, {"dt_ms", "0.05"}});
  EXPECT_DOUBLE_EQ(s.sfnn().plasticity.theta_u, 0.4);
  EXPECT_DOUBLE_EQ(s.rsnn().plasticity.theta_u, 0.4);
  EXPECT_DOUBLE_EQ(s.sfnn().neuron.v_thr_mv, -55.0);
  EXPECT_DOUBLE_EQ(s.rsnn().dt, 5e-5);
}

TEST(Registry, FlagsAndGroups) {
  for (const auto& e : param_registry()) {
    EXPECT_FALSE(e.group.empty()) << e.key;
    EXPECT_EQ(e.flag().substr(0, 2), "--");
    EXPECT_EQ(e.flag().find('_'), std::string::npos);
  }
}
