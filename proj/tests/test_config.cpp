#include "ledmaint/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace ledmaint;

TEST(Config, DefaultsMatchStudyTable) {
    const RunConfig c;
    EXPECT_EQ(c.s_e, 500.0);
    EXPECT_EQ(c.s_u, 0.6);
    EXPECT_EQ(c.t_over_days, 18250.0);
    EXPECT_EQ(c.runs, 10000u);
    EXPECT_EQ(c.alpha, 0.05);
    EXPECT_EQ(c.t_pm.values().size(), 50u);
    EXPECT_EQ(c.t_pm.values().back(), 18250.0);
    const auto h = c.h_om.values();
    ASSERT_EQ(h.size(), 20u);
    EXPECT_EQ(h.front(), 0.05);
    EXPECT_EQ(h[6], 0.35);
    EXPECT_EQ(h.back(), 1.0);
    EXPECT_EQ(c.scenario.driver, (WeibullModel{21.82, 2818.09}));
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, NamedScenarios) {
    EXPECT_EQ(named_scenario("S2").driver, (WeibullModel{25.61, 3301.09}));
    EXPECT_EQ(named_scenario("S3").driver, (WeibullModel{17.91, 2342.09}));
    EXPECT_THROW(named_scenario("S4"), ConfigError);
    RunConfig c;
    apply_scenario(c, "S3");
    EXPECT_EQ(c.scenario.name, "S3");
    EXPECT_EQ(bundle_skeleton(c).fleet.driver, (WeibullModel{17.91, 2342.09}));
}

TEST(Config, DeskPreset) {
    RunConfig c;
    apply_desk_preset(c);
    EXPECT_EQ(c.runs, 200u);
    EXPECT_EQ(c.t_over_days, 7300.0);
    EXPECT_EQ(c.t_pm.values().size(), 5u);
    EXPECT_EQ(c.h_om.values().size(), 5u);
    EXPECT_EQ(c.n_path, 20u);
    EXPECT_EQ(c.n_ps, 10u);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParseOverridesAndRoundTrip) {
    const RunConfig c = parse_config(
        "[run]\nseed = 7\n"
        "[requirements]\ns_e = 450\n"
        "[grid]\nt_pm = 730:730:3650\nh_om = 0.1:0.3:1.0\n"
        "[scenario]\nname = S2\n"
        "[calibration]\ntest_temps_k = 330.15, 370.15\ntrue_b = 0.9\n"
        "[simulation]\nseed_mode = common\nkeep_traces = true\n");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.s_e, 450.0);
    EXPECT_EQ(c.t_pm.values(), (std::vector<double>{730, 1460, 2190, 2920, 3650}));
    EXPECT_EQ(c.h_om.values(), (std::vector<double>{0.1, 0.4, 0.7, 1.0}));
    EXPECT_EQ(c.scenario.name, "S2");
    EXPECT_EQ(c.test_temps_k, (std::vector<double>{330.15, 370.15}));
    EXPECT_EQ(c.true_theta.b, 0.9);
    EXPECT_EQ(evaluation_options(c).seed_mode, SeedMode::common);
    EXPECT_TRUE(c.keep_traces);

    const RunConfig back = parse_config(serialize_config(c));
    EXPECT_TRUE(back == c);
    EXPECT_EQ(config_hash(back), config_hash(c));
    RunConfig d;
    EXPECT_TRUE(parse_config(serialize_config(d)) == d);
    EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(Config, ErrorsNameTheField) {
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("[run]\nbogus = 1\n").find("run.bogus"), std::string::npos);
    EXPECT_NE(message("[requirements]\ns_u = high\n").find("requirements.s_u"), std::string::npos);
    EXPECT_NE(message("[requirements]\ns_u = 1.5\n").find("s_u"), std::string::npos);
    EXPECT_NE(message("[grid]\nt_pm = 1:2\n").find("grid.t_pm"), std::string::npos);
    EXPECT_NE(message("[scenario]\nname = S9\n").find("S9"), std::string::npos);
    EXPECT_NE(message("[optimizer]\ntopology = ring\n").find("topology"), std::string::npos);
    EXPECT_NE(message("[simulation]\nruns = -3\n").find("simulation.runs"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/ledmaint.ini"), ConfigError);
}

TEST(Config, ResolveAgainstOutputDir) {
    RunConfig c;
    c.output_dir = "/tmp/o";
    EXPECT_EQ(c.resolve("draws.csv"), std::filesystem::path("/tmp/o/draws.csv"));
    EXPECT_EQ(c.resolve("/abs/x.csv"), std::filesystem::path("/abs/x.csv"));
}

TEST(Config, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "ledmaint_test_config.ini";
    {
        std::ofstream(path) << "[policy]\nt_pm = 1460\nh_om = 0.4\n";
    }
    const RunConfig c = load_config(path);
    EXPECT_EQ(c.policy_t_pm, 1460.0);
    EXPECT_EQ(c.policy_h_om, 0.4);
    std::filesystem::remove(path);
}
