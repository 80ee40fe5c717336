#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ftn/config.hpp"

using namespace ftn;
using nlohmann::json;

namespace {

std::filesystem::path scratch()
{
    auto d = std::filesystem::temp_directory_path() / "ftn_test_config";
    std::filesystem::create_directories(d / "codes");
    std::ofstream(d / "codes" / "b.alist") << [] {
        std::ostringstream os;
        write_alist(os, generate_bin_pcm(32, 16, 3, 1));
        return os.str();
    }();
    return d;
}

std::string error_of(const json& doc, const std::filesystem::path& src = {})
{
    try {
        parse_experiment(doc, src);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, DefaultsMergeIntoSimulations)
{
    const auto doc = json::parse(R"({
        "defaults": {"tau": 0.9, "ebn0_db": [1, 2], "max_frames": 500},
        "simulations": [
            {"name": "a"},
            {"name": "b", "tau": 0.7, "detector": "mbcjr", "M": 16, "ems": {"n_m": 12}}
        ]})");
    const auto ex = parse_experiment(doc);
    ASSERT_EQ(ex.sims.size(), 2u);
    EXPECT_EQ(ex.sims[0].tau, 0.9);
    EXPECT_EQ(ex.sims[0].ebn0_db, (std::vector<double>{1, 2}));
    EXPECT_EQ(ex.sims[1].tau, 0.7);
    EXPECT_EQ(ex.sims[1].max_frames, 500);
    EXPECT_EQ(ex.sims[1].detector, DetectorKind::Mbcjr);
    EXPECT_EQ(ex.sims[1].ems.n_m, 12);
    EXPECT_EQ(ex.sims[1].ems.bubbles, 4);
    EXPECT_FALSE(ex.sims[0].report_timing);
    EXPECT_EQ(ex.sims[1].scheme(), "uncoded+mbcjr16");
}

TEST(Config, UnknownKeysAreRejected)
{
    EXPECT_NE(error_of(json::parse(R"({"simulations": [{"name": "a", "ebn0_db": [1], "taus": 0.8}]})"))
                  .find("simulations[0]: unknown field 'taus'"),
              std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"bogus": 1, "simulations": []})")).find("bogus"), std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"simulations": [{"ebn0_db": [1], "ems": {"nm": 3}}]})")).find("ems"),
              std::string::npos);
}

TEST(Config, ErrorsNameTheField)
{
    EXPECT_NE(error_of(json::parse(R"({"simulations": [{"ebn0_db": [1], "code": "ldpc"}]})")).find(".pcm"),
              std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"simulations": [{"ebn0_db": [1], "tau": "fast"}]})")).find(".tau"),
              std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"simulations": [{"ebn0_db": [1], "workers": 0}]})")).find("workers"),
              std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"simulations": [{"name": "x"}]})")).find("ebn0_db"), std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"simulations": [{"ebn0_db": [1], "code": "ldpc", "pcm": "/nope.alist"}]})"))
                  .find("pcm: file not found"),
              std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"simulations": [{"ebn0_db": [1]}, {"ebn0_db": [2]}]})")).find("duplicate"),
              std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"simulations": []})")).find("simulations"), std::string::npos);
}

TEST(Config, RelativePcmResolvesAgainstConfigDir)
{
    const auto dir = scratch();
    const auto src = dir / "exp.json";
    std::ofstream(src) << R"({
        // comments are allowed
        "out_dir": "out",
        "simulations": [{"name": "l", "code": "ldpc", "pcm": "codes/b.alist", "ebn0_db": [3]}]
    })";
    const auto ex = load_experiment(src);
    EXPECT_EQ(ex.sims[0].pcm_path, (dir / "codes" / "b.alist").string());
    EXPECT_EQ(ex.out_dir, (dir / "out").string());
    EXPECT_NO_THROW(Link(ex.sims[0]));
}

TEST(Config, ComplexityBlock)
{
    const auto doc = json::parse(R"({
        "simulations": [{"name": "a", "ebn0_db": [3]}, {"name": "b", "ebn0_db": [3]}],
        "complexity": {"schemes": ["a", "b"], "weights": {"bits": 16, "xor": 2}}})");
    const auto ex = parse_experiment(doc);
    ASSERT_TRUE(ex.complexity);
    EXPECT_EQ(ex.complexity->weights.add, 16.0);
    EXPECT_EQ(ex.complexity->weights.xor_gate, 2.0);
    EXPECT_EQ(ex.complexity->output, "complexity.csv");
    auto bad = doc;
    bad["complexity"]["schemes"] = {"a", "zzz"};
    EXPECT_NE(error_of(bad).find("zzz"), std::string::npos);
    bad["complexity"]["weights"] = {{"add", -1}};
    bad["complexity"]["schemes"] = {"a"};
    EXPECT_NE(error_of(bad).find("positive"), std::string::npos);
}

TEST(Config, UnreadableFile)
{
    EXPECT_THROW(load_experiment("/nonexistent/exp.json"), ConfigError);
    const auto p = scratch() / "broken.json";
    std::ofstream(p) << "{ not json";
    EXPECT_THROW(load_experiment(p), ConfigError);
}

TEST(Config, FullBudget)
{
    SimConfig c;
    apply_full_budget(c);
    EXPECT_EQ(c.target_frame_errors, 100);
    EXPECT_EQ(c.max_frames, 500000);
}
