#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ftn/montecarlo.hpp"

using namespace ftn;

namespace {

double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

std::filesystem::path scratch()
{
    auto d = std::filesystem::temp_directory_path() / "ftn_test_montecarlo";
    std::filesystem::create_directories(d);
    return d;
}

std::string bin_code(int N, int M)
{
    const auto path = scratch() / ("bin_" + std::to_string(N) + ".alist");
    std::ofstream out(path);
    write_alist(out, generate_bin_pcm(N, M, 3, 7));
    return path.string();
}

std::string nb_code(int N, int M, int m)
{
    const auto path = scratch() / ("nb_" + std::to_string(N) + "_" + std::to_string(m) + ".alist");
    std::ofstream out(path);
    write_nb_alist(out, generate_nb_pcm(N, M, 2, build_field(m, default_primitive_poly(m)), 7));
    return path.string();
}

std::string to_csv(const SimConfig& cfg)
{
    Link link(cfg);
    std::vector<BerRecord> recs;
    for (std::size_t p = 0; p < cfg.ebn0_db.size(); ++p)
        recs.push_back(run_point(link, cfg.ebn0_db[p], p));
    std::ostringstream os;
    write_ber_csv(os, cfg, link, recs);
    return os.str();
}

} // namespace

TEST(MonteCarlo, UncodedNyquistMatchesQFunction)
{
    SimConfig cfg;
    cfg.tau = 1.0;
    cfg.detector = DetectorKind::Ssse;
    cfg.uncoded_length = 128;
    cfg.max_frames = 1500;
    cfg.target_frame_errors = 1500;
    for (double db : {2.0, 4.0}) {
        const auto r = run_point(cfg, db);
        const double p = qfunc(std::sqrt(2.0 * std::pow(10.0, db / 10.0)));
        const double n = double(r.frames) * 128;
        EXPECT_EQ(r.frames, 1500);
        EXPECT_LT(std::abs(r.ber - p), 3.0 * std::sqrt(p * (1 - p) / n)) << db << " dB: " << r.ber << " vs " << p;
    }
}

TEST(MonteCarlo, HighSnrIsErrorFree)
{
    SimConfig cfg;
    cfg.tau = 0.9;
    cfg.max_frames = 50;
    cfg.target_frame_errors = 1;
    const auto r = run_point(cfg, 60.0);
    EXPECT_EQ(r.frames, 50);
    EXPECT_EQ(r.bit_errors, 0);
    EXPECT_EQ(r.fer, 0.0);
    EXPECT_EQ(r.seconds, 0.0);
}

TEST(MonteCarlo, StopsAtFrameErrorTarget)
{
    SimConfig cfg;
    cfg.tau = 0.7;
    cfg.detector = DetectorKind::Ssse;
    cfg.max_frames = 10000;
    cfg.target_frame_errors = 7;
    const auto r = run_point(cfg, 0.0);
    EXPECT_EQ(r.frame_errors, 7);
    EXPECT_LE(r.frames, 10);
}

TEST(MonteCarlo, FrameSeedsAreDistinct)
{
    std::set<std::uint64_t> s;
    for (std::uint64_t p = 0; p < 4; ++p)
        for (std::uint64_t f = 0; f < 1000; ++f)
            s.insert(frame_seed(point_seed(11, p), f));
    EXPECT_EQ(s.size(), 4000u);
}

TEST(MonteCarlo, SameSeedSameCsv)
{
    SimConfig cfg;
    cfg.code = CodeKind::Ldpc;
    cfg.pcm_path = bin_code(128, 64);
    cfg.detector = DetectorKind::Gbk;
    cfg.ebn0_db = {2.0, 3.0};
    cfg.max_frames = 200;
    cfg.target_frame_errors = 20;
    cfg.seed = 99;
    const auto a = to_csv(cfg);
    EXPECT_EQ(a, to_csv(cfg));
    cfg.seed = 100;
    EXPECT_NE(a, to_csv(cfg));
}

TEST(MonteCarlo, WorkerCountDoesNotChangeResults)
{
    SimConfig cfg;
    cfg.code = CodeKind::NbLdpc;
    cfg.pcm_path = nb_code(20, 10, 6);
    cfg.tau = 0.8;
    cfg.detector = DetectorKind::Gbk;
    cfg.ebn0_db = {2.0, 3.5};
    cfg.max_frames = 150;
    cfg.target_frame_errors = 10;
    cfg.seed = 5;
    const auto one = to_csv(cfg);
    for (int w : {2, 3, 8}) {
        cfg.workers = w;
        EXPECT_EQ(one, to_csv(cfg)) << w << " workers";
    }
}

TEST(MonteCarlo, MbcjrDiscreteRuns)
{
    SimConfig cfg;
    cfg.code = CodeKind::Ldpc;
    cfg.pcm_path = bin_code(128, 64);
    cfg.tau = 0.8;
    cfg.channel = ChannelModel::Discrete;
    cfg.detector = DetectorKind::Mbcjr;
    cfg.M = 8;
    cfg.max_frames = 20;
    cfg.target_frame_errors = 20;
    Link link(cfg);
    EXPECT_GT(link.trellis_memory(), 0);
    const auto r = run_point(link, 8.0);
    EXPECT_EQ(r.frames, 20);
    EXPECT_EQ(r.bit_errors, 0);
    EXPECT_GE(r.avg_iters, 0.0);
    EXPECT_LE(r.avg_iters, cfg.max_iter);
}

TEST(MonteCarlo, OpsAccountIterations)
{
    SimConfig cfg;
    cfg.code = CodeKind::Ldpc;
    cfg.pcm_path = bin_code(128, 64);
    cfg.tau = 0.9;
    cfg.K = 1;
    cfg.max_frames = 64;
    cfg.target_frame_errors = 64;
    Link link(cfg);
    const auto r = run_point(link, 3.0);
    const GateWeights w;
    const double expect = w.cost(link.detector_ops()) + r.avg_iters * w.cost(link.decoder_ops());
    EXPECT_NEAR(w.cost(r.avg_ops), expect, 1e-6 * expect);
    // 64 degree-6 checks (the generator keeps rows near-regular)
    EXPECT_NEAR(link.decoder_ops().additions, 3.0 * 128, 1e-9);
    EXPECT_EQ(link.detector_ops(), DetectorCostModel::gbk_per_symbol(1, link.isi().L) * 128.0);
}

TEST(MonteCarlo, NbLinkCountsBitsOfSymbols)
{
    SimConfig cfg;
    cfg.code = CodeKind::NbLdpc;
    cfg.pcm_path = nb_code(20, 10, 6);
    Link link(cfg);
    EXPECT_EQ(link.symbols_per_frame(), 120);
    EXPECT_EQ(link.info_bits_per_frame(), 60);
    EXPECT_DOUBLE_EQ(link.rate(), 0.5);
}

TEST(MonteCarlo, CsvRoundTrip)
{
    SimConfig cfg;
    cfg.tau = 0.8;
    cfg.ebn0_db = {1.0, 2.5, 4.0};
    cfg.max_frames = 100;
    cfg.target_frame_errors = 10;
    const auto text = to_csv(cfg);
    EXPECT_NE(text.find("rolloff=0.3"), std::string::npos);
    EXPECT_NE(text.find("sps=10"), std::string::npos);
    EXPECT_NE(text.find("seed=1"), std::string::npos);
    std::istringstream in(text);
    const auto recs = read_ber_csv(in);
    ASSERT_EQ(recs.size(), 3u);
    std::ostringstream again;
    write_ber_csv(again, cfg, Link(cfg), recs);
    EXPECT_EQ(again.str(), text);
}

TEST(MonteCarlo, CsvRejectsBadInput)
{
    std::istringstream no_header("1,2,3\n");
    EXPECT_THROW(read_ber_csv(no_header), ParseError);
    std::istringstream short_row(std::string(ber_csv_header) + "\n1,2,3\n");
    try {
        read_ber_csv(short_row);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
    }
}

TEST(MonteCarlo, SnrAtBer)
{
    auto rec = [](double db, double ber) {
        BerRecord r;
        r.ebn0_db = db;
        r.ber = ber;
        return r;
    };
    const std::vector<BerRecord> c{rec(1, 1e-1), rec(2, 1e-2), rec(3, 1e-4)};
    EXPECT_NEAR(*snr_at_ber(c, 1e-2), 2.0, 1e-12);
    EXPECT_NEAR(*snr_at_ber(c, 1e-3), 2.5, 1e-12);
    EXPECT_NEAR(*snr_at_ber(c, std::sqrt(1e-3)), 1.5, 1e-12);
    EXPECT_FALSE(snr_at_ber(c, 1e-6).has_value());
    const std::vector<BerRecord> z{rec(1, 1e-2), rec(2, 0.0)};
    EXPECT_EQ(*snr_at_ber(z, 1e-3), 2.0);
}

TEST(MonteCarlo, ValidationNamesTheField)
{
    SimConfig cfg;
    cfg.code = CodeKind::Ldpc;
    try {
        cfg.validate();
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_EQ(std::string(e.what()).rfind("pcm:", 0), 0u);
    }
    cfg = SimConfig{};
    cfg.tau = 0.75;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    cfg.target_frame_errors = 10;
    cfg.max_frames = 5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(MonteCarlo, SweepNeedsPoints)
{
    SimConfig cfg;
    EXPECT_THROW(sweep(cfg), std::invalid_argument);
    cfg.ebn0_db = {5.0};
    cfg.max_frames = 10;
    cfg.target_frame_errors = 10;
    EXPECT_EQ(sweep(cfg).size(), 1u);
}
