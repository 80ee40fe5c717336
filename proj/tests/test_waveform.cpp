#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ftn/waveform.hpp"

using namespace ftn;

namespace {

// Autocorrelation at lag `lag` samples, computed directly from the taps.
double autocorr(const PulseTaps& p, int lag)
{
    double acc = 0.0;
    const int half = p.centre();
    for (int j = -half; j <= half; ++j) {
        const int k = j - lag;
        if (k >= -half && k <= half)
            acc += p.at(j) * p.at(k);
    }
    return acc * p.dt;
}

std::vector<double> random_symbols(int n, std::mt19937_64& rng)
{
    std::bernoulli_distribution b(0.5);
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& v : a)
        v = b(rng) ? 1.0 : -1.0;
    return a;
}

} // namespace

TEST(Waveform, RrcUnitEnergyAndSymmetry)
{
    for (double beta : {0.0, 0.22, 0.3, 0.5, 1.0}) {
        const auto p = rrc_taps({beta, 10, 8});
        EXPECT_EQ(p.size(), 161u);
        double e = 0.0;
        for (double v : p.taps)
            e += v * v;
        EXPECT_NEAR(e * p.dt, 1.0, 1e-9);
        for (int j = 0; j <= p.centre(); ++j)
            EXPECT_EQ(p.at(j), p.at(-j));
        for (double v : p.taps)
            EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(Waveform, RrcSingularPointsUseLimits)
{
    // t = T0/(4*beta) lands on the grid for beta = 0.25, sps = 10 (t = 1.0).
    const auto p = rrc_taps({0.25, 10, 6});
    const double left = p.at(9), mid = p.at(10), right = p.at(11);
    EXPECT_TRUE(std::isfinite(mid));
    EXPECT_LT(std::abs(mid - 0.5 * (left + right)), 0.05);
}

TEST(Waveform, RrcRejectsBadRolloff)
{
    EXPECT_THROW(rrc_taps({-0.1, 10, 8}), std::invalid_argument);
    EXPECT_THROW(rrc_taps({1.1, 10, 8}), std::invalid_argument);
    EXPECT_THROW(rrc_taps({0.3, 2, 8}), std::invalid_argument);
}

TEST(Waveform, NyquistAtIntegerLagsDefaultPulse)
{
    // Default pulse: rolloff 0.3, sps 10, span 10.
    const auto p = rrc_taps({});
    for (int k = 1; k < 2 * p.span; ++k)
        EXPECT_LT(std::abs(autocorr(p, k * p.sps)), 1e-3) << "k=" << k;
}

TEST(Waveform, SpanEightTruncationLeavesVisibleResidualIsi)
{
    // Numeric autocorrelation of the span-8 truncation peaks at 3.29e-3 (lag 8 T0).
    const auto p = rrc_taps({0.3, 10, 8});
    double worst = 0.0;
    for (int k = 1; k < 2 * p.span; ++k)
        worst = std::max(worst, std::abs(autocorr(p, k * p.sps)));
    EXPECT_NEAR(worst, 3.2946e-3, 1e-6);
}

TEST(Waveform, IsiProfileTauOne)
{
    const auto p = rrc_taps({});
    const auto isi = isi_profile(p, 1.0, 1e-3);
    EXPECT_NEAR(isi.g[0], 1.0, 1e-6);
    EXPECT_EQ(isi.L, 1);
    for (std::size_t k = 1; k < isi.full.size(); ++k)
        EXPECT_LT(std::abs(isi.full[k]), 1e-3);
}

TEST(Waveform, IsiProfileMatchesAutocorrelationOracle)
{
    const auto p = rrc_taps({0.3, 10, 10});
    const auto isi = isi_profile(p, 0.8, 1e-3);
    EXPECT_EQ(isi.step, 8);
    for (std::size_t k = 0; k < isi.full.size(); ++k)
        EXPECT_NEAR(isi.full[k], autocorr(p, int(k) * 8), 1e-12);
    EXPECT_NEAR(isi.g[0], 1.0, 1e-6);
    // Main lobe decays with an alternating tail.
    EXPECT_GT(isi.g[1], 0.0);
    EXPECT_GT(isi.g[1], std::abs(isi.g[2]));
    EXPECT_LT(isi.g[2], 0.0);
    EXPECT_GT(isi.g[3], 0.0);
    EXPECT_GT(std::abs(isi.g[2]), std::abs(isi.g[3]));
    EXPECT_NEAR(isi.g[1], 0.2216, 5e-4);
}

TEST(Waveform, IsiProfileTruncationPostcondition)
{
    const auto p = rrc_taps({});
    for (double tau : {0.6, 0.7, 0.8, 0.9, 1.0}) {
        const auto isi = isi_profile(p, tau, 1e-3);
        ASSERT_EQ(int(isi.g.size()), isi.L);
        for (std::size_t k = isi.L; k < isi.full.size(); ++k)
            EXPECT_LT(std::abs(isi.full[k]), 1e-3);
        EXPECT_GE(std::abs(isi.g[isi.L - 1]), isi.L > 1 ? 1e-3 : 0.0);
        for (double v : isi.g)
            EXPECT_LE(std::abs(v), isi.g[0]);
        EXPECT_LE(double(isi.full.size() - 1), 2.0 * p.span / tau + 1e-9);
    }
}

TEST(Waveform, RejectsOffGridTau)
{
    const auto p = rrc_taps({});
    EXPECT_THROW(isi_profile(p, 0.75, 1e-3), std::invalid_argument);
    EXPECT_THROW(isi_profile(p, 0.0, 1e-3), std::invalid_argument);
    EXPECT_THROW(isi_profile(p, 1.2, 1e-3), std::invalid_argument);
    EXPECT_NO_THROW(isi_profile(rrc_taps({0.3, 20, 8}), 0.75, 1e-3));
}

TEST(Waveform, ModulateBpsk)
{
    const std::vector<std::uint8_t> bits{0, 1, 0};
    EXPECT_EQ(modulate_bpsk(bits).symbols, (std::vector<double>{1, -1, 1}));
    EXPECT_TRUE(modulate_bpsk(std::vector<std::uint8_t>{}).symbols.empty());
    const std::vector<std::uint8_t> zeros(16, 0);
    for (double s : modulate_bpsk(zeros).symbols)
        EXPECT_EQ(s, 1.0);
}

TEST(Waveform, SingleSymbolIsThePulse)
{
    const auto p = rrc_taps({});
    const auto s = ftn_transmit({{1.0}, 1.0}, p, 0.8);
    ASSERT_EQ(s.size(), p.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        EXPECT_DOUBLE_EQ(s[i], p.taps[i]);
}

TEST(Waveform, NyquistMatchedFilterRecoversSymbols)
{
    const auto p = rrc_taps({});
    const SymbolFrame f{{1.0, -1.0}, 2.0};
    const auto y = matched_filter_sample(ftn_transmit(f, p, 1.0), p, 1.0, 2);
    EXPECT_NEAR(y[0], std::sqrt(2.0), 1e-3);
    EXPECT_NEAR(y[1], -std::sqrt(2.0), 1e-3);
}

TEST(Waveform, TransmitEnergyIsIsiQuadraticForm)
{
    const auto p = rrc_taps({});
    const auto isi = isi_profile(p, 0.7, 1e-3);
    std::mt19937_64 rng(3);
    const int N = 8;
    const SymbolFrame f{random_symbols(N, rng), 1.5};
    const auto s = ftn_transmit(f, p, 0.7);
    double e = 0.0;
    for (double v : s)
        e += v * v;
    e *= p.dt;
    const auto G = isi_matrix(isi, N, true);
    double quad = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            quad += f.symbols[i] * G[i * N + j] * f.symbols[j];
    EXPECT_NEAR(e, f.Es * quad, 1e-9);
}

TEST(Waveform, DiscreteModelEquivalence)
{
    const auto p = rrc_taps({});
    std::mt19937_64 rng(11);
    for (double tau : {0.7, 0.8, 0.9, 1.0}) {
        const auto isi = isi_profile(p, tau, 1e-3);
        const int N = 16;
        const SymbolFrame f{random_symbols(N, rng), 1.0};
        const auto y = matched_filter_sample(ftn_transmit(f, p, tau), p, tau, N);
        const auto Gfull = isi_matrix(isi, N, true);
        const auto Gtrunc = isi_matrix(isi, N, false);
        double dropped = 0.0;
        for (std::size_t k = isi.L; k < isi.full.size(); ++k)
            dropped += 2.0 * std::abs(isi.full[k]);
        for (int i = 0; i < N; ++i) {
            double full = 0.0, trunc = 0.0;
            for (int j = 0; j < N; ++j) {
                full += Gfull[i * N + j] * f.symbols[j];
                trunc += Gtrunc[i * N + j] * f.symbols[j];
            }
            EXPECT_NEAR(y[i], full, 1e-12);
            EXPECT_NEAR(y[i], trunc, dropped + 1e-12);
        }
    }
}

TEST(Waveform, ZeroWaveformGivesZeroSamples)
{
    const auto p = rrc_taps({});
    std::vector<double> w(waveform_length(5, p, 8), 0.0);
    for (double v : matched_filter_sample(w, p, 0.8, 5))
        EXPECT_EQ(v, 0.0);
    w.pop_back();
    EXPECT_THROW(matched_filter_sample(w, p, 0.8, 5), std::invalid_argument);
}

TEST(Waveform, IsiMatrixSymmetricBandedPsd)
{
    const auto p = rrc_taps({});
    for (double tau : {0.7, 0.8, 0.9}) {
        const auto isi = isi_profile(p, tau, 1e-3);
        for (bool full : {false, true}) {
            const int N = 64;
            auto G = isi_matrix(isi, N, full);
            const int band = full ? int(isi.full.size()) - 1 : isi.L - 1;
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    EXPECT_EQ(G[i * N + j], G[j * N + i]);
                    if (std::abs(i - j) > band) {
                        EXPECT_EQ(G[i * N + j], 0.0);
                    }
                }
            if (!full && tau < 0.75)
                continue; // the truncated strong-ISI matrix is slightly indefinite
            for (int i = 0; i < N; ++i)
                G[i * N + i] += 1e-9;
            // Dense Cholesky must succeed.
            bool ok = true;
            for (int j = 0; j < N && ok; ++j) {
                double d = G[j * N + j];
                for (int k = 0; k < j; ++k)
                    d -= G[j * N + k] * G[j * N + k];
                if (d <= 0.0) {
                    ok = false;
                    break;
                }
                d = std::sqrt(d);
                G[j * N + j] = d;
                for (int i = j + 1; i < N; ++i) {
                    double s = G[i * N + j];
                    for (int k = 0; k < j; ++k)
                        s -= G[i * N + k] * G[j * N + k];
                    G[i * N + j] = s / d;
                }
            }
            EXPECT_TRUE(ok) << "tau=" << tau << " full=" << full;
        }
    }
}
