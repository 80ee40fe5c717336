#pragma once

// Root-raised-cosine pulse shaping, FTN waveform synthesis, matched filtering
// and sampled-autocorrelation (ISI) extraction on an integer oversampled grid.
//
// Time is normalized to T0 = 1. A symbol spaced every tau*T0 lands on the grid
// every round(tau*sps) samples; tau values that do not fall on the grid are
// rejected rather than resampled.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftn {

struct PulseSpec {
    double rolloff = 0.3;
    int sps = 10;  ///< samples per T0
    int span = 10; ///< one-sided pulse length in T0 units

    void validate() const
    {
        if (!(rolloff >= 0.0 && rolloff <= 1.0))
            throw std::invalid_argument("rolloff must lie in [0, 1], got " + std::to_string(rolloff));
        if (sps < 4)
            throw std::invalid_argument("sps must be >= 4");
        if (span < 4)
            throw std::invalid_argument("span must be >= 4");
    }
};

struct PulseTaps {
    std::vector<double> taps; ///< length 2*span*sps + 1, centre at index span*sps
    int sps = 0;
    int span = 0;
    double dt = 0.0;

    int centre() const { return span * sps; }
    std::size_t size() const { return taps.size(); }
    /// Tap at signed offset j from the centre.
    double at(int j) const { return taps[static_cast<std::size_t>(centre() + j)]; }
};

/// Sampled autocorrelation g(k*tau*T0) of the pulse.
struct IsiProfile {
    double tau = 1.0;
    int step = 0;           ///< grid samples per symbol, round(tau*sps)
    std::vector<double> g;  ///< g[0..L-1], significant one-sided taps
    std::vector<double> full; ///< every lag with nonzero pulse overlap, untruncated
    int L = 1;

    /// Interference coefficient at signed lag d; zero beyond the truncation.
    double at(int d) const
    {
        const int a = d < 0 ? -d : d;
        return a < L ? g[static_cast<std::size_t>(a)] : 0.0;
    }
};

struct SymbolFrame {
    std::vector<double> symbols;
    double Es = 1.0;
};

namespace detail {

inline double rrc_value(double t, double beta)
{
    constexpr double pi = std::numbers::pi;
    if (std::abs(t) < 1e-12)
        return 1.0 - beta + 4.0 * beta / pi;
    if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
        return beta / std::sqrt(2.0) *
               ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * beta)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * beta)));
    }
    const double x = 4.0 * beta * t;
    return (std::sin(pi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(pi * t * (1.0 + beta))) /
           (pi * t * (1.0 - x * x));
}

} // namespace detail

/// Unit-energy rRC impulse response truncated to +-span*T0.
inline PulseTaps rrc_taps(const PulseSpec& spec)
{
    spec.validate();
    PulseTaps p;
    p.sps = spec.sps;
    p.span = spec.span;
    p.dt = 1.0 / spec.sps;
    const int half = spec.span * spec.sps;
    p.taps.resize(static_cast<std::size_t>(2 * half + 1));
    for (int j = 0; j <= half; ++j) {
        const double v = detail::rrc_value(static_cast<double>(j) / spec.sps, spec.rolloff);
        p.taps[half + j] = v;
        p.taps[half - j] = v;
    }
    double energy = 0.0;
    for (double v : p.taps)
        energy += v * v;
    energy *= p.dt;
    const double scale = 1.0 / std::sqrt(energy);
    for (double& v : p.taps)
        v *= scale;
    return p;
}

/// Grid step for a symbol period tau*T0. Throws when tau*sps is not integral.
inline int symbol_step(double tau, int sps)
{
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::invalid_argument("tau must lie in (0, 1], got " + std::to_string(tau));
    const double exact = tau * sps;
    const long step = std::lround(exact);
    if (step < 1 || std::abs(exact - static_cast<double>(step)) > 1e-9)
        throw std::invalid_argument("tau = " + std::to_string(tau) + " is not a multiple of 1/sps (sps = " +
                                    std::to_string(sps) + ")");
    return static_cast<int>(step);
}

/// Pulse autocorrelation sampled at integer multiples of tau*T0.
/// L is the smallest k such that every |g[k']| for k' >= k is below
/// threshold * g[0].
inline IsiProfile isi_profile(const PulseTaps& taps, double tau, double threshold = 1e-3)
{
    IsiProfile prof;
    prof.tau = tau;
    prof.step = symbol_step(tau, taps.sps);
    const int n = static_cast<int>(taps.size());
    for (int k = 0; k * prof.step < n; ++k) {
        const int lag = k * prof.step;
        double acc = 0.0;
        for (int j = lag; j < n; ++j)
            acc += taps.taps[j] * taps.taps[j - lag];
        prof.full.push_back(acc * taps.dt);
    }
    const double ref = prof.full[0];
    int L = static_cast<int>(prof.full.size());
    while (L > 1 && std::abs(prof.full[L - 1]) < threshold * ref)
        --L;
    prof.L = L;
    prof.g.assign(prof.full.begin(), prof.full.begin() + L);
    return prof;
}

/// N x N ISI matrix, row-major. Uses the truncated taps unless `untruncated`.
inline std::vector<double> isi_matrix(const IsiProfile& isi, int N, bool untruncated = false)
{
    const auto& g = untruncated ? isi.full : isi.g;
    std::vector<double> G(static_cast<std::size_t>(N) * N, 0.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const auto d = static_cast<std::size_t>(std::abs(i - j));
            if (d < g.size())
                G[static_cast<std::size_t>(i) * N + j] = g[d];
        }
    return G;
}

/// BPSK mapping, bit 0 -> +1 and bit 1 -> -1.
inline SymbolFrame modulate_bpsk(std::span<const std::uint8_t> bits, double Es = 1.0)
{
    SymbolFrame f;
    f.Es = Es;
    f.symbols.reserve(bits.size());
    for (auto b : bits)
        f.symbols.push_back(b ? -1.0 : 1.0);
    return f;
}

/// Number of waveform samples occupied by an N-symbol frame.
inline std::size_t waveform_length(int N, const PulseTaps& taps, int step)
{
    if (N <= 0)
        return 0;
    return static_cast<std::size_t>((N - 1) * step) + taps.size();
}

/// sqrt(Es) * sum_n a[n] p(t - n tau T0) on the oversampled grid, zero-padded
/// by span*T0 on both sides.
inline std::vector<double> ftn_transmit(const SymbolFrame& frame, const PulseTaps& taps, double tau)
{
    const int step = symbol_step(tau, taps.sps);
    const int N = static_cast<int>(frame.symbols.size());
    std::vector<double> s(waveform_length(N, taps, step), 0.0);
    const double amp = std::sqrt(frame.Es);
    const std::size_t nt = taps.size();
    for (int n = 0; n < N; ++n) {
        const double a = amp * frame.symbols[n];
        double* out = s.data() + static_cast<std::size_t>(n) * step;
        for (std::size_t j = 0; j < nt; ++j)
            out[j] += a * taps.taps[j];
    }
    return s;
}

/// Matched filter followed by sampling at every tau*T0.
inline std::vector<double> matched_filter_sample(std::span<const double> waveform, const PulseTaps& taps, double tau,
                                                 int N)
{
    const int step = symbol_step(tau, taps.sps);
    if (waveform.size() != waveform_length(N, taps, step))
        throw std::invalid_argument("waveform has " + std::to_string(waveform.size()) + " samples, expected " +
                                    std::to_string(waveform_length(N, taps, step)) + " for " + std::to_string(N) +
                                    " symbols");
    std::vector<double> y(static_cast<std::size_t>(N), 0.0);
    const std::size_t nt = taps.size();
    for (int k = 0; k < N; ++k) {
        const double* w = waveform.data() + static_cast<std::size_t>(k) * step;
        double acc = 0.0;
        for (std::size_t j = 0; j < nt; ++j)
            acc += w[j] * taps.taps[j];
        y[k] = acc * taps.dt;
    }
    return y;
}

} // namespace ftn
