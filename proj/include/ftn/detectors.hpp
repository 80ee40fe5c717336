#pragma once

// FTN symbol detectors operating on matched-filter samples y taken every tau*T0.
//
//  * ssse_detect   successive symbol-by-symbol estimation with causal ISI cancellation
//  * gbk_detect    the go-back-K refinement: after each new decision the previous
//                  K symbols are re-decided using the newest estimates on both sides
//  * demod_soft    residual-based bit LLRs for the two hard-decision detectors
//  * mbcjr_detect  reduced-state (M-algorithm) BCJR over the whitened ISI trellis
//
// All LLRs are log P(bit 0) / P(bit 1), i.e. positive favours symbol +1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftn/channel.hpp"
#include "ftn/waveform.hpp"

namespace ftn {

inline double quantize_bpsk(double x) { return x >= 0.0 ? 1.0 : -1.0; }

struct GbkConfig {
    int K = 1;
    int L = 1;

    /// Clamps K to the ISI extent of `isi`.
    static GbkConfig make(int K, const IsiProfile& isi)
    {
        if (K < 0)
            throw std::invalid_argument("go-back depth K must be >= 0");
        return {std::min(K, isi.L), isi.L};
    }
};

inline std::vector<double> ssse_detect(std::span<const double> y, const IsiProfile& isi, double Es)
{
    const double amp = std::sqrt(Es);
    const int N = static_cast<int>(y.size());
    std::vector<double> a(static_cast<std::size_t>(N), 0.0);
    for (int k = 0; k < N; ++k) {
        double r = y[k];
        for (int j = 1; j < isi.L && k - j >= 0; ++j)
            r -= amp * isi.g[j] * a[k - j];
        a[k] = quantize_bpsk(r);
    }
    return a;
}

inline std::vector<double> gbk_detect(std::span<const double> y, const IsiProfile& isi, double Es,
                                      const GbkConfig& cfg)
{
    const double amp = std::sqrt(Es);
    const int N = static_cast<int>(y.size());
    const int L = isi.L;
    const int K = std::min(cfg.K, L);
    std::vector<double> a(static_cast<std::size_t>(N), 0.0);
    for (int k = 0; k < N; ++k) {
        double r = y[k];
        for (int j = 1; j < L && k - j >= 0; ++j)
            r -= amp * isi.g[j] * a[k - j];
        a[k] = quantize_bpsk(r);

        // Re-decide k-K .. k-1; symbols after k are not yet known and count as zero.
        for (int i = std::max(0, k - K); i < k; ++i) {
            double x = y[i];
            for (int j = 1; j < L; ++j) {
                if (i - j >= 0)
                    x -= amp * isi.g[j] * a[i - j];
                if (i + j <= k)
                    x -= amp * isi.g[j] * a[i + j];
            }
            a[i] = quantize_bpsk(x);
        }
    }
    return a;
}

inline constexpr double default_llr_cap = 30.0;

/// Bit LLRs from the interference-cancelled residual of each sample.
inline std::vector<double> demod_soft(std::span<const double> hard, std::span<const double> y, const IsiProfile& isi,
                                      double Es, double N0, double llr_cap = default_llr_cap)
{
    const double amp = std::sqrt(Es);
    const int N = static_cast<int>(y.size());
    const double scale = 2.0 * amp / (N0 / 2.0 * isi.g[0]);
    std::vector<double> llr(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        double r = y[k];
        for (int j = 1; j < isi.L; ++j) {
            if (k - j >= 0)
                r -= amp * isi.g[j] * hard[k - j];
            if (k + j < N)
                r -= amp * isi.g[j] * hard[k + j];
        }
        llr[k] = std::clamp(scale * r, -llr_cap, llr_cap);
    }
    return llr;
}

// ---------------------------------------------------------------------------
// Whitened trellis model

/// Colour-removing front end for the trellis detector. With G = C C^T and
/// U = J C J (J the exchange matrix), z = U^{-1} y has white noise of variance
/// N0/2 and a causal, time-varying ISI response z_k = sqrt(Es) sum_d h_k[d] a_{k-d}.
class WhitenedModel {
public:
    WhitenedModel(const IsiProfile& isi, int N, double threshold = 1e-3, int max_memory = 20)
        : N_(N), chan_(isi, N)
    {
        const int band = chan_.bandwidth();
        const int w = band + 1;
        const auto& C = chan_.factor();
        // h_k[d] = C[N-1-k+d][N-1-k]
        int mem = 0;
        for (int k = 0; k < N_; ++k) {
            const int c = N_ - 1 - k;
            const double lead = C[static_cast<std::size_t>(c) * w];
            for (int d = 1; d <= band && c + d < N_; ++d) {
                const double v = C[static_cast<std::size_t>(c + d) * w + d];
                if (std::abs(v) >= threshold * lead)
                    mem = std::max(mem, d);
            }
        }
        if (max_memory < 0 || max_memory > 20)
            throw std::invalid_argument("whitened memory limit must lie in 0..20");
        // Taps past the state-space guard are dropped from the trellis.
        threshold_memory_ = mem;
        memory_ = std::min(mem, max_memory);
        taps_.assign(static_cast<std::size_t>(N_) * (memory_ + 1), 0.0);
        for (int k = 0; k < N_; ++k) {
            const int c = N_ - 1 - k;
            for (int d = 0; d <= memory_ && c + d < N_; ++d)
                taps_[static_cast<std::size_t>(k) * (memory_ + 1) + d] =
                    C[static_cast<std::size_t>(c + d) * w + d];
        }
    }

    int size() const { return N_; }
    int memory() const { return memory_; }
    /// Memory implied by the threshold alone, before the state-space guard.
    int threshold_memory() const { return threshold_memory_; }

    /// Response taps h_k[0..memory] for output time k.
    std::span<const double> taps(int k) const
    {
        return {taps_.data() + static_cast<std::size_t>(k) * (memory_ + 1), static_cast<std::size_t>(memory_ + 1)};
    }

    std::vector<double> whiten(std::span<const double> y) const
    {
        if (static_cast<int>(y.size()) != N_)
            throw std::invalid_argument("whitener built for " + std::to_string(N_) + " samples, got " +
                                        std::to_string(y.size()));
        const int band = chan_.bandwidth();
        const int w = band + 1;
        const auto& C = chan_.factor();
        // Forward solve C u = J y, then z = J u.
        std::vector<double> u(static_cast<std::size_t>(N_));
        for (int i = 0; i < N_; ++i) {
            double s = y[N_ - 1 - i];
            for (int d = 1; d <= band && d <= i; ++d)
                s -= C[static_cast<std::size_t>(i) * w + d] * u[i - d];
            u[i] = s / C[static_cast<std::size_t>(i) * w];
        }
        std::reverse(u.begin(), u.end());
        return u;
    }

private:
    int N_;
    DiscreteChannel chan_;
    int memory_ = 0;
    int threshold_memory_ = 0;
    std::vector<double> taps_;
};

struct TrellisSpec {
    int memory = 0;
    int M = 32;
    double llr_cap = 50.0;

    std::uint64_t states() const { return std::uint64_t{1} << memory; }

    void validate() const
    {
        if (M < 1)
            throw std::invalid_argument("M-BCJR needs at least one survivor");
        if (memory < 0 || memory > 20)
            throw std::invalid_argument("trellis memory must lie in 0..20, got " + std::to_string(memory));
    }
};

namespace detail {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double max_star(double a, double b)
{
    if (a == neg_inf)
        return b;
    if (b == neg_inf)
        return a;
    return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
}

struct Survivor {
    std::uint32_t state;
    double metric;
};

/// Symbol a_{k-d} (d >= 1) held in `state`; bit d-1 set means -1.
inline double state_symbol(std::uint32_t state, int d) { return (state >> (d - 1)) & 1u ? -1.0 : 1.0; }

inline double past_response(std::uint32_t state, std::span<const double> h)
{
    double acc = 0.0;
    for (std::size_t d = 1; d < h.size(); ++d)
        acc += h[d] * state_symbol(state, static_cast<int>(d));
    return acc;
}

} // namespace detail

/// BCJR over a 2^memory-state trellis with per-step M-algorithm pruning.
/// z and the response taps come from a whitened model; noise variance is N0/2.
inline std::vector<double> bcjr_trellis(std::span<const double> z, const WhitenedModel& model, double Es, double N0,
                                        const TrellisSpec& spec)
{
    using detail::neg_inf;
    using detail::Survivor;
    spec.validate();
    if (spec.memory > model.memory())
        throw std::invalid_argument("trellis memory exceeds the whitened response length");
    const int N = static_cast<int>(z.size());
    if (N != model.size())
        throw std::invalid_argument("observation length does not match the whitened model");
    const int mem = spec.memory;
    const std::uint32_t mask = mem == 0 ? 0u : static_cast<std::uint32_t>((std::uint64_t{1} << mem) - 1);
    const double amp = std::sqrt(Es);
    const double inv_n0 = 1.0 / N0;
    const std::size_t keep = static_cast<std::size_t>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(spec.M), spec.states()));

    auto branch = [&](int k, double past, int bit) {
        const double a = bit ? -1.0 : 1.0;
        const double e = z[k] - amp * (model.taps(k)[0] * a + past);
        return -e * e * inv_n0;
    };
    auto next_state = [&](std::uint32_t s, int bit) -> std::uint32_t {
        return mem == 0 ? 0u : ((s << 1) | static_cast<std::uint32_t>(bit)) & mask;
    };
    auto truncated = [&](int k) {
        auto h = model.taps(k);
        return h.subspan(0, static_cast<std::size_t>(mem + 1));
    };

    auto by_state = [](const Survivor& a, const Survivor& b) { return a.state < b.state; };

    // Forward pass. Survivor lists are kept sorted by state label; cut[k]
    // holds the candidates pruned at stage k.
    std::vector<std::vector<Survivor>> fwd(static_cast<std::size_t>(N + 1)), cut(static_cast<std::size_t>(N + 1));
    fwd[0] = {{0u, 0.0}};
    std::vector<Survivor> cand;
    for (int k = 0; k < N; ++k) {
        const auto h = truncated(k);
        cand.clear();
        for (const auto& sv : fwd[k]) {
            const double past = detail::past_response(sv.state, h);
            for (int bit = 0; bit < 2; ++bit)
                cand.push_back({next_state(sv.state, bit), sv.metric + branch(k, past, bit)});
        }
        std::sort(cand.begin(), cand.end(), by_state);
        std::vector<Survivor> merged;
        merged.reserve(cand.size());
        for (const auto& c : cand) {
            if (!merged.empty() && merged.back().state == c.state)
                merged.back().metric = detail::max_star(merged.back().metric, c.metric);
            else
                merged.push_back(c);
        }
        if (merged.size() > keep) {
            // Best metric first; ties go to the lower state label.
            std::nth_element(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(keep), merged.end(),
                             [](const Survivor& a, const Survivor& b) {
                                 return a.metric > b.metric || (a.metric == b.metric && a.state < b.state);
                             });
            cut[k + 1].assign(merged.begin() + static_cast<std::ptrdiff_t>(keep), merged.end());
            merged.resize(keep);
            std::sort(merged.begin(), merged.end(), by_state);
            std::sort(cut[k + 1].begin(), cut[k + 1].end(), by_state);
        }
        fwd[k + 1] = std::move(merged);
    }

    auto lookup = [](const std::vector<Survivor>& list, std::uint32_t s) -> const Survivor* {
        auto it = std::lower_bound(list.begin(), list.end(), s,
                                   [](const Survivor& a, std::uint32_t v) { return a.state < v; });
        return it != list.end() && it->state == s ? &*it : nullptr;
    };

    // Backward pass over the forward survivors. A pruned state has no
    // recursion of its own; it takes the beta of the survivor at the same
    // stage that agrees with it on the most recent symbols.
    std::vector<double> llr(static_cast<std::size_t>(N));
    std::vector<Survivor> beta_s = fwd[N], beta_c = cut[N];
    for (auto& b : beta_s)
        b.metric = 0.0;
    for (auto& b : beta_c)
        b.metric = 0.0;
    std::vector<Survivor> prev_s, prev_c;
    for (int k = N - 1; k >= 0; --k) {
        const auto h = truncated(k);
        double num = neg_inf, den = neg_inf;
        prev_s.clear();
        for (const auto& sv : fwd[k]) {
            const double past = detail::past_response(sv.state, h);
            double b = neg_inf;
            for (int bit = 0; bit < 2; ++bit) {
                const std::uint32_t ns = next_state(sv.state, bit);
                const Survivor* nx = lookup(beta_s, ns);
                if (!nx)
                    nx = lookup(beta_c, ns);
                if (!nx)
                    continue;
                const double g = branch(k, past, bit);
                b = detail::max_star(b, g + nx->metric);
                const double full = sv.metric + g + nx->metric;
                if (bit == 0)
                    num = detail::max_star(num, full);
                else
                    den = detail::max_star(den, full);
            }
            prev_s.push_back({sv.state, b});
        }
        prev_c.clear();
        for (const auto& c : cut[k]) {
            int best_len = -1;
            double best = neg_inf;
            for (const auto& sv : prev_s) {
                const int len = std::countr_zero(c.state ^ sv.state);
                if (len > best_len || (len == best_len && sv.metric > best)) {
                    best_len = len;
                    best = sv.metric;
                }
            }
            prev_c.push_back({c.state, best});
        }
        double l;
        if (num == neg_inf && den == neg_inf)
            l = 0.0;
        else if (den == neg_inf)
            l = spec.llr_cap;
        else if (num == neg_inf)
            l = -spec.llr_cap;
        else
            l = std::clamp(num - den, -spec.llr_cap, spec.llr_cap);
        llr[k] = l;
        std::swap(beta_s, prev_s);
        std::swap(beta_c, prev_c);
    }
    return llr;
}

/// Whitens y and runs the M-algorithm BCJR. M is the survivor count; the
/// trellis memory comes from the whitened response.
inline std::vector<double> mbcjr_detect(std::span<const double> y, const WhitenedModel& model, double Es, double N0,
                                        int M)
{
    if (!(N0 > 0.0))
        throw std::invalid_argument("N0 must be positive");
    TrellisSpec spec{model.memory(), M};
    const auto z = model.whiten(y);
    return bcjr_trellis(z, model, Es, N0, spec);
}

inline std::vector<double> mbcjr_detect(std::span<const double> y, const IsiProfile& isi, double Es, double N0,
                                        int M)
{
    WhitenedModel model(isi, static_cast<int>(y.size()));
    return mbcjr_detect(y, model, Es, N0, M);
}

/// Hard symbols from bit LLRs.
inline std::vector<double> hard_from_llr(std::span<const double> llr)
{
    std::vector<double> a(llr.size());
    for (std::size_t i = 0; i < llr.size(); ++i)
        a[i] = quantize_bpsk(llr[i]);
    return a;
}

} // namespace ftn
