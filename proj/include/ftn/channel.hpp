#pragma once

// AWGN injection and Eb/N0 bookkeeping.
//
// Convention: Eb/N0 is per information bit, so N0 = Es / (rate * bits_per_symbol * 10^(EbN0/10)).
// White noise added to the oversampled waveform has per-sample variance
// (N0/2) * sps, which leaves the matched-filter output with variance N0/2 per
// sample for a unit-energy pulse.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "ftn/waveform.hpp"

namespace ftn {

using Rng = std::mt19937_64;

/// splitmix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct NoiseSpec {
    double sigma2 = 1.0; ///< per waveform sample
    double N0 = 1.0;
    double EbN0_dB = 0.0;
    double code_rate = 1.0;
    int bits_per_symbol = 1;
    int sps = 1;

    static constexpr double min_sigma2 = 1e-30;
};

inline NoiseSpec sigma_from_ebn0(double EbN0_dB, double rate, double Es, int sps = 1, int bits_per_symbol = 1)
{
    if (!(rate > 0.0 && rate <= 1.0))
        throw std::invalid_argument("code rate must lie in (0, 1]");
    NoiseSpec ns;
    ns.EbN0_dB = EbN0_dB;
    ns.code_rate = rate;
    ns.bits_per_symbol = bits_per_symbol;
    ns.sps = sps;
    ns.N0 = Es / (rate * bits_per_symbol * std::pow(10.0, EbN0_dB / 10.0));
    ns.sigma2 = std::max(ns.N0 / 2.0 * sps, NoiseSpec::min_sigma2);
    return ns;
}

inline std::vector<double> add_awgn(std::span<const double> waveform, const NoiseSpec& spec, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(std::max(spec.sigma2, NoiseSpec::min_sigma2)));
    std::vector<double> out(waveform.begin(), waveform.end());
    for (double& v : out)
        v += normal(rng);
    return out;
}

/// Discrete equivalent of transmit -> AWGN -> matched filter -> sample:
/// y = sqrt(Es) G a + C n sqrt(N0/2), with G = C C^T the untruncated ISI matrix.
class DiscreteChannel {
public:
    DiscreteChannel(const IsiProfile& isi, int N) : N_(N), band_(static_cast<int>(isi.full.size()) - 1)
    {
        if (band_ > N_ - 1)
            band_ = std::max(N_ - 1, 0);
        g_.assign(isi.full.begin(), isi.full.begin() + band_ + 1);
        chol_ = banded_cholesky(g_, N_, band_);
    }

    int size() const { return N_; }
    int bandwidth() const { return band_; }

    /// Lower banded Cholesky factor, entry (i, i - d) stored at [i * (band + 1) + d].
    const std::vector<double>& factor() const { return chol_; }

    std::vector<double> noiseless(std::span<const double> symbols, double Es) const
    {
        const double amp = std::sqrt(Es);
        std::vector<double> y(static_cast<std::size_t>(N_), 0.0);
        for (int k = 0; k < N_; ++k) {
            double acc = g_[0] * symbols[k];
            for (int d = 1; d <= band_; ++d) {
                if (k - d >= 0)
                    acc += g_[d] * symbols[k - d];
                if (k + d < N_)
                    acc += g_[d] * symbols[k + d];
            }
            y[k] = amp * acc;
        }
        return y;
    }

    std::vector<double> sample(std::span<const double> symbols, double Es, double N0, Rng& rng) const
    {
        auto y = noiseless(symbols, Es);
        std::normal_distribution<double> normal(0.0, std::sqrt(N0 / 2.0));
        std::vector<double> n(static_cast<std::size_t>(N_));
        for (double& v : n)
            v = normal(rng);
        const int w = band_ + 1;
        for (int i = 0; i < N_; ++i) {
            double acc = 0.0;
            for (int d = 0; d <= band_ && d <= i; ++d)
                acc += chol_[static_cast<std::size_t>(i) * w + d] * n[i - d];
            y[i] += acc;
        }
        return y;
    }

    /// Cholesky of the symmetric banded Toeplitz matrix with first row g.
    /// A small diagonal jitter keeps near-singular (strong-ISI) matrices factorable.
    static std::vector<double> banded_cholesky(const std::vector<double>& g, int N, int band, double jitter = 1e-9)
    {
        const int w = band + 1;
        std::vector<double> L(static_cast<std::size_t>(N) * w, 0.0);
        auto at = [&](int i, int j) -> double& { return L[static_cast<std::size_t>(i) * w + (i - j)]; };
        for (int i = 0; i < N; ++i) {
            const int j0 = std::max(0, i - band);
            for (int j = j0; j <= i; ++j) {
                double s = (i - j) < static_cast<int>(g.size()) ? g[i - j] : 0.0;
                if (i == j)
                    s += jitter;
                const int k0 = std::max(j0, j - band);
                for (int k = k0; k < j; ++k)
                    s -= at(i, k) * at(j, k);
                if (i == j) {
                    if (s <= 0.0)
                        throw std::runtime_error("ISI matrix is not positive definite");
                    at(i, i) = std::sqrt(s);
                } else {
                    at(i, j) = s / at(j, j);
                }
            }
        }
        return L;
    }

private:
    int N_;
    int band_;
    std::vector<double> g_;
    std::vector<double> chol_;
};

} // namespace ftn
