#pragma once

// Decoder and detector operation counts, and their reduction to gate units.
//
// Decoder counts follow the closed forms for one check node (with its d_c
// incident variable nodes) per iteration; a codeword iteration is that count
// times the number of check nodes. The NB-LDPC comparison count contains
// x = n_m log2(n_m), which is generally not an integer, so counts are reals.

#include <cmath>
#include <stdexcept>

namespace ftn {

struct OpCounts {
    double additions = 0.0;
    double subtractions = 0.0;
    double comparisons = 0.0;
    double xors = 0.0;

    OpCounts& operator+=(const OpCounts& o)
    {
        additions += o.additions;
        subtractions += o.subtractions;
        comparisons += o.comparisons;
        xors += o.xors;
        return *this;
    }
    friend OpCounts operator+(OpCounts a, const OpCounts& b) { return a += b; }
    friend OpCounts operator*(OpCounts a, double s)
    {
        a.additions *= s;
        a.subtractions *= s;
        a.comparisons *= s;
        a.xors *= s;
        return a;
    }
    friend OpCounts operator*(double s, const OpCounts& a) { return a * s; }
    bool operator==(const OpCounts&) const = default;
};

/// Gate cost of one b-bit add, subtract or compare, and of one XOR.
struct GateWeights {
    int bits = 10;
    double add = 10.0;
    double sub = 10.0;
    double cmp = 10.0;
    double xor_gate = 1.0;

    /// Every b-bit arithmetic operation costs b units, XOR costs one.
    static GateWeights for_bits(int b) { return {b, double(b), double(b), double(b), 1.0}; }

    double cost(const OpCounts& c) const
    {
        return c.additions * add + c.subtractions * sub + c.comparisons * cmp + c.xors * xor_gate;
    }
};

/// Min-sum, per check node and iteration.
inline OpCounts ldpc_ops(int dc, int dv)
{
    if (dc < 2 || dv < 1)
        throw std::invalid_argument("ldpc_ops needs d_c >= 2 and d_v >= 1");
    return {double(dc), double(dc), double(2 * dv - 3), double(dv * dv - dv)};
}

/// EMS with L-bubble ECNs, per check node and iteration.
inline OpCounts nbldpc_ops(int dc, int dv, int n_m, int q)
{
    if (n_m < 2)
        throw std::invalid_argument("nbldpc_ops needs n_m >= 2");
    const double x = n_m * std::log2(double(n_m));
    OpCounts c;
    c.additions = double(n_m) * (9 * dc + 8 * dv - 22);
    c.subtractions = 0.0;
    c.comparisons = x * (6 * dc + 4 * dv - 18) + double(n_m) * (4 * dv - 6) - 2.0;
    c.xors = (n_m * std::log2(double(q))) * (9 * dc - 18);
    return c;
}

/// Per-symbol detector cost conventions.
struct DetectorCostModel {
    /// Go-back-K: (K+1)(L-1) multiply-adds plus (K+1) quantizations per
    /// symbol. A multiply by a +-1 symbol is a sign select, so each
    /// multiply-add counts as one addition and each quantization as one
    /// comparison.
    static OpCounts gbk_per_symbol(int K, int L)
    {
        OpCounts c;
        c.additions = double(K + 1) * (L - 1);
        c.comparisons = double(K + 1);
        return c;
    }

    static OpCounts ssse_per_symbol(int L) { return gbk_per_symbol(0, L); }

    /// M-BCJR: 2M branch-metric updates per trellis step in each of the two
    /// passes. One update rebuilds the noiseless output over memory+1 taps
    /// (memory+1 additions), forms the error (1 subtraction), squares it
    /// (counted as 1 addition-equivalent), accumulates into the path metric
    /// (1 addition) and takes part in one max-star comparison.
    static OpCounts mbcjr_per_symbol(int M, int memory)
    {
        const double updates = 2.0 * 2.0 * M;
        OpCounts per;
        per.additions = (memory + 1) + 1 + 1;
        per.subtractions = 1;
        per.comparisons = 1;
        return per * updates;
    }
};

/// Gate-unit total: decoder counts per iteration times the average
/// iteration count, plus the detector cost.
inline double total_ops(const OpCounts& per_iter, double avg_iters, const GateWeights& w,
                        const OpCounts& detector = {})
{
    if (avg_iters < 0.0)
        throw std::invalid_argument("average iteration count must be non-negative");
    return w.cost(per_iter) * avg_iters + w.cost(detector);
}

} // namespace ftn
