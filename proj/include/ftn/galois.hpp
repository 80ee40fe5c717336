#pragma once

// Arithmetic over GF(2^m) backed by log/antilog tables.
//
// Elements are stored in their polynomial (bit-pattern) representation, so
// element value v has bit b set iff the coefficient of x^b is 1. Addition is
// XOR. The zero element has no logarithm.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftn {

using GfElem = std::uint16_t;

class FieldTables {
public:
    FieldTables() = default;

    FieldTables(int m, unsigned primitive_poly) : m_(m), q_(1 << m), poly_(primitive_poly)
    {
        if (m < 1 || m > 8)
            throw std::invalid_argument("field degree must be in 1..8, got " + std::to_string(m));
        if ((poly_ >> m) != 1u)
            throw std::invalid_argument("primitive polynomial must have degree " + std::to_string(m));

        const int order = q_ - 1;
        log_.assign(q_, -1);
        antilog_.assign(order, 0);

        unsigned x = 1;
        for (int i = 0; i < order; ++i) {
            if (log_[x] != -1)
                throw std::invalid_argument("polynomial " + std::to_string(primitive_poly) +
                                            " is not primitive: generator cycle length " +
                                            std::to_string(i));
            antilog_[i] = static_cast<GfElem>(x);
            log_[x] = i;
            x <<= 1;
            if (x & static_cast<unsigned>(q_))
                x ^= poly_;
        }
        if (x != 1)
            throw std::invalid_argument("polynomial " + std::to_string(primitive_poly) +
                                        " is not primitive");

        mul_.assign(static_cast<std::size_t>(q_) * q_, 0);
        inv_.assign(q_, 0);
        for (int a = 1; a < q_; ++a) {
            for (int b = 1; b < q_; ++b)
                mul_[a * q_ + b] = antilog_[(log_[a] + log_[b]) % order];
            inv_[a] = antilog_[(order - log_[a]) % order];
        }
    }

    int m() const { return m_; }
    int q() const { return q_; }
    unsigned primitive_poly() const { return poly_; }

    /// log_table()[i] is the discrete log of element i+1.
    std::vector<int> log_table() const { return {log_.begin() + 1, log_.end()}; }
    const std::vector<GfElem>& antilog_table() const { return antilog_; }

    int log(GfElem a) const
    {
        if (a == 0)
            throw std::domain_error("log of zero");
        return log_[a];
    }
    GfElem exp(int i) const { return antilog_[((i % (q_ - 1)) + (q_ - 1)) % (q_ - 1)]; }

    /// Element alpha_i with alpha_0 = 0 and alpha_i = g^(i-1) for i >= 1.
    GfElem alpha(int i) const { return i == 0 ? GfElem{0} : antilog_[i - 1]; }

    GfElem add(GfElem a, GfElem b) const { return a ^ b; }
    GfElem mul(GfElem a, GfElem b) const { return mul_[a * q_ + b]; }

    GfElem inv(GfElem a) const
    {
        if (a == 0)
            throw std::domain_error("inverse of zero in GF(" + std::to_string(q_) + ")");
        return inv_[a];
    }

    GfElem div(GfElem a, GfElem b) const { return mul(a, inv(b)); }

    bool operator==(const FieldTables& o) const { return m_ == o.m_ && poly_ == o.poly_; }

private:
    int m_ = 0;
    int q_ = 0;
    unsigned poly_ = 0;
    std::vector<int> log_;
    std::vector<GfElem> antilog_;
    std::vector<GfElem> mul_;
    std::vector<GfElem> inv_;
};

/// Minimal-weight primitive polynomial for each degree 1..8.
inline unsigned default_primitive_poly(int m)
{
    static constexpr unsigned table[] = {0,      0b11,      0b111,      0b1011,     0b10011,
                                         0b100101, 0b1000011, 0b10001001, 0b100011101};
    if (m < 1 || m > 8)
        throw std::invalid_argument("field degree must be in 1..8");
    return table[m];
}

inline FieldTables build_field(int m, unsigned primitive_poly) { return FieldTables(m, primitive_poly); }
inline FieldTables build_field(int m) { return FieldTables(m, default_primitive_poly(m)); }

inline GfElem gf_add(GfElem a, GfElem b) { return a ^ b; }
inline GfElem gf_mul(GfElem a, GfElem b, const FieldTables& t) { return t.mul(a, b); }
inline GfElem gf_inv(GfElem a, const FieldTables& t) { return t.inv(a); }

} // namespace ftn
