#pragma once

// Nonbinary LDPC codes over GF(2^m) with extended min-sum (EMS) decoding.
//
// Messages live in the max-log domain: entry alpha holds log P(z = alpha) up
// to a common constant. An EMS message keeps only its n_m largest entries and
// represents every other field element by one scalar fill value.
//
// Edge (i, j) with coefficient h carries V2C messages in the check domain
// (locations multiplied by h) and C2V messages back in the variable domain
// (locations multiplied by h^-1).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftn/galois.hpp"
#include "ftn/ldpc_bin.hpp"

namespace ftn {

struct NbEntry {
    int index;    ///< row index in a column list, column index in a row list
    GfElem value; ///< nonzero field element
};

struct NbPcm {
    int M = 0;
    int N = 0;
    FieldTables field;
    std::vector<std::vector<NbEntry>> cols;
    std::vector<std::vector<NbEntry>> rows;
    int dv_max = 0;
    int dc_max = 0;

    int q() const { return field.q(); }

    static NbPcm from_columns(int M, int N, FieldTables field, std::vector<std::vector<NbEntry>> cols)
    {
        NbPcm h;
        h.M = M;
        h.N = N;
        h.field = std::move(field);
        h.rows.assign(static_cast<std::size_t>(M), {});
        for (int j = 0; j < N; ++j) {
            auto& c = cols[j];
            std::sort(c.begin(), c.end(), [](const NbEntry& a, const NbEntry& b) { return a.index < b.index; });
            for (std::size_t t = 0; t < c.size(); ++t) {
                if (c[t].index < 0 || c[t].index >= M)
                    throw std::invalid_argument("row index out of range in column " + std::to_string(j));
                if (t && c[t].index == c[t - 1].index)
                    throw std::invalid_argument("repeated edge in column " + std::to_string(j));
                if (c[t].value == 0 || c[t].value >= h.field.q())
                    throw std::invalid_argument("edge value outside 1..q-1 in column " + std::to_string(j));
                h.rows[c[t].index].push_back({j, c[t].value});
            }
            h.dv_max = std::max(h.dv_max, static_cast<int>(c.size()));
        }
        for (auto& r : h.rows)
            h.dc_max = std::max(h.dc_max, static_cast<int>(r.size()));
        h.cols = std::move(cols);
        return h;
    }

    bool is_codeword(std::span<const GfElem> c) const
    {
        for (const auto& r : rows) {
            GfElem acc = 0;
            for (const auto& e : r)
                acc ^= field.mul(e.value, c[e.index]);
            if (acc)
                return false;
        }
        return true;
    }
};

/// Nonbinary alist: "N M q", "dv_max dc_max", column degrees, row degrees,
/// then per column dv_max (row, value) pairs and per row dc_max
/// (column, value) pairs; indices 1-based, padding pairs "0 0".
inline NbPcm parse_nb_alist(std::istream& in, const FieldTables& field)
{
    detail::TokenReader rd(in);
    const int hdr_line = rd.line();
    auto hdr = rd.next_line("header");
    if (hdr.size() != 3)
        throw ParseError("nonbinary alist header must hold exactly 'N M q', found " + std::to_string(hdr.size()) +
                             " values",
                         hdr_line);
    const long N = hdr[0], M = hdr[1], q = hdr[2];
    if (N <= 0 || M <= 0)
        throw ParseError("dimensions must be positive", hdr_line);
    if (q != field.q())
        throw ParseError("file declares q = " + std::to_string(q) + " but the field has q = " +
                             std::to_string(field.q()),
                         hdr_line);
    const int deg_line = rd.line();
    auto maxes = rd.line_of(2, "maximum degrees");
    const long dv_max = maxes[0], dc_max = maxes[1];
    if (dv_max < 1 || dc_max < 1 || dv_max > M || dc_max > N)
        throw ParseError("maximum degrees out of range", deg_line);
    const int cdeg_line = rd.line();
    auto cdeg = rd.take(static_cast<std::size_t>(N), "column degrees");
    const int rdeg_line = rd.line();
    auto rdeg = rd.take(static_cast<std::size_t>(M), "row degrees");
    for (long d : cdeg)
        if (d < 0 || d > dv_max)
            throw ParseError("column degree exceeds the declared maximum", cdeg_line);
    for (long d : rdeg)
        if (d < 0 || d > dc_max)
            throw ParseError("row degree exceeds the declared maximum", rdeg_line);

    auto read_pairs = [&](long count, long degree, long limit, const char* what, long id) {
        const int ln = rd.line();
        auto v = rd.next_line(what);
        if (v.size() % 2 != 0 || static_cast<long>(v.size()) / 2 < degree || static_cast<long>(v.size()) / 2 > count)
            throw ParseError(std::string(what) + " " + std::to_string(id + 1) + ": expected " +
                                 std::to_string(count) + " (index, value) pairs",
                             ln);
        std::vector<NbEntry> out;
        for (std::size_t t = 0; t < v.size() / 2; ++t) {
            const long idx = v[2 * t], val = v[2 * t + 1];
            if (static_cast<long>(t) >= degree) {
                if (idx != 0 || val != 0)
                    throw ParseError(std::string("nonzero padding in ") + what + " " + std::to_string(id + 1), ln);
                continue;
            }
            if (idx < 1 || idx > limit)
                throw ParseError("index " + std::to_string(idx) + " out of range", ln);
            if (val < 1 || val >= q)
                throw ParseError("edge value " + std::to_string(val) + " outside 1.." + std::to_string(q - 1), ln);
            out.push_back({static_cast<int>(idx - 1), static_cast<GfElem>(val)});
        }
        return out;
    };

    std::vector<std::vector<NbEntry>> cols(static_cast<std::size_t>(N));
    for (long j = 0; j < N; ++j)
        cols[j] = read_pairs(dv_max, cdeg[j], M, "column", j);
    std::vector<std::vector<NbEntry>> rows(static_cast<std::size_t>(M));
    for (long i = 0; i < M; ++i)
        rows[i] = read_pairs(dc_max, rdeg[i], N, "row", i);
    if (!rd.done())
        throw ParseError("trailing data after row lists", rd.line());

    NbPcm h;
    try {
        h = NbPcm::from_columns(static_cast<int>(M), static_cast<int>(N), field, std::move(cols));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), cdeg_line);
    }
    for (long i = 0; i < M; ++i) {
        auto& r = rows[i];
        std::sort(r.begin(), r.end(), [](const NbEntry& a, const NbEntry& b) { return a.index < b.index; });
        const auto& ref = h.rows[i];
        bool same = r.size() == ref.size();
        for (std::size_t t = 0; same && t < r.size(); ++t)
            same = r[t].index == ref[t].index && r[t].value == ref[t].value;
        if (!same)
            throw ParseError("row " + std::to_string(i + 1) + " does not match the column lists", rdeg_line);
    }
    if (h.dv_max != dv_max || h.dc_max != dc_max)
        throw ParseError("declared maximum degrees do not match the lists", deg_line);
    return h;
}

inline NbPcm parse_nb_alist(const std::string& text, const FieldTables& field)
{
    std::istringstream in(text);
    return parse_nb_alist(in, field);
}

inline void write_nb_alist(std::ostream& out, const NbPcm& h)
{
    out << h.N << ' ' << h.M << ' ' << h.q() << '\n' << h.dv_max << ' ' << h.dc_max << '\n';
    for (int j = 0; j < h.N; ++j)
        out << h.cols[j].size() << (j + 1 < h.N ? ' ' : '\n');
    for (int i = 0; i < h.M; ++i)
        out << h.rows[i].size() << (i + 1 < h.M ? ' ' : '\n');
    auto emit = [&](const std::vector<NbEntry>& list, int width) {
        for (int t = 0; t < width; ++t) {
            if (t)
                out << ' ';
            if (t < static_cast<int>(list.size()))
                out << list[t].index + 1 << ' ' << list[t].value;
            else
                out << "0 0";
        }
        out << '\n';
    };
    for (auto& c : h.cols)
        emit(c, h.dv_max);
    for (auto& r : h.rows)
        emit(r, h.dc_max);
}

// ---------------------------------------------------------------------------
// Encoding

/// Gaussian elimination over GF(q) with left-to-right column pivoting. When
/// the first M columns are independent the codeword is [parity | message].
class NbEncoder {
public:
    explicit NbEncoder(const NbPcm& h) : N_(h.N), field_(h.field)
    {
        const auto& F = h.field;
        std::vector<std::vector<GfElem>> A(static_cast<std::size_t>(h.M), std::vector<GfElem>(h.N, 0));
        for (int i = 0; i < h.M; ++i)
            for (const auto& e : h.rows[i])
                A[i][e.index] = e.value;
        std::vector<char> is_pivot(static_cast<std::size_t>(N_), 0);
        int r = 0;
        for (int col = 0; col < N_ && r < h.M; ++col) {
            int sel = -1;
            for (int i = r; i < h.M; ++i)
                if (A[i][col]) {
                    sel = i;
                    break;
                }
            if (sel < 0)
                continue;
            std::swap(A[r], A[sel]);
            const GfElem inv = F.inv(A[r][col]);
            for (auto& v : A[r])
                v = F.mul(v, inv);
            for (int i = 0; i < h.M; ++i) {
                if (i == r || !A[i][col])
                    continue;
                const GfElem f = A[i][col];
                for (int t = 0; t < N_; ++t)
                    A[i][t] ^= F.mul(f, A[r][t]);
            }
            pivots_.push_back(col);
            is_pivot[col] = 1;
            ++r;
        }
        for (int j = 0; j < N_; ++j)
            if (!is_pivot[j])
                info_.push_back(j);
        deps_.resize(pivots_.size());
        for (std::size_t t = 0; t < pivots_.size(); ++t)
            for (int f : info_)
                if (A[t][f])
                    deps_[t].push_back({f, A[t][f]});
    }

    int n() const { return N_; }
    int k() const { return static_cast<int>(info_.size()); }
    int rank() const { return static_cast<int>(pivots_.size()); }
    const std::vector<int>& info_positions() const { return info_; }
    /// True when the message occupies the trailing N - M positions.
    bool parity_first() const
    {
        for (std::size_t t = 0; t < pivots_.size(); ++t)
            if (pivots_[t] != static_cast<int>(t))
                return false;
        return true;
    }

    std::vector<GfElem> encode(std::span<const GfElem> msg) const
    {
        if (static_cast<int>(msg.size()) != k())
            throw std::invalid_argument("message length " + std::to_string(msg.size()) + " != k = " +
                                        std::to_string(k()));
        std::vector<GfElem> c(static_cast<std::size_t>(N_), 0);
        for (std::size_t t = 0; t < info_.size(); ++t)
            c[info_[t]] = msg[t];
        // Pivot row t reads c[p_t] + sum_f a_f c[f] = 0.
        for (std::size_t t = 0; t < pivots_.size(); ++t) {
            GfElem acc = 0;
            for (const auto& e : deps_[t])
                acc ^= field_.mul(e.value, c[e.index]);
            c[pivots_[t]] = acc;
        }
        return c;
    }

private:
    int N_;
    FieldTables field_;
    std::vector<int> pivots_;
    std::vector<int> info_;
    std::vector<std::vector<NbEntry>> deps_;
};

inline std::vector<GfElem> nb_encode(const NbPcm& h, std::span<const GfElem> msg) { return NbEncoder(h).encode(msg); }

// ---------------------------------------------------------------------------
// Messages

using DenseLlr = std::vector<double>;

struct TruncatedMsg {
    std::vector<double> vals; ///< non-increasing
    std::vector<GfElem> locs; ///< pairwise distinct
    double fill = 0.0;        ///< value of every element not in locs

    std::size_t size() const { return vals.size(); }

    /// Invariants: sorted values, distinct locations, fill below every kept value.
    bool valid(int q) const
    {
        if (vals.size() != locs.size())
            return false;
        std::vector<char> seen(static_cast<std::size_t>(q), 0);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (locs[i] >= q || seen[locs[i]])
                return false;
            seen[locs[i]] = 1;
            if (i && vals[i] > vals[i - 1])
                return false;
        }
        return vals.empty() || fill <= vals.back();
    }

    DenseLlr expand(int q) const
    {
        DenseLlr d(static_cast<std::size_t>(q), fill);
        for (std::size_t i = 0; i < vals.size(); ++i)
            d[locs[i]] = vals[i];
        return d;
    }

    void add_to(std::span<double> dense) const
    {
        std::size_t t = 0;
        std::vector<char> hit(dense.size(), 0);
        for (; t < vals.size(); ++t) {
            dense[locs[t]] += vals[t];
            hit[locs[t]] = 1;
        }
        for (std::size_t a = 0; a < dense.size(); ++a)
            if (!hit[a])
                dense[a] += fill;
    }
};

namespace detail {

inline void canonical_order(TruncatedMsg& m)
{
    std::vector<std::size_t> idx(m.vals.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return m.vals[a] > m.vals[b] || (m.vals[a] == m.vals[b] && m.locs[a] < m.locs[b]);
    });
    TruncatedMsg out;
    out.fill = m.fill;
    out.vals.reserve(idx.size());
    out.locs.reserve(idx.size());
    for (auto i : idx) {
        out.vals.push_back(m.vals[i]);
        out.locs.push_back(m.locs[i]);
    }
    m = std::move(out);
}

} // namespace detail

/// Symbol LLRs from the m bit LLRs of one symbol; bit b of the element value
/// corresponds to bit_llrs[b]. Entry 0 is always 0.
inline DenseLlr bitllr_to_symbolllr(std::span<const double> bit_llrs, const FieldTables& field)
{
    const int q = field.q();
    if (static_cast<int>(bit_llrs.size()) != field.m())
        throw std::invalid_argument("expected one LLR per symbol bit");
    DenseLlr d(static_cast<std::size_t>(q), 0.0);
    for (int a = 1; a < q; ++a) {
        double s = 0.0;
        for (int b = 0; b < field.m(); ++b)
            if ((a >> b) & 1)
                s -= bit_llrs[b];
        d[a] = s;
    }
    return d;
}

/// Keeps the n_m largest entries (lower element first on ties). The rest are
/// represented by fill = max(omitted) - ln(q - n_m) - offset.
inline TruncatedMsg truncate_msg(std::span<const double> dense, int n_m, double offset)
{
    const int q = static_cast<int>(dense.size());
    if (n_m < 1)
        throw std::invalid_argument("truncation size must be >= 1");
    const int keep = std::min(n_m, q);
    std::vector<int> idx(static_cast<std::size_t>(q));
    std::iota(idx.begin(), idx.end(), 0);
    auto better = [&](int a, int b) { return dense[a] > dense[b] || (dense[a] == dense[b] && a < b); };
    std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), better);
    TruncatedMsg m;
    m.vals.reserve(static_cast<std::size_t>(keep));
    m.locs.reserve(static_cast<std::size_t>(keep));
    for (int t = 0; t < keep; ++t) {
        m.vals.push_back(dense[idx[t]]);
        m.locs.push_back(static_cast<GfElem>(idx[t]));
    }
    if (keep == q) {
        m.fill = -std::numeric_limits<double>::infinity();
    } else {
        double omitted = -std::numeric_limits<double>::infinity();
        for (int t = keep; t < q; ++t)
            omitted = std::max(omitted, dense[idx[t]]);
        m.fill = std::min(omitted - std::log(static_cast<double>(q - keep)) - offset, m.vals.back());
    }
    return m;
}

/// Multiplies every location by h (h != 0). Values are untouched.
inline TruncatedMsg permute(const TruncatedMsg& m, GfElem h, const FieldTables& field)
{
    if (h == 0)
        throw std::domain_error("permutation by the zero element");
    TruncatedMsg out = m;
    for (auto& l : out.locs)
        l = field.mul(h, l);
    detail::canonical_order(out);
    return out;
}

inline TruncatedMsg inverse_permute(const TruncatedMsg& m, GfElem h, const FieldTables& field)
{
    return permute(m, field.inv(h), field);
}

/// Variable-to-check message: channel LLR plus the other incoming C2V
/// messages (absent entries contribute their fill), truncated, then moved to
/// the check domain of an edge with coefficient h.
inline TruncatedMsg v2c(std::span<const double> input_llr, std::span<const TruncatedMsg> c2v_msgs, GfElem h, int n_m,
                        double offset, const FieldTables& field)
{
    DenseLlr r(input_llr.begin(), input_llr.end());
    for (const auto& qm : c2v_msgs)
        qm.add_to(r);
    return permute(truncate_msg(r, n_m, offset), h, field);
}

struct BubbleConfig {
    int bubbles = 4;
};

/// Elementary check node: V[beta] = max over beta_U[j] ^ beta_I[k] = beta of
/// U[j] + I[k], evaluated on a restricted set of cells of the sorted
/// |U| x |I| grid.
///
/// With bubbles >= |U| every row of the grid is a sorted track and the merge
/// is exact. Otherwise the explored region is an L shape: the first
/// ceil(b/2) rows plus the first floor(b/2) columns, one bubble per track.
/// The fill is the best value an omitted element could take: the next new
/// location on the frontier or a pairing with either input's fill, capped
/// at the last kept value.
inline TruncatedMsg ecn_pair(const TruncatedMsg& U, const TruncatedMsg& I, int n_m, int bubbles, int q)
{
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    TruncatedMsg V;
    const int nu = static_cast<int>(U.size()), ni = static_cast<int>(I.size());
    if (nu == 0 || ni == 0) {
        V.fill = U.fill + I.fill;
        return V;
    }
    struct Track {
        int r, c, dr, dc;
    };
    std::vector<Track> tracks;
    if (bubbles >= nu) {
        for (int r = 0; r < nu; ++r)
            tracks.push_back({r, 0, 0, 1});
    } else {
        const int nr = std::min((bubbles + 1) / 2, nu);
        const int nc = std::min(bubbles / 2, ni);
        for (int r = 0; r < nr; ++r)
            tracks.push_back({r, 0, 0, 1});
        if (nr < nu)
            for (int c = 0; c < nc; ++c)
                tracks.push_back({nr, c, 1, 0});
    }

    struct Head {
        double v;
        GfElem loc;
        int track;
    };
    auto worse = [](const Head& a, const Head& b) { return a.v < b.v || (a.v == b.v && a.loc > b.loc); };
    std::priority_queue<Head, std::vector<Head>, decltype(worse)> heap(worse);
    auto push = [&](int t) {
        const auto& tr = tracks[t];
        if (tr.r < nu && tr.c < ni)
            heap.push({U.vals[tr.r] + I.vals[tr.c], static_cast<GfElem>(U.locs[tr.r] ^ I.locs[tr.c]), t});
    };
    for (int t = 0; t < static_cast<int>(tracks.size()); ++t)
        push(t);

    std::vector<char> seen(static_cast<std::size_t>(q), 0);
    const auto target = static_cast<std::size_t>(std::min(n_m, q));
    while (!heap.empty() && V.size() < target) {
        const Head h = heap.top();
        heap.pop();
        if (!seen[h.loc]) {
            seen[h.loc] = 1;
            V.vals.push_back(h.v);
            V.locs.push_back(h.loc);
        }
        auto& tr = tracks[h.track];
        tr.r += tr.dr;
        tr.c += tr.dc;
        push(h.track);
    }
    // Best value of an element left out: the next new location on the
    // explored frontier, or a pairing with either input's fill.
    double omitted = std::max(U.vals[0] + I.fill, U.fill + I.vals[0]);
    while (!heap.empty()) {
        const Head h = heap.top();
        heap.pop();
        if (!seen[h.loc]) {
            omitted = std::max(omitted, h.v);
            break;
        }
        auto& tr = tracks[h.track];
        tr.r += tr.dr;
        tr.c += tr.dc;
        push(h.track);
    }
    detail::canonical_order(V);
    if (static_cast<int>(V.size()) == q) {
        V.fill = ninf;
    } else {
        V.fill = std::min(omitted, V.vals.back());
    }
    return V;
}

/// Check-node update by forward/backward ECN chains. Inputs are V2C messages
/// already in the check domain; outputs are returned in the variable domain.
inline std::vector<TruncatedMsg> c2v(std::span<const TruncatedMsg> inputs, std::span<const GfElem> row_entries,
                                     int n_m, int bubbles, const FieldTables& field)
{
    const int dc = static_cast<int>(inputs.size());
    const int q = field.q();
    std::vector<TruncatedMsg> out(static_cast<std::size_t>(dc));
    if (dc == 1) {
        // A degree-one check forces its symbol to zero.
        TruncatedMsg z;
        z.vals = {0.0};
        z.locs = {0};
        z.fill = q == 1 ? 0.0 : -std::numeric_limits<double>::infinity();
        out[0] = z;
        return out;
    }
    std::vector<TruncatedMsg> fwd(static_cast<std::size_t>(dc)), bwd(static_cast<std::size_t>(dc));
    fwd[0] = inputs[0];
    for (int i = 1; i < dc - 1; ++i)
        fwd[i] = ecn_pair(fwd[i - 1], inputs[i], n_m, bubbles, q);
    bwd[dc - 1] = inputs[dc - 1];
    for (int i = dc - 2; i > 0; --i)
        bwd[i] = ecn_pair(bwd[i + 1], inputs[i], n_m, bubbles, q);
    for (int i = 0; i < dc; ++i) {
        TruncatedMsg m;
        if (i == 0)
            m = bwd[1];
        else if (i == dc - 1)
            m = fwd[dc - 2];
        else
            m = ecn_pair(fwd[i - 1], bwd[i + 1], n_m, bubbles, q);
        out[i] = inverse_permute(m, row_entries[i], field);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Decoder

struct EmsOptions {
    int n_m = 20;
    double offset = 0.3;
    int bubbles = 4;
    int max_iter = 10;
};

struct NbDecodeResult {
    std::vector<GfElem> symbols;
    int iterations_used = 0;
    bool syndrome_ok = false;
};

class EmsDecoder {
public:
    explicit EmsDecoder(const NbPcm& h) : h_(&h)
    {
        // Edges numbered row by row.
        row_start_.push_back(0);
        col_edges_.assign(static_cast<std::size_t>(h.N), {});
        for (int i = 0; i < h.M; ++i) {
            for (const auto& e : h.rows[i]) {
                col_edges_[e.index].push_back(static_cast<int>(edge_col_.size()));
                edge_col_.push_back(e.index);
                edge_val_.push_back(e.value);
            }
            row_start_.push_back(static_cast<int>(edge_col_.size()));
        }
    }

    NbDecodeResult decode(std::span<const DenseLlr> llrs, const EmsOptions& opt) const
    {
        const auto& h = *h_;
        const auto& F = h.field;
        const int q = F.q();
        if (static_cast<int>(llrs.size()) != h.N)
            throw std::invalid_argument("symbol LLR count does not match the code length");

        NbDecodeResult res;
        res.symbols.resize(static_cast<std::size_t>(h.N));
        for (int j = 0; j < h.N; ++j)
            res.symbols[j] = argmax(llrs[j]);
        if (h.is_codeword(res.symbols)) {
            res.syndrome_ok = true;
            return res;
        }

        const std::size_t E = edge_col_.size();
        std::vector<TruncatedMsg> v2c_msg(E), c2v_msg(E);
        for (auto& m : c2v_msg)
            m.fill = 0.0; // "zero" message: every element 0

        std::vector<TruncatedMsg> others;
        DenseLlr post(static_cast<std::size_t>(q));
        for (int it = 1; it <= opt.max_iter; ++it) {
            for (int j = 0; j < h.N; ++j) {
                const auto& edges = col_edges_[j];
                for (int e : edges) {
                    others.clear();
                    for (int e2 : edges)
                        if (e2 != e)
                            others.push_back(c2v_msg[e2]);
                    v2c_msg[e] = v2c(llrs[j], others, edge_val_[e], opt.n_m, opt.offset, F);
                    assert(v2c_msg[e].valid(q));
                }
            }
            for (int i = 0; i < h.M; ++i) {
                const int b = row_start_[i], end = row_start_[i + 1];
                std::span<const TruncatedMsg> in(v2c_msg.data() + b, static_cast<std::size_t>(end - b));
                std::span<const GfElem> coeff(edge_val_.data() + b, static_cast<std::size_t>(end - b));
                auto out = c2v(in, coeff, opt.n_m, opt.bubbles, F);
                for (int e = b; e < end; ++e) {
                    c2v_msg[e] = std::move(out[e - b]);
                    assert(c2v_msg[e].valid(q));
                }
            }
            for (int j = 0; j < h.N; ++j) {
                std::copy(llrs[j].begin(), llrs[j].end(), post.begin());
                for (int e : col_edges_[j])
                    c2v_msg[e].add_to(post);
                res.symbols[j] = argmax(post);
            }
            res.iterations_used = it;
            if (h.is_codeword(res.symbols)) {
                res.syndrome_ok = true;
                return res;
            }
        }
        return res;
    }

    static GfElem argmax(std::span<const double> v)
    {
        std::size_t best = 0;
        for (std::size_t a = 1; a < v.size(); ++a)
            if (v[a] > v[best])
                best = a;
        return static_cast<GfElem>(best);
    }

private:
    const NbPcm* h_;
    std::vector<int> row_start_;
    std::vector<int> edge_col_;
    std::vector<GfElem> edge_val_;
    std::vector<std::vector<int>> col_edges_;
};

inline NbDecodeResult ems_decode(const NbPcm& h, std::span<const DenseLlr> symbol_llrs, const EmsOptions& opt)
{
    return EmsDecoder(h).decode(symbol_llrs, opt);
}

// ---------------------------------------------------------------------------
// Construction

/// PEG structure with uniformly random nonzero coefficients. Coefficients are
/// redrawn until H has full rank over GF(q); pivot columns are then moved to
/// the front so the layout is [parity | message].
inline NbPcm generate_nb_pcm(int N, int M, int dv, const FieldTables& field, std::uint64_t seed, int attempts = 256)
{
    if (M <= 0 || M >= N)
        throw std::invalid_argument("need 0 < M < N");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coeff(1, field.q() - 1);
    NbPcm best;
    int best_rank = -1;
    std::vector<std::vector<int>> structure;
    for (int a = 0; a < attempts; ++a) {
        if (a % 16 == 0)
            structure = peg_columns(M, N, dv, rng);
        std::vector<std::vector<NbEntry>> cols(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j)
            for (int i : structure[j])
                cols[j].push_back({i, static_cast<GfElem>(coeff(rng))});
        auto h = NbPcm::from_columns(M, N, field, std::move(cols));
        const int r = NbEncoder(h).rank();
        if (r > best_rank) {
            best_rank = r;
            best = std::move(h);
        }
        if (r == M)
            break;
    }
    NbEncoder enc(best);
    std::vector<int> order;
    std::vector<char> info(static_cast<std::size_t>(N), 0);
    for (int f : enc.info_positions())
        info[f] = 1;
    for (int j = 0; j < N; ++j)
        if (!info[j])
            order.push_back(j);
    for (int f : enc.info_positions())
        order.push_back(f);
    std::vector<std::vector<NbEntry>> cols(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j)
        cols[j] = best.cols[order[j]];
    return NbPcm::from_columns(M, N, field, std::move(cols));
}

} // namespace ftn
