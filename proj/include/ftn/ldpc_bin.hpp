#pragma once

// Binary LDPC codes: alist I/O, systematic encoding by Gaussian elimination,
// flooding min-sum decoding and a progressive-edge-growth generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftn {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    int line() const { return line_; }

private:
    int line_;
};

namespace detail {

/// Line-oriented integer reader that remembers where each token came from.
class TokenReader {
public:
    explicit TokenReader(std::istream& in)
    {
        std::string text;
        int lineno = 0;
        while (std::getline(in, text)) {
            ++lineno;
            std::istringstream ls(text);
            std::vector<long> row;
            std::string tok;
            while (ls >> tok) {
                std::size_t used = 0;
                long v = 0;
                try {
                    v = std::stol(tok, &used);
                } catch (const std::exception&) {
                    throw ParseError("expected an integer, found '" + tok + "'", lineno);
                }
                if (used != tok.size())
                    throw ParseError("expected an integer, found '" + tok + "'", lineno);
                row.push_back(v);
            }
            if (!row.empty())
                lines_.push_back({lineno, std::move(row)});
        }
    }

    bool done() const { return cur_ >= lines_.size(); }
    int line() const { return done() ? (lines_.empty() ? 0 : lines_.back().number + 1) : lines_[cur_].number; }

    std::vector<long> next_line(const char* what)
    {
        if (done())
            throw ParseError(std::string("unexpected end of file while reading ") + what, line());
        return lines_[cur_++].values;
    }

    /// Reads `count` integers, which may span several lines.
    std::vector<long> take(std::size_t count, const char* what)
    {
        std::vector<long> out;
        while (out.size() < count) {
            if (done())
                throw ParseError(std::string("unexpected end of file while reading ") + what, line());
            auto& l = lines_[cur_];
            for (; pos_ < l.values.size() && out.size() < count; ++pos_)
                out.push_back(l.values[pos_]);
            if (pos_ == l.values.size()) {
                ++cur_;
                pos_ = 0;
            }
        }
        return out;
    }

    /// Reads one full line of exactly `count` values (a line may not be split).
    std::vector<long> line_of(std::size_t count, const char* what)
    {
        const int ln = line();
        auto v = next_line(what);
        if (v.size() != count)
            throw ParseError(std::string(what) + ": expected " + std::to_string(count) + " values, found " +
                                 std::to_string(v.size()),
                             ln);
        return v;
    }

private:
    struct Line {
        int number;
        std::vector<long> values;
    };
    std::vector<Line> lines_;
    std::size_t cur_ = 0;
    std::size_t pos_ = 0;
};

} // namespace detail

struct BinPcm {
    int M = 0; ///< rows (checks)
    int N = 0; ///< columns (bits)
    std::vector<std::vector<int>> cols; ///< rows adjacent to each column, ascending
    std::vector<std::vector<int>> rows; ///< columns adjacent to each row, ascending
    int dv_max = 0;
    int dc_max = 0;

    std::size_t edges() const
    {
        std::size_t e = 0;
        for (auto& c : cols)
            e += c.size();
        return e;
    }

    /// Builds both adjacency views from the column view.
    static BinPcm from_columns(int M, int N, std::vector<std::vector<int>> cols)
    {
        BinPcm h;
        h.M = M;
        h.N = N;
        h.rows.assign(static_cast<std::size_t>(M), {});
        for (int j = 0; j < N; ++j) {
            auto& c = cols[j];
            std::sort(c.begin(), c.end());
            if (std::adjacent_find(c.begin(), c.end()) != c.end())
                throw std::invalid_argument("repeated edge in column " + std::to_string(j));
            for (int i : c) {
                if (i < 0 || i >= M)
                    throw std::invalid_argument("row index out of range in column " + std::to_string(j));
                h.rows[i].push_back(j);
            }
            h.dv_max = std::max(h.dv_max, static_cast<int>(c.size()));
        }
        for (auto& r : h.rows)
            h.dc_max = std::max(h.dc_max, static_cast<int>(r.size()));
        h.cols = std::move(cols);
        return h;
    }

    std::vector<std::uint8_t> syndrome(std::span<const std::uint8_t> bits) const
    {
        std::vector<std::uint8_t> s(static_cast<std::size_t>(M), 0);
        for (int i = 0; i < M; ++i)
            for (int j : rows[i])
                s[i] ^= bits[j] & 1u;
        return s;
    }

    bool is_codeword(std::span<const std::uint8_t> bits) const
    {
        for (int i = 0; i < M; ++i) {
            std::uint8_t acc = 0;
            for (int j : rows[i])
                acc ^= bits[j] & 1u;
            if (acc)
                return false;
        }
        return true;
    }
};

/// Classical alist: "N M", "dv_max dc_max", column degrees, row degrees,
/// then one line per column and one per row of 1-indexed neighbours,
/// zero-padded to the maximum degree.
inline BinPcm parse_alist(std::istream& in)
{
    detail::TokenReader rd(in);
    const int hdr_line = rd.line();
    auto hdr = rd.next_line("header");
    if (hdr.size() != 2)
        throw ParseError("binary alist header must hold exactly 'N M', found " + std::to_string(hdr.size()) +
                             " values",
                         hdr_line);
    const long N = hdr[0], M = hdr[1];
    if (N <= 0 || M <= 0)
        throw ParseError("dimensions must be positive", hdr_line);
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

    std::vector<std::vector<int>> cols(static_cast<std::size_t>(N));
    for (long j = 0; j < N; ++j) {
        const int ln = rd.line();
        auto v = rd.next_line("column list");
        if (static_cast<long>(v.size()) < cdeg[j] || static_cast<long>(v.size()) > dv_max)
            throw ParseError("column " + std::to_string(j + 1) + " lists " + std::to_string(v.size()) +
                                 " entries, degree is " + std::to_string(cdeg[j]),
                             ln);
        for (std::size_t t = 0; t < v.size(); ++t) {
            if (static_cast<long>(t) >= cdeg[j]) {
                if (v[t] != 0)
                    throw ParseError("nonzero padding in column " + std::to_string(j + 1), ln);
                continue;
            }
            if (v[t] < 1 || v[t] > M)
                throw ParseError("row index " + std::to_string(v[t]) + " out of range", ln);
            cols[j].push_back(static_cast<int>(v[t] - 1));
        }
    }
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(M));
    for (long i = 0; i < M; ++i) {
        const int ln = rd.line();
        auto v = rd.next_line("row list");
        if (static_cast<long>(v.size()) < rdeg[i] || static_cast<long>(v.size()) > dc_max)
            throw ParseError("row " + std::to_string(i + 1) + " lists " + std::to_string(v.size()) +
                                 " entries, degree is " + std::to_string(rdeg[i]),
                             ln);
        for (std::size_t t = 0; t < v.size(); ++t) {
            if (static_cast<long>(t) >= rdeg[i]) {
                if (v[t] != 0)
                    throw ParseError("nonzero padding in row " + std::to_string(i + 1), ln);
                continue;
            }
            if (v[t] < 1 || v[t] > N)
                throw ParseError("column index " + std::to_string(v[t]) + " out of range", ln);
            rows[i].push_back(static_cast<int>(v[t] - 1));
        }
    }
    if (!rd.done())
        throw ParseError("trailing data after row lists", rd.line());

    BinPcm h;
    try {
        h = BinPcm::from_columns(static_cast<int>(M), static_cast<int>(N), std::move(cols));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), cdeg_line);
    }
    for (auto& r : rows)
        std::sort(r.begin(), r.end());
    if (rows != h.rows)
        throw ParseError("row lists are not the transpose of the column lists", rdeg_line);
    if (h.dv_max != dv_max || h.dc_max != dc_max)
        throw ParseError("declared maximum degrees do not match the lists", deg_line);
    return h;
}

inline BinPcm parse_alist(const std::string& text)
{
    std::istringstream in(text);
    return parse_alist(in);
}

inline void write_alist(std::ostream& out, const BinPcm& h)
{
    out << h.N << ' ' << h.M << '\n' << h.dv_max << ' ' << h.dc_max << '\n';
    for (int j = 0; j < h.N; ++j)
        out << h.cols[j].size() << (j + 1 < h.N ? ' ' : '\n');
    for (int i = 0; i < h.M; ++i)
        out << h.rows[i].size() << (i + 1 < h.M ? ' ' : '\n');
    auto emit = [&](const std::vector<int>& list, int width) {
        for (int t = 0; t < width; ++t) {
            if (t)
                out << ' ';
            out << (t < static_cast<int>(list.size()) ? list[t] + 1 : 0);
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

/// Systematic encoder from the reduced row-echelon form of H. Pivot columns
/// are searched left to right, so a code whose leading M columns are
/// independent gets the layout [parity | message].
class BinEncoder {
public:
    explicit BinEncoder(const BinPcm& h) : N_(h.N)
    {
        const std::size_t words = (static_cast<std::size_t>(N_) + 63) / 64;
        std::vector<std::vector<std::uint64_t>> A(static_cast<std::size_t>(h.M), std::vector<std::uint64_t>(words));
        for (int i = 0; i < h.M; ++i)
            for (int j : h.rows[i])
                A[i][j / 64] |= std::uint64_t{1} << (j % 64);

        std::vector<char> is_pivot(static_cast<std::size_t>(N_), 0);
        int r = 0;
        for (int col = 0; col < N_ && r < h.M; ++col) {
            const std::uint64_t bit = std::uint64_t{1} << (col % 64);
            const std::size_t w = static_cast<std::size_t>(col / 64);
            int sel = -1;
            for (int i = r; i < h.M; ++i)
                if (A[i][w] & bit) {
                    sel = i;
                    break;
                }
            if (sel < 0)
                continue;
            std::swap(A[r], A[sel]);
            for (int i = 0; i < h.M; ++i)
                if (i != r && (A[i][w] & bit))
                    for (std::size_t t = 0; t < words; ++t)
                        A[i][t] ^= A[r][t];
            pivots_.push_back(col);
            is_pivot[col] = 1;
            ++r;
        }
        for (int j = 0; j < N_; ++j)
            if (!is_pivot[j])
                info_.push_back(j);
        // Row t of the reduced form: c[pivot_t] = xor of c[f] over free f in the row.
        deps_.resize(pivots_.size());
        for (std::size_t t = 0; t < pivots_.size(); ++t)
            for (int f : info_)
                if (A[t][f / 64] >> (f % 64) & 1u)
                    deps_[t].push_back(f);
    }

    int n() const { return N_; }
    int k() const { return static_cast<int>(info_.size()); }
    int rank() const { return static_cast<int>(pivots_.size()); }
    /// Codeword positions carrying the message bits, in message order.
    const std::vector<int>& info_positions() const { return info_; }

    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> msg) const
    {
        if (static_cast<int>(msg.size()) != k())
            throw std::invalid_argument("message length " + std::to_string(msg.size()) + " != k = " +
                                        std::to_string(k()));
        std::vector<std::uint8_t> c(static_cast<std::size_t>(N_), 0);
        for (std::size_t t = 0; t < info_.size(); ++t)
            c[info_[t]] = msg[t] & 1u;
        for (std::size_t t = 0; t < pivots_.size(); ++t) {
            std::uint8_t acc = 0;
            for (int f : deps_[t])
                acc ^= c[f];
            c[pivots_[t]] = acc;
        }
        return c;
    }

private:
    int N_;
    std::vector<int> pivots_;
    std::vector<int> info_;
    std::vector<std::vector<int>> deps_;
};

inline std::vector<std::uint8_t> encode_bin(const BinPcm& h, std::span<const std::uint8_t> msg)
{
    return BinEncoder(h).encode(msg);
}

// ---------------------------------------------------------------------------
// Min-sum decoding

struct DecodeResult {
    std::vector<std::uint8_t> hard_bits;
    int iterations_used = 0;
    bool syndrome_ok = false;
};

struct MinSumOptions {
    int max_iter = 10;
    double normalization = 1.0; ///< scale applied to check-node outputs; 1 = plain min-sum
};

/// Flooding min-sum. The channel decision is checked before the first
/// iteration, so a valid codeword costs zero iterations.
class MinSumDecoder {
public:
    explicit MinSumDecoder(const BinPcm& h) : h_(&h)
    {
        // Edges are numbered row by row; col_edges maps each column to its edge ids.
        row_start_.push_back(0);
        col_edges_.assign(static_cast<std::size_t>(h.N), {});
        for (int i = 0; i < h.M; ++i) {
            for (int j : h.rows[i]) {
                col_edges_[j].push_back(static_cast<int>(edge_col_.size()));
                edge_col_.push_back(j);
            }
            row_start_.push_back(static_cast<int>(edge_col_.size()));
        }
    }

    DecodeResult decode(std::span<const double> llr, const MinSumOptions& opt = {}) const
    {
        const auto& h = *h_;
        if (static_cast<int>(llr.size()) != h.N)
            throw std::invalid_argument("LLR length does not match the code length");
        DecodeResult res;
        res.hard_bits.resize(static_cast<std::size_t>(h.N));
        for (int j = 0; j < h.N; ++j)
            res.hard_bits[j] = llr[j] < 0.0 ? 1 : 0;
        if (h.is_codeword(res.hard_bits)) {
            res.syndrome_ok = true;
            return res;
        }

        const std::size_t E = edge_col_.size();
        std::vector<double> v2c(E), c2v(E, 0.0);
        for (std::size_t e = 0; e < E; ++e)
            v2c[e] = llr[edge_col_[e]];

        for (int it = 1; it <= opt.max_iter; ++it) {
            for (int i = 0; i < h.M; ++i) {
                const int b = row_start_[i], end = row_start_[i + 1];
                double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
                int arg = -1;
                bool neg = false;
                for (int e = b; e < end; ++e) {
                    const double a = std::abs(v2c[e]);
                    neg ^= v2c[e] < 0.0;
                    if (a < min1) {
                        min2 = min1;
                        min1 = a;
                        arg = e;
                    } else if (a < min2) {
                        min2 = a;
                    }
                }
                for (int e = b; e < end; ++e) {
                    const double mag = (e == arg ? min2 : min1) * opt.normalization;
                    const bool s = neg ^ (v2c[e] < 0.0);
                    c2v[e] = s ? -mag : mag;
                }
            }
            for (int j = 0; j < h.N; ++j) {
                double total = llr[j];
                for (int e : col_edges_[j])
                    total += c2v[e];
                for (int e : col_edges_[j])
                    v2c[e] = total - c2v[e];
                res.hard_bits[j] = total < 0.0 ? 1 : 0;
            }
            res.iterations_used = it;
            if (h.is_codeword(res.hard_bits)) {
                res.syndrome_ok = true;
                return res;
            }
        }
        return res;
    }

private:
    const BinPcm* h_;
    std::vector<int> row_start_;
    std::vector<int> edge_col_;
    std::vector<std::vector<int>> col_edges_;
};

inline DecodeResult min_sum_decode(const BinPcm& h, std::span<const double> llr, int max_iter)
{
    return MinSumDecoder(h).decode(llr, {max_iter, 1.0});
}

// ---------------------------------------------------------------------------
// Construction

/// Progressive edge growth: each new edge of a variable goes to a check at
/// maximum graph distance (unreached if possible), least-loaded first, ties
/// broken at random. Returns the column adjacency.
inline std::vector<std::vector<int>> peg_columns(int M, int N, int dv, std::mt19937_64& rng)
{
    if (dv < 1 || dv > M)
        throw std::invalid_argument("infeasible degree profile: d_v = " + std::to_string(dv) + " with " +
                                    std::to_string(M) + " checks");
    std::vector<std::vector<int>> cols(static_cast<std::size_t>(N));
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(M));
    std::vector<int> seen_c(static_cast<std::size_t>(M)), seen_v(static_cast<std::size_t>(N));
    int stamp = 0;

    auto pick = [&](const std::vector<int>& cands) {
        int best = std::numeric_limits<int>::max();
        std::vector<int> ties;
        for (int c : cands) {
            const int d = static_cast<int>(rows[c].size());
            if (d < best) {
                best = d;
                ties.clear();
            }
            if (d == best)
                ties.push_back(c);
        }
        std::uniform_int_distribution<std::size_t> u(0, ties.size() - 1);
        return ties[u(rng)];
    };

    for (int j = 0; j < N; ++j) {
        for (int t = 0; t < dv; ++t) {
            std::vector<int> cands;
            if (t == 0) {
                cands.resize(static_cast<std::size_t>(M));
                std::iota(cands.begin(), cands.end(), 0);
            } else {
                // Breadth-first expansion from j over the current graph.
                ++stamp;
                std::vector<int> frontier_v{j};
                seen_v[j] = stamp;
                std::vector<int> reached;
                for (int c : cols[j]) {
                    seen_c[c] = stamp;
                    reached.push_back(c);
                }
                std::vector<int> last_new = reached;
                while (true) {
                    std::vector<int> next_v;
                    for (int c : last_new)
                        for (int v : rows[c])
                            if (seen_v[v] != stamp) {
                                seen_v[v] = stamp;
                                next_v.push_back(v);
                            }
                    std::vector<int> new_c;
                    for (int v : next_v)
                        for (int c : cols[v])
                            if (seen_c[c] != stamp) {
                                seen_c[c] = stamp;
                                new_c.push_back(c);
                            }
                    if (new_c.empty() || static_cast<int>(reached.size() + new_c.size()) == M) {
                        if (static_cast<int>(reached.size() + new_c.size()) == M && !new_c.empty()) {
                            cands = new_c; // everything reachable: take the deepest layer
                        } else {
                            for (int c = 0; c < M; ++c)
                                if (seen_c[c] != stamp)
                                    cands.push_back(c);
                        }
                        break;
                    }
                    reached.insert(reached.end(), new_c.begin(), new_c.end());
                    last_new = std::move(new_c);
                }
                // Never duplicate an edge.
                std::erase_if(cands, [&](int c) {
                    return std::find(cols[j].begin(), cols[j].end(), c) != cols[j].end();
                });
                if (cands.empty())
                    for (int c = 0; c < M; ++c)
                        if (std::find(cols[j].begin(), cols[j].end(), c) == cols[j].end())
                            cands.push_back(c);
            }
            const int c = pick(cands);
            cols[j].push_back(c);
            rows[c].push_back(j);
        }
    }
    return cols;
}

inline int gf2_rank(const BinPcm& h) { return BinEncoder(h).rank(); }

/// PEG code with columns reordered so the pivot columns lead. Retries with
/// fresh randomness until H has full row rank, keeping the best attempt.
inline BinPcm generate_bin_pcm(int N, int M, int dv, std::uint64_t seed, int attempts = 64)
{
    if (M <= 0 || M >= N)
        throw std::invalid_argument("need 0 < M < N");
    std::mt19937_64 rng(seed);
    BinPcm best;
    int best_rank = -1;
    for (int a = 0; a < attempts; ++a) {
        auto h = BinPcm::from_columns(M, N, peg_columns(M, N, dv, rng));
        const int r = gf2_rank(h);
        if (r > best_rank) {
            best_rank = r;
            best = std::move(h);
        }
        if (r == M)
            break;
    }
    // Move the pivot columns to the front so the layout is [parity | message].
    BinEncoder enc(best);
    std::vector<int> order;
    std::vector<char> info(static_cast<std::size_t>(N), 0);
    for (int f : enc.info_positions())
        info[f] = 1;
    for (int j = 0; j < N; ++j)
        if (!info[j])
            order.push_back(j);
    for (int f : enc.info_positions())
        order.push_back(f);
    std::vector<std::vector<int>> cols(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j)
        cols[j] = best.cols[order[j]];
    return BinPcm::from_columns(M, N, std::move(cols));
}

} // namespace ftn
