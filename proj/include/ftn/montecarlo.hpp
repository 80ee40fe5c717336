#pragma once

// End-to-end Monte-Carlo BER/FER measurement of a coded FTN link:
// encode -> BPSK -> FTN transmit -> AWGN -> matched filter -> detect -> decode.
//
// Every frame draws from its own generator seeded by (seed, point, frame), and
// frames are tallied strictly in index order, so the statistics do not depend
// on how many workers computed them.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ftn/channel.hpp"
#include "ftn/detectors.hpp"
#include "ftn/galois.hpp"
#include "ftn/ldpc_bin.hpp"
#include "ftn/nbldpc.hpp"
#include "ftn/opcount.hpp"
#include "ftn/waveform.hpp"

namespace ftn {

enum class CodeKind { Uncoded, Ldpc, NbLdpc };
enum class DetectorKind { Ssse, Gbk, Mbcjr };
enum class ChannelModel { Waveform, Discrete };

inline const char* to_string(CodeKind c)
{
    switch (c) {
    case CodeKind::Uncoded: return "uncoded";
    case CodeKind::Ldpc: return "ldpc";
    case CodeKind::NbLdpc: return "nbldpc";
    }
    return "?";
}
inline const char* to_string(DetectorKind d)
{
    switch (d) {
    case DetectorKind::Ssse: return "ssse";
    case DetectorKind::Gbk: return "gbk";
    case DetectorKind::Mbcjr: return "mbcjr";
    }
    return "?";
}
inline const char* to_string(ChannelModel m) { return m == ChannelModel::Waveform ? "waveform" : "discrete"; }

struct SimConfig {
    std::string name = "sim";
    double tau = 0.8;
    PulseSpec pulse{};
    double isi_threshold = 1e-3;
    double whiten_threshold = 1e-3;
    ChannelModel channel = ChannelModel::Waveform;

    CodeKind code = CodeKind::Uncoded;
    std::string pcm_path;
    int uncoded_length = 128;
    int field_m = 6;
    unsigned primitive_poly = 0; ///< 0 selects the default for field_m

    DetectorKind detector = DetectorKind::Gbk;
    int K = 1;
    int M = 32;
    double llr_cap = default_llr_cap;

    std::vector<double> ebn0_db{};
    long max_frames = 100000;
    long target_frame_errors = 30;
    int max_iter = 10;
    std::uint64_t seed = 1;
    int workers = 1;

    EmsOptions ems{};
    double minsum_normalization = 1.0;
    GateWeights weights{};
    bool report_timing = false;

    /// Detector label such as "gbk1" or "mbcjr32".
    std::string detector_label() const
    {
        switch (detector) {
        case DetectorKind::Ssse: return "ssse";
        case DetectorKind::Gbk: return "gbk" + std::to_string(K);
        case DetectorKind::Mbcjr: return "mbcjr" + std::to_string(M);
        }
        return "?";
    }
    std::string scheme() const { return std::string(to_string(code)) + "+" + detector_label(); }

    void validate() const
    {
        auto fail = [](const std::string& field, const std::string& msg) {
            throw std::invalid_argument(field + ": " + msg);
        };
        pulse.validate();
        symbol_step(tau, pulse.sps);
        if (target_frame_errors < 1)
            fail("target_frame_errors", "must be >= 1");
        if (max_frames < target_frame_errors)
            fail("max_frames", "must be >= target_frame_errors");
        if (max_iter < 0)
            fail("max_iter", "must be >= 0");
        if (workers < 1)
            fail("workers", "must be >= 1");
        if (detector == DetectorKind::Gbk && K < 0)
            fail("K", "must be >= 0");
        if (detector == DetectorKind::Mbcjr && M < 1)
            fail("M", "must be >= 1");
        if (code != CodeKind::Uncoded && pcm_path.empty())
            fail("pcm", "a parity-check matrix file is required for coded runs");
        if (code == CodeKind::Uncoded && uncoded_length < 1)
            fail("uncoded_length", "must be >= 1");
        if (code == CodeKind::NbLdpc) {
            if (field_m < 2 || field_m > 8)
                fail("field_m", "must lie in 2..8");
            if (ems.n_m < 1)
                fail("ems.n_m", "must be >= 1");
            if (ems.bubbles < 1)
                fail("ems.bubbles", "must be >= 1");
        }
        if (!(isi_threshold > 0.0) || !(whiten_threshold > 0.0))
            fail("threshold", "must be positive");
    }
};

struct BerRecord {
    double ebn0_db = 0.0;
    long frames = 0;
    long bit_errors = 0;
    long frame_errors = 0;
    double ber = 0.0;
    double fer = 0.0;
    double avg_iters = 0.0;
    OpCounts avg_ops{};
    double seconds = 0.0;

    bool operator==(const BerRecord&) const = default;
};

struct FrameOutcome {
    long bit_errors = 0;
    bool frame_error = false;
    int iterations = 0;
    OpCounts ops{};
};

/// Everything about a configured link that is fixed across frames.
class Link {
public:
    explicit Link(SimConfig cfg) : cfg_(std::move(cfg))
    {
        cfg_.validate();
        taps_ = rrc_taps(cfg_.pulse);
        isi_ = isi_profile(taps_, cfg_.tau, cfg_.isi_threshold);

        switch (cfg_.code) {
        case CodeKind::Uncoded:
            n_symbols_ = cfg_.uncoded_length;
            info_bits_ = cfg_.uncoded_length;
            break;
        case CodeKind::Ldpc: {
            std::ifstream in(cfg_.pcm_path);
            if (!in)
                throw std::invalid_argument("pcm: cannot open '" + cfg_.pcm_path + "'");
            bin_ = std::make_unique<BinPcm>(parse_alist(in));
            bin_enc_ = std::make_unique<BinEncoder>(*bin_);
            bin_dec_ = std::make_unique<MinSumDecoder>(*bin_);
            n_symbols_ = bin_->N;
            info_bits_ = bin_enc_->k();
            break;
        }
        case CodeKind::NbLdpc: {
            std::ifstream in(cfg_.pcm_path);
            if (!in)
                throw std::invalid_argument("pcm: cannot open '" + cfg_.pcm_path + "'");
            const unsigned poly = cfg_.primitive_poly ? cfg_.primitive_poly : default_primitive_poly(cfg_.field_m);
            nb_ = std::make_unique<NbPcm>(parse_nb_alist(in, build_field(cfg_.field_m, poly)));
            nb_enc_ = std::make_unique<NbEncoder>(*nb_);
            nb_dec_ = std::make_unique<EmsDecoder>(*nb_);
            n_symbols_ = nb_->N * cfg_.field_m;
            info_bits_ = nb_enc_->k() * cfg_.field_m;
            break;
        }
        }
        if (info_bits_ < 1)
            throw std::invalid_argument("pcm: code has no information bits");
        rate_ = double(info_bits_) / double(n_symbols_);

        if (cfg_.detector == DetectorKind::Mbcjr)
            whitened_ = std::make_unique<WhitenedModel>(isi_, n_symbols_, cfg_.whiten_threshold);
        if (cfg_.channel == ChannelModel::Discrete)
            discrete_ = std::make_unique<DiscreteChannel>(isi_, n_symbols_);

        detector_ops_ = detector_ops_per_symbol() * double(n_symbols_);
        decoder_ops_ = decoder_ops_per_iteration();
    }

    const SimConfig& config() const { return cfg_; }
    const IsiProfile& isi() const { return isi_; }
    const PulseTaps& taps() const { return taps_; }
    int symbols_per_frame() const { return n_symbols_; }
    int info_bits_per_frame() const { return info_bits_; }
    double rate() const { return rate_; }
    int trellis_memory() const { return whitened_ ? whitened_->memory() : 0; }
    const OpCounts& detector_ops() const { return detector_ops_; }
    const OpCounts& decoder_ops() const { return decoder_ops_; }

    OpCounts detector_ops_per_symbol() const
    {
        switch (cfg_.detector) {
        case DetectorKind::Ssse: return DetectorCostModel::ssse_per_symbol(isi_.L);
        case DetectorKind::Gbk: return DetectorCostModel::gbk_per_symbol(std::min(cfg_.K, isi_.L), isi_.L);
        case DetectorKind::Mbcjr: return DetectorCostModel::mbcjr_per_symbol(cfg_.M, trellis_memory());
        }
        return {};
    }

    /// Operation count of one decoder iteration over the whole codeword.
    OpCounts decoder_ops_per_iteration() const
    {
        OpCounts total;
        if (bin_) {
            const int dv = int(std::lround(double(bin_->edges()) / bin_->N));
            for (const auto& r : bin_->rows)
                if (r.size() >= 2)
                    total += ldpc_ops(int(r.size()), std::max(dv, 1));
        } else if (nb_) {
            std::size_t edges = 0;
            for (const auto& c : nb_->cols)
                edges += c.size();
            const int dv = int(std::lround(double(edges) / nb_->N));
            for (const auto& r : nb_->rows)
                if (r.size() >= 2)
                    total += nbldpc_ops(int(r.size()), std::max(dv, 1), std::max(cfg_.ems.n_m, 2), nb_->q());
        }
        return total;
    }

    FrameOutcome simulate_frame(double ebn0_db, std::uint64_t frame_seed) const
    {
        Rng rng(frame_seed);
        std::uniform_int_distribution<int> coin(0, 1);
        const double Es = 1.0;
        const NoiseSpec ns = sigma_from_ebn0(ebn0_db, rate_, Es, cfg_.pulse.sps);

        // Source and encoder.
        std::vector<std::uint8_t> info_bits(static_cast<std::size_t>(info_bits_));
        std::vector<std::uint8_t> coded;
        std::vector<GfElem> nb_codeword;
        if (cfg_.code == CodeKind::NbLdpc) {
            const int m = cfg_.field_m;
            std::vector<GfElem> msg(static_cast<std::size_t>(nb_enc_->k()));
            for (auto& s : msg) {
                GfElem v = 0;
                for (int b = 0; b < m; ++b)
                    v |= static_cast<GfElem>(coin(rng) << b);
                s = v;
            }
            nb_codeword = nb_enc_->encode(msg);
            coded.reserve(static_cast<std::size_t>(n_symbols_));
            for (GfElem s : nb_codeword)
                for (int b = 0; b < m; ++b)
                    coded.push_back(static_cast<std::uint8_t>((s >> b) & 1));
        } else {
            for (auto& b : info_bits)
                b = static_cast<std::uint8_t>(coin(rng));
            coded = cfg_.code == CodeKind::Ldpc ? bin_enc_->encode(info_bits) : info_bits;
        }

        // Channel.
        const SymbolFrame frame = modulate_bpsk(coded, Es);
        std::vector<double> y;
        if (discrete_) {
            y = discrete_->sample(frame.symbols, Es, ns.N0, rng);
        } else {
            const auto s = ftn_transmit(frame, taps_, cfg_.tau);
            const auto r = add_awgn(s, ns, rng);
            y = matched_filter_sample(r, taps_, cfg_.tau, n_symbols_);
        }

        // Detection.
        std::vector<double> llr;
        switch (cfg_.detector) {
        case DetectorKind::Ssse:
            llr = demod_soft(ssse_detect(y, isi_, Es), y, isi_, Es, ns.N0, cfg_.llr_cap);
            break;
        case DetectorKind::Gbk:
            llr = demod_soft(gbk_detect(y, isi_, Es, GbkConfig::make(cfg_.K, isi_)), y, isi_, Es, ns.N0,
                             cfg_.llr_cap);
            break;
        case DetectorKind::Mbcjr: llr = mbcjr_detect(y, *whitened_, Es, ns.N0, cfg_.M); break;
        }

        // Decoding and error count on the information bits.
        FrameOutcome out;
        out.ops = detector_ops_;
        switch (cfg_.code) {
        case CodeKind::Uncoded:
            for (int i = 0; i < info_bits_; ++i)
                out.bit_errors += (llr[i] < 0.0 ? 1 : 0) != info_bits[i];
            break;
        case CodeKind::Ldpc: {
            const auto res = bin_dec_->decode(llr, {cfg_.max_iter, cfg_.minsum_normalization});
            const auto& pos = bin_enc_->info_positions();
            for (int i = 0; i < info_bits_; ++i)
                out.bit_errors += res.hard_bits[pos[i]] != info_bits[i];
            out.iterations = res.iterations_used;
            break;
        }
        case CodeKind::NbLdpc: {
            const int m = cfg_.field_m;
            std::vector<DenseLlr> sym_llr(static_cast<std::size_t>(nb_->N));
            for (int j = 0; j < nb_->N; ++j)
                sym_llr[j] = bitllr_to_symbolllr(std::span<const double>(llr).subspan(std::size_t(j) * m, m),
                                                 nb_->field);
            EmsOptions opt = cfg_.ems;
            opt.max_iter = cfg_.max_iter;
            const auto res = nb_dec_->decode(sym_llr, opt);
            for (int p : nb_enc_->info_positions())
                out.bit_errors += std::popcount(static_cast<unsigned>(res.symbols[p] ^ nb_codeword[p]));
            out.iterations = res.iterations_used;
            break;
        }
        }
        out.frame_error = out.bit_errors > 0;
        out.ops += decoder_ops_ * double(out.iterations);
        return out;
    }

private:
    SimConfig cfg_;
    PulseTaps taps_;
    IsiProfile isi_;
    int n_symbols_ = 0;
    int info_bits_ = 0;
    double rate_ = 1.0;
    std::unique_ptr<BinPcm> bin_;
    std::unique_ptr<BinEncoder> bin_enc_;
    std::unique_ptr<MinSumDecoder> bin_dec_;
    std::unique_ptr<NbPcm> nb_;
    std::unique_ptr<NbEncoder> nb_enc_;
    std::unique_ptr<EmsDecoder> nb_dec_;
    std::unique_ptr<WhitenedModel> whitened_;
    std::unique_ptr<DiscreteChannel> discrete_;
    OpCounts detector_ops_{};
    OpCounts decoder_ops_{};
};

inline std::uint64_t point_seed(std::uint64_t seed, std::size_t point_index) { return seed ^ point_index; }

inline std::uint64_t frame_seed(std::uint64_t point_seed, std::uint64_t frame)
{
    return mix_seed(mix_seed(point_seed) + frame);
}

/// Simulates frames in index order until the frame-error target or the frame
/// budget is reached.
inline BerRecord run_point(const Link& link, double ebn0_db, std::size_t point_index = 0)
{
    const auto& cfg = link.config();
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t pseed = point_seed(cfg.seed, point_index);
    constexpr long batch = 64;

    BerRecord rec;
    rec.ebn0_db = ebn0_db;
    double iters = 0.0;
    OpCounts ops{};
    std::vector<FrameOutcome> outcomes;
    bool done = false;
    for (long start = 0; start < cfg.max_frames && !done; start += batch) {
        const long count = std::min(batch, cfg.max_frames - start);
        outcomes.assign(static_cast<std::size_t>(count), {});
        if (cfg.workers <= 1) {
            for (long f = 0; f < count; ++f)
                outcomes[f] = link.simulate_frame(ebn0_db, frame_seed(pseed, std::uint64_t(start + f)));
        } else {
            std::atomic<long> next{0};
            std::vector<std::jthread> pool;
            for (int w = 0; w < cfg.workers; ++w)
                pool.emplace_back([&] {
                    for (long f; (f = next.fetch_add(1)) < count;)
                        outcomes[f] = link.simulate_frame(ebn0_db, frame_seed(pseed, std::uint64_t(start + f)));
                });
        }
        for (const auto& o : outcomes) {
            ++rec.frames;
            rec.bit_errors += o.bit_errors;
            rec.frame_errors += o.frame_error ? 1 : 0;
            iters += o.iterations;
            ops += o.ops;
            if (rec.frame_errors >= cfg.target_frame_errors) {
                done = true;
                break;
            }
        }
    }
    rec.ber = double(rec.bit_errors) / (double(rec.frames) * link.info_bits_per_frame());
    rec.fer = double(rec.frame_errors) / double(rec.frames);
    rec.avg_iters = iters / double(rec.frames);
    rec.avg_ops = ops * (1.0 / double(rec.frames));
    if (cfg.report_timing)
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

inline BerRecord run_point(const SimConfig& cfg, double ebn0_db) { return run_point(Link(cfg), ebn0_db, 0); }

inline std::vector<BerRecord> sweep(const SimConfig& cfg)
{
    if (cfg.ebn0_db.empty())
        throw std::invalid_argument("ebn0_db: the sweep needs at least one point");
    Link link(cfg);
    std::vector<BerRecord> out;
    for (std::size_t p = 0; p < cfg.ebn0_db.size(); ++p)
        out.push_back(run_point(link, cfg.ebn0_db[p], p));
    return out;
}

// ---------------------------------------------------------------------------
// CSV

inline const char* ber_csv_header =
    "ebn0_db,frames,bit_errors,frame_errors,ber,fer,avg_iters,avg_ops_add,avg_ops_sub,avg_ops_cmp,avg_ops_xor,seconds";

namespace detail {
inline std::string fmt_real(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}
} // namespace detail

inline void write_ber_csv(std::ostream& out, const SimConfig& cfg, const Link& link,
                          const std::vector<BerRecord>& recs)
{
    using detail::fmt_real;
    out << "# scheme=" << cfg.scheme() << '\n'
        << "# name=" << cfg.name << '\n'
        << "# tau=" << fmt_real(cfg.tau) << " rolloff=" << fmt_real(cfg.pulse.rolloff) << " sps=" << cfg.pulse.sps
        << " span=" << cfg.pulse.span << " isi_L=" << link.isi().L << '\n'
        << "# channel_model=" << to_string(cfg.channel) << " seed=" << cfg.seed << '\n'
        << "# code=" << to_string(cfg.code) << " pcm=" << cfg.pcm_path << " n_bits=" << link.symbols_per_frame()
        << " info_bits=" << link.info_bits_per_frame() << " rate=" << fmt_real(link.rate()) << '\n';
    if (cfg.code == CodeKind::NbLdpc)
        out << "# ems n_m=" << cfg.ems.n_m << " offset=" << fmt_real(cfg.ems.offset) << " bubbles=" << cfg.ems.bubbles
            << " field_m=" << cfg.field_m << '\n';
    if (cfg.detector == DetectorKind::Mbcjr)
        out << "# trellis_memory=" << link.trellis_memory() << " M=" << cfg.M << '\n';
    out << "# protocol target_frame_errors=" << cfg.target_frame_errors << " max_frames=" << cfg.max_frames
        << " max_iter=" << cfg.max_iter << '\n'
        << "# conventions: snr is Eb/N0 per information bit (rate-adjusted); bit 0 -> +1; LLR = log P(0)/P(1);"
           " op counts are per frame, decoder counts per check node times check nodes per iteration\n"
        << ber_csv_header << '\n';
    for (const auto& r : recs) {
        out << fmt_real(r.ebn0_db) << ',' << r.frames << ',' << r.bit_errors << ',' << r.frame_errors << ','
            << fmt_real(r.ber) << ',' << fmt_real(r.fer) << ',' << fmt_real(r.avg_iters) << ','
            << fmt_real(r.avg_ops.additions) << ',' << fmt_real(r.avg_ops.subtractions) << ','
            << fmt_real(r.avg_ops.comparisons) << ',' << fmt_real(r.avg_ops.xors) << ',' << fmt_real(r.seconds)
            << '\n';
    }
}

inline std::vector<BerRecord> read_ber_csv(std::istream& in)
{
    std::vector<BerRecord> out;
    std::string line;
    bool header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        if (!header) {
            if (line != ber_csv_header)
                throw ParseError("unexpected CSV header", lineno);
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() != 12)
            throw ParseError("expected 12 columns, found " + std::to_string(f.size()), lineno);
        BerRecord r;
        try {
            r.ebn0_db = std::stod(f[0]);
            r.frames = std::stol(f[1]);
            r.bit_errors = std::stol(f[2]);
            r.frame_errors = std::stol(f[3]);
            r.ber = std::stod(f[4]);
            r.fer = std::stod(f[5]);
            r.avg_iters = std::stod(f[6]);
            r.avg_ops = {std::stod(f[7]), std::stod(f[8]), std::stod(f[9]), std::stod(f[10])};
            r.seconds = std::stod(f[11]);
        } catch (const std::exception&) {
            throw ParseError("malformed number", lineno);
        }
        out.push_back(r);
    }
    if (!header)
        throw ParseError("missing CSV header", lineno);
    return out;
}

/// SNR at which a BER curve crosses `target`, by linear interpolation of
/// log10(BER) against SNR between the bracketing points.
inline std::optional<double> snr_at_ber(const std::vector<BerRecord>& recs, double target)
{
    for (std::size_t i = 1; i < recs.size(); ++i) {
        const auto& a = recs[i - 1];
        const auto& b = recs[i];
        if (a.ber >= target && b.ber <= target && a.ber > 0.0) {
            if (b.ber <= 0.0)
                return b.ebn0_db;
            const double la = std::log10(a.ber), lb = std::log10(b.ber), lt = std::log10(target);
            if (la == lb)
                return a.ebn0_db;
            return a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db);
        }
    }
    return std::nullopt;
}

} // namespace ftn
