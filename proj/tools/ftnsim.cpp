// ftnsim: experiment runner for coded FTN links.
//
//   ftnsim run        --config exp.json [--seed S] [--workers W] [--paper-scale] [--out-dir D] [--dry-run]
//   ftnsim sweep      --config exp.json --sim NAME [--ebn0 2,3,4] [same flags as run]
//   ftnsim dry-run    --config exp.json [--out-dir D] [--paper-scale]
//   ftnsim complexity --config exp.json [--out-dir D] [--rerun] [--bits B]
//   ftnsim gen-pcm    --kind bin|nb --n BITS --rate R --dv D [--q Q] [--seed S] --out FILE
//
// Exit status: 0 on success, 2 on invalid configuration or arguments, 1 on
// runtime failure.

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ftn/config.hpp"

namespace fs = std::filesystem;
using namespace ftn;

namespace {

struct RunFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool full_budget = false;
    std::string out_dir;
    bool dry_run = false;
    std::string sim;
    std::vector<double> ebn0;
    bool rerun = false;
    std::optional<int> bits;
};

struct PcmFlags {
    std::string kind = "bin";
    int n = 0;
    double rate = 0.5;
    int dv = 3;
    int q = 64;
    std::uint64_t seed = 1;
    std::string out;
};

ExperimentFile load(const RunFlags& f)
{
    auto ex = load_experiment(f.config);
    for (auto& s : ex.sims) {
        if (f.seed)
            s.seed = *f.seed;
        if (f.workers)
            s.workers = *f.workers;
        if (f.full_budget)
            apply_full_budget(s);
        try {
            s.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(s.name + "." + e.what());
        }
    }
    if (!f.out_dir.empty())
        ex.out_dir = f.out_dir;
    return ex;
}

fs::path csv_path(const ExperimentFile& ex, const SimConfig& s) { return fs::path(ex.out_dir) / (s.name + ".csv"); }

std::vector<const SimConfig*> selected(const ExperimentFile& ex, const RunFlags& f)
{
    std::vector<const SimConfig*> out;
    for (const auto& s : ex.sims)
        if (f.sim.empty() || s.name == f.sim)
            out.push_back(&s);
    if (out.empty())
        throw ConfigError("sim: no simulation named '" + f.sim + "'");
    return out;
}

void print_plan(const ExperimentFile& ex, const std::vector<const SimConfig*>& sims)
{
    std::printf("config: %s\nout_dir: %s\n", ex.source.string().c_str(), ex.out_dir.c_str());
    for (const auto* s : sims) {
        const Link link(*s);
        std::printf("- %s: %s tau=%g rolloff=%g sps=%d span=%d L=%d channel=%s\n", s->name.c_str(),
                    s->scheme().c_str(), s->tau, s->pulse.rolloff, s->pulse.sps, s->pulse.span, link.isi().L,
                    to_string(s->channel));
        if (s->code != CodeKind::Uncoded)
            std::printf("    pcm=%s\n", s->pcm_path.c_str());
        std::printf("    n_bits=%d info_bits=%d rate=%g", link.symbols_per_frame(), link.info_bits_per_frame(),
                    link.rate());
        if (s->detector == DetectorKind::Mbcjr)
            std::printf(" trellis_memory=%d", link.trellis_memory());
        std::printf("\n    ebn0_db=");
        for (std::size_t i = 0; i < s->ebn0_db.size(); ++i)
            std::printf("%s%g", i ? "," : "", s->ebn0_db[i]);
        std::printf("\n    target_frame_errors=%ld max_frames=%ld max_iter=%d seed=%llu workers=%d\n",
                    s->target_frame_errors, s->max_frames, s->max_iter, (unsigned long long)s->seed, s->workers);
        std::printf("    output=%s\n", csv_path(ex, *s).string().c_str());
    }
}

void run_sim(const ExperimentFile& ex, const SimConfig& cfg)
{
    Link link(cfg);
    std::vector<BerRecord> recs;
    for (std::size_t p = 0; p < cfg.ebn0_db.size(); ++p) {
        recs.push_back(run_point(link, cfg.ebn0_db[p], p));
        const auto& r = recs.back();
        std::printf("%s %6.2f dB  ber=%.3e fer=%.3e frames=%ld iters=%.2f\n", cfg.name.c_str(), r.ebn0_db, r.ber,
                    r.fer, r.frames, r.avg_iters);
        std::fflush(stdout);
    }
    fs::create_directories(ex.out_dir);
    const auto path = csv_path(ex, cfg);
    std::ofstream out(path);
    write_ber_csv(out, cfg, link, recs);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

int cmd_run(RunFlags f)
{
    auto ex = load(f);
    auto sims = selected(ex, f);
    if (!f.ebn0.empty())
        for (auto& s : ex.sims)
            if (f.sim.empty() || s.name == f.sim)
                s.ebn0_db = f.ebn0;
    if (f.dry_run) {
        print_plan(ex, sims);
        return 0;
    }
    for (const auto* s : sims)
        run_sim(ex, *s);
    return 0;
}

int cmd_complexity(const RunFlags& f)
{
    const auto ex = load(f);
    if (!ex.complexity)
        throw ConfigError("complexity: the config has no complexity block");
    const auto& spec = *ex.complexity;
    if (spec.schemes.empty())
        throw ConfigError("complexity.schemes: the scheme list is empty");
    const GateWeights w = f.bits ? GateWeights::for_bits(*f.bits) : spec.weights;

    fs::create_directories(ex.out_dir);
    const fs::path out_path = fs::path(ex.out_dir) / spec.output;
    std::ofstream out(out_path);
    out << "# gate weights: add=" << w.add << " sub=" << w.sub << " cmp=" << w.cmp << " xor=" << w.xor_gate
        << "; totals are per frame (detector plus decoder at the measured average iteration count)\n"
        << "snr_db,scheme,total_gate_ops\n";
    for (const auto& name : spec.schemes) {
        const SimConfig& cfg = *ex.find(name);
        const auto path = csv_path(ex, cfg);
        if (f.rerun || !fs::exists(path)) {
            if (!f.rerun)
                throw std::runtime_error("complexity: no run data for '" + name + "' at " + path.string() +
                                         " (run it first or pass --rerun)");
            run_sim(ex, cfg);
        }
        std::ifstream in(path);
        for (const auto& r : read_ber_csv(in))
            out << detail::fmt_real(r.ebn0_db) << ',' << cfg.scheme() << ',' << detail::fmt_real(w.cost(r.avg_ops))
                << '\n';
    }
    if (!out)
        throw std::runtime_error("cannot write " + out_path.string());
    std::printf("wrote %s\n", out_path.string().c_str());
    return 0;
}

int cmd_gen_pcm(const PcmFlags& f)
{
    if (f.rate <= 0.0 || f.rate >= 1.0)
        throw ConfigError("rate: must lie in (0, 1)");
    int m = 1;
    if (f.kind == "nb") {
        if (f.q < 4 || (f.q & (f.q - 1)))
            throw ConfigError("q: must be a power of two >= 4");
        m = std::countr_zero(unsigned(f.q));
        if (m > 8)
            throw ConfigError("q: at most 256");
    } else if (f.kind != "bin") {
        throw ConfigError("kind: expected 'bin' or 'nb'");
    }
    if (f.n <= 0 || f.n % m)
        throw ConfigError("n: " + std::to_string(f.n) + " bits is not a whole number of GF(" + std::to_string(f.q) +
                          ") symbols");
    const int N = f.n / m;
    const double checks = N * (1.0 - f.rate);
    const int M = int(std::lround(checks));
    if (std::abs(checks - M) > 1e-9 || M <= 0 || M >= N)
        throw ConfigError("rate: N * (1 - rate) must be a whole number of checks");
    if (f.dv < 1 || f.dv > M)
        throw ConfigError("dv: infeasible column degree for " + std::to_string(M) + " checks");
    if (f.out.empty())
        throw ConfigError("out: an output path is required");

    std::ostringstream text;
    int rank = 0;
    if (f.kind == "bin") {
        const auto h = generate_bin_pcm(N, M, f.dv, f.seed);
        rank = gf2_rank(h);
        write_alist(text, h);
    } else {
        const auto h = generate_nb_pcm(N, M, f.dv, build_field(m), f.seed);
        rank = NbEncoder(h).rank();
        write_nb_alist(text, h);
    }
    if (rank != M)
        throw std::runtime_error("gen-pcm: no full-rank matrix found (rank " + std::to_string(rank) + " of " +
                                 std::to_string(M) + ")");
    if (const auto dir = fs::path(f.out).parent_path(); !dir.empty())
        fs::create_directories(dir);
    std::ofstream out(f.out);
    out << text.str();
    if (!out)
        throw std::runtime_error("cannot write " + f.out);
    std::printf("wrote %s: %d x %d %s\n", f.out.c_str(), M, N, f.kind == "nb" ? "symbols" : "bits");
    return 0;
}

void add_run_flags(CLI::App* c, RunFlags& f, bool with_dry_run)
{
    c->add_option("--config", f.config, "experiment file")->required();
    c->add_option("--seed", f.seed, "override every simulation's seed");
    c->add_option("--workers", f.workers, "frame-parallel worker threads")->check(CLI::PositiveNumber);
    c->add_flag("--paper-scale", f.full_budget, "100 frame errors within 5e5 frames");
    c->add_option("--out-dir", f.out_dir, "output directory (overrides the config)");
    if (with_dry_run)
        c->add_flag("--dry-run", f.dry_run, "validate and print the plan only");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coded faster-than-Nyquist link simulator"};
    app.require_subcommand(1);
    RunFlags rf;
    PcmFlags pf;

    auto* run = app.add_subcommand("run", "run every simulation in a config");
    add_run_flags(run, rf, true);

    auto* sw = app.add_subcommand("sweep", "run one simulation, optionally over other SNR points");
    add_run_flags(sw, rf, true);
    sw->add_option("--sim", rf.sim, "simulation name")->required();
    sw->add_option("--ebn0", rf.ebn0, "Eb/N0 points in dB")->delimiter(',');

    auto* dry = app.add_subcommand("dry-run", "validate a config and print the resolved plan");
    add_run_flags(dry, rf, false);

    auto* cx = app.add_subcommand("complexity", "gate-operation totals from run results");
    add_run_flags(cx, rf, false);
    cx->add_flag("--rerun", rf.rerun, "simulate the schemes instead of reading earlier results");
    cx->add_option("--bits", rf.bits, "override the gate weights with b-bit arithmetic")->check(CLI::PositiveNumber);

    auto* gp = app.add_subcommand("gen-pcm", "generate a parity-check matrix");
    gp->add_option("--kind", pf.kind, "bin or nb")->check(CLI::IsMember({"bin", "nb"}));
    gp->add_option("--n", pf.n, "codeword length in bits")->required();
    gp->add_option("--rate", pf.rate, "code rate");
    gp->add_option("--dv", pf.dv, "column degree");
    gp->add_option("--q", pf.q, "field size for nb codes");
    gp->add_option("--seed", pf.seed, "construction seed");
    gp->add_option("--out", pf.out, "output alist file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run || *sw)
            return cmd_run(rf);
        if (*dry) {
            rf.dry_run = true;
            return cmd_run(rf);
        }
        if (*cx)
            return cmd_complexity(rf);
        if (*gp)
            return cmd_gen_pcm(pf);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
