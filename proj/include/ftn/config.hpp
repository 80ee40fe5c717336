#pragma once

// Experiment files: a JSON document with optional shared defaults, a list of
// simulations and an optional complexity comparison.
//
//   {
//     "out_dir": "results/tau08",
//     "defaults": { "tau": 0.8, "ebn0_db": [2, 3, 4] },
//     "simulations": [
//       { "name": "ldpc_bcjr", "code": "ldpc", "pcm": "../codes/bin_128.alist",
//         "detector": "mbcjr", "M": 32 },
//       ...
//     ],
//     "complexity": { "schemes": ["ldpc_bcjr", "nb_gbk"], "output": "complexity.csv" }
//   }
//
// Relative "pcm" paths resolve against the directory holding the file.

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftn/montecarlo.hpp"

namespace ftn {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ComplexitySpec {
    std::vector<std::string> schemes;
    std::string output = "complexity.csv";
    GateWeights weights{};
};

struct ExperimentFile {
    std::filesystem::path source;
    std::string out_dir = ".";
    std::vector<SimConfig> sims;
    std::optional<ComplexitySpec> complexity;

    const SimConfig* find(const std::string& name) const
    {
        for (const auto& s : sims)
            if (s.name == name)
                return &s;
        return nullptr;
    }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object())
        throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown field '" + it.key() + "'");
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

inline GateWeights parse_weights(const json& j, GateWeights w, const std::string& where)
{
    check_keys(j, {"bits", "add", "sub", "cmp", "xor"}, where);
    if (j.contains("bits"))
        w = GateWeights::for_bits(get_as<int>(j, "bits", where));
    if (j.contains("add"))
        w.add = get_as<double>(j, "add", where);
    if (j.contains("sub"))
        w.sub = get_as<double>(j, "sub", where);
    if (j.contains("cmp"))
        w.cmp = get_as<double>(j, "cmp", where);
    if (j.contains("xor"))
        w.xor_gate = get_as<double>(j, "xor", where);
    if (w.add <= 0 || w.sub <= 0 || w.cmp <= 0 || w.xor_gate <= 0)
        throw ConfigError(where + ": gate weights must be positive");
    return w;
}

inline const std::set<std::string> sim_keys = {
    "name",      "tau",          "rolloff",  "sps",      "span",     "isi_threshold",
    "whiten_threshold", "channel", "code",  "pcm",      "uncoded_length", "field_m",
    "primitive_poly", "detector", "K",       "M",        "llr_cap",  "ebn0_db",
    "max_frames", "target_frame_errors", "max_iter", "seed", "workers", "ems",
    "minsum_normalization", "weights", "report_timing"};

/// Applies the fields present in `j` on top of `cfg`.
inline void apply_sim_fields(SimConfig& cfg, const json& j, const std::string& where,
                             const std::filesystem::path& base_dir)
{
    check_keys(j, sim_keys, where);
    auto num = [&](const char* k) { return get_as<double>(j, k, where); };
    auto integer = [&](const char* k) { return get_as<long>(j, k, where); };
    if (j.contains("name"))
        cfg.name = get_as<std::string>(j, "name", where);
    if (j.contains("tau"))
        cfg.tau = num("tau");
    if (j.contains("rolloff"))
        cfg.pulse.rolloff = num("rolloff");
    if (j.contains("sps"))
        cfg.pulse.sps = int(integer("sps"));
    if (j.contains("span"))
        cfg.pulse.span = int(integer("span"));
    if (j.contains("isi_threshold"))
        cfg.isi_threshold = num("isi_threshold");
    if (j.contains("whiten_threshold"))
        cfg.whiten_threshold = num("whiten_threshold");
    if (j.contains("channel")) {
        const auto v = get_as<std::string>(j, "channel", where);
        if (v == "waveform")
            cfg.channel = ChannelModel::Waveform;
        else if (v == "discrete")
            cfg.channel = ChannelModel::Discrete;
        else
            throw ConfigError(where + ".channel: expected 'waveform' or 'discrete'");
    }
    if (j.contains("code")) {
        const auto v = get_as<std::string>(j, "code", where);
        if (v == "uncoded")
            cfg.code = CodeKind::Uncoded;
        else if (v == "ldpc")
            cfg.code = CodeKind::Ldpc;
        else if (v == "nbldpc")
            cfg.code = CodeKind::NbLdpc;
        else
            throw ConfigError(where + ".code: expected 'uncoded', 'ldpc' or 'nbldpc'");
    }
    if (j.contains("pcm")) {
        std::filesystem::path p = get_as<std::string>(j, "pcm", where);
        if (p.is_relative() && !base_dir.empty())
            p = base_dir / p;
        cfg.pcm_path = p.lexically_normal().string();
    }
    if (j.contains("uncoded_length"))
        cfg.uncoded_length = int(integer("uncoded_length"));
    if (j.contains("field_m"))
        cfg.field_m = int(integer("field_m"));
    if (j.contains("primitive_poly"))
        cfg.primitive_poly = unsigned(integer("primitive_poly"));
    if (j.contains("detector")) {
        const auto v = get_as<std::string>(j, "detector", where);
        if (v == "ssse")
            cfg.detector = DetectorKind::Ssse;
        else if (v == "gbk")
            cfg.detector = DetectorKind::Gbk;
        else if (v == "mbcjr")
            cfg.detector = DetectorKind::Mbcjr;
        else
            throw ConfigError(where + ".detector: expected 'ssse', 'gbk' or 'mbcjr'");
    }
    if (j.contains("K"))
        cfg.K = int(integer("K"));
    if (j.contains("M"))
        cfg.M = int(integer("M"));
    if (j.contains("llr_cap"))
        cfg.llr_cap = num("llr_cap");
    if (j.contains("ebn0_db"))
        cfg.ebn0_db = get_as<std::vector<double>>(j, "ebn0_db", where);
    if (j.contains("max_frames"))
        cfg.max_frames = integer("max_frames");
    if (j.contains("target_frame_errors"))
        cfg.target_frame_errors = integer("target_frame_errors");
    if (j.contains("max_iter"))
        cfg.max_iter = int(integer("max_iter"));
    if (j.contains("seed"))
        cfg.seed = get_as<std::uint64_t>(j, "seed", where);
    if (j.contains("workers"))
        cfg.workers = int(integer("workers"));
    if (j.contains("ems")) {
        const auto& e = j.at("ems");
        const std::string w = where + ".ems";
        check_keys(e, {"n_m", "offset", "bubbles"}, w);
        if (e.contains("n_m"))
            cfg.ems.n_m = get_as<int>(e, "n_m", w);
        if (e.contains("offset"))
            cfg.ems.offset = get_as<double>(e, "offset", w);
        if (e.contains("bubbles"))
            cfg.ems.bubbles = get_as<int>(e, "bubbles", w);
    }
    if (j.contains("minsum_normalization"))
        cfg.minsum_normalization = num("minsum_normalization");
    if (j.contains("weights"))
        cfg.weights = parse_weights(j.at("weights"), cfg.weights, where + ".weights");
    if (j.contains("report_timing"))
        cfg.report_timing = get_as<bool>(j, "report_timing", where);
}

} // namespace detail

/// Parses and validates an experiment document. Every simulation is checked
/// (including that its PCM file exists) before anything runs.
inline ExperimentFile parse_experiment(const nlohmann::json& doc, const std::filesystem::path& source = {})
{
    ExperimentFile ex;
    ex.source = source;
    const auto base = source.empty() ? std::filesystem::path{} : source.parent_path();
    detail::check_keys(doc, {"out_dir", "defaults", "simulations", "complexity"}, "config");
    if (doc.contains("out_dir")) {
        std::filesystem::path p = detail::get_as<std::string>(doc, "out_dir", "config");
        if (p.is_relative() && !base.empty())
            p = base / p;
        ex.out_dir = p.lexically_normal().string();
    }
    SimConfig defaults;
    if (doc.contains("defaults"))
        detail::apply_sim_fields(defaults, doc.at("defaults"), "defaults", base);
    if (!doc.contains("simulations") || !doc.at("simulations").is_array() || doc.at("simulations").empty())
        throw ConfigError("simulations: expected a non-empty list");
    std::set<std::string> names;
    int idx = 0;
    for (const auto& j : doc.at("simulations")) {
        const std::string where = "simulations[" + std::to_string(idx++) + "]";
        SimConfig cfg = defaults;
        detail::apply_sim_fields(cfg, j, where, base);
        if (!names.insert(cfg.name).second)
            throw ConfigError(where + ".name: duplicate simulation name '" + cfg.name + "'");
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + "." + e.what());
        }
        if (cfg.ebn0_db.empty())
            throw ConfigError(where + ".ebn0_db: at least one SNR point is required");
        if (cfg.code != CodeKind::Uncoded && !std::filesystem::exists(cfg.pcm_path))
            throw ConfigError(where + ".pcm: file not found: " + cfg.pcm_path);
        ex.sims.push_back(std::move(cfg));
    }
    if (doc.contains("complexity")) {
        const auto& c = doc.at("complexity");
        detail::check_keys(c, {"schemes", "output", "weights"}, "complexity");
        ComplexitySpec spec;
        if (c.contains("schemes"))
            spec.schemes = detail::get_as<std::vector<std::string>>(c, "schemes", "complexity");
        if (c.contains("output"))
            spec.output = detail::get_as<std::string>(c, "output", "complexity");
        if (c.contains("weights"))
            spec.weights = detail::parse_weights(c.at("weights"), spec.weights, "complexity.weights");
        for (const auto& s : spec.schemes)
            if (!ex.find(s))
                throw ConfigError("complexity.schemes: no simulation named '" + s + "'");
        ex.complexity = std::move(spec);
    }
    return ex;
}

inline ExperimentFile load_experiment(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_experiment(doc, path);
}

/// Full-protocol frame budget: 100 frame errors within 5e5 frames.
inline void apply_full_budget(SimConfig& cfg)
{
    cfg.target_frame_errors = 100;
    cfg.max_frames = 500000;
}

} // namespace ftn
