#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtdp/simulator.hpp"

namespace wtdp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { MhSweep, SnrSweep, RicianKSweep, TwoTrainSweep, Custom };

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Custom;
    std::string axis = "none";
    std::vector<double> values = {0.0};
    long trials = 1000;
};

struct AnalysisOptions {
    std::optional<int> exponent_sides;  // default: sides with a true neighbor, 2N-2
    bool per_receiver = false;          // heterogeneous per-side transmitter counts
};

struct AppConfig {
    Scenario scenario;
    AnalysisOptions analysis;
    ExperimentSpec experiment;
    int n_bns = 6;
};

namespace detail {

using json = nlohmann::json;

inline void require_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
T field(const json& obj, const std::string& key, T def, const std::string& where) {
    if (!obj.contains(key)) return def;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + key + "' in " + where + ": " + e.what());
    }
}

// one train, nodes left to right; MAC and CN ids are opaque tokens
inline GroundTruth make_train(int train_index, int n_bns,
                              const std::vector<std::pair<std::uint64_t, int>>& cns) {
    GroundTruth gt;
    const std::uint64_t base = (static_cast<std::uint64_t>(train_index) + 1) << 24;
    for (int i = 1; i <= n_bns; ++i) gt.bns.push_back(MacAddress{base | std::uint64_t(i)});
    if (cns.empty()) {
        // default: one consist network per node
        for (int i = 1; i <= n_bns; ++i)
            gt.cn_attachments.emplace_back(CnId{base | std::uint64_t(i)}, gt.bns[i - 1]);
    } else {
        for (const auto& [cn, bn] : cns) {
            if (bn < 1 || bn > n_bns)
                throw ConfigError("cn attachment to node " + std::to_string(bn) +
                                  " outside 1.." + std::to_string(n_bns));
            gt.cn_attachments.emplace_back(CnId{(base << 8) | cn}, gt.bns[bn - 1]);
        }
    }
    return gt;
}

}  // namespace detail

inline AppConfig parse_config(const std::string& text, const std::string& origin = "config") {
    using detail::field;
    using json = nlohmann::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    detail::require_keys(root, {"scenario", "experiment"}, origin);
    if (!root.contains("scenario")) throw ConfigError(origin + ": missing 'scenario' object");

    const json& sc = root.at("scenario");
    detail::require_keys(
        sc,
        {"n_bns", "snr0_db", "eta", "F", "K", "p_h", "p_t", "R", "m_h", "m_ndf", "m_t",
         "slot_ms", "seed", "fading", "k_factor", "speed_kmh", "carrier_ghz", "theta_rad",
         "sidelobe_db", "trains", "l_over_delta", "max_slots", "probe_filler",
         "ideal_channel", "phase", "ndf_mode", "exponent_sides", "analysis_mode", "cns"},
        "scenario");

    AppConfig cfg;
    cfg.n_bns = field<int>(sc, "n_bns", 6, "scenario");
    if (cfg.n_bns < 2) throw ConfigError("n_bns must be >= 2");

    Scenario& s = cfg.scenario;
    s.channel.snr0_db = field<double>(sc, "snr0_db", 15.0, "scenario");
    s.channel.eta = field<double>(sc, "eta", 3.5, "scenario");
    s.channel.reuse = field<int>(sc, "F", 1, "scenario");
    s.hop_range = field<int>(sc, "K", cfg.n_bns - 1, "scenario");
    s.proto.hello_prob = field<double>(sc, "p_h", 0.15, "scenario");
    s.proto.topo_prob = field<double>(sc, "p_t", 0.15, "scenario");
    s.channel.rate = field<double>(sc, "R", 1.5, "scenario");
    s.proto.hello_threshold = field<int>(sc, "m_h", 10, "scenario");
    s.proto.ndf_threshold = field<int>(sc, "m_ndf", 20, "scenario");
    s.proto.topo_threshold = field<int>(sc, "m_t", 30, "scenario");
    s.channel.slot_ms = field<double>(sc, "slot_ms", 100.0, "scenario");
    s.seed = field<std::uint64_t>(sc, "seed", 1, "scenario");
    s.channel.speed_kmh = field<double>(sc, "speed_kmh", 0.0, "scenario");
    s.channel.carrier_ghz = field<double>(sc, "carrier_ghz", 5.8, "scenario");
    s.channel.k_factor = field<double>(sc, "k_factor", 0.0, "scenario");
    s.antenna.theta = field<double>(sc, "theta_rad", s.antenna.theta, "scenario");
    s.antenna.sidelobe_db = field<double>(sc, "sidelobe_db", 6.0, "scenario");
    s.l_over_delta = field<double>(sc, "l_over_delta", 1.0, "scenario");
    s.max_slots = field<long>(sc, "max_slots", 20000, "scenario");
    s.probe_filler = field<bool>(sc, "probe_filler", true, "scenario");
    s.ideal_channel = field<bool>(sc, "ideal_channel", false, "scenario");

    const std::string fading = field<std::string>(sc, "fading", "rayleigh", "scenario");
    if (fading == "rayleigh") {
        s.channel.fading = FadingKind::Rayleigh;
    } else if (fading == "rician") {
        s.channel.fading = FadingKind::Rician;
    } else {
        throw ConfigError("fading must be 'rayleigh' or 'rician', got '" + fading + "'");
    }

    const std::string phase = field<std::string>(sc, "phase", "full", "scenario");
    if (phase == "full") {
        s.phase = Phase::Full;
    } else if (phase == "nd") {
        s.phase = Phase::NdOnly;
    } else {
        throw ConfigError("phase must be 'full' or 'nd', got '" + phase + "'");
    }

    const std::string ndf = field<std::string>(sc, "ndf_mode", "per_sender", "scenario");
    if (ndf == "per_sender") {
        s.ndf_mode = NdfMode::PerSender;
    } else if (ndf == "aggregate") {
        s.ndf_mode = NdfMode::AggregateSum;
    } else {
        throw ConfigError("ndf_mode must be 'per_sender' or 'aggregate', got '" + ndf + "'");
    }

    const std::string mode = field<std::string>(sc, "analysis_mode", "homogeneous", "scenario");
    if (mode == "homogeneous") {
        cfg.analysis.per_receiver = false;
    } else if (mode == "per_receiver") {
        cfg.analysis.per_receiver = true;
    } else {
        throw ConfigError("analysis_mode must be 'homogeneous' or 'per_receiver'");
    }
    if (sc.contains("exponent_sides"))
        cfg.analysis.exponent_sides = field<int>(sc, "exponent_sides", 0, "scenario");

    std::vector<std::pair<std::uint64_t, int>> cns;
    if (sc.contains("cns")) {
        const json& arr = sc.at("cns");
        if (!arr.is_array()) throw ConfigError("'cns' must be an array");
        for (const json& entry : arr) {
            detail::require_keys(entry, {"id", "bns"}, "cns entry");
            const auto id = field<std::uint64_t>(entry, "id", 0, "cns entry");
            if (!entry.contains("bns")) throw ConfigError("cns entry missing 'bns'");
            for (const json& bn : entry.at("bns")) cns.emplace_back(id, bn.get<int>());
        }
    }

    const int trains = field<int>(sc, "trains", 1, "scenario");
    if (trains < 1 || trains > 2) throw ConfigError("trains must be 1 or 2");
    for (int t = 0; t < trains; ++t)
        s.trains.push_back(detail::make_train(t, cfg.n_bns, cns));

    if (root.contains("experiment")) {
        const json& ex = root.at("experiment");
        detail::require_keys(ex, {"kind", "axis", "values", "trials"}, "experiment");
        ExperimentSpec& spec = cfg.experiment;
        const std::string kind = field<std::string>(ex, "kind", "custom", "experiment");
        if (kind == "mh_sweep") {
            spec.kind = ExperimentKind::MhSweep;
            spec.axis = "m_h";
        } else if (kind == "snr_sweep") {
            spec.kind = ExperimentKind::SnrSweep;
            spec.axis = "snr0_db";
        } else if (kind == "rician_k_sweep") {
            spec.kind = ExperimentKind::RicianKSweep;
            spec.axis = "k_factor";
        } else if (kind == "two_train_sweep") {
            spec.kind = ExperimentKind::TwoTrainSweep;
            spec.axis = "l_over_delta";
        } else if (kind == "custom") {
            spec.kind = ExperimentKind::Custom;
        } else {
            throw ConfigError("unknown experiment kind '" + kind + "'");
        }
        spec.axis = field<std::string>(ex, "axis", spec.axis, "experiment");
        spec.trials = field<long>(ex, "trials", 1000, "experiment");
        if (spec.trials < 1) throw ConfigError("experiment.trials must be >= 1");
        if (ex.contains("values")) {
            spec.values.clear();
            for (const json& v : ex.at("values")) {
                if (!v.is_number()) throw ConfigError("experiment.values must be numbers");
                spec.values.push_back(v.get<double>());
            }
        }
        if (spec.values.empty()) throw ConfigError("experiment.values must be non-empty");
        if (spec.kind == ExperimentKind::RicianKSweep) s.channel.fading = FadingKind::Rician;
        if (spec.kind == ExperimentKind::TwoTrainSweep && trains == 1) {
            s.trains.push_back(detail::make_train(1, cfg.n_bns, cns));
        }
    }

    try {
        s.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
    return cfg;
}

inline AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace wtdp
