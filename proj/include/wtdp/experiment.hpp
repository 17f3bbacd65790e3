#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "wtdp/analysis.hpp"
#include "wtdp/config.hpp"
#include "wtdp/simulator.hpp"

namespace wtdp {

namespace detail {

inline std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline int int_axis_value(double v, const std::string& axis) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
        throw ConfigError("axis '" + axis + "' takes integer values, got " + fmt(v));
    return static_cast<int>(r);
}

}  // namespace detail

// Applies one sweep-axis value to a scenario copy. Axis names follow the
// config keys.
inline void apply_axis(Scenario& s, int& n_bns, const std::string& axis, double value) {
    if (axis == "none") return;
    if (axis == "m_h") {
        s.proto.hello_threshold = detail::int_axis_value(value, axis);
    } else if (axis == "m_ndf") {
        s.proto.ndf_threshold = detail::int_axis_value(value, axis);
    } else if (axis == "m_t") {
        s.proto.topo_threshold = detail::int_axis_value(value, axis);
    } else if (axis == "snr0_db") {
        s.channel.snr0_db = value;
    } else if (axis == "eta") {
        s.channel.eta = value;
    } else if (axis == "R") {
        s.channel.rate = value;
    } else if (axis == "p_h") {
        s.proto.hello_prob = value;
    } else if (axis == "p_t") {
        s.proto.topo_prob = value;
    } else if (axis == "F") {
        s.channel.reuse = detail::int_axis_value(value, axis);
    } else if (axis == "K") {
        s.hop_range = detail::int_axis_value(value, axis);
    } else if (axis == "k_factor") {
        s.channel.k_factor = value;
    } else if (axis == "speed_kmh") {
        s.channel.speed_kmh = value;
    } else if (axis == "l_over_delta") {
        s.l_over_delta = value;
    } else if (axis == "theta_rad") {
        s.antenna.theta = value;
    } else if (axis == "sidelobe_db") {
        s.antenna.sidelobe_db = value;
    } else if (axis == "n_bns") {
        const int n = detail::int_axis_value(value, axis);
        if (n < 2) throw ConfigError("n_bns must be >= 2");
        const std::size_t trains = s.trains.size();
        s.trains.clear();
        for (std::size_t t = 0; t < trains; ++t)
            s.trains.push_back(detail::make_train(static_cast<int>(t), n, {}));
        n_bns = n;
    } else {
        throw ConfigError("unsupported sweep axis '" + axis + "'");
    }
}

inline AnalysisInput analysis_input(const AppConfig& cfg, const Scenario& s, int n_bns) {
    AnalysisInput in;
    in.snr0_lin = s.channel.snr0_lin();
    in.eta = s.channel.eta;
    in.reuse = s.channel.reuse;
    in.n_tx = std::min(s.hop_range, n_bns - 1);
    in.hello_prob = s.proto.hello_prob;
    in.topo_prob = s.proto.topo_prob;
    in.rate = s.channel.rate;
    in.hello_threshold = s.proto.hello_threshold;
    in.exponent_sides = cfg.analysis.exponent_sides.value_or(2 * n_bns - 2);
    return in;
}

// Transmitter counts of each receiving side of a single train: side (i, left)
// hears min(i-1, K) senders, side (i, right) hears min(N-i, K).
inline std::vector<int> per_side_tx_counts(int n_bns, int hop_range) {
    std::vector<int> counts;
    for (int i = 1; i <= n_bns; ++i) {
        if (i > 1) counts.push_back(std::min(i - 1, hop_range));
        if (i < n_bns) counts.push_back(std::min(n_bns - i, hop_range));
    }
    return counts;
}

// Closed-form sweep. Columns: sweep value, probability that every side
// discovers its true neighbor, mean completion time, mean time to the first
// fully correct discovery.
inline void run_analyze(const AppConfig& cfg, std::ostream& out) {
    const std::string& axis = cfg.experiment.axis;
    static const std::set<std::string> supported = {"none",   "m_h", "snr0_db", "eta", "R",
                                                    "p_h",    "p_t", "F",       "K",   "n_bns"};
    if (!supported.count(axis))
        throw ConfigError("axis '" + axis + "' is not covered by the closed-form model");
    if (cfg.scenario.trains.size() != 1 && cfg.experiment.kind != ExperimentKind::Custom)
        throw ConfigError("the closed-form model covers a single train only");
    if (cfg.scenario.channel.fading != FadingKind::Rayleigh)
        throw ConfigError("the closed-form model covers Rayleigh fading only");
    out << "axis,value,q_star,e_t_star,e_t_suc_star\n";
    for (double value : cfg.experiment.values) {
        Scenario s = cfg.scenario;
        int n_bns = cfg.n_bns;
        apply_axis(s, n_bns, axis, value);
        const AnalysisInput in = analysis_input(cfg, s, n_bns);
        const NetworkMetrics m =
            cfg.analysis.per_receiver
                ? network_metrics_per_side(in, per_side_tx_counts(n_bns, s.hop_range))
                : network_metrics(in);
        out << axis << ',' << detail::fmt(value) << ',' << detail::fmt(m.q_star) << ','
            << detail::fmt(m.e_t_star) << ',' << detail::fmt(m.e_t_suc_star) << '\n';
    }
}

// Monte-Carlo sweep. One row per grid point; all times are in slots, the
// time-to-first-success columns carry the sequential-restart estimate and the
// mean-time/success-rate ratio side by side.
inline void run_simulate(const AppConfig& cfg, std::ostream& out, int threads = 1,
                         std::ostream* trace = nullptr) {
    out << "axis,value,trials,nd_success,nd_success_se,inaug_success,inaug_success_se,"
           "mean_nd_time,mean_inaug_time,t_first_nd_seq,t_first_nd_wald,"
           "t_first_inaug_seq,t_first_inaug_wald,red_flags,truncated\n";
    for (std::size_t point = 0; point < cfg.experiment.values.size(); ++point) {
        const double value = cfg.experiment.values[point];
        Scenario s = cfg.scenario;
        int n_bns = cfg.n_bns;
        apply_axis(s, n_bns, cfg.experiment.axis, value);

        std::vector<RunMetrics> runs;
        if (trace) {
            // event records for the first trial of each grid point
            EventSink sink = [&](long slot, MacAddress mac, const NodeEvent& ev) {
                *trace << "{\"type\":\"event\",\"value\":" << detail::fmt(value)
                       << ",\"trial\":0,\"slot\":" << slot << ",\"mac\":" << mac.id
                       << ",\"event\":\"" << to_string(ev.kind) << "\",\"dir\":\""
                       << to_string(ev.dir) << "\"}\n";
            };
            runs = run_trials(s, 1, 1, sink);
            if (cfg.experiment.trials > 1) {
                std::vector<RunMetrics> rest = run_trials(s, cfg.experiment.trials, threads);
                rest[0] = runs[0];
                runs = std::move(rest);
            }
            for (std::size_t i = 0; i < runs.size(); ++i) {
                const RunMetrics& r = runs[i];
                *trace << "{\"type\":\"trial\",\"value\":" << detail::fmt(value)
                       << ",\"trial\":" << i << ",\"nd_correct\":" << (r.nd_correct ? 1 : 0)
                       << ",\"nd_complete_slot\":"
                       << (r.nd_complete_slot ? std::to_string(*r.nd_complete_slot) : "null")
                       << ",\"inaug_correct\":" << (r.inaug_correct ? 1 : 0)
                       << ",\"inaug_complete_slot\":"
                       << (r.inaug_complete_slot ? std::to_string(*r.inaug_complete_slot)
                                                 : "null")
                       << ",\"red_flag_slot\":"
                       << (r.red_flag_slot ? std::to_string(*r.red_flag_slot) : "null")
                       << ",\"truncated\":" << (r.truncated ? 1 : 0) << "}\n";
            }
        } else {
            runs = run_trials(s, cfg.experiment.trials, threads);
        }
        const BatchStats b = summarize(runs, s.max_slots);
        out << cfg.experiment.axis << ',' << detail::fmt(value) << ',' << b.trials << ','
            << detail::fmt(b.nd_success) << ',' << detail::fmt(b.nd_success_se) << ','
            << detail::fmt(b.inaug_success) << ',' << detail::fmt(b.inaug_success_se) << ','
            << detail::fmt(b.mean_nd_time) << ',' << detail::fmt(b.mean_inaug_time) << ','
            << detail::fmt(b.t_first_nd_seq) << ',' << detail::fmt(b.t_first_nd_wald) << ','
            << detail::fmt(b.t_first_inaug_seq) << ',' << detail::fmt(b.t_first_inaug_wald)
            << ',' << b.red_flags << ',' << b.truncated << '\n';
    }
}

}  // namespace wtdp
