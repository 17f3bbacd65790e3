#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "wtdp/config.hpp"
#include "wtdp/experiment.hpp"

using namespace wtdp;

TEST_CASE("defaults cover the reference operating point") {
    const AppConfig cfg = parse_config(R"({"scenario": {}})");
    REQUIRE(cfg.n_bns == 6);
    REQUIRE(cfg.scenario.channel.snr0_db == 15.0);
    REQUIRE(cfg.scenario.channel.eta == 3.5);
    REQUIRE(cfg.scenario.channel.reuse == 1);
    REQUIRE(cfg.scenario.hop_range == 5);
    REQUIRE(cfg.scenario.proto.hello_prob == 0.15);
    REQUIRE(cfg.scenario.proto.topo_prob == 0.15);
    REQUIRE(cfg.scenario.channel.rate == 1.5);
    REQUIRE(cfg.scenario.proto.hello_threshold == 10);
    REQUIRE(cfg.scenario.proto.ndf_threshold == 20);
    REQUIRE(cfg.scenario.proto.topo_threshold == 30);
    REQUIRE(cfg.scenario.channel.slot_ms == 100.0);
    REQUIRE(cfg.scenario.channel.carrier_ghz == 5.8);
    REQUIRE(cfg.scenario.trains.size() == 1);
    REQUIRE(cfg.scenario.trains[0].bns.size() == 6);
    REQUIRE(cfg.scenario.trains[0].cn_attachments.size() == 6);  // one CN per node
}

TEST_CASE("a full scenario round-trips") {
    const AppConfig cfg = parse_config(R"({
      "scenario": {
        "n_bns": 4, "snr0_db": 12.5, "eta": 3.0, "F": 2, "K": 2,
        "p_h": 0.1, "p_t": 0.2, "R": 1.0, "m_h": 4, "m_ndf": 7, "m_t": 9,
        "slot_ms": 50.0, "seed": 99, "fading": "rician", "k_factor": 3.5,
        "speed_kmh": 2.0, "carrier_ghz": 2.4, "theta_rad": 0.8,
        "sidelobe_db": 12.0, "trains": 2, "l_over_delta": 1.5,
        "max_slots": 5000, "probe_filler": false, "phase": "nd",
        "ndf_mode": "aggregate", "exponent_sides": 8,
        "analysis_mode": "per_receiver",
        "cns": [{"id": 1, "bns": [1, 2]}, {"id": 2, "bns": [4]}]
      },
      "experiment": {"kind": "mh_sweep", "values": [1, 2, 3], "trials": 250}
    })");
    const Scenario& s = cfg.scenario;
    REQUIRE(s.channel.fading == FadingKind::Rician);
    REQUIRE(s.channel.k_factor == 3.5);
    REQUIRE(s.trains.size() == 2);
    REQUIRE(s.trains[1].bns.size() == 4);
    REQUIRE(s.trains[0].cn_attachments.size() == 3);
    REQUIRE(s.phase == Phase::NdOnly);
    REQUIRE(s.ndf_mode == NdfMode::AggregateSum);
    REQUIRE_FALSE(s.probe_filler);
    REQUIRE(cfg.analysis.exponent_sides == 8);
    REQUIRE(cfg.analysis.per_receiver);
    REQUIRE(cfg.experiment.kind == ExperimentKind::MhSweep);
    REQUIRE(cfg.experiment.axis == "m_h");
    REQUIRE(cfg.experiment.values == std::vector<double>{1.0, 2.0, 3.0});
    REQUIRE(cfg.experiment.trials == 250);
}

TEST_CASE("config errors carry the offending field") {
    REQUIRE_THROWS_WITH(parse_config(R"({"scenario": {"snr0_db": "loud"}})"),
                        Catch::Matchers::ContainsSubstring("snr0_db"));
    REQUIRE_THROWS_WITH(parse_config(R"({"scenario": {"p_j": 0.3}})"),
                        Catch::Matchers::ContainsSubstring("p_j"));
    REQUIRE_THROWS_AS(parse_config("{nope"), ConfigError);
    REQUIRE_THROWS_AS(parse_config(R"({"scenario": {"trains": 3}})"), ConfigError);
    REQUIRE_THROWS_AS(parse_config(R"({"scenario": {"n_bns": 1}})"), ConfigError);
    REQUIRE_THROWS_AS(parse_config(R"({"scenario": {"p_h": 0.8, "p_t": 0.8}})"), ConfigError);
    REQUIRE_THROWS_AS(
        parse_config(R"({"scenario": {}, "experiment": {"kind": "warp_sweep"}})"),
        ConfigError);
    REQUIRE_THROWS_AS(
        parse_config(R"({"scenario": {}, "experiment": {"values": []}})"), ConfigError);
}

TEST_CASE("two-train sweeps get a second train implicitly") {
    const AppConfig cfg = parse_config(R"({
      "scenario": {},
      "experiment": {"kind": "two_train_sweep", "values": [0.5, 1.0], "trials": 10}
    })");
    REQUIRE(cfg.scenario.trains.size() == 2);
    REQUIRE(cfg.experiment.axis == "l_over_delta");
}

TEST_CASE("analyze rejects axes outside the closed-form model") {
    AppConfig cfg = parse_config(R"({
      "scenario": {},
      "experiment": {"kind": "rician_k_sweep", "values": [1.0], "trials": 10}
    })");
    std::ostringstream out;
    REQUIRE_THROWS_AS(run_analyze(cfg, out), ConfigError);
}

TEST_CASE("analyze surfaces non-convergence for degenerate inputs") {
    AppConfig cfg = parse_config(R"({"scenario": {"p_h": 0.0, "p_t": 0.2, "m_h": 2}})");
    std::ostringstream out;
    REQUIRE_THROWS_AS(run_analyze(cfg, out), NonConvergent);
}

TEST_CASE("simulate output is byte-identical across runs and thread counts") {
    const char* text = R"({
      "scenario": {"m_h": 2, "max_slots": 3000, "seed": 5},
      "experiment": {"kind": "mh_sweep", "values": [1, 2], "trials": 60}
    })";
    const AppConfig cfg = parse_config(text);
    std::ostringstream a, b, c;
    run_simulate(cfg, a, 1);
    run_simulate(cfg, b, 1);
    run_simulate(cfg, c, 4);
    REQUIRE(a.str() == b.str());
    REQUIRE(a.str() == c.str());
    REQUIRE(a.str().find("axis,value,trials,nd_success") == 0);
}

TEST_CASE("analyze output is byte-identical across runs") {
    const AppConfig cfg = parse_config(R"({
      "scenario": {},
      "experiment": {"kind": "mh_sweep", "values": [1, 2, 3], "trials": 10}
    })");
    std::ostringstream a, b;
    run_analyze(cfg, a);
    run_analyze(cfg, b);
    REQUIRE(a.str() == b.str());
    REQUIRE(a.str().find("axis,value,q_star,e_t_star,e_t_suc_star") == 0);
}

TEST_CASE("trace emits per-trial records") {
    const AppConfig cfg = parse_config(R"({
      "scenario": {"m_h": 1, "max_slots": 2000},
      "experiment": {"kind": "mh_sweep", "values": [1], "trials": 3}
    })");
    std::ostringstream out, trace;
    run_simulate(cfg, out, 1, &trace);
    const std::string t = trace.str();
    REQUIRE(t.find("\"type\":\"trial\"") != std::string::npos);
    REQUIRE(t.find("\"type\":\"event\"") != std::string::npos);
    REQUIRE(t.find("\"event\":\"identified\"") != std::string::npos);
}
