// Command-line front end: closed-form evaluation ("analyze") and Monte-Carlo
// simulation ("simulate") of topology discovery on linear wireless backbones,
// driven by a JSON config and emitting CSV.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wtdp/experiment.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNonConvergent = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::string trace_path;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_trace) {
    cmd->add_option("--config", args.config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_path, "output CSV path (default: stdout)");
    if (with_trace)
        cmd->add_option("--trace", args.trace_path,
                        "per-trial and per-event JSONL trace output");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--threads", args.threads, "worker threads for trials")
        ->check(CLI::PositiveNumber);
}

int run(const CommonArgs& args, bool simulate) {
    wtdp::AppConfig cfg = wtdp::load_config(args.config_path);
    if (args.seed) cfg.scenario.seed = *args.seed;

    // buffer the CSV so a failed run never leaves a partial output file
    std::ostringstream csv;
    if (simulate) {
        std::ostringstream trace;
        wtdp::run_simulate(cfg, csv, args.threads,
                           args.trace_path.empty() ? nullptr : &trace);
        if (!args.trace_path.empty()) {
            std::ofstream trace_file(args.trace_path);
            if (!trace_file) {
                std::cerr << "error: cannot open trace file " << args.trace_path << "\n";
                return kExitConfigError;
            }
            trace_file << trace.str();
        }
    } else {
        wtdp::run_analyze(cfg, csv);
    }

    if (args.out_path.empty()) {
        std::cout << csv.str() << std::flush;
    } else {
        std::ofstream out_file(args.out_path);
        if (!out_file) {
            std::cerr << "error: cannot open output file " << args.out_path << "\n";
            return kExitConfigError;
        }
        out_file << csv.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topology-discovery simulator and analysis for linear wireless backbones"};
    app.require_subcommand(1);

    CommonArgs analyze_args, simulate_args;
    CLI::App* analyze =
        app.add_subcommand("analyze", "evaluate the closed-form discovery model over a sweep");
    add_common(analyze, analyze_args, false);
    CLI::App* simulate =
        app.add_subcommand("simulate", "run Monte-Carlo trials of the full protocol");
    add_common(simulate, simulate_args, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) return run(analyze_args, false);
        return run(simulate_args, true);
    } catch (const wtdp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const wtdp::KTooLarge& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const wtdp::NonConvergent& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNonConvergent;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
