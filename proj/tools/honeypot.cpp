// honeypot: command-line driver for detector-placement experiments.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "honeypot/honeypot.hpp"

namespace fs = std::filesystem;
using namespace honeypot;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;
    std::optional<std::string> graph;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "experiment config file (key = value lines)");
    cmd->add_option("--seed", o.seed, "master seed (overrides config)");
    cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores (results do not depend on it)");
    cmd->add_option("--out-dir", o.out_dir, "output directory (overrides config)");
    cmd->add_option("--graph", o.graph, "edge-list path, wheel:V or small_world:N,K,BETA,SEED");
    cmd->add_option("--set", o.overrides, "extra key=value override, repeatable");
}

ExperimentConfig resolve(const CommonOptions& o) {
    ExperimentConfig c;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw std::runtime_error("cannot open config '" + o.config_path + "'");
        try {
            c = parse_config(in);
        } catch (const ConfigError& e) {
            throw ConfigError(o.config_path + ": " + e.what());
        }
    }
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(c, detail::trim(std::string_view(kv).substr(0, eq)), std::string_view(kv).substr(eq + 1));
    }
    if (o.graph) c.graph = *o.graph;
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    if (o.out_dir) c.out_dir = *o.out_dir;
    return c;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

void report(const std::vector<fs::path>& paths) {
    for (const auto& p : paths) std::cerr << "wrote " << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fallible detector placement on contact networks"};
    app.require_subcommand(1);

    CommonOptions decompose_opts, simulate_opts, optimize_opts, assess_opts, wheel_opts;
    std::string reduced_path;
    std::string lp_path;

    auto* decompose = app.add_subcommand("decompose", "c-core + largest component summary of a graph");
    add_common(decompose, decompose_opts);
    decompose->add_option("--write-edges", reduced_path, "write the reduced edge list here");

    auto* simulate = app.add_subcommand("simulate", "write VSM/VDM/SDM files");
    add_common(simulate, simulate_opts);

    auto* optimize = app.add_subcommand("optimize", "greedy and exact placements per (r, k, n)");
    add_common(optimize, optimize_opts);
    optimize->add_option("--export-lp", lp_path, "write the integer program in LP format and exit without solving");

    auto* assess = app.add_subcommand("assess", "McNemar, MRP, r-sweep and ignore-fallibility studies");
    add_common(assess, assess_opts);

    auto* wheel_cmd = app.add_subcommand("wheel", "wheel closed forms against simulation");
    add_common(wheel_cmd, wheel_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (decompose->parsed()) {
            const auto c = resolve(decompose_opts);
            if (c.graph.empty()) throw ConfigError("graph source is required");
            const auto g = load_graph(c);
            const fs::path dir = c.out_dir;
            auto csv = open_out(dir / "decompose.csv");
            const auto s = run_decompose(g, c, csv);
            std::cout << format_summary(s) << '\n';
            if (!reduced_path.empty()) {
                auto out = open_out(reduced_path);
                write_edge_list(out, g);
            }
            if (c.calibrate_fraction > 0.0) {
                auto cal = open_out(dir / "calibration.csv");
                const auto res = run_calibration(g, c, cal);
                std::cout << "calibration mean_time=" << res.mean_time << " exhausted=" << res.exhausted << '\n';
            }
        } else if (simulate->parsed()) {
            const auto c = resolve(simulate_opts);
            c.validate();
            c.require_seed();
            report(run_simulate(load_graph(c), c, c.out_dir));
        } else if (optimize->parsed()) {
            const auto c = resolve(optimize_opts);
            c.validate();
            c.require_seed();
            const auto g = load_graph(c);
            if (!lp_path.empty()) {
                report(run_export_lp(g, c, lp_path));
                return 0;
            }
            const fs::path dir = c.out_dir;
            auto results = open_out(dir / "optimize.csv");
            auto placements = open_out(dir / "placements.csv");
            run_optimize(g, c, results, placements);
            report({dir / "optimize.csv", dir / "placements.csv"});
        } else if (assess->parsed()) {
            const auto c = resolve(assess_opts);
            c.validate();
            c.require_seed();
            report(run_assess(load_graph(c), c, c.out_dir));
        } else if (wheel_cmd->parsed()) {
            auto c = resolve(wheel_opts);
            if (c.graph.empty()) c.graph = "wheel:5";
            c.validate();
            c.require_seed();
            const fs::path dir = c.out_dir;
            auto table = open_out(dir / "wheel.csv");
            auto vmin = open_out(dir / "wheel_vmin.csv");
            run_wheel(c, table, vmin);
            report({dir / "wheel.csv", dir / "wheel_vmin.csv"});
        }
    } catch (const std::exception& e) {
        std::cerr << "honeypot: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
