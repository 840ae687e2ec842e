#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "honeypot/assessment.hpp"
#include "honeypot/config.hpp"
#include "honeypot/coverage.hpp"
#include "honeypot/graph.hpp"
#include "honeypot/spread.hpp"
#include "honeypot/wheel.hpp"

// Study pipelines behind the command-line tool. Every function is a
// deterministic function of (graph, config); the only nondeterministic output
// is the `*_wall_s` timing columns.

namespace honeypot {

/// Purposes for sub-seeds drawn from the master seed. Training samples for
/// different n share a prefix of paths, and all r values share paths and
/// flip uniforms, so cells of a sweep are compared under common random numbers.
namespace purpose {
inline constexpr std::uint64_t train = 0;
inline constexpr std::uint64_t evaluate = 1;
inline constexpr std::uint64_t mrp = 2;
inline constexpr std::uint64_t mcnemar = 3;
inline constexpr std::uint64_t calibrate = 4;
inline constexpr std::uint64_t wheel = 5;
}  // namespace purpose

inline std::uint64_t study_seed(std::uint64_t seed, std::uint64_t what) {
    return derive_seed(seed, stream_tag::study, what);
}

/// Builds the graph named by `source`: an edge-list path, `wheel:V`, or
/// `small_world:N,K,BETA,SEED`.
inline Graph graph_from_source(const std::string& source, bool directed_input = false) {
    auto spec_args = [&](std::string_view prefix) { return std::string_view(source).substr(prefix.size()); };
    try {
        if (source.starts_with("wheel:"))
            return wheel_graph(detail::parse_number<std::size_t>("wheel", detail::trim(spec_args("wheel:"))));
        if (source.starts_with("small_world:")) {
            const auto parts = detail::split(spec_args("small_world:"), ',');
            if (parts.size() != 4) throw ConfigError("small_world needs N,K,BETA,SEED");
            return small_world_graph(detail::parse_number<std::size_t>("small_world", parts[0]),
                                     detail::parse_number<std::size_t>("small_world", parts[1]),
                                     detail::parse_real("small_world", parts[2]),
                                     detail::parse_number<std::uint64_t>("small_world", parts[3]));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ": " + e.what());
    }
    std::ifstream in(source);
    if (!in) throw std::runtime_error("cannot open edge list '" + source + "'");
    try {
        return load_edge_list(in, directed_input);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), source + ": " + e.what());
    }
}

/// Source graph reduced to its c-core (when core > 0) and then to its largest
/// connected component (when lcc is set).
inline Graph prepare_graph(const Graph& raw, const ExperimentConfig& c) {
    Graph g = c.core > 0 ? c_core(raw, c.core) : raw;
    return c.lcc ? largest_connected_component(g) : g;
}

inline Graph load_graph(const ExperimentConfig& c) { return prepare_graph(graph_from_source(c.graph, c.directed_input), c); }

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Original labels of a placement, space separated.
inline std::string node_labels(const Graph& g, const NodeSet& s) {
    std::string out;
    for (NodeId v : s) {
        if (!out.empty()) out += ' ';
        out += std::to_string(g.label(v));
    }
    return out;
}

class CsvLine {
public:
    explicit CsvLine(std::ostream& out) : out_(out) {}
    ~CsvLine() { out_ << '\n'; }
    CsvLine(const CsvLine&) = delete;
    CsvLine& operator=(const CsvLine&) = delete;

    CsvLine& operator<<(double x) { return field(format_real(x)); }
    CsvLine& operator<<(std::size_t x) { return field(std::to_string(x)); }
    CsvLine& operator<<(bool x) { return field(x ? "true" : "false"); }
    CsvLine& operator<<(std::string_view s) { return field(s); }
    CsvLine& operator<<(const char* s) { return field(s); }

private:
    CsvLine& field(std::string_view s) {
        if (!first_) out_ << ',';
        first_ = false;
        out_ << s;
        return *this;
    }
    std::ostream& out_;
    bool first_ = true;
};

inline CoverageInstance training_instance(const Graph& g, const ExperimentConfig& c, double r, std::size_t n,
                                          std::size_t k) {
    const auto sample = sample_detections(g, c.spread(), r, n, study_seed(c.require_seed(), purpose::train), c.threads);
    return build_instance(sample.sdm, g.node_count(), k);
}

inline ExactOptions exact_options(const ExperimentConfig& c) { return {c.time_budget, c.gap_tolerance}; }

}  // namespace detail

// ---------------------------------------------------------------------------
// decompose

inline constexpr std::string_view kDecomposeHeader = "core,nodes,edges,max_degree,average_degree";

inline GraphSummary run_decompose(const Graph& reduced, const ExperimentConfig& c, std::ostream& csv) {
    const auto s = summarize(reduced);
    csv << kDecomposeHeader << '\n';
    detail::CsvLine(csv) << c.core << s.nodes << s.edges << s.max_degree << s.average_degree;
    return s;
}

inline constexpr std::string_view kCalibrationHeader =
    "kind,p,fraction,target_count,reps,completed,exhausted,horizon,mean_time";

inline CalibrationResult run_calibration(const Graph& g, const ExperimentConfig& c, std::ostream& csv) {
    const auto res = calibrate_time_threshold(g, c.spread(), c.calibrate_fraction, c.calibrate_reps,
                                              study_seed(c.require_seed(), purpose::calibrate), c.threads);
    csv << kCalibrationHeader << '\n';
    detail::CsvLine(csv) << to_string(c.kind) << c.p << c.calibrate_fraction << res.target_count
                         << c.calibrate_reps << res.completed << res.exhausted << res.horizon << res.mean_time;
    return res;
}

// ---------------------------------------------------------------------------
// simulate

/// Writes vsm/vdm/sdm text files for every (r, n) cell; returns the paths.
inline std::vector<std::filesystem::path> run_simulate(const Graph& g, const ExperimentConfig& c,
                                                       const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    std::filesystem::create_directories(dir);
    const auto seed = study_seed(c.require_seed(), purpose::train);
    for (double r : c.r) {
        for (std::size_t n : c.n) {
            const auto sample = sample_detections(g, c.spread(), r, n, seed, c.threads);
            const std::string tag = "_r" + format_real(r) + "_n" + std::to_string(n) + ".txt";
            auto emit = [&](const std::string& name, auto&& write) {
                const auto path = dir / (name + tag);
                std::ofstream out(path);
                if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
                write(out);
                written.push_back(path);
            };
            emit("vsm", [&](std::ostream& o) { write_matrix(o, sample.vsm); });
            emit("vdm", [&](std::ostream& o) { write_matrix(o, sample.vdm, sample.vsm); });
            emit("sdm", [&](std::ostream& o) { write_matrix(o, sample.sdm); });
        }
    }
    return written;
}

// ---------------------------------------------------------------------------
// optimize

inline constexpr std::string_view kOptimizeHeader =
    "r,k,n,greedy_objective,exact_objective,upper_bound,proven,relative_gap,search_nodes,greedy_wall_s,exact_wall_s";
inline constexpr std::string_view kPlacementHeader = "r,k,n,method,objective,nodes";

inline void run_optimize(const Graph& g, const ExperimentConfig& c, std::ostream& results, std::ostream& placements) {
    results << kOptimizeHeader << '\n';
    placements << kPlacementHeader << '\n';
    const bool want_greedy = c.method != SolveMethod::exact;
    const bool want_exact = c.method != SolveMethod::greedy;
    for (double r : c.r) {
        for (std::size_t n : c.n) {
            const auto sample =
                sample_detections(g, c.spread(), r, n, study_seed(c.require_seed(), purpose::train), c.threads);
            for (std::size_t k : c.k) {
                const auto inst = build_instance(sample.sdm, g.node_count(), k);
                std::optional<PlacementSolution> greedy, exact;
                double greedy_s = 0.0, exact_s = 0.0;
                if (want_greedy) {
                    const auto t = detail::Clock::now();
                    greedy = greedy_placement(inst);
                    greedy_s = detail::seconds_since(t);
                }
                if (want_exact) {
                    const auto t = detail::Clock::now();
                    exact = exact_placement(inst, detail::exact_options(c));
                    exact_s = detail::seconds_since(t);
                }
                const double bound = exact ? upper_bound(inst, k, *exact) : upper_bound(inst, k);
                {
                    detail::CsvLine row(results);
                    row << r << k << n;
                    if (greedy) row << greedy->objective;
                    else row << "";
                    if (exact)
                        row << exact->objective << bound << exact->proof.has_value()
                            << (exact->proof ? exact->proof->relative_gap : 0.0) << exact->search_nodes;
                    else
                        row << "" << bound << "" << "" << "";
                    if (greedy) row << greedy_s;
                    else row << "";
                    if (exact) row << exact_s;
                    else row << "";
                }
                for (const auto* sol : {greedy ? &*greedy : nullptr, exact ? &*exact : nullptr}) {
                    if (!sol) continue;
                    detail::CsvLine(placements) << r << k << n << to_string(sol->method) << sol->objective
                                                << detail::node_labels(g, sol->nodes);
                }
            }
        }
    }
}

/// Writes the integer program for every (r, k, n) cell. A single cell goes
/// to `path` itself; several cells get `_r.._k.._n..` suffixes.
inline std::vector<std::filesystem::path> run_export_lp(const Graph& g, const ExperimentConfig& c,
                                                        const std::filesystem::path& path) {
    std::vector<std::filesystem::path> written;
    const bool single = c.r.size() * c.k.size() * c.n.size() == 1;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    for (double r : c.r) {
        for (std::size_t n : c.n) {
            const auto sample =
                sample_detections(g, c.spread(), r, n, study_seed(c.require_seed(), purpose::train), c.threads);
            for (std::size_t k : c.k) {
                auto target = path;
                if (!single) {
                    target = path.parent_path() / (path.stem().string() + "_r" + format_real(r) + "_k" +
                                                   std::to_string(k) + "_n" + std::to_string(n) +
                                                   path.extension().string());
                }
                std::ofstream out(target);
                if (!out) throw std::runtime_error("cannot write '" + target.string() + "'");
                export_lp(build_instance(sample.sdm, g.node_count(), k), out);
                if (!out) throw std::runtime_error("write failed for '" + target.string() + "'");
                written.push_back(target);
            }
        }
    }
    return written;
}

// ---------------------------------------------------------------------------
// assess

inline constexpr std::string_view kMcNemarHeader =
    "r,k,n,exact_objective,greedy_objective,proven,n11,n12,n21,n22,n_total,d_hat,std,ci_low,ci_high";

/// Exact (a) against greedy (b) on n_double_prime shared fresh paths, so
/// d_hat is the exact solution's advantage.
inline void run_mcnemar(const Graph& g, const ExperimentConfig& c, std::ostream& csv) {
    csv << kMcNemarHeader << '\n';
    for (double r : c.r)
        for (std::size_t n : c.n)
            for (std::size_t k : c.k) {
                const auto inst = detail::training_instance(g, c, r, n, k);
                const auto greedy = greedy_placement(inst);
                const auto exact = exact_placement(inst, detail::exact_options(c));
                const auto m = mcnemar_compare(g, c.spread(), exact.nodes, greedy.nodes, r, c.n_double_prime, c.alpha,
                                               study_seed(c.require_seed(), purpose::mcnemar), c.threads);
                detail::CsvLine(csv) << r << k << n << exact.objective << greedy.objective << exact.proof.has_value()
                                     << m.n11 << m.n12 << m.n21 << m.n22 << m.n_total << m.d_hat << m.std << m.ci_low
                                     << m.ci_high;
            }
}

inline constexpr std::string_view kMrpHeader = "r,k,n,n_g,n_eval,alpha,training_objective,mean_gap,eps_g,ci_high";

/// Greedy candidates trained on each n, assessed against the same
/// replications (common evaluation seeds across n).
inline void run_mrp(const Graph& g, const ExperimentConfig& c, std::ostream& csv) {
    csv << kMrpHeader << '\n';
    MrpOptions opts;
    opts.bound = c.exact_bound ? GapBound::exact : GapBound::top_k;
    opts.exact = detail::exact_options(c);
    opts.threads = c.threads;
    for (double r : c.r)
        for (std::size_t k : c.k)
            for (std::size_t n : c.n) {
                const auto candidate = greedy_placement(detail::training_instance(g, c, r, n, k));
                const auto gap = mrp_gap(g, c.spread(), candidate.nodes, k, r, c.n_g, c.n_eval, c.alpha,
                                         study_seed(c.require_seed(), purpose::mrp), opts);
                detail::CsvLine(csv) << r << k << n << c.n_g << c.n_eval << c.alpha << candidate.objective
                                     << gap.mean_gap << gap.eps_g << gap.ci_high();
            }
}

inline constexpr std::string_view kRsweepHeader = "k,r,n,training_objective,estimate,std_error";

/// Detection probability of greedy placements as r varies, estimated on
/// n_eval fresh paths per cell.
inline void run_rsweep(const Graph& g, const ExperimentConfig& c, std::ostream& csv) {
    csv << kRsweepHeader << '\n';
    for (std::size_t k : c.k)
        for (double r : c.r)
            for (std::size_t n : c.n) {
                const auto sol = greedy_placement(detail::training_instance(g, c, r, n, k));
                const auto est = estimate_detection_probability(g, c.spread(), sol.nodes, r, c.n_eval,
                                                                study_seed(c.require_seed(), purpose::evaluate),
                                                                c.threads);
                detail::CsvLine(csv) << k << r << n << sol.objective << est.value << est.std_error;
            }
}

inline constexpr std::string_view kIgnoreHeader = "k,r,n,n_eval,fn1,fn2,difference,semi_hamming";

/// Greedy trained on shared paths once with r = 0 (fn1) and once with the
/// true r (fn2); both are scored at the true r on n_eval fresh paths.
/// difference = fn1 - fn2.
inline void run_ignore_fallibility(const Graph& g, const ExperimentConfig& c, std::ostream& csv) {
    csv << kIgnoreHeader << '\n';
    const auto eval_seed = study_seed(c.require_seed(), purpose::evaluate);
    for (std::size_t k : c.k)
        for (double r : c.r)
            for (std::size_t n : c.n) {
                const auto ignoring = greedy_placement(detail::training_instance(g, c, 0.0, n, k));
                const auto aware = greedy_placement(detail::training_instance(g, c, r, n, k));
                const auto fn1 =
                    estimate_detection_probability(g, c.spread(), ignoring.nodes, r, c.n_eval, eval_seed, c.threads);
                const auto fn2 =
                    estimate_detection_probability(g, c.spread(), aware.nodes, r, c.n_eval, eval_seed, c.threads);
                detail::CsvLine(csv) << k << r << n << c.n_eval << fn1.value << fn2.value << fn1.value - fn2.value
                                     << semi_hamming(ignoring.nodes, aware.nodes);
            }
}

/// Runs the configured studies, writing `<study>.csv` files into `dir`.
inline std::vector<std::filesystem::path> run_assess(const Graph& g, const ExperimentConfig& c,
                                                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](Study s, auto&& run) {
        if (c.study != Study::all && c.study != s) return;
        const auto path = dir / (std::string(to_string(s)) + ".csv");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        run(g, c, out);
        written.push_back(path);
    };
    emit(Study::mcnemar, [](auto&... a) { run_mcnemar(a...); });
    emit(Study::mrp, [](auto&... a) { run_mrp(a...); });
    emit(Study::rsweep, [](auto&... a) { run_rsweep(a...); });
    emit(Study::ignore_fallibility, [](auto&... a) { run_ignore_fallibility(a...); });
    return written;
}

// ---------------------------------------------------------------------------
// wheel

inline constexpr std::string_view kWheelHeader = "kind,v,r,closed_form,simulated,std_error";
inline constexpr std::string_view kVminHeader = "r,vmin";

inline void run_wheel(const ExperimentConfig& c, std::ostream& table, std::ostream& vmin_csv) {
    table << kWheelHeader << '\n';
    const auto seed = study_seed(c.require_seed(), purpose::wheel);
    std::uint64_t cell = 0;
    for (std::size_t v : c.wheel_v)
        for (double r : c.wheel_r)
            for (auto kind : wheel::kAllConfigurations) {
                const wheel::Placement p{kind, v, r};
                const auto est = wheel::simulate(p, c.wheel_n, derive_seed(seed, stream_tag::study, cell++), c.threads);
                detail::CsvLine(table) << wheel::to_string(kind) << v << r << wheel::probability(p) << est.value
                                       << est.std_error;
            }
    vmin_csv << kVminHeader << '\n';
    for (double r : c.wheel_r)
        if (r > 0.0) detail::CsvLine(vmin_csv) << r << wheel::vmin(r);
}

}  // namespace honeypot
