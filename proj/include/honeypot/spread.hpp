#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "honeypot/graph.hpp"
#include "honeypot/random.hpp"

namespace honeypot {

/// Spread dynamics, named by the five-letter code of the spread nomenclature
/// (replication, persistence, propagation, transmissibility, latency).
enum class SpreadKind {
    TN11C,  ///< single transiting copy, one random neighbour per step
    RA1PC,  ///< every infected node tries one random neighbour, success p
    RAEPC,  ///< every infected node tries all neighbours, success p each
};

inline std::string_view to_string(SpreadKind k) {
    switch (k) {
        case SpreadKind::TN11C: return "TN11C";
        case SpreadKind::RA1PC: return "RA1PC";
        case SpreadKind::RAEPC: return "RAEPC";
    }
    return "?";
}

/// Accepts the three codes plus the p=1 aliases RA11C and RAE1C.
inline SpreadKind parse_spread_kind(std::string_view s) {
    if (s == "TN11C") return SpreadKind::TN11C;
    if (s == "RA1PC" || s == "RA11C") return SpreadKind::RA1PC;
    if (s == "RAEPC" || s == "RAE1C") return SpreadKind::RAEPC;
    throw std::invalid_argument("unknown spread kind '" + std::string(s) + "'");
}

struct SpreadConfig {
    SpreadKind kind = SpreadKind::TN11C;
    std::size_t t0 = 1;
    double p = 1.0;                   ///< transmissibility; TN11C always transmits
    std::vector<double> initial_pmf;  ///< empty means uniform over V

    void validate(std::size_t node_count) const {
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("transmission probability must be in (0, 1]");
        if (initial_pmf.empty()) return;
        if (initial_pmf.size() != node_count)
            throw std::invalid_argument("initial pmf length does not match node count");
        double total = 0.0;
        for (double w : initial_pmf) {
            if (!(w >= 0.0)) throw std::invalid_argument("initial pmf has a negative entry");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("initial pmf does not sum to 1");
    }
};

/// Row-major ragged storage: row i is values[offsets[i] .. offsets[i+1]).
template <class T>
class Ragged {
public:
    std::size_t rows() const noexcept { return offsets_.size() - 1; }
    std::size_t total() const noexcept { return values_.size(); }

    std::span<const T> row(std::size_t i) const {
        return {values_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    void push_row(std::span<const T> r) {
        values_.insert(values_.end(), r.begin(), r.end());
        offsets_.push_back(values_.size());
    }

    void append(const Ragged& other) {
        for (std::size_t i = 0; i < other.rows(); ++i) push_row(other.row(i));
    }

    void reserve(std::size_t rows, std::size_t values) {
        offsets_.reserve(rows + 1);
        values_.reserve(values);
    }

    const std::vector<T>& values() const noexcept { return values_; }

    bool same_shape(const auto& other) const { return offsets_ == other.offsets(); }
    const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }

    friend bool operator==(const Ragged&, const Ragged&) = default;

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<T> values_;
};

inline constexpr NodeId kNoDetection = std::numeric_limits<NodeId>::max();

/// One row per sample path. TN11C rows are the visit sequence at t=0..t0;
/// RA1PC/RAEPC rows list distinct infected nodes in order of infection.
struct VirusSpreadMatrix {
    SpreadKind kind = SpreadKind::TN11C;
    std::size_t t0 = 0;
    double p = 1.0;
    std::uint64_t seed = 0;
    Ragged<NodeId> rows;
};

/// Coin flips congruent to a VSM; 1 means a detector there would fire.
struct VirtualDetectionMatrix {
    double r = 0.0;
    std::uint64_t seed = 0;
    Ragged<std::uint8_t> flags;
};

/// VSM entries where the matching flag is 1, kNoDetection elsewhere.
struct SuccessfulDetectionMatrix {
    SpreadKind kind = SpreadKind::TN11C;
    std::size_t t0 = 0;
    double p = 1.0;
    double r = 0.0;
    Ragged<NodeId> rows;
};

/// Generates one spread path at a time. Holds scratch buffers, so use one
/// instance per thread.
class PathSimulator {
public:
    PathSimulator(const Graph& g, const SpreadConfig& cfg) : g_(g), cfg_(cfg), mark_(g.node_count(), 0) {
        if (!cfg.initial_pmf.empty()) {
            cdf_.resize(cfg.initial_pmf.size());
            std::partial_sum(cfg.initial_pmf.begin(), cfg.initial_pmf.end(), cdf_.begin());
        }
    }

    /// Simulates up to `horizon` steps, stopping early once `stop_count`
    /// distinct nodes are infected. `nodes` receives the row, `times` (when
    /// given) the step of each entry. Returns the step at which stop_count
    /// was reached, if it was.
    std::optional<std::size_t> run(PathRng& rng, std::size_t horizon, std::vector<NodeId>& nodes,
                                   std::vector<std::uint32_t>* times = nullptr,
                                   std::size_t stop_count = std::numeric_limits<std::size_t>::max()) {
        nodes.clear();
        if (times) times->clear();
        next_epoch();
        std::size_t distinct = 0;
        auto infect = [&](NodeId v, std::size_t t) {
            nodes.push_back(v);
            if (times) times->push_back(static_cast<std::uint32_t>(t));
            if (mark_[v] != epoch_) {
                mark_[v] = epoch_;
                ++distinct;
            }
        };

        infect(initial_node(rng), 0);
        if (distinct >= stop_count) return 0;
        const std::size_t n = g_.node_count();

        for (std::size_t t = 1; t <= horizon; ++t) {
            switch (cfg_.kind) {
                case SpreadKind::TN11C: {
                    const auto& nbrs = g_.neighbors(nodes.back());
                    infect(nbrs[rng.below(nbrs.size())], t);
                    break;
                }
                case SpreadKind::RA1PC: {
                    const std::size_t active = nodes.size();
                    for (std::size_t i = 0; i < active; ++i) {
                        const auto& nbrs = g_.neighbors(nodes[i]);
                        const NodeId target = nbrs[rng.below(nbrs.size())];
                        const bool transmitted = rng.bernoulli(cfg_.p);
                        if (transmitted && mark_[target] != epoch_) infect(target, t);
                    }
                    break;
                }
                case SpreadKind::RAEPC: {
                    const std::size_t active = nodes.size();
                    for (std::size_t i = 0; i < active; ++i)
                        for (NodeId v : g_.neighbors(nodes[i]))
                            if (mark_[v] != epoch_ && rng.bernoulli(cfg_.p)) infect(v, t);
                    break;
                }
            }
            if (distinct >= stop_count) return t;
            if (cfg_.kind != SpreadKind::TN11C && distinct == n) break;
        }
        return std::nullopt;
    }

private:
    NodeId initial_node(PathRng& rng) {
        if (cdf_.empty()) return static_cast<NodeId>(rng.below(g_.node_count()));
        const double u = rng.uniform() * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        auto idx = static_cast<std::size_t>(it - cdf_.begin());
        return static_cast<NodeId>(std::min(idx, cdf_.size() - 1));
    }

    void next_epoch() {
        if (++epoch_ == 0) {
            std::fill(mark_.begin(), mark_.end(), 0);
            epoch_ = 1;
        }
    }

    const Graph& g_;
    const SpreadConfig& cfg_;
    std::vector<double> cdf_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t epoch_ = 0;
};

namespace detail {

inline void require_spread_inputs(const Graph& g, const SpreadConfig& cfg, std::size_t n) {
    if (n == 0) throw std::invalid_argument("number of sample paths must be positive");
    if (g.empty()) throw std::invalid_argument("graph is empty");
    cfg.validate(g.node_count());
    if (!is_connected(g)) throw std::invalid_argument("graph is not connected");
}

inline void require_false_negative_rate(double r) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("false-negative probability must be in [0, 1)");
}

/// Runs make_row(worker_state, row_index, out) in parallel slices and
/// concatenates the results in row order.
template <class T, class State, class MakeState, class MakeRow>
Ragged<T> build_rows(std::size_t n, unsigned threads, MakeState&& make_state, MakeRow&& make_row) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
    std::vector<Ragged<T>> parts(workers);
    parallel_for(n, static_cast<unsigned>(workers), [&](std::size_t w, std::size_t begin, std::size_t end) {
        State state = make_state();
        std::vector<T> buf;
        for (std::size_t l = begin; l < end; ++l) {
            make_row(state, l, buf);
            parts[w].push_row(buf);
        }
    });
    if (workers == 1) return std::move(parts[0]);
    Ragged<T> out;
    for (auto& part : parts) out.append(part);
    return out;
}

inline void flip_row(PathRng& rng, double r, std::size_t count, std::vector<std::uint8_t>& out) {
    out.resize(count);
    if (r == 0.0) {
        std::fill(out.begin(), out.end(), std::uint8_t{1});
        return;
    }
    for (auto& f : out) f = rng.bernoulli(1.0 - r) ? 1 : 0;
}

}  // namespace detail

/// n independent sample paths; path l draws from stream (seed, l).
inline VirusSpreadMatrix simulate_paths(const Graph& g, const SpreadConfig& cfg, std::size_t n, std::uint64_t seed,
                                        unsigned threads = 1) {
    detail::require_spread_inputs(g, cfg, n);
    VirusSpreadMatrix vsm{cfg.kind, cfg.t0, cfg.kind == SpreadKind::TN11C ? 1.0 : cfg.p, seed, {}};
    vsm.rows = detail::build_rows<NodeId, PathSimulator>(
        n, threads, [&] { return PathSimulator(g, cfg); },
        [&](PathSimulator& sim, std::size_t l, std::vector<NodeId>& buf) {
            PathRng rng(seed, l);
            sim.run(rng, cfg.t0, buf);
        });
    return vsm;
}

/// One Bernoulli(1-r) flag per VSM entry: per visit for TN11C (revisits
/// re-flip), per distinct infected node for the replicating models.
inline VirtualDetectionMatrix sample_virtual_detections(const VirusSpreadMatrix& vsm, double r, std::uint64_t seed,
                                                        unsigned threads = 1) {
    detail::require_false_negative_rate(r);
    VirtualDetectionMatrix vdm{r, seed, {}};
    const std::size_t n = vsm.rows.rows();
    if (n == 0) return vdm;
    struct NoState {};
    vdm.flags = detail::build_rows<std::uint8_t, NoState>(
        n, threads, [] { return NoState{}; },
        [&](NoState&, std::size_t l, std::vector<std::uint8_t>& buf) {
            PathRng rng(seed, l);
            detail::flip_row(rng, r, vsm.rows.row(l).size(), buf);
        });
    return vdm;
}

/// Element-wise product of a VSM and its VDM.
inline SuccessfulDetectionMatrix successful_detection_matrix(const VirusSpreadMatrix& vsm,
                                                             const VirtualDetectionMatrix& vdm) {
    if (vsm.rows.offsets() != vdm.flags.offsets())
        throw std::invalid_argument("VSM and VDM shapes differ");
    SuccessfulDetectionMatrix sdm{vsm.kind, vsm.t0, vsm.p, vdm.r, {}};
    sdm.rows.reserve(vsm.rows.rows(), vsm.rows.total());
    std::vector<NodeId> buf;
    for (std::size_t l = 0; l < vsm.rows.rows(); ++l) {
        auto nodes = vsm.rows.row(l);
        auto flags = vdm.flags.row(l);
        buf.resize(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) buf[i] = flags[i] ? nodes[i] : kNoDetection;
        sdm.rows.push_row(buf);
    }
    return sdm;
}

/// Path and flip seeds used by every pipeline that samples from one master
/// seed, so estimators and materialized matrices see the same draws.
struct SampleSeeds {
    std::uint64_t paths;
    std::uint64_t flips;
};

inline SampleSeeds split_seed(std::uint64_t seed) {
    return {derive_seed(seed, stream_tag::paths), derive_seed(seed, stream_tag::flips)};
}

struct DetectionSample {
    VirusSpreadMatrix vsm;
    VirtualDetectionMatrix vdm;
    SuccessfulDetectionMatrix sdm;
};

inline DetectionSample sample_detections(const Graph& g, const SpreadConfig& cfg, double r, std::size_t n,
                                         std::uint64_t seed, unsigned threads = 1) {
    detail::require_false_negative_rate(r);
    const auto seeds = split_seed(seed);
    DetectionSample s;
    s.vsm = simulate_paths(g, cfg, n, seeds.paths, threads);
    s.vdm = sample_virtual_detections(s.vsm, r, seeds.flips, threads);
    s.sdm = successful_detection_matrix(s.vsm, s.vdm);
    return s;
}

/// Streams the successful-detection rows of sample_detections(g, cfg, r, n,
/// seed) without storing them. visit(state, row_index, nodes, flags, times)
/// is called per row; make_state() builds one accumulator per worker and the
/// accumulators are returned in worker order.
template <class State, class MakeState, class Visit>
std::vector<State> for_each_detection_row(const Graph& g, const SpreadConfig& cfg, double r, std::size_t n,
                                          std::uint64_t seed, unsigned threads, MakeState&& make_state,
                                          Visit&& visit, std::size_t horizon) {
    detail::require_spread_inputs(g, cfg, n);
    detail::require_false_negative_rate(r);
    const auto seeds = split_seed(seed);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
    std::vector<State> states;
    states.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) states.push_back(make_state());
    parallel_for(n, static_cast<unsigned>(workers), [&](std::size_t w, std::size_t begin, std::size_t end) {
        PathSimulator sim(g, cfg);
        std::vector<NodeId> nodes;
        std::vector<std::uint8_t> flags;
        std::vector<std::uint32_t> times;
        for (std::size_t l = begin; l < end; ++l) {
            PathRng path_rng(seeds.paths, l);
            sim.run(path_rng, horizon, nodes, &times);
            PathRng flip_rng(seeds.flips, l);
            detail::flip_row(flip_rng, r, nodes.size(), flags);
            visit(states[w], l, std::span<const NodeId>(nodes), std::span<const std::uint8_t>(flags),
                  std::span<const std::uint32_t>(times));
        }
    });
    return states;
}

struct CalibrationResult {
    double mean_time = 0.0;       ///< over completed replications
    std::size_t target_count = 0; ///< infected nodes required
    std::size_t completed = 0;
    std::size_t exhausted = 0;    ///< replications that hit the safety horizon
    std::size_t horizon = 0;
};

/// Mean first step at which ceil(target_fraction * |V|) distinct nodes are
/// infected, simulating without a time cap up to a horizon of 100|V| steps.
inline CalibrationResult calibrate_time_threshold(const Graph& g, const SpreadConfig& cfg, double target_fraction,
                                                  std::size_t reps, std::uint64_t seed, unsigned threads = 1) {
    if (!(target_fraction > 0.0 && target_fraction <= 1.0))
        throw std::invalid_argument("target fraction must be in (0, 1]");
    detail::require_spread_inputs(g, cfg, reps);
    CalibrationResult res;
    const double raw = target_fraction * static_cast<double>(g.node_count());
    res.target_count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw * (1.0 - 1e-12))));
    res.horizon = 100 * g.node_count();

    struct Acc {
        std::size_t sum = 0, completed = 0, exhausted = 0;
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), reps));
    std::vector<Acc> acc(workers);
    parallel_for(reps, static_cast<unsigned>(workers), [&](std::size_t w, std::size_t begin, std::size_t end) {
        PathSimulator sim(g, cfg);
        std::vector<NodeId> nodes;
        for (std::size_t l = begin; l < end; ++l) {
            PathRng rng(seed, l);
            auto t = sim.run(rng, res.horizon, nodes, nullptr, res.target_count);
            if (t) {
                acc[w].sum += *t;
                ++acc[w].completed;
            } else {
                ++acc[w].exhausted;
            }
        }
    });
    std::size_t sum = 0;
    for (const auto& a : acc) {
        sum += a.sum;
        res.completed += a.completed;
        res.exhausted += a.exhausted;
    }
    res.mean_time = res.completed ? static_cast<double>(sum) / static_cast<double>(res.completed) : 0.0;
    return res;
}

// ---------------------------------------------------------------------------
// Text format: a '#' header of key=value fields, then one comma-separated
// line per row with '-' for kNoDetection.

struct MatrixHeader {
    std::string matrix;  ///< VSM, VDM or SDM
    SpreadKind kind = SpreadKind::TN11C;
    std::size_t t0 = 0;
    double p = 1.0;
    std::optional<double> r;
    std::size_t n = 0;
    std::optional<std::uint64_t> seed;
};

namespace detail {

// Shortest text that reads back to the same double.
inline std::string shortest(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline void write_header(std::ostream& out, const MatrixHeader& h) {
    out << "# " << h.matrix << " kind=" << to_string(h.kind) << " t0=" << h.t0 << " p=" << shortest(h.p) << " r=";
    if (h.r) out << shortest(*h.r); else out << '-';
    out << " n=" << h.n << " seed=";
    if (h.seed) out << *h.seed; else out << '-';
    out << '\n';
}

template <class T, class Fmt>
void write_rows(std::ostream& out, const Ragged<T>& rows, Fmt&& fmt) {
    for (std::size_t l = 0; l < rows.rows(); ++l) {
        auto row = rows.row(l);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            fmt(out, row[i]);
        }
        out << '\n';
    }
}

inline void write_node(std::ostream& out, NodeId v) {
    if (v == kNoDetection) out << '-'; else out << v;
}

}  // namespace detail

inline void write_matrix(std::ostream& out, const VirusSpreadMatrix& m) {
    detail::write_header(out, {"VSM", m.kind, m.t0, m.p, std::nullopt, m.rows.rows(), m.seed});
    detail::write_rows(out, m.rows, detail::write_node);
}

inline void write_matrix(std::ostream& out, const VirtualDetectionMatrix& m, const VirusSpreadMatrix& of) {
    detail::write_header(out, {"VDM", of.kind, of.t0, of.p, m.r, m.flags.rows(), m.seed});
    detail::write_rows(out, m.flags, [](std::ostream& os, std::uint8_t f) { os << static_cast<int>(f); });
}

inline void write_matrix(std::ostream& out, const SuccessfulDetectionMatrix& m) {
    detail::write_header(out, {"SDM", m.kind, m.t0, m.p, m.r, m.rows.rows(), std::nullopt});
    detail::write_rows(out, m.rows, detail::write_node);
}

/// Parses any of the three matrices; entries come back as node ids with
/// '-' mapped to kNoDetection (VDM flags read as 0/1).
inline std::pair<MatrixHeader, Ragged<NodeId>> read_matrix(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ParseError(1, "missing matrix header");
    MatrixHeader h;
    std::istringstream hs(line.substr(2));
    hs >> h.matrix;
    std::string field;
    while (hs >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError(1, "bad header field '" + field + "'");
        auto key = field.substr(0, eq), val = field.substr(eq + 1);
        if (key == "kind") h.kind = parse_spread_kind(val);
        else if (key == "t0") h.t0 = std::stoul(val);
        else if (key == "p") h.p = std::stod(val);
        else if (key == "r") { if (val != "-") h.r = std::stod(val); }
        else if (key == "n") h.n = std::stoul(val);
        else if (key == "seed") { if (val != "-") h.seed = std::stoull(val); }
        else throw ParseError(1, "unknown header field '" + key + "'");
    }
    Ragged<NodeId> rows;
    std::vector<NodeId> buf;
    std::size_t lineno = 1;
    while (rows.rows() < h.n && std::getline(in, line)) {
        ++lineno;
        buf.clear();
        std::string_view rest(line);
        while (!rest.empty()) {
            auto comma = rest.find(',');
            auto tok = rest.substr(0, comma);
            if (tok == "-") {
                buf.push_back(kNoDetection);
            } else {
                std::size_t used = 0;
                unsigned long v = 0;
                try {
                    v = std::stoul(std::string(tok), &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != tok.size() || tok.empty()) throw ParseError(lineno, "bad entry '" + std::string(tok) + "'");
                buf.push_back(static_cast<NodeId>(v));
            }
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        rows.push_row(buf);
    }
    if (rows.rows() != h.n) throw ParseError(lineno, "expected " + std::to_string(h.n) + " rows");
    return {h, std::move(rows)};
}

}  // namespace honeypot
