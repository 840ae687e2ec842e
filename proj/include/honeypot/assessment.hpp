#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "honeypot/coverage.hpp"
#include "honeypot/graph.hpp"
#include "honeypot/random.hpp"
#include "honeypot/spread.hpp"

namespace honeypot {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t hits = 0;
    std::size_t n = 0;
};

inline Estimate binomial_estimate(std::size_t hits, std::size_t n) {
    Estimate e;
    e.hits = hits;
    e.n = n;
    e.value = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    e.std_error = n ? std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n)) : 0.0;
    return e;
}

namespace detail {

inline std::vector<bool> membership(const NodeSet& s, std::size_t universe) {
    std::vector<bool> in(universe, false);
    for (NodeId v : s) {
        if (v >= universe) throw std::invalid_argument("placement node outside graph");
        in[v] = true;
    }
    return in;
}

inline bool detects(const std::vector<bool>& in, std::span<const NodeId> nodes, std::span<const std::uint8_t> flags) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (flags[i] && in[nodes[i]]) return true;
    return false;
}

}  // namespace detail

/// Fraction of fresh sample paths on which some detector in `s` fires by t0,
/// with its binomial standard error. Uses the same draws as
/// sample_detections(g, cfg, r, n_eval, seed).
inline Estimate estimate_detection_probability(const Graph& g, const SpreadConfig& cfg, const NodeSet& s, double r,
                                               std::size_t n_eval, std::uint64_t seed, unsigned threads = 1) {
    if (s.empty()) throw std::invalid_argument("placement is empty");
    const auto in = detail::membership(s, g.node_count());
    auto parts = for_each_detection_row<std::size_t>(
        g, cfg, r, n_eval, seed, threads, [] { return std::size_t{0}; },
        [&](std::size_t& hits, std::size_t, auto nodes, auto flags, auto) { hits += detail::detects(in, nodes, flags); },
        cfg.t0);
    return binomial_estimate(std::accumulate(parts.begin(), parts.end(), std::size_t{0}), n_eval);
}

/// Paired comparison of placements a and b on shared paths. Rows of the 2x2
/// table are a detects / misses, columns b detects / misses.
struct McNemarResult {
    std::size_t n11 = 0, n12 = 0, n21 = 0, n22 = 0;
    std::size_t n_total = 0;
    double d_hat = 0.0;  ///< (n12 - n21) / n_total, a's advantage
    double std = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    double alpha = 0.05;
};

/// Standard-normal upper alpha/2 quantile.
inline double normal_critical_value(double alpha) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
}

inline McNemarResult mcnemar_from_counts(std::size_t n11, std::size_t n12, std::size_t n21, std::size_t n22,
                                         double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
    McNemarResult m{n11, n12, n21, n22, n11 + n12 + n21 + n22, 0.0, 0.0, 0.0, 0.0, alpha};
    if (m.n_total == 0) throw std::invalid_argument("McNemar table is empty");
    const double n = static_cast<double>(m.n_total);
    const double p12 = static_cast<double>(n12) / n;
    const double p21 = static_cast<double>(n21) / n;
    m.d_hat = (static_cast<double>(n12) - static_cast<double>(n21)) / n;
    const double var = (p12 * (1.0 - p12) + p21 * (1.0 - p21) + 2.0 * p12 * p21) / n;
    m.std = std::sqrt(var);
    const double half = normal_critical_value(alpha) * m.std;
    m.ci_low = m.d_hat - half;
    m.ci_high = m.d_hat + half;
    return m;
}

inline McNemarResult mcnemar_compare(const Graph& g, const SpreadConfig& cfg, const NodeSet& a, const NodeSet& b,
                                     double r, std::size_t n_total, double alpha, std::uint64_t seed,
                                     unsigned threads = 1) {
    if (n_total == 0) throw std::invalid_argument("McNemar comparison needs at least one path");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
    const auto in_a = detail::membership(a, g.node_count());
    const auto in_b = detail::membership(b, g.node_count());
    struct Table {
        std::size_t c[2][2] = {{0, 0}, {0, 0}};
    };
    auto parts = for_each_detection_row<Table>(
        g, cfg, r, n_total, seed, threads, [] { return Table{}; },
        [&](Table& t, std::size_t, auto nodes, auto flags, auto) {
            const bool da = detail::detects(in_a, nodes, flags);
            const bool db = detail::detects(in_b, nodes, flags);
            ++t.c[da ? 0 : 1][db ? 0 : 1];
        },
        cfg.t0);
    Table sum;
    for (const auto& t : parts)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) sum.c[i][j] += t.c[i][j];
    return mcnemar_from_counts(sum.c[0][0], sum.c[0][1], sum.c[1][0], sum.c[1][1], alpha);
}

/// Multiple-replications optimality-gap estimate for a candidate placement.
struct GapEstimate {
    std::vector<double> gaps;
    std::vector<double> upper_bounds;
    std::vector<double> candidate_values;
    double mean_gap = 0.0;
    double eps_g = 0.0;  ///< one-sided CI half-width; CI is [0, mean_gap + eps_g]
    double alpha = 0.05;
    std::size_t n_eval = 0;

    double ci_high() const { return mean_gap + eps_g; }
};

enum class GapBound {
    top_k,  ///< upper_bound(instance, k)
    exact,  ///< tightened by exact_placement's certified bound
};

struct MrpOptions {
    GapBound bound = GapBound::top_k;
    ExactOptions exact{};
    unsigned threads = 1;
};

/// Student-t upper alpha quantile with `dof` degrees of freedom.
inline double student_t_critical_value(double alpha, std::size_t dof) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(static_cast<double>(dof)), 1.0 - alpha);
}

/// For each replication i: sample n_eval fresh paths and flips, bound the SAA
/// optimum from above (U_i), score the candidate on the same rows (f_i) and
/// record G_i = U_i - f_i >= 0. eps_g = t_{n_g-1, 1-alpha} * sd(G) / sqrt(n_g).
inline GapEstimate mrp_gap(const Graph& g, const SpreadConfig& cfg, const NodeSet& candidate, std::size_t k, double r,
                           std::size_t n_g, std::size_t n_eval, double alpha, std::uint64_t seed,
                           const MrpOptions& opts = {}) {
    if (n_g < 2) throw std::invalid_argument("MRP needs at least two replications");
    if (candidate.size() != k) throw std::invalid_argument("candidate size differs from k");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
    GapEstimate est;
    est.alpha = alpha;
    est.n_eval = n_eval;
    for (std::size_t i = 0; i < n_g; ++i) {
        const auto rep_seed = derive_seed(seed, stream_tag::replication, i);
        const auto sample = sample_detections(g, cfg, r, n_eval, rep_seed, opts.threads);
        const auto inst = build_instance(sample.sdm, g.node_count(), k);
        double ub = upper_bound(inst, k);
        if (opts.bound == GapBound::exact) ub = upper_bound(inst, k, exact_placement(inst, opts.exact));
        const double f = evaluate(inst, candidate);
        est.upper_bounds.push_back(ub);
        est.candidate_values.push_back(f);
        est.gaps.push_back(ub - f);
    }
    const double m = static_cast<double>(n_g);
    est.mean_gap = std::accumulate(est.gaps.begin(), est.gaps.end(), 0.0) / m;
    double ss = 0.0;
    for (double x : est.gaps) ss += (x - est.mean_gap) * (x - est.mean_gap);
    const double sd = std::sqrt(ss / (m - 1.0));
    est.eps_g = student_t_critical_value(alpha, n_g - 1) * sd / std::sqrt(m);
    return est;
}

struct DetectionTimeEstimate {
    double mean = 0.0;  ///< mean of min(T, horizon)
    double std_error = 0.0;
    double censored_fraction = 0.0;  ///< paths with no detection by the horizon
    std::size_t n = 0;
};

/// Censored mean first-detection time: paths are simulated for `horizon`
/// steps and undetected paths contribute `horizon`.
inline DetectionTimeEstimate estimate_expected_detection_time(const Graph& g, const SpreadConfig& cfg,
                                                              const NodeSet& s, double r, std::size_t horizon,
                                                              std::size_t n_eval, std::uint64_t seed,
                                                              unsigned threads = 1) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (s.empty()) throw std::invalid_argument("placement is empty");
    const auto in = detail::membership(s, g.node_count());
    // Integer sums keep the result independent of the thread split.
    struct Acc {
        std::uint64_t sum = 0, sum_sq = 0;
        std::size_t censored = 0;
    };
    auto parts = for_each_detection_row<Acc>(
        g, cfg, r, n_eval, seed, threads, [] { return Acc{}; },
        [&](Acc& a, std::size_t, auto nodes, auto flags, auto times) {
            std::size_t t = horizon;
            bool hit = false;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                if (flags[i] && in[nodes[i]] && times[i] <= t) {
                    t = times[i];
                    hit = true;
                }
            if (!hit) ++a.censored;
            a.sum += t;
            a.sum_sq += static_cast<std::uint64_t>(t) * t;
        },
        horizon);
    Acc total;
    for (const auto& a : parts) {
        total.sum += a.sum;
        total.sum_sq += a.sum_sq;
        total.censored += a.censored;
    }
    DetectionTimeEstimate est;
    const double n = static_cast<double>(n_eval);
    est.n = n_eval;
    est.mean = static_cast<double>(total.sum) / n;
    const double var =
        n > 1 ? std::max(0.0, (static_cast<double>(total.sum_sq) - n * est.mean * est.mean) / (n - 1.0)) : 0.0;
    est.std_error = std::sqrt(var / n);
    est.censored_fraction = static_cast<double>(total.censored) / n;
    return est;
}

/// Half the symmetric difference of two equal-size placements, i.e. the
/// number of node swaps turning one into the other.
inline std::size_t semi_hamming(const NodeSet& a, const NodeSet& b) {
    if (a.size() != b.size()) throw std::invalid_argument("placements differ in size");
    std::vector<NodeId> diff;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
    return diff.size() / 2;
}

}  // namespace honeypot
