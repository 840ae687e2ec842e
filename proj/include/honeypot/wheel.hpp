#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "honeypot/assessment.hpp"
#include "honeypot/graph.hpp"
#include "honeypot/random.hpp"
#include "honeypot/spread.hpp"

// Two detectors on a wheel (hub 0, rim 1..v-1), TN11C spread with a single
// hop t=0 -> t=1, uniform start, false-negative rate r per detector per visit.

namespace honeypot::wheel {

enum class Configuration { adjacent_edge, diametrically_opposite, center_edge, center_center };

inline constexpr std::array<Configuration, 4> kAllConfigurations = {
    Configuration::adjacent_edge, Configuration::diametrically_opposite, Configuration::center_edge,
    Configuration::center_center};

inline std::string_view to_string(Configuration c) {
    switch (c) {
        case Configuration::adjacent_edge: return "adjacent_edge";
        case Configuration::diametrically_opposite: return "diametrically_opposite";
        case Configuration::center_edge: return "center_edge";
        case Configuration::center_center: return "center_center";
    }
    return "?";
}

inline Configuration parse_configuration(std::string_view s) {
    for (auto c : kAllConfigurations)
        if (to_string(c) == s) return c;
    throw std::invalid_argument("unknown wheel placement '" + std::string(s) + "'");
}

struct Placement {
    Configuration kind = Configuration::center_center;
    std::size_t v = 5;
    double r = 0.0;

    void validate() const {
        if (v < 5) throw std::invalid_argument("wheel needs v >= 5");
        if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("false-negative probability must be in [0, 1)");
    }
};

namespace detail {

/// The closed forms, generic over the scalar so they can be evaluated both in
/// double and in exact rationals.
template <class T>
T probability(Configuration c, const T& v, const T& r) {
    const T one(1), two(2), three(3);
    const T denom = three * v * (v - one);
    switch (c) {
        case Configuration::adjacent_edge:
            return two * (one - r) * (T(4) * v - one + r * v - r) / denom;
        case Configuration::diametrically_opposite:
            return two * (one - r) * (T(5) * v - two) / denom;
        case Configuration::center_edge:
            return (one - r) * (v * v + T(5) * v + r * v + two * r - T(6)) / denom;
        case Configuration::center_center:
            return (one - r) * (one + r) * (v + two) / (three * v);
    }
    throw std::logic_error("unreachable");
}

using Rational = boost::multiprecision::cpp_rational;

/// Exact rational value of a double (every finite double is dyadic).
inline Rational exact(double x) {
    int exponent = 0;
    const double mantissa = std::frexp(x, &exponent);
    auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
    Rational q(scaled);
    const int shift = exponent - 53;
    boost::multiprecision::cpp_int pow2 = 1;
    pow2 <<= std::abs(shift);
    return shift >= 0 ? q * Rational(pow2) : q / Rational(pow2);
}

/// Sign of r v^2 - 4v - 4r + 4, which is >= 0 exactly when center_center is
/// at least as good as center_edge.
inline bool center_center_not_worse(std::size_t v, double r) {
    const Rational q = exact(r);
    const Rational vv(static_cast<std::int64_t>(v));
    return q * vv * vv - 4 * vv - 4 * q + 4 >= 0;
}

}  // namespace detail

inline double probability(const Placement& p) {
    p.validate();
    return detail::probability<double>(p.kind, static_cast<double>(p.v), p.r);
}

inline double probability(Configuration c, std::size_t v, double r) { return probability(Placement{c, v, r}); }

/// Limit of the detection probability as v grows with r fixed.
inline double limit_probability(Configuration c, double r) {
    switch (c) {
        case Configuration::adjacent_edge:
        case Configuration::diametrically_opposite: return 0.0;
        case Configuration::center_edge: return (1.0 - r) / 3.0;
        case Configuration::center_center: return (1.0 - r * r) / 3.0;
    }
    return 0.0;
}

/// Exact probability as a rational in v and the exact value of r.
inline detail::Rational probability_exact(Configuration c, std::size_t v, double r) {
    Placement{c, v, r}.validate();
    return detail::probability<detail::Rational>(c, detail::Rational(static_cast<std::int64_t>(v)), detail::exact(r));
}

/// ceil(2/r + 2 sqrt(1 - 1/r + 1/r^2)): the smallest v at which two detectors
/// on the hub do at least as well as hub plus one rim node. The floating
/// ceiling is corrected by exact comparison at the boundary.
inline std::size_t vmin(double r) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("vmin needs r in (0, 1)");
    const double root = 2.0 / r + 2.0 * std::sqrt(1.0 - 1.0 / r + 1.0 / (r * r));
    auto v = static_cast<std::size_t>(std::ceil(root));
    while (!detail::center_center_not_worse(v, r)) ++v;
    // The quadratic is negative between its roots, so step down while the
    // previous integer still satisfies it and lies above the smaller root.
    const double small_root = 2.0 / r - 2.0 * std::sqrt(1.0 - 1.0 / r + 1.0 / (r * r));
    while (v > 1 && static_cast<double>(v - 1) > small_root && detail::center_center_not_worse(v - 1, r)) --v;
    return v;
}

/// Best of the four configurations; ties go to the one with fewer distinct
/// detector nodes, then in the order center_edge, diametrically_opposite,
/// adjacent_edge.
inline Configuration best_placement(std::size_t v, double r) {
    Placement{Configuration::center_center, v, r}.validate();
    constexpr std::array<Configuration, 4> preference = {
        Configuration::center_center, Configuration::center_edge, Configuration::diametrically_opposite,
        Configuration::adjacent_edge};
    Configuration best = preference[0];
    auto best_value = probability_exact(best, v, r);
    for (std::size_t i = 1; i < preference.size(); ++i) {
        auto value = probability_exact(preference[i], v, r);
        if (value > best_value) {
            best = preference[i];
            best_value = value;
        }
    }
    return best;
}

/// Detector multiset as (node, count) pairs.
using DetectorMultiset = std::vector<std::pair<NodeId, unsigned>>;

inline DetectorMultiset detectors_for(Configuration c, std::size_t v) {
    if (v < 5) throw std::invalid_argument("wheel needs v >= 5");
    const auto opposite = static_cast<NodeId>(1 + (v - 1) / 2);
    switch (c) {
        case Configuration::adjacent_edge: return {{1, 1}, {2, 1}};
        case Configuration::diametrically_opposite: return {{1, 1}, {opposite, 1}};
        case Configuration::center_edge: return {{0, 1}, {1, 1}};
        case Configuration::center_center: return {{0, 2}};
    }
    return {};
}

/// Monte Carlo check of the closed forms: TN11C on wheel_graph(v) with t0=1;
/// a visit to a node holding m detectors is caught with probability 1 - r^m
/// (m independent flips per visit).
inline Estimate simulate(std::size_t v, double r, const DetectorMultiset& detectors, std::size_t n,
                         std::uint64_t seed, unsigned threads = 1) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("false-negative probability must be in [0, 1)");
    if (n == 0) throw std::invalid_argument("number of sample paths must be positive");
    const Graph g = wheel_graph(v);
    unsigned total = 0;
    std::vector<unsigned> count(v, 0);
    for (auto [node, m] : detectors) {
        if (node >= v) throw std::invalid_argument("detector node outside wheel");
        count[node] += m;
        total += m;
    }
    if (total != 2) throw std::invalid_argument("wheel analysis uses exactly two detectors");

    const SpreadConfig cfg{SpreadKind::TN11C, 1, 1.0, {}};
    const auto seeds = split_seed(seed);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
    std::vector<std::size_t> hits(workers, 0);
    parallel_for(n, static_cast<unsigned>(workers), [&](std::size_t w, std::size_t begin, std::size_t end) {
        PathSimulator sim(g, cfg);
        std::vector<NodeId> nodes;
        for (std::size_t l = begin; l < end; ++l) {
            PathRng path_rng(seeds.paths, l);
            sim.run(path_rng, 1, nodes);
            PathRng flip_rng(seeds.flips, l);
            bool detected = false;
            for (NodeId x : nodes)
                for (unsigned d = 0; d < count[x]; ++d)
                    if (flip_rng.bernoulli(1.0 - r)) detected = true;
            hits[w] += detected;
        }
    });
    std::size_t sum = 0;
    for (auto h : hits) sum += h;
    return binomial_estimate(sum, n);
}

inline Estimate simulate(const Placement& p, std::size_t n, std::uint64_t seed, unsigned threads = 1) {
    p.validate();
    return simulate(p.v, p.r, detectors_for(p.kind, p.v), n, seed, threads);
}

}  // namespace honeypot::wheel
