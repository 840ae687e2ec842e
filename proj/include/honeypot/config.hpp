#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "honeypot/spread.hpp"

// Experiment configuration: `key = value` lines, '#' starts a comment, list
// values are comma separated. Unknown keys are rejected.

namespace honeypot {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Study { mcnemar, mrp, rsweep, ignore_fallibility, all };

inline std::string_view to_string(Study s) {
    switch (s) {
        case Study::mcnemar: return "mcnemar";
        case Study::mrp: return "mrp";
        case Study::rsweep: return "rsweep";
        case Study::ignore_fallibility: return "ignore_fallibility";
        case Study::all: return "all";
    }
    return "?";
}

inline Study parse_study(std::string_view s) {
    for (auto v : {Study::mcnemar, Study::mrp, Study::rsweep, Study::ignore_fallibility, Study::all})
        if (to_string(v) == s) return v;
    throw ConfigError("unknown study '" + std::string(s) + "'");
}

enum class SolveMethod { greedy, exact, both };

inline std::string_view to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::greedy: return "greedy";
        case SolveMethod::exact: return "exact";
        case SolveMethod::both: return "both";
    }
    return "?";
}

inline SolveMethod parse_solve_method(std::string_view s) {
    for (auto v : {SolveMethod::greedy, SolveMethod::exact, SolveMethod::both})
        if (to_string(v) == s) return v;
    throw ConfigError("unknown method '" + std::string(s) + "'");
}

struct ExperimentConfig {
    /// Edge-list path, `wheel:V` or `small_world:N,K,BETA,SEED`.
    std::string graph;
    bool directed_input = false;
    std::size_t core = 0;  ///< c-core order; 0 keeps every node
    bool lcc = true;

    SpreadKind kind = SpreadKind::TN11C;
    std::size_t t0 = 3;
    double p = 1.0;

    std::vector<double> r{0.05};
    std::vector<std::size_t> k{5};
    std::vector<std::size_t> n{1000};
    std::size_t n_eval = 10000;
    std::size_t n_double_prime = 10000;
    std::size_t n_g = 20;
    double alpha = 0.05;
    std::optional<std::uint64_t> seed;

    SolveMethod method = SolveMethod::both;
    double time_budget = std::numeric_limits<double>::infinity();
    double gap_tolerance = 0.0;
    bool exact_bound = false;  ///< MRP bounds from the exact solver
    Study study = Study::all;

    double calibrate_fraction = 0.0;  ///< 0 skips calibration in decompose
    std::size_t calibrate_reps = 1000;

    std::vector<std::size_t> wheel_v{5, 8, 12};
    std::vector<double> wheel_r{0.0, 0.01, 0.05, 0.1, 2.0 / 7.0, 0.3};
    std::size_t wheel_n = 200000;

    std::string out_dir = ".";
    unsigned threads = 1;

    SpreadConfig spread() const { return SpreadConfig{kind, t0, p, {}}; }

    std::uint64_t require_seed() const {
        if (!seed) throw ConfigError("seed is required");
        return *seed;
    }

    /// Range checks that do not need the graph.
    void validate() const {
        if (graph.empty()) throw ConfigError("graph source is required");
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must be in (0, 1]");
        if (r.empty() || k.empty() || n.empty()) throw ConfigError("r, k and n lists must be non-empty");
        for (double x : r)
            if (!(x >= 0.0 && x < 1.0)) throw ConfigError("every r must be in [0, 1)");
        for (auto x : k)
            if (x == 0) throw ConfigError("every k must be positive");
        for (auto x : n)
            if (x == 0) throw ConfigError("every n must be positive");
        if (n_eval == 0 || n_double_prime == 0) throw ConfigError("n_eval and n_double_prime must be positive");
        if (n_g < 2) throw ConfigError("n_g must be at least 2");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
        if (!(time_budget > 0.0)) throw ConfigError("time_budget must be positive");
        if (!(gap_tolerance >= 0.0 && gap_tolerance < 1.0)) throw ConfigError("gap_tolerance must be in [0, 1)");
        if (!(calibrate_fraction >= 0.0 && calibrate_fraction <= 1.0))
            throw ConfigError("calibrate_fraction must be in [0, 1]");
        for (auto v : wheel_v)
            if (v < 5) throw ConfigError("every wheel_v must be at least 5");
        for (double x : wheel_r)
            if (!(x >= 0.0 && x < 1.0)) throw ConfigError("every wheel_r must be in [0, 1)");
        if (wheel_n == 0) throw ConfigError("wheel_n must be positive");
    }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw ConfigError("bad value '" + std::string(text) + "' for " + std::string(key));
    return value;
}

/// Accepts plain decimals and simple fractions such as 2/7.
inline double parse_real(std::string_view key, std::string_view text) {
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        const double num = parse_number<double>(key, trim(text.substr(0, slash)));
        const double den = parse_number<double>(key, trim(text.substr(slash + 1)));
        if (den == 0.0) throw ConfigError("zero denominator for " + std::string(key));
        return num / den;
    }
    if (text == "inf") return std::numeric_limits<double>::infinity();
    return parse_number<double>(key, text);
}

inline bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("bad boolean '" + std::string(text) + "' for " + std::string(key));
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
    std::vector<T> out;
    for (auto item : split(text, ',')) {
        if constexpr (std::is_floating_point_v<T>)
            out.push_back(parse_real(key, item));
        else
            out.push_back(parse_number<T>(key, item));
    }
    return out;
}

/// Shortest text that parses back to the same double.
inline std::string format_real(double x) {
    if (x == std::numeric_limits<double>::infinity()) return "inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

template <class T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += format_real(xs[i]);
        else
            out += std::to_string(xs[i]);
    }
    return out;
}

}  // namespace detail

using detail::format_real;

/// Applies one `key = value` assignment. Used for both files and CLI overrides.
inline void set_config_value(ExperimentConfig& c, std::string_view key, std::string_view value) {
    using namespace detail;
    value = trim(value);
    if (key == "graph") c.graph = std::string(value);
    else if (key == "directed_input") c.directed_input = parse_bool(key, value);
    else if (key == "core") c.core = parse_number<std::size_t>(key, value);
    else if (key == "lcc") c.lcc = parse_bool(key, value);
    else if (key == "kind") {
        try {
            c.kind = parse_spread_kind(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "t0") c.t0 = parse_number<std::size_t>(key, value);
    else if (key == "p") c.p = parse_real(key, value);
    else if (key == "r") c.r = parse_list<double>(key, value);
    else if (key == "k") c.k = parse_list<std::size_t>(key, value);
    else if (key == "n") c.n = parse_list<std::size_t>(key, value);
    else if (key == "n_eval") c.n_eval = parse_number<std::size_t>(key, value);
    else if (key == "n_double_prime") c.n_double_prime = parse_number<std::size_t>(key, value);
    else if (key == "n_g") c.n_g = parse_number<std::size_t>(key, value);
    else if (key == "alpha") c.alpha = parse_real(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "method") c.method = parse_solve_method(value);
    else if (key == "time_budget") c.time_budget = parse_real(key, value);
    else if (key == "gap_tolerance") c.gap_tolerance = parse_real(key, value);
    else if (key == "exact_bound") c.exact_bound = parse_bool(key, value);
    else if (key == "study") c.study = parse_study(value);
    else if (key == "calibrate_fraction") c.calibrate_fraction = parse_real(key, value);
    else if (key == "calibrate_reps") c.calibrate_reps = parse_number<std::size_t>(key, value);
    else if (key == "wheel_v") c.wheel_v = parse_list<std::size_t>(key, value);
    else if (key == "wheel_r") c.wheel_r = parse_list<double>(key, value);
    else if (key == "wheel_n") c.wheel_n = parse_number<std::size_t>(key, value);
    else if (key == "out_dir") c.out_dir = std::string(value);
    else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
    else throw ConfigError("unknown key '" + std::string(key) + "'");
}

/// Reads assignments on top of `base` (defaults unless given).
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = line;
        if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = detail::trim(s.substr(0, eq));
        try {
            set_config_value(base, key, s.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

inline ExperimentConfig parse_config(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_config(in);
}

inline void write_config(std::ostream& out, const ExperimentConfig& c) {
    using detail::format_real;
    using detail::join;
    out << "graph = " << c.graph << '\n'
        << "directed_input = " << (c.directed_input ? "true" : "false") << '\n'
        << "core = " << c.core << '\n'
        << "lcc = " << (c.lcc ? "true" : "false") << '\n'
        << "kind = " << to_string(c.kind) << '\n'
        << "t0 = " << c.t0 << '\n'
        << "p = " << format_real(c.p) << '\n'
        << "r = " << join(c.r) << '\n'
        << "k = " << join(c.k) << '\n'
        << "n = " << join(c.n) << '\n'
        << "n_eval = " << c.n_eval << '\n'
        << "n_double_prime = " << c.n_double_prime << '\n'
        << "n_g = " << c.n_g << '\n'
        << "alpha = " << format_real(c.alpha) << '\n';
    if (c.seed) out << "seed = " << *c.seed << '\n';
    out << "method = " << to_string(c.method) << '\n'
        << "time_budget = " << format_real(c.time_budget) << '\n'
        << "gap_tolerance = " << format_real(c.gap_tolerance) << '\n'
        << "exact_bound = " << (c.exact_bound ? "true" : "false") << '\n'
        << "study = " << to_string(c.study) << '\n'
        << "calibrate_fraction = " << format_real(c.calibrate_fraction) << '\n'
        << "calibrate_reps = " << c.calibrate_reps << '\n'
        << "wheel_v = " << join(c.wheel_v) << '\n'
        << "wheel_r = " << join(c.wheel_r) << '\n'
        << "wheel_n = " << c.wheel_n << '\n'
        << "out_dir = " << c.out_dir << '\n'
        << "threads = " << c.threads << '\n';
}

inline std::string to_text(const ExperimentConfig& c) {
    std::ostringstream out;
    write_config(out, c);
    return out.str();
}

}  // namespace honeypot
