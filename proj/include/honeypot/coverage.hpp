#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "honeypot/graph.hpp"
#include "honeypot/spread.hpp"

namespace honeypot {

/// Sample-average detector placement instance: row l holds the nodes at which
/// a detector would have detected sample path l. A placement covers row l if
/// it contains any of them; the objective is the covered fraction of rows.
struct CoverageInstance {
    std::size_t universe = 0;
    std::size_t k = 0;
    Ragged<NodeId> rows;  ///< each row sorted and duplicate-free

    std::size_t n() const noexcept { return rows.rows(); }

    static CoverageInstance from_rows(std::size_t universe, std::size_t k,
                                      const std::vector<std::vector<NodeId>>& rows) {
        check_budget(universe, k);
        CoverageInstance inst{universe, k, {}};
        for (auto row : rows) {
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
            if (!row.empty() && row.back() >= universe) throw std::invalid_argument("row entry outside universe");
            inst.rows.push_row(row);
        }
        return inst;
    }

    static void check_budget(std::size_t universe, std::size_t k) {
        if (k < 1 || k > universe) throw std::invalid_argument("detector budget must be in [1, |V|]");
    }
};

/// Rows are the distinct non-sentinel entries of each SDM row.
inline CoverageInstance build_instance(const SuccessfulDetectionMatrix& sdm, std::size_t universe, std::size_t k) {
    CoverageInstance::check_budget(universe, k);
    CoverageInstance inst{universe, k, {}};
    inst.rows.reserve(sdm.rows.rows(), sdm.rows.total());
    std::vector<NodeId> buf;
    for (std::size_t l = 0; l < sdm.rows.rows(); ++l) {
        buf.clear();
        for (NodeId v : sdm.rows.row(l)) {
            if (v == kNoDetection) continue;
            if (v >= universe) throw std::invalid_argument("SDM entry outside universe");
            buf.push_back(v);
        }
        std::sort(buf.begin(), buf.end());
        buf.erase(std::unique(buf.begin(), buf.end()), buf.end());
        inst.rows.push_row(buf);
    }
    return inst;
}

/// Number of rows that share a node with `s`.
inline std::size_t covered_count(const CoverageInstance& inst, std::span<const NodeId> s) {
    std::vector<bool> in(inst.universe, false);
    for (NodeId v : s) {
        if (v >= inst.universe) throw std::invalid_argument("placement node outside universe");
        in[v] = true;
    }
    std::size_t covered = 0;
    for (std::size_t l = 0; l < inst.n(); ++l)
        for (NodeId v : inst.rows.row(l))
            if (in[v]) {
                ++covered;
                break;
            }
    return covered;
}

inline double evaluate(const CoverageInstance& inst, std::span<const NodeId> s) {
    return inst.n() ? static_cast<double>(covered_count(inst, s)) / static_cast<double>(inst.n()) : 0.0;
}

inline double evaluate(const CoverageInstance& inst, const NodeSet& s) { return evaluate(inst, s.members()); }

enum class PlacementMethod { greedy, exact, external };

inline std::string_view to_string(PlacementMethod m) {
    switch (m) {
        case PlacementMethod::greedy: return "greedy";
        case PlacementMethod::exact: return "exact";
        case PlacementMethod::external: return "external";
    }
    return "?";
}

struct OptimalityCertificate {
    double upper_bound = 0.0;   ///< objective units
    double relative_gap = 0.0;  ///< (upper_bound - objective) / upper_bound
};

struct PlacementSolution {
    NodeSet nodes;
    std::size_t covered = 0;
    std::size_t rows = 0;
    double objective = 0.0;  ///< covered / rows
    PlacementMethod method = PlacementMethod::greedy;
    double best_bound = 1.0;  ///< valid upper bound on the instance optimum
    std::optional<OptimalityCertificate> proof;
    std::size_t search_nodes = 0;
};

namespace detail {

/// node -> rows containing it.
inline std::vector<std::vector<std::uint32_t>> invert_rows(const CoverageInstance& inst) {
    std::vector<std::vector<std::uint32_t>> index(inst.universe);
    for (std::size_t l = 0; l < inst.n(); ++l)
        for (NodeId v : inst.rows.row(l)) index[v].push_back(static_cast<std::uint32_t>(l));
    return index;
}

inline std::size_t nonempty_rows(const CoverageInstance& inst) {
    std::size_t c = 0;
    for (std::size_t l = 0; l < inst.n(); ++l) c += !inst.rows.row(l).empty();
    return c;
}

inline double fraction(std::size_t num, std::size_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

inline PlacementSolution finish(const CoverageInstance& inst, std::vector<NodeId> chosen, PlacementMethod method) {
    // Fill the budget with the smallest unused ids.
    std::vector<bool> used(inst.universe, false);
    for (NodeId v : chosen) used[v] = true;
    for (NodeId v = 0; chosen.size() < inst.k && v < inst.universe; ++v)
        if (!used[v]) chosen.push_back(v);
    PlacementSolution sol;
    sol.nodes = NodeSet(std::move(chosen));
    sol.rows = inst.n();
    sol.covered = covered_count(inst, sol.nodes.members());
    sol.objective = fraction(sol.covered, sol.rows);
    sol.method = method;
    return sol;
}

}  // namespace detail

/// Repeatedly takes the node present in the most still-uncovered rows
/// (smallest id on ties) until k nodes are chosen. Once every row is covered
/// all gains are zero, so the remaining picks are the smallest unused ids.
inline PlacementSolution greedy_placement(const CoverageInstance& inst) {
    const auto index = detail::invert_rows(inst);
    std::vector<std::size_t> gain(inst.universe);
    for (NodeId v = 0; v < inst.universe; ++v) gain[v] = index[v].size();
    std::vector<bool> chosen(inst.universe, false), covered(inst.n(), false);
    std::vector<NodeId> picks;
    picks.reserve(inst.k);
    while (picks.size() < inst.k) {
        NodeId best = 0;
        bool found = false;
        for (NodeId v = 0; v < inst.universe; ++v) {
            if (chosen[v]) continue;
            if (!found || gain[v] > gain[best]) {
                best = v;
                found = true;
            }
        }
        chosen[best] = true;
        picks.push_back(best);
        for (auto l : index[best]) {
            if (covered[l]) continue;
            covered[l] = true;
            for (NodeId u : inst.rows.row(l)) --gain[u];
        }
    }
    return detail::finish(inst, std::move(picks), PlacementMethod::greedy);
}

/// min(fraction of non-empty rows, sum of the k largest singleton counts / n).
/// Both terms bound the optimum: the first trivially, the second because
/// coverage is submodular so no node adds more than it covers alone.
inline double upper_bound(const CoverageInstance& inst, std::size_t k) {
    if (inst.n() == 0) return 0.0;
    std::vector<std::size_t> counts(inst.universe, 0);
    for (NodeId v : inst.rows.values()) ++counts[v];
    k = std::min(k, counts.size());
    std::partial_sort(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(k), counts.end(),
                      std::greater<>());
    std::size_t top = 0;
    for (std::size_t i = 0; i < k; ++i) top += counts[i];
    return detail::fraction(std::min(top, detail::nonempty_rows(inst)), inst.n());
}

/// As above, tightened by a solver certificate when one exists.
inline double upper_bound(const CoverageInstance& inst, std::size_t k, const PlacementSolution& certified) {
    double b = upper_bound(inst, k);
    if (certified.method == PlacementMethod::exact && certified.nodes.size() == k)
        b = std::min(b, certified.best_bound);
    return b;
}

struct ExactOptions {
    double time_budget_seconds = std::numeric_limits<double>::infinity();
    double gap_tolerance = 0.0;  ///< relative; 0 proves optimality
};

/// Depth-first branch and bound over include/exclude decisions. Nodes are
/// branched in decreasing singleton-coverage order, the incumbent starts from
/// the greedy solution, and a subtree is cut when
///   covered(partial) + (sum of the `need` largest marginal gains left)
/// cannot beat the incumbent by more than the gap tolerance.
class BranchAndBound {
public:
    BranchAndBound(const CoverageInstance& inst, ExactOptions opts)
        : inst_(inst), opts_(opts), index_(detail::invert_rows(inst)), gain_(inst.universe, 0),
          cover_depth_(inst.n(), 0), nonempty_(detail::nonempty_rows(inst)) {
        for (NodeId v = 0; v < inst.universe; ++v) {
            gain_[v] = index_[v].size();
            if (gain_[v] > 0) order_.push_back(v);
        }
        std::stable_sort(order_.begin(), order_.end(),
                         [&](NodeId a, NodeId b) { return gain_[a] > gain_[b]; });
        scratch_.reserve(order_.size());
    }

    PlacementSolution solve() {
        start_ = std::chrono::steady_clock::now();
        auto greedy = greedy_placement(inst_);
        incumbent_ = greedy.covered;
        best_nodes_ = greedy.nodes.members();
        root_bound_ = bound(0, inst_.k, 0);
        tolerance_pruned_max_ = 0;
        search(0, inst_.k, 0);

        auto sol = detail::finish(inst_, best_nodes_, PlacementMethod::exact);
        sol.search_nodes = visited_;
        std::size_t bound_count = aborted_ ? root_bound_ : std::max(incumbent_, tolerance_pruned_max_);
        bound_count = std::max(bound_count, sol.covered);
        sol.best_bound = detail::fraction(bound_count, inst_.n());
        if (!aborted_) {
            const double gap = bound_count ? static_cast<double>(bound_count - sol.covered) / bound_count : 0.0;
            sol.proof = OptimalityCertificate{sol.best_bound, gap};
        }
        return sol;
    }

private:
    std::size_t bound(std::size_t pos, std::size_t need, std::size_t covered) {
        scratch_.clear();
        for (std::size_t i = pos; i < order_.size(); ++i)
            if (gain_[order_[i]] > 0) scratch_.push_back(gain_[order_[i]]);
        const std::size_t take = std::min(need, scratch_.size());
        std::partial_sort(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(take), scratch_.end(),
                          std::greater<>());
        std::size_t b = covered;
        for (std::size_t i = 0; i < take; ++i) b += scratch_[i];
        return std::min(b, covered + uncovered_nonempty(covered));
    }

    std::size_t uncovered_nonempty(std::size_t covered) const { return nonempty_ - std::min(nonempty_, covered); }

    bool out_of_time() {
        if ((++visited_ & 1023u) != 0) return aborted_;
        if (std::isfinite(opts_.time_budget_seconds)) {
            std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
            if (elapsed.count() > opts_.time_budget_seconds) aborted_ = true;
        }
        return aborted_;
    }

    bool prunable(std::size_t b) const {
        if (b <= incumbent_) return true;
        return static_cast<double>(b - incumbent_) <= opts_.gap_tolerance * static_cast<double>(b);
    }

    void search(std::size_t pos, std::size_t need, std::size_t covered) {
        if (aborted_ || out_of_time()) return;
        if (covered > incumbent_) {
            incumbent_ = covered;
            best_nodes_ = path_;
        }
        if (need == 0 || pos == order_.size()) return;
        const std::size_t b = bound(pos, need, covered);
        if (prunable(b)) {
            if (b > incumbent_) tolerance_pruned_max_ = std::max(tolerance_pruned_max_, b);
            return;
        }

        const NodeId v = order_[pos];
        // Include v.
        const std::size_t depth = path_.size() + 1;
        std::size_t newly = 0;
        for (auto l : index_[v]) {
            if (cover_depth_[l]) continue;
            cover_depth_[l] = depth;
            ++newly;
            for (NodeId u : inst_.rows.row(l)) --gain_[u];
        }
        path_.push_back(v);
        search(pos + 1, need - 1, covered + newly);
        path_.pop_back();
        for (auto l : index_[v]) {
            if (cover_depth_[l] != depth) continue;
            cover_depth_[l] = 0;
            for (NodeId u : inst_.rows.row(l)) ++gain_[u];
        }
        // Exclude v.
        search(pos + 1, need, covered);
    }

    const CoverageInstance& inst_;
    ExactOptions opts_;
    std::vector<std::vector<std::uint32_t>> index_;
    std::vector<std::size_t> gain_;
    std::vector<std::size_t> cover_depth_;
    std::size_t nonempty_ = 0;
    std::vector<NodeId> order_;
    std::vector<std::size_t> scratch_;
    std::vector<NodeId> path_, best_nodes_;
    std::size_t incumbent_ = 0, root_bound_ = 0, tolerance_pruned_max_ = 0;
    std::size_t visited_ = 0;
    bool aborted_ = false;
    std::chrono::steady_clock::time_point start_;

};

/// Exact SAA optimum (or the best incumbent plus a valid bound when the time
/// budget runs out; `proof` is empty in that case).
inline PlacementSolution exact_placement(const CoverageInstance& inst, ExactOptions opts = {}) {
    if (opts.gap_tolerance < 0.0) throw std::invalid_argument("gap tolerance must be non-negative");
    return BranchAndBound(inst, opts).solve();
}

/// Writes the integer program in CPLEX LP format:
///   max (1/n) sum_l u_l  s.t.  sum_j x_j = k,  u_l - sum_{j in row l} x_j <= 0,
///   0 <= u_l <= 1, x binary.
/// Streams row by row; nothing beyond the instance is held in memory.
inline void export_lp(const CoverageInstance& inst, std::ostream& out) {
    const std::size_t n = inst.n();
    if (n == 0) throw std::invalid_argument("instance has no rows");
    out << "\\ detector placement: " << n << " sample paths, " << inst.universe << " nodes, k = " << inst.k << '\n';
    out << "Maximize\n obj:";
    out << std::setprecision(17);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t l = 0; l < n; ++l) {
        out << (l % 8 == 0 && l ? "\n     " : "") << " + " << w << " u" << l;
    }
    out << "\nSubject To\n card:";
    for (NodeId j = 0; j < inst.universe; ++j) out << (j % 16 == 0 && j ? "\n      " : "") << " + x" << j;
    out << " = " << inst.k << '\n';
    for (std::size_t l = 0; l < n; ++l) {
        out << " cov" << l << ": u" << l;
        for (NodeId j : inst.rows.row(l)) out << " - x" << j;
        out << " <= 0\n";
    }
    out << "Bounds\n";
    for (std::size_t l = 0; l < n; ++l) out << " 0 <= u" << l << " <= 1\n";
    out << "Binaries\n";
    for (NodeId j = 0; j < inst.universe; ++j) out << (j % 16 == 0 ? (j ? "\n" : "") : "") << " x" << j;
    out << "\nEnd\n";
    if (!out) throw std::runtime_error("failed writing LP file");
}

}  // namespace honeypot
