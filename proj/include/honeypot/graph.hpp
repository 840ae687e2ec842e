#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace honeypot {

using NodeId = std::uint32_t;
using NodeLabel = std::int64_t;

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Sorted, duplicate-free set of node ids.
class NodeSet {
public:
    NodeSet() = default;
    NodeSet(std::initializer_list<NodeId> ids) : NodeSet(std::vector<NodeId>(ids)) {}
    explicit NodeSet(std::vector<NodeId> ids) : members_(std::move(ids)) {
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    }

    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    bool contains(NodeId id) const { return std::binary_search(members_.begin(), members_.end(), id); }

    auto begin() const noexcept { return members_.begin(); }
    auto end() const noexcept { return members_.end(); }
    NodeId operator[](std::size_t i) const { return members_[i]; }
    const std::vector<NodeId>& members() const noexcept { return members_; }

    NodeSet with(NodeId id) const {
        auto copy = members_;
        copy.push_back(id);
        return NodeSet(std::move(copy));
    }

    friend bool operator==(const NodeSet&, const NodeSet&) = default;

private:
    std::vector<NodeId> members_;
};

inline std::ostream& operator<<(std::ostream& os, const NodeSet& s) {
    os << '{';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? " " : "") << s[i];
    return os << '}';
}

/// Immutable simple undirected graph on dense ids 0..n-1. Each dense id keeps
/// the external label it was loaded with so reductions can be reported in the
/// original numbering.
class Graph {
public:
    Graph() = default;

    /// Builds a simple graph; self-loops and repeated pairs are dropped.
    /// Labels default to the dense ids.
    static Graph from_edges(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges,
                            std::vector<NodeLabel> labels = {}) {
        Graph g;
        g.adj_.assign(n, {});
        for (auto [u, v] : edges) {
            if (u >= n || v >= n) throw std::out_of_range("edge endpoint out of range");
            if (u == v) continue;
            g.adj_[u].push_back(v);
            g.adj_[v].push_back(u);
        }
        std::size_t twice = 0;
        for (auto& nbrs : g.adj_) {
            std::sort(nbrs.begin(), nbrs.end());
            nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
            twice += nbrs.size();
        }
        g.edge_count_ = twice / 2;
        if (labels.empty()) {
            labels.resize(n);
            std::iota(labels.begin(), labels.end(), NodeLabel{0});
        } else if (labels.size() != n) {
            throw std::invalid_argument("label count does not match node count");
        }
        g.labels_ = std::move(labels);
        return g;
    }

    std::size_t node_count() const noexcept { return adj_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }
    bool empty() const noexcept { return adj_.empty(); }

    const std::vector<NodeId>& neighbors(NodeId v) const { return adj_[v]; }
    std::size_t degree(NodeId v) const { return adj_[v].size(); }
    bool adjacent(NodeId u, NodeId v) const {
        const auto& n = adj_[u];
        return std::binary_search(n.begin(), n.end(), v);
    }

    NodeLabel label(NodeId v) const { return labels_[v]; }
    const std::vector<NodeLabel>& labels() const noexcept { return labels_; }

    std::size_t max_degree() const {
        std::size_t m = 0;
        for (const auto& n : adj_) m = std::max(m, n.size());
        return m;
    }

    double average_degree() const {
        return adj_.empty() ? 0.0 : 2.0 * static_cast<double>(edge_count_) / static_cast<double>(adj_.size());
    }

    /// Edges as (u, v) with u < v, in ascending order.
    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        out.reserve(edge_count_);
        for (NodeId u = 0; u < adj_.size(); ++u)
            for (NodeId v : adj_[u])
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    /// Subgraph induced by the nodes with keep[v] set, re-densified in id
    /// order. Labels carry over.
    Graph induced(const std::vector<bool>& keep) const {
        std::vector<NodeId> remap(adj_.size(), std::numeric_limits<NodeId>::max());
        std::vector<NodeLabel> labels;
        NodeId next = 0;
        for (NodeId v = 0; v < adj_.size(); ++v) {
            if (keep[v]) {
                remap[v] = next++;
                labels.push_back(labels_[v]);
            }
        }
        std::vector<std::pair<NodeId, NodeId>> kept;
        for (auto [u, v] : edges())
            if (keep[u] && keep[v]) kept.emplace_back(remap[u], remap[v]);
        return from_edges(next, kept, std::move(labels));
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.adj_ == b.adj_ && a.labels_ == b.labels_;
    }

private:
    std::vector<std::vector<NodeId>> adj_;
    std::vector<NodeLabel> labels_;
    std::size_t edge_count_ = 0;
};

struct LoadStats {
    std::size_t edge_lines = 0;
    std::size_t self_loops = 0;
    std::size_t duplicates = 0;
};

/// Reads a whitespace-separated edge list ('#' starts a comment line).
/// External ids are relabeled densely in ascending order. With
/// directed_input, a reverse arc u->v after v->u is expected and not counted
/// as a duplicate in the stats; the resulting graph is the same either way.
inline Graph load_edge_list(std::istream& in, bool directed_input = false, LoadStats* stats = nullptr) {
    std::vector<std::pair<NodeLabel, NodeLabel>> raw;
    std::string line;
    std::size_t lineno = 0;
    LoadStats st;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#' || line[first] == '%') continue;
        std::istringstream ls(line);
        NodeLabel a = 0, b = 0;
        std::string extra;
        if (!(ls >> a >> b)) throw ParseError(lineno, "expected two integer node ids: '" + line + "'");
        if (ls >> extra) throw ParseError(lineno, "unexpected token '" + extra + "'");
        ++st.edge_lines;
        if (a == b) {
            ++st.self_loops;
            continue;
        }
        raw.emplace_back(a, b);
    }
    if (st.edge_lines == 0) throw std::runtime_error("edge list is empty");

    std::vector<NodeLabel> labels;
    labels.reserve(raw.size() * 2);
    for (auto [a, b] : raw) {
        labels.push_back(a);
        labels.push_back(b);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    auto dense = [&](NodeLabel x) {
        return static_cast<NodeId>(std::lower_bound(labels.begin(), labels.end(), x) - labels.begin());
    };

    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(raw.size());
    for (auto [a, b] : raw) edges.emplace_back(dense(a), dense(b));

    if (stats) {
        std::vector<std::tuple<NodeId, NodeId, bool>> keyed;
        keyed.reserve(edges.size());
        for (auto [u, v] : edges) keyed.emplace_back(std::min(u, v), std::max(u, v), u > v);
        std::sort(keyed.begin(), keyed.end());
        for (std::size_t i = 1; i < keyed.size(); ++i) {
            auto [u0, v0, r0] = keyed[i - 1];
            auto [u1, v1, r1] = keyed[i];
            if (u0 != u1 || v0 != v1) continue;
            if (directed_input && r0 != r1) continue;
            ++st.duplicates;
        }
        *stats = st;
    }
    const std::size_t n = labels.size();
    return Graph::from_edges(n, edges, std::move(labels));
}

/// Writes one "label label" line per edge; reloading yields an equal graph
/// whenever the graph has no isolated nodes.
inline void write_edge_list(std::ostream& out, const Graph& g) {
    for (auto [u, v] : g.edges()) out << g.label(u) << ' ' << g.label(v) << '\n';
}

/// Maximal induced subgraph with minimum degree >= c, by iterative peeling.
inline Graph c_core(const Graph& g, std::size_t c) {
    const std::size_t n = g.node_count();
    std::vector<std::size_t> deg(n);
    std::vector<bool> alive(n, true);
    std::vector<NodeId> stack;
    for (NodeId v = 0; v < n; ++v) {
        deg[v] = g.degree(v);
        if (deg[v] < c) {
            alive[v] = false;
            stack.push_back(v);
        }
    }
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId u : g.neighbors(v)) {
            if (!alive[u]) continue;
            if (--deg[u] < c) {
                alive[u] = false;
                stack.push_back(u);
            }
        }
    }
    return g.induced(alive);
}

/// Component index per node (components numbered in order of their smallest
/// dense id) and the component count.
inline std::pair<std::vector<std::size_t>, std::size_t> connected_components(const Graph& g) {
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> comp(g.node_count(), unset);
    std::size_t count = 0;
    std::vector<NodeId> queue;
    for (NodeId s = 0; s < g.node_count(); ++s) {
        if (comp[s] != unset) continue;
        queue.assign(1, s);
        comp[s] = count;
        for (std::size_t head = 0; head < queue.size(); ++head)
            for (NodeId u : g.neighbors(queue[head]))
                if (comp[u] == unset) {
                    comp[u] = count;
                    queue.push_back(u);
                }
        ++count;
    }
    return {std::move(comp), count};
}

inline bool is_connected(const Graph& g) {
    return !g.empty() && connected_components(g).second == 1;
}

/// Largest component; among equal sizes, the one holding the smallest label.
inline Graph largest_connected_component(const Graph& g) {
    if (g.empty()) return g;
    auto [comp, count] = connected_components(g);
    std::vector<std::size_t> size(count, 0);
    std::vector<NodeLabel> min_label(count, std::numeric_limits<NodeLabel>::max());
    for (NodeId v = 0; v < g.node_count(); ++v) {
        ++size[comp[v]];
        min_label[comp[v]] = std::min(min_label[comp[v]], g.label(v));
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < count; ++c)
        if (size[c] > size[best] || (size[c] == size[best] && min_label[c] < min_label[best])) best = c;
    std::vector<bool> keep(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) keep[v] = comp[v] == best;
    return g.induced(keep);
}

/// Hub 0 joined to a rim cycle 1..v-1.
inline Graph wheel_graph(std::size_t v) {
    if (v < 5) throw std::invalid_argument("wheel graph needs at least 5 nodes");
    std::vector<std::pair<NodeId, NodeId>> edges;
    const auto rim = static_cast<NodeId>(v - 1);
    for (NodeId i = 1; i <= rim; ++i) {
        edges.emplace_back(0, i);
        edges.emplace_back(i, i == rim ? 1 : i + 1);
    }
    return Graph::from_edges(v, edges);
}

/// Watts-Strogatz ring lattice (each node tied to its `ring_degree` nearest
/// neighbours) with each lattice edge rewired with probability `beta`.
inline Graph small_world_graph(std::size_t n, std::size_t ring_degree, double beta, std::uint64_t seed) {
    if (ring_degree % 2 != 0 || ring_degree == 0 || ring_degree >= n)
        throw std::invalid_argument("ring degree must be even and in (0, n)");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("rewiring probability must be in [0, 1]");
    std::mt19937_64 rng(seed);
    std::set<std::pair<NodeId, NodeId>> present;
    auto key = [](NodeId a, NodeId b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < n; ++u)
        for (std::size_t j = 1; j <= ring_degree / 2; ++j) {
            auto v = static_cast<NodeId>((u + j) % n);
            edges.emplace_back(u, v);
            present.insert(key(u, v));
        }
    std::bernoulli_distribution rewire(beta);
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    for (auto& [u, v] : edges) {
        if (!rewire(rng)) continue;
        NodeId w = pick(rng);
        if (w == u || present.count(key(u, w))) continue;
        present.erase(key(u, v));
        v = w;
        present.insert(key(u, v));
    }
    return Graph::from_edges(n, edges);
}

struct GraphSummary {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t max_degree = 0;
    double average_degree = 0.0;
};

inline GraphSummary summarize(const Graph& g) {
    return {g.node_count(), g.edge_count(), g.max_degree(), g.average_degree()};
}

/// "nodes, edges, max degree, avg degree" with the average to 3 significant
/// digits.
inline std::string format_summary(const GraphSummary& s) {
    std::ostringstream os;
    os << s.nodes << ", " << s.edges << ", " << s.max_degree << ", " << std::showpoint << std::setprecision(3)
       << s.average_degree;
    return os.str();
}

}  // namespace honeypot
