#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "honeypot/graph.hpp"
#include "oracles.hpp"

using namespace honeypot;

namespace {

Graph parse(const std::string& text, bool directed = false, LoadStats* stats = nullptr) {
    std::istringstream in(text);
    return load_edge_list(in, directed, stats);
}

bool is_simple_undirected(const Graph& g) {
    for (NodeId u = 0; u < g.node_count(); ++u) {
        const auto nb = g.neighbors(u);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            if (nb[i] == u) return false;
            if (i && nb[i - 1] >= nb[i]) return false;
            if (!g.adjacent(nb[i], u)) return false;
        }
    }
    return true;
}

std::size_t min_degree(const Graph& g) {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (NodeId v = 0; v < g.node_count(); ++v) m = std::min(m, g.degree(v));
    return m;
}

/// Largest vertex subset whose induced subgraph has min degree >= c, found by
/// exhaustive search (n <= 12).
std::vector<bool> brute_core(const Graph& g, std::size_t c) {
    const std::size_t n = g.node_count();
    std::uint32_t best = 0;
    int best_size = -1;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        bool ok = true;
        for (NodeId v = 0; v < n && ok; ++v) {
            if (!(mask >> v & 1u)) continue;
            std::size_t d = 0;
            for (NodeId u : g.neighbors(v)) d += mask >> u & 1u;
            ok = d >= c;
        }
        if (ok && std::popcount(mask) > best_size) {
            best = mask;
            best_size = std::popcount(mask);
        }
    }
    std::vector<bool> keep(n);
    for (NodeId v = 0; v < n; ++v) keep[v] = best >> v & 1u;
    return keep;
}

std::vector<NodeLabel> sorted_labels(const Graph& g) {
    auto l = g.labels();
    std::sort(l.begin(), l.end());
    return l;
}

}  // namespace

TEST_CASE("triangle edge list") {
    const auto g = parse("0 1\n1 2\n2 0\n");
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 3);
    CHECK(is_simple_undirected(g));
}

TEST_CASE("self-loops and reciprocal duplicates are dropped") {
    LoadStats stats;
    const auto g = parse("0 0\n0 1\n1 0\n", false, &stats);
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 1);
    CHECK(stats.self_loops == 1);
    CHECK(stats.duplicates == 1);
}

TEST_CASE("directed input counts only repeated arcs as duplicates") {
    LoadStats stats;
    const auto g = parse("0 1\n1 0\n0 1\n", true, &stats);
    CHECK(g.edge_count() == 1);
    CHECK(stats.duplicates == 1);
}

TEST_CASE("comments, blank lines and sparse labels") {
    const auto g = parse("# header\n% other\n\n100 7\n7 -3\n");
    CHECK(g.node_count() == 3);
    CHECK(g.labels() == std::vector<NodeLabel>{-3, 7, 100});
    CHECK(g.adjacent(0, 1));
    CHECK(g.adjacent(1, 2));
    CHECK_FALSE(g.adjacent(0, 2));
}

TEST_CASE("malformed lines report their line number") {
    try {
        parse("0 1\n# c\n1 x\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("0 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse("5\n"), ParseError);
}

TEST_CASE("empty input is an error") {
    CHECK_THROWS(parse(""));
    CHECK_THROWS(parse("# only comments\n\n"));
}

TEST_CASE("write then reload is identical") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto raw = oracle::random_connected_graph(rng, 2 + trial % 17, trial);
        // Give the graph sparse labels by round-tripping through text once.
        std::ostringstream text;
        for (auto [u, v] : raw.edges()) text << u * 13 + 5 << ' ' << v * 13 + 5 << '\n';
        const auto g = parse(text.str());
        std::ostringstream out;
        write_edge_list(out, g);
        const auto again = parse(out.str());
        CHECK(again == g);
    }
}

TEST_CASE("c-core of C4 with c=2 is C4") {
    const auto c4 = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    CHECK(c_core(c4, 2) == c4);
}

TEST_CASE("c-core of a star with c=2 is empty") {
    const auto star = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
    const auto core = c_core(star, 2);
    CHECK(core.node_count() == 0);
    CHECK(core.edge_count() == 0);
}

TEST_CASE("c-core matches exhaustive search on small graphs") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + trial % 12;
        const auto g = oracle::random_graph(rng, n, 0.15 + 0.6 * (trial % 7) / 7.0);
        for (std::size_t c = 0; c <= 5; ++c) {
            const auto core = c_core(g, c);
            const auto keep = brute_core(g, c);
            CHECK(core == g.induced(keep));
            if (core.node_count() > 0) CHECK(min_degree(core) >= c);
        }
    }
}

TEST_CASE("c-cores are nested") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = oracle::random_graph(rng, 30, 0.2);
        std::vector<NodeLabel> prev = sorted_labels(g);
        for (std::size_t c = 1; c <= 8; ++c) {
            const auto cur = sorted_labels(c_core(g, c));
            CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
            prev = cur;
        }
    }
}

TEST_CASE("largest component of two triangles plus an edge is a triangle") {
    const auto g = Graph::from_edges(8, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {6, 7}});
    const auto lcc = largest_connected_component(g);
    CHECK(lcc.node_count() == 3);
    CHECK(lcc.edge_count() == 3);
    CHECK(lcc.labels() == std::vector<NodeLabel>{0, 1, 2});
}

TEST_CASE("largest component ties go to the smallest original id") {
    const auto g = parse("10 11\n11 12\n3 4\n4 5\n");
    const auto lcc = largest_connected_component(g);
    CHECK(lcc.labels() == std::vector<NodeLabel>{3, 4, 5});
}

TEST_CASE("largest component of a connected graph is itself") {
    const auto w = wheel_graph(7);
    CHECK(largest_connected_component(w) == w);
    CHECK(largest_connected_component(Graph{}).node_count() == 0);
}

TEST_CASE("wheel graphs") {
    CHECK_THROWS_AS(wheel_graph(4), std::invalid_argument);
    const auto w5 = wheel_graph(5);
    CHECK(w5.node_count() == 5);
    CHECK(w5.edge_count() == 8);
    const auto w9 = wheel_graph(9);
    CHECK(w9.node_count() == 9);
    CHECK(w9.edge_count() == 16);
    CHECK(w9.degree(0) == 8);
    for (NodeId v = 1; v < 9; ++v) CHECK(w9.degree(v) == 3);
    CHECK(is_simple_undirected(w9));
}

TEST_CASE("small-world graphs are simple and reproducible") {
    const auto a = small_world_graph(200, 6, 0.1, 3);
    const auto b = small_world_graph(200, 6, 0.1, 3);
    CHECK(a == b);
    CHECK(a.node_count() == 200);
    CHECK(a.edge_count() == 600);
    CHECK(is_simple_undirected(a));
}

TEST_CASE("summary line") {
    const auto s = summarize(wheel_graph(5));
    CHECK(s.nodes == 5);
    CHECK(s.edges == 8);
    CHECK(s.max_degree == 4);
    CHECK(s.average_degree == Catch::Approx(3.2));
    CHECK(format_summary(s) == "5, 8, 4, 3.20");
}

TEST_CASE("node sets") {
    const NodeSet s({4, 1, 4, 2});
    CHECK(s.members() == std::vector<NodeId>{1, 2, 4});
    CHECK(s.contains(2));
    CHECK_FALSE(s.contains(3));
    CHECK(s.with(3).size() == 4);
}
