#include <catch_amalgamated.hpp>

#include <random>
#include <set>
#include <sstream>

#include "honeypot/spread.hpp"
#include "oracles.hpp"

using namespace honeypot;

namespace {

Graph path_graph(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId v = 1; v < n; ++v) e.emplace_back(v - 1, v);
    return Graph::from_edges(n, e);
}

Graph star_graph(std::size_t leaves) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId v = 1; v <= leaves; ++v) e.emplace_back(0, v);
    return Graph::from_edges(leaves + 1, e);
}

std::vector<double> point_mass(std::size_t n, NodeId at) {
    std::vector<double> w(n, 0.0);
    w[at] = 1.0;
    return w;
}

VirusSpreadMatrix vsm_from(std::vector<std::vector<NodeId>> rows) {
    VirusSpreadMatrix m;
    for (auto& r : rows) m.rows.push_row(r);
    return m;
}

VirtualDetectionMatrix vdm_from(std::vector<std::vector<std::uint8_t>> rows) {
    VirtualDetectionMatrix m;
    for (auto& r : rows) m.flags.push_row(r);
    return m;
}

bool prefix_connected(const Graph& g, std::span<const NodeId> row) {
    std::set<NodeId> seen;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!seen.insert(row[i]).second) return false;
        if (i == 0) continue;
        bool linked = false;
        for (std::size_t j = 0; j < i && !linked; ++j) linked = g.adjacent(row[i], row[j]);
        if (!linked) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("spread kind names") {
    CHECK(parse_spread_kind("TN11C") == SpreadKind::TN11C);
    CHECK(parse_spread_kind("RA11C") == SpreadKind::RA1PC);
    CHECK(parse_spread_kind("RAE1C") == SpreadKind::RAEPC);
    CHECK(to_string(SpreadKind::RAEPC) == "RAEPC");
    CHECK_THROWS_AS(parse_spread_kind("XYZ"), std::invalid_argument);
}

TEST_CASE("wheel v=5 TN11C t0=1 gives one adjacent pair") {
    const auto g = wheel_graph(5);
    const auto vsm = simulate_paths(g, {SpreadKind::TN11C, 1, 1.0, {}}, 1, 42);
    REQUIRE(vsm.rows.rows() == 1);
    const auto row = vsm.rows.row(0);
    REQUIRE(row.size() == 2);
    CHECK(g.adjacent(row[0], row[1]));
}

TEST_CASE("TN11C rows have length t0+1 and walk along edges") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = oracle::random_connected_graph(rng, 2 + trial * 3, trial * 2);
        const std::size_t t0 = trial % 6;
        const auto vsm = simulate_paths(g, {SpreadKind::TN11C, t0, 1.0, {}}, 300, trial);
        for (std::size_t l = 0; l < vsm.rows.rows(); ++l) {
            const auto row = vsm.rows.row(l);
            REQUIRE(row.size() == t0 + 1);
            for (std::size_t i = 1; i < row.size(); ++i) CHECK(g.adjacent(row[i - 1], row[i]));
            CHECK(std::set<NodeId>(row.begin(), row.end()).size() <= t0 + 1);
        }
    }
}

TEST_CASE("replicating rows are distinct and prefix-connected") {
    std::mt19937_64 rng(8);
    for (auto kind : {SpreadKind::RA1PC, SpreadKind::RAEPC}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto g = oracle::random_connected_graph(rng, 2 + trial * 2, trial);
            const double p = 0.2 + 0.4 * (trial % 3);
            const auto vsm = simulate_paths(g, {kind, static_cast<std::size_t>(trial % 5), p, {}}, 200, trial);
            for (std::size_t l = 0; l < vsm.rows.rows(); ++l) CHECK(prefix_connected(g, vsm.rows.row(l)));
        }
    }
}

TEST_CASE("RAEPC with p=1 on an edge infects both ends") {
    const auto g = path_graph(2);
    const auto vsm = simulate_paths(g, {SpreadKind::RAEPC, 1, 1.0, point_mass(2, 0)}, 5, 1);
    for (std::size_t l = 0; l < 5; ++l) {
        const auto row = vsm.rows.row(l);
        CHECK(std::vector<NodeId>(row.begin(), row.end()) == std::vector<NodeId>{0, 1});
    }
}

TEST_CASE("RAEPC with p=1 from the wheel hub infects everything in one step") {
    const auto g = wheel_graph(12);
    const auto vsm = simulate_paths(g, {SpreadKind::RAEPC, 1, 1.0, point_mass(12, 0)}, 20, 3);
    for (std::size_t l = 0; l < vsm.rows.rows(); ++l) CHECK(vsm.rows.row(l).size() == 12);
}

TEST_CASE("RA1PC may waste an attempt on an infected neighbour") {
    // Star with 3 leaves, hub start, p=1: after step 1 hub + one leaf are
    // infected. At step 2 the leaf can only target the hub and the hub hits
    // the same leaf again with probability 1/3, so P(|row| = 2) = 1/3.
    const auto g = star_graph(3);
    const std::size_t n = 60000;
    const auto vsm = simulate_paths(g, {SpreadKind::RA1PC, 2, 1.0, point_mass(4, 0)}, n, 99);
    std::size_t two = 0;
    for (std::size_t l = 0; l < n; ++l) {
        const auto size = vsm.rows.row(l).size();
        CHECK((size == 2 || size == 3));
        two += size == 2;
    }
    const double freq = static_cast<double>(two) / n;
    const double sigma = std::sqrt((1.0 / 3) * (2.0 / 3) / n);
    CHECK(std::abs(freq - 1.0 / 3) < 5 * sigma);
}

TEST_CASE("initial pmf places the first node") {
    const auto g = wheel_graph(6);
    const auto vsm = simulate_paths(g, {SpreadKind::TN11C, 2, 1.0, point_mass(6, 3)}, 100, 5);
    for (std::size_t l = 0; l < 100; ++l) CHECK(vsm.rows.row(l)[0] == 3);

    std::vector<double> w{0.5, 0.0, 0.0, 0.0, 0.0, 0.5};
    const std::size_t n = 40000;
    const auto half = simulate_paths(g, {SpreadKind::TN11C, 0, 1.0, w}, n, 6);
    std::size_t zeros = 0;
    for (std::size_t l = 0; l < n; ++l) {
        const auto s = half.rows.row(l)[0];
        CHECK((s == 0 || s == 5));
        zeros += s == 0;
    }
    CHECK(std::abs(static_cast<double>(zeros) / n - 0.5) < 5 * std::sqrt(0.25 / n));
}

TEST_CASE("spread preconditions") {
    const auto g = wheel_graph(5);
    CHECK_THROWS_AS(simulate_paths(g, {}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_paths(Graph{}, {}, 1, 1), std::invalid_argument);
    const auto split = Graph::from_edges(4, {{0, 1}, {2, 3}});
    CHECK_THROWS_AS(simulate_paths(split, {}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_paths(g, {SpreadKind::RA1PC, 1, 0.0, {}}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_paths(g, {SpreadKind::RA1PC, 1, 1.5, {}}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_paths(g, {SpreadKind::TN11C, 1, 1.0, {0.5, 0.5}}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_paths(g, {SpreadKind::TN11C, 1, 1.0, {0.5, 0.6, -0.1, 0, 0}}, 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_paths(g, {SpreadKind::TN11C, 1, 1.0, {0.5, 0.5, 0.1, 0, 0}}, 1, 1),
                    std::invalid_argument);
}

TEST_CASE("r=0 gives an all-ones VDM and SDM equal to VSM") {
    const auto g = small_world_graph(60, 4, 0.2, 1);
    for (auto kind : {SpreadKind::TN11C, SpreadKind::RA1PC, SpreadKind::RAEPC}) {
        const auto vsm = simulate_paths(g, {kind, 3, 0.5, {}}, 500, 17);
        const auto vdm = sample_virtual_detections(vsm, 0.0, 18);
        CHECK(std::all_of(vdm.flags.values().begin(), vdm.flags.values().end(), [](auto f) { return f == 1; }));
        CHECK(vdm.flags.same_shape(vsm.rows));
        CHECK(successful_detection_matrix(vsm, vdm).rows == vsm.rows);
    }
}

TEST_CASE("false-negative rate must lie in [0, 1)") {
    const auto vsm = vsm_from({{1, 2}});
    CHECK_THROWS_AS(sample_virtual_detections(vsm, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_virtual_detections(vsm, -0.1, 1), std::invalid_argument);
}

TEST_CASE("VDM flag frequency approaches 1-r") {
    // 10^6 flags at r = 0.25: one million single-entry rows.
    VirusSpreadMatrix vsm;
    const std::vector<NodeId> one{0};
    for (int i = 0; i < 1000000; ++i) vsm.rows.push_row(one);
    const auto vdm = sample_virtual_detections(vsm, 0.25, 123, 4);
    const auto& f = vdm.flags.values();
    const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
    CHECK(std::abs(mean - 0.75) < 0.002);
    CHECK(std::abs(mean - 0.75) < 5 * std::sqrt(0.75 * 0.25 / 1e6));
}

TEST_CASE("TN11C revisits get their own flips") {
    // Path 0-1 with t0 = 9: every row alternates between the two nodes, and
    // flags at repeated visits must not be copies of the first visit.
    const auto g = path_graph(2);
    const auto vsm = simulate_paths(g, {SpreadKind::TN11C, 9, 1.0, {}}, 2000, 3);
    const auto vdm = sample_virtual_detections(vsm, 0.5, 4);
    std::size_t differs = 0;
    for (std::size_t l = 0; l < 2000; ++l) {
        const auto fl = vdm.flags.row(l);
        differs += fl[0] != fl[2];
    }
    CHECK(differs > 800);
    CHECK(differs < 1200);
}

TEST_CASE("SDM of the worked example") {
    const auto vsm = vsm_from({{5, 192, 3, 7, 13}, {4, 3, 5}, {1, 11, 13, 23}});
    const auto vdm = vdm_from({{1, 0, 1, 0, 1}, {0, 1, 1}, {0, 1, 1, 1}});
    const auto sdm = successful_detection_matrix(vsm, vdm);
    constexpr NodeId X = kNoDetection;
    const auto expect = vsm_from({{5, X, 3, X, 13}, {X, 3, 5}, {X, 11, 13, 23}});
    CHECK(sdm.rows == expect.rows);
}

TEST_CASE("all-zero VDM row gives an all-sentinel SDM row") {
    const auto sdm = successful_detection_matrix(vsm_from({{4, 3, 5}}), vdm_from({{0, 0, 0}}));
    for (NodeId v : sdm.rows.row(0)) CHECK(v == kNoDetection);
}

TEST_CASE("SDM rejects mismatched shapes") {
    CHECK_THROWS_AS(successful_detection_matrix(vsm_from({{1, 2}}), vdm_from({{1}})), std::invalid_argument);
    CHECK_THROWS_AS(successful_detection_matrix(vsm_from({{1, 2}}), vdm_from({{1, 1}, {1}})), std::invalid_argument);
}

TEST_CASE("matrices do not depend on the thread count") {
    const auto g = small_world_graph(150, 6, 0.1, 9);
    for (auto kind : {SpreadKind::TN11C, SpreadKind::RA1PC, SpreadKind::RAEPC}) {
        const SpreadConfig cfg{kind, 4, 0.3, {}};
        const auto base = sample_detections(g, cfg, 0.2, 777, 2024, 1);
        for (unsigned threads : {2u, 3u, 8u}) {
            const auto other = sample_detections(g, cfg, 0.2, 777, 2024, threads);
            CHECK(other.vsm.rows == base.vsm.rows);
            CHECK(other.vdm.flags == base.vdm.flags);
            CHECK(other.sdm.rows == base.sdm.rows);
        }
        const auto again = sample_detections(g, cfg, 0.2, 777, 2025, 1);
        CHECK_FALSE(again.vsm.rows == base.vsm.rows);
    }
}

TEST_CASE("paths are a prefix-stable function of their index") {
    const auto g = small_world_graph(80, 4, 0.3, 2);
    const SpreadConfig cfg{SpreadKind::RA1PC, 3, 0.6, {}};
    const auto small = simulate_paths(g, cfg, 50, 11);
    const auto large = simulate_paths(g, cfg, 500, 11);
    for (std::size_t l = 0; l < 50; ++l) {
        const auto a = small.rows.row(l), b = large.rows.row(l);
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}

TEST_CASE("streamed rows match the materialized SDM") {
    const auto g = small_world_graph(100, 4, 0.2, 4);
    const SpreadConfig cfg{SpreadKind::RAEPC, 2, 0.4, {}};
    const auto sample = sample_detections(g, cfg, 0.3, 400, 8);
    using Rows = std::vector<std::pair<std::size_t, std::vector<NodeId>>>;
    auto parts = for_each_detection_row<Rows>(
        g, cfg, 0.3, 400, 8, 3, [] { return Rows{}; },
        [](Rows& out, std::size_t l, auto nodes, auto flags, auto times) {
            std::vector<NodeId> row;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                row.push_back(flags[i] ? nodes[i] : kNoDetection);
                if (i) CHECK(times[i - 1] <= times[i]);
            }
            out.emplace_back(l, std::move(row));
        },
        cfg.t0);
    std::size_t seen = 0;
    for (const auto& part : parts)
        for (const auto& [l, row] : part) {
            const auto expect = sample.sdm.rows.row(l);
            CHECK(std::equal(row.begin(), row.end(), expect.begin(), expect.end()));
            ++seen;
        }
    CHECK(seen == 400);
}

TEST_CASE("matrix text round trip") {
    const auto g = wheel_graph(9);
    const auto s = sample_detections(g, {SpreadKind::TN11C, 3, 1.0, {}}, 0.4, 25, 77);
    std::ostringstream vsm_text, vdm_text, sdm_text;
    write_matrix(vsm_text, s.vsm);
    write_matrix(vdm_text, s.vdm, s.vsm);
    write_matrix(sdm_text, s.sdm);

    std::istringstream vin(vsm_text.str());
    const auto [vh, vrows] = read_matrix(vin);
    CHECK(vh.matrix == "VSM");
    CHECK(vh.t0 == 3);
    CHECK(vh.n == 25);
    CHECK_FALSE(vh.r.has_value());
    CHECK(vrows == s.vsm.rows);

    std::istringstream sin(sdm_text.str());
    const auto [sh, srows] = read_matrix(sin);
    CHECK(sh.matrix == "SDM");
    CHECK(sh.r.value() == 0.4);
    CHECK(srows == s.sdm.rows);
    CHECK(sdm_text.str().find('-') != std::string::npos);

    std::istringstream din(vdm_text.str());
    const auto [dh, drows] = read_matrix(din);
    CHECK(dh.matrix == "VDM");
    CHECK(drows.offsets() == s.vdm.flags.offsets());
    for (std::size_t i = 0; i < drows.total(); ++i) CHECK(drows.values()[i] == s.vdm.flags.values()[i]);

    std::istringstream bad("# VSM kind=TN11C t0=1 p=1 r=- n=2 seed=-\n1,2\n1,x\n");
    CHECK_THROWS_AS(read_matrix(bad), ParseError);
}

TEST_CASE("calibration: one node is reached at time zero") {
    const auto g = wheel_graph(8);
    const auto res = calibrate_time_threshold(g, {SpreadKind::TN11C, 0, 1.0, {}}, 0.1, 50, 3);
    CHECK(res.target_count == 1);
    CHECK(res.mean_time == 0.0);
    CHECK(res.completed == 50);
}

TEST_CASE("calibration: forced spread along a path") {
    const auto g = path_graph(4);
    const auto res = calibrate_time_threshold(g, {SpreadKind::RAEPC, 0, 1.0, point_mass(4, 0)}, 1.0, 20, 3, 2);
    CHECK(res.mean_time == 3.0);
    CHECK(res.exhausted == 0);
    const auto half = calibrate_time_threshold(g, {SpreadKind::RAEPC, 0, 1.0, point_mass(4, 0)}, 0.5, 20, 3);
    CHECK(half.target_count == 2);
    CHECK(half.mean_time == 1.0);
}

TEST_CASE("calibration reports horizon exhaustion") {
    // Covering a 1000-node path by a walk takes about n^2 steps, far beyond
    // the 100|V| horizon.
    const auto g = path_graph(1000);
    const auto res = calibrate_time_threshold(g, {SpreadKind::TN11C, 0, 1.0, point_mass(1000, 0)}, 1.0, 4, 1);
    CHECK(res.horizon == 100000);
    CHECK(res.exhausted == 4);
    CHECK(res.completed == 0);
    CHECK_THROWS_AS(calibrate_time_threshold(g, {}, 0.0, 4, 1), std::invalid_argument);
}
