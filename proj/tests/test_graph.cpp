#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <doctest.h>

#include "wlalign/graph.hpp"
#include "wlalign/rng.hpp"
#include "test_util.hpp"

using namespace wlalign;
using testutil::TempDir;
using testutil::write_file;

namespace {

std::vector<Edge> sorted_arcs(const Graph& g) { return g.arcs(); }

Graph random_directed(NodeId n, int arcs, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int k = 0; k < arcs; ++k)
        edges.emplace_back(static_cast<NodeId>(rng.next_below(n)),
                           static_cast<NodeId>(rng.next_below(n)));
    return Graph::from_edges(n, edges, true);
}

}  // namespace

TEST_CASE("from_edges drops duplicates and self-loops, symmetrizes undirected input") {
    const Graph g = Graph::from_edges(4, {{0, 1}, {0, 1}, {2, 2}, {1, 3}}, false);
    CHECK(g.node_count() == 4);
    CHECK_FALSE(g.directed());
    CHECK(sorted_arcs(g) == std::vector<Edge>{{0, 1}, {1, 0}, {1, 3}, {3, 1}});
    CHECK(g.undirected_edge_count() == 2);

    CHECK_THROWS_AS(Graph::from_edges(2, {{0, 5}}, true), std::invalid_argument);
}

TEST_CASE("load_edge_list parses directly") {
    TempDir dir;
    write_file(dir.file("g.edges"), "0 1\n1 2\n");
    const LoadedGraph lg = load_edge_list(dir.file("g.edges"), true);
    CHECK(lg.graph.node_count() == 3);
    CHECK(sorted_arcs(lg.graph) == std::vector<Edge>{{0, 1}, {1, 2}});
    CHECK(lg.dense_to_original == std::vector<std::int64_t>{0, 1, 2});
}

TEST_CASE("load_edge_list remaps ids by first appearance") {
    TempDir dir;
    write_file(dir.file("g.edges"), "5 9\n9 5\n");
    const LoadedGraph lg = load_edge_list(dir.file("g.edges"), true);
    CHECK(lg.graph.node_count() == 2);
    CHECK(sorted_arcs(lg.graph) == std::vector<Edge>{{0, 1}, {1, 0}});
    CHECK(lg.dense_to_original == std::vector<std::int64_t>{5, 9});
}

TEST_CASE("load_edge_list drops self-loops but registers their node") {
    TempDir dir;
    write_file(dir.file("g.edges"), "0 0\n");
    const LoadedGraph lg = load_edge_list(dir.file("g.edges"), true);
    CHECK(lg.graph.node_count() == 1);
    CHECK(lg.graph.arc_count() == 0);
}

TEST_CASE("load_edge_list skips comments and blank lines") {
    TempDir dir;
    write_file(dir.file("g.edges"), "# header\n\n0 1 # trailing\n\t \n2 3\n");
    const LoadedGraph lg = load_edge_list(dir.file("g.edges"), false);
    CHECK(lg.graph.node_count() == 4);
    CHECK(lg.graph.undirected_edge_count() == 2);
}

TEST_CASE("load_edge_list reports malformed lines with their number") {
    TempDir dir;
    write_file(dir.file("bad.edges"), "0 1\n1 x\n");
    CHECK_THROWS_WITH_AS(load_edge_list(dir.file("bad.edges"), true),
                         doctest::Contains(":2"), std::runtime_error);

    write_file(dir.file("neg.edges"), "0 -1\n");
    CHECK_THROWS_AS(load_edge_list(dir.file("neg.edges"), true), std::runtime_error);

    write_file(dir.file("three.edges"), "0 1 2\n");
    CHECK_THROWS_AS(load_edge_list(dir.file("three.edges"), true), std::runtime_error);

    write_file(dir.file("empty.edges"), "# nothing\n");
    CHECK_THROWS_AS(load_edge_list(dir.file("empty.edges"), true), std::runtime_error);

    CHECK_THROWS_AS(load_edge_list(dir.file("missing.edges"), true), std::runtime_error);
}

TEST_CASE("to_bidirected takes the symmetric closure and is idempotent") {
    const Graph g = Graph::from_edges(2, {{0, 1}}, true);
    const Graph b = g.to_bidirected();
    CHECK(sorted_arcs(b) == std::vector<Edge>{{0, 1}, {1, 0}});
    CHECK_FALSE(b.directed());

    const Graph bb = b.to_bidirected();
    CHECK(sorted_arcs(bb) == sorted_arcs(b));

    const Graph empty = Graph::from_edges(3, {}, true).to_bidirected();
    CHECK(empty.node_count() == 3);
    CHECK(empty.arc_count() == 0);
}

TEST_CASE("predecessors are the exact transpose of successors") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = random_directed(30, 120, seed);
        std::set<Edge> fwd, rev;
        for (NodeId i = 0; i < g.node_count(); ++i) {
            for (const NodeId j : g.successors(i)) fwd.emplace(i, j);
            for (const NodeId j : g.predecessors(i)) rev.emplace(j, i);
        }
        CHECK(fwd == rev);
    }
}

TEST_CASE("generate_er boundary probabilities") {
    const Graph none = generate_er(40, 0.0, 1);
    CHECK(none.arc_count() == 0);

    const Graph full = generate_er(40, 1.0, 1);
    CHECK(full.undirected_edge_count() == 40 * 39 / 2);

    CHECK_THROWS_AS(generate_er(10, 1.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_er(10, -0.1, 1), std::invalid_argument);
}

TEST_CASE("generate_er edge count at the benchmark scale sits within 4 sigma") {
    const double expected = 1000.0 * 999.0 / 2.0 * 0.01;  // 4995
    const double sigma = std::sqrt(1000.0 * 999.0 / 2.0 * 0.01 * 0.99);
    const Graph g = generate_er(1000, 0.01, 42);
    CHECK(std::abs(static_cast<double>(g.undirected_edge_count()) - expected) < 4.0 * sigma);
}

TEST_CASE("generate_er mean edge count over 100 seeds is within 3 sigma of binomial") {
    const double expected = 200.0 * 199.0 / 2.0 * 0.05;
    const double sigma = std::sqrt(200.0 * 199.0 / 2.0 * 0.05 * 0.95);
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        sum += static_cast<double>(generate_er(200, 0.05, seed).undirected_edge_count());
    const double mean = sum / 100.0;
    CHECK(std::abs(mean - expected) < 3.0 * sigma / std::sqrt(100.0));
}

TEST_CASE("generate_er is deterministic per seed") {
    CHECK(generate_er(100, 0.05, 7).undirected_edges() ==
          generate_er(100, 0.05, 7).undirected_edges());
    CHECK(generate_er(100, 0.05, 7).undirected_edges() !=
          generate_er(100, 0.05, 8).undirected_edges());
}

TEST_CASE("perturb with zero percentages returns the graph unchanged") {
    const Graph g = generate_er(50, 0.1, 3);
    const auto [grown, record] = perturb(g, 0.0, 0.0, 11);
    CHECK(sorted_arcs(grown) == sorted_arcs(g));
    CHECK(record.added_nodes.empty());
    CHECK(record.added_edges.empty());
    CHECK(record.original_n == 50);
}

TEST_CASE("perturb node growth preserves the original induced subgraph exactly") {
    const Graph g = generate_er(1000, 0.01, 5);
    const auto [grown, record] = perturb(g, 0.5, 0.0, 13);
    CHECK(grown.node_count() == 1500);
    CHECK(record.added_nodes.size() == 500);
    for (std::size_t k = 0; k < record.added_nodes.size(); ++k)
        CHECK(record.added_nodes[k] == static_cast<NodeId>(1000 + k));

    // Original nodes' mutual edges are untouched (attachment edges all involve
    // an added endpoint).
    std::vector<Edge> original_part;
    for (const auto& [i, j] : grown.undirected_edges())
        if (i < 1000 && j < 1000) original_part.emplace_back(i, j);
    CHECK(original_part == g.undirected_edges());

    // Every added node attached to exactly one existing node.
    for (const NodeId v : record.added_nodes) CHECK(grown.out_degree(v) >= 1);
    CHECK(record.added_edges.size() == 500);
}

TEST_CASE("perturb edge growth adds exactly floor(edge_pct * |E|) new edges") {
    const Graph g = generate_er(300, 0.05, 9);
    const auto e0 = g.undirected_edge_count();
    const auto [grown, record] = perturb(g, 0.0, 3.0, 17);
    CHECK(record.added_edges.size() == static_cast<std::size_t>(3 * e0));
    CHECK(grown.undirected_edge_count() == 4 * e0);
    // Old arcs all survive.
    for (const auto& [i, j] : g.undirected_edges()) CHECK(grown.has_arc(i, j));
}

TEST_CASE("perturb refuses edge requests beyond simple-graph capacity") {
    const Graph k5 = generate_er(5, 1.0, 1);
    CHECK_THROWS_AS(perturb(k5, 0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("perturb is deterministic per seed") {
    const Graph g = generate_er(100, 0.05, 21);
    const auto [a, ra] = perturb(g, 0.3, 0.5, 23);
    const auto [b, rb] = perturb(g, 0.3, 0.5, 23);
    CHECK(sorted_arcs(a) == sorted_arcs(b));
    CHECK(ra.added_edges == rb.added_edges);
}

TEST_CASE("sample_anchors boundary ratios") {
    const auto corr = identity_correspondence(100);

    const AnchorSplit all = sample_anchors(corr, 1.0, 31, 100, 100);
    CHECK(all.anchors.size() == 100);
    CHECK(all.test_pairs.empty());

    const AnchorSplit none = sample_anchors(corr, 0.0, 31, 100, 100);
    CHECK(none.anchors.size() == 0);
    CHECK(none.test_pairs.size() == 100);

    CHECK_THROWS_AS(sample_anchors(corr, 1.2, 31, 100, 100), std::invalid_argument);
}

TEST_CASE("sample_anchors splits disjointly and covers the correspondence") {
    const auto corr = identity_correspondence(1000);
    const AnchorSplit split = sample_anchors(corr, 0.5, 37, 1000, 1000);
    CHECK(split.anchors.size() == 500);
    CHECK(split.test_pairs.size() == 500);

    std::set<Edge> train(split.anchors.pairs.begin(), split.anchors.pairs.end());
    std::set<Edge> test(split.test_pairs.begin(), split.test_pairs.end());
    CHECK(train.size() == 500);
    CHECK(test.size() == 500);
    std::set<Edge> both;
    std::set_intersection(train.begin(), train.end(), test.begin(), test.end(),
                          std::inserter(both, both.begin()));
    CHECK(both.empty());
}

TEST_CASE("sample_anchors count never loses a pair to float rounding") {
    // floor(0.7 * 350) must be 245, not 244 via 244.999...
    const auto corr = identity_correspondence(350);
    const AnchorSplit split = sample_anchors(corr, 0.7, 41, 350, 350);
    CHECK(split.anchors.size() == 245);
}

TEST_CASE("AnchorSet rejects repeated members and bad ids") {
    CHECK_THROWS_AS(AnchorSet::create({{0, 1}, {0, 2}}, 5, 5), std::invalid_argument);
    CHECK_THROWS_AS(AnchorSet::create({{0, 1}, {2, 1}}, 5, 5), std::invalid_argument);
    CHECK_THROWS_AS(AnchorSet::create({{0, 9}}, 5, 5), std::invalid_argument);
    CHECK_NOTHROW(AnchorSet::create({{0, 1}, {1, 0}}, 5, 5));
}
