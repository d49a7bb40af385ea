#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <doctest.h>

#include "wlalign/graph.hpp"
#include "wlalign/relabel.hpp"
#include "wlalign/rng.hpp"

using namespace wlalign;

namespace {

Graph path3() { return Graph::from_edges(3, {{0, 1}, {1, 2}}, false); }

std::vector<LabelId> labels_of(const TupleMatrix& tp, NodeId node) {
    std::vector<LabelId> out;
    for (const auto& [label, count] : tp.rows[static_cast<std::size_t>(node)].entries)
        for (int k = 0; k < count; ++k) out.push_back(label);
    return out;
}

// Independent oracle: literal integer matrix product (A + I) * WL, where WL
// is the n x label_count one-hot labeling matrix.
std::vector<std::vector<int>> dense_propagate(const Graph& g, const std::vector<LabelId>& labels,
                                              LabelId label_count) {
    const auto n = static_cast<std::size_t>(g.node_count());
    const auto w = static_cast<std::size_t>(label_count);
    std::vector<std::vector<int>> abar(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        abar[i][i] = 1;
        for (const NodeId j : g.successors(static_cast<NodeId>(i)))
            abar[i][static_cast<std::size_t>(j)] = 1;
    }
    std::vector<std::vector<int>> wl(n, std::vector<int>(w, 0));
    for (std::size_t i = 0; i < n; ++i)
        if (labels[i] > 0) wl[i][static_cast<std::size_t>(labels[i]) - 1] = 1;
    std::vector<std::vector<int>> product(n, std::vector<int>(w, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (abar[i][k])
                for (std::size_t c = 0; c < w; ++c) product[i][c] += abar[i][k] * wl[k][c];
    return product;
}

std::vector<std::vector<int>> densify(const TupleMatrix& tp) {
    std::vector<std::vector<int>> out(tp.rows.size(),
                                      std::vector<int>(static_cast<std::size_t>(tp.label_count), 0));
    for (std::size_t i = 0; i < tp.rows.size(); ++i)
        for (const auto& [label, count] : tp.rows[i].entries)
            out[i][static_cast<std::size_t>(label) - 1] = count;
    return out;
}

SimilarityMatrix sim_from_dense(const std::vector<std::vector<double>>& m) {
    SimilarityMatrix sim;
    for (std::size_t r = 0; r < m.size(); ++r) sim.row_nodes.push_back(static_cast<NodeId>(r));
    for (std::size_t c = 0; c < m[0].size(); ++c) sim.col_nodes.push_back(static_cast<NodeId>(c));
    sim.rows.resize(m.size());
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m[r].size(); ++c)
            if (m[r][c] != 0.0) sim.rows[r].emplace_back(static_cast<std::int32_t>(c), m[r][c]);
    return sim;
}

// Literal scan of the three relabel conditions with the documented greedy
// tie-break: ascending (row, column), each row and column claimed once.
std::vector<Edge> brute_mutual_match(const std::vector<std::vector<double>>& m) {
    const std::size_t nr = m.size(), nc = m[0].size();
    std::vector<double> row_max(nr, 0.0), col_max(nc, 0.0);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c) {
            row_max[r] = std::max(row_max[r], m[r][c]);
            col_max[c] = std::max(col_max[c], m[r][c]);
        }
    std::vector<char> row_used(nr, 0), col_used(nc, 0);
    std::vector<Edge> out;
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c) {
            if (row_used[r] || col_used[c]) continue;
            const double v = m[r][c];
            if (v > 0.0 && v == row_max[r] && v == col_max[c]) {
                out.emplace_back(static_cast<NodeId>(r), static_cast<NodeId>(c));
                row_used[r] = col_used[c] = 1;
                break;  // row claimed; move to the next row
            }
        }
    return out;
}

// Mirrors cross_similarity's arithmetic on one dense row pair so that ties
// land on bit-identical doubles: integer dot and squared norms are exact in
// double, the denominator is the sqrt of their double product, and the value
// is clamped to [0, 1]. Pairs with no shared label score 0, like the sparse
// matrix's absent cells.
double oracle_cosine(const std::vector<int>& a, const std::vector<int>& b) {
    double dot = 0.0, sq_a = 0.0, sq_b = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        dot += static_cast<double>(a[l]) * static_cast<double>(b[l]);
        sq_a += static_cast<double>(a[l]) * static_cast<double>(a[l]);
        sq_b += static_cast<double>(b[l]) * static_cast<double>(b[l]);
    }
    if (dot == 0.0) return 0.0;
    return std::min(1.0, std::max(0.0, dot / std::sqrt(sq_a * sq_b)));
}

// Row divided by the gcd of its entries; empty for all-zero rows. Two
// nonnegative integer rows are parallel over the rationals exactly when they
// reduce to the same vector.
std::vector<int> reduced_row(const std::vector<int>& row) {
    int g = 0;
    for (const int x : row) g = std::gcd(g, x);
    if (g == 0) return {};
    std::vector<int> out(row.size());
    for (std::size_t l = 0; l < row.size(); ++l) out[l] = row[l] / g;
    return out;
}

}  // namespace

TEST_CASE("init_labels seeds anchor pair k with label k+1") {
    const AnchorSet anchors = AnchorSet::create({{2, 7}}, 5, 9);
    const LabelState state = init_labels(anchors, 5, 9);
    CHECK(state.labels_s == std::vector<LabelId>{0, 0, 1, 0, 0});
    CHECK(state.labels_t[7] == 1);
    CHECK(std::count(state.labels_t.begin(), state.labels_t.end(), 0) == 8);
    CHECK(state.label_count == 1);
    CHECK(state.anchor_label_ceiling == 1);

    const LabelState two = init_labels(AnchorSet::create({{0, 0}, {3, 4}}, 5, 5), 5, 5);
    CHECK(two.labels_s[0] == 1);
    CHECK(two.labels_s[3] == 2);
    CHECK(two.labels_t[0] == 1);
    CHECK(two.labels_t[4] == 2);
    CHECK(two.label_count == 2);
}

TEST_CASE("init_labels with no anchors yields the all-zero state") {
    const LabelState state = init_labels(AnchorSet{}, 3, 4);
    CHECK(state.label_count == 0);
    CHECK(std::count(state.labels_s.begin(), state.labels_s.end(), 0) == 3);
    CHECK(std::count(state.labels_t.begin(), state.labels_t.end(), 0) == 4);
}

TEST_CASE("propagate on the path 0-1-2 with labels [1,0,0]") {
    const TupleMatrix tp = propagate(path3(), {1, 0, 0}, 1);
    CHECK(tp.label_count == 1);
    CHECK(labels_of(tp, 0) == std::vector<LabelId>{1});  // self term
    CHECK(labels_of(tp, 1) == std::vector<LabelId>{1});  // neighbour 0
    CHECK(labels_of(tp, 2).empty());                     // out of reach
}

TEST_CASE("propagate with all-zero labels gives an all-zero matrix") {
    const TupleMatrix tp = propagate(path3(), {0, 0, 0}, 3);
    CHECK(tp.label_count == 3);
    for (const TupleRow& row : tp.rows) CHECK(row.empty());
}

TEST_CASE("propagate keeps the identity term for isolated nodes") {
    const Graph g = Graph::from_edges(1, {}, false);
    const TupleMatrix tp = propagate(g, {2}, 2);
    CHECK(labels_of(tp, 0) == std::vector<LabelId>{2});
}

TEST_CASE("propagate equals the dense (A+I)*WL product on random instances") {
    Rng rng(99);
    for (int instance = 0; instance < 40; ++instance) {
        const NodeId n = 2 + static_cast<NodeId>(rng.next_below(49));
        const Graph g = generate_er(n, 0.15, rng.next_u64());
        const LabelId label_count = 1 + static_cast<LabelId>(rng.next_below(5));
        std::vector<LabelId> labels(static_cast<std::size_t>(n));
        for (auto& l : labels)
            l = static_cast<LabelId>(rng.next_below(static_cast<std::uint64_t>(label_count) + 1));
        CHECK(densify(propagate(g, labels, label_count)) == dense_propagate(g, labels, label_count));
    }
}

TEST_CASE("cross_similarity on hand rows") {
    TupleMatrix a, b;
    a.label_count = b.label_count = 3;
    a.rows.resize(3);
    b.rows.resize(3);
    a.rows[0].entries = {{1, 2}};          // (2,0,0)
    b.rows[0].entries = {{1, 1}};          // (1,0,0) -> scale-invariant 1.0
    a.rows[1].entries = {{1, 2}, {2, 1}};  // (2,1,0)
    b.rows[1].entries = {{1, 1}, {2, 1}, {3, 1}};  // (1,1,1) -> 3/(sqrt5*sqrt3)
    a.rows[2].entries = {{1, 1}};
    b.rows[2].entries = {{3, 1}};          // disjoint support -> absent entry

    const SimilarityMatrix sim = cross_similarity(a, b);
    REQUIRE(sim.rows.size() == 3);

    const auto at = [&](std::size_t r, std::int32_t c) -> double {
        for (const auto& [col, v] : sim.rows[r])
            if (col == c) return v;
        return 0.0;
    };
    CHECK(at(0, 0) == 1.0);  // exact: integer product before sqrt
    CHECK(at(1, 1) == doctest::Approx(3.0 / std::sqrt(15.0)).epsilon(1e-12));
    CHECK(at(2, 2) == 0.0);
    for (const auto& row : sim.rows)
        for (const auto& [col, v] : row) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("cross_similarity rejects mismatched label dimensions") {
    TupleMatrix a, b;
    a.label_count = 2;
    b.label_count = 3;
    a.rows.resize(1);
    b.rows.resize(1);
    CHECK_THROWS_AS(cross_similarity(a, b), std::invalid_argument);
}

TEST_CASE("mutual_match reproduces the worked matrix") {
    const SimilarityMatrix sim =
        sim_from_dense({{0.0, 1.0, 0.4}, {1.0, 0.6, 0.3}, {0.0, 0.0, 1.0}});
    CHECK(mutual_match(sim) == std::vector<Edge>{{0, 1}, {1, 0}, {2, 2}});
}

TEST_CASE("mutual_match takes the diagonal of an identity matrix") {
    const SimilarityMatrix sim = sim_from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    CHECK(mutual_match(sim) == std::vector<Edge>{{0, 0}, {1, 1}, {2, 2}});
}

TEST_CASE("mutual_match of an all-zero matrix is empty") {
    const SimilarityMatrix sim = sim_from_dense({{0, 0}, {0, 0}});
    CHECK(mutual_match(sim).empty());
}

TEST_CASE("mutual_match equals the brute-force three-condition scan") {
    Rng rng(123);
    for (int instance = 0; instance < 60; ++instance) {
        const std::size_t nr = 1 + rng.next_below(30);
        const std::size_t nc = 1 + rng.next_below(30);
        std::vector<std::vector<double>> m(nr, std::vector<double>(nc, 0.0));
        const bool tie_rich = instance % 2 == 0;
        for (auto& row : m)
            for (auto& v : row)
                v = tie_rich ? 0.5 * static_cast<double>(rng.next_below(3))
                             : (rng.next_double() < 0.3 ? 0.0 : rng.next_double());
        CHECK(mutual_match(sim_from_dense(m)) == brute_mutual_match(m));
    }
}

TEST_CASE("soft_relabel_round matches the single unlabeled neighbour pair") {
    // Both graphs: one edge anchor(0) - x(1).
    const Graph g = Graph::from_edges(2, {{0, 1}}, false);
    const LabelState state = init_labels(AnchorSet::create({{0, 0}}, 2, 2), 2, 2);
    const LabelState next = soft_relabel_round(g, g, state);
    CHECK(next.labels_s == std::vector<LabelId>{1, 2});
    CHECK(next.labels_t == std::vector<LabelId>{1, 2});
    CHECK(next.label_count == 2);
}

TEST_CASE("soft_relabel_round is a fixpoint on a converged state") {
    const Graph g = Graph::from_edges(2, {{0, 1}}, false);
    LabelState state = init_labels(AnchorSet::create({{0, 0}}, 2, 2), 2, 2);
    state = soft_relabel_round(g, g, state);
    const LabelState again = soft_relabel_round(g, g, state);
    CHECK(again.labels_s == state.labels_s);
    CHECK(again.labels_t == state.labels_t);
    CHECK(again.label_count == state.label_count);
}

TEST_CASE("soft_relabel_round does nothing when labels cannot reach candidates") {
    // 0-1 anchored at 0; node 2 isolated on both sides.
    const Graph g = Graph::from_edges(3, {{0, 1}}, false);
    LabelState state = init_labels(AnchorSet::create({{0, 0}, {1, 1}}, 3, 3), 3, 3);
    const LabelState next = soft_relabel_round(g, g, state);
    CHECK(next.labels_s == state.labels_s);
    CHECK(next.label_count == state.label_count);
}

TEST_CASE("hard_relabel_round labels identical cross-network tuples") {
    // Both graphs: anchor(0) - x(1); x's canonical tuple is {1} on both sides.
    const Graph g = Graph::from_edges(2, {{0, 1}}, false);
    const LabelState state = init_labels(AnchorSet::create({{0, 0}}, 2, 2), 2, 2);
    HashRuleTable rules(state.label_count);
    const LabelState next = hard_relabel_round(g, g, state, rules);
    CHECK(next.labels_s == std::vector<LabelId>{1, 2});
    CHECK(next.labels_t == std::vector<LabelId>{1, 2});
    CHECK(next.label_count == 2);
}

TEST_CASE("hard_relabel_round skips tuples that occur in only one network") {
    // s: anchor(0)-x(1); t: anchor(0)-x(1)-y(2). y's tuple {0-only} is empty;
    // x^t tuple = {1}; but give s an extra node whose tuple is {1,1}... keep it
    // simple: s-x sees one anchor, t-x sees one anchor; t-y sees x only (label
    // 0) -> empty tuple, never hashed.
    const Graph gs = Graph::from_edges(2, {{0, 1}}, false);
    const Graph gt = Graph::from_edges(3, {{0, 1}, {1, 2}}, false);
    const LabelState state = init_labels(AnchorSet::create({{0, 0}}, 2, 3), 2, 3);
    HashRuleTable rules(state.label_count);
    const LabelState next = hard_relabel_round(gs, gt, state, rules);
    CHECK(next.labels_s[1] == 2);
    CHECK(next.labels_t[1] == 2);
    CHECK(next.labels_t[2] == 0);  // empty canonical tuple carries no information

    // A second round: y's tuple is now {2}, but no s-node shares it.
    const LabelState third = hard_relabel_round(gs, gt, next, rules);
    CHECK(third.labels_t[2] == 0);
    CHECK(third.label_count == next.label_count);
}

TEST_CASE("hard_relabel_round gives one label per tuple, not per pair") {
    // s: anchor(0) with two leaves 1,2 (same tuple {1}); t: anchor(0) with
    // one leaf 1. All three leaves share the canonical tuple and the label.
    const Graph gs = Graph::from_edges(3, {{0, 1}, {0, 2}}, false);
    const Graph gt = Graph::from_edges(2, {{0, 1}}, false);
    const LabelState state = init_labels(AnchorSet::create({{0, 0}}, 3, 2), 3, 2);
    HashRuleTable rules(state.label_count);
    const LabelState next = hard_relabel_round(gs, gt, state, rules);
    CHECK(next.labels_s[1] == 2);
    CHECK(next.labels_s[2] == 2);
    CHECK(next.labels_t[1] == 2);
    CHECK(next.label_count == 2);
}

TEST_CASE("hard rounds re-hash identical tuples identically across rounds") {
    // Two stars whose leaves acquire the same tuple in different rounds: the
    // persistent rule table must hand out the same label.
    const Graph gs = Graph::from_edges(2, {{0, 1}}, false);
    const Graph gt = Graph::from_edges(2, {{0, 1}}, false);
    const LabelState state = init_labels(AnchorSet::create({{0, 0}}, 2, 2), 2, 2);
    HashRuleTable rules(state.label_count);
    const LabelId first = rules.lookup_or_insert({1, 1});
    CHECK(rules.lookup_or_insert({1, 1}) == first);
    CHECK(rules.lookup_or_insert({1, 2}) == first + 1);
    const LabelState next = hard_relabel_round(gs, gt, state, rules);
    CHECK(next.label_count == rules.counter());
}

TEST_CASE("relabel_until_convergence on a path pair labels everything in 3 rounds") {
    const RelabelResult res = relabel_until_convergence(
        path3(), path3(), AnchorSet::create({{0, 0}}, 3, 3), RelabelMode::soft, 100);
    CHECK(res.converged);
    CHECK(res.rounds <= 3);
    CHECK(res.state.labels_s == std::vector<LabelId>{1, 2, 3});
    CHECK(res.state.labels_t == std::vector<LabelId>{1, 2, 3});
    const std::set<LabelId> distinct(res.state.labels_s.begin(), res.state.labels_s.end());
    CHECK(distinct.size() == 3);
}

TEST_CASE("relabel_until_convergence with zero anchors converges immediately") {
    const RelabelResult res =
        relabel_until_convergence(path3(), path3(), AnchorSet{}, RelabelMode::soft, 10);
    CHECK(res.converged);
    CHECK(res.rounds == 1);
    CHECK(res.state.label_count == 0);
}

TEST_CASE("relabel_until_convergence with a full anchor set needs one round") {
    const AnchorSet anchors = AnchorSet::create({{0, 0}, {1, 1}, {2, 2}}, 3, 3);
    const RelabelResult res =
        relabel_until_convergence(path3(), path3(), anchors, RelabelMode::hard, 10);
    CHECK(res.converged);
    CHECK(res.rounds == 1);
    CHECK(res.state.label_count == 3);
    CHECK(res.trace.size() == 1);
    CHECK(res.trace[0].new_labels == 0);
}

TEST_CASE("relabel_until_convergence reports max_rounds exhaustion") {
    // A long path with one anchor labels one pair per round; 2 rounds cannot
    // finish a 6-path.
    const Graph g = Graph::from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}, false);
    const RelabelResult res = relabel_until_convergence(
        g, g, AnchorSet::create({{0, 0}}, 6, 6), RelabelMode::soft, 2);
    CHECK_FALSE(res.converged);
    CHECK(res.rounds == 2);
    CHECK_THROWS_AS(
        relabel_until_convergence(g, g, AnchorSet{}, RelabelMode::soft, 0),
        std::invalid_argument);
}

TEST_CASE("anchor labels survive any number of rounds in both modes") {
    const Graph g = generate_er(30, 0.15, 77);
    const AnchorSet anchors = AnchorSet::create({{0, 0}, {5, 5}, {11, 11}}, 30, 30);
    for (const RelabelMode mode : {RelabelMode::soft, RelabelMode::hard}) {
        const RelabelResult res = relabel_until_convergence(g, g, anchors, mode, 30);
        CHECK(res.state.labels_s[0] == 1);
        CHECK(res.state.labels_t[0] == 1);
        CHECK(res.state.labels_s[5] == 2);
        CHECK(res.state.labels_s[11] == 3);
        CHECK(res.state.anchor_label_ceiling == 3);
    }
}

TEST_CASE("label_count is nondecreasing and soft mode meets its round bound") {
    Rng rng(555);
    for (int instance = 0; instance < 10; ++instance) {
        const NodeId n = 10 + static_cast<NodeId>(rng.next_below(30));
        const Graph g = generate_er(n, 0.12, rng.next_u64());
        const auto [gt, rec] = perturb(g, 0.2, 0.2, rng.next_u64());
        const int n_anchors = 2 + static_cast<int>(rng.next_below(4));
        std::vector<Edge> pairs;
        for (int k = 0; k < n_anchors; ++k) pairs.emplace_back(k, k);
        const AnchorSet anchors = AnchorSet::create(pairs, n, gt.node_count());

        const RelabelResult res =
            relabel_until_convergence(g, gt, anchors, RelabelMode::soft, 1000);
        CHECK(res.converged);
        const int bound = static_cast<int>(std::min(n, gt.node_count())) - n_anchors + 1;
        CHECK(res.rounds <= bound);
        LabelId prev = anchors.size();
        for (const RoundStat& stat : res.trace) {
            CHECK(stat.new_labels >= 0);
            prev += stat.new_labels;
        }
        CHECK(prev == res.state.label_count);
    }
}

TEST_CASE("soft relabeling matches identical copies along the diagonal") {
    // For g aligned with an exact copy of itself, the diagonal similarity is
    // always 1.0 (identical rows), so the greedy tie-break must pair every
    // matched node with its own copy.
    Rng rng(808);
    for (int instance = 0; instance < 10; ++instance) {
        const NodeId n = 8 + static_cast<NodeId>(rng.next_below(13));
        const Graph g = generate_er(n, 0.2, rng.next_u64());
        std::vector<Edge> pairs;
        for (NodeId k = 0; k < 2; ++k) pairs.emplace_back(k, k);
        const RelabelResult res = relabel_until_convergence(
            g, g, AnchorSet::create(pairs, n, n), RelabelMode::soft, 1000);
        CHECK(res.state.labels_s == res.state.labels_t);
    }
}

TEST_CASE("permuted-pair rounds follow the dense oracle; unique rows force true matches") {
    // g_t is g_s with permuted ids. Full recovery of the permutation is NOT
    // guaranteed: two unlabeled nodes whose tuple rows are parallel score
    // cosine 1.0 against both true images, and the ascending greedy then
    // pairs them in id order, which the permutation can cross — a wrong match
    // that persists, labels being permanent. What must hold instead:
    // (a) the whole round loop reproduces an independent dense simulation
    //     exactly — candidate sets, match order, and label numbering; and
    // (b) while every match so far agrees with the permutation, a node whose
    //     gcd-reduced row is unique among its side's unlabeled rows scores
    //     exactly 1.0 with its true image and strictly less than 1 elsewhere
    //     (Cauchy-Schwarz on non-parallel integer rows, and the float gap
    //     1 - 1/(sq_a*sq_b) is far wider than an ulp), so its match is forced
    //     to the true image.
    Rng rng(4242);
    int forced_total = 0;
    for (int instance = 0; instance < 8; ++instance) {
        const NodeId n = 10 + static_cast<NodeId>(rng.next_below(11));
        const Graph g = generate_er(n, 0.25, rng.next_u64());

        std::vector<NodeId> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        std::vector<Edge> arcs;
        for (const auto& [i, j] : g.arcs())
            arcs.emplace_back(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        const Graph gt = Graph::from_edges(n, arcs, true).to_bidirected();

        std::vector<Edge> anchor_pairs;
        for (NodeId k = 0; k < 3; ++k)
            anchor_pairs.emplace_back(k, perm[static_cast<std::size_t>(k)]);
        const RelabelResult res = relabel_until_convergence(
            g, gt, AnchorSet::create(anchor_pairs, n, n), RelabelMode::soft, 1000);
        REQUIRE(res.converged);

        // Independent dense simulation of the soft round loop.
        std::vector<LabelId> labels_s(static_cast<std::size_t>(n), 0);
        std::vector<LabelId> labels_t(static_cast<std::size_t>(n), 0);
        for (NodeId k = 0; k < 3; ++k) {
            labels_s[static_cast<std::size_t>(k)] = k + 1;
            labels_t[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = k + 1;
        }
        LabelId label_count = 3;
        bool perm_consistent = true;

        for (int round = 0; round < n; ++round) {
            const auto rows_s = dense_propagate(g, labels_s, label_count);
            const auto rows_t = dense_propagate(gt, labels_t, label_count);
            std::vector<NodeId> cand_s, cand_t;
            for (NodeId i = 0; i < n; ++i) {
                if (labels_s[static_cast<std::size_t>(i)] == 0) cand_s.push_back(i);
                if (labels_t[static_cast<std::size_t>(i)] == 0) cand_t.push_back(i);
            }
            if (cand_s.empty() || cand_t.empty()) break;

            std::vector<std::vector<double>> m(cand_s.size(),
                                               std::vector<double>(cand_t.size(), 0.0));
            for (std::size_t r = 0; r < cand_s.size(); ++r)
                for (std::size_t c = 0; c < cand_t.size(); ++c)
                    m[r][c] = oracle_cosine(rows_s[static_cast<std::size_t>(cand_s[r])],
                                            rows_t[static_cast<std::size_t>(cand_t[c])]);
            const std::vector<Edge> matches = brute_mutual_match(m);
            if (matches.empty()) break;

            std::map<std::vector<int>, int> reduced_count;
            if (perm_consistent)
                for (const NodeId u : cand_s) {
                    const std::vector<int> red = reduced_row(rows_s[static_cast<std::size_t>(u)]);
                    if (!red.empty()) ++reduced_count[red];
                }

            bool all_true = true;
            for (const auto& [r, c] : matches) {
                const NodeId u = cand_s[static_cast<std::size_t>(r)];
                const NodeId w = cand_t[static_cast<std::size_t>(c)];
                if (perm_consistent) {
                    const std::vector<int> red = reduced_row(rows_s[static_cast<std::size_t>(u)]);
                    if (!red.empty() && reduced_count[red] == 1) {
                        CHECK_MESSAGE(w == perm[static_cast<std::size_t>(u)], "unique-row node ",
                                      u, " matched ", w, ", not its true image ",
                                      perm[static_cast<std::size_t>(u)]);
                        ++forced_total;
                    }
                }
                if (w != perm[static_cast<std::size_t>(u)]) all_true = false;
                ++label_count;
                labels_s[static_cast<std::size_t>(u)] = label_count;
                labels_t[static_cast<std::size_t>(w)] = label_count;
            }
            perm_consistent = perm_consistent && all_true;
        }

        CHECK(res.state.labels_s == labels_s);
        CHECK(res.state.labels_t == labels_t);
        CHECK(res.state.label_count == label_count);
    }
    CHECK(forced_total > 0);  // the forced-match clause must actually fire
}

TEST_CASE("hard relabeling is deterministic") {
    const Graph g = generate_er(40, 0.1, 31);
    const auto [gt, rec] = perturb(g, 0.3, 0.3, 32);
    const AnchorSet anchors = AnchorSet::create({{0, 0}, {1, 1}, {2, 2}, {3, 3}}, 40,
                                                gt.node_count());
    const RelabelResult a = relabel_until_convergence(g, gt, anchors, RelabelMode::hard, 100);
    const RelabelResult b = relabel_until_convergence(g, gt, anchors, RelabelMode::hard, 100);
    CHECK(a.state.labels_s == b.state.labels_s);
    CHECK(a.state.labels_t == b.state.labels_t);
    CHECK(a.rounds == b.rounds);
}

TEST_CASE("label_histogram_similarity hand values") {
    LabelState state;
    state.label_count = 3;
    // eval_s holds labels {1,1,2}; eval_t holds {1,2,3}: (2,1,0) vs (1,1,1).
    state.labels_s = {1, 1, 2};
    state.labels_t = {1, 2, 3};
    const std::vector<NodeId> es{0, 1, 2}, et{0, 1, 2};
    CHECK(label_histogram_similarity(state, es, et) ==
          doctest::Approx(3.0 / std::sqrt(15.0)).epsilon(1e-12));

    // Identical label multisets -> exactly 1.0.
    state.labels_t = {1, 1, 2};
    CHECK(label_histogram_similarity(state, es, et) == 1.0);

    // Disjoint label sets -> 0.
    state.labels_s = {1, 1, 1};
    state.labels_t = {2, 2, 2};
    CHECK(label_histogram_similarity(state, es, et) == 0.0);

    // All-unlabeled -> defined as 0.
    state.labels_s = {0, 0, 0};
    state.labels_t = {0, 0, 0};
    CHECK(label_histogram_similarity(state, es, et) == 0.0);
}

TEST_CASE("coverage_ratio counts nonzero labels") {
    LabelState state;
    state.label_count = 2;
    state.labels_s = {1, 0, 2, 0};
    state.labels_t = {1, 1, 1, 1};
    const std::vector<NodeId> all{0, 1, 2, 3};
    CHECK(coverage_ratio(state, all, Side::s) == 0.5);
    CHECK(coverage_ratio(state, all, Side::t) == 1.0);
    state.labels_t = {0, 0, 0, 0};
    CHECK(coverage_ratio(state, all, Side::t) == 0.0);
    CHECK_THROWS_AS(coverage_ratio(state, std::vector<NodeId>{}, Side::s), std::invalid_argument);

    // 700 of 1000.
    LabelState big;
    big.label_count = 1;
    big.labels_s.assign(1000, 0);
    for (int i = 0; i < 700; ++i) big.labels_s[static_cast<std::size_t>(i)] = 1;
    big.labels_t.assign(1000, 1);
    std::vector<NodeId> eval(1000);
    for (int i = 0; i < 1000; ++i) eval[static_cast<std::size_t>(i)] = static_cast<NodeId>(i);
    CHECK(coverage_ratio(big, eval, Side::s) == 0.7);
}
