#include "wlalign/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "wlalign/io.hpp"
#include "wlalign/rng.hpp"

namespace wlalign {

namespace {

void build_adjacency(NodeId n, const std::vector<Edge>& arcs, bool transpose,
                     std::vector<std::int64_t>& ptr, std::vector<NodeId>& flat) {
    ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const Edge& e : arcs) {
        const NodeId key = transpose ? e.second : e.first;
        ++ptr[static_cast<std::size_t>(key) + 1];
    }
    for (std::size_t i = 1; i < ptr.size(); ++i) ptr[i] += ptr[i - 1];
    flat.resize(arcs.size());
    std::vector<std::int64_t> cursor(ptr.begin(), ptr.end() - 1);
    for (const Edge& e : arcs) {
        const NodeId key = transpose ? e.second : e.first;
        const NodeId val = transpose ? e.first : e.second;
        flat[static_cast<std::size_t>(cursor[static_cast<std::size_t>(key)]++)] = val;
    }
    for (NodeId i = 0; i < n; ++i) {
        std::sort(flat.begin() + ptr[static_cast<std::size_t>(i)],
                  flat.begin() + ptr[static_cast<std::size_t>(i) + 1]);
    }
}

// Counts truncated toward zero, with a small guard against decimal ratios
// landing just below an integer (e.g. 0.7 * 350 = 244.999...).
std::int64_t scaled_count(double ratio, std::int64_t base) {
    return static_cast<std::int64_t>(std::floor(ratio * static_cast<double>(base) + 1e-9));
}

std::uint64_t pair_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

}  // namespace

Graph Graph::from_edges(NodeId n, const std::vector<Edge>& edges, bool directed) {
    if (n < 0) throw std::invalid_argument("Graph: negative node count");
    std::vector<Edge> arcs;
    arcs.reserve(directed ? edges.size() : edges.size() * 2);
    for (const Edge& e : edges) {
        if (e.first < 0 || e.first >= n || e.second < 0 || e.second >= n)
            throw std::invalid_argument("Graph: edge endpoint out of range");
        if (e.first == e.second) continue;
        arcs.push_back(e);
        if (!directed) arcs.emplace_back(e.second, e.first);
    }
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

    Graph g;
    g.n_ = n;
    g.directed_ = directed;
    build_adjacency(n, arcs, false, g.out_ptr_, g.out_flat_);
    build_adjacency(n, arcs, true, g.in_ptr_, g.in_flat_);
    return g;
}

std::int64_t Graph::undirected_edge_count() const {
    if (directed_) throw std::logic_error("undirected_edge_count: graph is directed");
    return arc_count() / 2;
}

bool Graph::has_arc(NodeId i, NodeId j) const {
    const auto nbrs = successors(i);
    return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

std::vector<Edge> Graph::arcs() const {
    std::vector<Edge> out;
    out.reserve(out_flat_.size());
    for (NodeId i = 0; i < n_; ++i)
        for (NodeId j : successors(i)) out.emplace_back(i, j);
    return out;
}

std::vector<Edge> Graph::undirected_edges() const {
    if (directed_) throw std::logic_error("undirected_edges: graph is directed");
    std::vector<Edge> out;
    out.reserve(out_flat_.size() / 2);
    for (NodeId i = 0; i < n_; ++i)
        for (NodeId j : successors(i))
            if (i < j) out.emplace_back(i, j);
    return out;
}

Graph Graph::to_bidirected() const {
    return from_edges(n_, arcs(), false);
}

AnchorSet AnchorSet::create(std::vector<Edge> pairs, NodeId n_s, NodeId n_t) {
    std::unordered_set<NodeId> seen_s, seen_t;
    seen_s.reserve(pairs.size());
    seen_t.reserve(pairs.size());
    for (const Edge& p : pairs) {
        if (p.first < 0 || p.first >= n_s || p.second < 0 || p.second >= n_t)
            throw std::invalid_argument("AnchorSet: node id out of range");
        if (!seen_s.insert(p.first).second)
            throw std::invalid_argument("AnchorSet: repeated source node " +
                                        std::to_string(p.first));
        if (!seen_t.insert(p.second).second)
            throw std::invalid_argument("AnchorSet: repeated target node " +
                                        std::to_string(p.second));
    }
    return AnchorSet{std::move(pairs)};
}

LoadedGraph load_edge_list(const std::string& path, bool directed) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge list: " + path);

    std::unordered_map<std::int64_t, NodeId> to_dense;
    std::vector<std::int64_t> dense_to_original;
    std::vector<Edge> edges;
    const auto intern = [&](std::int64_t original) {
        const auto [it, fresh] =
            to_dense.try_emplace(original, static_cast<NodeId>(dense_to_original.size()));
        if (fresh) dense_to_original.push_back(original);
        return it->second;
    };

    std::string line;
    std::size_t line_no = 0;
    bool saw_edge = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);

        std::int64_t ids[2];
        int n_ids = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        bool bad = false;
        while (p < end) {
            if (*p == ' ' || *p == '\t' || *p == '\r') {
                ++p;
                continue;
            }
            std::int64_t value = 0;
            const auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc{} || value < 0 || n_ids == 2) {
                bad = true;
                break;
            }
            if (next < end && *next != ' ' && *next != '\t' && *next != '\r') {
                bad = true;
                break;
            }
            ids[n_ids++] = value;
            p = next;
        }
        if (bad || n_ids == 1)
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed edge line");
        if (n_ids == 0) continue;

        saw_edge = true;
        const NodeId a = intern(ids[0]);
        const NodeId b = intern(ids[1]);
        if (a != b) edges.emplace_back(a, b);  // self-loop registers the node only
    }
    if (!saw_edge) throw DataError("no edges in file: " + path);

    LoadedGraph out;
    out.graph = Graph::from_edges(static_cast<NodeId>(dense_to_original.size()), edges, directed);
    out.dense_to_original = std::move(dense_to_original);
    return out;
}

Graph generate_er(NodeId n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("generate_er: p must be in [0,1]");
    if (n < 0) throw std::invalid_argument("generate_er: negative node count");
    Rng rng(seed);
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (rng.next_double() < p) edges.emplace_back(i, j);
    return Graph::from_edges(n, edges, false);
}

std::pair<Graph, PerturbationRecord> perturb(const Graph& g, double node_pct, double edge_pct,
                                             std::uint64_t seed, int attachments_per_node) {
    if (g.directed()) throw std::invalid_argument("perturb: graph must be undirected");
    if (node_pct < 0.0 || edge_pct < 0.0)
        throw std::invalid_argument("perturb: percentages must be non-negative");
    if (attachments_per_node < 1)
        throw std::invalid_argument("perturb: attachments_per_node must be >= 1");

    const NodeId n0 = g.node_count();
    const std::int64_t e0 = g.undirected_edge_count();
    const std::int64_t add_nodes = scaled_count(node_pct, n0);
    const std::int64_t add_edges = scaled_count(edge_pct, e0);
    const std::int64_t n_total64 = n0 + add_nodes;
    if (n_total64 > (std::int64_t{1} << 30))
        throw std::invalid_argument("perturb: grown graph too large");
    const NodeId n_total = static_cast<NodeId>(n_total64);

    if (add_nodes > 0 && n0 == 0)
        throw std::invalid_argument("perturb: cannot attach new nodes to an empty graph");

    const std::int64_t max_pairs = n_total64 * (n_total64 - 1) / 2;

    Rng rng(seed);
    PerturbationRecord rec;
    rec.original_n = n0;
    rec.seed = seed;

    std::vector<Edge> edges = g.undirected_edges();
    std::unordered_set<std::uint64_t> present;
    present.reserve(edges.size() * 2);
    for (const Edge& e : edges) present.insert(pair_key(e.first, e.second));

    for (std::int64_t k = 0; k < add_nodes; ++k) {
        const NodeId id = static_cast<NodeId>(n0 + k);
        rec.added_nodes.push_back(id);
        const std::int64_t existing = n0 + k;
        const int wanted = attachments_per_node < existing
                               ? attachments_per_node
                               : static_cast<int>(existing);
        std::unordered_set<NodeId> chosen;
        while (static_cast<int>(chosen.size()) < wanted) {
            const NodeId target =
                static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(existing)));
            if (!chosen.insert(target).second) continue;
            edges.emplace_back(target, id);
            rec.added_edges.emplace_back(target, id);
            present.insert(pair_key(target, id));
        }
    }

    if (static_cast<std::int64_t>(present.size()) + add_edges > max_pairs)
        throw std::invalid_argument("perturb: requested edges exceed simple-graph capacity");

    for (std::int64_t k = 0; k < add_edges; ++k) {
        for (;;) {
            const NodeId i =
                static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(n_total)));
            const NodeId j =
                static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(n_total)));
            if (i == j) continue;
            const std::uint64_t key = pair_key(i, j);
            if (present.contains(key)) continue;
            present.insert(key);
            const Edge e{std::min(i, j), std::max(i, j)};
            edges.push_back(e);
            rec.added_edges.push_back(e);
            break;
        }
    }

    return {Graph::from_edges(n_total, edges, false), std::move(rec)};
}

AnchorSplit sample_anchors(const std::vector<Edge>& correspondence, double ratio,
                           std::uint64_t seed, NodeId n_s, NodeId n_t) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw std::invalid_argument("sample_anchors: ratio must be in [0,1]");
    std::vector<Edge> pairs = correspondence;
    Rng rng(seed);
    rng.shuffle(pairs);
    const auto take = static_cast<std::size_t>(
        scaled_count(ratio, static_cast<std::int64_t>(pairs.size())));
    AnchorSplit split;
    split.anchors = AnchorSet::create({pairs.begin(), pairs.begin() + take}, n_s, n_t);
    split.test_pairs.assign(pairs.begin() + take, pairs.end());
    return split;
}

std::vector<Edge> identity_correspondence(NodeId original_n) {
    std::vector<Edge> pairs;
    pairs.reserve(static_cast<std::size_t>(original_n));
    for (NodeId i = 0; i < original_n; ++i) pairs.emplace_back(i, i);
    return pairs;
}

}  // namespace wlalign
