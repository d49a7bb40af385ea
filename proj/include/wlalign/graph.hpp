#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wlalign {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;

// Which of the two networks a node id refers to.
enum class Side { s, t };

// Directed graph in CSR form over dense node ids [0, n). Both adjacency
// directions are stored; predecessors() is always the exact transpose of
// successors(). Neighbor lists are sorted and duplicate-free.
class Graph {
public:
    Graph() = default;

    // Self-loops and duplicate arcs are dropped. When directed == false the
    // arc set is symmetrized, i.e. each input edge {i, j} produces both
    // (i, j) and (j, i).
    static Graph from_edges(NodeId n, const std::vector<Edge>& edges, bool directed);

    NodeId node_count() const { return n_; }
    bool directed() const { return directed_; }

    // Number of stored arcs. For a symmetric graph this is twice the number
    // of undirected edges.
    std::int64_t arc_count() const { return static_cast<std::int64_t>(out_flat_.size()); }
    std::int64_t undirected_edge_count() const;

    std::span<const NodeId> successors(NodeId i) const {
        return {out_flat_.data() + out_ptr_[static_cast<std::size_t>(i)],
                out_flat_.data() + out_ptr_[static_cast<std::size_t>(i) + 1]};
    }
    std::span<const NodeId> predecessors(NodeId i) const {
        return {in_flat_.data() + in_ptr_[static_cast<std::size_t>(i)],
                in_flat_.data() + in_ptr_[static_cast<std::size_t>(i) + 1]};
    }

    std::int64_t out_degree(NodeId i) const {
        return out_ptr_[static_cast<std::size_t>(i) + 1] - out_ptr_[static_cast<std::size_t>(i)];
    }
    std::int64_t in_degree(NodeId i) const {
        return in_ptr_[static_cast<std::size_t>(i) + 1] - in_ptr_[static_cast<std::size_t>(i)];
    }

    bool has_arc(NodeId i, NodeId j) const;

    // All arcs, sorted lexicographically.
    std::vector<Edge> arcs() const;

    // Undirected edge list {i < j}, defined for symmetric graphs.
    std::vector<Edge> undirected_edges() const;

    // Symmetrized copy: arc set becomes the union of arcs and reversed arcs.
    Graph to_bidirected() const;

private:
    NodeId n_ = 0;
    bool directed_ = true;
    std::vector<std::int64_t> out_ptr_ = {0};
    std::vector<std::int64_t> in_ptr_ = {0};
    std::vector<NodeId> out_flat_;
    std::vector<NodeId> in_flat_;
};

// Training anchors: node pairs (s, t) known to correspond. The label seeded
// for pair k (0-based) is k + 1; label 0 is reserved for "unlabeled".
struct AnchorSet {
    std::vector<Edge> pairs;

    // Validates ranges and rejects repeated source or target members.
    static AnchorSet create(std::vector<Edge> pairs, NodeId n_s, NodeId n_t);

    std::int32_t size() const { return static_cast<std::int32_t>(pairs.size()); }
};

// What a perturbation did, enough to reconstruct the ground-truth
// correspondence (original node i maps to node i in the perturbed graph).
struct PerturbationRecord {
    NodeId original_n = 0;
    std::vector<NodeId> added_nodes;
    std::vector<Edge> added_edges;  // undirected, includes attachment edges
    std::uint64_t seed = 0;
};

struct LoadedGraph {
    Graph graph;
    // dense_to_original[i] = id the node carried in the input file.
    std::vector<std::int64_t> dense_to_original;
};

// Whitespace-separated "src dst" lines; '#' starts a comment, blank lines are
// skipped. Original ids may be arbitrary integers; they are remapped to dense
// ids in order of first appearance. Throws std::runtime_error with the line
// number on malformed input, and if no edge line is found at all.
LoadedGraph load_edge_list(const std::string& path, bool directed);

// G(n, p) with every unordered pair {i, j}, i < j, included independently
// with probability p. Returned graph is symmetric.
Graph generate_er(NodeId n, double p, std::uint64_t seed);

// Grows a symmetric graph: floor(node_pct * n) new nodes, each attached to
// `attachments_per_node` distinct uniformly chosen nodes already present
// (earlier additions included), then floor(edge_pct * undirected_edge_count)
// extra undirected edges between uniformly chosen currently non-adjacent
// pairs. Existing arcs are never removed. Throws std::invalid_argument when
// the requested edges cannot fit in the grown node set.
std::pair<Graph, PerturbationRecord> perturb(const Graph& g, double node_pct, double edge_pct,
                                             std::uint64_t seed, int attachments_per_node = 1);

struct AnchorSplit {
    AnchorSet anchors;              // training share
    std::vector<Edge> test_pairs;   // held-out share
};

// Shuffles the ground-truth correspondence and splits it: the first
// floor(ratio * size) pairs become training anchors, the rest are test pairs.
AnchorSplit sample_anchors(const std::vector<Edge>& correspondence, double ratio,
                           std::uint64_t seed, NodeId n_s, NodeId n_t);

// Identity correspondence for a graph aligned with a grown copy of itself.
std::vector<Edge> identity_correspondence(NodeId original_n);

}  // namespace wlalign
