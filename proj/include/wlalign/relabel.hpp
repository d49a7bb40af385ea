#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "wlalign/graph.hpp"

namespace wlalign {

using LabelId = std::int32_t;

// Per-node compressed labels for the two networks. Label 0 means "unlabeled";
// labels 1..anchor_label_ceiling are anchor labels and never change. Every
// nonzero label is shared by at least one node on each side.
struct LabelState {
    std::vector<LabelId> labels_s;
    std::vector<LabelId> labels_t;
    LabelId label_count = 0;           // |C_a|, nondecreasing across rounds
    LabelId anchor_label_ceiling = 0;  // |V_a|
};

// Anchor pair k (0-based) seeds label k+1 on both sides; everything else 0.
// An empty anchor set yields the all-zero state (warned on stderr once).
LabelState init_labels(const AnchorSet& anchors, NodeId n_s, NodeId n_t);

// One sparse row of (A + I) * WL: (label, multiplicity) pairs, sorted by
// label, zero labels absent.
struct TupleRow {
    std::vector<std::pair<LabelId, std::int32_t>> entries;

    bool empty() const { return entries.empty(); }
    double squared_norm() const {
        double acc = 0.0;
        for (const auto& [label, count] : entries)
            acc += static_cast<double>(count) * static_cast<double>(count);
        return acc;
    }
};

struct TupleMatrix {
    LabelId label_count = 0;
    std::vector<TupleRow> rows;  // one per node
};

// Row i = histogram of the labels of {i} union successors(i), zeros dropped.
TupleMatrix propagate(const Graph& g, const std::vector<LabelId>& labels, LabelId label_count);

// Cross-network cosine similarity between tuple rows, stored sparsely:
// rows[r] holds (column index, similarity) for the nonzero entries only,
// sorted by column index. row_nodes/col_nodes give the node id behind each
// row/column index. Zero-norm rows produce no entries.
struct SimilarityMatrix {
    std::vector<NodeId> row_nodes;  // s-side candidates
    std::vector<NodeId> col_nodes;  // t-side candidates
    std::vector<std::vector<std::pair<std::int32_t, double>>> rows;
};

SimilarityMatrix cross_similarity(const TupleMatrix& tp_s, const TupleMatrix& tp_t);
SimilarityMatrix cross_similarity(const TupleMatrix& tp_s, const TupleMatrix& tp_t,
                                  std::span<const NodeId> row_nodes,
                                  std::span<const NodeId> col_nodes);

// Pairs (s_node, t_node) whose similarity is a maximum of both its row and
// its column and strictly positive. Ties are resolved by scanning cells in
// ascending (row, column) order and claiming each row and column at most
// once. Restriction to unlabeled nodes happens upstream, by building the
// matrix over unlabeled candidates only.
std::vector<Edge> mutual_match(const SimilarityMatrix& sim);

// One round of similarity-based relabeling: matched pairs of previously
// unlabeled nodes receive fresh shared labels (one per pair, in match order).
// Labeled nodes are never touched.
LabelState soft_relabel_round(const Graph& g_s, const Graph& g_t, const LabelState& state);

// Injective map from canonical tuple to compressed label, shared by both
// networks and persistent across rounds; the counter continues from wherever
// label numbering stood when the table was created. In hard mode this
// counter *is* the label counter.
class HashRuleTable {
public:
    explicit HashRuleTable(LabelId counter_start) : counter_(counter_start) {}

    LabelId lookup_or_insert(const std::vector<LabelId>& key) {
        const auto [it, fresh] = rules_.try_emplace(key, counter_ + 1);
        if (fresh) ++counter_;
        return it->second;
    }

    LabelId counter() const { return counter_; }
    std::size_t size() const { return rules_.size(); }

private:
    std::map<std::vector<LabelId>, LabelId> rules_;
    LabelId counter_ = 0;
};

// One round of injective-hash relabeling: an unlabeled node's canonical tuple
// is its sorted (label, multiplicity) list with zeros dropped; a label is
// assigned only when the identical canonical tuple occurs in both networks
// this round. Tuples that are empty after dropping zeros carry no anchor
// information and are never hashed.
LabelState hard_relabel_round(const Graph& g_s, const Graph& g_t, const LabelState& state,
                              HashRuleTable& rules);

enum class RelabelMode { soft, hard };

struct RoundStat {
    int round = 0;
    LabelId new_labels = 0;
    std::int64_t newly_labeled_s = 0;
    std::int64_t newly_labeled_t = 0;
    double seconds = 0.0;
};

struct RelabelResult {
    LabelState state;
    bool converged = false;
    int rounds = 0;  // rounds actually run, including the one that detected the fixpoint
    std::vector<RoundStat> trace;
};

// Repeats the chosen round until label_count stops changing between
// consecutive rounds, or max_rounds is hit (reported via converged=false).
RelabelResult relabel_until_convergence(const Graph& g_s, const Graph& g_t,
                                        const AnchorSet& anchors, RelabelMode mode,
                                        int max_rounds);

// Cosine similarity of the two per-label count vectors over the eval nodes
// (labels 1..label_count; unlabeled nodes contribute nothing). Returns 0 when
// either vector is all-zero.
double label_histogram_similarity(const LabelState& state, std::span<const NodeId> eval_s,
                                  std::span<const NodeId> eval_t);

// Fraction of eval nodes holding a nonzero label.
double coverage_ratio(const LabelState& state, std::span<const NodeId> eval_nodes, Side side);

}  // namespace wlalign
