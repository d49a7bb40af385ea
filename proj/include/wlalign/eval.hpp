#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wlalign/embedding.hpp"
#include "wlalign/graph.hpp"
#include "wlalign/relabel.hpp"

namespace wlalign {

enum class Direction { s_to_t, t_to_s };

// One query node's candidates, sorted by descending score, ties by ascending
// candidate id.
struct RankedList {
    NodeId query = 0;
    std::vector<std::pair<NodeId, double>> candidates;
};

struct AlignmentRanking {
    Direction direction = Direction::s_to_t;
    std::vector<RankedList> lists;  // one per query, in query order
};

// Exact top-k by cosine similarity of u-vectors against all nodes of the
// target network; the anchors' target-side members are excluded from the
// candidate pool (they are already mapped).
AlignmentRanking rank_candidates(const EmbeddingStore& store, std::span<const NodeId> queries,
                                 Direction direction, int top_k, const AnchorSet& anchors);

// Same contract, but scores are cosine similarities of tuple rows (the
// relabeling similarity) instead of embeddings.
AlignmentRanking rank_by_tuple_similarity(const TupleMatrix& tp_s, const TupleMatrix& tp_t,
                                          std::span<const NodeId> queries, Direction direction,
                                          int top_k, const AnchorSet& anchors);

// Same contract, but score 1 for an equal nonzero label and 0 otherwise
// (candidates ranked by label match, then ascending id).
AlignmentRanking rank_by_label(const LabelState& state, std::span<const NodeId> queries,
                               Direction direction, int top_k, const AnchorSet& anchors);

// (|Corr@N| in s->t + |Corr@N| in t->s) / (2 * |test_pairs|): a test pair
// counts once per direction in which its true counterpart appears within the
// top N.
double precision_at_n(const AlignmentRanking& s_to_t, const AlignmentRanking& t_to_s,
                      std::span<const Edge> test_pairs, int n);

// Discounted 3-hop reachability to shared anchors for a candidate pair:
// sum over i=1..3 of lambda^(i-1) * 2*|AnchorPairs_i| / (|shell_i(s)| + |shell_i(t)|),
// where shell_i is the set of nodes at BFS distance exactly i and an anchor
// pair counts at hop i when both members sit in their side's shell_i.
// Terms with empty shells on both sides contribute 0. Range [0, 1 + lambda + lambda^2].
double rsa(const Graph& g_s, const Graph& g_t, Edge pair, const AnchorSet& anchors,
           double lambda = 0.5);

struct RsaBucket {
    double rsa_min = 0.0;
    double rsa_max = 0.0;
    int count = 0;
    double precision_at_1 = 0.0;
};

// Sorts test pairs by RSA (ascending; ties by pair id), splits them into 10
// equal buckets with the remainder going to the last one, and reports
// Precision@1 per bucket. Fewer than 10 pairs fall back to a single bucket
// with a warning.
std::vector<RsaBucket> rsa_bucket_report(const Graph& g_s, const Graph& g_t,
                                         std::span<const Edge> test_pairs,
                                         const AlignmentRanking& s_to_t,
                                         const AlignmentRanking& t_to_s, const AnchorSet& anchors,
                                         double lambda = 0.5);

}  // namespace wlalign
