#include "wlalign/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "wlalign/parallel.hpp"

namespace wlalign {

namespace {

// Generic exact top-k ranking: score_fn(query, candidate) over a fixed
// candidate pool, sorted by descending score then ascending candidate id.
template <typename ScoreFn>
AlignmentRanking rank_generic(std::span<const NodeId> queries, Direction direction, int top_k,
                              NodeId target_n, const std::unordered_set<NodeId>& excluded,
                              ScoreFn&& score_fn) {
    if (queries.empty()) throw std::invalid_argument("rank_candidates: empty query set");
    if (top_k < 1) throw std::invalid_argument("rank_candidates: top_k must be >= 1");

    std::vector<NodeId> pool;
    pool.reserve(static_cast<std::size_t>(target_n));
    for (NodeId c = 0; c < target_n; ++c)
        if (!excluded.contains(c)) pool.push_back(c);

    AlignmentRanking ranking;
    ranking.direction = direction;
    ranking.lists.resize(queries.size());
    const std::int64_t n_queries = static_cast<std::int64_t>(queries.size());
    parallel_for_chunks(0, n_queries, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<std::pair<NodeId, double>> scored(pool.size());
        for (std::int64_t q = lo; q < hi; ++q) {
            const NodeId query = queries[static_cast<std::size_t>(q)];
            for (std::size_t c = 0; c < pool.size(); ++c)
                scored[c] = {pool[c], score_fn(query, pool[c])};
            const std::size_t keep = std::min<std::size_t>(scored.size(),
                                                           static_cast<std::size_t>(top_k));
            const auto by_rank = [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            };
            std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(), by_rank);
            RankedList& list = ranking.lists[static_cast<std::size_t>(q)];
            list.query = query;
            list.candidates.assign(scored.begin(), scored.begin() + keep);
        }
    });
    return ranking;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    const double denom = std::sqrt(na * nb);
    return denom == 0.0 ? 0.0 : dot / denom;
}

double tuple_cosine(const TupleRow& a, const TupleRow& b) {
    double dot = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        if (a.entries[i].first < b.entries[j].first) {
            ++i;
        } else if (a.entries[i].first > b.entries[j].first) {
            ++j;
        } else {
            dot += static_cast<double>(a.entries[i].second) *
                   static_cast<double>(b.entries[j].second);
            ++i;
            ++j;
        }
    }
    if (dot == 0.0) return 0.0;
    const double denom = std::sqrt(a.squared_norm() * b.squared_norm());
    return std::min(1.0, std::max(0.0, dot / denom));
}

std::unordered_set<NodeId> excluded_members(const AnchorSet& anchors, Direction direction) {
    std::unordered_set<NodeId> excluded;
    excluded.reserve(anchors.pairs.size());
    for (const auto& [s_node, t_node] : anchors.pairs)
        excluded.insert(direction == Direction::s_to_t ? t_node : s_node);
    return excluded;
}

// BFS distances truncated at max_depth; -1 = unreached.
std::vector<std::int32_t> bfs_depths(const Graph& g, NodeId source, int max_depth) {
    std::vector<std::int32_t> dist(static_cast<std::size_t>(g.node_count()), -1);
    std::vector<NodeId> frontier{source};
    dist[static_cast<std::size_t>(source)] = 0;
    for (int depth = 1; depth <= max_depth && !frontier.empty(); ++depth) {
        std::vector<NodeId> next;
        for (const NodeId u : frontier)
            for (const NodeId v : g.successors(u))
                if (dist[static_cast<std::size_t>(v)] < 0) {
                    dist[static_cast<std::size_t>(v)] = depth;
                    next.push_back(v);
                }
        frontier = std::move(next);
    }
    return dist;
}

}  // namespace

AlignmentRanking rank_candidates(const EmbeddingStore& store, std::span<const NodeId> queries,
                                 Direction direction, int top_k, const AnchorSet& anchors) {
    const Side query_side = direction == Direction::s_to_t ? Side::s : Side::t;
    const Side target_side = direction == Direction::s_to_t ? Side::t : Side::s;
    const NodeId target_n = direction == Direction::s_to_t ? store.n_t() : store.n_s();
    return rank_generic(queries, direction, top_k, target_n,
                        excluded_members(anchors, direction), [&](NodeId q, NodeId c) {
                            return cosine(store.vec(Table::node, query_side, q),
                                          store.vec(Table::node, target_side, c));
                        });
}

AlignmentRanking rank_by_tuple_similarity(const TupleMatrix& tp_s, const TupleMatrix& tp_t,
                                          std::span<const NodeId> queries, Direction direction,
                                          int top_k, const AnchorSet& anchors) {
    const TupleMatrix& tp_q = direction == Direction::s_to_t ? tp_s : tp_t;
    const TupleMatrix& tp_c = direction == Direction::s_to_t ? tp_t : tp_s;
    const NodeId target_n = static_cast<NodeId>(tp_c.rows.size());
    return rank_generic(queries, direction, top_k, target_n,
                        excluded_members(anchors, direction), [&](NodeId q, NodeId c) {
                            return tuple_cosine(tp_q.rows.at(static_cast<std::size_t>(q)),
                                                tp_c.rows.at(static_cast<std::size_t>(c)));
                        });
}

AlignmentRanking rank_by_label(const LabelState& state, std::span<const NodeId> queries,
                               Direction direction, int top_k, const AnchorSet& anchors) {
    const std::vector<LabelId>& q_labels =
        direction == Direction::s_to_t ? state.labels_s : state.labels_t;
    const std::vector<LabelId>& c_labels =
        direction == Direction::s_to_t ? state.labels_t : state.labels_s;
    const NodeId target_n = static_cast<NodeId>(c_labels.size());
    return rank_generic(queries, direction, top_k, target_n,
                        excluded_members(anchors, direction), [&](NodeId q, NodeId c) {
                            const LabelId l = q_labels.at(static_cast<std::size_t>(q));
                            return l != 0 && l == c_labels.at(static_cast<std::size_t>(c)) ? 1.0
                                                                                           : 0.0;
                        });
}

double precision_at_n(const AlignmentRanking& s_to_t, const AlignmentRanking& t_to_s,
                      std::span<const Edge> test_pairs, int n) {
    if (test_pairs.empty()) throw std::invalid_argument("precision_at_n: empty test set");
    if (s_to_t.direction != Direction::s_to_t || t_to_s.direction != Direction::t_to_s)
        throw std::invalid_argument("precision_at_n: rankings passed in the wrong order");

    const auto index_lists = [](const AlignmentRanking& r) {
        std::unordered_map<NodeId, const RankedList*> by_query;
        by_query.reserve(r.lists.size());
        for (const RankedList& list : r.lists) by_query[list.query] = &list;
        return by_query;
    };
    const auto st = index_lists(s_to_t);
    const auto ts = index_lists(t_to_s);

    const auto hit = [n](const std::unordered_map<NodeId, const RankedList*>& lists, NodeId query,
                         NodeId truth) {
        const auto it = lists.find(query);
        if (it == lists.end())
            throw std::logic_error("precision_at_n: test pair missing from ranking");
        const auto& cands = it->second->candidates;
        const std::size_t limit = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(n));
        for (std::size_t k = 0; k < limit; ++k)
            if (cands[k].first == truth) return 1;
        return 0;
    };

    std::int64_t correct = 0;
    for (const auto& [s_node, t_node] : test_pairs) {
        correct += hit(st, s_node, t_node);
        correct += hit(ts, t_node, s_node);
    }
    return static_cast<double>(correct) / (2.0 * static_cast<double>(test_pairs.size()));
}

double rsa(const Graph& g_s, const Graph& g_t, Edge pair, const AnchorSet& anchors,
           double lambda) {
    constexpr int kHops = 3;
    const auto dist_s = bfs_depths(g_s, pair.first, kHops);
    const auto dist_t = bfs_depths(g_t, pair.second, kHops);

    std::int64_t shell_s[kHops + 1] = {};
    std::int64_t shell_t[kHops + 1] = {};
    for (const std::int32_t d : dist_s)
        if (d >= 1) ++shell_s[d];
    for (const std::int32_t d : dist_t)
        if (d >= 1) ++shell_t[d];

    std::int64_t shared[kHops + 1] = {};
    for (const auto& [a_s, a_t] : anchors.pairs) {
        const std::int32_t ds = dist_s[static_cast<std::size_t>(a_s)];
        const std::int32_t dt = dist_t[static_cast<std::size_t>(a_t)];
        if (ds >= 1 && ds == dt) ++shared[ds];
    }

    double value = 0.0;
    double discount = 1.0;
    for (int hop = 1; hop <= kHops; ++hop, discount *= lambda) {
        const std::int64_t denom = shell_s[hop] + shell_t[hop];
        if (denom > 0)
            value += discount * 2.0 * static_cast<double>(shared[hop]) /
                     static_cast<double>(denom);
    }
    return value;
}

std::vector<RsaBucket> rsa_bucket_report(const Graph& g_s, const Graph& g_t,
                                         std::span<const Edge> test_pairs,
                                         const AlignmentRanking& s_to_t,
                                         const AlignmentRanking& t_to_s, const AnchorSet& anchors,
                                         double lambda) {
    if (test_pairs.empty()) throw std::invalid_argument("rsa_bucket_report: empty test set");

    struct Scored {
        double rsa_value;
        Edge pair;
    };
    std::vector<Scored> scored(test_pairs.size());
    const std::int64_t n_pairs = static_cast<std::int64_t>(test_pairs.size());
    parallel_for_chunks(0, n_pairs, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t k = lo; k < hi; ++k)
            scored[static_cast<std::size_t>(k)] = {
                rsa(g_s, g_t, test_pairs[static_cast<std::size_t>(k)], anchors, lambda),
                test_pairs[static_cast<std::size_t>(k)]};
    });
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.rsa_value != b.rsa_value) return a.rsa_value < b.rsa_value;
        return a.pair < b.pair;
    });

    int n_buckets = 10;
    if (test_pairs.size() < 10) {
        std::cerr << "warning: fewer than 10 test pairs, reporting a single RSA bucket\n";
        n_buckets = 1;
    }
    const std::size_t quota = scored.size() / static_cast<std::size_t>(n_buckets);

    std::vector<RsaBucket> buckets;
    buckets.reserve(static_cast<std::size_t>(n_buckets));
    std::size_t pos = 0;
    for (int b = 0; b < n_buckets; ++b) {
        const bool last = b == n_buckets - 1;
        const std::size_t take = last ? scored.size() - pos : quota;
        std::vector<Edge> members;
        members.reserve(take);
        for (std::size_t k = 0; k < take; ++k) members.push_back(scored[pos + k].pair);

        RsaBucket bucket;
        bucket.count = static_cast<int>(take);
        bucket.rsa_min = scored[pos].rsa_value;
        bucket.rsa_max = scored[pos + take - 1].rsa_value;
        bucket.precision_at_1 = precision_at_n(s_to_t, t_to_s, members, 1);
        buckets.push_back(bucket);
        pos += take;
    }
    return buckets;
}

}  // namespace wlalign
