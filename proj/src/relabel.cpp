#include "wlalign/relabel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <unordered_map>

#include "wlalign/parallel.hpp"

namespace wlalign {

namespace {

std::vector<NodeId> unlabeled_nodes(const std::vector<LabelId>& labels) {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 0) out.push_back(static_cast<NodeId>(i));
    return out;
}

// Canonical hard-mode key: the tuple row flattened to label,count,... pairs.
// Rows are already sorted by label with zeros absent, which makes this the
// sorted zero-free multiset the hash rules operate on.
std::vector<LabelId> canonical_key(const TupleRow& row) {
    std::vector<LabelId> key;
    key.reserve(row.entries.size() * 2);
    for (const auto& [label, count] : row.entries) {
        key.push_back(label);
        key.push_back(count);
    }
    return key;
}

}  // namespace

LabelState init_labels(const AnchorSet& anchors, NodeId n_s, NodeId n_t) {
    LabelState state;
    state.labels_s.assign(static_cast<std::size_t>(n_s), 0);
    state.labels_t.assign(static_cast<std::size_t>(n_t), 0);
    state.label_count = anchors.size();
    state.anchor_label_ceiling = anchors.size();
    if (anchors.pairs.empty())
        std::cerr << "warning: empty anchor set, relabeling will be degenerate\n";
    for (std::size_t k = 0; k < anchors.pairs.size(); ++k) {
        const auto [s_node, t_node] = anchors.pairs[k];
        if (s_node >= n_s || t_node >= n_t)
            throw std::invalid_argument("init_labels: anchor out of range");
        const LabelId label = static_cast<LabelId>(k + 1);
        state.labels_s[static_cast<std::size_t>(s_node)] = label;
        state.labels_t[static_cast<std::size_t>(t_node)] = label;
    }
    return state;
}

TupleMatrix propagate(const Graph& g, const std::vector<LabelId>& labels, LabelId label_count) {
    const NodeId n = g.node_count();
    if (labels.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("propagate: label vector size mismatch");
    for (const LabelId l : labels)
        if (l < 0 || l > label_count)
            throw std::invalid_argument("propagate: label id outside 0..label_count");

    TupleMatrix tp;
    tp.label_count = label_count;
    tp.rows.resize(static_cast<std::size_t>(n));
    parallel_for_chunks(0, n, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<LabelId> scratch;
        for (std::int64_t i = lo; i < hi; ++i) {
            scratch.clear();
            if (labels[static_cast<std::size_t>(i)] != 0)
                scratch.push_back(labels[static_cast<std::size_t>(i)]);
            for (const NodeId j : g.successors(static_cast<NodeId>(i)))
                if (labels[static_cast<std::size_t>(j)] != 0)
                    scratch.push_back(labels[static_cast<std::size_t>(j)]);
            std::sort(scratch.begin(), scratch.end());
            TupleRow& row = tp.rows[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < scratch.size();) {
                std::size_t run = k + 1;
                while (run < scratch.size() && scratch[run] == scratch[k]) ++run;
                row.entries.emplace_back(scratch[k], static_cast<std::int32_t>(run - k));
                k = run;
            }
        }
    });
    return tp;
}

SimilarityMatrix cross_similarity(const TupleMatrix& tp_s, const TupleMatrix& tp_t) {
    std::vector<NodeId> rows(tp_s.rows.size()), cols(tp_t.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<NodeId>(i);
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<NodeId>(j);
    return cross_similarity(tp_s, tp_t, rows, cols);
}

SimilarityMatrix cross_similarity(const TupleMatrix& tp_s, const TupleMatrix& tp_t,
                                  std::span<const NodeId> row_nodes,
                                  std::span<const NodeId> col_nodes) {
    if (tp_s.label_count != tp_t.label_count)
        throw std::invalid_argument("cross_similarity: label dimension mismatch");

    SimilarityMatrix sim;
    sim.row_nodes.assign(row_nodes.begin(), row_nodes.end());
    sim.col_nodes.assign(col_nodes.begin(), col_nodes.end());
    sim.rows.resize(row_nodes.size());

    // Inverted index over the column side: label -> (column index, count).
    std::unordered_map<LabelId, std::vector<std::pair<std::int32_t, std::int32_t>>> inverted;
    std::vector<double> col_sqnorm(col_nodes.size(), 0.0);
    for (std::size_t c = 0; c < col_nodes.size(); ++c) {
        const TupleRow& row = tp_t.rows.at(static_cast<std::size_t>(col_nodes[c]));
        col_sqnorm[c] = row.squared_norm();
        for (const auto& [label, count] : row.entries)
            inverted[label].emplace_back(static_cast<std::int32_t>(c), count);
    }

    const std::int64_t n_rows = static_cast<std::int64_t>(row_nodes.size());
    parallel_for_chunks(0, n_rows, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<double> dot(col_nodes.size(), 0.0);
        std::vector<std::int32_t> touched;
        for (std::int64_t r = lo; r < hi; ++r) {
            const TupleRow& row = tp_s.rows.at(static_cast<std::size_t>(row_nodes[r]));
            if (row.empty()) continue;
            const double row_sqnorm = row.squared_norm();
            for (const auto& [label, count] : row.entries) {
                const auto it = inverted.find(label);
                if (it == inverted.end()) continue;
                for (const auto& [c, ccount] : it->second) {
                    if (dot[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
                    dot[static_cast<std::size_t>(c)] +=
                        static_cast<double>(count) * static_cast<double>(ccount);
                }
            }
            std::sort(touched.begin(), touched.end());
            auto& out = sim.rows[static_cast<std::size_t>(r)];
            out.reserve(touched.size());
            for (const std::int32_t c : touched) {
                const double denom = std::sqrt(row_sqnorm * col_sqnorm[static_cast<std::size_t>(c)]);
                double v = dot[static_cast<std::size_t>(c)] / denom;
                v = std::min(1.0, std::max(0.0, v));
                out.emplace_back(c, v);
                dot[static_cast<std::size_t>(c)] = 0.0;
            }
            touched.clear();
        }
    });
    return sim;
}

std::vector<Edge> mutual_match(const SimilarityMatrix& sim) {
    const std::size_t n_rows = sim.row_nodes.size();
    const std::size_t n_cols = sim.col_nodes.size();
    std::vector<double> row_max(n_rows, 0.0), col_max(n_cols, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (const auto& [c, v] : sim.rows[r]) {
            if (v > row_max[r]) row_max[r] = v;
            if (v > col_max[static_cast<std::size_t>(c)]) col_max[static_cast<std::size_t>(c)] = v;
        }
    }

    std::vector<char> row_used(n_rows, 0), col_used(n_cols, 0);
    std::vector<Edge> matches;
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (const auto& [c, v] : sim.rows[r]) {
            if (col_used[static_cast<std::size_t>(c)]) continue;
            if (v > 0.0 && v == row_max[r] && v == col_max[static_cast<std::size_t>(c)]) {
                row_used[r] = 1;
                col_used[static_cast<std::size_t>(c)] = 1;
                matches.emplace_back(sim.row_nodes[r], sim.col_nodes[static_cast<std::size_t>(c)]);
                break;  // row claimed; later cells in this row cannot match
            }
        }
    }
    return matches;
}

LabelState soft_relabel_round(const Graph& g_s, const Graph& g_t, const LabelState& state) {
    LabelState next = state;
    const std::vector<NodeId> cand_s = unlabeled_nodes(state.labels_s);
    const std::vector<NodeId> cand_t = unlabeled_nodes(state.labels_t);
    if (cand_s.empty() || cand_t.empty()) return next;

    const TupleMatrix tp_s = propagate(g_s, state.labels_s, state.label_count);
    const TupleMatrix tp_t = propagate(g_t, state.labels_t, state.label_count);
    const SimilarityMatrix sim = cross_similarity(tp_s, tp_t, cand_s, cand_t);
    for (const Edge& m : mutual_match(sim)) {
        next.label_count += 1;
        next.labels_s[static_cast<std::size_t>(m.first)] = next.label_count;
        next.labels_t[static_cast<std::size_t>(m.second)] = next.label_count;
    }
    return next;
}

LabelState hard_relabel_round(const Graph& g_s, const Graph& g_t, const LabelState& state,
                              HashRuleTable& rules) {
    if (rules.counter() < state.label_count)
        throw std::logic_error("hard_relabel_round: rule table counter behind label_count");

    LabelState next = state;
    const TupleMatrix tp_s = propagate(g_s, state.labels_s, state.label_count);
    const TupleMatrix tp_t = propagate(g_t, state.labels_t, state.label_count);

    // Canonical tuple -> holders, per network, unlabeled nodes only.
    const auto collect = [](const TupleMatrix& tp, const std::vector<LabelId>& labels) {
        std::map<std::vector<LabelId>, std::vector<NodeId>> holders;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != 0) continue;
            const TupleRow& row = tp.rows[i];
            if (row.empty()) continue;  // no labeled neighbourhood, nothing to hash
            holders[canonical_key(row)].push_back(static_cast<NodeId>(i));
        }
        return holders;
    };
    const auto holders_s = collect(tp_s, state.labels_s);
    const auto holders_t = collect(tp_t, state.labels_t);

    // std::map keys iterate in lexicographic order, so label assignment is
    // independent of node iteration order.
    for (const auto& [key, s_nodes] : holders_s) {
        const auto it = holders_t.find(key);
        if (it == holders_t.end()) continue;  // tuple present in one network only
        const LabelId label = rules.lookup_or_insert(key);
        for (const NodeId i : s_nodes) next.labels_s[static_cast<std::size_t>(i)] = label;
        for (const NodeId j : it->second) next.labels_t[static_cast<std::size_t>(j)] = label;
    }
    next.label_count = rules.counter();
    return next;
}

RelabelResult relabel_until_convergence(const Graph& g_s, const Graph& g_t,
                                        const AnchorSet& anchors, RelabelMode mode,
                                        int max_rounds) {
    if (max_rounds < 1) throw std::invalid_argument("relabel_until_convergence: max_rounds < 1");

    RelabelResult res;
    res.state = init_labels(anchors, g_s.node_count(), g_t.node_count());
    HashRuleTable rules(res.state.label_count);

    const auto count_labeled = [](const std::vector<LabelId>& labels) {
        std::int64_t n = 0;
        for (const LabelId l : labels) n += l != 0;
        return n;
    };

    for (int round = 1; round <= max_rounds; ++round) {
        const LabelId before = res.state.label_count;
        const std::int64_t labeled_s_before = count_labeled(res.state.labels_s);
        const std::int64_t labeled_t_before = count_labeled(res.state.labels_t);
        const auto tic = std::chrono::steady_clock::now();

        res.state = mode == RelabelMode::soft ? soft_relabel_round(g_s, g_t, res.state)
                                              : hard_relabel_round(g_s, g_t, res.state, rules);

        const auto toc = std::chrono::steady_clock::now();
        RoundStat stat;
        stat.round = round;
        stat.new_labels = res.state.label_count - before;
        stat.newly_labeled_s = count_labeled(res.state.labels_s) - labeled_s_before;
        stat.newly_labeled_t = count_labeled(res.state.labels_t) - labeled_t_before;
        stat.seconds = std::chrono::duration<double>(toc - tic).count();
        res.trace.push_back(stat);
        res.rounds = round;

        if (res.state.label_count == before) {
            res.converged = true;
            break;
        }
    }
    return res;
}

double label_histogram_similarity(const LabelState& state, std::span<const NodeId> eval_s,
                                  std::span<const NodeId> eval_t) {
    const std::size_t width = static_cast<std::size_t>(state.label_count) + 1;
    std::vector<std::int64_t> hist_s(width, 0), hist_t(width, 0);
    for (const NodeId i : eval_s) ++hist_s[static_cast<std::size_t>(state.labels_s.at(i))];
    for (const NodeId j : eval_t) ++hist_t[static_cast<std::size_t>(state.labels_t.at(j))];

    std::int64_t dot = 0, sq_s = 0, sq_t = 0;
    for (std::size_t l = 1; l < width; ++l) {  // bucket 0 (unlabeled) excluded
        dot += hist_s[l] * hist_t[l];
        sq_s += hist_s[l] * hist_s[l];
        sq_t += hist_t[l] * hist_t[l];
    }
    if (sq_s == 0 || sq_t == 0) return 0.0;
    // Product before sqrt: identical vectors give exactly 1.0.
    const double denom = std::sqrt(static_cast<double>(sq_s) * static_cast<double>(sq_t));
    const double v = static_cast<double>(dot) / denom;
    return std::min(1.0, std::max(0.0, v));
}

double coverage_ratio(const LabelState& state, std::span<const NodeId> eval_nodes, Side side) {
    if (eval_nodes.empty()) throw std::invalid_argument("coverage_ratio: empty eval set");
    const std::vector<LabelId>& labels = side == Side::s ? state.labels_s : state.labels_t;
    std::int64_t covered = 0;
    for (const NodeId i : eval_nodes) covered += labels.at(static_cast<std::size_t>(i)) != 0;
    return static_cast<double>(covered) / static_cast<double>(eval_nodes.size());
}

}  // namespace wlalign
