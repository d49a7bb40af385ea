#include "wlalign/embedding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "wlalign/rng.hpp"

namespace wlalign {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

// Shared math for the label term on distinct slots:
// value = sign * cos(x, y); grad_x = a*y + bx*x; grad_y = a*x + by*y.
struct LabelCoeffs {
    double value, a, bx, by;
};

LabelCoeffs label_coeffs(std::span<const double> x, std::span<const double> y, int polarity) {
    const double nx2 = dot(x, x);
    const double ny2 = dot(y, y);
    if (nx2 == 0.0 || ny2 == 0.0)
        throw std::domain_error("label objective: zero-norm embedding vector");
    const double denom = std::sqrt(nx2 * ny2);
    const double cos = dot(x, y) / denom;
    const double sign = 2.0 * polarity - 1.0;
    return {sign * cos, sign / denom, -sign * cos / nx2, -sign * cos / ny2};
}

struct ContextCoeffs {
    double value, c1, c2;
};

ContextCoeffs context_coeffs(double x1, double x2, int polarity) {
    if (polarity == 1)
        return {log_sigmoid(x1) + log_sigmoid(x2), 1.0 - sigmoid(x1), 1.0 - sigmoid(x2)};
    return {log_sigmoid(-x1) + log_sigmoid(-x2), -sigmoid(x1), -sigmoid(x2)};
}

}  // namespace

EmbeddingStore EmbeddingStore::init(NodeId n_s, NodeId n_t, const AnchorSet& anchors, int dim,
                                    std::uint64_t seed, bool share_anchor_slots) {
    if (dim < 1) throw std::invalid_argument("init_embeddings: dim must be >= 1");

    EmbeddingStore store;
    store.dim_ = dim;
    store.slot_s_.resize(static_cast<std::size_t>(n_s));
    store.slot_t_.assign(static_cast<std::size_t>(n_t), -1);
    for (NodeId i = 0; i < n_s; ++i) store.slot_s_[static_cast<std::size_t>(i)] = i;

    std::int32_t next_slot = n_s;
    if (share_anchor_slots) {
        for (const auto& [s_node, t_node] : anchors.pairs) {
            if (s_node >= n_s || t_node >= n_t)
                throw std::invalid_argument("init_embeddings: anchor out of range");
            store.slot_t_[static_cast<std::size_t>(t_node)] =
                store.slot_s_[static_cast<std::size_t>(s_node)];
        }
    }
    for (NodeId j = 0; j < n_t; ++j)
        if (store.slot_t_[static_cast<std::size_t>(j)] < 0)
            store.slot_t_[static_cast<std::size_t>(j)] = next_slot++;
    store.slots_ = next_slot;

    Rng rng(seed);
    const double half = 0.5 / dim;
    for (auto& table : store.tables_) {
        table.resize(static_cast<std::size_t>(store.slots_) * dim);
        for (double& v : table) v = rng.next_double() / dim - half;  // uniform [-0.5/d, 0.5/d)
    }
    return store;
}

EmbeddingStore init_embeddings(NodeId n_s, NodeId n_t, const AnchorSet& anchors, int dim,
                               std::uint64_t seed, bool share_anchor_slots) {
    return EmbeddingStore::init(n_s, n_t, anchors, dim, seed, share_anchor_slots);
}

void GradientBuffer::axpy(Table table, std::int32_t slot, double scale,
                          std::span<const double> x) {
    auto& g = grads_[static_cast<std::size_t>(table)][slot];
    if (g.empty()) g.assign(static_cast<std::size_t>(dim_), 0.0);
    for (std::size_t k = 0; k < x.size(); ++k) g[k] += scale * x[k];
}

void GradientBuffer::clear() {
    for (auto& table : grads_) table.clear();
}

LabelObjective label_objective_grad(const EmbeddingStore& store, NodeId s_node, NodeId t_node,
                                    int polarity) {
    LabelObjective out;
    const std::size_t d = static_cast<std::size_t>(store.dim());
    out.grad_s.assign(d, 0.0);
    out.grad_t.assign(d, 0.0);
    if (store.slot_of(Side::s, s_node) == store.slot_of(Side::t, t_node)) {
        out.value = 2.0 * polarity - 1.0;  // cos of a vector with itself is constant 1
        return out;
    }
    const auto x = store.vec(Table::node, Side::s, s_node);
    const auto y = store.vec(Table::node, Side::t, t_node);
    const LabelCoeffs c = label_coeffs(x, y, polarity);
    out.value = c.value;
    for (std::size_t k = 0; k < d; ++k) {
        out.grad_s[k] = c.a * y[k] + c.bx * x[k];
        out.grad_t[k] = c.a * x[k] + c.by * y[k];
    }
    return out;
}

ContextObjective context_objective_grad(const EmbeddingStore& store, Side network, NodeId i,
                                        NodeId j, int polarity) {
    const auto u_i = store.vec(Table::node, network, i);
    const auto uin_j = store.vec(Table::in_context, network, j);
    const auto uout_i = store.vec(Table::out_context, network, i);
    const auto u_j = store.vec(Table::node, network, j);
    const ContextCoeffs c = context_coeffs(dot(u_i, uin_j), dot(uout_i, u_j), polarity);

    ContextObjective out;
    out.value = c.value;
    const std::size_t d = static_cast<std::size_t>(store.dim());
    out.grad_u_i.resize(d);
    out.grad_uin_j.resize(d);
    out.grad_uout_i.resize(d);
    out.grad_u_j.resize(d);
    // When i == j these are per-argument partials; slot-level gradients are
    // their sum, which is what the buffer path accumulates.
    for (std::size_t k = 0; k < d; ++k) {
        out.grad_u_i[k] = c.c1 * uin_j[k];
        out.grad_uin_j[k] = c.c1 * u_i[k];
        out.grad_uout_i[k] = c.c2 * u_j[k];
        out.grad_u_j[k] = c.c2 * uout_i[k];
    }
    return out;
}

double accumulate_label_entry(const EmbeddingStore& store, const LabelEntry& entry,
                              GradientBuffer& buf) {
    const std::int32_t slot_s = store.slot_of(Side::s, entry.s_node);
    const std::int32_t slot_t = store.slot_of(Side::t, entry.t_node);
    if (slot_s == slot_t) return 2.0 * entry.polarity - 1.0;  // constant, zero gradient

    const auto x = store.slot_vec(Table::node, slot_s);
    const auto y = store.slot_vec(Table::node, slot_t);
    const LabelCoeffs c = label_coeffs(x, y, entry.polarity);
    buf.axpy(Table::node, slot_s, c.a, y);
    buf.axpy(Table::node, slot_s, c.bx, x);
    buf.axpy(Table::node, slot_t, c.a, x);
    buf.axpy(Table::node, slot_t, c.by, y);
    return c.value;
}

double accumulate_context_entry(const EmbeddingStore& store, const ContextEntry& entry,
                                GradientBuffer& buf) {
    const std::int32_t slot_i = store.slot_of(entry.network, entry.i);
    const std::int32_t slot_j = store.slot_of(entry.network, entry.j);
    const auto u_i = store.slot_vec(Table::node, slot_i);
    const auto uin_j = store.slot_vec(Table::in_context, slot_j);
    const auto uout_i = store.slot_vec(Table::out_context, slot_i);
    const auto u_j = store.slot_vec(Table::node, slot_j);
    const ContextCoeffs c = context_coeffs(dot(u_i, uin_j), dot(uout_i, u_j), entry.polarity);
    buf.axpy(Table::node, slot_i, c.c1, uin_j);
    buf.axpy(Table::in_context, slot_j, c.c1, u_i);
    buf.axpy(Table::out_context, slot_i, c.c2, u_j);
    buf.axpy(Table::node, slot_j, c.c2, uout_i);
    return c.value;
}

BatchValue accumulate_batch(const EmbeddingStore& store, const TrainingBatch& batch,
                            GradientBuffer& buf) {
    BatchValue value;
    for (const LabelEntry& e : batch.label_pairs)
        value.label_value += accumulate_label_entry(store, e, buf);
    for (const ContextEntry& e : batch.context_pairs)
        value.context_value += accumulate_context_entry(store, e, buf);
    return value;
}

void AdamState::apply(const GradientBuffer& grads, EmbeddingStore& store) {
    ++t_;
    const double b1c = 1.0 - std::pow(params_.beta1, static_cast<double>(t_));
    const double b2c = 1.0 - std::pow(params_.beta2, static_cast<double>(t_));

    for (int ti = 0; ti < kTableCount; ++ti) {
        const Table table = static_cast<Table>(ti);
        for (const auto& [slot, g] : grads.table(table)) {
            for (const double gk : g)
                if (!std::isfinite(gk))
                    throw std::runtime_error("adam_step: non-finite gradient at table " +
                                             std::to_string(ti) + " slot " + std::to_string(slot));
            Moments& mom = moments_[static_cast<std::size_t>(ti)][slot];
            if (mom.m.empty()) {
                mom.m.assign(static_cast<std::size_t>(dim_), 0.0);
                mom.v.assign(static_cast<std::size_t>(dim_), 0.0);
            }
            auto param = store.slot_vec_mut(table, slot);
            for (std::size_t k = 0; k < g.size(); ++k) {
                mom.m[k] = params_.beta1 * mom.m[k] + (1.0 - params_.beta1) * g[k];
                mom.v[k] = params_.beta2 * mom.v[k] + (1.0 - params_.beta2) * g[k] * g[k];
                const double mhat = mom.m[k] / b1c;
                const double vhat = mom.v[k] / b2c;
                param[k] += params_.lr * mhat / (std::sqrt(vhat) + params_.eps);
            }
        }
    }
}

BatchSampler::BatchSampler(const Graph& g_s, const Graph& g_t, const LabelState& state,
                           int k_label, int k_context, int batch_size, std::uint64_t seed,
                           bool use_label_pairs, bool unigram_negatives)
    : g_s_(&g_s),
      g_t_(&g_t),
      k_label_(k_label),
      k_context_(k_context),
      batch_size_(batch_size),
      use_labels_(use_label_pairs),
      unigram_(unigram_negatives),
      rng_(seed),
      seed_(seed) {
    if (k_label < 0 || k_context < 0 || batch_size < 1)
        throw std::invalid_argument("sample_batches: bad batch parameters");
    arcs_s_ = g_s.arcs();
    arcs_t_ = g_t.arcs();

    if (use_labels_) {
        std::unordered_map<LabelId, LabelGroup> by_label;
        for (std::size_t i = 0; i < state.labels_s.size(); ++i)
            if (state.labels_s[i] != 0)
                by_label[state.labels_s[i]].s_nodes.push_back(static_cast<NodeId>(i));
        for (std::size_t j = 0; j < state.labels_t.size(); ++j)
            if (state.labels_t[j] != 0)
                by_label[state.labels_t[j]].t_nodes.push_back(static_cast<NodeId>(j));

        std::vector<LabelId> labels;
        for (const auto& [label, group] : by_label)
            if (!group.s_nodes.empty() && !group.t_nodes.empty()) labels.push_back(label);
        std::sort(labels.begin(), labels.end());

        std::int64_t cum = 0;
        for (const LabelId label : labels) {
            LabelGroup& g = by_label[label];
            cum += static_cast<std::int64_t>(g.s_nodes.size()) *
                   static_cast<std::int64_t>(g.t_nodes.size());
            pair_cum_.push_back(cum);
            groups_.push_back(std::move(g));
        }
        if (groups_.empty())
            std::cerr << "warning: no labeled pairs available, batches are context-only\n";

        label_of_t_ = state.labels_t;
        t_label_count_.assign(static_cast<std::size_t>(state.label_count) + 1, 0);
        for (const LabelId l : state.labels_t)
            if (l != 0) ++t_label_count_[static_cast<std::size_t>(l)];
    }

    if (unigram_) {
        const auto build_cdf = [](const Graph& g, std::vector<double>& cum) {
            cum.resize(static_cast<std::size_t>(g.node_count()));
            double acc = 0.0;
            for (NodeId i = 0; i < g.node_count(); ++i) {
                acc += std::pow(static_cast<double>(g.out_degree(i)), 0.75);
                cum[static_cast<std::size_t>(i)] = acc;
            }
        };
        build_cdf(g_s, unigram_cum_s_);
        build_cdf(g_t, unigram_cum_t_);
    }
}

NodeId BatchSampler::draw_context_negative(Side side, NodeId i) {
    const Graph& g = side == Side::s ? *g_s_ : *g_t_;
    const std::vector<double>& cum = side == Side::s ? unigram_cum_s_ : unigram_cum_t_;
    for (;;) {
        NodeId j;
        if (unigram_ && !cum.empty() && cum.back() > 0.0) {
            const double r = rng_.next_double() * cum.back();
            j = static_cast<NodeId>(std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
            if (j >= g.node_count()) j = g.node_count() - 1;
        } else {
            j = static_cast<NodeId>(rng_.next_below(static_cast<std::uint64_t>(g.node_count())));
        }
        if (!g.has_arc(i, j)) return j;  // j == i qualifies: self-arcs never exist
    }
}

TrainingBatch BatchSampler::next() {
    TrainingBatch batch;
    batch.index = index_++;
    batch.seed = seed_;

    if (use_labels_ && !groups_.empty()) {
        const std::int64_t total_pairs = pair_cum_.back();
        const NodeId n_t = g_t_->node_count();
        for (int k = 0; k < batch_size_; ++k) {
            const std::int64_t r =
                static_cast<std::int64_t>(rng_.next_below(static_cast<std::uint64_t>(total_pairs)));
            const std::size_t gi = static_cast<std::size_t>(
                std::upper_bound(pair_cum_.begin(), pair_cum_.end(), r) - pair_cum_.begin());
            const LabelGroup& group = groups_[gi];
            const std::int64_t base = gi == 0 ? 0 : pair_cum_[gi - 1];
            const std::int64_t offset = r - base;
            const auto t_size = static_cast<std::int64_t>(group.t_nodes.size());
            const NodeId s_node = group.s_nodes[static_cast<std::size_t>(offset / t_size)];
            const NodeId t_node = group.t_nodes[static_cast<std::size_t>(offset % t_size)];
            batch.label_pairs.push_back({s_node, t_node, 1});

            const LabelId label = label_of_t_[static_cast<std::size_t>(t_node)];
            const std::int64_t eligible = n_t - t_label_count_[static_cast<std::size_t>(label)];
            if (eligible <= 0) continue;  // every t-node shares this label; no negatives exist
            for (int kk = 0; kk < k_label_; ++kk) {
                for (;;) {
                    const NodeId cand = static_cast<NodeId>(
                        rng_.next_below(static_cast<std::uint64_t>(n_t)));
                    if (label_of_t_[static_cast<std::size_t>(cand)] != label) {
                        batch.label_pairs.push_back({s_node, cand, 0});
                        break;
                    }
                }
            }
        }
    }

    for (const Side side : {Side::s, Side::t}) {
        const std::vector<Edge>& arcs = side == Side::s ? arcs_s_ : arcs_t_;
        if (arcs.empty()) continue;
        for (int k = 0; k < batch_size_; ++k) {
            const Edge& arc =
                arcs[static_cast<std::size_t>(rng_.next_below(arcs.size()))];
            batch.context_pairs.push_back({side, arc.first, arc.second, 1});
            for (int kk = 0; kk < k_context_; ++kk)
                batch.context_pairs.push_back(
                    {side, arc.first, draw_context_negative(side, arc.first), 0});
        }
    }
    return batch;
}

BatchSampler sample_batches(const Graph& g_s, const Graph& g_t, const LabelState& state,
                            int k_label, int k_context, int batch_size, std::uint64_t seed) {
    return BatchSampler(g_s, g_t, state, k_label, k_context, batch_size, seed);
}

namespace {

int auto_batches_per_epoch(const TrainConfig& cfg, const Graph& g_s, const Graph& g_t) {
    if (cfg.batches_per_epoch > 0) return cfg.batches_per_epoch;
    const double total = static_cast<double>(g_s.arc_count() + g_t.arc_count());
    const int bpe = static_cast<int>(std::ceil(total / (2.0 * cfg.batch_size)));
    return bpe > 0 ? bpe : 1;
}

// Relative change between the means of the last two `window`-epoch stretches.
// Window means, rather than raw epoch values, keep minibatch noise from
// masking an objective that has stopped moving.
bool plateaued(const std::vector<double>& values, int window, double tol) {
    const auto w = static_cast<std::size_t>(window);
    if (values.size() < 2 * w) return false;
    double recent = 0.0, previous = 0.0;
    for (std::size_t k = values.size() - w; k < values.size(); ++k) recent += values[k];
    for (std::size_t k = values.size() - 2 * w; k < values.size() - w; ++k) previous += values[k];
    recent /= static_cast<double>(window);
    previous /= static_cast<double>(window);
    return std::abs(recent - previous) < tol * std::max(std::abs(previous), 1e-12);
}

}  // namespace

TrainResult train(const Graph& g_s, const Graph& g_t, const AnchorSet& anchors,
                  const TrainConfig& cfg) {
    TrainResult res;
    res.store = init_embeddings(g_s.node_count(), g_t.node_count(), anchors, cfg.dim,
                                derive_seed(cfg.seed, 17), cfg.share_anchor_slots);
    res.state = init_labels(anchors, g_s.node_count(), g_t.node_count());
    AdamState adam(cfg.adam, cfg.dim);
    GradientBuffer buf(cfg.dim);
    const int bpe = auto_batches_per_epoch(cfg, g_s, g_t);
    int total_epochs = 0;
    std::vector<double> epoch_values;

    const auto run_epoch = [&](BatchSampler& sampler, int round) {
        ++total_epochs;
        double label_value = 0.0, context_value = 0.0;
        for (int b = 0; b < bpe; ++b) {
            const TrainingBatch batch = sampler.next();
            buf.clear();
            const BatchValue v = accumulate_batch(res.store, batch, buf);
            adam.apply(buf, res.store);
            label_value += v.label_value;
            context_value += v.context_value;
        }
        label_value /= bpe;
        context_value /= bpe;
        TraceRow row;
        row.round = round;
        row.epoch = total_epochs;
        row.label_count = res.state.label_count;
        if (cfg.use_label_objective) row.label_objective = label_value;
        row.context_objective = context_value;
        res.trace.push_back(row);
        epoch_values.push_back(label_value + context_value);
    };

    if (cfg.schedule == Schedule::fcl) {
        const NodeId min_n = std::min(g_s.node_count(), g_t.node_count());
        const int max_rounds = std::max(1, static_cast<int>(min_n));
        if (cfg.use_relabeling) {
            RelabelResult rr =
                relabel_until_convergence(g_s, g_t, anchors, cfg.relabel_mode, max_rounds);
            res.state = std::move(rr.state);
            res.relabel_trace = std::move(rr.trace);
            res.label_converged = rr.converged;
            res.rounds = rr.rounds;
        } else {
            res.label_converged = true;
        }
        BatchSampler sampler(g_s, g_t, res.state, cfg.k_label, cfg.k_context, cfg.batch_size,
                             derive_seed(cfg.seed, 1000), cfg.use_label_objective,
                             cfg.unigram_negatives);
        for (int e = 0; e < cfg.fcl_epochs; ++e) run_epoch(sampler, res.rounds);
        res.objective_plateaued = true;  // fixed budget completed
        return res;
    }

    HashRuleTable rules(res.state.label_count);
    bool label_converged = !cfg.use_relabeling;
    for (int round = 1; round <= cfg.max_outer_rounds; ++round) {
        res.rounds = round;
        if (cfg.use_relabeling && !label_converged) {
            const LabelId before = res.state.label_count;
            const auto count_labeled = [](const std::vector<LabelId>& labels) {
                std::int64_t n = 0;
                for (const LabelId l : labels) n += l != 0;
                return n;
            };
            const std::int64_t ls = count_labeled(res.state.labels_s);
            const std::int64_t lt = count_labeled(res.state.labels_t);
            const auto tic = std::chrono::steady_clock::now();
            res.state = cfg.relabel_mode == RelabelMode::soft
                            ? soft_relabel_round(g_s, g_t, res.state)
                            : hard_relabel_round(g_s, g_t, res.state, rules);
            const auto toc = std::chrono::steady_clock::now();
            RoundStat stat;
            stat.round = round;
            stat.new_labels = res.state.label_count - before;
            stat.newly_labeled_s = count_labeled(res.state.labels_s) - ls;
            stat.newly_labeled_t = count_labeled(res.state.labels_t) - lt;
            stat.seconds = std::chrono::duration<double>(toc - tic).count();
            res.relabel_trace.push_back(stat);
            if (res.state.label_count == before) label_converged = true;
        }

        BatchSampler sampler(g_s, g_t, res.state, cfg.k_label, cfg.k_context, cfg.batch_size,
                             derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(round)),
                             cfg.use_label_objective, cfg.unigram_negatives);
        for (int e = 0; e < cfg.epochs_per_round; ++e) run_epoch(sampler, round);

        if (label_converged && plateaued(epoch_values, cfg.plateau_window, cfg.plateau_tol)) {
            res.objective_plateaued = true;
            break;
        }
    }
    res.label_converged = label_converged;
    return res;
}

}  // namespace wlalign
