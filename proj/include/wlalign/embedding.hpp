#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "wlalign/graph.hpp"
#include "wlalign/relabel.hpp"
#include "wlalign/rng.hpp"

namespace wlalign {

// The three parameter tables of the model: node vectors u, input-context
// vectors u', output-context vectors u''.
enum class Table : int { node = 0, in_context = 1, out_context = 2 };
inline constexpr int kTableCount = 3;

// Per-node d-vectors for both networks, with anchor weight-sharing: both
// members of an anchor pair resolve to the same parameter slot, so their
// vectors are one and the same memory.
class EmbeddingStore {
public:
    static EmbeddingStore init(NodeId n_s, NodeId n_t, const AnchorSet& anchors, int dim,
                               std::uint64_t seed, bool share_anchor_slots = true);

    int dim() const { return dim_; }
    std::int32_t slot_count() const { return slots_; }
    NodeId n_s() const { return static_cast<NodeId>(slot_s_.size()); }
    NodeId n_t() const { return static_cast<NodeId>(slot_t_.size()); }

    std::int32_t slot_of(Side side, NodeId node) const {
        const auto& map = side == Side::s ? slot_s_ : slot_t_;
        return map.at(static_cast<std::size_t>(node));
    }

    std::span<const double> vec(Table table, Side side, NodeId node) const {
        return slot_vec(table, slot_of(side, node));
    }
    std::span<const double> slot_vec(Table table, std::int32_t slot) const {
        const auto& tab = tables_[static_cast<std::size_t>(table)];
        return {tab.data() + static_cast<std::size_t>(slot) * dim_, static_cast<std::size_t>(dim_)};
    }
    std::span<double> slot_vec_mut(Table table, std::int32_t slot) {
        auto& tab = tables_[static_cast<std::size_t>(table)];
        return {tab.data() + static_cast<std::size_t>(slot) * dim_, static_cast<std::size_t>(dim_)};
    }

private:
    int dim_ = 0;
    std::int32_t slots_ = 0;
    std::vector<std::int32_t> slot_s_, slot_t_;
    std::array<std::vector<double>, kTableCount> tables_;
};

// Spec-facing alias for the factory above.
EmbeddingStore init_embeddings(NodeId n_s, NodeId n_t, const AnchorSet& anchors, int dim,
                               std::uint64_t seed, bool share_anchor_slots = true);

// Sparse slot-indexed gradient accumulator over the three tables.
class GradientBuffer {
public:
    explicit GradientBuffer(int dim) : dim_(dim) {}

    // grads[table][slot] += scale * x
    void axpy(Table table, std::int32_t slot, double scale, std::span<const double> x);
    void clear();

    const std::unordered_map<std::int32_t, std::vector<double>>& table(Table t) const {
        return grads_[static_cast<std::size_t>(t)];
    }
    int dim() const { return dim_; }

private:
    int dim_;
    std::array<std::unordered_map<std::int32_t, std::vector<double>>, kTableCount> grads_;
};

// One term of the label objective: (2*polarity - 1) * cos(u_s, u_t),
// maximized by the trainer. For an aliased pair (same slot) the cosine is
// constant 1, so the value is +/-1 and the gradient is exactly zero.
struct LabelObjective {
    double value = 0.0;
    std::vector<double> grad_s;  // d objective / d u(s_node)
    std::vector<double> grad_t;  // d objective / d u(t_node)
};
LabelObjective label_objective_grad(const EmbeddingStore& store, NodeId s_node, NodeId t_node,
                                    int polarity);

// One term of the context objective on a (possibly negative) directed pair
// i -> j of one network: polarity 1 gives log s(u_i . u'_j) + log s(u''_i . u_j),
// polarity 0 the same with negated dot products. Maximized by the trainer.
struct ContextObjective {
    double value = 0.0;
    std::vector<double> grad_u_i;     // d / d u(i)
    std::vector<double> grad_uin_j;   // d / d u'(j)
    std::vector<double> grad_uout_i;  // d / d u''(i)
    std::vector<double> grad_u_j;     // d / d u(j)
};
ContextObjective context_objective_grad(const EmbeddingStore& store, Side network, NodeId i,
                                        NodeId j, int polarity);

struct LabelEntry {
    NodeId s_node = 0;
    NodeId t_node = 0;
    int polarity = 1;  // 1 = same label, 0 = different label
};

struct ContextEntry {
    Side network = Side::s;
    NodeId i = 0;
    NodeId j = 0;
    int polarity = 1;  // 1 = directed edge, 0 = sampled non-context
};

struct TrainingBatch {
    std::vector<LabelEntry> label_pairs;
    std::vector<ContextEntry> context_pairs;
    std::int64_t index = 0;
    std::uint64_t seed = 0;
};

// Accumulates one entry's gradients into buf and returns the objective value.
double accumulate_label_entry(const EmbeddingStore& store, const LabelEntry& entry,
                              GradientBuffer& buf);
double accumulate_context_entry(const EmbeddingStore& store, const ContextEntry& entry,
                                GradientBuffer& buf);

struct BatchValue {
    double label_value = 0.0;
    double context_value = 0.0;
    double combined() const { return label_value + context_value; }
};
BatchValue accumulate_batch(const EmbeddingStore& store, const TrainingBatch& batch,
                            GradientBuffer& buf);

struct AdamParams {
    double lr = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Hand-rolled sparse Adam over the embedding tables, ascending the objective:
// param += lr * mhat / (sqrt(vhat) + eps). The step counter is global (one
// increment per applied batch); slots touched for the first time late in
// training use the global bias correction, as is standard for sparse Adam.
class AdamState {
public:
    AdamState(AdamParams params, int dim) : params_(params), dim_(dim) {}

    void apply(const GradientBuffer& grads, EmbeddingStore& store);
    std::int64_t step_count() const { return t_; }
    const AdamParams& params() const { return params_; }

private:
    struct Moments {
        std::vector<double> m, v;
    };
    AdamParams params_;
    int dim_;
    std::int64_t t_ = 0;
    std::array<std::unordered_map<std::int32_t, Moments>, kTableCount> moments_;
};

inline void adam_step(AdamState& adam, EmbeddingStore& store, const GradientBuffer& grads) {
    adam.apply(grads, store);
}

// Deterministic stream of training batches. Each batch holds, per network,
// batch_size positive context pairs drawn uniformly from the directed edges
// with k_context negatives each (target resampled uniformly until it is not
// a true context), and batch_size positive label pairs drawn uniformly over
// all cross-network pairs with equal nonzero labels, with k_label negatives
// each (t-node resampled until its label differs). With unigram_negatives,
// context negatives are drawn from the degree^0.75 distribution instead of
// the uniform one.
class BatchSampler {
public:
    BatchSampler(const Graph& g_s, const Graph& g_t, const LabelState& state, int k_label,
                 int k_context, int batch_size, std::uint64_t seed, bool use_label_pairs = true,
                 bool unigram_negatives = false);

    TrainingBatch next();
    bool label_pairs_available() const { return !groups_.empty(); }

private:
    NodeId draw_context_negative(Side side, NodeId i);

    const Graph* g_s_;
    const Graph* g_t_;
    std::vector<Edge> arcs_s_, arcs_t_;

    struct LabelGroup {
        std::vector<NodeId> s_nodes, t_nodes;
    };
    std::vector<LabelGroup> groups_;
    std::vector<std::int64_t> pair_cum_;       // cumulative |S_l|*|T_l| per group
    std::vector<std::int64_t> t_label_count_;  // t-side holders per label id
    std::vector<LabelId> label_of_t_;

    std::vector<double> unigram_cum_s_, unigram_cum_t_;  // degree^0.75 CDF, if enabled

    int k_label_, k_context_, batch_size_;
    bool use_labels_, unigram_;
    Rng rng_;
    std::uint64_t seed_;
    std::int64_t index_ = 0;
};

// Spec-facing alias: the batch stream for the given inputs.
BatchSampler sample_batches(const Graph& g_s, const Graph& g_t, const LabelState& state,
                            int k_label, int k_context, int batch_size, std::uint64_t seed);

enum class Schedule { interleaved, fcl };

struct TrainConfig {
    int dim = 128;
    AdamParams adam;  // lr = 0.05
    int batch_size = 1000;
    int k_label = 1;
    int k_context = 20;
    int epochs_per_round = 50;  // E
    int batches_per_epoch = 0;  // 0 = ceil(total arcs / (2 * batch_size))
    Schedule schedule = Schedule::interleaved;
    RelabelMode relabel_mode = RelabelMode::soft;
    bool use_label_objective = true;
    bool use_relabeling = true;
    bool share_anchor_slots = true;
    bool unigram_negatives = false;
    int max_outer_rounds = 30;
    int fcl_epochs = 3000;  // representation-learning iterations after full convergence
    double plateau_tol = 1e-3;
    int plateau_window = 10;
    std::uint64_t seed = 1;
};

struct TraceRow {
    int round = 0;
    int epoch = 0;  // cumulative over the whole run
    LabelId label_count = 0;
    std::optional<double> label_objective;  // absent when the label term is off
    double context_objective = 0.0;
};

struct TrainResult {
    EmbeddingStore store;
    LabelState state;
    std::vector<TraceRow> trace;
    std::vector<RoundStat> relabel_trace;
    bool label_converged = false;
    bool objective_plateaued = false;
    int rounds = 0;
};

// Algorithm: interleaved schedule repeats {one relabel round; rebuild batch
// stream; E epochs of ascent} until the label set has converged and the
// combined objective has plateaued (the means of the last two plateau_window
// epoch stretches differ by less than plateau_tol relatively); the FCL
// schedule relabels to full convergence first and then trains for a fixed
// fcl_epochs budget.
TrainResult train(const Graph& g_s, const Graph& g_t, const AnchorSet& anchors,
                  const TrainConfig& cfg);

}  // namespace wlalign
