#include "wlalign/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include <json.hpp>

#include "wlalign/eval.hpp"
#include "wlalign/io.hpp"

namespace wlalign {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory: " + dir);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::string pct_dir(const char* axis, double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03d", axis, static_cast<int>(std::lround(pct * 100.0)));
    return buf;
}

struct LoadedPair {
    LoadedGraph s, t;
    std::unordered_map<std::int64_t, NodeId> to_dense_s, to_dense_t;
};

LoadedPair load_graph_pair(const ExperimentConfig& cfg) {
    if (cfg.s_edges.empty() || cfg.t_edges.empty())
        throw DataError("both --s-edges and --t-edges are required");
    LoadedPair pair;
    try {
        pair.s = load_edge_list(cfg.s_edges, false);
        pair.t = load_edge_list(cfg.t_edges, false);
    } catch (const std::runtime_error& e) {
        throw DataError(e.what());
    }
    for (std::size_t d = 0; d < pair.s.dense_to_original.size(); ++d)
        pair.to_dense_s[pair.s.dense_to_original[d]] = static_cast<NodeId>(d);
    for (std::size_t d = 0; d < pair.t.dense_to_original.size(); ++d)
        pair.to_dense_t[pair.t.dense_to_original[d]] = static_cast<NodeId>(d);
    return pair;
}

struct TranslatedPairs {
    std::vector<Edge> pairs;   // dense ids
    std::int64_t skipped = 0;  // pairs whose ids are absent from the loaded graphs
};

TranslatedPairs translate_pairs(const std::vector<std::pair<std::int64_t, std::int64_t>>& raw,
                                const LoadedPair& graphs, const std::string& what) {
    TranslatedPairs out;
    for (const auto& [s_orig, t_orig] : raw) {
        const auto si = graphs.to_dense_s.find(s_orig);
        const auto ti = graphs.to_dense_t.find(t_orig);
        if (si == graphs.to_dense_s.end() || ti == graphs.to_dense_t.end()) {
            ++out.skipped;
            continue;
        }
        out.pairs.emplace_back(si->second, ti->second);
    }
    if (out.skipped > 0)
        std::cerr << "warning: " << out.skipped << " " << what
                  << " pair(s) reference nodes absent from the edge lists, skipped\n";
    if (out.pairs.empty()) throw DataError(what + " file has no usable pairs");
    return out;
}

json seeds_json(const ExperimentConfig& cfg) {
    return json{{"master", cfg.seed},
                {"embedding_init", derive_seed(cfg.seed, 17)},
                {"anchor_split", derive_seed(cfg.seed, 3)}};
}

void write_json_file(const std::string& path, const json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

int auto_max_rounds(const ExperimentConfig& cfg, NodeId n_s, NodeId n_t) {
    if (cfg.max_rounds > 0) return cfg.max_rounds;
    return std::max(1, static_cast<int>(std::min(n_s, n_t)));
}

}  // namespace

void write_manifest(const std::string& out_dir, const ExperimentConfig& cfg,
                    const std::string& command) {
    json doc;
    doc["command"] = command;
    doc["config"] = to_map(cfg);
    doc["config_hash"] = config_hash(cfg);
    doc["seeds"] = seeds_json(cfg);
    write_json_file(out_dir + "/manifest.json", doc);
}

int cmd_synth(const ExperimentConfig& cfg) {
    if (cfg.synth_n < 1) throw DataError("synth: synth_n must be >= 1");
    ensure_dir(cfg.out_dir);
    ensure_dir(cfg.out_dir + "/pairs");

    const Graph base = generate_er(cfg.synth_n, cfg.synth_p, derive_seed(cfg.seed, 1));
    write_edge_list(cfg.out_dir + "/base.edges", base);

    const auto correspondence_original = [&] {
        std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
        for (NodeId i = 0; i < cfg.synth_n; ++i) pairs.emplace_back(i, i);
        return pairs;
    }();

    std::uint64_t stream = 100;
    const auto emit_pair = [&](const char* axis, double pct) {
        const double node_pct = axis == std::string("node") ? pct : 0.0;
        const double edge_pct = axis == std::string("node") ? 0.0 : pct;
        const auto [g_s, rec_s] = perturb(base, node_pct, edge_pct, derive_seed(cfg.seed, stream++),
                                          cfg.attachments_per_node);
        const auto [g_t, rec_t] = perturb(base, node_pct, edge_pct, derive_seed(cfg.seed, stream++),
                                          cfg.attachments_per_node);
        const AnchorSplit split =
            sample_anchors(identity_correspondence(cfg.synth_n), cfg.anchor_ratio,
                           derive_seed(cfg.seed, stream++), g_s.node_count(), g_t.node_count());

        const std::string dir = cfg.out_dir + "/pairs/" + pct_dir(axis, pct);
        ensure_dir(dir);
        write_edge_list(dir + "/s.edges", g_s);
        write_edge_list(dir + "/t.edges", g_t);
        write_pair_file(dir + "/correspondence.tsv", correspondence_original);

        const auto as_original = [](const std::vector<Edge>& pairs) {
            std::vector<std::pair<std::int64_t, std::int64_t>> out;
            out.reserve(pairs.size());
            for (const auto& [s, t] : pairs) out.emplace_back(s, t);
            return out;
        };
        write_pair_file(dir + "/anchors.tsv", as_original(split.anchors.pairs));
        write_pair_file(dir + "/test_pairs.tsv", as_original(split.test_pairs));
    };

    for (const double pct : cfg.node_grid) emit_pair("node", pct);
    for (const double pct : cfg.edge_grid) emit_pair("edge", pct);

    write_manifest(cfg.out_dir, cfg, "synth");
    return 0;
}

int cmd_relabel(const ExperimentConfig& cfg) {
    ensure_dir(cfg.out_dir);
    const LoadedPair graphs = load_graph_pair(cfg);
    if (cfg.anchors_file.empty()) throw DataError("relabel: --anchors is required");
    const TranslatedPairs anchors_raw =
        translate_pairs(read_pair_file(cfg.anchors_file), graphs, "anchor");
    const AnchorSet anchors = AnchorSet::create(anchors_raw.pairs, graphs.s.graph.node_count(),
                                                graphs.t.graph.node_count());

    const Stopwatch watch;
    const RelabelResult res = relabel_until_convergence(
        graphs.s.graph, graphs.t.graph, anchors, cfg.mode,
        auto_max_rounds(cfg, graphs.s.graph.node_count(), graphs.t.graph.node_count()));
    const double relabel_seconds = watch.seconds();

    // Label quality is reported over the correspondence members when given
    // (the non-augmented nodes of a synthetic pair), otherwise over all nodes.
    std::vector<NodeId> eval_s, eval_t;
    std::int64_t skipped_corr = 0;
    if (!cfg.correspondence_file.empty()) {
        const TranslatedPairs corr =
            translate_pairs(read_pair_file(cfg.correspondence_file), graphs, "correspondence");
        skipped_corr = corr.skipped;
        for (const auto& [s, t] : corr.pairs) {
            eval_s.push_back(s);
            eval_t.push_back(t);
        }
    } else {
        for (NodeId i = 0; i < graphs.s.graph.node_count(); ++i) eval_s.push_back(i);
        for (NodeId j = 0; j < graphs.t.graph.node_count(); ++j) eval_t.push_back(j);
    }

    write_id_map(cfg.out_dir + "/s.idmap.tsv", graphs.s.dense_to_original);
    write_id_map(cfg.out_dir + "/t.idmap.tsv", graphs.t.dense_to_original);
    write_label_dump(cfg.out_dir + "/labels.tsv", res.state);
    write_round_trace(cfg.out_dir + "/round_trace.csv", res.trace);

    json report;
    report["command"] = "relabel";
    report["config_hash"] = config_hash(cfg);
    report["converged"] = res.converged;
    report["rounds"] = res.rounds;
    report["mode"] = to_string(cfg.mode);
    report["label_count"] = res.state.label_count;
    report["anchor_count"] = anchors.size();
    report["label_histogram_similarity"] = label_histogram_similarity(res.state, eval_s, eval_t);
    report["coverage_s"] = coverage_ratio(res.state, eval_s, Side::s);
    report["coverage_t"] = coverage_ratio(res.state, eval_t, Side::t);
    report["eval_nodes_s"] = eval_s.size();
    report["eval_nodes_t"] = eval_t.size();
    report["skipped_anchor_pairs"] = anchors_raw.skipped;
    report["skipped_correspondence_pairs"] = skipped_corr;
    report["seeds"] = seeds_json(cfg);
    report["timings"] = json{{"relabel_seconds", relabel_seconds}};
    write_json_file(cfg.out_dir + "/relabel_report.json", report);

    write_manifest(cfg.out_dir, cfg, "relabel");
    if (!res.converged)
        std::cerr << "warning: relabeling did not converge within " << res.rounds << " rounds\n";
    return res.converged ? 0 : 3;
}

int cmd_align(const ExperimentConfig& cfg) {
    ensure_dir(cfg.out_dir);
    const LoadedPair graphs = load_graph_pair(cfg);
    const Graph& g_s = graphs.s.graph;
    const Graph& g_t = graphs.t.graph;
    if (cfg.anchors_file.empty()) throw DataError("align: --anchors is required");
    const TranslatedPairs ground_truth =
        translate_pairs(read_pair_file(cfg.anchors_file), graphs, "anchor");

    const AnchorSplit split = sample_anchors(ground_truth.pairs, cfg.train_ratio,
                                             derive_seed(cfg.seed, 3), g_s.node_count(),
                                             g_t.node_count());
    if (split.test_pairs.empty())
        throw DataError("align: train_ratio leaves no held-out test pairs");
    const AnchorSet& anchors = split.anchors;

    const bool trained = cfg.variant == Variant::full || cfg.variant == Variant::wo_wl ||
                         cfg.variant == Variant::wo_sim;

    LabelState state;
    std::vector<RoundStat> relabel_trace;
    std::vector<TraceRow> training_trace;
    bool converged = true;
    int rounds = 0;
    double train_seconds = 0.0, relabel_seconds = 0.0, rank_seconds = 0.0;

    std::vector<NodeId> queries_s, queries_t;
    for (const auto& [s, t] : split.test_pairs) {
        queries_s.push_back(s);
        queries_t.push_back(t);
    }

    AlignmentRanking ranking_st, ranking_ts;
    const int top_k = cfg.precision_max_n;
    const EmbeddingStore* store_out = nullptr;
    EmbeddingStore store;

    if (trained) {
        TrainConfig tc = cfg.train_config();
        if (cfg.variant == Variant::wo_wl) {
            tc.use_label_objective = false;
            tc.use_relabeling = false;
        } else if (cfg.variant == Variant::wo_sim) {
            tc.relabel_mode = RelabelMode::hard;
        }
        const Stopwatch watch;
        TrainResult res = train(g_s, g_t, anchors, tc);
        train_seconds = watch.seconds();
        store = std::move(res.store);
        state = std::move(res.state);
        training_trace = std::move(res.trace);
        relabel_trace = std::move(res.relabel_trace);
        converged = res.label_converged && res.objective_plateaued;
        rounds = res.rounds;
        store_out = &store;

        const Stopwatch rank_watch;
        ranking_st = rank_candidates(store, queries_s, Direction::s_to_t, top_k, anchors);
        ranking_ts = rank_candidates(store, queries_t, Direction::t_to_s, top_k, anchors);
        rank_seconds = rank_watch.seconds();
    } else {
        const RelabelMode mode =
            cfg.variant == Variant::wo_sim_rl ? RelabelMode::hard : cfg.mode;
        const Stopwatch watch;
        const RelabelResult res = relabel_until_convergence(
            g_s, g_t, anchors, mode,
            auto_max_rounds(cfg, g_s.node_count(), g_t.node_count()));
        relabel_seconds = watch.seconds();
        state = res.state;
        relabel_trace = res.trace;
        converged = res.converged;
        rounds = res.rounds;

        if (cfg.variant == Variant::wo_rl) {
            const TupleMatrix tp_s = propagate(g_s, state.labels_s, state.label_count);
            const TupleMatrix tp_t = propagate(g_t, state.labels_t, state.label_count);
            ranking_st = rank_by_tuple_similarity(tp_s, tp_t, queries_s, Direction::s_to_t, top_k,
                                                  anchors);
            ranking_ts = rank_by_tuple_similarity(tp_s, tp_t, queries_t, Direction::t_to_s, top_k,
                                                  anchors);
        } else {  // wo_sim_rl: alignment by shared compressed label
            ranking_st = rank_by_label(state, queries_s, Direction::s_to_t, top_k, anchors);
            ranking_ts = rank_by_label(state, queries_t, Direction::t_to_s, top_k, anchors);
        }
    }

    // Precision curve and RSA buckets over the held-out pairs.
    json precision_rows = json::array();
    std::string precision_csv = "N,precision\n";
    for (int n = 1; n <= cfg.precision_max_n; ++n) {
        const double p = precision_at_n(ranking_st, ranking_ts, split.test_pairs, n);
        precision_rows.push_back(json{{"n", n}, {"value", p}});
        precision_csv += std::to_string(n) + "," + format_g9(p) + "\n";
    }

    const std::vector<RsaBucket> buckets = rsa_bucket_report(
        g_s, g_t, split.test_pairs, ranking_st, ranking_ts, anchors, cfg.rsa_lambda);
    json bucket_rows = json::array();
    for (const RsaBucket& b : buckets)
        bucket_rows.push_back(json{{"rsa_min", b.rsa_min},
                                   {"rsa_max", b.rsa_max},
                                   {"count", b.count},
                                   {"precision_at_1", b.precision_at_1}});

    // Label quality over the ground-truth members (the shared nodes).
    std::vector<NodeId> eval_s, eval_t;
    for (const auto& [s, t] : ground_truth.pairs) {
        eval_s.push_back(s);
        eval_t.push_back(t);
    }

    write_id_map(cfg.out_dir + "/s.idmap.tsv", graphs.s.dense_to_original);
    write_id_map(cfg.out_dir + "/t.idmap.tsv", graphs.t.dense_to_original);
    write_label_dump(cfg.out_dir + "/labels.tsv", state);
    if (cfg.variant != Variant::wo_wl)
        write_round_trace(cfg.out_dir + "/round_trace.csv", relabel_trace);
    if (trained) {
        write_training_trace(cfg.out_dir + "/training_trace.csv", training_trace);
        json header;
        header["config_hash"] = config_hash(cfg);
        header["dim"] = cfg.dim;
        header["seeds"] = seeds_json(cfg);
        write_embeddings(cfg.out_dir + "/embeddings.tsv", *store_out, header.dump());
    }
    write_text(cfg.out_dir + "/precision.csv", precision_csv);

    json report;
    report["command"] = "align";
    report["variant"] = to_string(cfg.variant);
    report["config_hash"] = config_hash(cfg);
    report["converged"] = converged;
    report["rounds"] = rounds;
    report["label_count"] = state.label_count;
    report["anchor_count"] = anchors.size();
    report["test_pairs"] = split.test_pairs.size();
    report["skipped_pairs"] = ground_truth.skipped;
    report["precision"] = precision_rows;
    report["rsa_buckets"] = bucket_rows;
    report["rsa_lambda"] = cfg.rsa_lambda;
    report["label_histogram_similarity"] = label_histogram_similarity(state, eval_s, eval_t);
    report["coverage_s"] = coverage_ratio(state, eval_s, Side::s);
    report["coverage_t"] = coverage_ratio(state, eval_t, Side::t);
    report["seeds"] = seeds_json(cfg);
    report["timings"] = json{{"train_seconds", train_seconds},
                             {"relabel_seconds", relabel_seconds},
                             {"rank_seconds", rank_seconds}};
    write_json_file(cfg.out_dir + "/report.json", report);

    write_manifest(cfg.out_dir, cfg, "align");
    if (!converged) std::cerr << "warning: pipeline did not converge within its budget\n";
    return converged ? 0 : 3;
}

}  // namespace wlalign
