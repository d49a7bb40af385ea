#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "wlalign/config.hpp"
#include "wlalign/eval.hpp"
#include "wlalign/io.hpp"
#include "wlalign/pipeline.hpp"

namespace py = pybind11;
using namespace wlalign;

namespace {

Graph graph_from_edges(NodeId n, const std::vector<Edge>& edges, bool directed) {
    return Graph::from_edges(n, edges, directed);
}

ExperimentConfig config_from_dict(const py::dict& overrides) {
    std::map<std::string, std::string> map;
    for (const auto& item : overrides)
        map[py::cast<std::string>(item.first)] = py::cast<std::string>(py::str(item.second));
    return config_from_map(map);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "cross-network node alignment: WL relabeling + embedding learning";

    py::register_exception<DataError>(m, "DataError");

    py::enum_<Side>(m, "Side").value("s", Side::s).value("t", Side::t);
    py::enum_<RelabelMode>(m, "RelabelMode")
        .value("soft", RelabelMode::soft)
        .value("hard", RelabelMode::hard);
    py::enum_<Schedule>(m, "Schedule")
        .value("interleaved", Schedule::interleaved)
        .value("fcl", Schedule::fcl);
    py::enum_<Direction>(m, "Direction")
        .value("s_to_t", Direction::s_to_t)
        .value("t_to_s", Direction::t_to_s);

    py::class_<Graph>(m, "Graph")
        .def(py::init(&graph_from_edges), py::arg("n"), py::arg("edges"), py::arg("directed"))
        .def_property_readonly("node_count", &Graph::node_count)
        .def_property_readonly("arc_count", &Graph::arc_count)
        .def_property_readonly("directed", &Graph::directed)
        .def("undirected_edge_count", &Graph::undirected_edge_count)
        .def("successors",
             [](const Graph& g, NodeId i) {
                 const auto s = g.successors(i);
                 return std::vector<NodeId>(s.begin(), s.end());
             })
        .def("predecessors",
             [](const Graph& g, NodeId i) {
                 const auto s = g.predecessors(i);
                 return std::vector<NodeId>(s.begin(), s.end());
             })
        .def("has_arc", &Graph::has_arc)
        .def("arcs", &Graph::arcs)
        .def("undirected_edges", &Graph::undirected_edges)
        .def("to_bidirected", &Graph::to_bidirected);

    py::class_<AnchorSet>(m, "AnchorSet")
        .def(py::init([](const std::vector<Edge>& pairs, NodeId n_s, NodeId n_t) {
                 return AnchorSet::create(pairs, n_s, n_t);
             }),
             py::arg("pairs"), py::arg("n_s"), py::arg("n_t"))
        .def_readonly("pairs", &AnchorSet::pairs)
        .def("__len__", &AnchorSet::size);

    py::class_<LabelState>(m, "LabelState")
        .def_readonly("labels_s", &LabelState::labels_s)
        .def_readonly("labels_t", &LabelState::labels_t)
        .def_readonly("label_count", &LabelState::label_count);

    py::class_<RoundStat>(m, "RoundStat")
        .def_readonly("round", &RoundStat::round)
        .def_readonly("new_labels", &RoundStat::new_labels)
        .def_readonly("seconds", &RoundStat::seconds);

    py::class_<RelabelResult>(m, "RelabelResult")
        .def_readonly("state", &RelabelResult::state)
        .def_readonly("converged", &RelabelResult::converged)
        .def_readonly("rounds", &RelabelResult::rounds)
        .def_readonly("trace", &RelabelResult::trace);

    m.def("load_edge_list",
          [](const std::string& path, bool directed) {
              LoadedGraph lg = load_edge_list(path, directed);
              return py::make_tuple(std::move(lg.graph), std::move(lg.dense_to_original));
          },
          py::arg("path"), py::arg("directed") = false,
          "Reads an edge list; returns (graph, dense_to_original).");
    m.def("generate_er", &generate_er, py::arg("n"), py::arg("p"), py::arg("seed"));
    m.def("perturb",
          [](const Graph& g, double node_pct, double edge_pct, std::uint64_t seed,
             int attachments_per_node) {
              auto [grown, record] = perturb(g, node_pct, edge_pct, seed, attachments_per_node);
              return py::make_tuple(std::move(grown), record.added_nodes, record.added_edges);
          },
          py::arg("g"), py::arg("node_pct"), py::arg("edge_pct"), py::arg("seed"),
          py::arg("attachments_per_node") = 1,
          "Grows a copy of g; returns (graph, added_nodes, added_edges).");
    m.def("sample_anchors",
          [](const std::vector<Edge>& correspondence, double ratio, std::uint64_t seed, NodeId n_s,
             NodeId n_t) {
              AnchorSplit split = sample_anchors(correspondence, ratio, seed, n_s, n_t);
              return py::make_tuple(std::move(split.anchors), std::move(split.test_pairs));
          },
          py::arg("correspondence"), py::arg("ratio"), py::arg("seed"), py::arg("n_s"),
          py::arg("n_t"), "Shuffles and splits; returns (anchors, test_pairs).");

    m.def("init_labels", &init_labels, py::arg("anchors"), py::arg("n_s"), py::arg("n_t"));
    m.def("relabel_until_convergence", &relabel_until_convergence, py::arg("g_s"), py::arg("g_t"),
          py::arg("anchors"), py::arg("mode"), py::arg("max_rounds"));
    m.def("label_histogram_similarity",
          [](const LabelState& state, const std::vector<NodeId>& eval_s,
             const std::vector<NodeId>& eval_t) {
              return label_histogram_similarity(state, eval_s, eval_t);
          },
          py::arg("state"), py::arg("eval_s"), py::arg("eval_t"));
    m.def("coverage_ratio",
          [](const LabelState& state, const std::vector<NodeId>& eval_nodes, Side side) {
              return coverage_ratio(state, eval_nodes, side);
          },
          py::arg("state"), py::arg("eval_nodes"), py::arg("side"));

    py::class_<EmbeddingStore>(m, "EmbeddingStore")
        .def_property_readonly("dim", &EmbeddingStore::dim)
        .def_property_readonly("slot_count", &EmbeddingStore::slot_count)
        .def("vector",
             [](const EmbeddingStore& store, Side side, NodeId node) {
                 const auto v = store.vec(Table::node, side, node);
                 return std::vector<double>(v.begin(), v.end());
             },
             py::arg("side"), py::arg("node"), "The node's u-vector.");

    py::class_<TraceRow>(m, "TraceRow")
        .def_readonly("round", &TraceRow::round)
        .def_readonly("epoch", &TraceRow::epoch)
        .def_readonly("label_count", &TraceRow::label_count)
        .def_readonly("label_objective", &TraceRow::label_objective)
        .def_readonly("context_objective", &TraceRow::context_objective);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("store", &TrainResult::store)
        .def_readonly("state", &TrainResult::state)
        .def_readonly("trace", &TrainResult::trace)
        .def_readonly("relabel_trace", &TrainResult::relabel_trace)
        .def_readonly("label_converged", &TrainResult::label_converged)
        .def_readonly("objective_plateaued", &TrainResult::objective_plateaued)
        .def_readonly("rounds", &TrainResult::rounds);

    m.def("train",
          [](const Graph& g_s, const Graph& g_t, const AnchorSet& anchors,
             const py::dict& overrides) {
              ExperimentConfig cfg = config_from_dict(overrides);
              return train(g_s, g_t, anchors, cfg.train_config());
          },
          py::arg("g_s"), py::arg("g_t"), py::arg("anchors"), py::arg("config") = py::dict(),
          "Trains embeddings; config takes the CLI's key=value entries.");

    py::class_<RankedList>(m, "RankedList")
        .def_readonly("query", &RankedList::query)
        .def_readonly("candidates", &RankedList::candidates);

    py::class_<AlignmentRanking>(m, "AlignmentRanking")
        .def_readonly("direction", &AlignmentRanking::direction)
        .def_readonly("lists", &AlignmentRanking::lists);

    m.def("rank_candidates",
          [](const EmbeddingStore& store, const std::vector<NodeId>& queries, Direction direction,
             int top_k, const AnchorSet& anchors) {
              return rank_candidates(store, queries, direction, top_k, anchors);
          },
          py::arg("store"), py::arg("queries"), py::arg("direction"), py::arg("top_k"),
          py::arg("anchors"));
    m.def("precision_at_n",
          [](const AlignmentRanking& s_to_t, const AlignmentRanking& t_to_s,
             const std::vector<Edge>& test_pairs, int n) {
              return precision_at_n(s_to_t, t_to_s, test_pairs, n);
          },
          py::arg("s_to_t"), py::arg("t_to_s"), py::arg("test_pairs"), py::arg("n"));
    m.def("rsa",
          [](const Graph& g_s, const Graph& g_t, Edge pair, const AnchorSet& anchors,
             double lambda) { return rsa(g_s, g_t, pair, anchors, lambda); },
          py::arg("g_s"), py::arg("g_t"), py::arg("pair"), py::arg("anchors"),
          py::arg("lambda_") = 0.5);

    m.def("run_synth", [](const py::dict& overrides) { return cmd_synth(config_from_dict(overrides)); },
          py::arg("config"), "The CLI synth command; returns its exit code.");
    m.def("run_relabel",
          [](const py::dict& overrides) { return cmd_relabel(config_from_dict(overrides)); },
          py::arg("config"), "The CLI relabel command; returns its exit code.");
    m.def("run_align", [](const py::dict& overrides) { return cmd_align(config_from_dict(overrides)); },
          py::arg("config"), "The CLI align command; returns its exit code.");
    m.def("config_hash",
          [](const py::dict& overrides) { return config_hash(config_from_dict(overrides)); },
          py::arg("config") = py::dict());
}
