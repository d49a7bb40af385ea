#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wlalign/embedding.hpp"
#include "wlalign/graph.hpp"
#include "wlalign/relabel.hpp"

namespace wlalign {

// Data-level failure (unreadable/malformed/inconsistent inputs). The CLI maps
// this—and all other input validation errors—to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Edge list: one "src dst" pair per line. Symmetric graphs are written as
// i < j pairs once; directed graphs as full arc lists. Isolated nodes are
// recorded as "i i" self-loop lines, which the loader drops while still
// registering the node id.
void write_edge_list(const std::string& path, const Graph& g);

// Pair files (anchors, correspondences, test pairs): "s_id<TAB>t_id" lines,
// original (pre-remap) ids.
void write_pair_file(const std::string& path, const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs);
std::vector<std::pair<std::int64_t, std::int64_t>> read_pair_file(const std::string& path);

// Id-mapping sidecar: "original_id<TAB>dense_id" lines.
void write_id_map(const std::string& path, const std::vector<std::int64_t>& dense_to_original);

// Label-state dump: header "label_count=<k>", then "network<TAB>node<TAB>label"
// for every node of both networks (network is "s" or "t").
void write_label_dump(const std::string& path, const LabelState& state);

// Relabel round trace: CSV "round,new_labels,seconds".
void write_round_trace(const std::string& path, const std::vector<RoundStat>& trace);

// Training trace: CSV "round,epoch,label_count,label_objective,context_objective";
// the label_objective cell is empty when the label term is disabled.
void write_training_trace(const std::string& path, const std::vector<TraceRow>& trace);

// Embedding export: a JSON header line (dim, seeds, config hash) followed by
// "network<TAB>node<TAB>v1,v2,...,vd" lines, coordinates printed with 9
// significant digits.
void write_embeddings(const std::string& path, const EmbeddingStore& store,
                      const std::string& header_json);

// Formats a double with 9 significant digits (%.9g), the embedding export
// convention.
std::string format_g9(double v);

// Shortest representation that round-trips a double exactly.
std::string format_exact(double v);

}  // namespace wlalign
