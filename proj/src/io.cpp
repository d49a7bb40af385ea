#include "wlalign/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

namespace wlalign {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    return out;
}

}  // namespace

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string format_exact(double v) {
    char buf[40];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, end};
}

void write_edge_list(const std::string& path, const Graph& g) {
    std::ofstream out = open_out(path);
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const auto nbrs = g.successors(i);
        if (nbrs.empty() && g.predecessors(i).empty()) {
            out << i << ' ' << i << '\n';  // keeps the isolated node visible to the loader
            continue;
        }
        for (const NodeId j : nbrs)
            if (g.directed() || i < j) out << i << ' ' << j << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

void write_pair_file(const std::string& path,
                     const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
    std::ofstream out = open_out(path);
    for (const auto& [s, t] : pairs) out << s << '\t' << t << '\n';
    if (!out) throw DataError("write failed: " + path);
}

std::vector<std::pair<std::int64_t, std::int64_t>> read_pair_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open pair file: " + path);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::int64_t ids[2];
        int n_ids = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        bool bad = false;
        while (p < end) {
            if (*p == ' ' || *p == '\t' || *p == '\r') {
                ++p;
                continue;
            }
            std::int64_t value = 0;
            const auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc{} || value < 0 || n_ids == 2) {
                bad = true;
                break;
            }
            if (next < end && *next != ' ' && *next != '\t' && *next != '\r') {
                bad = true;
                break;
            }
            ids[n_ids++] = value;
            p = next;
        }
        if (bad || n_ids == 1)
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed pair line");
        if (n_ids == 2) pairs.emplace_back(ids[0], ids[1]);
    }
    return pairs;
}

void write_id_map(const std::string& path, const std::vector<std::int64_t>& dense_to_original) {
    std::ofstream out = open_out(path);
    for (std::size_t dense = 0; dense < dense_to_original.size(); ++dense)
        out << dense_to_original[dense] << '\t' << dense << '\n';
    if (!out) throw DataError("write failed: " + path);
}

void write_label_dump(const std::string& path, const LabelState& state) {
    std::ofstream out = open_out(path);
    out << "label_count=" << state.label_count << '\n';
    for (std::size_t i = 0; i < state.labels_s.size(); ++i)
        out << "s\t" << i << '\t' << state.labels_s[i] << '\n';
    for (std::size_t j = 0; j < state.labels_t.size(); ++j)
        out << "t\t" << j << '\t' << state.labels_t[j] << '\n';
    if (!out) throw DataError("write failed: " + path);
}

void write_round_trace(const std::string& path, const std::vector<RoundStat>& trace) {
    std::ofstream out = open_out(path);
    out << "round,new_labels,seconds\n";
    for (const RoundStat& row : trace)
        out << row.round << ',' << row.new_labels << ',' << format_g9(row.seconds) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

void write_training_trace(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out = open_out(path);
    out << "round,epoch,label_count,label_objective,context_objective\n";
    for (const TraceRow& row : trace) {
        out << row.round << ',' << row.epoch << ',' << row.label_count << ',';
        if (row.label_objective) out << format_g9(*row.label_objective);
        out << ',' << format_g9(row.context_objective) << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

void write_embeddings(const std::string& path, const EmbeddingStore& store,
                      const std::string& header_json) {
    std::ofstream out = open_out(path);
    out << header_json << '\n';
    const auto emit = [&](const char* network, Side side, NodeId n) {
        for (NodeId node = 0; node < n; ++node) {
            out << network << '\t' << node << '\t';
            const auto vec = store.vec(Table::node, side, node);
            for (std::size_t k = 0; k < vec.size(); ++k) {
                if (k > 0) out << ',';
                out << format_g9(vec[k]);
            }
            out << '\n';
        }
    };
    emit("s", Side::s, store.n_s());
    emit("t", Side::t, store.n_t());
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace wlalign
