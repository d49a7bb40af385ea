#include "wlalign/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wlalign/io.hpp"

namespace wlalign {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_grid(const std::vector<double>& grid) {
    std::string out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(grid[i]);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        throw DataError("config: bad number for " + key + ": '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || end != value.data() + value.size())
        throw DataError("config: bad integer for " + key + ": '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw DataError("config: bad boolean for " + key + ": '" + value + "'");
}

std::vector<double> parse_grid(const std::string& key, const std::string& value) {
    std::vector<double> out;
    if (value.empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    return out;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::wo_rl: return "wo_rl";
        case Variant::wo_wl: return "wo_wl";
        case Variant::wo_sim: return "wo_sim";
        case Variant::wo_sim_rl: return "wo_sim_rl";
    }
    return "full";
}

std::string to_string(RelabelMode m) { return m == RelabelMode::soft ? "soft" : "hard"; }

std::string to_string(Schedule s) { return s == Schedule::interleaved ? "interleaved" : "fcl"; }

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "wo_rl") return Variant::wo_rl;
    if (s == "wo_wl") return Variant::wo_wl;
    if (s == "wo_sim") return Variant::wo_sim;
    if (s == "wo_sim_rl") return Variant::wo_sim_rl;
    throw DataError("config: unknown variant '" + s + "'");
}

RelabelMode mode_from_string(const std::string& s) {
    if (s == "soft") return RelabelMode::soft;
    if (s == "hard") return RelabelMode::hard;
    throw DataError("config: unknown relabel mode '" + s + "'");
}

Schedule schedule_from_string(const std::string& s) {
    if (s == "interleaved") return Schedule::interleaved;
    if (s == "fcl") return Schedule::fcl;
    throw DataError("config: unknown schedule '" + s + "'");
}

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig tc;
    tc.dim = dim;
    tc.adam.lr = lr;
    tc.batch_size = batch_size;
    tc.k_label = k_label;
    tc.k_context = k_context;
    tc.epochs_per_round = epochs;
    tc.batches_per_epoch = batches_per_epoch;
    tc.schedule = schedule;
    tc.relabel_mode = mode;
    tc.max_outer_rounds = max_outer_rounds;
    tc.fcl_epochs = fcl_epochs;
    tc.plateau_tol = plateau_tol;
    tc.plateau_window = plateau_window;
    tc.share_anchor_slots = share_anchor_slots;
    tc.unigram_negatives = unigram_negatives;
    tc.seed = seed;
    return tc;
}

std::map<std::string, std::string> to_map(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> m;
    m["seed"] = std::to_string(cfg.seed);
    m["synth_n"] = std::to_string(cfg.synth_n);
    m["synth_p"] = format_double(cfg.synth_p);
    m["anchor_ratio"] = format_double(cfg.anchor_ratio);
    m["node_grid"] = format_grid(cfg.node_grid);
    m["edge_grid"] = format_grid(cfg.edge_grid);
    m["attachments_per_node"] = std::to_string(cfg.attachments_per_node);
    m["s_edges"] = cfg.s_edges;
    m["t_edges"] = cfg.t_edges;
    m["anchors_file"] = cfg.anchors_file;
    m["correspondence_file"] = cfg.correspondence_file;
    m["mode"] = to_string(cfg.mode);
    m["max_rounds"] = std::to_string(cfg.max_rounds);
    m["variant"] = to_string(cfg.variant);
    m["train_ratio"] = format_double(cfg.train_ratio);
    m["precision_max_n"] = std::to_string(cfg.precision_max_n);
    m["rsa_lambda"] = format_double(cfg.rsa_lambda);
    m["dim"] = std::to_string(cfg.dim);
    m["lr"] = format_double(cfg.lr);
    m["batch_size"] = std::to_string(cfg.batch_size);
    m["k_label"] = std::to_string(cfg.k_label);
    m["k_context"] = std::to_string(cfg.k_context);
    m["epochs"] = std::to_string(cfg.epochs);
    m["batches_per_epoch"] = std::to_string(cfg.batches_per_epoch);
    m["schedule"] = to_string(cfg.schedule);
    m["max_outer_rounds"] = std::to_string(cfg.max_outer_rounds);
    m["fcl_epochs"] = std::to_string(cfg.fcl_epochs);
    m["plateau_tol"] = format_double(cfg.plateau_tol);
    m["plateau_window"] = std::to_string(cfg.plateau_window);
    m["share_anchor_slots"] = cfg.share_anchor_slots ? "true" : "false";
    m["unigram_negatives"] = cfg.unigram_negatives ? "true" : "false";
    return m;
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& overrides,
                                 ExperimentConfig base) {
    for (const auto& [key, value] : overrides) {
        if (key == "seed") base.seed = static_cast<std::uint64_t>(parse_int(key, value));
        else if (key == "out_dir") base.out_dir = value;  // accepted for flag parity, never hashed
        else if (key == "synth_n") base.synth_n = static_cast<NodeId>(parse_int(key, value));
        else if (key == "synth_p") base.synth_p = parse_double(key, value);
        else if (key == "anchor_ratio") base.anchor_ratio = parse_double(key, value);
        else if (key == "node_grid") base.node_grid = parse_grid(key, value);
        else if (key == "edge_grid") base.edge_grid = parse_grid(key, value);
        else if (key == "attachments_per_node")
            base.attachments_per_node = static_cast<int>(parse_int(key, value));
        else if (key == "s_edges") base.s_edges = value;
        else if (key == "t_edges") base.t_edges = value;
        else if (key == "anchors_file") base.anchors_file = value;
        else if (key == "correspondence_file") base.correspondence_file = value;
        else if (key == "mode") base.mode = mode_from_string(value);
        else if (key == "max_rounds") base.max_rounds = static_cast<int>(parse_int(key, value));
        else if (key == "variant") base.variant = variant_from_string(value);
        else if (key == "train_ratio") base.train_ratio = parse_double(key, value);
        else if (key == "precision_max_n")
            base.precision_max_n = static_cast<int>(parse_int(key, value));
        else if (key == "rsa_lambda") base.rsa_lambda = parse_double(key, value);
        else if (key == "dim") base.dim = static_cast<int>(parse_int(key, value));
        else if (key == "lr") base.lr = parse_double(key, value);
        else if (key == "batch_size") base.batch_size = static_cast<int>(parse_int(key, value));
        else if (key == "k_label") base.k_label = static_cast<int>(parse_int(key, value));
        else if (key == "k_context") base.k_context = static_cast<int>(parse_int(key, value));
        else if (key == "epochs") base.epochs = static_cast<int>(parse_int(key, value));
        else if (key == "batches_per_epoch")
            base.batches_per_epoch = static_cast<int>(parse_int(key, value));
        else if (key == "schedule") base.schedule = schedule_from_string(value);
        else if (key == "max_outer_rounds")
            base.max_outer_rounds = static_cast<int>(parse_int(key, value));
        else if (key == "fcl_epochs") base.fcl_epochs = static_cast<int>(parse_int(key, value));
        else if (key == "plateau_tol") base.plateau_tol = parse_double(key, value);
        else if (key == "plateau_window")
            base.plateau_window = static_cast<int>(parse_int(key, value));
        else if (key == "share_anchor_slots") base.share_anchor_slots = parse_bool(key, value);
        else if (key == "unigram_negatives") base.unigram_negatives = parse_bool(key, value);
        else throw DataError("config: unknown key '" + key + "'");
    }
    return base;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const auto first = content.find_first_not_of(" \t\r\n");
    std::map<std::string, std::string> overrides;
    if (first != std::string::npos && content[first] == '{') {
        // manifest.json from a previous run
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(content);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("config: bad JSON in " + path + ": " + e.what());
        }
        if (!doc.contains("config") || !doc["config"].is_object())
            throw DataError("config: manifest " + path + " has no config object");
        for (const auto& [key, value] : doc["config"].items()) {
            if (!value.is_string())
                throw DataError("config: manifest value for " + key + " is not a string");
            overrides[key] = value.get<std::string>();
        }
        return overrides;
    }

    std::string line;
    std::stringstream ss(content);
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty())
            throw DataError(path + ":" + std::to_string(line_no) + ": empty key");
        overrides[key] = value;
    }
    return overrides;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](const std::string& text) {
        for (const unsigned char c : text) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [key, value] : to_map(cfg)) {
        mix(key);
        mix("=");
        mix(value);
        mix("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace wlalign
