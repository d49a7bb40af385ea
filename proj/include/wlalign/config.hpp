#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wlalign/embedding.hpp"
#include "wlalign/relabel.hpp"

namespace wlalign {

enum class Variant { full, wo_rl, wo_wl, wo_sim, wo_sim_rl };

std::string to_string(Variant v);
std::string to_string(RelabelMode m);
std::string to_string(Schedule s);
Variant variant_from_string(const std::string& s);
RelabelMode mode_from_string(const std::string& s);
Schedule schedule_from_string(const std::string& s);

// Everything a command run depends on. Defaults are the paper-default
// hyperparameters. out_dir is an invocation parameter, not an experiment
// parameter: it is excluded from both the config hash and the manifest, so a
// re-run into a different directory produces byte-identical outputs.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    // synth
    NodeId synth_n = 1000;
    double synth_p = 0.01;
    double anchor_ratio = 0.2;
    std::vector<double> node_grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<double> edge_grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    int attachments_per_node = 1;

    // inputs (relabel / align)
    std::string s_edges;
    std::string t_edges;
    std::string anchors_file;         // full ground-truth pairs for align; training anchors for relabel
    std::string correspondence_file;  // optional eval-node source for relabel reports

    // relabel
    RelabelMode mode = RelabelMode::soft;
    int max_rounds = 0;  // 0 = min(n_s, n_t)

    // align
    Variant variant = Variant::full;
    double train_ratio = 0.5;
    int precision_max_n = 30;  // Precision@N emitted for N = 1..this; also the ranking depth
    double rsa_lambda = 0.5;

    // training
    int dim = 128;
    double lr = 0.05;
    int batch_size = 1000;
    int k_label = 1;
    int k_context = 20;
    int epochs = 50;  // E
    int batches_per_epoch = 0;
    Schedule schedule = Schedule::interleaved;
    int max_outer_rounds = 30;
    int fcl_epochs = 3000;
    double plateau_tol = 1e-3;
    int plateau_window = 10;
    bool share_anchor_slots = true;
    bool unigram_negatives = false;

    TrainConfig train_config() const;
};

// Canonical string form of every field except out_dir, in sorted key order.
std::map<std::string, std::string> to_map(const ExperimentConfig& cfg);

// Applies key=value overrides onto base. Unknown keys and unparsable values
// raise DataError.
ExperimentConfig config_from_map(const std::map<std::string, std::string>& overrides,
                                 ExperimentConfig base = {});

// Reads either a flat "key = value" text file ('#' comments) or a
// manifest.json produced by a previous run (recognized by a leading '{');
// returns the overrides it defines.
std::map<std::string, std::string> load_config_file(const std::string& path);

// FNV-1a 64 over the sorted "key=value" lines of to_map(); 16 hex digits.
// Stable under field reordering and independent of out_dir.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace wlalign
