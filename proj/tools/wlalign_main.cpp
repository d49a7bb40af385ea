// wlalign: cross-network alignment by anchor-seeded relabeling and
// regularized representation learning.
//
//   wlalign synth   --out-dir data            generate the synthetic benchmark
//   wlalign relabel --s-edges a --t-edges b --anchors p --out-dir run
//   wlalign align   --s-edges a --t-edges b --anchors p --out-dir run
//
// Every run resolves its configuration in three layers: built-in defaults,
// then --config (a key=value file or a previous run's manifest.json), then
// explicit flags. Exit codes: 0 ok, 1 usage, 2 bad data, 3 budget exhausted
// before convergence.

#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "wlalign/config.hpp"
#include "wlalign/io.hpp"
#include "wlalign/pipeline.hpp"

namespace {

// Flags the user actually passed, as raw key=value overrides; typed parsing
// happens once, in config_from_map.
struct FlagSet {
    std::map<std::string, std::string> values;
    std::string config_path;
};

void add_override(CLI::App& cmd, FlagSet& flags, const std::string& name, const std::string& key,
                  const std::string& help) {
    cmd.add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags.values[key] = v; }, help);
}

void add_common(CLI::App& cmd, FlagSet& flags) {
    cmd.add_option("--config", flags.config_path,
                   "key=value file or manifest.json; flags override its entries");
    add_override(cmd, flags, "--seed", "seed", "master RNG seed [1]");
    add_override(cmd, flags, "--out-dir", "out_dir", "output directory [out]");
    add_override(cmd, flags, "--variant", "variant",
                 "pipeline variant: full|wo_rl|wo_wl|wo_sim|wo_sim_rl [full]");
    add_override(cmd, flags, "--mode", "mode", "relabeling mode: soft|hard [soft]");
    add_override(cmd, flags, "--train-ratio", "train_ratio",
                 "share of ground-truth pairs used as training anchors [0.5]");
}

void add_inputs(CLI::App& cmd, FlagSet& flags) {
    add_override(cmd, flags, "--s-edges", "s_edges", "edge list of the source network");
    add_override(cmd, flags, "--t-edges", "t_edges", "edge list of the target network");
    add_override(cmd, flags, "--anchors", "anchors_file", "known corresponding pairs (s<TAB>t)");
    add_override(cmd, flags, "--correspondence", "correspondence_file",
                 "optional full correspondence, used as the label-quality eval set");
    add_override(cmd, flags, "--max-rounds", "max_rounds",
                 "relabeling round budget; 0 = min(n_s, n_t) [0]");
}

void add_training(CLI::App& cmd, FlagSet& flags) {
    add_override(cmd, flags, "--dim", "dim", "embedding dimension [128]");
    add_override(cmd, flags, "--lr", "lr", "Adam learning rate [0.05]");
    add_override(cmd, flags, "--batch-size", "batch_size", "pairs per batch [1000]");
    add_override(cmd, flags, "--k-label", "k_label", "negatives per label pair [1]");
    add_override(cmd, flags, "--k-context", "k_context", "negatives per context pair [20]");
    add_override(cmd, flags, "--epochs", "epochs", "training epochs per relabel round [50]");
    add_override(cmd, flags, "--batches-per-epoch", "batches_per_epoch",
                 "batches per epoch; 0 = arcs/(2*batch_size) [0]");
    add_override(cmd, flags, "--schedule", "schedule",
                 "interleaved (relabel+train rounds) or fcl (relabel fully, then train) "
                 "[interleaved]");
    add_override(cmd, flags, "--max-outer-rounds", "max_outer_rounds",
                 "interleaved round budget [30]");
    add_override(cmd, flags, "--fcl-epochs", "fcl_epochs",
                 "training epochs after full label convergence (fcl schedule) [3000]");
    add_override(cmd, flags, "--plateau-tol", "plateau_tol",
                 "relative objective spread that counts as a plateau [1e-3]");
    add_override(cmd, flags, "--plateau-window", "plateau_window",
                 "epochs the plateau test looks back over [10]");
    add_override(cmd, flags, "--share-anchor-slots", "share_anchor_slots",
                 "anchor pairs share one embedding slot: true|false [true]");
    add_override(cmd, flags, "--unigram-negatives", "unigram_negatives",
                 "draw context negatives from the degree^0.75 distribution [false]");
}

int run(const FlagSet& flags, int (*command)(const wlalign::ExperimentConfig&)) {
    wlalign::ExperimentConfig cfg;
    try {
        if (!flags.config_path.empty())
            cfg = wlalign::config_from_map(wlalign::load_config_file(flags.config_path), cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    try {
        cfg = wlalign::config_from_map(flags.values, cfg);
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }
    try {
        return command(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-network node alignment: WL relabeling + embedding learning"};
    app.require_subcommand(1);

    FlagSet synth_flags, relabel_flags, align_flags;

    CLI::App* synth = app.add_subcommand(
        "synth", "generate an E-R base graph and a grid of perturbed graph pairs");
    add_common(*synth, synth_flags);
    add_override(*synth, synth_flags, "--n", "synth_n", "base graph nodes [1000]");
    add_override(*synth, synth_flags, "--p", "synth_p", "E-R edge probability [0.01]");
    add_override(*synth, synth_flags, "--anchor-ratio", "anchor_ratio",
                 "share of nodes marked as anchors [0.2]");
    add_override(*synth, synth_flags, "--node-grid", "node_grid",
                 "comma list of node-perturbation fractions [0.5,...,3.0]");
    add_override(*synth, synth_flags, "--edge-grid", "edge_grid",
                 "comma list of edge-perturbation fractions [0.5,...,3.0]");
    add_override(*synth, synth_flags, "--attachments-per-node", "attachments_per_node",
                 "edges attaching each added node [1]");

    CLI::App* relabel = app.add_subcommand(
        "relabel", "run anchor-seeded relabeling to convergence and report label quality");
    add_common(*relabel, relabel_flags);
    add_inputs(*relabel, relabel_flags);

    CLI::App* align = app.add_subcommand(
        "align", "run an alignment pipeline variant end to end and evaluate the ranking");
    add_common(*align, align_flags);
    add_inputs(*align, align_flags);
    add_training(*align, align_flags);
    add_override(*align, align_flags, "--precision-max-n", "precision_max_n",
                 "report Precision@1..N and rank to depth N [30]");
    add_override(*align, align_flags, "--rsa-lambda", "rsa_lambda", "RSA hop discount [0.5]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (synth->parsed()) return run(synth_flags, wlalign::cmd_synth);
    if (relabel->parsed()) return run(relabel_flags, wlalign::cmd_relabel);
    return run(align_flags, wlalign::cmd_align);
}
