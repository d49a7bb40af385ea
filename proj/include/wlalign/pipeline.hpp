#pragma once

#include <string>

#include "wlalign/config.hpp"

namespace wlalign {

// The three experiment pipelines behind the CLI subcommands. Each writes its
// outputs plus a manifest.json under cfg.out_dir and returns the process exit
// code: 0 on success, 3 when a convergence budget was exhausted (outputs are
// still written). Data problems raise DataError (exit code 2 at the CLI).

// Base E-R graph plus a grid of perturbed graph pairs with correspondence,
// anchor, and test-pair files.
int cmd_synth(const ExperimentConfig& cfg);

// Relabels a graph pair to convergence in the configured mode and reports
// label quality (histogram similarity, coverage) plus the round trace.
int cmd_relabel(const ExperimentConfig& cfg);

// Runs one pipeline variant end to end and writes the evaluation report,
// precision curve, and (for trained variants) the embedding export.
int cmd_align(const ExperimentConfig& cfg);

// Resolved-config manifest; identical bytes for identical configs regardless
// of out_dir.
void write_manifest(const std::string& out_dir, const ExperimentConfig& cfg,
                    const std::string& command);

}  // namespace wlalign
