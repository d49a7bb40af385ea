"""Cross-network node alignment: anchor-seeded WL relabeling + embedding learning.

The heavy lifting lives in the compiled `_core` extension; this package
re-exports its public names.
"""

from ._core import (
    AlignmentRanking,
    AnchorSet,
    DataError,
    Direction,
    EmbeddingStore,
    Graph,
    LabelState,
    RankedList,
    RelabelMode,
    RelabelResult,
    RoundStat,
    Schedule,
    Side,
    TraceRow,
    TrainResult,
    config_hash,
    coverage_ratio,
    generate_er,
    init_labels,
    label_histogram_similarity,
    load_edge_list,
    perturb,
    precision_at_n,
    rank_candidates,
    relabel_until_convergence,
    rsa,
    run_align,
    run_relabel,
    run_synth,
    sample_anchors,
    train,
)

__all__ = [
    "AlignmentRanking",
    "AnchorSet",
    "DataError",
    "Direction",
    "EmbeddingStore",
    "Graph",
    "LabelState",
    "RankedList",
    "RelabelMode",
    "RelabelResult",
    "RoundStat",
    "Schedule",
    "Side",
    "TraceRow",
    "TrainResult",
    "config_hash",
    "coverage_ratio",
    "generate_er",
    "init_labels",
    "label_histogram_similarity",
    "load_edge_list",
    "perturb",
    "precision_at_n",
    "rank_candidates",
    "relabel_until_convergence",
    "rsa",
    "run_align",
    "run_relabel",
    "run_synth",
    "sample_anchors",
    "train",
]
