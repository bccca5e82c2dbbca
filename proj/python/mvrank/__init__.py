"""Multi-view learning to rank: MvCCAE, MvMDAE and DMvDR."""

from ._core import (
    MvrankError,
    PairDataset,
    PreparedData,
    RankedView,
    RankModel,
    SynthSpec,
    baseline_probabilities,
    evaluate,
    gradcheck,
    kendall_tau,
    load_model,
    map_at_k,
    model_from_json,
    predict,
    prepare_data,
    roc_auc,
    run_cli,
    synth_generate,
    train,
)

__all__ = [
    "MvrankError",
    "PairDataset",
    "PreparedData",
    "RankedView",
    "RankModel",
    "SynthSpec",
    "baseline_probabilities",
    "evaluate",
    "gradcheck",
    "kendall_tau",
    "load_model",
    "map_at_k",
    "model_from_json",
    "predict",
    "prepare_data",
    "roc_auc",
    "run_cli",
    "synth_generate",
    "train",
]
