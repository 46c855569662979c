"""Traffic scenario categorization and dataset completeness analysis."""

from scenecat._core import (
    CLASSES,
    FEATURES,
    TIME_STEPS,
    VEHICLE_SLOTS,
    ConfigError,
    Dataset,
    IoError,
    NumericError,
    ParseError,
    TrainedModel,
    balance_dataset,
    completeness_report,
    ingest_tracks,
    inject_new_category,
    load_checkpoint,
    load_dataset,
    pilot,
    required_sims,
    s_min,
    save_dataset,
    split_dataset,
    synth_generate,
    train,
)

__all__ = [
    "CLASSES",
    "FEATURES",
    "TIME_STEPS",
    "VEHICLE_SLOTS",
    "ConfigError",
    "Dataset",
    "IoError",
    "NumericError",
    "ParseError",
    "TrainedModel",
    "balance_dataset",
    "completeness_report",
    "ingest_tracks",
    "inject_new_category",
    "load_checkpoint",
    "load_dataset",
    "pilot",
    "required_sims",
    "s_min",
    "save_dataset",
    "split_dataset",
    "synth_generate",
    "train",
]
