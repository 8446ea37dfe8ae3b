from ._cloudrisk import (
    ConfigError,
    Error,
    ExperimentConfig,
    GbtModel,
    GbtParams,
    InputError,
    IntervalReport,
    VersionError,
    aggregate_risk,
    evaluate,
    ingest,
    load_config,
    parse_config,
    rfe_select,
    run_cell,
    run_experiment,
    standard_config,
    summarize,
    synthesize_traces,
    train_gbt,
    vm_vulnerability,
)

__all__ = [
    "ConfigError",
    "Error",
    "ExperimentConfig",
    "GbtModel",
    "GbtParams",
    "InputError",
    "IntervalReport",
    "VersionError",
    "aggregate_risk",
    "evaluate",
    "ingest",
    "load_config",
    "parse_config",
    "rfe_select",
    "run_cell",
    "run_experiment",
    "standard_config",
    "summarize",
    "synthesize_traces",
    "train_gbt",
    "vm_vulnerability",
]
