//! Command-line orchestration: run configuration and subcommands.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_align, cmd_classify, cmd_eval, cmd_pipeline, cmd_rank, cmd_score, cmd_synth, cmd_train,
    read_targets, CmdResult, EvalReport, PipelineOutput, RankOutput, ScoreOutput, StageError,
    SynthOutput, TrainOutput,
};
pub use config::{apply_override, DecisionStrategy, Needs, RunConfig};
