//! Optimization loop: AdamW, warm-up plus cosine schedule, per-epoch metrics, checkpoints.

mod checkpoint;
mod metrics;
mod optim;
mod trainer;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointHeader, FORMAT_VERSION, MAGIC};
pub use metrics::{read_metrics, write_metrics, EpochMetrics, METRICS_HEADER};
pub use optim::{AdamW, AdamWConfig, LrSchedule};
pub use trainer::{evaluate, Evaluation, TrainConfig, Trainer};
