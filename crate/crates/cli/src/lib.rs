//! Manifest-driven batch commands over `octa_core`.

pub mod batch;
pub mod classify;
pub mod config;
pub mod manifest;
pub mod phantom;
pub mod volume;

pub use batch::{cmd_evaluate, cmd_features, cmd_process, EntryStatus, FeatureRow, RunReport};
pub use classify::{cmd_classify, ClassifySummary};
pub use config::RunConfig;
pub use manifest::DatasetManifest;
pub use phantom::{cmd_phantom, PhantomOptions};
pub use volume::{cmd_volume, format_table, VolumeRow};
