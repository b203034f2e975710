//! Agent-based simulator of two peer-review systems.
//!
//! Authors and journals are each described by three beta distributions
//! (topic, quality, novelty); a manuscript is one draw from its author's
//! triple. The crate runs two monthly-tick settings over a shared
//! population:
//!
//! * [`cs_engine`]: the editor-driven setting, where authors pick the journal
//!   maximizing expected impact, three referees review, the editor decides,
//!   rejected manuscripts descend the journal ladder until abandoned.
//! * [`as_engine`]: the pool setting, where submissions enter a shared pool and
//!   oblige their author to review three pool manuscripts; fully reviewed
//!   manuscripts ripen and journals bid on them.
//!
//! [`experiment`] orchestrates seeded replicates over both settings and
//! [`output`] serializes results to CSV/JSON. Everything is deterministic
//! given a master seed; with the default `parallel` feature replicates and
//! the pure scoring loops run on rayon without affecting results.

pub mod as_engine;
pub mod config;
pub mod cs_engine;
pub mod experiment;
pub mod metrics;
pub mod output;
mod par;
pub mod population;
pub mod review;
pub mod stochastics;

pub use config::{DutyStrategy, SimConfig};
pub use experiment::{run_replicates, run_replicates_serial, ReplicateResult, SettingChoice};
pub use metrics::{ComparisonReport, RunSummary, Setting};
pub use population::{AgentProfile, Manuscript, Population};
pub use stochastics::{window_density, BetaParams, RngStream};
