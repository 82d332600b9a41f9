//! Knowledge-integrated evolutionary optimization.
//!
//! A GA run on an unknown objective is fingerprinted by the way its
//! population forms and moves clusters over the first generations. The
//! fingerprint is compared against fingerprints of known pilot functions,
//! and the run continues under the strategy stored for the closest pilot.
//!
//! - [`objective`]: benchmark functions and the function registry
//! - [`ga`]: the real-coded GA, its parameters and strategies
//! - [`fingerprint`]: per-generation clustering and cluster tracks
//! - [`classifier`]: fingerprint comparison and pilot selection
//! - [`knowledge_base`]: pilot records and their JSON storage
//! - [`orchestrator`]: the two-stage run and its baseline

pub mod classifier;
pub mod error;
pub mod fingerprint;
pub mod ga;
pub mod knowledge_base;
pub mod objective;
pub mod orchestrator;
pub mod seed;

pub use classifier::{classify, total_score, ClassificationReport, ComparisonScore, Weights};
pub use error::{Error, Result};
pub use fingerprint::{ClusterParams, Fingerprint, GenerationSnapshot};
pub use ga::{GaParams, ParamOverrides, Population, RunBudget, RunResult, Strategy, StrategyStep};
pub use knowledge_base::{build_pilot, record_fingerprint, KnowledgeBase, PilotRecord};
pub use objective::{ObjectiveFunction, Registry, SearchDomain};
pub use orchestrator::{run_baseline, run_kiea, KieaRunConfig, KieaRunResult};
pub use seed::derive_seed;
