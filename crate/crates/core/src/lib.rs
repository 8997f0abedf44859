//! Regularized partial-correlation networks for psychological-style data,
//! together with bootstrap machinery for judging how accurate the estimated
//! edge weights are and how stable centrality orderings are.
//!
//! The pipeline is
//!
//! 1. [`ingest`]: load a table, classify ordinal/continuous columns, handle missing cells.
//! 2. [`stats`]: Pearson / Spearman / polychoric correlation matrix, repaired to PSD.
//! 3. [`ggm`]: graphical lasso over a lambda path, EBIC model selection, partial correlations.
//! 4. [`centrality`]: strength, closeness and betweenness.
//! 5. [`bootstrap`]: nonparametric / parametric / case- and node-dropping bootstraps,
//!    edge CIs, the CS-coefficient and bootstrapped difference tests.
//! 6. [`simgen`]: ground-truth networks, ordinal data and the validation studies.
//!
//! Replicate loops run on rayon when the `parallel` feature is enabled (the default);
//! results are keyed by replicate index and seeded per replicate, so output is
//! identical for every worker count.

pub mod bootstrap;
pub mod centrality;
mod error;
pub mod ggm;
pub mod ingest;
pub mod io;
pub(crate) mod linalg;
pub mod par;
pub mod seed;
pub mod simgen;
pub mod stats;

pub use error::{Error, Result};

pub use bootstrap::{BootstrapKind, BootstrapResult, SubsetBootstrapResult};
pub use centrality::{CentralityIndex, CentralityTable};
pub use ggm::{EstimationOptions, Estimator, Network};
pub use ingest::{Dataset, MissingPolicy, VariableType};
pub use stats::{CorrelationMatrix, CorrelationMethod};
