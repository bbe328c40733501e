//! Kernel Stahel–Donoho outlyingness, the trimmed SVM classifier built on it,
//! and the outlier map that plots each sample's decision value against its
//! within-group outlyingness.
//!
//! The usual entry point is [`pipeline::fit_sdsvm`], followed by
//! [`outliermap::build_map`].

pub mod data;
pub mod error;
pub mod kernel;
pub mod outliermap;
pub mod outlyingness;
pub mod pipeline;
pub mod rng;
pub mod robust;
pub mod svm;

pub use data::{Dataset, SimulationSpec};
pub use error::{Error, Result};
pub use kernel::{KernelMatrix, KernelSpec, Sample};
pub use outliermap::{build_map, MapStyle, OutlierMapPoint};
pub use outlyingness::{outlyingness, DirectionPolicy, OutlyingnessReport};
pub use pipeline::{fit_sdsvm, CvConfig, FitConfig, FitResult, TrimPlan};
pub use svm::{solve_dual, LabeledSet, SvmModel};
