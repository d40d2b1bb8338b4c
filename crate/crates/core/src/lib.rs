//! Constitutive artificial neural networks for isotropic, perfectly
//! incompressible hyperelastic materials.
//!
//! The free energy is an additive network of eight invariant-based terms with
//! twelve non-negative weights. Training it on stress-stretch data both fits
//! the data and, through the weights that survive, names a classical
//! constitutive model together with its physical parameters. A conventional
//! tanh network is included as a baseline.

pub mod baseline;
pub mod data;
pub mod discovery;
pub mod energy;
pub mod error;
pub mod kinematics;
pub mod optimizer;
pub mod stress;

pub use baseline::{mlp_forward, mlp_gradient, mlp_train, MlpParams};
pub use data::{builtin_dataset, load_csv, Dataset, Sample};
pub use discovery::{classify, recover_named_model, report, DiscoveredModel, NamedModel, Report};
pub use energy::{CannWeights, ExpPair, Term};
pub use error::{CannError, Result};
pub use kinematics::DeformationMode;
pub use optimizer::{train_cann, AdamConfig, TrainingRecord};
