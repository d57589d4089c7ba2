//! Cooling analysis for an optomechanical cavity with combined
//! dispersive and dissipative coupling.
//!
//! The crate evaluates quantum-backaction force spectra and the phonon
//! occupation they imply (closed form and by adaptive quadrature),
//! locates the optimal operating point of the interference-assisted
//! cooling protocol, quantifies how internal loss, setting inaccuracies
//! and multimode effects push the cooling limit up, maps a
//! Michelson–Sagnac interferometer onto the equivalent one-sided cavity,
//! and compares against dispersive-sideband and feedback cooling.

pub mod cooling;
pub mod design;
pub mod error;
pub mod msi;
pub mod optim;
pub mod params;
pub mod protocols;
pub mod quad;
pub mod selftest;
pub mod spectra;

pub use error::{Error, Result};
pub use params::{
    CavityParams, CouplingParams, DriveParams, MechParams, SpectrumKind, SystemParams,
};

pub use cooling::{CoolingResult, Deviations, Method, QuadratureConfig};
pub use design::{ConditionFlag, OperatingPoint, ToleranceBudget, ValidityReport};
pub use msi::{EffectiveMirror, MsiDrive, MsiGeometry};
pub use protocols::{ComparisonReport, FeedbackParams};
