//! Lorentzian surfaces in the semi-Euclidean space R⁴₂: adapted frames,
//! lightcone Gauss maps and pedal surfaces, contact with lightlike
//! hyperplanes, and the parabolic and swallowtail loci.
//!
//! The geometry kernels are generic over [`scalar::Scalar`]; the aliases
//! below fix the common instantiations.

pub mod contact;
pub mod error;
pub mod export;
pub mod expr;
pub mod frame;
pub mod generic;
pub mod geometry;
pub mod grid;
pub mod indicatrix;
pub mod jet;
pub mod lightcone;
pub mod linalg;
pub mod loci;
pub mod scalar;
pub mod surface;
pub mod tolerance;
pub mod verify;

pub use contact::{classify_contact, ContactReport, SingClass};
pub use error::{Error, Result};
pub use frame::{adapted_frame, GaussSign, LocalFrame};
pub use geometry::{pseudo_dot, CausalClass, Vec4};
pub use grid::{Domain, Grid};
pub use jet::Jet;
pub use lightcone::{lightcone_gauss_map, pedal_map};
pub use surface::SurfacePatch;
pub use tolerance::Tolerances;

pub type Vec4f = Vec4<f64>;
pub type Vec4f32 = Vec4<f32>;
pub type Jet64 = Jet<f64>;
pub type JetVec4 = Vec4<Jet<f64>>;
