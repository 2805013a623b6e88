//! Quantitative checks on fields: stress tensor and Pohozaev balance, the
//! renormalized potential energy `W̃(R)`, equipartition, radial energy,
//! blow-down classification and circle restrictions.
//!
//! Everything here reads a field at unit scale (a solution of `ΔU = ∇W(U)`)
//! and takes balls and circles about the origin unless a center is given.

mod circle;
mod classify;
mod profile;
mod quadrature;
mod stress;

pub use circle::{circle_profile, circle_profile_with, transition_level, CircleProfile, TransitionWindow, PROFILE_ANGLES};
pub use classify::{
    classify_blowdown, classify_fits, distance_to_a, fit_cones, BlowdownReport, Classification, ClassifyOptions, Cone, ConeFit,
};
pub use profile::{equipartition_defect, radial_energy, wtilde_profile, EquipartitionDefect, WtildeProfile};
pub use quadrature::{Jet, Sampler};
pub use stress::{pohozaev_residual, pohozaev_residual_at, stress_tensor, StressTensor, CIRCLE_POINTS};
