#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Design and analysis toolkit for Internally-Balanced Magnetic Units
//! (IB Magnets): permanent-magnet adhesion units whose control rod is
//! balanced by an internal spring so that detaching takes almost no force.
//!
//! * [`force_curve`] evaluates, integrates and fits magnet force curves.
//! * [`spring_synthesis`] approximates a curve from below with cam-limited
//!   linear springs and minimizes the energy loss.
//! * [`magnetic_spring`] balances an attraction pair with a repulsion pair.
//! * [`unit_sim`] runs quasi-static frame-pull and rod-pull tests.
//! * [`clamp`] evaluates the clamp built on the enlarged unit.
//! * [`io`] and [`fixtures`] hold the file formats and shipped prototypes.
//!
//! Displacements are in mm, forces in N, energies in N·mm. Every numeric
//! type is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! the common `f64` and `f32` instantiations.

pub mod clamp;
pub mod error;
pub mod fixtures;
pub mod force_curve;
pub mod io;
pub mod magnetic_spring;
mod quadrature;
pub mod scalar;
pub mod spring_synthesis;
pub mod unit_sim;

pub use clamp::{
    amplification_ratio, clamp_force, clamp_report, converter_internal_force, ClampMode,
    ClampReport, ClampScenario, Converter,
};
pub use error::{Error, Result};
pub use force_curve::{fit_power_law, ForceCurve, PowerLawCurve, SampledCurve};
pub use magnetic_spring::{
    reduction_ratio, BalanceProfile, BalanceSample, ControlForcePeak, MagneticSpringPair,
    COIL_SPRING_REDUCTION_RATIO, RUBBER_SPRING_REDUCTION_RATIO,
};
pub use quadrature::adaptive_simpson;
pub use scalar::Scalar;
pub use spring_synthesis::{
    break_point, build_design, delta_e, optimize_tangent_points, snap_to_catalog, spring_force,
    tangent_at, Spring, SpringCatalog, SpringDesign, TangentLine,
};
pub use unit_sim::{
    detach_summary, simulate_pull, DetachSummary, PullMode, PullSample, PullTestProfile, UnitConfig,
};

pub type ForceCurveF64 = ForceCurve<f64>;
pub type ForceCurveF32 = ForceCurve<f32>;
pub type PowerLawCurveF64 = PowerLawCurve<f64>;
pub type PowerLawCurveF32 = PowerLawCurve<f32>;
pub type SampledCurveF64 = SampledCurve<f64>;
pub type SampledCurveF32 = SampledCurve<f32>;
pub type SpringDesignF64 = SpringDesign<f64>;
pub type SpringDesignF32 = SpringDesign<f32>;
pub type MagneticSpringPairF64 = MagneticSpringPair<f64>;
pub type MagneticSpringPairF32 = MagneticSpringPair<f32>;
pub type UnitConfigF64 = UnitConfig<f64>;
pub type UnitConfigF32 = UnitConfig<f32>;
pub type ClampScenarioF64 = ClampScenario<f64>;
pub type ClampScenarioF32 = ClampScenario<f32>;
