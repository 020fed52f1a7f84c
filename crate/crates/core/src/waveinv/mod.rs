//! Stationary phase, Hankel-cutoff transforms and wave invariants of
//! periodic orbits.

pub mod hankel;
pub mod orbit;
pub mod poly;
pub mod stationary;
pub mod wtf;

pub use poly::{Basis, MPoly};
pub use stationary::{stationary_phase, OscillatoryIntegralJet, StationaryPhaseExpansion};
pub use hankel::{hankel_cutoff_transform, HankelTransform, HankelVariant};
pub use orbit::{build_orbit_integral, wave_invariants, OrbitGeometry, WaveInvariantTable};
pub use wtf::{comparison_report, thm_sum_v_extract, wtf_eval, AngleReading, ComparisonRow};
