//! Finite-dimensional C*-correspondences, their bicategory, and the
//! Cuntz–Pimsner reflection onto Hilbert bimodules.

pub mod bicat;
pub mod corr;
pub mod cstar;
pub mod hilbert;
pub mod instance;
pub mod linalg;
pub mod pimsner;
pub mod report;
pub mod sparse;

/// Tolerance for float witnesses; `CORRBI_TOL` overrides the default `1e-9`.
pub fn witness_tolerance() -> f64 {
    std::env::var("CORRBI_TOL").ok().and_then(|s| s.parse().ok()).filter(|t: &f64| *t > 0.0).unwrap_or(1e-9)
}
