//! Numerical tolerances shared by every module.
//!
//! Amplitudes are stored in `f64`, which leaves roughly four decimal digits
//! of headroom between the prune threshold and the comparison threshold.

/// Amplitudes with magnitude below this are dropped from a [`PureState`](crate::fock::PureState).
pub const PRUNE_TOLERANCE: f64 = 1e-12;

/// Tolerance for norm, fidelity and cross-route comparisons.
pub const COMPARE_TOLERANCE: f64 = 1e-10;

/// Ensemble weights must sum to one within this bound.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Closed forms evaluated closer than this to `t1 = 0` or `t1 = 1` are flagged.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Photon number of one protocol run (one signal photon plus four ancillas).
/// Not enforced; the sparse representation handles any count.
pub const INTENDED_MAX_PHOTONS: usize = 5;
