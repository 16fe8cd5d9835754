//! Closed-form success probabilities, output fidelity and gain.
//!
//! Everything here is written directly from the algebraic expressions and
//! shares no code with the simulator, so the two can check each other.
//! Parameters use the squared entanglement coefficient `a2 = a^2`.
//!
//! With `D = a2 - 2 a2 t1 + t1` and matched `t2 = t1 (1 - a2) / D`:
//!
//! | quantity | expression |
//! |----------|------------|
//! | `p1` | `2 a2 (1-a2)^2 t1^3 (1-t1) / D^2` |
//! | `p2` | `t1^4 (1-a2)^2 / D^2` |
//! | `p_total` | `eta p1 + (1-eta) p2` |
//! | `eta_out` | `2 eta a2 (1-t1) / (2 eta a2 (1-t1) + (1-eta) t1)` |
//! | `gain` | `2 a2 (1-t1) / (2 eta a2 (1-t1) + (1-eta) t1)` |
//! | threshold | `2 a2 / (1 + 2 a2)` |
//! | `t1 -> 0` limit of gain | `1 / eta` |

use thiserror::Error;

use crate::config::BOUNDARY_MARGIN;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("{name} = {value} outside {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("gain is undefined at eta = 0")]
    UndefinedGain,
    #[error("{0} is 0/0 at this parameter point")]
    Indeterminate(&'static str),
}

fn in_closed(name: &'static str, value: f64) -> Result<f64, AnalyticsError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(AnalyticsError::OutOfDomain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}

fn in_open(name: &'static str, value: f64) -> Result<f64, AnalyticsError> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(AnalyticsError::OutOfDomain {
            name,
            value,
            domain: "(0, 1)",
        })
    }
}

fn denominator(a2: f64, t1: f64) -> f64 {
    a2 - 2.0 * a2 * t1 + t1
}

/// Success probability of the signal branch at matched `t2`.
pub fn p1_closed(a2: f64, t1: f64) -> Result<f64, AnalyticsError> {
    let a2 = in_open("a2", a2)?;
    let t1 = in_closed("t1", t1)?;
    let b2 = 1.0 - a2;
    let d = denominator(a2, t1);
    Ok(2.0 * a2 * b2 * b2 * t1.powi(3) * (1.0 - t1) / (d * d))
}

/// Success probability of the vacuum branch at matched `t2`.
pub fn p2_closed(a2: f64, t1: f64) -> Result<f64, AnalyticsError> {
    let a2 = in_open("a2", a2)?;
    let t1 = in_closed("t1", t1)?;
    let b2 = 1.0 - a2;
    let d = denominator(a2, t1);
    Ok(t1.powi(4) * b2 * b2 / (d * d))
}

pub fn pt_closed(eta: f64, a2: f64, t1: f64) -> Result<f64, AnalyticsError> {
    let eta = in_closed("eta", eta)?;
    Ok(eta * p1_closed(a2, t1)? + (1.0 - eta) * p2_closed(a2, t1)?)
}

pub fn eta_out_closed(eta: f64, a2: f64, t1: f64) -> Result<f64, AnalyticsError> {
    let eta = in_closed("eta", eta)?;
    let a2 = in_open("a2", a2)?;
    let t1 = in_closed("t1", t1)?;
    let num = 2.0 * eta * a2 * (1.0 - t1);
    let den = num + (1.0 - eta) * t1;
    if den == 0.0 {
        return Err(AnalyticsError::Indeterminate("eta_out"));
    }
    Ok(num / den)
}

pub fn gain_closed(eta: f64, a2: f64, t1: f64) -> Result<f64, AnalyticsError> {
    let eta = in_closed("eta", eta)?;
    if eta == 0.0 {
        return Err(AnalyticsError::UndefinedGain);
    }
    let a2 = in_open("a2", a2)?;
    let t1 = in_closed("t1", t1)?;
    let den = 2.0 * eta * a2 * (1.0 - t1) + (1.0 - eta) * t1;
    if den == 0.0 {
        return Err(AnalyticsError::Indeterminate("gain"));
    }
    Ok(2.0 * a2 * (1.0 - t1) / den)
}

/// Largest `t1` with gain above one: amplification needs `t1 < 2 a2 / (1 + 2 a2)`.
pub fn t1_threshold(a2: f64) -> Result<f64, AnalyticsError> {
    let a2 = in_closed("a2", a2)?;
    Ok(2.0 * a2 / (1.0 + 2.0 * a2))
}

/// Gain in the limit `t1 -> 0`, independent of `a2`.
pub fn g_limit(eta: f64) -> Result<f64, AnalyticsError> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(1.0 / eta)
    } else {
        Err(AnalyticsError::OutOfDomain {
            name: "eta",
            value: eta,
            domain: "(0, 1]",
        })
    }
}

/// Signal-branch success probability for arbitrary `t2`: sixteen patterns
/// each with probability `(a2 t1 t2^2 (1-t1) + b2 t1^2 t2 (1-t2)) / 16`.
pub fn p1_general(a2: f64, t1: f64, t2: f64) -> Result<f64, AnalyticsError> {
    let a2 = in_closed("a2", a2)?;
    let t1 = in_closed("t1", t1)?;
    let t2 = in_closed("t2", t2)?;
    let b2 = 1.0 - a2;
    Ok(a2 * t1 * t2 * t2 * (1.0 - t1) + b2 * t1 * t1 * t2 * (1.0 - t2))
}

/// Vacuum-branch success probability for arbitrary `t2`.
pub fn p2_general(t1: f64, t2: f64) -> Result<f64, AnalyticsError> {
    let t1 = in_closed("t1", t1)?;
    let t2 = in_closed("t2", t2)?;
    Ok(t1 * t1 * t2 * t2)
}

/// All closed-form figures of merit at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormReport {
    pub t2: f64,
    pub p1: f64,
    pub p2: f64,
    pub p_total: f64,
    /// `None` when the total success probability vanishes.
    pub eta_out: Option<f64>,
    /// `None` at `eta = 0`.
    pub gain: Option<f64>,
    pub t1_threshold: f64,
    pub g_limit: Option<f64>,
    /// `t1` within `BOUNDARY_MARGIN` of 0 or 1, where the ratios are of
    /// vanishing quantities and should not be trusted to full precision.
    pub near_boundary: bool,
}

impl ClosedFormReport {
    /// Matched `t2`.
    pub fn evaluate(eta: f64, a2: f64, t1: f64) -> Result<Self, AnalyticsError> {
        let p1 = p1_closed(a2, t1)?;
        let p2 = p2_closed(a2, t1)?;
        let p_total = pt_closed(eta, a2, t1)?;
        let eta_out = eta_out_closed(eta, a2, t1).ok();
        let gain = match gain_closed(eta, a2, t1) {
            Ok(g) => Some(g),
            Err(AnalyticsError::UndefinedGain | AnalyticsError::Indeterminate(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(ClosedFormReport {
            t2: t1 * (1.0 - a2) / denominator(a2, t1),
            p1,
            p2,
            p_total,
            eta_out,
            gain,
            t1_threshold: t1_threshold(a2)?,
            g_limit: g_limit(eta).ok(),
            near_boundary: !(BOUNDARY_MARGIN..=1.0 - BOUNDARY_MARGIN).contains(&t1),
        })
    }

    /// Arbitrary (possibly unmatched) `t2`.
    pub fn evaluate_with_t2(eta: f64, a2: f64, t1: f64, t2: f64) -> Result<Self, AnalyticsError> {
        let eta = in_closed("eta", eta)?;
        let p1 = p1_general(a2, t1, t2)?;
        let p2 = p2_general(t1, t2)?;
        let p_total = eta * p1 + (1.0 - eta) * p2;
        let eta_out = (p_total > 0.0).then(|| eta * p1 / p_total);
        let gain = if eta > 0.0 {
            eta_out.map(|e| e / eta)
        } else {
            None
        };
        let near = |t: f64| !(BOUNDARY_MARGIN..=1.0 - BOUNDARY_MARGIN).contains(&t);
        Ok(ClosedFormReport {
            t2,
            p1,
            p2,
            p_total,
            eta_out,
            gain,
            t1_threshold: t1_threshold(a2)?,
            g_limit: g_limit(eta).ok(),
            near_boundary: near(t1) || near(t2),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn p1_values() {
        assert!(close(p1_closed(0.5, 0.25).unwrap(), 0.01171875, 1e-15));
        assert!(close(p1_closed(0.3, 0.2).unwrap(), 0.0130305, 1e-7));
        assert_eq!(p1_closed(0.3, 0.0).unwrap(), 0.0);
        assert!(p1_closed(0.0, 0.2).is_err());
        assert!(p1_closed(0.3, 1.2).is_err());
    }

    #[test]
    fn p2_values() {
        assert!(close(p2_closed(0.5, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(p2_closed(0.3, 0.2).unwrap(), 0.0054294, 1e-7));
    }

    #[test]
    fn spot_point_matched_half() {
        assert!(close(pt_closed(0.6, 0.5, 0.25).unwrap(), 0.00859375, 1e-15));
        assert!(close(
            eta_out_closed(0.6, 0.5, 0.25).unwrap(),
            0.8181818,
            1e-7
        ));
        assert!(close(gain_closed(0.6, 0.5, 0.25).unwrap(), 1.3636364, 1e-7));
    }

    #[test]
    fn spot_point_unbalanced() {
        let e = eta_out_closed(0.8, 0.3, 0.2).unwrap();
        assert!(close(e, 0.384 / 0.424, 1e-15));
        assert!(close(e, 0.9056604, 1e-7));
    }

    #[test]
    fn gain_is_one_at_threshold() {
        for eta in [0.1, 0.45, 0.9] {
            for a2 in [0.2, 0.5, 0.8] {
                let t = t1_threshold(a2).unwrap();
                assert!(close(gain_closed(eta, a2, t).unwrap(), 1.0, 1e-14));
            }
        }
    }

    #[test]
    fn thresholds() {
        assert!(close(t1_threshold(0.5).unwrap(), 0.5, 1e-15));
        assert!(close(t1_threshold(1.0).unwrap(), 2.0 / 3.0, 1e-15));
        assert!(close(t1_threshold(0.3).unwrap(), 0.375, 1e-15));
    }

    #[test]
    fn limits() {
        assert_eq!(g_limit(0.5).unwrap(), 2.0);
        assert_eq!(g_limit(1.0).unwrap(), 1.0);
        assert!(g_limit(0.0).is_err());
        for a2 in [0.3, 0.5, 0.8] {
            for eta in [0.3, 0.6, 0.9] {
                let g = gain_closed(eta, a2, 1e-6).unwrap();
                assert!(close(g, 1.0 / eta, 1e-4), "a2={a2} eta={eta} g={g}");
            }
        }
    }

    #[test]
    fn gain_undefined_without_signal() {
        assert_eq!(
            gain_closed(0.0, 0.5, 0.3),
            Err(AnalyticsError::UndefinedGain)
        );
        let r = ClosedFormReport::evaluate(0.0, 0.5, 0.3).unwrap();
        assert!(r.gain.is_none());
        assert_eq!(r.eta_out, Some(0.0));
    }

    #[test]
    fn pt_endpoints_in_eta() {
        for (a2, t1) in [(0.2, 0.1), (0.7, 0.45)] {
            assert_eq!(pt_closed(1.0, a2, t1).unwrap(), p1_closed(a2, t1).unwrap());
            assert_eq!(pt_closed(0.0, a2, t1).unwrap(), p2_closed(a2, t1).unwrap());
        }
    }

    #[test]
    fn pt_factored_form_agrees() {
        let (eta, a2, t1): (f64, f64, f64) = (0.37, 0.62, 0.21);
        let d = denominator(a2, t1);
        let factored =
            t1.powi(3) * (1.0 - a2).powi(2) * (2.0 * eta * a2 * (1.0 - t1) + (1.0 - eta) * t1)
                / (d * d);
        assert!(close(pt_closed(eta, a2, t1).unwrap(), factored, 1e-16));
    }

    #[test]
    fn general_forms_reduce_to_matched() {
        for (a2, t1) in [(0.3, 0.2), (0.5, 0.25), (0.8, 0.55)] {
            let t2 = t1 * (1.0 - a2) / denominator(a2, t1);
            assert!(close(
                p1_general(a2, t1, t2).unwrap(),
                p1_closed(a2, t1).unwrap(),
                1e-15
            ));
            assert!(close(
                p2_general(t1, t2).unwrap(),
                p2_closed(a2, t1).unwrap(),
                1e-15
            ));
        }
    }

    #[test]
    fn boundary_flag() {
        assert!(
            ClosedFormReport::evaluate(0.5, 0.5, 1e-10)
                .unwrap()
                .near_boundary
        );
        assert!(
            !ClosedFormReport::evaluate(0.5, 0.5, 0.3)
                .unwrap()
                .near_boundary
        );
        let r = ClosedFormReport::evaluate(1.0, 0.5, 1.0).unwrap();
        assert!(r.near_boundary);
        assert!(r.gain.is_none());
    }
}
