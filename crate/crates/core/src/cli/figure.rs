//! Closed-form data behind the four parameter-study plots.
//!
//! | plot | columns | formula |
//! |------|---------|---------|
//! | 2 | `curve,a2,t1,t2` | `t2 = t1 (1-a2) / (a2 - 2 a2 t1 + t1)` |
//! | 3 | `a2,t1_threshold` | `2 a2 / (1 + 2 a2)` |
//! | 4 | `panel,a2,eta,t1,gain` | `2 a2 (1-t1) / (2 eta a2 (1-t1) + (1-eta) t1)` |
//! | 5 | `panel,a2,eta,t1,p_total` | `eta p1 + (1-eta) p2` at matched `t2` |

use crate::analytics::{self, AnalyticsError};
use crate::protocol::{self, ProtocolError};

use super::format::{csv_line, num};

pub const POINTS: usize = 201;

/// `(curve, a2)` for the matched-`t2` plot.
pub const T2_CURVES: [(&str, f64); 7] = [
    ("A", 0.1),
    ("B", 0.2),
    ("C", 0.4),
    ("D", 0.5),
    ("E", 0.6),
    ("F", 0.8),
    ("G", 0.9),
];

/// `(panel, a2)` for the gain and success-probability plots.
pub const PANELS: [(&str, f64); 2] = [("a", 0.5), ("b", 0.3)];
pub const PANEL_ETAS: [f64; 3] = [0.3, 0.6, 0.8];

/// `k`-th of `POINTS` evenly spaced samples on `[0, 1]`.
fn unit_grid(k: usize) -> f64 {
    k as f64 / (POINTS - 1) as f64
}

/// `k`-th sample of `t1` on `[0.001, 0.801]`.
pub fn panel_t1(k: usize) -> f64 {
    0.001 + k as f64 * 0.004
}

#[derive(Debug)]
pub enum FigureError {
    Unknown(u8),
    Protocol(ProtocolError),
    Analytics(AnalyticsError),
}

impl From<ProtocolError> for FigureError {
    fn from(e: ProtocolError) -> Self {
        FigureError::Protocol(e)
    }
}

impl From<AnalyticsError> for FigureError {
    fn from(e: AnalyticsError) -> Self {
        FigureError::Analytics(e)
    }
}

impl std::fmt::Display for FigureError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FigureError::Unknown(n) => write!(f, "no figure {n}; choose 2, 3, 4 or 5"),
            FigureError::Protocol(e) => e.fmt(f),
            FigureError::Analytics(e) => e.fmt(f),
        }
    }
}

pub fn figure_csv(n: u8) -> Result<String, FigureError> {
    match n {
        2 => matched_t2_csv(),
        3 => threshold_csv(),
        4 => panel_csv("gain", analytics::gain_closed),
        5 => panel_csv("p_total", analytics::pt_closed),
        other => Err(FigureError::Unknown(other)),
    }
}

fn matched_t2_csv() -> Result<String, FigureError> {
    let mut out = csv_line(&["curve".into(), "a2".into(), "t1".into(), "t2".into()]);
    for (curve, a2) in T2_CURVES {
        for k in 0..POINTS {
            let t1 = unit_grid(k);
            let t2 = protocol::t2_matched(t1, a2)?;
            out.push_str(&csv_line(&[curve.into(), num(a2), num(t1), num(t2)]));
        }
    }
    Ok(out)
}

fn threshold_csv() -> Result<String, FigureError> {
    let mut out = csv_line(&["a2".into(), "t1_threshold".into()]);
    for k in 0..POINTS {
        let a2 = unit_grid(k);
        out.push_str(&csv_line(&[num(a2), num(analytics::t1_threshold(a2)?)]));
    }
    Ok(out)
}

fn panel_csv<F>(column: &str, f: F) -> Result<String, FigureError>
where
    F: Fn(f64, f64, f64) -> Result<f64, AnalyticsError>,
{
    let header = ["panel", "a2", "eta", "t1", column].map(String::from);
    let mut out = csv_line(&header);
    for (panel, a2) in PANELS {
        for eta in PANEL_ETAS {
            for k in 0..POINTS {
                let t1 = panel_t1(k);
                out.push_str(&csv_line(&[
                    panel.into(),
                    num(a2),
                    num(eta),
                    num(t1),
                    num(f(eta, a2, t1)?),
                ]));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_counts() {
        assert_eq!(figure_csv(2).unwrap().lines().count(), 1 + 7 * 201);
        assert_eq!(figure_csv(3).unwrap().lines().count(), 1 + 201);
        assert_eq!(figure_csv(4).unwrap().lines().count(), 1 + 6 * 201);
        assert_eq!(figure_csv(5).unwrap().lines().count(), 1 + 6 * 201);
        assert!(matches!(figure_csv(6), Err(FigureError::Unknown(6))));
    }

    #[test]
    fn anchors() {
        let fig2 = figure_csv(2).unwrap();
        assert!(fig2.contains("D,0.5000000000,0.2500000000,0.2500000000\n"));
        let fig3 = figure_csv(3).unwrap();
        assert!(fig3.contains("\n0.5000000000,0.5000000000\n"));
    }

    #[test]
    fn panel_grid_ends() {
        assert_eq!(panel_t1(0), 0.001);
        assert!((panel_t1(200) - 0.801).abs() < 1e-15);
    }
}
