//! End-to-end heralded amplification and concentration of a single-photon
//! entangled (SPE) state.
//!
//! Wiring:
//!
//! ```text
//!  signal  a1 ──────────────┐            ┌─ PBS a2 → a4(H) a5(V)
//!                           BS50 → a2,a3 ┤
//!  S2: H,V c1 ─ VBS(t1) ─ c2┘            └─ PBS a3 → a6(H) a7(V)
//!                  └─ c3 (heralded output)
//!  signal  b1 ──────────────┐            ┌─ PBS b2 → b4(H) b5(V)
//!                           BS50 → b2,b3 ┤
//!  S3: H,V d1 ─ VBS(t2) ─ d2┘            └─ PBS b3 → b6(H) b7(V)
//!                  └─ d3 (heralded output)
//! ```
//!
//! Both branches of the lossy input (single photon, vacuum) run through the
//! same optics; the sixteen success patterns are projected per branch and
//! recombined with the input weights.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::config::COMPARE_TOLERANCE;
use crate::detection::{self, DetectionError, DetectionPattern, DetectorMap};
use crate::elements::{ElementError, OpticalElement};
use crate::fock::{register_modes, EnsembleState, FockError, Polarization, PureState};

/// Every spatial mode in the setup.
pub const ALL_MODES: [&str; 20] = [
    "a1", "a2", "a3", "a4", "a5", "a6", "a7", "b1", "b2", "b3", "b4", "b5", "b6", "b7", "c1", "c2",
    "c3", "d1", "d2", "d3",
];
const INPUT_MODES: [&str; 2] = ["a1", "b1"];
const ANCILLA_MODES: [&str; 6] = ["c1", "c2", "c3", "d1", "d2", "d3"];
const INTERIOR_MODES: [&str; 12] = [
    "a2", "a3", "a4", "a5", "a6", "a7", "b2", "b3", "b4", "b5", "b6", "b7",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("no allowed correction maps pattern {0} onto the target state")]
    NoCorrection(String),
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> ProtocolError {
    ProtocolError::InvalidParameter {
        name,
        value,
        reason,
    }
}

/// Transmission of the second VBS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum T2 {
    /// Chosen so the heralded state is maximally entangled.
    Matched,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub eta: f64,
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t1: f64,
    pub t2: T2,
}

impl ProtocolParams {
    pub fn new(
        eta: f64,
        a: f64,
        alpha: f64,
        beta: f64,
        t1: f64,
        t2: T2,
    ) -> Result<Self, ProtocolError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid("eta", eta, "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(invalid("a", a, "must lie in [0, 1]"));
        }
        if (alpha * alpha + beta * beta - 1.0).abs() > 1e-12 {
            return Err(invalid("alpha", alpha, "alpha^2 + beta^2 must equal 1"));
        }
        if !(t1 > 0.0 && t1 < 1.0) {
            return Err(invalid("t1", t1, "must lie in (0, 1)"));
        }
        if let T2::Fixed(t2) = t2 {
            if !(t2 > 0.0 && t2 < 1.0) {
                return Err(invalid("t2", t2, "must lie in (0, 1)"));
            }
        }
        Ok(ProtocolParams {
            eta,
            a,
            alpha,
            beta,
            t1,
            t2,
        })
    }

    /// Parameters given the squared coefficient `a2`, with `a = sqrt(a2)`.
    pub fn from_a2(
        eta: f64,
        a2: f64,
        alpha: f64,
        beta: f64,
        t1: f64,
        t2: T2,
    ) -> Result<Self, ProtocolError> {
        if !(0.0..=1.0).contains(&a2) {
            return Err(invalid("a2", a2, "must lie in [0, 1]"));
        }
        ProtocolParams::new(eta, a2.sqrt(), alpha, beta, t1, t2)
    }

    pub fn b(&self) -> f64 {
        (1.0 - self.a * self.a).max(0.0).sqrt()
    }

    pub fn a2(&self) -> f64 {
        self.a * self.a
    }

    pub fn resolve_t2(&self) -> Result<f64, ProtocolError> {
        match self.t2 {
            T2::Fixed(t2) => Ok(t2),
            T2::Matched => t2_matched(self.t1, self.a2()),
        }
    }
}

/// Transmission of VBS2 that balances the heralded branches:
/// `t2 = t1 (1 - a2) / (a2 - 2 a2 t1 + t1)`.
pub fn t2_matched(t1: f64, a2: f64) -> Result<f64, ProtocolError> {
    if !(0.0..=1.0).contains(&t1) {
        return Err(invalid("t1", t1, "must lie in [0, 1]"));
    }
    if !(a2 > 0.0 && a2 < 1.0) {
        return Err(ProtocolError::Degenerate(format!(
            "a^2 = {a2}: matched t2 needs 0 < a^2 < 1; pass t2 explicitly"
        )));
    }
    Ok(t1 * (1.0 - a2) / (a2 - 2.0 * a2 * t1 + t1))
}

/// `state` with `(alpha a†_H + beta a†_V)` applied on `spatial`.
fn add_qubit(
    state: &PureState,
    spatial: &str,
    alpha: f64,
    beta: f64,
) -> Result<PureState, FockError> {
    let h = state.create_photon(spatial, Polarization::H)?;
    let v = state.create_photon(spatial, Polarization::V)?;
    h.scaled(alpha.into()).add(&v.scaled(beta.into()))
}

/// `a (alpha|H> + beta|V>)_a1 |0>_b1 + b |0>_a1 (alpha|H> + beta|V>)_b1`.
pub fn signal_state(a: f64, alpha: f64, beta: f64) -> Result<PureState, ProtocolError> {
    let reg = register_modes(&INPUT_MODES)?;
    let vac = PureState::vacuum(&reg);
    let b = (1.0 - a * a).max(0.0).sqrt();
    let sa = add_qubit(&vac, "a1", alpha, beta)?.scaled(a.into());
    let sb = add_qubit(&vac, "b1", alpha, beta)?.scaled(b.into());
    Ok(sa.add(&sb)?)
}

/// Lossy input: the signal state with weight `eta`, vacuum with `1 - eta`.
pub fn build_input(
    eta: f64,
    a: f64,
    alpha: f64,
    beta: f64,
) -> Result<EnsembleState, ProtocolError> {
    ProtocolParams::new(eta, a, alpha, beta, 0.5, T2::Matched)?;
    let signal = signal_state(a, alpha, beta)?;
    let vac = PureState::vacuum(signal.registry());
    Ok(EnsembleState::new(vec![(eta, signal), (1.0 - eta, vac)])?)
}

/// Two ancilla photons (H and V) per side after VBS1 (`c1 -> c2, c3`) and
/// VBS2 (`d1 -> d2, d3`).
pub fn prepare_ancilla(t1: f64, t2: f64) -> Result<PureState, ProtocolError> {
    let reg = register_modes(&ANCILLA_MODES)?;
    let photons = PureState::vacuum(&reg)
        .create_photon("c1", Polarization::H)?
        .create_photon("c1", Polarization::V)?
        .create_photon("d1", Polarization::H)?
        .create_photon("d1", Polarization::V)?;
    let after_vbs1 = OpticalElement::vbs("c1", "c2", "c3", t1).apply(&photons)?;
    Ok(OpticalElement::vbs("d1", "d2", "d3", t2).apply(&after_vbs1)?)
}

/// Beam splitters and polarizing beam splitters after the ancilla VBSs.
pub fn interferometer() -> Vec<OpticalElement> {
    vec![
        OpticalElement::bs50("a1", "c2", "a2", "a3"),
        OpticalElement::bs50("b1", "d2", "b2", "b3"),
        OpticalElement::pbs("a2", "a4", "a5"),
        OpticalElement::pbs("a3", "a6", "a7"),
        OpticalElement::pbs("b2", "b4", "b5"),
        OpticalElement::pbs("b3", "b6", "b7"),
    ]
}

/// Run one input branch (on `a1`, `b1`) together with the ancilla through
/// the interferometer, returning the state just before detection.
pub fn evolve_branch(input: &PureState, ancilla: &PureState) -> Result<PureState, ProtocolError> {
    let mut state = input.tensor(ancilla)?.extend(&INTERIOR_MODES)?;
    for element in interferometer() {
        state = element.apply(&state)?;
    }
    Ok(state)
}

/// The heralded signal state on `c3`, `d3` before normalization is
/// `a t2 sqrt(t1(1-t1)) psi_c3 |0>_d3 + b t1 sqrt(t2(1-t2)) |0>_c3 psi_d3`;
/// this returns it normalized.
pub fn signal_target(
    a: f64,
    alpha: f64,
    beta: f64,
    t1: f64,
    t2: f64,
) -> Result<PureState, ProtocolError> {
    let reg = register_modes(&["c3", "d3"])?;
    let vac = PureState::vacuum(&reg);
    let b = (1.0 - a * a).max(0.0).sqrt();
    let wc = a * t2 * (t1 * (1.0 - t1)).sqrt();
    let wd = b * t1 * (t2 * (1.0 - t2)).sqrt();
    let c = add_qubit(&vac, "c3", alpha, beta)?.scaled(wc.into());
    let d = add_qubit(&vac, "d3", alpha, beta)?.scaled(wd.into());
    Ok(c.add(&d)?.normalize()?)
}

/// The maximally entangled SPE carrying `(alpha, beta)` on `c3`, `d3`.
pub fn maximally_entangled_output(alpha: f64, beta: f64) -> Result<PureState, ProtocolError> {
    let reg = register_modes(&["c3", "d3"])?;
    let vac = PureState::vacuum(&reg);
    let c = add_qubit(&vac, "c3", alpha, beta)?;
    let d = add_qubit(&vac, "d3", alpha, beta)?;
    Ok(c.add(&d)?.scaled(FRAC_1_SQRT_2.into()))
}

/// A composition of polarization flips on the heralded modes and a pi phase
/// on `d3`. Each flip acts on one polarization slot of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Correction {
    pub flip_h_c3: bool,
    pub flip_v_c3: bool,
    pub flip_h_d3: bool,
    pub flip_v_d3: bool,
    pub phase_d3: bool,
}

impl Correction {
    fn from_mask(mask: u8) -> Self {
        Correction {
            flip_h_c3: mask & 1 != 0,
            flip_v_c3: mask & 2 != 0,
            flip_h_d3: mask & 4 != 0,
            flip_v_d3: mask & 8 != 0,
            phase_d3: mask & 16 != 0,
        }
    }

    /// All 32 compositions, fewest operations first.
    pub fn candidates() -> Vec<Correction> {
        let mut masks: Vec<u8> = (0..32).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        masks.into_iter().map(Correction::from_mask).collect()
    }

    pub fn elements(&self) -> Vec<OpticalElement> {
        let mut v = Vec::new();
        let flips = [
            (self.flip_h_c3, "c3", Polarization::H),
            (self.flip_v_c3, "c3", Polarization::V),
            (self.flip_h_d3, "d3", Polarization::H),
            (self.flip_v_d3, "d3", Polarization::V),
        ];
        for (on, mode, axis) in flips {
            if on {
                v.push(OpticalElement::pol_phase_flip(mode, axis));
            }
        }
        if self.phase_d3 {
            v.push(OpticalElement::mode_phase("d3", PI));
        }
        v
    }

    pub fn is_identity(&self) -> bool {
        *self == Correction::default()
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState, ElementError> {
        self.elements()
            .iter()
            .try_fold(state.clone(), |s, e| e.apply(&s))
    }
}

impl std::fmt::Display for Correction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_identity() {
            return f.write_str("identity");
        }
        let parts: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Correction to apply after each success pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTable {
    entries: Vec<(DetectionPattern, Correction)>,
}

impl CorrectionTable {
    pub fn entries(&self) -> &[(DetectionPattern, Correction)] {
        &self.entries
    }

    pub fn get(&self, pattern: &DetectionPattern) -> Option<Correction> {
        self.entries
            .iter()
            .find(|(p, _)| p == pattern)
            .map(|(_, c)| *c)
    }
}

/// Parameter points used to derive and cross-check the correction table.
const DERIVATION_POINTS: [(f64, f64); 3] = [(0.3, 0.2), (0.5, 0.25), (0.8, 0.45)];

/// Search the candidate corrections, fewest operations first, for each
/// success pattern. A candidate is accepted when, for every test vector
/// `(alpha, beta)` and every derivation point (matched `t2`), the corrected
/// heralded signal state equals the target with overlap exactly 1, global
/// phase included.
pub fn derive_correction_table_with(
    test_vectors: &[(f64, f64)],
) -> Result<CorrectionTable, ProtocolError> {
    let map = DetectorMap::standard();
    let patterns = detection::enumerate_success_patterns();
    // collapsed[pattern] = list of (collapsed signal state, target)
    let mut cases: Vec<Vec<(PureState, PureState)>> = vec![Vec::new(); patterns.len()];
    for &(a2, t1) in &DERIVATION_POINTS {
        let t2 = t2_matched(t1, a2)?;
        let ancilla = prepare_ancilla(t1, t2)?;
        for &(alpha, beta) in test_vectors {
            let a = a2.sqrt();
            let evolved = evolve_branch(&signal_state(a, alpha, beta)?, &ancilla)?;
            let target = signal_target(a, alpha, beta, t1, t2)?;
            for (i, p) in patterns.iter().enumerate() {
                let rec = detection::project(&evolved, p, &map)?;
                let collapsed = rec
                    .collapsed
                    .ok_or_else(|| ProtocolError::NoCorrection(p.to_string()))?;
                cases[i].push((collapsed, target.clone()));
            }
        }
    }
    let mut entries = Vec::with_capacity(patterns.len());
    for (pattern, cases) in patterns.into_iter().zip(cases) {
        let mut chosen = None;
        'candidates: for c in Correction::candidates() {
            for (collapsed, target) in &cases {
                let corrected = c.apply(collapsed)?;
                if (target.inner(&corrected)? - Complex64::new(1.0, 0.0)).norm() > COMPARE_TOLERANCE
                {
                    continue 'candidates;
                }
            }
            chosen = Some(c);
            break;
        }
        let c = chosen.ok_or_else(|| ProtocolError::NoCorrection(pattern.to_string()))?;
        entries.push((pattern, c));
    }
    Ok(CorrectionTable { entries })
}

pub fn derive_correction_table() -> Result<CorrectionTable, ProtocolError> {
    derive_correction_table_with(&[(0.6, 0.8), (-0.28, 0.96)])
}

/// Derived once per process and shared.
pub fn correction_table() -> Result<&'static CorrectionTable, ProtocolError> {
    static TABLE: OnceLock<Result<CorrectionTable, ProtocolError>> = OnceLock::new();
    TABLE
        .get_or_init(derive_correction_table)
        .as_ref()
        .map_err(Clone::clone)
}

#[derive(Debug, Clone)]
pub struct PatternOutcome {
    pub pattern: DetectionPattern,
    /// Probability of this pattern for the lossy input.
    pub probability: f64,
    /// Probability given the single-photon branch.
    pub signal_probability: f64,
    /// Probability given the vacuum branch.
    pub vacuum_probability: f64,
    /// Corrected heralded state of the single-photon branch.
    pub signal_state: Option<PureState>,
    /// Corrected posterior mixture on `c3`, `d3`.
    pub state: Option<EnsembleState>,
}

#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub t2: f64,
    pub per_pattern: Vec<PatternOutcome>,
    pub p1: f64,
    pub p2: f64,
    pub p_total: f64,
    /// `None` when `p_total == 0`.
    pub eta_out: Option<f64>,
    /// `None` when `eta == 0` or `p_total == 0`.
    pub gain: Option<f64>,
    /// Mixture over all success patterns, identical branches merged.
    pub output_state: Option<EnsembleState>,
}

impl ProtocolOutcome {
    pub fn failure_probability(&self) -> f64 {
        1.0 - self.p_total
    }
}

/// Simulate the full protocol for one parameter point.
pub fn run(params: &ProtocolParams) -> Result<ProtocolOutcome, ProtocolError> {
    let t2 = params.resolve_t2()?;
    let table = correction_table()?;
    let map = DetectorMap::standard();
    let ancilla = prepare_ancilla(params.t1, t2)?;
    let signal_in = signal_state(params.a, params.alpha, params.beta)?;
    let signal = evolve_branch(&signal_in, &ancilla)?;
    let vacuum = evolve_branch(&PureState::vacuum(signal_in.registry()), &ancilla)?;
    let ensemble = EnsembleState::new(vec![
        (params.eta, signal.clone()),
        (1.0 - params.eta, vacuum.clone()),
    ])?;

    let mut per_pattern = Vec::with_capacity(16);
    for pattern in detection::enumerate_success_patterns() {
        let correction = table
            .get(&pattern)
            .ok_or_else(|| ProtocolError::NoCorrection(pattern.to_string()))?;
        let sig = detection::project(&signal, &pattern, &map)?;
        let vac = detection::project(&vacuum, &pattern, &map)?;
        let (probability, state) = match detection::project_ensemble(&ensemble, &pattern, &map) {
            Ok((p, post)) => (p, Some(post.try_map(|s| correction.apply(s))?)),
            Err(DetectionError::ZeroProbability) => (0.0, None),
            Err(e) => return Err(e.into()),
        };
        per_pattern.push(PatternOutcome {
            pattern,
            probability,
            signal_probability: sig.probability,
            vacuum_probability: vac.probability,
            signal_state: sig.collapsed.map(|s| correction.apply(&s)).transpose()?,
            state,
        });
    }

    let p1: f64 = per_pattern.iter().map(|o| o.signal_probability).sum();
    let p2: f64 = per_pattern.iter().map(|o| o.vacuum_probability).sum();
    let p_total: f64 = per_pattern.iter().map(|o| o.probability).sum();
    let eta_out = (p_total > 0.0).then(|| params.eta * p1 / p_total);
    let gain = if params.eta > 0.0 {
        eta_out.map(|e| e / params.eta)
    } else {
        None
    };
    let output_state = if p_total > 0.0 {
        let mixture = per_pattern
            .iter()
            .filter_map(|o| o.state.as_ref().map(|s| (o.probability, s)))
            .flat_map(|(p, s)| s.branches().iter().map(move |(w, b)| (p * w, b.clone())))
            .collect();
        Some(EnsembleState::from_unnormalized(mixture)?.consolidated(COMPARE_TOLERANCE))
    } else {
        None
    };

    Ok(ProtocolOutcome {
        t2,
        per_pattern,
        p1,
        p2,
        p_total,
        eta_out,
        gain,
        output_state,
    })
}
