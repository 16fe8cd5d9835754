//! Linear-optical elements acting on sparse Fock states.
//!
//! Each element is a linear substitution of creation operators,
//! `a†_in -> sum_k U[k][in] a†_k`. A basis ket is rewritten as a monomial of
//! creation operators on the vacuum, the substitution is expanded
//! multinomially, and bosonic normalization `sqrt(n!)` is restored on the
//! resulting kets. No dense Fock-space matrix is ever formed.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{FockError, ModeId, OccupationBasisState, Polarization, PureState, SpatialMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("transmission {0} outside [0, 1]")]
    TransmissionOutOfRange(f64),
    #[error("output mode {0} is already occupied")]
    OutputOccupied(ModeId),
}

/// A unitary mode transformation together with the spatial modes it connects.
#[derive(Debug, Clone, PartialEq)]
pub enum OpticalElement {
    /// Variable beam splitter. `input` goes to `out_t` with amplitude `sqrt(t)`
    /// and to `out_r` with `sqrt(1 - t)`. The second input port is not wired;
    /// it carries the `(sqrt(1 - t), -sqrt(t))` row that completes the unitary.
    Vbs {
        input: SpatialMode,
        out_t: SpatialMode,
        out_r: SpatialMode,
        t: f64,
    },
    /// 50:50 beam splitter: `in1 -> (out1 + out2)/sqrt2`, `in2 -> (out1 - out2)/sqrt2`.
    Bs50 {
        in1: SpatialMode,
        in2: SpatialMode,
        out1: SpatialMode,
        out2: SpatialMode,
    },
    /// Polarizing beam splitter: H transmitted to `out_h`, V reflected to `out_v`.
    Pbs {
        input: SpatialMode,
        out_h: SpatialMode,
        out_v: SpatialMode,
    },
    /// Sign flip `(-1)^n` on one polarization slot of a spatial mode.
    PolPhaseFlip {
        mode: SpatialMode,
        axis: Polarization,
    },
    /// Phase `exp(i phase n)` on the total photon number of a spatial mode.
    ModePhase { mode: SpatialMode, phase: f64 },
}

/// Single-photon transfer matrix; `entries[out][in]` is the coefficient of
/// `a†_out` in the image of `a†_in`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub inputs: Vec<ModeId>,
    pub outputs: Vec<ModeId>,
    pub entries: Vec<Vec<Complex64>>,
}

impl TransferMatrix {
    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.inputs.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: Complex64 = self.entries.iter().map(|row| row[i].conj() * row[j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expected).norm());
            }
        }
        worst
    }
}

/// One source slot and its image under the element.
type Coupling = (ModeId, Vec<(ModeId, Complex64)>);

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl OpticalElement {
    pub fn vbs(input: &str, out_t: &str, out_r: &str, t: f64) -> Self {
        OpticalElement::Vbs {
            input: input.into(),
            out_t: out_t.into(),
            out_r: out_r.into(),
            t,
        }
    }

    pub fn bs50(in1: &str, in2: &str, out1: &str, out2: &str) -> Self {
        OpticalElement::Bs50 {
            in1: in1.into(),
            in2: in2.into(),
            out1: out1.into(),
            out2: out2.into(),
        }
    }

    pub fn pbs(input: &str, out_h: &str, out_v: &str) -> Self {
        OpticalElement::Pbs {
            input: input.into(),
            out_h: out_h.into(),
            out_v: out_v.into(),
        }
    }

    pub fn pol_phase_flip(mode: &str, axis: Polarization) -> Self {
        OpticalElement::PolPhaseFlip {
            mode: mode.into(),
            axis,
        }
    }

    pub fn mode_phase(mode: &str, phase: f64) -> Self {
        OpticalElement::ModePhase {
            mode: mode.into(),
            phase,
        }
    }

    /// 2x2 spatial matrix `m[out_port][in_port]` of a polarization-independent splitter.
    fn splitter_matrix(&self) -> Option<[[f64; 2]; 2]> {
        match *self {
            OpticalElement::Vbs { t, .. } => {
                let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
                Some([[st, sr], [sr, -st]])
            }
            OpticalElement::Bs50 { .. } => Some([
                [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
                [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            ]),
            _ => None,
        }
    }

    /// Wired input and output spatial ports.
    fn ports(&self) -> (Vec<&SpatialMode>, Vec<&SpatialMode>) {
        match self {
            OpticalElement::Vbs {
                input,
                out_t,
                out_r,
                ..
            } => (vec![input], vec![out_t, out_r]),
            OpticalElement::Bs50 {
                in1,
                in2,
                out1,
                out2,
            } => (vec![in1, in2], vec![out1, out2]),
            OpticalElement::Pbs {
                input,
                out_h,
                out_v,
            } => (vec![input], vec![out_h, out_v]),
            OpticalElement::PolPhaseFlip { mode, .. } | OpticalElement::ModePhase { mode, .. } => {
                (vec![mode], vec![mode])
            }
        }
    }

    /// Source slots and their images, for wired inputs only.
    fn couplings(&self) -> Vec<Coupling> {
        let mode = |s: &SpatialMode, p| ModeId {
            spatial: s.clone(),
            polarization: p,
        };
        match self {
            OpticalElement::Pbs {
                input,
                out_h,
                out_v,
            } => vec![
                (
                    mode(input, Polarization::H),
                    vec![(mode(out_h, Polarization::H), r(1.0))],
                ),
                (
                    mode(input, Polarization::V),
                    vec![(mode(out_v, Polarization::V), r(1.0))],
                ),
            ],
            OpticalElement::Vbs { .. } | OpticalElement::Bs50 { .. } => {
                let m = self.splitter_matrix().expect("splitter");
                let (ins, outs) = self.ports();
                let mut v = Vec::new();
                for (p_in, s_in) in ins.iter().enumerate() {
                    for pol in Polarization::BOTH {
                        let image = outs
                            .iter()
                            .enumerate()
                            .map(|(p_out, s_out)| (mode(s_out, pol), r(m[p_out][p_in])))
                            .collect();
                        v.push((mode(s_in, pol), image));
                    }
                }
                v
            }
            OpticalElement::PolPhaseFlip { mode: m, axis } => Polarization::BOTH
                .iter()
                .map(|&p| {
                    let c = if p == *axis { -1.0 } else { 1.0 };
                    (mode(m, p), vec![(mode(m, p), r(c))])
                })
                .collect(),
            OpticalElement::ModePhase { mode: m, phase } => Polarization::BOTH
                .iter()
                .map(|&p| {
                    (
                        mode(m, p),
                        vec![(mode(m, p), Complex64::from_polar(1.0, *phase))],
                    )
                })
                .collect(),
        }
    }

    /// Full single-photon matrix of the element, including the unwired
    /// second VBS input (labelled `<input>*`).
    pub fn single_photon_matrix(&self) -> TransferMatrix {
        let mut couplings = self.couplings();
        if let OpticalElement::Vbs {
            input,
            out_t,
            out_r,
            ..
        } = self
        {
            let m = self.splitter_matrix().expect("splitter");
            let aux = SpatialMode::new(&format!("{input}*"));
            for pol in Polarization::BOTH {
                couplings.push((
                    ModeId {
                        spatial: aux.clone(),
                        polarization: pol,
                    },
                    vec![
                        (
                            ModeId {
                                spatial: out_t.clone(),
                                polarization: pol,
                            },
                            r(m[0][1]),
                        ),
                        (
                            ModeId {
                                spatial: out_r.clone(),
                                polarization: pol,
                            },
                            r(m[1][1]),
                        ),
                    ],
                ));
            }
        }
        let inputs: Vec<ModeId> = couplings.iter().map(|(m, _)| m.clone()).collect();
        let mut outputs: Vec<ModeId> = couplings
            .iter()
            .flat_map(|(_, img)| img.iter().map(|(m, _)| m.clone()))
            .collect();
        outputs.sort();
        outputs.dedup();
        let entries = outputs
            .iter()
            .map(|o| {
                couplings
                    .iter()
                    .map(|(_, img)| {
                        img.iter()
                            .find(|(m, _)| m == o)
                            .map(|(_, c)| *c)
                            .unwrap_or_default()
                    })
                    .collect()
            })
            .collect();
        TransferMatrix {
            inputs,
            outputs,
            entries,
        }
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState, ElementError> {
        let registry = state.registry();
        let (ins, outs) = self.ports();
        for s in ins.iter().chain(outs.iter()) {
            registry.slot(s.as_str(), Polarization::H)?;
        }
        match *self {
            OpticalElement::Vbs { t, .. } if !(0.0..=1.0).contains(&t) => {
                return Err(ElementError::TransmissionOutOfRange(t));
            }
            OpticalElement::PolPhaseFlip { ref mode, axis } => {
                let slot = registry.slot(mode.as_str(), axis)?;
                return Ok(state.map_terms(registry, |k, a| {
                    let sign = if k.counts()[slot] % 2 == 1 { -1.0 } else { 1.0 };
                    Some((k.clone(), a * sign))
                }));
            }
            OpticalElement::ModePhase { ref mode, phase } => {
                let h = registry.slot(mode.as_str(), Polarization::H)?;
                let v = registry.slot(mode.as_str(), Polarization::V)?;
                return Ok(state.map_terms(registry, |k, a| {
                    let n = (k.counts()[h] + k.counts()[v]) as f64;
                    Some((k.clone(), a * Complex64::from_polar(1.0, phase * n)))
                }));
            }
            _ => {}
        }
        // output ports that are not also inputs must start empty
        for s in outs.iter().filter(|o| !ins.contains(o)) {
            for pol in Polarization::BOTH {
                let slot = registry.slot(s.as_str(), pol)?;
                if state.terms().any(|(k, _)| k.counts()[slot] > 0) {
                    return Err(ElementError::OutputOccupied(ModeId {
                        spatial: (*s).clone(),
                        polarization: pol,
                    }));
                }
            }
        }
        apply_mode_transform(state, &self.couplings())
    }
}

impl fmt::Display for OpticalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpticalElement::Vbs {
                input,
                out_t,
                out_r,
                t,
            } => write!(f, "VBS(t={t}) {input} -> {out_t}, {out_r}"),
            OpticalElement::Bs50 {
                in1,
                in2,
                out1,
                out2,
            } => write!(f, "BS50 {in1}, {in2} -> {out1}, {out2}"),
            OpticalElement::Pbs {
                input,
                out_h,
                out_v,
            } => write!(f, "PBS {input} -> {out_h}(H), {out_v}(V)"),
            OpticalElement::PolPhaseFlip { mode, axis } => write!(f, "flip {axis} on {mode}"),
            OpticalElement::ModePhase { mode, phase } => {
                write!(f, "phase {:.6} rad on {mode}", phase)
            }
        }
    }
}

fn sqrt_factorial(n: u8) -> f64 {
    (2..=n as u32).map(f64::from).product::<f64>().sqrt()
}

/// All ways to write `n` as an ordered sum of `parts` non-negative integers.
fn compositions(n: u8, parts: usize) -> Vec<Vec<u8>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multinomial(parts: &[u8]) -> f64 {
    let n: u32 = parts.iter().map(|&k| k as u32).sum();
    let num: f64 = (2..=n).map(f64::from).product();
    let den: f64 = parts
        .iter()
        .map(|&k| (2..=k as u32).map(f64::from).product::<f64>())
        .product();
    num / den
}

/// Apply an arbitrary creation-operator substitution. Slots not listed as
/// sources are left untouched; callers are responsible for the substitution
/// being an isometry on the occupied subspace.
pub fn apply_mode_transform(
    state: &PureState,
    couplings: &[(ModeId, Vec<(ModeId, Complex64)>)],
) -> Result<PureState, ElementError> {
    let registry = state.registry();
    let resolved: Vec<(usize, Vec<(usize, Complex64)>)> = couplings
        .iter()
        .map(|(src, image)| {
            let image = image
                .iter()
                .map(|(m, c)| Ok((registry.slot_of(m)?, *c)))
                .collect::<Result<Vec<_>, FockError>>()?;
            Ok((registry.slot_of(src)?, image))
        })
        .collect::<Result<_, FockError>>()?;

    let mut out = Vec::new();
    for (ket, amp) in state.terms() {
        let counts = ket.counts();
        let mut base = counts.to_vec();
        // |n> = prod (a†)^n / sqrt(n!) |0>
        let coef = *amp / counts.iter().map(|&n| sqrt_factorial(n)).product::<f64>();
        for (src, _) in &resolved {
            base[*src] = 0;
        }
        let mut partial = vec![(base, coef)];
        for (src, image) in &resolved {
            let n = counts[*src];
            if n == 0 {
                continue;
            }
            let mut next = Vec::new();
            for comp in compositions(n, image.len()) {
                let mut c = r(multinomial(&comp));
                for (&k, (_, u)) in comp.iter().zip(image) {
                    c *= u.powu(k as u32);
                }
                if c.norm() == 0.0 {
                    continue;
                }
                for (b, pc) in &partial {
                    let mut nb = b.clone();
                    for (&k, (slot, _)) in comp.iter().zip(image) {
                        nb[*slot] += k;
                    }
                    next.push((nb, pc * c));
                }
            }
            partial = next;
        }
        for (counts, c) in partial {
            let norm: f64 = counts.iter().map(|&n| sqrt_factorial(n)).product();
            out.push((OccupationBasisState::from_counts(counts), c * norm));
        }
    }
    Ok(PureState::from_terms(registry, out))
}

pub fn vbs_apply(
    state: &PureState,
    input: &str,
    out_t: &str,
    out_r: &str,
    t: f64,
) -> Result<PureState, ElementError> {
    OpticalElement::vbs(input, out_t, out_r, t).apply(state)
}

pub fn bs50_apply(
    state: &PureState,
    in1: &str,
    in2: &str,
    out1: &str,
    out2: &str,
) -> Result<PureState, ElementError> {
    OpticalElement::bs50(in1, in2, out1, out2).apply(state)
}

pub fn pbs_apply(
    state: &PureState,
    input: &str,
    out_h: &str,
    out_v: &str,
) -> Result<PureState, ElementError> {
    OpticalElement::pbs(input, out_h, out_v).apply(state)
}

pub fn pol_phase_flip(
    state: &PureState,
    spatial: &str,
    axis: Polarization,
) -> Result<PureState, ElementError> {
    OpticalElement::pol_phase_flip(spatial, axis).apply(state)
}

pub fn mode_phase(state: &PureState, spatial: &str, phase: f64) -> Result<PureState, ElementError> {
    OpticalElement::mode_phase(spatial, phase).apply(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::register_modes;
    use std::f64::consts::PI;
    use Polarization::{H, V};

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < 1e-14
    }

    fn one(labels: &[&str], spatial: &str, pol: Polarization) -> PureState {
        let r = register_modes(labels).unwrap();
        PureState::vacuum(&r).create_photon(spatial, pol).unwrap()
    }

    #[test]
    fn vbs_full_transmission() {
        let s = one(&["c1", "c2", "c3"], "c1", H);
        let out = vbs_apply(&s, "c1", "c2", "c3", 1.0).unwrap();
        assert_eq!(out.len(), 1);
        assert!(close(out.amplitude_of(&[("c2", H, 1)]).unwrap(), 1.0));
    }

    #[test]
    fn vbs_quarter_transmission() {
        let s = one(&["c1", "c2", "c3"], "c1", H);
        let out = vbs_apply(&s, "c1", "c2", "c3", 0.25).unwrap();
        assert!(close(out.amplitude_of(&[("c2", H, 1)]).unwrap(), 0.5));
        assert!(close(
            out.amplitude_of(&[("c3", H, 1)]).unwrap(),
            0.75f64.sqrt()
        ));
    }

    #[test]
    fn vbs_two_photon_product_structure() {
        let t: f64 = 0.3;
        let s = one(&["c1", "c2", "c3"], "c1", H)
            .create_photon("c1", V)
            .unwrap();
        let out = vbs_apply(&s, "c1", "c2", "c3", t).unwrap();
        let m = (t * (1.0 - t)).sqrt();
        assert!(close(
            out.amplitude_of(&[("c2", H, 1), ("c2", V, 1)]).unwrap(),
            t
        ));
        assert!(close(
            out.amplitude_of(&[("c3", H, 1), ("c3", V, 1)]).unwrap(),
            1.0 - t
        ));
        assert!(close(
            out.amplitude_of(&[("c2", H, 1), ("c3", V, 1)]).unwrap(),
            m
        ));
        assert!(close(
            out.amplitude_of(&[("c2", V, 1), ("c3", H, 1)]).unwrap(),
            m
        ));
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn vbs_rejects_bad_transmission() {
        let s = one(&["c1", "c2", "c3"], "c1", H);
        assert_eq!(
            vbs_apply(&s, "c1", "c2", "c3", 1.5).unwrap_err(),
            ElementError::TransmissionOutOfRange(1.5)
        );
    }

    #[test]
    fn occupied_output_rejected() {
        let s = one(&["c1", "c2", "c3"], "c1", H)
            .create_photon("c2", V)
            .unwrap();
        assert!(matches!(
            vbs_apply(&s, "c1", "c2", "c3", 0.5),
            Err(ElementError::OutputOccupied(_))
        ));
    }

    #[test]
    fn bs50_single_photon_rows() {
        let labels = ["a1", "a2", "a3", "c2"];
        let out = bs50_apply(&one(&labels, "a1", H), "a1", "c2", "a2", "a3").unwrap();
        assert!(close(
            out.amplitude_of(&[("a2", H, 1)]).unwrap(),
            FRAC_1_SQRT_2
        ));
        assert!(close(
            out.amplitude_of(&[("a3", H, 1)]).unwrap(),
            FRAC_1_SQRT_2
        ));
        let out = bs50_apply(&one(&labels, "c2", H), "a1", "c2", "a2", "a3").unwrap();
        assert!(close(
            out.amplitude_of(&[("a2", H, 1)]).unwrap(),
            FRAC_1_SQRT_2
        ));
        assert!(close(
            out.amplitude_of(&[("a3", H, 1)]).unwrap(),
            -FRAC_1_SQRT_2
        ));
    }

    #[test]
    fn hong_ou_mandel_bunching() {
        let s = one(&["a1", "a2", "a3", "c2"], "a1", H)
            .create_photon("c2", H)
            .unwrap();
        let out = bs50_apply(&s, "a1", "c2", "a2", "a3").unwrap();
        assert!(
            out.amplitude_of(&[("a2", H, 1), ("a3", H, 1)])
                .unwrap()
                .norm()
                <= 1e-14
        );
        assert!(close(
            out.amplitude_of(&[("a2", H, 2)]).unwrap(),
            FRAC_1_SQRT_2
        ));
        assert!(close(
            out.amplitude_of(&[("a3", H, 2)]).unwrap(),
            -FRAC_1_SQRT_2
        ));
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn pbs_routes_by_polarization() {
        let labels = ["a2", "a4", "a5"];
        let out = pbs_apply(&one(&labels, "a2", H), "a2", "a4", "a5").unwrap();
        assert!(close(out.amplitude_of(&[("a4", H, 1)]).unwrap(), 1.0));
        let out = pbs_apply(&one(&labels, "a2", V), "a2", "a4", "a5").unwrap();
        assert!(close(out.amplitude_of(&[("a5", V, 1)]).unwrap(), 1.0));
        let hv = one(&["a3", "a6", "a7"], "a3", H)
            .create_photon("a3", V)
            .unwrap();
        let out = pbs_apply(&hv, "a3", "a6", "a7").unwrap();
        assert!(close(
            out.amplitude_of(&[("a6", H, 1), ("a7", V, 1)]).unwrap(),
            1.0
        ));
    }

    #[test]
    fn phase_flip_corrects_sign() {
        let r = register_modes(&["c3"]).unwrap();
        let vac = PureState::vacuum(&r);
        let (alpha, beta) = (0.6, 0.8);
        let h = vac.create_photon("c3", H).unwrap();
        let v = vac.create_photon("c3", V).unwrap();
        let wrong = h
            .scaled((-alpha).into())
            .add(&v.scaled(beta.into()))
            .unwrap();
        let right = h.scaled(alpha.into()).add(&v.scaled(beta.into())).unwrap();
        let fixed = pol_phase_flip(&wrong, "c3", H).unwrap();
        assert!((fixed.fidelity(&right).unwrap() - 1.0).abs() < 1e-14);
        let back = pol_phase_flip(&fixed, "c3", H).unwrap();
        assert_eq!(back.to_debug_string(), wrong.to_debug_string());
        assert_eq!(
            pol_phase_flip(&vac, "c3", V).unwrap().to_debug_string(),
            vac.to_debug_string()
        );
    }

    #[test]
    fn mode_phase_pi() {
        let s = one(&["d3"], "d3", H);
        let out = mode_phase(&s, "d3", PI).unwrap();
        assert!(close(out.amplitude_of(&[("d3", H, 1)]).unwrap(), -1.0));
        let vac = PureState::vacuum(s.registry());
        assert_eq!(
            mode_phase(&vac, "d3", 1.234).unwrap().to_debug_string(),
            vac.to_debug_string()
        );
        assert_eq!(
            mode_phase(&s, "d3", 0.0).unwrap().to_debug_string(),
            s.to_debug_string()
        );
    }

    #[test]
    fn every_element_is_unitary() {
        let elements = [
            OpticalElement::vbs("c1", "c2", "c3", 0.0),
            OpticalElement::vbs("c1", "c2", "c3", 0.37),
            OpticalElement::vbs("c1", "c2", "c3", 1.0),
            OpticalElement::bs50("a1", "c2", "a2", "a3"),
            OpticalElement::pbs("a2", "a4", "a5"),
            OpticalElement::pol_phase_flip("c3", H),
            OpticalElement::mode_phase("d3", 0.7),
        ];
        for e in &elements {
            let m = e.single_photon_matrix();
            assert_eq!(m.inputs.len(), m.outputs.len(), "{e}");
            assert!(
                m.unitarity_defect() <= 1e-14,
                "{e}: {}",
                m.unitarity_defect()
            );
        }
    }

    #[test]
    fn vbs_half_equals_bs50_on_first_input() {
        let labels = ["a1", "a2", "a3", "c2"];
        for pol in Polarization::BOTH {
            let s = one(&labels, "a1", pol);
            let v = vbs_apply(&s, "a1", "a2", "a3", 0.5).unwrap();
            let b = bs50_apply(&s, "a1", "c2", "a2", "a3").unwrap();
            assert!((v.inner(&b).unwrap() - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn compositions_count() {
        // C(n + k - 1, k - 1)
        assert_eq!(compositions(3, 2).len(), 4);
        assert_eq!(compositions(2, 3).len(), 6);
        assert_eq!(multinomial(&[1, 2]), 3.0);
    }
}
