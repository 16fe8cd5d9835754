//! Ideal photon-number-resolving detection and heralding.
//!
//! A click means exactly one photon in the detector's slot. A pattern
//! requires every clicked detector to see one photon and every other mapped
//! detector to see none.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fock::{
    EnsembleState, FockError, ModeId, ModeRegistry, OccupationBasisState, Polarization, PureState,
    SpatialMode,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectionError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("detector {0} is not in the detector map")]
    UnmappedDetector(DetectorLabel),
    #[error("detector map is not a bijection: {0}")]
    NotBijective(String),
    #[error("photons left in unmeasured, unheralded mode {0}")]
    UnheraldedPhotons(ModeId),
    #[error("pattern has zero probability on every branch")]
    ZeroProbability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Alice,
    Bob,
}

/// `D{index}{a|b}`, index 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectorLabel {
    pub side: Side,
    pub index: u8,
}

impl DetectorLabel {
    pub const fn new(index: u8, side: Side) -> Self {
        DetectorLabel { side, index }
    }
}

impl fmt::Display for DetectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::Alice => 'a',
            Side::Bob => 'b',
        };
        write!(f, "D{}{}", self.index, s)
    }
}

/// Detector wiring plus the spatial modes kept as the heralded output.
#[derive(Debug, Clone)]
pub struct DetectorMap {
    assignments: Vec<(DetectorLabel, ModeId)>,
    heralded: Vec<SpatialMode>,
}

impl DetectorMap {
    pub fn new(
        assignments: Vec<(DetectorLabel, ModeId)>,
        heralded: Vec<SpatialMode>,
    ) -> Result<Self, DetectionError> {
        let labels: BTreeSet<_> = assignments.iter().map(|(l, _)| *l).collect();
        let modes: BTreeSet<_> = assignments.iter().map(|(_, m)| m.clone()).collect();
        if labels.len() != assignments.len() || modes.len() != assignments.len() {
            return Err(DetectionError::NotBijective(
                "repeated detector label or mode slot".into(),
            ));
        }
        if let Some(h) = heralded
            .iter()
            .find(|h| modes.iter().any(|m| &m.spatial == *h))
        {
            return Err(DetectionError::NotBijective(format!(
                "heralded mode {h} is also detected"
            )));
        }
        Ok(DetectorMap {
            assignments,
            heralded,
        })
    }

    /// The eight detectors behind the four PBS outputs on each side, with
    /// `c3` and `d3` as the heralded output modes.
    pub fn standard() -> Self {
        use Polarization::{H, V};
        let wiring = [
            (1, Side::Alice, "a4", H),
            (2, Side::Alice, "a5", V),
            (3, Side::Alice, "a6", H),
            (4, Side::Alice, "a7", V),
            (1, Side::Bob, "b4", H),
            (2, Side::Bob, "b5", V),
            (3, Side::Bob, "b6", H),
            (4, Side::Bob, "b7", V),
        ];
        let assignments = wiring
            .iter()
            .map(|&(i, side, m, p)| (DetectorLabel::new(i, side), ModeId::new(m, p)))
            .collect();
        DetectorMap::new(assignments, vec!["c3".into(), "d3".into()])
            .expect("standard wiring is bijective")
    }

    pub fn assignments(&self) -> &[(DetectorLabel, ModeId)] {
        &self.assignments
    }

    pub fn heralded(&self) -> &[SpatialMode] {
        &self.heralded
    }

    pub fn mode_of(&self, label: DetectorLabel) -> Option<&ModeId> {
        self.assignments
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, m)| m)
    }
}

/// Set of detectors that must each register exactly one photon.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectionPattern {
    clicked: BTreeSet<DetectorLabel>,
}

impl DetectionPattern {
    pub fn new<I: IntoIterator<Item = DetectorLabel>>(clicked: I) -> Self {
        DetectionPattern {
            clicked: clicked.into_iter().collect(),
        }
    }

    pub fn clicked(&self) -> &BTreeSet<DetectorLabel> {
        &self.clicked
    }

    /// Two clicks per side, each pair one H-slot detector (odd index) and
    /// one V-slot detector (even index).
    pub fn is_success(&self) -> bool {
        [Side::Alice, Side::Bob].iter().all(|&side| {
            let idx: Vec<u8> = self
                .clicked
                .iter()
                .filter(|l| l.side == side)
                .map(|l| l.index)
                .collect();
            idx.len() == 2 && idx.iter().filter(|i| *i % 2 == 1).count() == 1
        })
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.clicked {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Per-side detector pairs that herald success.
pub const SUCCESS_PAIRS: [(u8, u8); 4] = [(1, 2), (1, 4), (2, 3), (3, 4)];

/// The sixteen heralding patterns, Alice pair major.
pub fn enumerate_success_patterns() -> Vec<DetectionPattern> {
    let mut out = Vec::with_capacity(16);
    for &(a1, a2) in &SUCCESS_PAIRS {
        for &(b1, b2) in &SUCCESS_PAIRS {
            out.push(DetectionPattern::new([
                DetectorLabel::new(a1, Side::Alice),
                DetectorLabel::new(a2, Side::Alice),
                DetectorLabel::new(b1, Side::Bob),
                DetectorLabel::new(b2, Side::Bob),
            ]));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct OutcomeRecord {
    pub pattern: DetectionPattern,
    pub probability: f64,
    /// Normalized state on the heralded modes; `None` when `probability == 0`.
    pub collapsed: Option<PureState>,
}

struct Projector {
    required: Vec<(usize, u8)>,
    unheralded: Vec<usize>,
    kept: Vec<usize>,
    kept_registry: Arc<ModeRegistry>,
}

impl Projector {
    fn new(
        registry: &ModeRegistry,
        pattern: &DetectionPattern,
        map: &DetectorMap,
    ) -> Result<Self, DetectionError> {
        if let Some(l) = pattern.clicked.iter().find(|l| map.mode_of(**l).is_none()) {
            return Err(DetectionError::UnmappedDetector(*l));
        }
        let mut required = Vec::new();
        for (label, mode) in &map.assignments {
            let n = u8::from(pattern.clicked.contains(label));
            required.push((registry.slot_of(mode)?, n));
        }
        let kept_registry = Arc::new(ModeRegistry::new(map.heralded.iter().map(|h| h.as_str()))?);
        let kept = kept_registry
            .modes()
            .map(|m| registry.slot_of(&m))
            .collect::<Result<Vec<_>, _>>()?;
        let unheralded = (0..registry.slot_count())
            .filter(|s| !kept.contains(s) && !required.iter().any(|(r, _)| r == s))
            .collect();
        Ok(Projector {
            required,
            unheralded,
            kept,
            kept_registry,
        })
    }

    fn matches(&self, ket: &OccupationBasisState) -> bool {
        self.required.iter().all(|&(s, n)| ket.counts()[s] == n)
    }
}

/// Project a pure state onto one detection pattern.
pub fn project(
    state: &PureState,
    pattern: &DetectionPattern,
    map: &DetectorMap,
) -> Result<OutcomeRecord, DetectionError> {
    let registry = state.registry();
    let proj = Projector::new(registry, pattern, map)?;
    let mut probability = 0.0;
    let mut kept_terms = Vec::new();
    for (ket, amp) in state.terms() {
        if !proj.matches(ket) {
            continue;
        }
        if let Some(&s) = proj.unheralded.iter().find(|&&s| ket.counts()[s] > 0) {
            return Err(DetectionError::UnheraldedPhotons(registry.mode_at(s)));
        }
        probability += amp.norm_sqr();
        let counts = proj.kept.iter().map(|&s| ket.counts()[s]).collect();
        kept_terms.push((OccupationBasisState::from_counts(counts), *amp));
    }
    let collapsed = if probability > 0.0 {
        Some(PureState::from_terms(&proj.kept_registry, kept_terms).normalize()?)
    } else {
        None
    };
    Ok(OutcomeRecord {
        pattern: pattern.clone(),
        probability,
        collapsed,
    })
}

/// Project every branch of a mixture; returns the total pattern probability
/// and the Bayes-updated posterior on the heralded modes.
pub fn project_ensemble(
    ens: &EnsembleState,
    pattern: &DetectionPattern,
    map: &DetectorMap,
) -> Result<(f64, EnsembleState), DetectionError> {
    let mut probability = 0.0;
    let mut posterior = Vec::new();
    for (w, s) in ens.branches() {
        let rec = project(s, pattern, map)?;
        probability += w * rec.probability;
        if let Some(c) = rec.collapsed {
            posterior.push((w * rec.probability, c));
        }
    }
    if probability <= 0.0 {
        return Err(DetectionError::ZeroProbability);
    }
    Ok((probability, EnsembleState::from_unnormalized(posterior)?))
}

/// Probability of every joint detector count vector (ordered as
/// `map.assignments()`), summed over everything else.
pub fn outcome_distribution(
    state: &PureState,
    map: &DetectorMap,
) -> Result<BTreeMap<Vec<u8>, f64>, DetectionError> {
    let slots = map
        .assignments
        .iter()
        .map(|(_, m)| state.registry().slot_of(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut dist = BTreeMap::new();
    for (ket, amp) in state.terms() {
        let key: Vec<u8> = slots.iter().map(|&s| ket.counts()[s]).collect();
        *dist.entry(key).or_insert(0.0) += amp.norm_sqr();
    }
    Ok(dist)
}

/// Aggregate probability of every outcome not in `records`.
pub fn failure_probability(records: &[OutcomeRecord]) -> f64 {
    1.0 - records.iter().map(|r| r.probability).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::register_modes;
    use num_complex::Complex64;
    use Polarization::{H, V};

    const DETECTED: [&str; 10] = ["a4", "a5", "a6", "a7", "b4", "b5", "b6", "b7", "c3", "d3"];

    fn pattern(a: (u8, u8), b: (u8, u8)) -> DetectionPattern {
        DetectionPattern::new([
            DetectorLabel::new(a.0, Side::Alice),
            DetectorLabel::new(a.1, Side::Alice),
            DetectorLabel::new(b.0, Side::Bob),
            DetectorLabel::new(b.1, Side::Bob),
        ])
    }

    #[test]
    fn sixteen_patterns() {
        let p = enumerate_success_patterns();
        assert_eq!(p.len(), 16);
        assert!(p.contains(&pattern((1, 2), (1, 2))));
        assert!(p.contains(&pattern((3, 4), (3, 4))));
        assert!(p.iter().all(|x| x.is_success()));
        let uniq: BTreeSet<_> = p.iter().collect();
        assert_eq!(uniq.len(), 16);
        assert!(!pattern((1, 3), (1, 2)).is_success());
        assert_eq!(p[0].to_string(), "D1aD2aD1bD2b");
    }

    #[test]
    fn standard_map_is_bijective() {
        let m = DetectorMap::standard();
        assert_eq!(m.assignments().len(), 8);
        let bad = DetectorMap::new(
            vec![
                (DetectorLabel::new(1, Side::Alice), ModeId::new("a4", H)),
                (DetectorLabel::new(2, Side::Alice), ModeId::new("a4", H)),
            ],
            vec![],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn unpopulated_click_gives_zero() {
        let r = register_modes(&DETECTED).unwrap();
        let s = PureState::vacuum(&r).create_photon("c3", H).unwrap();
        let rec = project(&s, &pattern((1, 2), (1, 2)), &DetectorMap::standard()).unwrap();
        assert_eq!(rec.probability, 0.0);
        assert!(rec.collapsed.is_none());
    }

    #[test]
    fn unmapped_detector_rejected() {
        let r = register_modes(&DETECTED).unwrap();
        let s = PureState::vacuum(&r);
        let map = DetectorMap::new(
            vec![(DetectorLabel::new(1, Side::Alice), ModeId::new("a4", H))],
            vec!["c3".into()],
        )
        .unwrap();
        assert!(matches!(
            project(&s, &pattern((1, 2), (1, 2)), &map),
            Err(DetectionError::UnmappedDetector(_))
        ));
    }

    #[test]
    fn probability_quadratic_in_amplitude() {
        let r = register_modes(&DETECTED).unwrap();
        let clicks = PureState::vacuum(&r)
            .create_photon("a4", H)
            .unwrap()
            .create_photon("a5", V)
            .unwrap()
            .create_photon("b4", H)
            .unwrap()
            .create_photon("b5", V)
            .unwrap();
        let hit = clicks.create_photon("c3", H).unwrap();
        let miss = PureState::vacuum(&r).create_photon("d3", V).unwrap();
        let p = pattern((1, 2), (1, 2));
        let map = DetectorMap::standard();
        let base = hit.scaled(Complex64::new(0.3, 0.0)).add(&miss).unwrap();
        let doubled = hit.scaled(Complex64::new(0.6, 0.0)).add(&miss).unwrap();
        let p1 = project(&base, &p, &map).unwrap().probability;
        let p2 = project(&doubled, &p, &map).unwrap().probability;
        assert!((p2 - 4.0 * p1).abs() < 1e-15);
        let c = project(&base, &p, &map).unwrap().collapsed.unwrap();
        assert_eq!(c.registry().slot_count(), 4);
        assert!((c.amplitude_of(&[("c3", H, 1)]).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multi_photon_click_is_failure() {
        let r = register_modes(&DETECTED).unwrap();
        let s = PureState::vacuum(&r)
            .create_photon("a4", H)
            .unwrap()
            .create_photon("a4", H)
            .unwrap()
            .create_photon("a5", V)
            .unwrap()
            .create_photon("b4", H)
            .unwrap()
            .create_photon("b5", V)
            .unwrap()
            .normalize()
            .unwrap();
        let rec = project(&s, &pattern((1, 2), (1, 2)), &DetectorMap::standard()).unwrap();
        assert_eq!(rec.probability, 0.0);
    }

    #[test]
    fn unheralded_photons_reported() {
        let mut labels = DETECTED.to_vec();
        labels.push("x1");
        let r = register_modes(&labels).unwrap();
        let s = PureState::vacuum(&r)
            .create_photon("a4", H)
            .unwrap()
            .create_photon("a5", V)
            .unwrap()
            .create_photon("b4", H)
            .unwrap()
            .create_photon("b5", V)
            .unwrap()
            .create_photon("x1", H)
            .unwrap();
        assert!(matches!(
            project(&s, &pattern((1, 2), (1, 2)), &DetectorMap::standard()),
            Err(DetectionError::UnheraldedPhotons(_))
        ));
    }

    #[test]
    fn distribution_sums_to_norm() {
        let r = register_modes(&DETECTED).unwrap();
        let vac = PureState::vacuum(&r);
        let s = vac
            .create_photon("a4", H)
            .unwrap()
            .add(&vac.create_photon("c3", V).unwrap())
            .unwrap()
            .normalize()
            .unwrap();
        let d = outcome_distribution(&s, &DetectorMap::standard()).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
