//! Sparse multi-photon states over named optical modes.
//!
//! Every spatial mode carries two polarization slots (H then V). A
//! [`ModeRegistry`] fixes the slot order: spatial labels sorted
//! lexicographically, H before V. Kets are photon-count vectors in that order,
//! so equal kets compare equal bytewise and terms iterate deterministically.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::config::{COMPARE_TOLERANCE, PRUNE_TOLERANCE, WEIGHT_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("spatial mode `{0}` listed more than once")]
    DuplicateLabel(SpatialMode),
    #[error("mode `{0}` is not registered")]
    UnregisteredMode(String),
    #[error("registries overlap on spatial mode `{0}`")]
    OverlappingRegistries(SpatialMode),
    #[error("states live on different mode registries")]
    RegistryMismatch,
    #[error("cannot normalize the zero state")]
    ZeroState,
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    fn offset(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }

    pub fn orthogonal(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

/// Symbolic spatial-mode label such as `a1` or `c3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpatialMode(Arc<str>);

impl SpatialMode {
    pub fn new(label: &str) -> Self {
        SpatialMode(Arc::from(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for SpatialMode {
    fn from(label: &str) -> Self {
        SpatialMode::new(label)
    }
}

impl fmt::Display for SpatialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One (spatial mode, polarization) slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub spatial: SpatialMode,
    pub polarization: Polarization,
}

impl ModeId {
    pub fn new(spatial: &str, polarization: Polarization) -> Self {
        ModeId {
            spatial: SpatialMode::new(spatial),
            polarization,
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.spatial, self.polarization)
    }
}

/// Ordered set of spatial modes; each contributes an H slot and a V slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegistry {
    labels: Vec<SpatialMode>,
}

impl ModeRegistry {
    pub fn new<I, S>(labels: I) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut labels: Vec<SpatialMode> = labels
            .into_iter()
            .map(|s| SpatialMode::new(s.as_ref()))
            .collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(FockError::DuplicateLabel(w[0].clone()));
        }
        Ok(ModeRegistry { labels })
    }

    pub fn labels(&self) -> &[SpatialMode] {
        &self.labels
    }

    pub fn slot_count(&self) -> usize {
        2 * self.labels.len()
    }

    pub fn contains(&self, spatial: &str) -> bool {
        self.spatial_index(spatial).is_some()
    }

    fn spatial_index(&self, spatial: &str) -> Option<usize> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(spatial))
            .ok()
    }

    /// Slot index of `(spatial, polarization)`.
    pub fn slot(&self, spatial: &str, polarization: Polarization) -> Result<usize, FockError> {
        self.spatial_index(spatial)
            .map(|i| 2 * i + polarization.offset())
            .ok_or_else(|| FockError::UnregisteredMode(format!("{spatial},{polarization}")))
    }

    pub fn slot_of(&self, mode: &ModeId) -> Result<usize, FockError> {
        self.slot(mode.spatial.as_str(), mode.polarization)
    }

    pub fn mode_at(&self, slot: usize) -> ModeId {
        ModeId {
            spatial: self.labels[slot / 2].clone(),
            polarization: Polarization::BOTH[slot % 2],
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeId> + '_ {
        (0..self.slot_count()).map(|s| self.mode_at(s))
    }

    /// Disjoint union of two registries, in canonical order.
    pub fn union(&self, other: &ModeRegistry) -> Result<ModeRegistry, FockError> {
        if let Some(shared) = other.labels.iter().find(|l| self.contains(l.as_str())) {
            return Err(FockError::OverlappingRegistries(shared.clone()));
        }
        ModeRegistry::new(
            self.labels
                .iter()
                .chain(other.labels.iter())
                .map(|l| l.as_str()),
        )
    }
}

/// Build a shared registry from spatial labels.
pub fn register_modes<S: AsRef<str>>(labels: &[S]) -> Result<Arc<ModeRegistry>, FockError> {
    ModeRegistry::new(labels.iter().map(|s| s.as_ref())).map(Arc::new)
}

/// Photon counts per registry slot: one Fock basis ket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationBasisState(Box<[u8]>);

impl OccupationBasisState {
    pub fn vacuum(slots: usize) -> Self {
        OccupationBasisState(vec![0; slots].into_boxed_slice())
    }

    pub fn from_counts(counts: Vec<u8>) -> Self {
        OccupationBasisState(counts.into_boxed_slice())
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn total_photons(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }
}

impl fmt::Display for OccupationBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// Sparse superposition of Fock kets with complex amplitudes.
///
/// Not normalized automatically: creation operators and projections produce
/// unnormalized states, and [`PureState::normalize`] rescales explicitly.
#[derive(Debug, Clone)]
pub struct PureState {
    registry: Arc<ModeRegistry>,
    terms: BTreeMap<OccupationBasisState, Complex64>,
}

impl PureState {
    pub fn vacuum(registry: &Arc<ModeRegistry>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            OccupationBasisState::vacuum(registry.slot_count()),
            Complex64::new(1.0, 0.0),
        );
        PureState {
            registry: Arc::clone(registry),
            terms,
        }
    }

    /// The zero vector (no terms).
    pub fn zero(registry: &Arc<ModeRegistry>) -> Self {
        PureState {
            registry: Arc::clone(registry),
            terms: BTreeMap::new(),
        }
    }

    /// Accumulate `(ket, amplitude)` pairs; repeated kets add and small
    /// amplitudes are pruned.
    pub fn from_terms<I>(registry: &Arc<ModeRegistry>, terms: I) -> Self
    where
        I: IntoIterator<Item = (OccupationBasisState, Complex64)>,
    {
        let mut acc: BTreeMap<OccupationBasisState, Complex64> = BTreeMap::new();
        for (ket, amp) in terms {
            debug_assert_eq!(ket.counts().len(), registry.slot_count());
            *acc.entry(ket).or_default() += amp;
        }
        acc.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
        PureState {
            registry: Arc::clone(registry),
            terms: acc,
        }
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationBasisState, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, ket: &OccupationBasisState) -> Complex64 {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    /// Amplitude of the ket given by `(mode, count)` pairs, all other slots empty.
    pub fn amplitude_of(
        &self,
        occupied: &[(&str, Polarization, u8)],
    ) -> Result<Complex64, FockError> {
        let ket = self.ket(occupied)?;
        Ok(self.amplitude(&ket))
    }

    /// Build a ket on this state's registry from `(spatial, polarization, count)` triples.
    pub fn ket(
        &self,
        occupied: &[(&str, Polarization, u8)],
    ) -> Result<OccupationBasisState, FockError> {
        let mut counts = vec![0u8; self.registry.slot_count()];
        for &(spatial, pol, n) in occupied {
            counts[self.registry.slot(spatial, pol)?] += n;
        }
        Ok(OccupationBasisState::from_counts(counts))
    }

    /// Apply the creation operator on `mode`, including the sqrt(n+1) factor.
    pub fn create_photon(
        &self,
        spatial: &str,
        polarization: Polarization,
    ) -> Result<PureState, FockError> {
        let slot = self.registry.slot(spatial, polarization)?;
        let terms = self.terms.iter().map(|(ket, amp)| {
            let mut counts = ket.counts().to_vec();
            let n = counts[slot];
            counts[slot] = n + 1;
            (
                OccupationBasisState::from_counts(counts),
                amp * ((n as f64) + 1.0).sqrt(),
            )
        });
        Ok(PureState::from_terms(&self.registry, terms))
    }

    /// Product state over the union of both registries.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, FockError> {
        let registry = Arc::new(self.registry.union(&other.registry)?);
        // position of each source slot in the merged registry
        let left: Vec<usize> = self
            .registry
            .modes()
            .map(|m| registry.slot_of(&m))
            .collect::<Result<_, _>>()?;
        let right: Vec<usize> = other
            .registry
            .modes()
            .map(|m| registry.slot_of(&m))
            .collect::<Result<_, _>>()?;
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (k1, a1) in &self.terms {
            for (k2, a2) in &other.terms {
                let mut counts = vec![0u8; registry.slot_count()];
                for (i, &n) in k1.counts().iter().enumerate() {
                    counts[left[i]] = n;
                }
                for (i, &n) in k2.counts().iter().enumerate() {
                    counts[right[i]] = n;
                }
                terms.push((OccupationBasisState::from_counts(counts), a1 * a2));
            }
        }
        Ok(PureState::from_terms(&registry, terms))
    }

    /// Tensor with the vacuum on additional spatial modes.
    pub fn extend<S: AsRef<str>>(&self, labels: &[S]) -> Result<PureState, FockError> {
        let extra = register_modes(labels)?;
        self.tensor(&PureState::vacuum(&extra))
    }

    fn check_registry(&self, other: &PureState) -> Result<(), FockError> {
        if Arc::ptr_eq(&self.registry, &other.registry) || self.registry == other.registry {
            Ok(())
        } else {
            Err(FockError::RegistryMismatch)
        }
    }

    /// Hermitian inner product `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64, FockError> {
        self.check_registry(other)?;
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::default();
        for (ket, a) in &small.terms {
            if let Some(b) = large.terms.get(ket) {
                acc += if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                };
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<PureState, FockError> {
        let n = self.norm();
        if n < PRUNE_TOLERANCE {
            return Err(FockError::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= COMPARE_TOLERANCE
    }

    pub fn scaled(&self, factor: Complex64) -> PureState {
        PureState::from_terms(
            &self.registry,
            self.terms.iter().map(|(k, a)| (k.clone(), a * factor)),
        )
    }

    /// `self + other`, on a shared registry.
    pub fn add(&self, other: &PureState) -> Result<PureState, FockError> {
        self.check_registry(other)?;
        Ok(PureState::from_terms(
            &self.registry,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(k, a)| (k.clone(), *a)),
        ))
    }

    /// `|<self|other>|^2 / (<self|self><other|other>)`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64, FockError> {
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom < PRUNE_TOLERANCE * PRUNE_TOLERANCE {
            return Err(FockError::ZeroState);
        }
        Ok(self.inner(other)?.norm_sqr() / denom)
    }

    /// Total photon number if every term shares it.
    pub fn photon_number(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|k| k.total_photons());
        let first = it.next()?;
        it.all(|n| n == first).then_some(first)
    }

    /// Map every term through `f`, dropping terms for which it returns `None`.
    pub(crate) fn map_terms<F>(&self, registry: &Arc<ModeRegistry>, mut f: F) -> PureState
    where
        F: FnMut(&OccupationBasisState, Complex64) -> Option<(OccupationBasisState, Complex64)>,
    {
        PureState::from_terms(registry, self.terms.iter().filter_map(|(k, a)| f(k, *a)))
    }

    /// Line-oriented dump, one `<count-vector> <re> <im>` line per term in
    /// canonical ket order. Used for golden-file comparisons.
    pub fn to_debug_string(&self) -> String {
        let mut out = String::new();
        for (ket, amp) in &self.terms {
            out.push_str(&format!("{ket} {:.12e} {:.12e}\n", amp.re, amp.im));
        }
        out
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_debug_string())
    }
}

/// Classical mixture of pure states, `sum_i w_i |psi_i><psi_i|`.
#[derive(Debug, Clone)]
pub struct EnsembleState {
    branches: Vec<(f64, PureState)>,
}

impl EnsembleState {
    /// Weights must be non-negative and sum to one; each state normalized.
    /// Zero-weight branches are dropped.
    pub fn new(branches: Vec<(f64, PureState)>) -> Result<Self, FockError> {
        if branches.is_empty() {
            return Err(FockError::InvalidEnsemble("no branches".into()));
        }
        if let Some((w, _)) = branches.iter().find(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(FockError::InvalidEnsemble(format!(
                "weight {w} is not a probability"
            )));
        }
        let total: f64 = branches.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(FockError::InvalidEnsemble(format!(
                "weights sum to {total}"
            )));
        }
        let registry = Arc::clone(branches[0].1.registry());
        for (_, s) in &branches {
            if **s.registry() != *registry {
                return Err(FockError::RegistryMismatch);
            }
            if !s.is_normalized() {
                return Err(FockError::InvalidEnsemble(format!(
                    "branch norm^2 {} != 1",
                    s.norm_sqr()
                )));
            }
        }
        Ok(EnsembleState {
            branches: branches.into_iter().filter(|(w, _)| *w > 0.0).collect(),
        })
    }

    pub fn pure(state: PureState) -> Result<Self, FockError> {
        EnsembleState::new(vec![(1.0, state)])
    }

    /// Build from unnormalized `(weight, state)` pairs: each state is
    /// normalized and its squared norm folded into the weight, then weights
    /// are rescaled to sum to one. This is post-selection renormalization.
    pub fn from_unnormalized(branches: Vec<(f64, PureState)>) -> Result<Self, FockError> {
        let mut out = Vec::with_capacity(branches.len());
        for (w, s) in branches {
            let p = w * s.norm_sqr();
            if p > 0.0 && s.norm() >= PRUNE_TOLERANCE {
                out.push((p, s.normalize()?));
            }
        }
        let total: f64 = out.iter().map(|(w, _)| w).sum();
        if total <= 0.0 {
            return Err(FockError::ZeroState);
        }
        for (w, _) in &mut out {
            *w /= total;
        }
        EnsembleState::new(out)
    }

    pub fn branches(&self) -> &[(f64, PureState)] {
        &self.branches
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|(w, _)| w).sum()
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        self.branches[0].1.registry()
    }

    /// Apply the same map to every branch.
    pub fn try_map<F, E>(&self, mut f: F) -> Result<EnsembleState, E>
    where
        F: FnMut(&PureState) -> Result<PureState, E>,
    {
        let branches = self
            .branches
            .iter()
            .map(|(w, s)| Ok((*w, f(s)?)))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(EnsembleState { branches })
    }

    /// `<target| rho |target>` for a normalized target.
    pub fn fidelity_with(&self, target: &PureState) -> Result<f64, FockError> {
        let mut acc = 0.0;
        for (w, s) in &self.branches {
            acc += w * s.inner(target)?.norm_sqr();
        }
        Ok(acc / target.norm_sqr())
    }

    /// Merge branches that describe the same ray (fidelity within
    /// `tolerance` of 1), summing their weights.
    pub fn consolidated(&self, tolerance: f64) -> EnsembleState {
        let mut merged: Vec<(f64, PureState)> = Vec::new();
        for (w, s) in &self.branches {
            match merged.iter_mut().find(|(_, m)| {
                m.fidelity(s)
                    .map(|f| (1.0 - f).abs() <= tolerance)
                    .unwrap_or(false)
            }) {
                Some((mw, _)) => *mw += w,
                None => merged.push((*w, s.clone())),
            }
        }
        EnsembleState { branches: merged }
    }
}
