//! Discrete-mode quantized field in truncated Fock space.
//!
//! A [`FieldState`] is a density matrix on the tensor product of the mode Fock
//! spaces (mode 0 is the most significant factor). Mode operators carry their
//! coupling `λ_j`, so `E = Σ_j (A_j + A_j†)` with `A_j = λ_j a_j`.
//!
//! Truncation guards refuse states whose weight near the Fock cutoff would
//! spoil fourth-order moments; the error names the truncation that would work.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{tensor_all, HermitianEigen, OperatorMatrix, C64, DEFAULT_MAX_DIM, ONE, ZERO};

pub const DEFAULT_TRUNCATION: usize = 16;

/// Largest weight allowed beyond the cutoff for thermal and squeezed states.
pub const TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMode {
    pub frequency: f64,
    /// Field amplitude per photon; absorbs every quantization prefactor.
    pub coupling: f64,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

impl FieldMode {
    pub fn new(frequency: f64, coupling: f64, truncation: usize) -> Self {
        Self { frequency, coupling, truncation }
    }

    fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::arg(format!("mode frequency must be positive, got {}", self.frequency)));
        }
        if !self.coupling.is_finite() {
            return Err(Error::arg("mode coupling must be finite"));
        }
        if self.truncation < 2 {
            return Err(Error::arg("Fock truncation must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Annihilate,
    Create,
}

/// State of a single mode.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeState {
    Vacuum,
    Fock(usize),
    Coherent(C64),
    Thermal(f64),
    /// Squeezed vacuum `S(r e^{iφ})|0⟩`.
    Squeezed { r: f64, phi: f64 },
    /// `|β⟩ + |−β⟩` (even) or `|β⟩ − |−β⟩` (odd), normalized.
    Cat { beta: C64, even: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    /// Product of per-mode states, one entry per mode.
    Product(Vec<ModeState>),
    /// Statistical mixture of multimode coherent states `(β per mode, weight)`.
    CoherentMixture(Vec<(Vec<C64>, f64)>),
    Custom(OperatorMatrix),
}

#[derive(Clone, Debug)]
pub struct FieldState {
    modes: Vec<FieldMode>,
    rho_f: OperatorMatrix,
    kind_tag: String,
    spec: StateSpec,
    // λ-weighted annihilators embedded in the full mode space.
    annihilators: Vec<OperatorMatrix>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PAtom {
    pub amplitudes: Vec<C64>,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PForm {
    Discrete,
    GaussianGrid,
}

/// Glauber–Sudarshan weights as a finite set of coherent-state atoms.
#[derive(Clone, Debug)]
pub struct PRepresentation {
    pub atoms: Vec<PAtom>,
    pub form: PForm,
    pub normalization: f64,
}

/// Polar quadrature grid for Gaussian P functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalGrid {
    pub radial: usize,
    pub angular: usize,
    /// Radial cutoff in units of `√n̄`.
    pub radius_sigmas: f64,
}

impl Default for ThermalGrid {
    fn default() -> Self {
        Self { radial: 32, angular: 32, radius_sigmas: 5.0 }
    }
}

const MAX_P_ATOMS: usize = 1 << 20;

impl FieldState {
    pub fn modes(&self) -> &[FieldMode] {
        &self.modes
    }

    pub fn rho(&self) -> &OperatorMatrix {
        &self.rho_f
    }

    pub fn kind_tag(&self) -> &str {
        &self.kind_tag
    }

    pub fn spec(&self) -> &StateSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.rho_f.dim()
    }

    /// `λ_j a_j` or `λ_j a_j†` on the full mode space.
    pub fn mode_operator(&self, j: usize, which: Ladder) -> Result<OperatorMatrix> {
        let a = self
            .annihilators
            .get(j)
            .ok_or_else(|| Error::arg(format!("mode index {j} out of range ({} modes)", self.modes.len())))?;
        Ok(match which {
            Ladder::Annihilate => a.clone(),
            Ladder::Create => a.adjoint(),
        })
    }

    pub(crate) fn annihilator_ref(&self, j: usize) -> &OperatorMatrix {
        &self.annihilators[j]
    }

    /// Total field operator `E = Σ_j λ_j (a_j + a_j†)`.
    pub fn field_operator(&self) -> OperatorMatrix {
        let mut e = OperatorMatrix::zeros(self.dim());
        for a in &self.annihilators {
            e = &(&e + a) + &a.adjoint();
        }
        e.with_space_tag(self.rho_f.space_tag().to_vec()).expect("tag matches")
    }

    /// `Σ_j ω_j a_j† a_j`.
    pub fn hamiltonian(&self) -> OperatorMatrix {
        let mut h = OperatorMatrix::zeros(self.dim());
        for j in 0..self.modes.len() {
            h = &h + &self.number_operator(j).scale_re(self.modes[j].frequency);
        }
        h.with_space_tag(self.rho_f.space_tag().to_vec()).expect("tag matches")
    }

    /// Photon number `a_j† a_j` (without the coupling).
    pub fn number_operator(&self, j: usize) -> OperatorMatrix {
        let dims: Vec<usize> = self.modes.iter().map(|m| m.truncation).collect();
        embed(&number_matrix(dims[j]), &dims, j)
    }

    /// Copy with mode `j` retuned; the Fock-basis density matrix is unchanged.
    pub fn with_mode_frequency(&self, j: usize, frequency: f64) -> Result<Self> {
        if j >= self.modes.len() {
            return Err(Error::arg(format!("mode index {j} out of range")));
        }
        let mut out = self.clone();
        out.modes[j].frequency = frequency;
        out.modes[j].validate()?;
        Ok(out)
    }

    /// Copy with every coupling multiplied by `scale`.
    pub fn with_coupling_scale(&self, scale: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.modes {
            m.coupling *= scale;
        }
        for a in &mut out.annihilators {
            *a = a.scale_re(scale);
        }
        out
    }
}

fn number_matrix(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(i as f64, 0.0) } else { ZERO })
}

fn annihilator_matrix(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { ZERO })
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on factor `j`.
fn embed(op: &DMatrix<C64>, dims: &[usize], j: usize) -> OperatorMatrix {
    let factors: Vec<OperatorMatrix> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if k == j {
                OperatorMatrix::from_matrix(op.clone()).expect("finite")
            } else {
                OperatorMatrix::identity(d)
            }
        })
        .collect();
    let refs: Vec<&OperatorMatrix> = factors.iter().collect();
    tensor_all(&refs, usize::MAX).expect("dimension already checked")
}

/// Fock amplitudes of `|β⟩` up to `n` levels, not renormalized.
pub fn coherent_amplitudes(beta: C64, n: usize) -> Vec<C64> {
    let mut v = Vec::with_capacity(n);
    let mut c = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for k in 0..n {
        v.push(c);
        c = c * beta / ((k + 1) as f64).sqrt();
    }
    v
}

fn squeezed_amplitudes(r: f64, phi: f64, n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    let ratio = -C64::from_polar(r.tanh(), phi);
    let mut c = C64::new(1.0 / r.cosh().sqrt(), 0.0);
    let mut k = 0usize;
    while 2 * k < n {
        v[2 * k] = c;
        let kk = k as f64;
        c = c * ratio * ((2.0 * kk + 1.0) / (2.0 * kk + 2.0)).sqrt();
        k += 1;
    }
    v
}

fn normalized(v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn coherent_guard(beta: C64, mode: &FieldMode) -> Result<()> {
    let b2 = beta.norm_sqr();
    if b2 > mode.truncation as f64 / 4.0 {
        let need = (4.0 * b2).ceil() as usize;
        return Err(Error::arg(format!(
            "|beta|^2 = {b2} violates the truncation guard |beta|^2 <= N/4 for N = {}; use truncation >= {need}",
            mode.truncation
        )));
    }
    Ok(())
}

fn mode_density(state: &ModeState, mode: &FieldMode) -> Result<DMatrix<C64>> {
    let n = mode.truncation;
    let proj = |v: &[C64]| DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
    match state {
        ModeState::Vacuum => Ok(proj(&basis(0, n))),
        ModeState::Fock(k) => {
            if *k >= n {
                return Err(Error::arg(format!(
                    "Fock state |{k}> needs truncation >= {}, mode has {n}",
                    k + 1
                )));
            }
            Ok(proj(&basis(*k, n)))
        }
        ModeState::Coherent(beta) => {
            coherent_guard(*beta, mode)?;
            Ok(proj(&normalized(coherent_amplitudes(*beta, n))))
        }
        ModeState::Cat { beta, even } => {
            coherent_guard(*beta, mode)?;
            let plus = coherent_amplitudes(*beta, n);
            let minus = coherent_amplitudes(-*beta, n);
            let s = if *even { 1.0 } else { -1.0 };
            let v: Vec<C64> = plus.iter().zip(&minus).map(|(a, b)| a + b * s).collect();
            if v.iter().all(|z| z.norm() < 1e-300) {
                return Err(Error::arg("odd cat state with beta = 0 is the zero vector"));
            }
            Ok(proj(&normalized(v)))
        }
        ModeState::Thermal(nbar) => {
            if !(*nbar >= 0.0) || !nbar.is_finite() {
                return Err(Error::arg(format!("thermal occupation must be >= 0, got {nbar}")));
            }
            if *nbar == 0.0 {
                return Ok(proj(&basis(0, n)));
            }
            let q = nbar / (nbar + 1.0);
            let tail = q.powi(n as i32);
            if tail > TAIL_TOLERANCE {
                let need = (TAIL_TOLERANCE.ln() / q.ln()).ceil() as usize;
                return Err(Error::arg(format!(
                    "thermal state with nbar = {nbar} leaves weight {tail:.3e} above the cutoff N = {n}; use truncation >= {need}"
                )));
            }
            let p: Vec<f64> = (0..n).map(|k| q.powi(k as i32)).collect();
            let z: f64 = p.iter().sum();
            Ok(DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(p[i] / z, 0.0) } else { ZERO }))
        }
        ModeState::Squeezed { r, phi } => {
            if !(*r >= 0.0) || !r.is_finite() || !phi.is_finite() {
                return Err(Error::arg("squeezing parameters must be finite with r >= 0"));
            }
            let v = squeezed_amplitudes(*r, *phi, n);
            let deficit = 1.0 - v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if deficit > TAIL_TOLERANCE {
                let mut need = n;
                while need < 1 << 16 {
                    need += 2;
                    let w = squeezed_amplitudes(*r, *phi, need);
                    if 1.0 - w.iter().map(|z| z.norm_sqr()).sum::<f64>() <= TAIL_TOLERANCE {
                        break;
                    }
                }
                return Err(Error::arg(format!(
                    "squeezed state r = {r} leaves weight {deficit:.3e} above the cutoff N = {n}; use truncation >= {need}"
                )));
            }
            Ok(proj(&normalized(v)))
        }
    }
}

fn basis(k: usize, n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[k] = ONE;
    v
}

fn mode_kind(s: &ModeState) -> &'static str {
    match s {
        ModeState::Vacuum => "vacuum",
        ModeState::Fock(_) => "fock",
        ModeState::Coherent(_) => "coherent",
        ModeState::Thermal(_) => "thermal",
        ModeState::Squeezed { .. } => "squeezed",
        ModeState::Cat { .. } => "cat",
    }
}

/// Builds a field state on the given modes with the default dimension cap.
pub fn prepare_state(modes: &[FieldMode], spec: StateSpec) -> Result<FieldState> {
    prepare_state_capped(modes, spec, DEFAULT_MAX_DIM)
}

pub fn prepare_state_capped(modes: &[FieldMode], spec: StateSpec, max_dim: usize) -> Result<FieldState> {
    if modes.is_empty() {
        return Err(Error::arg("field needs at least one mode"));
    }
    for m in modes {
        m.validate()?;
    }
    let dims: Vec<usize> = modes.iter().map(|m| m.truncation).collect();
    let dim = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if dim > max_dim {
        return Err(Error::Size { dim, max: max_dim });
    }

    let (rho_f, kind_tag) = match &spec {
        StateSpec::Product(states) => {
            if states.len() != modes.len() {
                return Err(Error::arg(format!(
                    "state lists {} modes but the field has {}",
                    states.len(),
                    modes.len()
                )));
            }
            let factors = states
                .iter()
                .zip(modes)
                .map(|(s, m)| OperatorMatrix::from_matrix(mode_density(s, m)?))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&OperatorMatrix> = factors.iter().collect();
            let rho = tensor_all(&refs, max_dim)?;
            let first = mode_kind(&states[0]);
            let tag = if states.iter().all(|s| mode_kind(s) == first) { first } else { "product" };
            (rho, tag.to_string())
        }
        StateSpec::CoherentMixture(atoms) => {
            if atoms.is_empty() {
                return Err(Error::arg("coherent mixture needs at least one component"));
            }
            let total: f64 = atoms.iter().map(|(_, w)| *w).sum();
            if atoms.iter().any(|(_, w)| !(*w >= 0.0)) || !(total > 0.0) {
                return Err(Error::arg("mixture weights must be non-negative with positive sum"));
            }
            let mut acc = DMatrix::zeros(dim, dim);
            for (betas, w) in atoms {
                if betas.len() != modes.len() {
                    return Err(Error::arg("each mixture component needs one amplitude per mode"));
                }
                let factors = betas
                    .iter()
                    .zip(modes)
                    .map(|(b, m)| OperatorMatrix::from_matrix(mode_density(&ModeState::Coherent(*b), m)?))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<&OperatorMatrix> = factors.iter().collect();
                acc += tensor_all(&refs, max_dim)?.entries() * C64::new(w / total, 0.0);
            }
            (OperatorMatrix::new(acc, dims.clone())?, "mixture-of-coherent".to_string())
        }
        StateSpec::Custom(rho) => {
            if rho.dim() != dim {
                return Err(Error::arg(format!(
                    "custom density matrix has dimension {} but the modes span {dim}",
                    rho.dim()
                )));
            }
            check_density(rho)?;
            (rho.clone().with_space_tag(dims.clone())?, "custom".to_string())
        }
    };

    let annihilators = (0..modes.len())
        .map(|j| embed(&annihilator_matrix(dims[j]), &dims, j).scale_re(modes[j].coupling))
        .collect();

    Ok(FieldState { modes: modes.to_vec(), rho_f, kind_tag, spec, annihilators })
}

fn check_density(rho: &OperatorMatrix) -> Result<()> {
    if (rho.trace() - ONE).norm() > 1e-10 {
        return Err(Error::arg(format!("density matrix trace is {}, expected 1", rho.trace())));
    }
    let eig = HermitianEigen::new(rho).map_err(|_| Error::arg("density matrix must be Hermitian"))?;
    if let Some(min) = eig.values.first() {
        if *min < -1e-10 {
            return Err(Error::arg(format!("density matrix has negative eigenvalue {min}")));
        }
    }
    Ok(())
}

/// `Tr[ρ_f O₁ O₂ … O_k]` with the operators in the given left-to-right order.
pub fn field_correlator(state: &FieldState, ordered_ops: &[(usize, Ladder)]) -> Result<C64> {
    if ordered_ops.is_empty() {
        return Err(Error::arg("correlator needs at least one operator"));
    }
    for (j, _) in ordered_ops {
        if *j >= state.modes.len() {
            return Err(Error::arg(format!("mode index {j} out of range")));
        }
    }
    // Accumulate from the right: X ← O_k ρ … then trace.
    let mut x = state.rho_f.entries().clone();
    for (j, which) in ordered_ops.iter().rev() {
        let a = state.annihilators[*j].entries();
        x = match which {
            Ladder::Annihilate => a * x,
            Ladder::Create => a.adjoint() * x,
        };
    }
    Ok(x.trace())
}

/// `⟨Ẽ_j⟩ = λ_j Tr[ρ_f a_j]` per mode.
pub fn classical_amplitudes(state: &FieldState) -> Vec<C64> {
    state.annihilators.iter().map(|a| a.expectation(&state.rho_f)).collect()
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((mid - half * x, half * w));
    }
    out
}

fn thermal_atoms(nbar: f64, grid: &ThermalGrid) -> Vec<(C64, f64)> {
    if nbar == 0.0 {
        return vec![(ZERO, 1.0)];
    }
    let radius = grid.radius_sigmas * nbar.sqrt();
    let radial = gauss_legendre(grid.radial, 0.0, radius);
    let dtheta = 2.0 * PI / grid.angular as f64;
    let mut atoms = Vec::with_capacity(grid.radial * grid.angular);
    for &(r, wr) in &radial {
        let w = (-r * r / nbar).exp() / (PI * nbar) * r * wr * dtheta;
        for k in 0..grid.angular {
            atoms.push((C64::from_polar(r, dtheta * k as f64), w));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    atoms.into_iter().map(|(b, w)| (b, w / total)).collect()
}

pub fn p_representation(state: &FieldState) -> Result<PRepresentation> {
    p_representation_with(state, &ThermalGrid::default())
}

pub fn p_representation_with(state: &FieldState, grid: &ThermalGrid) -> Result<PRepresentation> {
    let (atoms, form) = match &state.spec {
        StateSpec::Product(states) => {
            let mut form = PForm::Discrete;
            let mut per_mode = Vec::with_capacity(states.len());
            for s in states {
                let atoms = match s {
                    ModeState::Vacuum => vec![(ZERO, 1.0)],
                    ModeState::Coherent(b) => vec![(*b, 1.0)],
                    ModeState::Thermal(nbar) => {
                        if *nbar > 0.0 {
                            form = PForm::GaussianGrid;
                        }
                        thermal_atoms(*nbar, grid)
                    }
                    other => {
                        return Err(Error::Unsupported(format!(
                            "{} states have a P function more singular than a delta distribution \
                             (derivatives of delta or worse); P-averaging is only defined here for \
                             coherent, thermal, and coherent-mixture states",
                            mode_kind(other)
                        )))
                    }
                };
                per_mode.push(atoms);
            }
            let count = per_mode.iter().map(|a| a.len()).try_fold(1usize, |acc, n| acc.checked_mul(n));
            match count {
                Some(c) if c <= MAX_P_ATOMS => {}
                _ => {
                    return Err(Error::Size { dim: count.unwrap_or(usize::MAX), max: MAX_P_ATOMS });
                }
            }
            let mut combos: Vec<PAtom> = vec![PAtom { amplitudes: Vec::new(), weight: 1.0 }];
            for atoms in per_mode {
                let mut next = Vec::with_capacity(combos.len() * atoms.len());
                for c in &combos {
                    for (b, w) in &atoms {
                        let mut amps = c.amplitudes.clone();
                        amps.push(*b);
                        next.push(PAtom { amplitudes: amps, weight: c.weight * w });
                    }
                }
                combos = next;
            }
            (combos, form)
        }
        StateSpec::CoherentMixture(components) => {
            let total: f64 = components.iter().map(|(_, w)| *w).sum();
            let atoms = components
                .iter()
                .map(|(b, w)| PAtom { amplitudes: b.clone(), weight: w / total })
                .collect();
            (atoms, PForm::Discrete)
        }
        StateSpec::Custom(_) => {
            return Err(Error::Unsupported(
                "custom density matrices carry no P decomposition; supply a coherent, thermal, \
                 or coherent-mixture state instead"
                    .into(),
            ))
        }
    };
    let normalization = atoms.iter().map(|a| a.weight).sum();
    Ok(PRepresentation { atoms, form, normalization })
}

impl PRepresentation {
    /// `Σ_k w_k |β_k⟩⟨β_k|` on the truncated mode space.
    pub fn reconstruct(&self, modes: &[FieldMode]) -> Result<OperatorMatrix> {
        let dims: Vec<usize> = modes.iter().map(|m| m.truncation).collect();
        let dim: usize = dims.iter().product();
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for atom in &self.atoms {
            let mut v = vec![ONE];
            for (b, &n) in atom.amplitudes.iter().zip(&dims) {
                let amps = coherent_amplitudes(*b, n);
                v = v.iter().flat_map(|x| amps.iter().map(move |y| x * y)).collect();
            }
            for i in 0..dim {
                let vi = v[i] * atom.weight;
                for j in 0..dim {
                    acc[(i, j)] += vi * v[j].conj();
                }
            }
        }
        OperatorMatrix::new(acc, dims)
    }

    /// `Σ_k w_k Π β̄^p β^q` for a single mode: the normally ordered moment
    /// `⟨a†^p a^q⟩` implied by the decomposition.
    pub fn normal_moment(&self, mode: usize, p: u32, q: u32) -> C64 {
        self.atoms
            .iter()
            .map(|a| {
                let b = a.amplitudes[mode];
                b.conj().powu(p) * b.powu(q) * a.weight
            })
            .sum()
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;
    use Ladder::*;

    fn op_seq() -> impl Strategy<Value = Vec<(usize, Ladder)>> {
        proptest::collection::vec(prop_oneof![Just((0usize, Create)), Just((0usize, Annihilate))], 0..4)
    }

    proptest! {
        #[test]
        fn normal_order_factorizes_for_coherent(re in -1.0f64..1.0, im in -1.0f64..1.0, p in 0u32..3, q in 0u32..3) {
            let beta = C64::new(re, im);
            let modes = vec![FieldMode::new(1.0, 0.7, 30)];
            let s = prepare_state(&modes, StateSpec::Product(vec![ModeState::Coherent(beta)])).unwrap();
            let mut ops = vec![(0usize, Create); p as usize];
            ops.extend(std::iter::repeat((0usize, Annihilate)).take(q as usize));
            prop_assume!(!ops.is_empty());
            let got = field_correlator(&s, &ops).unwrap();
            let amp = classical_amplitudes(&s)[0];
            let want = amp.conj().powu(p) * amp.powu(q);
            prop_assert!((got - want).norm() < 1e-8);
        }

        #[test]
        fn swapping_adjacent_pair_adds_commutator(prefix in op_seq(), suffix in op_seq(), nbar in 0.0f64..0.5) {
            // ⟨… a a† …⟩ − ⟨… a† a …⟩ = λ² ⟨… …⟩ away from the Fock cutoff.
            let lam = 0.6;
            let modes = vec![FieldMode::new(1.0, lam, 40)];
            let s = prepare_state(&modes, StateSpec::Product(vec![ModeState::Thermal(nbar)])).unwrap();
            let build = |mid: &[(usize, Ladder)]| {
                let mut v = prefix.clone();
                v.extend_from_slice(mid);
                v.extend_from_slice(&suffix);
                v
            };
            let ad_a = field_correlator(&s, &build(&[(0, Annihilate), (0, Create)])).unwrap();
            let a_ad = field_correlator(&s, &build(&[(0, Create), (0, Annihilate)])).unwrap();
            let rest = build(&[]);
            let base = if rest.is_empty() { C64::new(1.0, 0.0) } else { field_correlator(&s, &rest).unwrap() };
            prop_assert!((ad_a - a_ad - base * lam * lam).norm() < 1e-9 * (1.0 + base.norm()));
        }
    }
}
