//! Perturbative signal assembly.
//!
//! Matter factors are evaluated in Liouville space. A pathway is a sequence of
//! dipole interactions acting on the ket (`V·X`) or the bra (`−X·V`) of the
//! density matrix, each followed by the uniform-ε resolvent
//! `X_ab → X_ab / (Ω − ω_ab + iε)` where `Ω` is the running sum of the field
//! frequencies applied so far. The observable is `Tr[V·X]`.
//!
//! The four loop classes differ in how many interactions sit on the bra:
//!
//! | class | ket (earliest first) | bra (earliest first) | field gate              |
//! |-------|----------------------|----------------------|-------------------------|
//! | i     | ω₃ ω₂ ω₁             |                      | ⟨Ẽ† E(ω₁)E(ω₂)E(ω₃)⟩   |
//! | ii    | ω₂ ω₁                | ω₃                   | ⟨E(ω₃) Ẽ† E(ω₁)E(ω₂)⟩  |
//! | iii   | ω₁                   | ω₃ ω₂                | ⟨E(ω₃)E(ω₂) Ẽ† E(ω₁)⟩  |
//! | iv    |                      | ω₃ ω₂ ω₁             | ⟨E(ω₃)E(ω₂)E(ω₁) Ẽ†⟩   |
//!
//! Each class sums every relative time ordering of its ket and bra
//! interactions. For class i the result is `⟨V G(ω) V G(ω₂+ω₃) V G(ω₃) V⟩`;
//! class iv is its all-advanced mirror. When the bra branch is read as a
//! Hilbert-space product its advanced propagators carry negated arguments,
//! e.g. class ii in the ε→0 limit is `⟨V G†(−ω₃) V G(ω−ω₃) V G(ω₂) V⟩`.
//!
//! Field frequencies are signed: `+ω_j` is an annihilator of mode `j`, `−ω_j`
//! a creator. Tuples satisfy `ω₁+ω₂+ω₃ = ω` exactly (to 1e−9); no numerical
//! delta functions appear.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{field_correlator, p_representation, FieldMode, FieldState, Ladder, PRepresentation};
use crate::matter::MatterSystem;
use crate::operator::{OperatorMatrix, C64, ZERO};

pub const FREQUENCY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Diagram {
    I,
    Ii,
    Iii,
    Iv,
}

impl Diagram {
    pub const ALL: [Diagram; 4] = [Diagram::I, Diagram::Ii, Diagram::Iii, Diagram::Iv];

    pub fn label(self) -> &'static str {
        match self {
            Diagram::I => "i",
            Diagram::Ii => "ii",
            Diagram::Iii => "iii",
            Diagram::Iv => "iv",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathwaySpec {
    pub diagram: Diagram,
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
}

impl PathwaySpec {
    pub fn new(diagram: Diagram, omega: f64, omega1: f64, omega2: f64, omega3: f64) -> Result<Self> {
        check_constraint(omega, [omega1, omega2, omega3])?;
        Ok(Self { diagram, omega, omega1, omega2, omega3 })
    }
}

fn check_constraint(omega: f64, w: [f64; 3]) -> Result<()> {
    if w.iter().chain([&omega]).any(|x| !x.is_finite()) {
        return Err(Error::arg("frequencies must be finite"));
    }
    let miss = w[0] + w[1] + w[2] - omega;
    if miss.abs() >= FREQUENCY_TOL {
        return Err(Error::arg(format!(
            "frequency constraint violated: w1+w2+w3-w = {miss:e}"
        )));
    }
    Ok(())
}

fn check_state(sys: &MatterSystem, state0: &OperatorMatrix) -> Result<()> {
    if state0.dim() != sys.dim() {
        return Err(Error::arg(format!(
            "matter state has dimension {} but the system has {}",
            state0.dim(),
            sys.dim()
        )));
    }
    Ok(())
}

/// Sum over all interleavings of ket and bra interactions, each list given
/// earliest first. Returns `Tr[V X]`.
pub fn loop_class(sys: &MatterSystem, state0: &OperatorMatrix, ket: &[f64], bra: &[f64]) -> C64 {
    let e = sys.energies();
    let n = e.len();
    let eps = sys.epsilon();
    let v = sys.dipole().entries();
    let rho = state0.entries();
    let (k, m) = (ket.len(), bra.len());
    let steps = k + m;
    let mut total = ZERO;
    for mask in 0u32..(1u32 << steps) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let mut x: DMatrix<C64> = rho.clone();
        let (mut ik, mut ib) = (0, 0);
        let mut cum = 0.0;
        let mut sign = 1.0;
        for s in 0..steps {
            if mask & (1 << s) != 0 {
                x = &x * v;
                cum += bra[ib];
                ib += 1;
                sign = -sign;
            } else {
                x = v * &x;
                cum += ket[ik];
                ik += 1;
            }
            for a in 0..n {
                for b in 0..n {
                    x[(a, b)] /= C64::new(cum - (e[a] - e[b]), eps);
                }
            }
        }
        total += (v * &x).trace() * sign;
    }
    total
}

/// Matter factor of one loop class.
pub fn pathway(sys: &MatterSystem, state0: &OperatorMatrix, spec: &PathwaySpec) -> Result<C64> {
    check_state(sys, state0)?;
    check_constraint(spec.omega, [spec.omega1, spec.omega2, spec.omega3])?;
    Ok(pathway_unchecked(sys, state0, spec.diagram, [spec.omega1, spec.omega2, spec.omega3]))
}

fn pathway_unchecked(sys: &MatterSystem, state0: &OperatorMatrix, d: Diagram, w: [f64; 3]) -> C64 {
    let [w1, w2, w3] = w;
    match d {
        Diagram::I => loop_class(sys, state0, &[w3, w2, w1], &[]),
        Diagram::Ii => loop_class(sys, state0, &[w2, w1], &[w3]),
        Diagram::Iii => loop_class(sys, state0, &[w1], &[w3, w2]),
        Diagram::Iv => loop_class(sys, state0, &[], &[w3, w2, w1]),
    }
}

fn all_pathways(sys: &MatterSystem, state0: &OperatorMatrix, w: [f64; 3]) -> [C64; 4] {
    Diagram::ALL.map(|d| pathway_unchecked(sys, state0, d, w))
}

/// `Σ_k F_k` for one ordered frequency triple.
pub fn chi3_ordered(sys: &MatterSystem, state0: &OperatorMatrix, omega: f64, w: [f64; 3]) -> Result<C64> {
    check_state(sys, state0)?;
    check_constraint(omega, w)?;
    Ok(all_pathways(sys, state0, w).iter().sum())
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Third-order susceptibility, symmetrized over the six orderings of the
/// incoming frequencies. The ordering of c-number fields is immaterial, so
/// only the symmetric part is observable classically.
pub fn chi3(sys: &MatterSystem, state0: &OperatorMatrix, omega: f64, w: [f64; 3]) -> Result<C64> {
    check_state(sys, state0)?;
    check_constraint(omega, w)?;
    let sum: C64 = PERMUTATIONS
        .iter()
        .map(|p| all_pathways(sys, state0, [w[p[0]], w[p[1]], w[p[2]]]).iter().sum::<C64>())
        .sum();
    Ok(sum / 6.0)
}

/// Linear susceptibility `Tr[V 𝒢(ω) V ρ₀] − Tr[V 𝒢(ω) ρ₀ V]`, the ket and bra
/// branches at first order. For the ground state this is
/// `⟨V G(ω) V⟩ + ⟨V G†(−ω) V⟩`; for a two-level system
/// `μ²[1/(ω−ω₀+iε) − 1/(ω+ω₀+iε)]`.
pub fn chi1(sys: &MatterSystem, state0: &OperatorMatrix, omega: f64) -> Result<C64> {
    check_state(sys, state0)?;
    let [k, b] = linear_pathways(sys, state0, omega);
    Ok(k + b)
}

fn linear_pathways(sys: &MatterSystem, state0: &OperatorMatrix, omega: f64) -> [C64; 2] {
    [loop_class(sys, state0, &[omega], &[]), loop_class(sys, state0, &[], &[omega])]
}

/// One signed field factor: mode `mode`, annihilating when `sign > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldFactor {
    pub mode: usize,
    pub annihilate: bool,
}

impl FieldFactor {
    pub fn frequency(&self, modes: &[FieldMode]) -> f64 {
        let w = modes[self.mode].frequency;
        if self.annihilate {
            w
        } else {
            -w
        }
    }

    fn ladder(&self) -> Ladder {
        if self.annihilate {
            Ladder::Annihilate
        } else {
            Ladder::Create
        }
    }

    pub fn label(&self) -> String {
        format!("{}{}", if self.annihilate { '+' } else { '-' }, self.mode)
    }
}

/// Every signed triple `(E(ω₁), E(ω₂), E(ω₃))` whose frequencies add to the
/// detected mode's frequency, in lexicographic order.
pub fn enumerate_tuples(modes: &[FieldMode], detect: usize) -> Result<Vec<[FieldFactor; 3]>> {
    let target = detect_frequency(modes, detect)?;
    let factors: Vec<FieldFactor> = (0..modes.len())
        .flat_map(|mode| [true, false].map(|annihilate| FieldFactor { mode, annihilate }))
        .collect();
    let mut out = Vec::new();
    for f1 in &factors {
        for f2 in &factors {
            for f3 in &factors {
                let s = f1.frequency(modes) + f2.frequency(modes) + f3.frequency(modes);
                if (s - target).abs() < FREQUENCY_TOL {
                    out.push([*f1, *f2, *f3]);
                }
            }
        }
    }
    Ok(out)
}

fn detect_frequency(modes: &[FieldMode], detect: usize) -> Result<f64> {
    modes
        .get(detect)
        .map(|m| m.frequency)
        .ok_or_else(|| Error::arg(format!("detection mode {detect} out of range ({} modes)", modes.len())))
}

/// The four ordered field correlators of one tuple.
pub fn quantum_gates(field: &FieldState, detect: usize, t: &[FieldFactor; 3]) -> Result<[C64; 4]> {
    let d = (detect, Ladder::Create);
    let [o1, o2, o3] = t.map(|f| (f.mode, f.ladder()));
    Ok([
        field_correlator(field, &[d, o1, o2, o3])?,
        field_correlator(field, &[o3, d, o1, o2])?,
        field_correlator(field, &[o3, o2, d, o1])?,
        field_correlator(field, &[o3, o2, o1, d])?,
    ])
}

/// `𝓔̃*(ω_d) 𝓔(ω₁)𝓔(ω₂)𝓔(ω₃)` from per-mode c-number amplitudes.
fn classical_gate(amps: &[C64], detect: usize, t: &[FieldFactor; 3]) -> C64 {
    let amp = |f: &FieldFactor| if f.annihilate { amps[f.mode] } else { amps[f.mode].conj() };
    amps[detect].conj() * amp(&t[0]) * amp(&t[1]) * amp(&t[2])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalRow {
    pub omega: f64,
    /// `ℑ Σ contributions`.
    pub total: f64,
    /// Gate times matter factor per diagram, summed over tuples.
    pub contributions: Vec<C64>,
    /// Field gate per diagram, summed over tuples.
    pub gates: Vec<C64>,
}

impl SignalRow {
    fn new(omega: f64, contributions: Vec<C64>, gates: Vec<C64>) -> Self {
        let total = contributions.iter().sum::<C64>().im;
        Self { omega, total, contributions, gates }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalTable {
    pub rows: Vec<SignalRow>,
}

impl SignalTable {
    pub fn totals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.total).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalKind {
    Quantum,
    Classical,
    PAveraged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Linear,
    Third,
}

/// Everything that does not depend on the detection frequency.
struct Prepared<'a> {
    sys: &'a MatterSystem,
    state0: &'a OperatorMatrix,
    detect: usize,
    kind: SignalKind,
    p_rep: Option<PRepresentation>,
}

impl<'a> Prepared<'a> {
    fn new(
        sys: &'a MatterSystem,
        state0: &'a OperatorMatrix,
        field: &FieldState,
        detect: usize,
        kind: SignalKind,
    ) -> Result<Self> {
        check_state(sys, state0)?;
        detect_frequency(field.modes(), detect)?;
        let p_rep = match kind {
            SignalKind::PAveraged => Some(p_representation(field)?),
            _ => None,
        };
        Ok(Self { sys, state0, detect, kind, p_rep })
    }

    /// Per-atom classical amplitudes `λ_j β_j` with their weights.
    fn atoms(&self, field: &FieldState) -> Vec<(Vec<C64>, f64)> {
        match (&self.p_rep, self.kind) {
            (Some(p), _) => p
                .atoms
                .iter()
                .map(|a| {
                    let amps = a.amplitudes.iter().zip(field.modes()).map(|(b, m)| b * m.coupling).collect();
                    (amps, a.weight)
                })
                .collect(),
            (None, _) => vec![(crate::field::classical_amplitudes(field), 1.0)],
        }
    }

    fn third(&self, field: &FieldState) -> Result<SignalRow> {
        let modes = field.modes();
        let omega = modes[self.detect].frequency;
        let tuples = enumerate_tuples(modes, self.detect)?;
        let atoms = if self.kind == SignalKind::Quantum { Vec::new() } else { self.atoms(field) };
        let mut contributions = [ZERO; 4];
        let mut gates = [ZERO; 4];
        for t in &tuples {
            let w = t.map(|f| f.frequency(modes));
            let f = all_pathways(self.sys, self.state0, w);
            let g = match self.kind {
                SignalKind::Quantum => quantum_gates(field, self.detect, t)?,
                _ => {
                    let g: C64 = atoms.iter().map(|(a, wt)| classical_gate(a, self.detect, t) * *wt).sum();
                    [g; 4]
                }
            };
            for k in 0..4 {
                contributions[k] += g[k] * f[k];
                gates[k] += g[k];
            }
        }
        Ok(SignalRow::new(omega, contributions.to_vec(), gates.to_vec()))
    }

    fn linear(&self, field: &FieldState) -> Result<SignalRow> {
        let modes = field.modes();
        let omega = modes[self.detect].frequency;
        let atoms = if self.kind == SignalKind::Quantum { Vec::new() } else { self.atoms(field) };
        let mut contributions = [ZERO; 2];
        let mut gates = [ZERO; 2];
        for (j, m) in modes.iter().enumerate() {
            if (m.frequency - omega).abs() >= FREQUENCY_TOL {
                continue;
            }
            let f = linear_pathways(self.sys, self.state0, m.frequency);
            let g = match self.kind {
                SignalKind::Quantum => {
                    let d = (self.detect, Ladder::Create);
                    let e = (j, Ladder::Annihilate);
                    [field_correlator(field, &[d, e])?, field_correlator(field, &[e, d])?]
                }
                _ => {
                    let g: C64 = atoms.iter().map(|(a, wt)| a[self.detect].conj() * a[j] * *wt).sum();
                    [g; 2]
                }
            };
            for k in 0..2 {
                contributions[k] += g[k] * f[k];
                gates[k] += g[k];
            }
        }
        Ok(SignalRow::new(omega, contributions.to_vec(), gates.to_vec()))
    }

    fn row(&self, field: &FieldState, order: Order) -> Result<SignalRow> {
        match order {
            Order::Linear => self.linear(field),
            Order::Third => self.third(field),
        }
    }
}

/// Third-order signal with the four ordering-dependent field gates.
pub fn signal_quantum(sys: &MatterSystem, state0: &OperatorMatrix, field: &FieldState, detect: usize) -> Result<SignalTable> {
    signal(sys, state0, field, detect, SignalKind::Quantum, Order::Third)
}

/// Third-order signal with every field operator replaced by its mean.
pub fn signal_classical(sys: &MatterSystem, state0: &OperatorMatrix, field: &FieldState, detect: usize) -> Result<SignalTable> {
    signal(sys, state0, field, detect, SignalKind::Classical, Order::Third)
}

/// Classical third-order signal averaged over the field's P representation.
pub fn signal_p_averaged(sys: &MatterSystem, state0: &OperatorMatrix, field: &FieldState, detect: usize) -> Result<SignalTable> {
    signal(sys, state0, field, detect, SignalKind::PAveraged, Order::Third)
}

/// First-order signal: gates `⟨Ẽ†E⟩` (ket branch) and `⟨EẼ†⟩` (bra branch).
pub fn linear_signal(
    sys: &MatterSystem,
    state0: &OperatorMatrix,
    field: &FieldState,
    detect: usize,
    kind: SignalKind,
) -> Result<SignalTable> {
    signal(sys, state0, field, detect, kind, Order::Linear)
}

pub fn signal(
    sys: &MatterSystem,
    state0: &OperatorMatrix,
    field: &FieldState,
    detect: usize,
    kind: SignalKind,
    order: Order,
) -> Result<SignalTable> {
    let prep = Prepared::new(sys, state0, field, detect, kind)?;
    Ok(SignalTable { rows: vec![prep.row(field, order)?] })
}

/// Retunes the detected mode through `freqs` and evaluates one row each.
/// Rows are computed in parallel and returned in grid order.
pub fn signal_scan(
    sys: &MatterSystem,
    state0: &OperatorMatrix,
    field: &FieldState,
    detect: usize,
    kind: SignalKind,
    order: Order,
    freqs: &[f64],
) -> Result<SignalTable> {
    let prep = Prepared::new(sys, state0, field, detect, kind)?;
    let rows = freqs
        .par_iter()
        .map(|&w| {
            let f = field.with_mode_frequency(detect, w)?;
            prep.row(&f, order)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignalTable { rows })
}

/// Per-tuple breakdown of the four quantum gates at the current tuning.
#[derive(Clone, Debug, PartialEq)]
pub struct GateRow {
    pub tuple: [FieldFactor; 3],
    pub frequencies: [f64; 3],
    pub quantum: [C64; 4],
    pub classical: C64,
}

pub fn gate_table(field: &FieldState, detect: usize) -> Result<Vec<GateRow>> {
    let modes = field.modes();
    let amps = crate::field::classical_amplitudes(field);
    enumerate_tuples(modes, detect)?
        .into_iter()
        .map(|t| {
            Ok(GateRow {
                tuple: t,
                frequencies: t.map(|f| f.frequency(modes)),
                quantum: quantum_gates(field, detect, &t)?,
                classical: classical_gate(&amps, detect, &t),
            })
        })
        .collect()
}

/// Largest pairwise relative difference `|g_a − g_b| / max(|g_a|, |g_b|)`
/// among the given gates, and the smallest.
pub fn gate_spread(g: &[C64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for a in 0..g.len() {
        for b in a + 1..g.len() {
            let scale = g[a].norm().max(g[b].norm());
            let r = if scale == 0.0 { 0.0 } else { (g[a] - g[b]).norm() / scale };
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::matter::ladder;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn energy_shift_leaves_pathways_unchanged(
            shift in -5.0f64..5.0,
            w1 in -2.0f64..2.0, w2 in -2.0f64..2.0, w3 in -2.0f64..2.0,
            beta_t in 0.1f64..3.0,
        ) {
            let s = ladder(&[1.0, 0.85], &[1.0, 0.6], 0.05).unwrap();
            let t = s.with_energy_shift(shift).unwrap();
            let rho = crate::matter::thermal_state(&s, beta_t).unwrap();
            let w = w1 + w2 + w3;
            for d in Diagram::ALL {
                let spec = PathwaySpec::new(d, w, w1, w2, w3).unwrap();
                let a = pathway(&s, &rho, &spec).unwrap();
                let b = pathway(&t, &rho, &spec).unwrap();
                prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
            }
        }

        #[test]
        fn chi3_symmetric_in_inputs(w1 in -2.0f64..2.0, w2 in -2.0f64..2.0, w3 in -2.0f64..2.0) {
            let s = ladder(&[1.0, 0.85], &[1.0, 0.6], 0.05).unwrap();
            let g = s.ground_state();
            let w = w1 + w2 + w3;
            let a = chi3(&s, &g, w, [w1, w2, w3]).unwrap();
            let b = chi3(&s, &g, w, [w3, w1, w2]).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
        }
    }
}
