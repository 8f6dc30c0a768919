//! Liouville-space superoperators and the correlator family.
//!
//! `V₊X = ½(VX + XV)` and `V₋X = VX − XV`. The ½ in `V₊` is kept everywhere,
//! so `C₊₊` below carries it too. A correlator `⟨V_{s₁} V_{s₂} … V_{sₙ₊₁}⟩`
//! applies the maps right to left to the initial state and takes the trace.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::matter::{thermal_state, MatterSystem};
use crate::operator::{OperatorMatrix, C64, ZERO};
use crate::oracle::JointModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Ordered signs, leftmost = latest (the observable end).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignSequence {
    signs: Vec<Sign>,
}

impl SignSequence {
    /// With `observable` set, a leftmost `−` is a contract error: the trace of
    /// a commutator vanishes identically.
    pub fn new(signs: Vec<Sign>, observable: bool) -> Result<Self> {
        match signs.first() {
            None => Err(Error::arg("sign sequence is empty")),
            Some(Sign::Minus) if observable => Err(Error::Contract(
                "leftmost V- makes the correlator a trace of a commutator, which is identically zero".into(),
            )),
            _ => Ok(Self { signs }),
        }
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Parses strings like `"+---"`; `−` (U+2212) is accepted as well.
    pub fn parse(s: &str, observable: bool) -> Result<Self> {
        let signs = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' | '\u{2212}' => Ok(Sign::Minus),
                other => Err(Error::arg(format!("bad sign character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(signs, observable)
    }
}

impl fmt::Display for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.signs {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for SignSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, true)
    }
}

fn apply(sign: Sign, v: &DMatrix<C64>, x: &DMatrix<C64>) -> DMatrix<C64> {
    match sign {
        Sign::Plus => (v * x + x * v) * C64::new(0.5, 0.0),
        Sign::Minus => v * x - x * v,
    }
}

/// `Tr[V_{s₁}(t₁) V_{s₂}(t₂) … ρ₀]` with `V(t) = e^{iH₀t} V e^{−iH₀t}`.
/// `times` must be non-increasing left to right.
pub fn super_correlator(sys: &MatterSystem, state0: &OperatorMatrix, seq: &SignSequence, times: &[f64]) -> Result<C64> {
    if times.len() != seq.len() {
        return Err(Error::arg(format!("{} signs but {} times", seq.len(), times.len())));
    }
    if times.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::arg("times must be ordered latest first"));
    }
    check_state(sys, state0)?;
    let e = sys.energies();
    let n = sys.dim();
    let v = sys.dipole().entries();
    let mut x = state0.entries().clone();
    for (s, &t) in seq.signs().iter().zip(times).rev() {
        let vt = DMatrix::from_fn(n, n, |a, b| v[(a, b)] * C64::from_polar(1.0, (e[a] - e[b]) * t));
        x = apply(*s, &vt, &x);
    }
    Ok(x.trace())
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

/// Frequency-domain correlator `Tr[V_{s₁} 𝒢(Ωₙ) V_{s₂} … 𝒢(Ω₁) V_{sₙ₊₁} ρ₀]`
/// with the resolvent of the pathway module and `Ω_k` the running sum of
/// `freqs` (given in order of application, earliest first). With this
/// convention `χ¹(ω)` is the `[+,−]` spectrum.
pub fn super_spectrum(sys: &MatterSystem, state0: &OperatorMatrix, seq: &SignSequence, freqs: &[f64]) -> Result<C64> {
    if freqs.len() + 1 != seq.len() {
        return Err(Error::arg(format!(
            "{} signs need {} frequencies, got {}",
            seq.len(),
            seq.len() - 1,
            freqs.len()
        )));
    }
    check_state(sys, state0)?;
    let e = sys.energies();
    let n = sys.dim();
    let eps = sys.epsilon();
    let v = sys.dipole().entries();
    let mut x = state0.entries().clone();
    let mut cum = 0.0;
    let signs = seq.signs();
    for (k, w) in freqs.iter().enumerate() {
        x = apply(signs[signs.len() - 1 - k], v, &x);
        cum += w;
        for a in 0..n {
            for b in 0..n {
                x[(a, b)] /= C64::new(cum - (e[a] - e[b]), eps);
            }
        }
    }
    Ok(apply(signs[0], v, &x).trace())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdtRow {
    pub omega: f64,
    pub c_plus_plus: f64,
    pub c_plus_minus: f64,
    pub ratio: f64,
    pub expected: f64,
}

/// One resonance `ω = E_a − E_b` (degenerate lines merged) with its Lehmann
/// weights; `ratio` is the line-resolved `C₊₊/C₊₋`.
#[derive(Clone, Debug, PartialEq)]
pub struct FdtLine {
    pub omega: f64,
    pub weight_plus_plus: f64,
    pub weight_plus_minus: f64,
    pub ratio: f64,
    pub expected: f64,
}

impl FdtLine {
    pub fn relative_error(&self) -> f64 {
        ((self.ratio - self.expected) / self.expected).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdtTable {
    pub beta_t: f64,
    pub rows: Vec<FdtRow>,
    pub lines: Vec<FdtLine>,
}

impl FdtTable {
    pub fn max_line_error(&self) -> f64 {
        self.lines.iter().map(|l| l.relative_error()).fold(0.0, f64::max)
    }
}

/// `½ coth(β_T ω / 2)`.
pub fn half_coth(beta_t: f64, omega: f64) -> f64 {
    0.5 / (0.5 * beta_t * omega).tanh()
}

const LINE_MERGE_TOL: f64 = 1e-9;

/// FDT spectra against the canonical state at `beta_t`.
pub fn fdt_check(sys: &MatterSystem, beta_t: f64, grid: &[f64]) -> Result<FdtTable> {
    if !(beta_t > 0.0) || !beta_t.is_finite() {
        return Err(Error::arg(format!("inverse temperature must be positive, got {beta_t}")));
    }
    fdt_check_state(sys, &thermal_state(sys, beta_t)?, beta_t, grid)
}

/// FDT spectra against an arbitrary diagonal state, compared with the
/// thermal prediction at `beta_t`. Non-thermal states violate it.
pub fn fdt_check_state(sys: &MatterSystem, state: &OperatorMatrix, beta_t: f64, grid: &[f64]) -> Result<FdtTable> {
    check_state(sys, state)?;
    let p = state.real_diagonal();
    let eps = sys.epsilon();
    // (ω_ab, |V_ab|²(p_a+p_b)/2, |V_ab|²(p_b−p_a))
    let mut raw: Vec<(f64, f64, f64)> = sys
        .transitions()
        .into_iter()
        .map(|(a, b, w, v2)| (w, v2 * (p[a] + p[b]) / 2.0, v2 * (p[b] - p[a])))
        .collect();
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));

    let lorentz = |x: f64| 2.0 * eps / (x * x + eps * eps);
    let rows = grid
        .par_iter()
        .map(|&w| {
            let (mut cpp, mut cpm) = (0.0, 0.0);
            for (wab, pp, pm) in &raw {
                let l = lorentz(w - wab);
                cpp += pp * l;
                cpm += pm * l;
            }
            FdtRow { omega: w, c_plus_plus: cpp, c_plus_minus: cpm, ratio: cpp / cpm, expected: half_coth(beta_t, w) }
        })
        .collect();

    let mut lines: Vec<FdtLine> = Vec::new();
    for (w, pp, pm) in raw {
        match lines.last_mut() {
            Some(l) if (l.omega - w).abs() < LINE_MERGE_TOL => {
                l.weight_plus_plus += pp;
                l.weight_plus_minus += pm;
            }
            _ => lines.push(FdtLine {
                omega: w,
                weight_plus_plus: pp,
                weight_plus_minus: pm,
                ratio: 0.0,
                expected: half_coth(beta_t, w),
            }),
        }
    }
    for l in &mut lines {
        l.ratio = l.weight_plus_plus / l.weight_plus_minus;
    }
    Ok(FdtTable { beta_t, rows, lines })
}

/// `C₊₊₊₊ / C₊₋₋₋` along the slice `(ω, −ω, ω)` at the given frequency.
pub fn nonlinear_ratio(sys: &MatterSystem, state0: &OperatorMatrix, omega: f64) -> Result<(C64, C64, C64)> {
    let freqs = [omega, -omega, omega];
    let pppp = super_spectrum(sys, state0, &SignSequence::parse("++++", true)?, &freqs)?;
    let pmmm = super_spectrum(sys, state0, &SignSequence::parse("+---", true)?, &freqs)?;
    Ok((pppp, pmmm, pppp / pmmm))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Driving {
    /// Field operator replaced by its c-number mean in the Hamiltonian.
    Classical,
    /// Joint atom⊗atom⊗mode dynamics.
    Quantum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoAtomParams {
    pub time: f64,
    /// Time steps for the classical drive.
    pub steps: usize,
    /// Factors applied to atom-2's level energies.
    pub atom2_scales: Vec<f64>,
    pub max_dim: usize,
}

impl Default for TwoAtomParams {
    fn default() -> Self {
        Self {
            time: 20.0,
            steps: 2000,
            atom2_scales: (0..11).map(|k| 0.8 + 0.04 * k as f64).collect(),
            max_dim: crate::operator::DEFAULT_MAX_DIM,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoAtomRow {
    /// `None` when atom 2 is absent.
    pub atom2_scale: Option<f64>,
    pub population: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoAtomReport {
    pub driving: Driving,
    pub rows: Vec<TwoAtomRow>,
    /// Largest `|P − P_absent| / P_absent` over the atom-2 settings.
    pub max_relative_shift: f64,
}

/// Excited-state population of atom 1 (its top level) at `params.time`,
/// with and without atom 2, for each atom-2 tuning.
pub fn two_atom_demo(
    atom1: &MatterSystem,
    atom2: &MatterSystem,
    field: &FieldState,
    driving: Driving,
    params: &TwoAtomParams,
) -> Result<TwoAtomReport> {
    if field.modes().len() != 1 {
        return Err(Error::arg("two-atom demonstration uses a single field mode"));
    }
    if !(params.time >= 0.0) || params.steps == 0 {
        return Err(Error::arg("time must be >= 0 and steps > 0"));
    }
    let variants: Vec<Option<MatterSystem>> = std::iter::once(Ok(None))
        .chain(params.atom2_scales.iter().map(|&s| scaled(atom2, s).map(Some)))
        .collect::<Result<_>>()?;
    let run = |a2: &Option<MatterSystem>| -> Result<f64> {
        match driving {
            Driving::Classical => classical_population(atom1, a2.as_ref(), field, params),
            Driving::Quantum => quantum_population(atom1, a2.as_ref(), field, params),
        }
    };
    let pops = variants.par_iter().map(run).collect::<Result<Vec<_>>>()?;
    let base = pops[0];
    let mut rows = vec![TwoAtomRow { atom2_scale: None, population: base }];
    let mut shift = 0.0f64;
    for (s, p) in params.atom2_scales.iter().zip(&pops[1..]) {
        rows.push(TwoAtomRow { atom2_scale: Some(*s), population: *p });
        shift = shift.max(((p - base) / base).abs());
    }
    Ok(TwoAtomReport { driving, rows, max_relative_shift: shift })
}

fn scaled(sys: &MatterSystem, factor: f64) -> Result<MatterSystem> {
    if !(factor > 0.0) {
        return Err(Error::arg("atom-2 energy scale must be positive"));
    }
    let e = sys.energies().iter().map(|x| x * factor).collect();
    MatterSystem::new(e, sys.dipole().clone(), sys.epsilon(), sys.label())
}

fn top_projector(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| if i == j && i == dim - 1 { C64::new(1.0, 0.0) } else { ZERO })
}

/// Piecewise-constant midpoint propagation under `H(t) = H_m + E(t) V_m`
/// with `E(t) = α e^{−iωt} + ᾱ e^{iωt}`.
fn classical_population(atom1: &MatterSystem, atom2: Option<&MatterSystem>, field: &FieldState, p: &TwoAtomParams) -> Result<f64> {
    let (h, v, rho, obs) = composite(atom1, atom2, p.max_dim)?;
    let alpha = crate::field::classical_amplitudes(field)[0];
    let w = field.modes()[0].frequency;
    let dt = p.time / p.steps as f64;
    let mut u = DMatrix::<C64>::identity(h.nrows(), h.ncols());
    for k in 0..p.steps {
        let t = (k as f64 + 0.5) * dt;
        let e = 2.0 * (alpha * C64::from_polar(1.0, -w * t)).re;
        let hk = OperatorMatrix::from_matrix(&h + &v * C64::new(e, 0.0))?;
        let step = crate::operator::hermitian_function(&hk, |x| C64::from_polar(1.0, -x * dt))?;
        u = step.entries() * u;
    }
    let rt = &u * &rho * u.adjoint();
    Ok((rt * obs).trace().re)
}

fn quantum_population(atom1: &MatterSystem, atom2: Option<&MatterSystem>, field: &FieldState, p: &TwoAtomParams) -> Result<f64> {
    let (h, v, rho, obs) = composite(atom1, atom2, p.max_dim)?;
    let model = JointModel::from_parts(
        &OperatorMatrix::from_matrix(h)?,
        &OperatorMatrix::from_matrix(v)?,
        &OperatorMatrix::from_matrix(rho)?,
        field,
        1.0,
        p.max_dim,
    )?;
    let obs = crate::operator::tensor_product_capped(
        &OperatorMatrix::from_matrix(obs)?,
        &OperatorMatrix::identity(field.dim()),
        p.max_dim,
    )?;
    Ok(model.expectation_at(&obs, p.time)?.re)
}

/// Matter Hamiltonian, dipole, ground state and atom-1 top-level projector on
/// atom1 (⊗ atom2).
fn composite(
    atom1: &MatterSystem,
    atom2: Option<&MatterSystem>,
    max_dim: usize,
) -> Result<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
    use crate::operator::tensor_product_capped as kron;
    let p1 = OperatorMatrix::from_matrix(top_projector(atom1.dim()))?;
    match atom2 {
        None => Ok((
            atom1.hamiltonian().into_entries(),
            atom1.dipole().entries().clone(),
            atom1.ground_state().into_entries(),
            p1.into_entries(),
        )),
        Some(a2) => {
            let i1 = OperatorMatrix::identity(atom1.dim());
            let i2 = OperatorMatrix::identity(a2.dim());
            let h = &kron(&atom1.hamiltonian(), &i2, max_dim)? + &kron(&i1, &a2.hamiltonian(), max_dim)?;
            let v = &kron(atom1.dipole(), &i2, max_dim)? + &kron(&i1, a2.dipole(), max_dim)?;
            let rho = kron(&atom1.ground_state(), &a2.ground_state(), max_dim)?;
            let obs = kron(&p1, &i2, max_dim)?;
            Ok((h.into_entries(), v.into_entries(), rho.into_entries(), obs.into_entries()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{prepare_state, FieldMode, ModeState, StateSpec};
    use crate::matter::{harmonic, ladder, two_level};
    use crate::response::{chi1, chi3};

    #[test]
    fn sign_parsing_and_contract() {
        let s = SignSequence::parse("+−-+", true).unwrap();
        assert_eq!(s.to_string(), "+--+");
        assert!(matches!(SignSequence::parse("-+", true), Err(Error::Contract(_))));
        assert!(SignSequence::parse("-+", false).is_ok());
        assert!(SignSequence::parse("+x", true).is_err());
        assert!(SignSequence::parse("", false).is_err());
    }

    #[test]
    fn minus_minus_vanishes() {
        let s = ladder(&[1.0, 0.9], &[1.0, 0.7], 0.05).unwrap();
        let rho = thermal_state(&s, 0.7).unwrap();
        let seq = SignSequence::parse("--", false).unwrap();
        let v = super_correlator(&s, &rho, &seq, &[1.3, 0.2]).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn plus_minus_two_level() {
        // Tr[V(t)[V, |g⟩⟨g|]] = μ²(e^{−iω₀t} − e^{iω₀t}) = −2iμ² sin ω₀t.
        let (w0, mu) = (1.3, 0.7);
        let s = two_level(w0, mu, 0.05).unwrap();
        let seq = SignSequence::parse("+-", true).unwrap();
        for t in [0.0, 0.4, 1.7, 5.0] {
            let v = super_correlator(&s, &s.ground_state(), &seq, &[t, 0.0]).unwrap();
            let want = C64::new(0.0, -2.0 * mu * mu * (w0 * t).sin());
            assert!((v - want).norm() < 1e-14, "{t}: {v} vs {want}");
        }
    }

    #[test]
    fn all_plus_equal_times() {
        // ½-anticommutators at equal times, ground state: Tr[V₊⁴ρ] = ⟨V⁴⟩ for
        // the two-level system (V² = μ² I), so μ⁴.
        let mu = 0.8;
        let s = two_level(1.0, mu, 0.05).unwrap();
        let seq = SignSequence::parse("++++", true).unwrap();
        let v = super_correlator(&s, &s.ground_state(), &seq, &[0.5; 4]).unwrap();
        let v4 = s.dipole().entries().pow(4);
        assert!((v - v4[(0, 0)]).norm() < 1e-14);
        assert!((v.re - mu.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn times_must_descend() {
        let s = two_level(1.0, 1.0, 0.05).unwrap();
        let seq = SignSequence::parse("+-", true).unwrap();
        assert!(super_correlator(&s, &s.ground_state(), &seq, &[0.0, 1.0]).is_err());
        assert!(super_correlator(&s, &s.ground_state(), &seq, &[1.0]).is_err());
    }

    #[test]
    fn spectrum_reproduces_chi1() {
        let s = ladder(&[1.0, 0.9], &[1.0, 0.7], 0.05).unwrap();
        let rho = thermal_state(&s, 1.0).unwrap();
        let seq = SignSequence::parse("+-", true).unwrap();
        for w in [0.5, 0.9, 1.0, 1.6] {
            let a = super_spectrum(&s, &rho, &seq, &[w]).unwrap();
            let b = chi1(&s, &rho, w).unwrap();
            assert!((a - b).norm() < 1e-12 * b.norm());
        }
    }

    #[test]
    fn symmetrized_spectrum_is_chi3() {
        let s = ladder(&[1.0, 0.9], &[1.0, 0.7], 0.05).unwrap();
        let rho = thermal_state(&s, 1.0).unwrap();
        let seq = SignSequence::parse("+---", true).unwrap();
        let w = [0.8, -0.6, 0.95];
        let mut sym = ZERO;
        for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            sym += super_spectrum(&s, &rho, &seq, &[w[p[0]], w[p[1]], w[p[2]]]).unwrap();
        }
        sym /= 6.0;
        let want = chi3(&s, &rho, w.iter().sum(), w).unwrap();
        assert!((sym - want).norm() < 1e-10 * want.norm(), "{sym} vs {want}");
    }

    #[test]
    fn fdt_two_level_value() {
        let s = two_level(1.0, 1.0, 0.05).unwrap();
        let t = fdt_check(&s, 2.0, &[1.0]).unwrap();
        let line = t.lines.iter().find(|l| (l.omega - 1.0).abs() < 1e-12).unwrap();
        assert!((line.ratio - 0.656_517_642_749_665).abs() < 1e-6);
        assert!((line.ratio - 1.0 / 1f64.tanh() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn fdt_limits() {
        let s = two_level(1.0, 1.0, 0.05).unwrap();
        let cold = fdt_check(&s, 60.0, &[]).unwrap();
        let pos = cold.lines.iter().find(|l| l.omega > 0.0).unwrap();
        assert!((pos.ratio - 0.5).abs() < 1e-12);
        let s = two_level(0.05, 1.0, 0.01).unwrap();
        let hot = fdt_check(&s, 1.0, &[]).unwrap();
        let pos = hot.lines.iter().find(|l| l.omega > 0.0).unwrap();
        assert!((pos.ratio * 0.05 - 1.0).abs() < 0.02);
    }

    #[test]
    fn fdt_degenerate_harmonic_lines() {
        let s = harmonic(6, 1.0, 1.0, 0.05).unwrap();
        let t = fdt_check(&s, 0.8, &[0.5, 1.0]).unwrap();
        assert_eq!(t.lines.len(), 2);
        assert!(t.max_line_error() < 1e-12);
    }

    #[test]
    fn fdt_negative_control() {
        let s = ladder(&[1.0, 0.9], &[1.0, 0.7], 0.05).unwrap();
        let excited = s.level_state(2).unwrap();
        let t = fdt_check_state(&s, &excited, 1.0, &[]).unwrap();
        assert!(t.max_line_error() > 1e-5);
    }

    #[test]
    fn c_plus_minus_is_absorptive_chi1() {
        let s = ladder(&[1.0, 0.9], &[1.0, 0.7], 0.05).unwrap();
        let rho = thermal_state(&s, 1.3).unwrap();
        let grid: Vec<f64> = (0..40).map(|k| -2.0 + 0.1 * k as f64).collect();
        let t = fdt_check(&s, 1.3, &grid).unwrap();
        for r in &t.rows {
            let x = chi1(&s, &rho, r.omega).unwrap();
            assert!((r.c_plus_minus + 2.0 * x.im).abs() < 1e-12 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn nonlinear_ratio_differs_between_resonances() {
        let s = ladder(&[1.0, 0.9], &[1.0, 1.0], 0.05).unwrap();
        let rho = thermal_state(&s, 1.0).unwrap();
        let (_, _, r1) = nonlinear_ratio(&s, &rho, 1.0).unwrap();
        let (_, _, r2) = nonlinear_ratio(&s, &rho, 0.9).unwrap();
        assert!((r1 - r2).norm() / r1.norm().max(r2.norm()) > 0.1);
    }

    fn coherent_field(lambda: f64, beta: f64) -> FieldState {
        let modes = vec![FieldMode::new(1.0, lambda, 8)];
        prepare_state(&modes, StateSpec::Product(vec![ModeState::Coherent(C64::new(beta, 0.0))])).unwrap()
    }

    fn short() -> TwoAtomParams {
        TwoAtomParams { time: 10.0, steps: 500, atom2_scales: vec![0.9, 1.0, 1.1], ..Default::default() }
    }

    #[test]
    fn classical_drive_ignores_atom_two() {
        let a = two_level(1.0, 1.0, 0.05).unwrap();
        let r = two_atom_demo(&a, &a, &coherent_field(0.05, 1.0), Driving::Classical, &short()).unwrap();
        assert!(r.rows[0].population > 1e-4);
        assert!(r.max_relative_shift < 1e-10, "{}", r.max_relative_shift);
    }

    #[test]
    fn quantum_field_couples_atoms() {
        let a = two_level(1.0, 1.0, 0.05).unwrap();
        let r = two_atom_demo(&a, &a, &coherent_field(0.05, 1.0), Driving::Quantum, &short()).unwrap();
        assert!(r.max_relative_shift > 1e-6, "{}", r.max_relative_shift);
    }

    #[test]
    fn zero_coupling_freezes_populations() {
        let a = two_level(1.0, 1.0, 0.05).unwrap();
        for d in [Driving::Classical, Driving::Quantum] {
            let r = two_atom_demo(&a, &a, &coherent_field(0.0, 1.0), d, &short()).unwrap();
            assert!(r.rows.iter().all(|x| x.population.abs() < 1e-14));
        }
    }
}
