//! Multilevel matter: level energies, dipole operator, broadening.
//!
//! Energies are ground-referenced (`E₀ = 0`) for the presets. The dipole has
//! no diagonal elements in the energy basis. One broadening `ε` per system
//! regularizes every resonance.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{OperatorMatrix, C64, HERMITIAN_TOL, ZERO};

pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct MatterSystem {
    energies: Vec<f64>,
    dipole: OperatorMatrix,
    dipole_lower: OperatorMatrix,
    epsilon: f64,
    label: String,
}

/// Named matter models addressable from configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum MatterPreset {
    TwoLevel {
        omega0: f64,
        mu: f64,
    },
    /// `spacings[k]` is `E_{k+1} − E_k`; `dipoles[k]` couples levels `k` and `k+1`.
    Ladder {
        spacings: Vec<f64>,
        dipoles: Vec<f64>,
    },
    /// Truncated oscillator with `⟨k+1|V|k⟩ = μ√(k+1)`.
    Harmonic {
        levels: usize,
        omega0: f64,
        mu: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreenKind {
    Retarded,
    Advanced,
}

impl MatterSystem {
    pub fn new(
        energies: Vec<f64>,
        dipole: OperatorMatrix,
        epsilon: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(Error::arg("matter system needs at least two levels"));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::arg("level energies must be finite"));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::arg("level energies must be ascending"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::arg(format!("broadening must be positive, got {epsilon}")));
        }
        if dipole.dim() != n {
            return Err(Error::arg(format!(
                "dipole dimension {} does not match {} levels",
                dipole.dim(),
                n
            )));
        }
        if !dipole.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::arg("dipole operator must be Hermitian"));
        }
        if (0..n).any(|k| dipole.get(k, k).norm() > 0.0) {
            return Err(Error::arg("dipole must have zero diagonal (no permanent dipoles)"));
        }
        let lower = DMatrix::from_fn(n, n, |i, j| if i < j { dipole.get(i, j) } else { ZERO });
        let dipole_lower = OperatorMatrix::from_matrix(lower)?;
        Ok(Self { energies, dipole, dipole_lower, epsilon, label: label.into() })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dipole(&self) -> &OperatorMatrix {
        &self.dipole
    }

    /// De-excitation part `Ṽ`: maps level `j` to lower levels `i < j`.
    pub fn dipole_lower(&self) -> &OperatorMatrix {
        &self.dipole_lower
    }

    /// Excitation part `Ṽ†`.
    pub fn dipole_raise(&self) -> OperatorMatrix {
        self.dipole_lower.adjoint()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn hamiltonian(&self) -> OperatorMatrix {
        OperatorMatrix::diagonal(&self.energies)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.energies.clone(), self.dipole.clone(), epsilon, self.label.clone())
    }

    /// Same system with every dipole element multiplied by `factor`.
    pub fn with_dipole_scale(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.energies.clone(),
            self.dipole.scale_re(factor),
            self.epsilon,
            self.label.clone(),
        )
    }

    /// Same system with all level energies shifted by `shift`.
    pub fn with_energy_shift(&self, shift: f64) -> Result<Self> {
        let e = self.energies.iter().map(|x| x + shift).collect();
        Self::new(e, self.dipole.clone(), self.epsilon, self.label.clone())
    }

    /// Transition frequencies `E_a − E_b` between every ordered pair with a
    /// nonzero dipole element, as `(a, b, ω_ab, |V_ab|²)`.
    pub fn transitions(&self) -> Vec<(usize, usize, f64, f64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let w = self.dipole.get(a, b).norm_sqr();
                if a != b && w > 0.0 {
                    out.push((a, b, self.energies[a] - self.energies[b], w));
                }
            }
        }
        out
    }

    pub fn ground_state(&self) -> OperatorMatrix {
        let mut p = vec![0.0; self.dim()];
        p[0] = 1.0;
        OperatorMatrix::diagonal(&p)
    }

    pub fn level_state(&self, level: usize) -> Result<OperatorMatrix> {
        if level >= self.dim() {
            return Err(Error::arg(format!("level {level} out of range")));
        }
        let mut p = vec![0.0; self.dim()];
        p[level] = 1.0;
        Ok(OperatorMatrix::diagonal(&p))
    }

    /// Applies the Liouville-space resolvent to `x`:
    /// `X_ab → X_ab / (Ω − (E_a − E_b) + iε)`.
    ///
    /// Acting on `|a⟩⟨g|` with a ground state at zero energy this is exactly
    /// `G(Ω)·X`; acting on `|g⟩⟨b|` it is `−X·G†(−Ω)`.
    pub fn liouville_resolvent(&self, omega: f64, x: &OperatorMatrix) -> OperatorMatrix {
        let n = self.dim();
        let e = &self.energies;
        let eps = self.epsilon;
        let m = DMatrix::from_fn(n, n, |a, b| {
            x.get(a, b) / C64::new(omega - (e[a] - e[b]), eps)
        });
        OperatorMatrix::from_matrix(m).expect("resolvent of a finite operator is finite")
    }
}

pub fn build_system(preset: &MatterPreset, epsilon: f64) -> Result<MatterSystem> {
    match preset {
        MatterPreset::TwoLevel { omega0, mu } => {
            if *omega0 <= 0.0 {
                return Err(Error::arg("two-level transition frequency must be positive"));
            }
            ladder_system(&[*omega0], &[*mu], epsilon, "two_level")
        }
        MatterPreset::Ladder { spacings, dipoles } => {
            if spacings.is_empty() {
                return Err(Error::arg("ladder needs at least one spacing (n >= 2)"));
            }
            if spacings.len() != dipoles.len() {
                return Err(Error::arg(format!(
                    "ladder has {} spacings but {} dipoles",
                    spacings.len(),
                    dipoles.len()
                )));
            }
            ladder_system(spacings, dipoles, epsilon, "ladder")
        }
        MatterPreset::Harmonic { levels, omega0, mu } => {
            if *levels < 2 {
                return Err(Error::arg("harmonic ladder needs at least two levels"));
            }
            if *omega0 <= 0.0 {
                return Err(Error::arg("oscillator frequency must be positive"));
            }
            let spacings = vec![*omega0; levels - 1];
            let dipoles: Vec<f64> = (1..*levels).map(|k| mu * (k as f64).sqrt()).collect();
            ladder_system(&spacings, &dipoles, epsilon, "harmonic")
        }
    }
}

fn ladder_system(spacings: &[f64], dipoles: &[f64], epsilon: f64, label: &str) -> Result<MatterSystem> {
    if spacings.iter().any(|s| *s < 0.0) {
        return Err(Error::arg("level spacings must be non-negative (ascending energies)"));
    }
    let n = spacings.len() + 1;
    let mut energies = vec![0.0; n];
    for k in 1..n {
        energies[k] = energies[k - 1] + spacings[k - 1];
    }
    let mut v = DMatrix::zeros(n, n);
    for (k, &d) in dipoles.iter().enumerate() {
        v[(k, k + 1)] = C64::new(d, 0.0);
        v[(k + 1, k)] = C64::new(d, 0.0);
    }
    MatterSystem::new(energies, OperatorMatrix::from_matrix(v)?, epsilon, label)
}

pub fn two_level(omega0: f64, mu: f64, epsilon: f64) -> Result<MatterSystem> {
    build_system(&MatterPreset::TwoLevel { omega0, mu }, epsilon)
}

pub fn harmonic(levels: usize, omega0: f64, mu: f64, epsilon: f64) -> Result<MatterSystem> {
    build_system(&MatterPreset::Harmonic { levels, omega0, mu }, epsilon)
}

pub fn ladder(spacings: &[f64], dipoles: &[f64], epsilon: f64) -> Result<MatterSystem> {
    build_system(
        &MatterPreset::Ladder { spacings: spacings.to_vec(), dipoles: dipoles.to_vec() },
        epsilon,
    )
}

/// Hilbert-space Green's function, diagonal with entries `1/(ω − E_k ± iε)`.
pub fn green(sys: &MatterSystem, omega: f64, kind: GreenKind) -> OperatorMatrix {
    let s = match kind {
        GreenKind::Retarded => 1.0,
        GreenKind::Advanced => -1.0,
    };
    let n = sys.dim();
    let mut m = DMatrix::zeros(n, n);
    for (k, e) in sys.energies.iter().enumerate() {
        m[(k, k)] = C64::new(1.0, 0.0) / C64::new(omega - e, s * sys.epsilon);
    }
    OperatorMatrix::from_matrix(m).expect("green's function entries are finite")
}

/// Canonical state `e^{−β_T H₀}/Z`.
pub fn thermal_state(sys: &MatterSystem, beta_t: f64) -> Result<OperatorMatrix> {
    if !(beta_t >= 0.0) || !beta_t.is_finite() {
        return Err(Error::arg(format!("inverse temperature must be >= 0, got {beta_t}")));
    }
    let e0 = sys.energies[0];
    let w: Vec<f64> = sys.energies.iter().map(|e| (-beta_t * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(OperatorMatrix::diagonal(&w.iter().map(|x| x / z).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::commutator;

    #[test]
    fn two_level_preset() {
        let s = two_level(1.0, 1.0, 0.05).unwrap();
        assert_eq!(s.energies(), &[0.0, 1.0]);
        assert_eq!(s.dipole().get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(s.dipole().get(1, 0), C64::new(1.0, 0.0));
        assert_eq!(s.dipole().get(0, 0), ZERO);
    }

    #[test]
    fn harmonic_ladder_elements() {
        let s = harmonic(4, 1.0, 1.0, 0.05).unwrap();
        let want = [1.0, 2f64.sqrt(), 3f64.sqrt()];
        for (k, w) in want.iter().enumerate() {
            assert!((s.dipole().get(k, k + 1).re - w).abs() < 1e-15);
        }
        assert_eq!(s.energies(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn ladder_energies() {
        let s = ladder(&[1.0, 0.9], &[1.0, 1.0], 0.05).unwrap();
        assert!((s.energies()[2] - 1.9).abs() < 1e-15);
    }

    #[test]
    fn invalid_presets() {
        assert!(ladder(&[], &[], 0.05).is_err());
        assert!(ladder(&[1.0, -0.5], &[1.0, 1.0], 0.05).is_err());
        assert!(harmonic(1, 1.0, 1.0, 0.05).is_err());
        assert!(two_level(1.0, 1.0, 0.0).is_err());
        let v = OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(MatterSystem::new(vec![1.0, 0.0], v.clone(), 0.1, "x").is_err());
        let diag = OperatorMatrix::from_real_rows(&[&[0.5, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(MatterSystem::new(vec![0.0, 1.0], diag, 0.1, "x").is_err());
    }

    #[test]
    fn dipole_split_reassembles() {
        let s = ladder(&[1.0, 0.7, 1.3], &[0.5, 1.2, 0.8], 0.05).unwrap();
        let sum = &s.dipole_lower().clone() + &s.dipole_raise();
        assert!(sum.max_abs_diff(s.dipole()) == 0.0);
        // Ṽ lowers: ⟨0|Ṽ|1⟩ ≠ 0, ⟨1|Ṽ|0⟩ = 0.
        assert!(s.dipole_lower().get(0, 1).norm() > 0.0);
        assert_eq!(s.dipole_lower().get(1, 0), ZERO);
    }

    #[test]
    fn green_pole_value() {
        let s = two_level(1.0, 1.0, 0.1).unwrap();
        let g = green(&s, 1.0, GreenKind::Retarded);
        assert!((g.get(1, 1) - C64::new(0.0, -10.0)).norm() < 1e-12);
    }

    #[test]
    fn retarded_adjoint_is_advanced() {
        let s = ladder(&[1.0, 0.9], &[1.0, 0.6], 0.07).unwrap();
        for w in [-2.3, -0.1, 0.45, 1.0, 3.7] {
            let r = green(&s, w, GreenKind::Retarded).adjoint();
            let a = green(&s, w, GreenKind::Advanced);
            assert!(r.max_abs_diff(&a) < 1e-15);
        }
    }

    #[test]
    fn green_asymptotics() {
        let s = two_level(1.0, 1.0, 0.05).unwrap();
        for w in [1e6, -1e6] {
            let g = green(&s, w, GreenKind::Retarded);
            let largest = (0..2).map(|k| g.get(k, k).norm()).fold(0.0, f64::max);
            assert!((largest * w.abs() - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn spectral_function_positive() {
        let s = ladder(&[1.0, 0.9], &[1.0, 1.0], 0.05).unwrap();
        for w in [-1.0, 0.0, 0.95, 2.0] {
            let diff = &green(&s, w, GreenKind::Retarded) - &green(&s, w, GreenKind::Advanced);
            for (k, e) in s.energies().iter().enumerate() {
                let im = diff.get(k, k).im;
                let want = -2.0 * s.epsilon() / ((w - e).powi(2) + s.epsilon().powi(2));
                assert!(im < 0.0);
                assert!((im - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thermal_limits() {
        let s = two_level(1.0, 1.0, 0.05).unwrap();
        let hot = thermal_state(&s, 0.0).unwrap();
        assert!(hot.max_abs_diff(&OperatorMatrix::identity(2).scale_re(0.5)) < 1e-15);
        let cold = thermal_state(&s, 50.0).unwrap();
        assert!(cold.max_abs_diff(&OperatorMatrix::diagonal(&[1.0, 0.0])) < 1e-10);
        let mid = thermal_state(&s, 2.0).unwrap();
        let p = mid.real_diagonal();
        assert!((p[1] / p[0] - (-2.0f64).exp()).abs() < 1e-15);
        assert!((mid.trace().re - 1.0).abs() < 1e-15);
        assert!(thermal_state(&s, -1.0).is_err());
    }

    #[test]
    fn thermal_commutes_with_hamiltonian() {
        let s = ladder(&[1.0, 0.9], &[1.0, 1.0], 0.05).unwrap();
        let rho = thermal_state(&s, 1.3).unwrap();
        assert!(commutator(&rho, &s.hamiltonian()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn resolvent_matches_green_on_ground_column() {
        let s = ladder(&[1.0, 0.9], &[1.0, 0.7], 0.05).unwrap();
        let x = &s.dipole().clone() * &s.ground_state();
        let w = 0.83;
        let lhs = s.liouville_resolvent(w, &x);
        let rhs = &green(&s, w, GreenKind::Retarded) * &x;
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        // Bra side: X·V with ground on the left picks up −G†(−Ω).
        let y = &s.ground_state() * s.dipole();
        let lhs = s.liouville_resolvent(w, &y);
        let rhs = (&y * &green(&s, -w, GreenKind::Advanced)).scale_re(-1.0);
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }
}
