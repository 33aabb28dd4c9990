//! Finite-dimensional operator representations (Fock, spin, quasi-spin,
//! multimode) and state constructors (Fock, coherent, squeezed, spin
//! coherent, random pure/mixed).

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrError};
use crate::matkit::{self, HERM_TOL};
use crate::{real, CMat, CVec, Scalar};

/// Default tolerance on the truncation tail (top-two-level occupancy).
pub const TAIL_TOL: f64 = 1e-12;

/// Which finite basis a matrix lives on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BasisSpec {
    /// `modes` tensor factors of a Fock space truncated at `levels`.
    Fock { levels: usize, modes: usize },
    /// Spin-j representation, dimension 2j + 1; `two_j` stores 2j exactly.
    Spin { two_j: u32 },
    /// Positive discrete series of the quasi-spin algebra with Bargmann
    /// index `k`, truncated at `levels`.
    Su11 { k: f64, levels: usize },
}

impl BasisSpec {
    pub fn fock(levels: usize, modes: usize) -> Result<Self> {
        if levels < 2 {
            return Err(UrError::InvalidParameter(format!(
                "fock basis needs at least 2 levels, got {levels}"
            )));
        }
        if modes < 1 || modes > 3 {
            return Err(UrError::InvalidParameter(format!(
                "mode count {modes} outside supported range 1..=3"
            )));
        }
        if modes > 1 && levels > 12 {
            return Err(UrError::InvalidParameter(format!(
                "multimode bases capped at 12 levels per mode, got {levels}"
            )));
        }
        Ok(BasisSpec::Fock { levels, modes })
    }

    pub fn spin(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(UrError::InvalidParameter("spin j must be positive".into()));
        }
        Ok(BasisSpec::Spin { two_j })
    }

    pub fn su11(k: f64, levels: usize) -> Result<Self> {
        if k <= 0.0 {
            return Err(UrError::InvalidParameter(format!(
                "Bargmann index must be positive, got {k}"
            )));
        }
        if levels < 2 {
            return Err(UrError::InvalidParameter(format!(
                "su11 basis needs at least 2 levels, got {levels}"
            )));
        }
        Ok(BasisSpec::Su11 { k, levels })
    }

    pub fn dim(&self) -> usize {
        match *self {
            BasisSpec::Fock { levels, modes } => levels.pow(modes as u32),
            BasisSpec::Spin { two_j } => two_j as usize + 1,
            BasisSpec::Su11 { levels, .. } => levels,
        }
    }
}

/// A complex square matrix on a declared basis, with a Hermiticity flag.
#[derive(Debug, Clone)]
pub struct Operator<T: Scalar> {
    pub basis: BasisSpec,
    pub matrix: CMat<T>,
    pub hermitian: bool,
}

impl<T: Scalar> Operator<T> {
    /// Wrap a matrix that is expected to be Hermitian; the defect is checked.
    pub fn hermitian(basis: BasisSpec, matrix: CMat<T>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(UrError::DimensionMismatch {
                left: basis.dim(),
                right: matrix.nrows(),
            });
        }
        let defect = matkit::herm_defect(&matrix);
        if defect > real(HERM_TOL) {
            return Err(UrError::NotHermitian {
                defect: nalgebra::try_convert(defect).unwrap_or(f64::NAN),
                tol: HERM_TOL,
            });
        }
        Ok(Operator {
            basis,
            matrix,
            hermitian: true,
        })
    }

    /// Wrap a matrix without any Hermiticity claim.
    pub fn general(basis: BasisSpec, matrix: CMat<T>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(UrError::DimensionMismatch {
                left: basis.dim(),
                right: matrix.nrows(),
            });
        }
        Ok(Operator {
            basis,
            matrix,
            hermitian: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            basis: self.basis.clone(),
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// k-th matrix power; the Hermiticity flag survives.
    pub fn pow(&self, k: usize) -> Self {
        let mut m = CMat::identity(self.dim(), self.dim());
        for _ in 0..k {
            m = &m * &self.matrix;
        }
        Operator {
            basis: self.basis.clone(),
            matrix: m,
            hermitian: self.hermitian,
        }
    }
}

/// XY - YX. For Hermitian X, Y the result is anti-Hermitian, so the flag
/// is left unset.
pub fn commutator<T: Scalar>(x: &Operator<T>, y: &Operator<T>) -> Result<Operator<T>> {
    if x.basis != y.basis {
        return Err(UrError::BasisMismatch);
    }
    let m = &x.matrix * &y.matrix - &y.matrix * &x.matrix;
    Operator::general(x.basis.clone(), m)
}

/// Pure amplitude vector or density operator on a declared basis.
#[derive(Debug, Clone)]
pub enum StateForm<T: Scalar> {
    Pure(CVec<T>),
    Mixed(CMat<T>),
}

#[derive(Debug, Clone)]
pub struct QuantumState<T: Scalar> {
    pub basis: BasisSpec,
    pub form: StateForm<T>,
}

impl<T: Scalar> QuantumState<T> {
    /// A pure state; the norm must be within 1e-10 of 1.
    pub fn pure(basis: BasisSpec, amplitudes: CVec<T>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(UrError::DimensionMismatch {
                left: basis.dim(),
                right: amplitudes.len(),
            });
        }
        let defect = (amplitudes.norm() - T::one()).abs();
        if defect > real(1e-10) {
            return Err(UrError::NotNormalized(
                nalgebra::try_convert(defect).unwrap_or(f64::NAN),
            ));
        }
        Ok(QuantumState {
            basis,
            form: StateForm::Pure(amplitudes),
        })
    }

    /// A density operator: Hermitian, PSD, unit trace, each at 1e-10.
    pub fn mixed(basis: BasisSpec, rho: CMat<T>) -> Result<Self> {
        if rho.nrows() != basis.dim() {
            return Err(UrError::DimensionMismatch {
                left: basis.dim(),
                right: rho.nrows(),
            });
        }
        if !matkit::is_psd(&rho, real(1e-10))? {
            return Err(UrError::NotPsd {
                min_eig: nalgebra::try_convert(matkit::min_eigenvalue(&rho)).unwrap_or(f64::NAN),
            });
        }
        let trace_defect = (rho.trace().re - T::one()).abs();
        if trace_defect > real(1e-10) {
            return Err(UrError::NotNormalized(
                nalgebra::try_convert(trace_defect).unwrap_or(f64::NAN),
            ));
        }
        Ok(QuantumState {
            basis,
            form: StateForm::Mixed(rho),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.form, StateForm::Pure(_))
    }

    pub fn to_density(&self) -> CMat<T> {
        match &self.form {
            StateForm::Pure(psi) => psi * psi.adjoint(),
            StateForm::Mixed(rho) => rho.clone(),
        }
    }

    fn populations(&self) -> Vec<T> {
        match &self.form {
            StateForm::Pure(psi) => psi.iter().map(|c| c.norm_sqr()).collect(),
            StateForm::Mixed(rho) => (0..rho.nrows()).map(|i| rho[(i, i)].re).collect(),
        }
    }

    /// Top-two-level occupancy of the truncated ladder, maximized over
    /// modes. `None` for spin bases, which are exact.
    pub fn tail_occupancy(&self) -> Option<T> {
        let probs = self.populations();
        match self.basis {
            BasisSpec::Fock { levels, modes } => {
                let mut worst = T::zero();
                for mode in 0..modes {
                    let stride = levels.pow((modes - 1 - mode) as u32);
                    let mut occ = T::zero();
                    for (i, &p) in probs.iter().enumerate() {
                        let n = (i / stride) % levels;
                        if n + 2 >= levels {
                            occ += p;
                        }
                    }
                    if occ > worst {
                        worst = occ;
                    }
                }
                Some(worst)
            }
            BasisSpec::Su11 { levels, .. } => {
                let mut occ = T::zero();
                for (n, &p) in probs.iter().enumerate() {
                    if n + 2 >= levels {
                        occ += p;
                    }
                }
                Some(occ)
            }
            BasisSpec::Spin { .. } => None,
        }
    }

    /// Refuse truncated states whose top-two-level occupancy exceeds `tol`.
    pub fn check_tail(&self, tol: Option<T>) -> Result<()> {
        let (Some(tol), Some(occ)) = (tol, self.tail_occupancy()) else {
            return Ok(());
        };
        if occ > tol {
            return Err(UrError::TailGate {
                occupancy: nalgebra::try_convert(occ).unwrap_or(f64::NAN),
                tol: nalgebra::try_convert(tol).unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// |<self|other>|^2 for two pure states on the same basis.
    pub fn fidelity(&self, other: &QuantumState<T>) -> Result<T> {
        if self.basis != other.basis {
            return Err(UrError::BasisMismatch);
        }
        match (&self.form, &other.form) {
            (StateForm::Pure(a), StateForm::Pure(b)) => Ok(a.dotc(b).norm_sqr()),
            _ => Err(UrError::InvalidParameter(
                "fidelity implemented for pure states only".into(),
            )),
        }
    }
}

/// Ladder and quadrature operators for `modes` truncated oscillators.
///
/// Conventions: q = (a + a†)/√2, p = -i(a - a†)/√2, so [p, q] = -i on the
/// truncation bulk.
#[derive(Debug, Clone)]
pub struct FockOps<T: Scalar> {
    pub basis: BasisSpec,
    pub lowering: Vec<Operator<T>>,
    pub raising: Vec<Operator<T>>,
    pub position: Vec<Operator<T>>,
    pub momentum: Vec<Operator<T>>,
}

impl<T: Scalar> FockOps<T> {
    /// Canonical vector ordered (p_1, ..., p_m, q_1, ..., q_m), the
    /// ordering every symplectic-metric computation assumes.
    pub fn canonical_ordered(&self) -> Vec<Operator<T>> {
        self.momentum
            .iter()
            .chain(self.position.iter())
            .cloned()
            .collect()
    }
}

/// Single-mode annihilation matrix on `levels` levels: a|n> = √n |n-1>.
fn lowering_matrix<T: Scalar>(levels: usize) -> CMat<T> {
    CMat::from_fn(levels, levels, |i, j| {
        if j == i + 1 {
            Complex::new(real::<T>((j as f64).sqrt()), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Kronecker product embedding `m` at tensor slot `mode` with identities
/// elsewhere; mode 0 is the leftmost factor.
fn embed_mode<T: Scalar>(m: &CMat<T>, levels: usize, modes: usize, mode: usize) -> CMat<T> {
    let mut out = CMat::identity(1, 1);
    for slot in 0..modes {
        let factor = if slot == mode {
            m.clone()
        } else {
            CMat::identity(levels, levels)
        };
        out = out.kronecker(&factor);
    }
    out
}

/// Ladder and quadrature operators for a truncated multimode Fock space.
pub fn fock_operators<T: Scalar>(levels: usize, modes: usize) -> Result<FockOps<T>> {
    let basis = BasisSpec::fock(levels, modes)?;
    let single = lowering_matrix::<T>(levels);
    let sqrt_half = Complex::new(real::<T>(1.0 / std::f64::consts::SQRT_2), T::zero());
    let minus_i = Complex::new(T::zero(), -T::one());

    let mut lowering = Vec::new();
    let mut raising = Vec::new();
    let mut position = Vec::new();
    let mut momentum = Vec::new();
    for mode in 0..modes {
        let a = embed_mode(&single, levels, modes, mode);
        let adag = a.adjoint();
        let q = (&a + &adag) * sqrt_half;
        let p = (&a - &adag) * (minus_i * sqrt_half);
        lowering.push(Operator::general(basis.clone(), a)?);
        raising.push(Operator::general(basis.clone(), adag)?);
        position.push(Operator::hermitian(basis.clone(), q)?);
        momentum.push(Operator::hermitian(basis.clone(), p)?);
    }
    Ok(FockOps {
        basis,
        lowering,
        raising,
        position,
        momentum,
    })
}

/// Spin operators (J1, J2, J3) in the (2j+1)-dimensional representation,
/// weight basis ordered m = j, j-1, ..., -j.
pub fn spin_operators<T: Scalar>(two_j: u32) -> Result<[Operator<T>; 3]> {
    let basis = BasisSpec::spin(two_j)?;
    let dim = basis.dim();
    let j = two_j as f64 / 2.0;

    // J+ |j,m> = sqrt((j-m)(j+m+1)) |j,m+1>; row i holds m = j - i
    let mut jp = CMat::<T>::zeros(dim, dim);
    for i in 0..dim - 1 {
        let m = j - (i + 1) as f64;
        let amp = ((j - m) * (j + m + 1.0)).sqrt();
        jp[(i, i + 1)] = Complex::new(real(amp), T::zero());
    }
    let jm = jp.adjoint();
    let half = Complex::new(real::<T>(0.5), T::zero());
    let half_over_i = Complex::new(T::zero(), -real::<T>(0.5));
    let j1 = (&jp + &jm) * half;
    let j2 = (&jp - &jm) * half_over_i;
    let j3 = CMat::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex::new(real::<T>(j - r as f64), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    Ok([
        Operator::hermitian(basis.clone(), j1)?,
        Operator::hermitian(basis.clone(), j2)?,
        Operator::hermitian(basis, j3)?,
    ])
}

/// Quasi-spin operators (K1, K2, K3) in the positive discrete series with
/// Bargmann index `k`, truncated at `levels`. K3|n> = (k+n)|n>,
/// K+|n> = sqrt((n+1)(2k+n)) |n+1>.
pub fn su11_operators<T: Scalar>(k: f64, levels: usize) -> Result<[Operator<T>; 3]> {
    let basis = BasisSpec::su11(k, levels)?;
    let dim = levels;
    let mut kp = CMat::<T>::zeros(dim, dim);
    for n in 0..dim - 1 {
        let amp = ((n as f64 + 1.0) * (2.0 * k + n as f64)).sqrt();
        kp[(n + 1, n)] = Complex::new(real(amp), T::zero());
    }
    let km = kp.adjoint();
    let half = Complex::new(real::<T>(0.5), T::zero());
    let half_over_i = Complex::new(T::zero(), -real::<T>(0.5));
    let k1 = (&kp + &km) * half;
    let k2 = (&kp - &km) * half_over_i;
    let k3 = CMat::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex::new(real::<T>(k + r as f64), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    Ok([
        Operator::hermitian(basis.clone(), k1)?,
        Operator::hermitian(basis.clone(), k2)?,
        Operator::hermitian(basis, k3)?,
    ])
}

/// Canonical coherent state |α> on a truncated single-mode Fock space.
///
/// Errors when the analytic truncation tail Σ_{n>=N} |α|^{2n} e^{-|α|²}/n!
/// exceeds `tail_tol`; the truncated vector is renormalized.
pub fn coherent_state<T: Scalar>(
    alpha: Complex<T>,
    levels: usize,
    tail_tol: T,
) -> Result<QuantumState<T>> {
    let basis = BasisSpec::fock(levels, 1)?;
    let a2: f64 = nalgebra::try_convert(alpha.norm_sqr()).unwrap_or(f64::NAN);
    // Poisson weights in f64; the tail is 1 - Σ_{n<N} P(n)
    let mut kept = 0.0f64;
    let mut log_w = -a2; // log of e^{-|α|²} |α|^{2n}/n! at n = 0
    for n in 0..levels {
        if n > 0 {
            log_w += a2.ln() - (n as f64).ln();
        }
        kept += log_w.exp();
    }
    let tail = (1.0 - kept).max(0.0);
    if tail > nalgebra::try_convert(tail_tol).unwrap_or(f64::NAN) {
        return Err(UrError::TailGate {
            occupancy: tail,
            tol: nalgebra::try_convert(tail_tol).unwrap_or(f64::NAN),
        });
    }

    let mut amps = CVec::<T>::zeros(levels);
    let mut c = Complex::new(T::one(), T::zero()); // α^n/√(n!) before the global factor
    for n in 0..levels {
        if n > 0 {
            c = c * alpha / Complex::new(real::<T>((n as f64).sqrt()), T::zero());
        }
        amps[n] = c;
    }
    let norm = amps.norm();
    amps /= Complex::new(norm, T::zero());
    QuantumState::pure(basis, amps)
}

/// Displaced squeezed vacuum D(α) S(ζ) |0>, with
/// D(α) = exp(α a† - α* a) and S(ζ) = exp((ζ* a² - ζ a†²)/2).
///
/// For real ζ = r this gives Δq² = e^{-2r}/2 and Δp² = e^{2r}/2.
pub fn squeezed_state<T: Scalar>(
    alpha: Complex<T>,
    zeta: Complex<T>,
    levels: usize,
    tail_tol: T,
) -> Result<QuantumState<T>> {
    let basis = BasisSpec::fock(levels, 1)?;
    let zmag: f64 = nalgebra::try_convert::<T, f64>(zeta.norm_sqr())
        .unwrap_or(f64::NAN)
        .sqrt();
    if zmag > 1.5 {
        return Err(UrError::InvalidParameter(format!(
            "squeeze magnitude {zmag} above supported 1.5 (suggest N >= {:.0})",
            25.0 * (2.0 * zmag).exp()
        )));
    }
    let a = lowering_matrix::<T>(levels);
    let adag = a.adjoint();
    let half = Complex::new(real::<T>(0.5), T::zero());
    let disp_gen = &adag * alpha - &a * alpha.conj();
    let sq_gen = (&a * &a * zeta.conj() - &adag * &adag * zeta) * half;
    let psi0 = CVec::<T>::from_fn(levels, |i, _| {
        if i == 0 {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let mut psi = crate::matkit::exp_apply(&disp_gen, &crate::matkit::exp_apply(&sq_gen, &psi0));
    let norm = psi.norm();
    psi /= Complex::new(norm, T::zero());
    let state = QuantumState::pure(basis, psi)?;
    state.check_tail(Some(tail_tol))?;
    Ok(state)
}

/// Rotation of the highest-weight state |j, j> by polar angle θ and
/// azimuth φ: exp(-iφJ3) exp(-iθJ2) |j, j>.
pub fn spin_coherent_state<T: Scalar>(two_j: u32, theta: T, phi: T) -> Result<QuantumState<T>> {
    let [_, j2, j3] = spin_operators::<T>(two_j)?;
    let basis = BasisSpec::spin(two_j)?;
    let dim = basis.dim();
    let minus_i_theta = Complex::new(T::zero(), -theta);
    let minus_i_phi = Complex::new(T::zero(), -phi);
    let rot = (j3.matrix * minus_i_phi).exp() * (j2.matrix * minus_i_theta).exp();
    let mut top = CVec::<T>::zeros(dim);
    top[0] = Complex::new(T::one(), T::zero());
    let mut psi = rot * top;
    let norm = psi.norm();
    psi /= Complex::new(norm, T::zero());
    QuantumState::pure(basis, psi)
}

/// Haar-distributed pure state: i.i.d. standard complex normal amplitudes,
/// normalized. Deterministic for a fixed generator state.
pub fn random_pure<T: Scalar, R: Rng>(basis: &BasisSpec, rng: &mut R) -> QuantumState<T> {
    let dim = basis.dim();
    let mut psi = CVec::<T>::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(real(re), real(im))
    });
    let norm = psi.norm();
    psi /= Complex::new(norm, T::zero());
    QuantumState::pure(basis.clone(), psi).expect("normalized by construction")
}

/// Random mixed state of the given rank: normalized Gram of `rank` random
/// kets, so it is PSD with unit trace by construction.
pub fn random_mixed<T: Scalar, R: Rng>(
    basis: &BasisSpec,
    rank: usize,
    rng: &mut R,
) -> Result<QuantumState<T>> {
    let dim = basis.dim();
    if rank == 0 || rank > dim {
        return Err(UrError::InvalidParameter(format!(
            "rank {rank} outside 1..={dim}"
        )));
    }
    let mut rho = CMat::<T>::zeros(dim, dim);
    for _ in 0..rank {
        let ket = CVec::<T>::from_fn(dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(real(re), real(im))
        });
        rho += &ket * ket.adjoint();
    }
    let tr = rho.trace();
    rho /= tr;
    QuantumState::mixed(basis.clone(), rho)
}

/// Fock number state |n>.
pub fn fock_state<T: Scalar>(n: usize, levels: usize) -> Result<QuantumState<T>> {
    let basis = BasisSpec::fock(levels, 1)?;
    if n >= levels {
        return Err(UrError::InvalidParameter(format!(
            "level {n} outside truncation {levels}"
        )));
    }
    let mut psi = CVec::<T>::zeros(levels);
    psi[n] = Complex::new(T::one(), T::zero());
    QuantumState::pure(basis, psi)
}

/// Multimode vacuum on `modes` oscillators.
pub fn multimode_vacuum<T: Scalar>(levels: usize, modes: usize) -> Result<QuantumState<T>> {
    let basis = BasisSpec::fock(levels, modes)?;
    let mut psi = CVec::<T>::zeros(basis.dim());
    psi[0] = Complex::new(T::one(), T::zero());
    QuantumState::pure(basis, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_entry(m: &CMat<f64>) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn two_level_position_matrix() {
        let ops = fock_operators::<f64>(2, 1).unwrap();
        let q = &ops.position[0].matrix;
        let s = 1.0 / std::f64::consts::SQRT_2;
        assert_relative_eq!(q[(0, 1)].re, s);
        assert_relative_eq!(q[(1, 0)].re, s);
        assert_relative_eq!(q[(0, 0)].re, 0.0);
    }

    #[test]
    fn canonical_commutator_on_bulk() {
        let ops = fock_operators::<f64>(20, 1).unwrap();
        let c = commutator(&ops.momentum[0], &ops.position[0]).unwrap();
        // [p,q] = -i on the top-left (N-1)x(N-1) block
        for i in 0..19 {
            for j in 0..19 {
                let expect = if i == j {
                    Complex::new(0.0, -1.0)
                } else {
                    Complex::new(0.0, 0.0)
                };
                assert!((c.matrix[(i, j)] - expect).norm() < 1e-12);
            }
        }
        // the corner entry deviates: a truncation artifact
        assert!((c.matrix[(19, 19)] - Complex::new(0.0, -1.0)).norm() > 1.0);
    }

    #[test]
    fn cross_mode_operators_commute() {
        let ops = fock_operators::<f64>(10, 2).unwrap();
        let c = commutator(&ops.momentum[0], &ops.position[1]).unwrap();
        assert_eq!(max_entry(&c.matrix), 0.0);
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let [j1, j2, j3] = spin_operators::<f64>(1).unwrap();
        assert_relative_eq!(j1.matrix[(0, 1)].re, 0.5);
        assert_relative_eq!(j2.matrix[(0, 1)].im, -0.5);
        assert_relative_eq!(j3.matrix[(0, 0)].re, 0.5);
        let c = commutator(&j1, &j2).unwrap();
        let expect = &j3.matrix * Complex::new(0.0, 1.0);
        assert!(max_entry(&(c.matrix - expect)) < 1e-15);
    }

    #[test]
    fn spin_one_weights() {
        let [_, _, j3] = spin_operators::<f64>(2).unwrap();
        assert_relative_eq!(j3.matrix[(0, 0)].re, 1.0);
        assert_relative_eq!(j3.matrix[(1, 1)].re, 0.0);
        assert_relative_eq!(j3.matrix[(2, 2)].re, -1.0);
    }

    #[test]
    fn casimir_spin_five_halves() {
        let [j1, j2, j3] = spin_operators::<f64>(5).unwrap();
        let j = 2.5;
        let casimir = &j1.matrix * &j1.matrix + &j2.matrix * &j2.matrix + &j3.matrix * &j3.matrix;
        let expect = CMat::identity(6, 6) * Complex::new(j * (j + 1.0), 0.0);
        assert!(max_entry(&(casimir - expect)) < 1e-12);
    }

    #[test]
    fn su11_commutator_on_bulk() {
        let [k1, k2, k3] = su11_operators::<f64>(0.5, 15).unwrap();
        let c = commutator(&k1, &k2).unwrap();
        // [K1,K2] = -iK3 away from the truncation edge
        let expect = &k3.matrix * Complex::new(0.0, -1.0);
        let diff = c.matrix - expect;
        for i in 0..14 {
            for j in 0..14 {
                assert!(diff[(i, j)].norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn su11_diagonal() {
        let [_, _, k3] = su11_operators::<f64>(1.0, 5).unwrap();
        for n in 0..5 {
            assert_relative_eq!(k3.matrix[(n, n)].re, 1.0 + n as f64);
        }
    }

    #[test]
    fn su11_rejects_bad_bargmann() {
        assert!(su11_operators::<f64>(0.0, 5).is_err());
        assert!(su11_operators::<f64>(-1.0, 5).is_err());
    }

    #[test]
    fn coherent_zero_is_vacuum() {
        let s = coherent_state::<f64>(Complex::new(0.0, 0.0), 10, 1e-12).unwrap();
        let StateForm::Pure(psi) = &s.form else {
            panic!()
        };
        assert_relative_eq!(psi[0].re, 1.0);
    }

    #[test]
    fn coherent_tail_gate_fires() {
        assert!(matches!(
            coherent_state::<f64>(Complex::new(3.0, 0.0), 5, 1e-12),
            Err(UrError::TailGate { .. })
        ));
    }

    #[test]
    fn squeezed_zero_squeeze_is_coherent() {
        let alpha = Complex::new(0.7, -0.3);
        let sq = squeezed_state::<f64>(alpha, Complex::new(0.0, 0.0), 40, 1e-12).unwrap();
        let coh = coherent_state::<f64>(alpha, 40, 1e-12).unwrap();
        assert!(sq.fidelity(&coh).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn squeeze_cap_enforced() {
        assert!(squeezed_state::<f64>(
            Complex::new(0.0, 0.0),
            Complex::new(1.6, 0.0),
            40,
            1e-12
        )
        .is_err());
    }

    #[test]
    fn spin_coherent_poles() {
        let up = spin_coherent_state::<f64>(1, 0.0, 0.0).unwrap();
        let StateForm::Pure(psi) = &up.form else {
            panic!()
        };
        assert_relative_eq!(psi[0].norm(), 1.0, epsilon = 1e-12);

        // spin flip at θ = π
        let down = spin_coherent_state::<f64>(1, std::f64::consts::PI, 0.0).unwrap();
        let StateForm::Pure(psi) = &down.form else {
            panic!()
        };
        assert_relative_eq!(psi[1].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_states_are_normalized_and_deterministic() {
        let basis = BasisSpec::fock(8, 1).unwrap();
        let mut rng1 = ChaCha8Rng::seed_from_u64(42);
        let mut rng2 = ChaCha8Rng::seed_from_u64(42);
        let s1 = random_pure::<f64, _>(&basis, &mut rng1);
        let s2 = random_pure::<f64, _>(&basis, &mut rng2);
        let (StateForm::Pure(a), StateForm::Pure(b)) = (&s1.form, &s2.form) else {
            panic!()
        };
        assert_eq!(a, b);
        assert_relative_eq!(a.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_mixed_rank_is_forced() {
        let basis = BasisSpec::fock(4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_mixed::<f64, _>(&basis, 2, &mut rng).unwrap();
        let StateForm::Mixed(rho) = &s.form else {
            panic!()
        };
        assert_relative_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
        let above: usize = crate::matkit::hermitian_eigenvalues(rho)
            .into_iter()
            .filter(|&e| e > 1e-10)
            .count();
        assert_eq!(above, 2);
        assert!(random_mixed::<f64, _>(&basis, 5, &mut rng).is_err());
    }

    #[test]
    fn pure_state_norm_gate() {
        let basis = BasisSpec::fock(2, 1).unwrap();
        let bad = CVec::from_vec(vec![Complex::new(0.9, 0.0), Complex::new(0.0, 0.0)]);
        assert!(matches!(
            QuantumState::pure(basis, bad),
            Err(UrError::NotNormalized(_))
        ));
    }

    #[test]
    fn commutator_basis_mismatch() {
        let a = fock_operators::<f64>(4, 1).unwrap();
        let b = fock_operators::<f64>(5, 1).unwrap();
        assert!(matches!(
            commutator(&a.position[0], &b.position[0]),
            Err(UrError::BasisMismatch)
        ));
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let ops = fock_operators::<f64>(6, 1).unwrap();
        let c = commutator(&ops.position[0], &ops.position[0]).unwrap();
        assert_eq!(max_entry(&c.matrix), 0.0);
    }
}
