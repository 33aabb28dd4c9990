//! Statistical-moment engine: means, covariances, the uncertainty matrix
//! σ, the commutator matrix C, and Gram matrices for (state, observable
//! set) pairs, pure or mixed.

use num_complex::Complex;

use crate::error::{Result, UrError};
use crate::hilbert::{Operator, QuantumState, StateForm};
use crate::matkit;
use crate::verdict::Tols;
use crate::{real, CMat, CVec, RMat, RVec, Scalar};

/// Means, uncertainty matrix σ, commutator matrix C and first-order Gram
/// matrix G = σ + iC for one state and a set of observables.
#[derive(Debug, Clone)]
pub struct MomentBundle<T: Scalar> {
    pub means: RVec<T>,
    pub sigma: RMat<T>,
    pub commutators: RMat<T>,
    pub gram: CMat<T>,
}

impl<T: Scalar> MomentBundle<T> {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Variance of the i-th observable.
    pub fn variance(&self, i: usize) -> T {
        self.sigma[(i, i)]
    }
}

fn check_inputs<T: Scalar>(
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<()> {
    if observables.is_empty() {
        return Err(UrError::InvalidParameter("empty observable set".into()));
    }
    for x in observables {
        if x.basis != state.basis {
            return Err(UrError::BasisMismatch);
        }
        if !x.hermitian {
            return Err(UrError::NotHermitian {
                defect: f64::NAN,
                tol: matkit::HERM_TOL,
            });
        }
    }
    state.check_tail(tols.tail)
}

/// <X> in the given state: <ψ|X|ψ> for pure, Tr(ρX) for mixed. The
/// imaginary residue must stay below 1e-10 and is then discarded.
pub fn mean<T: Scalar>(x: &Operator<T>, state: &QuantumState<T>, tols: &Tols<T>) -> Result<T> {
    check_inputs(&[x], state, tols)?;
    complex_mean(x, state).and_then(strip_imag)
}

/// <X> without the Hermiticity gate; used internally for products of
/// Hermitian observables, where the mean is genuinely complex.
pub fn complex_mean<T: Scalar>(x: &Operator<T>, state: &QuantumState<T>) -> Result<Complex<T>> {
    if x.basis != state.basis {
        return Err(UrError::BasisMismatch);
    }
    Ok(match &state.form {
        StateForm::Pure(psi) => psi.dotc(&(&x.matrix * psi)),
        StateForm::Mixed(rho) => (rho * &x.matrix).trace(),
    })
}

fn strip_imag<T: Scalar>(z: Complex<T>) -> Result<T> {
    if z.im.abs() > real(1e-10) {
        return Err(UrError::ImaginaryResidue(
            nalgebra::try_convert(z.im.abs()).unwrap_or(f64::NAN),
        ));
    }
    Ok(z.re)
}

/// Symmetrized covariance <XY + YX>/2 - <X><Y>; with X = Y this is the
/// variance.
pub fn covariance<T: Scalar>(
    x: &Operator<T>,
    y: &Operator<T>,
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<T> {
    check_inputs(&[x, y], state, tols)?;
    // Pure states avoid the O(n^3) operator products: <XY> = (Xψ)†(Yψ)
    // for Hermitian X (guaranteed by check_inputs).
    let (xy, yx) = match &state.form {
        StateForm::Pure(psi) => {
            let xs = &x.matrix * psi;
            let ys = &y.matrix * psi;
            (xs.dotc(&ys), ys.dotc(&xs))
        }
        StateForm::Mixed(_) => (
            complex_mean(
                &Operator::general(x.basis.clone(), &x.matrix * &y.matrix)?,
                state,
            )?,
            complex_mean(
                &Operator::general(x.basis.clone(), &y.matrix * &x.matrix)?,
                state,
            )?,
        ),
    };
    let half = real::<T>(0.5);
    let sym = strip_imag((xy + yx) * Complex::new(half, T::zero()))?;
    Ok(sym - mean(x, state, tols)? * mean(y, state, tols)?)
}

/// Gram matrix G_ij = <χ_i|χ_j> of shifted-observable vectors
/// |χ_i> = (X_i - <X_i>)|ψ>; mixed states use Tr[ρ δX_i δX_j].
fn first_order_gram<T: Scalar>(
    observables: &[&Operator<T>],
    means: &RVec<T>,
    state: &QuantumState<T>,
) -> Result<CMat<T>> {
    let n = observables.len();
    let shifted: Vec<CMat<T>> = observables
        .iter()
        .zip(means.iter())
        .map(|(x, &m)| {
            &x.matrix - CMat::from_diagonal_element(x.dim(), x.dim(), Complex::new(m, T::zero()))
        })
        .collect();
    Ok(match &state.form {
        StateForm::Pure(psi) => {
            let kets: Vec<CVec<T>> = shifted.iter().map(|d| d * psi).collect();
            CMat::from_fn(n, n, |i, j| kets[i].dotc(&kets[j]))
        }
        StateForm::Mixed(rho) => {
            CMat::from_fn(n, n, |i, j| (rho * &shifted[i] * &shifted[j]).trace())
        }
    })
}

/// Assemble means, σ, C and G for one state and n observables, and verify
/// the bundle invariants before returning.
pub fn moment_bundle<T: Scalar>(
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<MomentBundle<T>> {
    check_inputs(observables, state, tols)?;
    let n = observables.len();
    let mut means = RVec::zeros(n);
    for i in 0..n {
        means[i] = mean(observables[i], state, tols)?;
    }
    let gram = first_order_gram(observables, &means, state)?;

    let half = real::<T>(0.5);
    let sigma = RMat::from_fn(n, n, |i, j| (gram[(i, j)].re + gram[(j, i)].re) * half);
    let comm = RMat::from_fn(n, n, |i, j| (gram[(i, j)].im - gram[(j, i)].im) * half);

    // invariants: non-negative variances, G = σ + iC, G PSD
    for i in 0..n {
        if sigma[(i, i)] < -real::<T>(1e-10) {
            return Err(UrError::NotPsd {
                min_eig: nalgebra::try_convert(sigma[(i, i)]).unwrap_or(f64::NAN),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let residual = gram[(i, j)] - Complex::new(sigma[(i, j)], comm[(i, j)]);
            if residual.norm_sqr() > real::<T>(1e-20) {
                return Err(UrError::InvalidParameter(format!(
                    "Gram decomposition residual at ({i},{j})"
                )));
            }
        }
    }
    if !matkit::is_psd(&gram, real(1e-10))? {
        return Err(UrError::NotPsd {
            min_eig: nalgebra::try_convert(matkit::min_eigenvalue(&gram)).unwrap_or(f64::NAN),
        });
    }

    Ok(MomentBundle {
        means,
        sigma,
        commutators: comm,
        gram,
    })
}

/// Higher-order Gram matrix G_ij = <(X_i^k - <X_i>^k)(X_j^k - <X_j>^k)>,
/// the Gram matrix of the power-shifted states; PSD by construction.
pub fn gram_higher<T: Scalar>(
    observables: &[&Operator<T>],
    k: usize,
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<CMat<T>> {
    check_inputs(observables, state, tols)?;
    if k < 1 || k > 6 {
        return Err(UrError::InvalidParameter(format!(
            "moment order {k} outside supported 1..=6"
        )));
    }
    let n = observables.len();
    let mut shifted = Vec::with_capacity(n);
    for x in observables {
        let m = mean(x, state, tols)?;
        let mk = m.powi(k as i32);
        let powered = x.pow(k);
        shifted.push(
            &powered.matrix
                - CMat::from_diagonal_element(x.dim(), x.dim(), Complex::new(mk, T::zero())),
        );
    }
    let gram = match &state.form {
        StateForm::Pure(psi) => {
            let kets: Vec<CVec<T>> = shifted.iter().map(|d| d * psi).collect();
            CMat::from_fn(n, n, |i, j| kets[i].dotc(&kets[j]))
        }
        StateForm::Mixed(rho) => {
            CMat::from_fn(n, n, |i, j| (rho * &shifted[i] * &shifted[j]).trace())
        }
    };
    if !matkit::is_psd(&gram, real(1e-10))? {
        return Err(UrError::NotPsd {
            min_eig: nalgebra::try_convert(matkit::min_eigenvalue(&gram)).unwrap_or(f64::NAN),
        });
    }
    Ok(gram)
}

/// Gram matrix of arbitrary (not necessarily normalized) vectors on a
/// shared basis.
pub fn gram_generic<T: Scalar>(kets: &[CVec<T>]) -> Result<CMat<T>> {
    if kets.is_empty() {
        return Err(UrError::InvalidParameter("empty vector family".into()));
    }
    let d = kets[0].len();
    if kets.iter().any(|k| k.len() != d) {
        return Err(UrError::BasisMismatch);
    }
    let n = kets.len();
    let gram = CMat::from_fn(n, n, |i, j| kets[i].dotc(&kets[j]));
    if !matkit::is_psd(&gram, real(1e-10))? {
        return Err(UrError::NotPsd {
            min_eig: nalgebra::try_convert(matkit::min_eigenvalue(&gram)).unwrap_or(f64::NAN),
        });
    }
    Ok(gram)
}
