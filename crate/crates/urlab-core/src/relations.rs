//! The uncertainty-relation catalog: product, trace and determinant
//! inequalities for n observables, their two-state extensions, and the
//! Gram-matrix generator that produces principal/characteristic relations
//! of type (n, m).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrError};
use crate::hilbert::{commutator, fock_operators, Operator, QuantumState, StateForm};
use crate::matkit::{self, MinorIndex};
use crate::moments::{self, complex_mean};
use crate::transforms::symplectic_metric;
use crate::verdict::{Tols, UrVerdict};
use crate::{real, CMat, CVec, RMat, Scalar};

/// Catalog identifiers accepted by [`eval_catalog`], the scanner and the
/// transform-invariance machinery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UrName {
    HeisenbergKennard,
    RobertsonTwo,
    TraceTwo,
    SchrodingerTwo,
    RobertsonN,
    HadamardRobertson,
    TraceN,
    TraceEven,
    SymplecticInvariant { k: usize },
}

impl std::str::FromStr for UrName {
    type Err = UrError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "heisenberg_kennard" => UrName::HeisenbergKennard,
            "robertson_two" => UrName::RobertsonTwo,
            "trace_two" => UrName::TraceTwo,
            "schrodinger_two" => UrName::SchrodingerTwo,
            "robertson_n" => UrName::RobertsonN,
            "hadamard_robertson" => UrName::HadamardRobertson,
            "trace_n" => UrName::TraceN,
            "trace_even" => UrName::TraceEven,
            _ => {
                if let Some(k) = s.strip_prefix("symplectic_invariant_k") {
                    let k = k
                        .parse()
                        .map_err(|_| UrError::UnknownRelation(s.to_string()))?;
                    UrName::SymplecticInvariant { k }
                } else {
                    return Err(UrError::UnknownRelation(s.to_string()));
                }
            }
        })
    }
}

impl std::fmt::Display for UrName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UrName::HeisenbergKennard => write!(f, "heisenberg_kennard"),
            UrName::RobertsonTwo => write!(f, "robertson_two"),
            UrName::TraceTwo => write!(f, "trace_two"),
            UrName::SchrodingerTwo => write!(f, "schrodinger_two"),
            UrName::RobertsonN => write!(f, "robertson_n"),
            UrName::HadamardRobertson => write!(f, "hadamard_robertson"),
            UrName::TraceN => write!(f, "trace_n"),
            UrName::TraceEven => write!(f, "trace_even"),
            UrName::SymplecticInvariant { k } => write!(f, "symplectic_invariant_k{k}"),
        }
    }
}

/// |<[X, Y]>|, with the real residue checked against 1e-10: the mean of a
/// commutator of Hermitian operators must be purely imaginary, and a real
/// residue signals truncation damage at the point of use.
pub fn mean_commutator_modulus<T: Scalar>(
    x: &Operator<T>,
    y: &Operator<T>,
    state: &QuantumState<T>,
) -> Result<T> {
    let z = match &state.form {
        // <[X,Y]> = (Xψ)†(Yψ) - (Yψ)†(Xψ) for Hermitian X, Y: no O(n^3)
        // products on the pure path.
        StateForm::Pure(psi) if x.hermitian && y.hermitian => {
            if x.basis != y.basis || x.basis != state.basis {
                return Err(UrError::BasisMismatch);
            }
            let xs = &x.matrix * psi;
            let ys = &y.matrix * psi;
            xs.dotc(&ys) - ys.dotc(&xs)
        }
        _ => complex_mean(&commutator(x, y)?, state)?,
    };
    if z.re.abs() > real(1e-10) {
        return Err(UrError::ImaginaryResidue(
            nalgebra::try_convert(z.re.abs()).unwrap_or(f64::NAN),
        ));
    }
    Ok(z.im.abs())
}

fn single_mode_pq<T: Scalar>(state: &QuantumState<T>) -> Result<(Operator<T>, Operator<T>)> {
    match state.basis {
        crate::hilbert::BasisSpec::Fock { levels, modes: 1 } => {
            let ops = fock_operators(levels, 1)?;
            Ok((
                ops.momentum.into_iter().next().unwrap(),
                ops.position.into_iter().next().unwrap(),
            ))
        }
        _ => Err(UrError::InvalidParameter(
            "canonical relation needs a single-mode Fock state".into(),
        )),
    }
}

/// (Δp)²(Δq)² >= 1/4 for a single-mode Fock state.
pub fn heisenberg_kennard<T: Scalar>(
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let (p, q) = single_mode_pq(state)?;
    let vp = moments::covariance(&p, &p, state, tols)?;
    let vq = moments::covariance(&q, &q, state, tols)?;
    Ok(UrVerdict::new(
        "heisenberg_kennard",
        vp * vq,
        real(0.25),
        tols,
    ))
}

/// (ΔX)²(ΔY)² >= |<[X,Y]>|²/4.
pub fn robertson_two<T: Scalar>(
    x: &Operator<T>,
    y: &Operator<T>,
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let vx = moments::covariance(x, x, state, tols)?;
    let vy = moments::covariance(y, y, state, tols)?;
    let c = mean_commutator_modulus(x, y, state)?;
    Ok(UrVerdict::new(
        "robertson_two",
        vx * vy,
        c * c * real(0.25),
        tols,
    ))
}

/// (ΔX)² + (ΔY)² >= |<[X,Y]>|.
pub fn trace_two<T: Scalar>(
    x: &Operator<T>,
    y: &Operator<T>,
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let vx = moments::covariance(x, x, state, tols)?;
    let vy = moments::covariance(y, y, state, tols)?;
    let c = mean_commutator_modulus(x, y, state)?;
    Ok(UrVerdict::new("trace_two", vx + vy, c, tols))
}

/// (ΔX)²(ΔY)² - (ΔXY)² >= |<[X,Y]>|²/4.
pub fn schrodinger_two<T: Scalar>(
    x: &Operator<T>,
    y: &Operator<T>,
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let vx = moments::covariance(x, x, state, tols)?;
    let vy = moments::covariance(y, y, state, tols)?;
    let cov = moments::covariance(x, y, state, tols)?;
    let c = mean_commutator_modulus(x, y, state)?;
    Ok(UrVerdict::new(
        "schrodinger_two",
        vx * vy - cov * cov,
        c * c * real(0.25),
        tols,
    ))
}

fn bundle_for<T: Scalar>(
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<moments::MomentBundle<T>> {
    if observables.len() < 2 {
        return Err(UrError::InvalidParameter(
            "need at least two observables".into(),
        ));
    }
    moments::moment_bundle(observables, state, tols)
}

/// det σ >= det C for n observables.
pub fn robertson_n<T: Scalar>(
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let b = bundle_for(observables, state, tols)?;
    Ok(UrVerdict::new(
        "robertson_n",
        b.sigma.determinant(),
        b.commutators.determinant(),
        tols,
    ))
}

/// Π (ΔX_i)² >= det C; weaker than the determinant form by the Hadamard
/// inequality on σ.
pub fn hadamard_robertson<T: Scalar>(
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let b = bundle_for(observables, state, tols)?;
    let mut prod = T::one();
    for i in 0..b.dim() {
        prod *= b.sigma[(i, i)];
    }
    Ok(UrVerdict::new(
        "hadamard_robertson",
        prod,
        b.commutators.determinant(),
        tols,
    ))
}

/// Tr σ >= (1/(n-1)) Σ_{j>i} |<[X_i, X_j]>|, any n >= 2.
pub fn trace_n<T: Scalar>(
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let b = bundle_for(observables, state, tols)?;
    let n = observables.len();
    let mut sum = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            sum += mean_commutator_modulus(observables[i], observables[j], state)?;
        }
    }
    let rhs = sum / real((n - 1) as f64);
    Ok(UrVerdict::new("trace_n", b.sigma.trace(), rhs, tols))
}

/// Tr σ >= Σ_μ |<[X_μ, X_{m+μ}]>| for even n = 2m, pairing the first half
/// of the operator list with the second half in order.
pub fn trace_even<T: Scalar>(
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let n = observables.len();
    if n < 2 || n % 2 != 0 {
        return Err(UrError::BadOrder { r: 2, n });
    }
    let b = bundle_for(observables, state, tols)?;
    let m = n / 2;
    let mut sum = T::zero();
    for mu in 0..m {
        sum += mean_commutator_modulus(observables[mu], observables[m + mu], state)?;
    }
    Ok(UrVerdict::new("trace_even", b.sigma.trace(), sum, tols))
}

/// Tr[(iσJ)^{2k}] >= m / 2^{2k-1}, for σ of 2m canonical operators ordered
/// (p_1..p_m, q_1..q_m). The left side is real up to a checked residue.
pub fn symplectic_invariant_ur<T: Scalar>(
    sigma: &RMat<T>,
    k: usize,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let n = sigma.nrows();
    if n % 2 != 0 || n == 0 {
        return Err(UrError::BadOrder { r: 2, n });
    }
    if k < 1 {
        return Err(UrError::BadOrder { r: k, n });
    }
    let m = n / 2;
    let j = symplectic_metric::<T>(m);
    let sj = sigma * j;
    let i_sj = CMat::from_fn(n, n, |r, c| Complex::new(T::zero(), sj[(r, c)]));
    let mut power = CMat::identity(n, n);
    for _ in 0..2 * k {
        power = power * &i_sj;
    }
    let tr = power.trace();
    if tr.im.abs() > real(1e-10) {
        return Err(UrError::ImaginaryResidue(
            nalgebra::try_convert(tr.im.abs()).unwrap_or(f64::NAN),
        ));
    }
    let rhs = real::<T>(m as f64) / real::<T>(f64::powi(2.0, 2 * k as i32 - 1));
    Ok(UrVerdict::new(
        format!("symplectic_invariant_k{k}"),
        tr.re,
        rhs,
        tols,
    ))
}

struct CanonicalMoments<T: Scalar> {
    sd_q: T,
    sd_p: T,
    var_q: T,
    var_p: T,
    cov_qp: T,
}

fn canonical_moments<T: Scalar>(
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<CanonicalMoments<T>> {
    let (p, q) = single_mode_pq(state)?;
    let var_q = moments::covariance(&q, &q, state, tols)?;
    let var_p = moments::covariance(&p, &p, state, tols)?;
    let cov_qp = moments::covariance(&q, &p, state, tols)?;
    Ok(CanonicalMoments {
        sd_q: var_q.max(T::zero()).sqrt(),
        sd_p: var_p.max(T::zero()).sqrt(),
        var_q,
        var_p,
        cov_qp,
    })
}

/// The three state-entangled canonical relations for a pair of states:
///   Δ_ψq Δ_φp + Δ_φq Δ_ψp >= 1
///   (Δ_ψq)²(Δ_φp)² + (Δ_φq)²(Δ_ψp)² >= 1/2
///   the same sum minus 2|Δ_ψqp Δ_φqp| >= 1/2
pub fn two_state_suite<T: Scalar>(
    psi: &QuantumState<T>,
    phi: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<[UrVerdict<T>; 3]> {
    let a = canonical_moments(psi, tols)?;
    let b = canonical_moments(phi, tols)?;
    let v1 = UrVerdict::new(
        "two_state_trace",
        a.sd_q * b.sd_p + b.sd_q * a.sd_p,
        T::one(),
        tols,
    );
    let product_sum = a.var_q * b.var_p + b.var_q * a.var_p;
    let v2 = UrVerdict::new("two_state_heisenberg", product_sum, real(0.5), tols);
    let v3 = UrVerdict::new(
        "two_state_schrodinger",
        product_sum - real::<T>(2.0) * (a.cov_qp * b.cov_qp).abs(),
        real(0.5),
        tols,
    );
    Ok([v1, v2, v3])
}

/// Two-state extension of the Schrödinger relation for arbitrary X, Y:
///   (Δ_1X)²(Δ_2Y)² + (Δ_2X)²(Δ_1Y)² - 2|Δ_1XY Δ_2XY|
///     >= (1/2)|<[X,Y]>_1 <[X,Y]>_2|.
pub fn schrodinger_two_state<T: Scalar>(
    x: &Operator<T>,
    y: &Operator<T>,
    s1: &QuantumState<T>,
    s2: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let vx1 = moments::covariance(x, x, s1, tols)?;
    let vy1 = moments::covariance(y, y, s1, tols)?;
    let cov1 = moments::covariance(x, y, s1, tols)?;
    let vx2 = moments::covariance(x, x, s2, tols)?;
    let vy2 = moments::covariance(y, y, s2, tols)?;
    let cov2 = moments::covariance(x, y, s2, tols)?;
    let c1 = mean_commutator_modulus(x, y, s1)?;
    let c2 = mean_commutator_modulus(x, y, s2)?;
    let lhs = vx1 * vy2 + vx2 * vy1 - real::<T>(2.0) * (cov1 * cov2).abs();
    let rhs = real::<T>(0.5) * c1 * c2;
    Ok(UrVerdict::new("schrodinger_two_state", lhs, rhs, tols))
}

/// Which abstract inequality the Gram-matrix generator should apply.
#[derive(Debug, Clone)]
pub enum PrincipalKind {
    /// Principal-minor pair on one index set.
    Minor(MinorIndex),
    /// Characteristic-coefficient pair of the given order.
    Characteristic(usize),
    /// Trace inequalities, evaluated per state.
    Trace,
}

/// Build the physical Gram matrix H_μ for every state (first-order moments
/// at k = 1, k-th power moments otherwise) and wrap the abstract matrix
/// inequalities as uncertainty-relation verdicts of type (n, m).
pub fn generate_principal_ur<T: Scalar>(
    observables: &[&Operator<T>],
    states: &[&QuantumState<T>],
    moment_order: usize,
    kind: &PrincipalKind,
    tols: &Tols<T>,
) -> Result<Vec<UrVerdict<T>>> {
    if states.is_empty() {
        return Err(UrError::InvalidParameter("no states supplied".into()));
    }
    let n = observables.len();
    let m = states.len();
    let mut grams = Vec::with_capacity(m);
    for state in states {
        let g = if moment_order == 1 {
            moments::moment_bundle(observables, state, tols)?.gram
        } else {
            moments::gram_higher(observables, moment_order, state, tols)?
        };
        grams.push(g);
    }
    let tag = format!("(n={n},m={m},k={moment_order})");
    let rename = |v: UrVerdict<T>| {
        let name = format!("principal{tag} {}", v.name);
        UrVerdict { name, ..v }
    };
    let mut out = Vec::new();
    match kind {
        PrincipalKind::Minor(idx) => {
            let (v1, v2) = matkit::lemma_minor_check(&grams, idx, tols)?;
            out.push(rename(v1));
            out.push(rename(v2));
        }
        PrincipalKind::Characteristic(r) => {
            let (v1, v2) = matkit::characteristic_check(&grams, *r, tols)?;
            out.push(rename(v1));
            out.push(rename(v2));
        }
        PrincipalKind::Trace => {
            for g in &grams {
                let (v3, v4) = matkit::lemma_trace_check(g, tols)?;
                out.push(rename(v3));
                if let Some(v4) = v4 {
                    out.push(rename(v4));
                }
            }
        }
    }
    Ok(out)
}

/// Report for the overlap-based single-observable bound derived from
/// det G >= 0 of the three vectors {φ, ψ<ψ|φ>, ψ_X<ψ_X|φ>}.
#[derive(Debug, Clone)]
pub struct FlemingReport<T: Scalar> {
    /// <χ|χ>, the determinant route; non-negative up to roundoff.
    pub gram_det: T,
    /// The bound as printed: Δ_ψX >= f[X,ψ,φ] (first power on the left).
    pub bound_as_printed: UrVerdict<T>,
    /// Product form lhs: Δ_ψX Δ_φX.
    pub product_lhs: T,
    /// Product form rhs: f[X,ψ,φ] f[X,φ,ψ].
    pub product_rhs: T,
    /// True when the printed form fails while <χ|χ> is still non-negative.
    pub printed_form_violated: bool,
}

fn pure_amplitudes<T: Scalar>(state: &QuantumState<T>) -> Result<&CVec<T>> {
    match &state.form {
        StateForm::Pure(psi) => Ok(psi),
        StateForm::Mixed(_) => Err(UrError::InvalidParameter(
            "overlap bound needs pure states".into(),
        )),
    }
}

fn fleming_f<T: Scalar>(
    x: &Operator<T>,
    psi: &QuantumState<T>,
    phi: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<T> {
    let psi_v = pure_amplitudes(psi)?;
    let phi_v = pure_amplitudes(phi)?;
    let overlap_sq = phi_v.dotc(psi_v).norm_sqr();
    if overlap_sq >= T::one() - real(1e-12) {
        return Err(UrError::InvalidParameter("states are parallel".into()));
    }
    let mx = moments::mean(x, psi, tols)?;
    let shifted = &x.matrix * psi_v - psi_v * Complex::new(mx, T::zero());
    let numerator = phi_v.dotc(&shifted).norm_sqr();
    Ok(numerator / (T::one() - overlap_sq).sqrt())
}

/// Evaluate the overlap bound: builds χ explicitly, reports <χ|χ>, the
/// printed inequality and the symmetrized product form.
pub fn fleming_bound<T: Scalar>(
    x: &Operator<T>,
    psi: &QuantumState<T>,
    phi: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<FlemingReport<T>> {
    let psi_v = pure_amplitudes(psi)?;
    let phi_v = pure_amplitudes(phi)?;
    if x.basis != psi.basis || psi.basis != phi.basis {
        return Err(UrError::BasisMismatch);
    }
    let sd_psi = moments::covariance(x, x, psi, tols)?.max(T::zero()).sqrt();
    if sd_psi <= real(1e-12) {
        return Err(UrError::InvalidParameter(
            "Δ_ψX vanishes; bound undefined".into(),
        ));
    }
    let sd_phi = moments::covariance(x, x, phi, tols)?.max(T::zero()).sqrt();

    let mx = moments::mean(x, psi, tols)?;
    let psi_x =
        (&x.matrix * psi_v - psi_v * Complex::new(mx, T::zero())) / Complex::new(sd_psi, T::zero());
    let chi = phi_v - psi_v * psi_v.dotc(phi_v) - &psi_x * psi_x.dotc(phi_v);
    let gram_det = chi.norm_squared();

    let f_pf = fleming_f(x, psi, phi, tols)?;
    let f_fp = fleming_f(x, phi, psi, tols)?;
    let printed = UrVerdict::new("fleming_printed", sd_psi, f_pf, tols);
    let violated = !printed.holds(tols.floor) && gram_det >= -real::<T>(1e-12);
    Ok(FlemingReport {
        gram_det,
        bound_as_printed: printed,
        product_lhs: sd_psi * sd_phi,
        product_rhs: f_pf * f_fp,
        printed_form_violated: violated,
    })
}

/// Evaluate a named catalog relation on an observable list and one state.
///
/// `HeisenbergKennard` ignores the observables (it builds p, q itself);
/// `SymplecticInvariant` expects the canonical ordering (p_1..p_m, q_1..q_m).
pub fn eval_catalog<T: Scalar>(
    name: &UrName,
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    tols: &Tols<T>,
) -> Result<UrVerdict<T>> {
    let two = |obs: &[&Operator<T>]| -> Result<(usize, usize)> {
        if obs.len() != 2 {
            return Err(UrError::InvalidParameter(format!(
                "relation needs exactly 2 observables, got {}",
                obs.len()
            )));
        }
        Ok((0, 1))
    };
    match name {
        UrName::HeisenbergKennard => heisenberg_kennard(state, tols),
        UrName::RobertsonTwo => {
            two(observables)?;
            robertson_two(observables[0], observables[1], state, tols)
        }
        UrName::TraceTwo => {
            two(observables)?;
            trace_two(observables[0], observables[1], state, tols)
        }
        UrName::SchrodingerTwo => {
            two(observables)?;
            schrodinger_two(observables[0], observables[1], state, tols)
        }
        UrName::RobertsonN => robertson_n(observables, state, tols),
        UrName::HadamardRobertson => hadamard_robertson(observables, state, tols),
        UrName::TraceN => trace_n(observables, state, tols),
        UrName::TraceEven => trace_even(observables, state, tols),
        UrName::SymplecticInvariant { k } => {
            let b = bundle_for(observables, state, tols)?;
            symplectic_invariant_ur(&b.sigma, *k, tols)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{
        coherent_state, fock_state, multimode_vacuum, random_pure, spin_operators, squeezed_state,
        BasisSpec,
    };
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const N: usize = 30;

    fn vacuum() -> QuantumState<f64> {
        fock_state(0, N).unwrap()
    }

    fn pq() -> (Operator<f64>, Operator<f64>) {
        let ops = fock_operators::<f64>(N, 1).unwrap();
        (
            ops.momentum.into_iter().next().unwrap(),
            ops.position.into_iter().next().unwrap(),
        )
    }

    fn tols() -> Tols<f64> {
        Tols::default()
    }

    #[test]
    fn vacuum_saturates_canonical_pair_relations() {
        let vac = vacuum();
        let (p, q) = pq();
        let t = tols();
        let hk = heisenberg_kennard(&vac, &t).unwrap();
        assert_relative_eq!(hk.lhs, 0.25, epsilon = 1e-12);
        assert!(hk.saturated);
        let rob = robertson_two(&p, &q, &vac, &t).unwrap();
        assert_relative_eq!(rob.rhs, 0.25, epsilon = 1e-12);
        assert!(rob.saturated);
        let tr = trace_two(&p, &q, &vac, &t).unwrap();
        assert_relative_eq!(tr.lhs, 1.0, epsilon = 1e-12);
        assert!(tr.saturated);
        let sch = schrodinger_two(&p, &q, &vac, &t).unwrap();
        assert!(sch.saturated);
    }

    #[test]
    fn fock_one_has_margin_two_in_trace_form() {
        let one = fock_state(1, N).unwrap();
        let (p, q) = pq();
        let tr = trace_two(&p, &q, &one, &tols()).unwrap();
        // Δp² = Δq² = 3/2 for |1>.
        assert_relative_eq!(tr.lhs, 3.0, epsilon = 1e-12);
        assert_relative_eq!(tr.margin, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_trace_margin_is_cosh_minus_one() {
        let r = 0.7;
        let st = squeezed_state(
            num_complex::Complex::new(0.0, 0.0),
            num_complex::Complex::new(r, 0.0),
            60,
            1e-12,
        )
        .unwrap();
        let ops = fock_operators::<f64>(60, 1).unwrap();
        let tr = trace_two(&ops.momentum[0], &ops.position[0], &st, &tols()).unwrap();
        assert_relative_eq!(tr.margin, (2.0 * r).cosh() - 1.0, epsilon = 1e-9);
        let hk = heisenberg_kennard(&st, &tols()).unwrap();
        assert!(hk.saturated);
    }

    #[test]
    fn determinant_forms_on_vacuum() {
        let vac = vacuum();
        let (p, q) = pq();
        let t = tols();
        let obs = [&p, &q];
        let rn = robertson_n(&obs, &vac, &t).unwrap();
        assert_relative_eq!(rn.lhs, 0.25, epsilon = 1e-12);
        assert_relative_eq!(rn.rhs, 0.25, epsilon = 1e-12);
        assert!(rn.saturated);
        let hr = hadamard_robertson(&obs, &vac, &t).unwrap();
        assert!(hr.saturated);
        let tn = trace_n(&obs, &vac, &t).unwrap();
        assert_relative_eq!(tn.lhs, 1.0, epsilon = 1e-12);
        assert_relative_eq!(tn.rhs, 1.0, epsilon = 1e-12);
        let te = trace_even(&obs, &vac, &t).unwrap();
        assert!(te.saturated);
    }

    #[test]
    fn spin_half_oracle() {
        let [j1, j2, j3] = spin_operators::<f64>(1).unwrap();
        let basis = BasisSpec::spin(1).unwrap();
        let up = QuantumState::pure(
            basis,
            crate::CVec::from_vec(vec![
                num_complex::Complex::new(1.0, 0.0),
                num_complex::Complex::new(0.0, 0.0),
            ]),
        )
        .unwrap();
        let t = Tols::ungated();
        let rob = robertson_two(&j1, &j2, &up, &t).unwrap();
        assert_relative_eq!(rob.lhs, 1.0 / 16.0, epsilon = 1e-12);
        assert_relative_eq!(rob.rhs, 1.0 / 16.0, epsilon = 1e-12);
        assert!(rob.saturated);
        let tn = trace_n(&[&j1, &j2, &j3], &up, &t).unwrap();
        assert_relative_eq!(tn.lhs, 0.5, epsilon = 1e-12);
        assert_relative_eq!(tn.rhs, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn symplectic_invariants_saturate_on_vacuum() {
        let sigma = crate::RMat::<f64>::identity(2, 2) * 0.5;
        let t = tols();
        let k1 = symplectic_invariant_ur(&sigma, 1, &t).unwrap();
        assert_relative_eq!(k1.lhs, 0.5, epsilon = 1e-12);
        assert!(k1.saturated);
        let k2 = symplectic_invariant_ur(&sigma, 2, &t).unwrap();
        assert_relative_eq!(k2.lhs, 0.125, epsilon = 1e-12);
        assert_relative_eq!(k2.rhs, 0.125, epsilon = 1e-12);
        assert!(k2.saturated);
    }

    #[test]
    fn symplectic_invariant_two_modes_holds() {
        let vac = multimode_vacuum::<f64>(8, 2).unwrap();
        let ops = fock_operators::<f64>(8, 2).unwrap();
        let canon = ops.canonical_ordered();
        let refs: Vec<&Operator<f64>> = canon.iter().collect();
        let t = tols();
        let b = moments::moment_bundle(&refs, &vac, &t).unwrap();
        let v = symplectic_invariant_ur(&b.sigma, 1, &t).unwrap();
        assert_relative_eq!(v.lhs, 1.0, epsilon = 1e-12);
        assert_relative_eq!(v.rhs, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn symplectic_invariant_rejects_odd_dimension() {
        let sigma = crate::RMat::<f64>::identity(3, 3);
        assert!(matches!(
            symplectic_invariant_ur(&sigma, 1, &tols()),
            Err(UrError::BadOrder { .. })
        ));
    }

    #[test]
    fn two_state_suite_saturates_on_identical_vacua() {
        let vac = vacuum();
        let [v1, v2, v3] = two_state_suite(&vac, &vac, &tols()).unwrap();
        assert_relative_eq!(v1.lhs, 1.0, epsilon = 1e-12);
        assert!(v1.saturated);
        assert_relative_eq!(v2.lhs, 0.5, epsilon = 1e-12);
        assert!(v2.saturated && v3.saturated);
    }

    #[test]
    fn two_state_trace_on_vacuum_and_squeezed_is_cosh() {
        let r = 0.6;
        let vac = fock_state(0, 60).unwrap();
        let sq = squeezed_state(
            num_complex::Complex::new(0.0, 0.0),
            num_complex::Complex::new(r, 0.0),
            60,
            1e-12,
        )
        .unwrap();
        let [v1, v2, _] = two_state_suite(&vac, &sq, &tols()).unwrap();
        assert_relative_eq!(v1.lhs, r.cosh(), epsilon = 1e-9);
        assert_relative_eq!(v2.lhs, (2.0 * r).cosh() / 2.0, epsilon = 1e-9);
        assert!(v1.holds(1e-10) && v2.holds(1e-10));
    }

    #[test]
    fn two_state_margins_double_single_state_margins() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let basis = BasisSpec::fock(16, 1).unwrap();
        let t = Tols::ungated();
        let (p, q) = {
            let ops = fock_operators::<f64>(16, 1).unwrap();
            (
                ops.momentum.into_iter().next().unwrap(),
                ops.position.into_iter().next().unwrap(),
            )
        };
        for _ in 0..10 {
            let psi = random_pure::<f64, _>(&basis, &mut rng);
            let [v1, v2, v3] = two_state_suite(&psi, &psi, &t).unwrap();
            let hk = heisenberg_kennard(&psi, &t).unwrap();
            let vq = moments::covariance(&q, &q, &psi, &t).unwrap();
            let vp = moments::covariance(&p, &p, &psi, &t).unwrap();
            let cov = moments::covariance(&q, &p, &psi, &t).unwrap();
            assert_relative_eq!(v1.margin, 2.0 * ((vq * vp).sqrt() - 0.5), epsilon = 1e-10);
            assert_relative_eq!(v2.margin, 2.0 * hk.margin, epsilon = 1e-10);
            // Same doubling as v2 once the covariance term is subtracted; the
            // Schrödinger catalog entry is not the reference here because its
            // right side uses the measured (truncated) commutator.
            assert_relative_eq!(
                v3.margin,
                2.0 * (vq * vp - cov * cov) - 0.5,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn schrodinger_two_state_saturates_on_vacua() {
        let vac = vacuum();
        let (p, q) = pq();
        let v = schrodinger_two_state(&p, &q, &vac, &vac, &tols()).unwrap();
        assert_relative_eq!(v.lhs, 0.5, epsilon = 1e-12);
        assert!(v.saturated);
    }

    #[test]
    fn random_states_respect_whole_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let basis = BasisSpec::fock(16, 1).unwrap();
        let t = Tols::ungated();
        let ops = fock_operators::<f64>(16, 1).unwrap();
        let obs = [&ops.momentum[0], &ops.position[0]];
        let names = [
            UrName::HeisenbergKennard,
            UrName::RobertsonTwo,
            UrName::TraceTwo,
            UrName::SchrodingerTwo,
            UrName::RobertsonN,
            UrName::HadamardRobertson,
            UrName::TraceN,
            UrName::TraceEven,
            UrName::SymplecticInvariant { k: 1 },
            UrName::SymplecticInvariant { k: 2 },
        ];
        for _ in 0..20 {
            let psi = random_pure::<f64, _>(&basis, &mut rng);
            for name in &names {
                let v = eval_catalog(name, &obs, &psi, &t).unwrap();
                assert!(v.holds(1e-9), "{} margin {}", v.name, v.margin);
            }
            // Hierarchy orderings at n = 2.
            let rob = robertson_two(obs[0], obs[1], &psi, &t).unwrap();
            let sch = schrodinger_two(obs[0], obs[1], &psi, &t).unwrap();
            let rn = robertson_n(&obs, &psi, &t).unwrap();
            let hr = hadamard_robertson(&obs, &psi, &t).unwrap();
            assert!(sch.margin <= rob.margin + 1e-12);
            assert_relative_eq!(sch.margin, rn.margin, epsilon = 1e-10);
            assert!(hr.lhs + 1e-12 >= rn.lhs);
            // Pair-sum identity for the even trace relation.
            let tr2 = trace_two(obs[0], obs[1], &psi, &t).unwrap();
            let te = trace_even(&obs, &psi, &t).unwrap();
            assert_relative_eq!(te.margin, tr2.margin, epsilon = 1e-10);
        }
    }

    #[test]
    fn mixed_states_respect_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let basis = BasisSpec::fock(12, 1).unwrap();
        let t = Tols::ungated();
        let ops = fock_operators::<f64>(12, 1).unwrap();
        let obs = [&ops.momentum[0], &ops.position[0]];
        for _ in 0..10 {
            let rho = crate::hilbert::random_mixed::<f64, _>(&basis, 3, &mut rng).unwrap();
            for name in [UrName::RobertsonTwo, UrName::SchrodingerTwo, UrName::TraceN] {
                let v = eval_catalog(&name, &obs, &rho, &t).unwrap();
                assert!(v.holds(1e-9), "{} margin {}", v.name, v.margin);
            }
        }
    }

    #[test]
    fn trace_even_two_modes_sums_per_mode_margins() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let basis = BasisSpec::fock(6, 2).unwrap();
        let ops = fock_operators::<f64>(6, 2).unwrap();
        let canon = ops.canonical_ordered();
        let refs: Vec<&Operator<f64>> = canon.iter().collect();
        let t = Tols::ungated();
        for _ in 0..5 {
            let psi = random_pure::<f64, _>(&basis, &mut rng);
            let te = trace_even(&refs, &psi, &t).unwrap();
            let m0 = trace_two(&ops.momentum[0], &ops.position[0], &psi, &t)
                .unwrap()
                .margin;
            let m1 = trace_two(&ops.momentum[1], &ops.position[1], &psi, &t)
                .unwrap()
                .margin;
            assert_relative_eq!(te.margin, m0 + m1, epsilon = 1e-10);
            let tn = trace_n(&refs, &psi, &t).unwrap();
            assert!(te.rhs >= tn.rhs - 1e-12, "even pairing is the stronger rhs");
        }
    }

    #[test]
    fn principal_generator_on_state_pairs() {
        let vac = vacuum();
        let coh = coherent_state(num_complex::Complex::new(0.8, -0.3), N, 1e-12).unwrap();
        let (p, q) = pq();
        let obs = [&p, &q];
        let states = [&vac, &coh];
        let t = tols();
        let idx = MinorIndex::full(2);
        let vs =
            generate_principal_ur(&obs, &states, 1, &PrincipalKind::Minor(idx), &t).unwrap();
        assert_eq!(vs.len(), 2);
        for v in &vs {
            assert!(v.name.starts_with("principal(n=2,m=2,k=1)"), "{}", v.name);
            assert!(v.holds(1e-10), "{} margin {}", v.name, v.margin);
        }
        let vs =
            generate_principal_ur(&obs, &states, 2, &PrincipalKind::Characteristic(2), &t).unwrap();
        for v in &vs {
            assert!(v.holds(1e-10), "{} margin {}", v.name, v.margin);
        }
        let vs = generate_principal_ur(&obs, &states, 1, &PrincipalKind::Trace, &t).unwrap();
        assert_eq!(vs.len(), 4);
        for v in &vs {
            assert!(v.holds(1e-10), "{} margin {}", v.name, v.margin);
        }
    }

    #[test]
    fn fleming_orthogonal_states_oracle() {
        let vac = vacuum();
        let one = fock_state(1, N).unwrap();
        let ops = fock_operators::<f64>(N, 1).unwrap();
        let rep = fleming_bound(&ops.position[0], &vac, &one, &tols()).unwrap();
        assert_relative_eq!(rep.bound_as_printed.lhs, 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(rep.bound_as_printed.rhs, 0.5, epsilon = 1e-12);
        assert!(rep.bound_as_printed.holds(1e-10));
        assert!(!rep.printed_form_violated);
        assert!(rep.gram_det >= -1e-12);
    }

    #[test]
    fn fleming_printed_form_can_fail_while_gram_stays_psd() {
        let vac = vacuum();
        let ops = fock_operators::<f64>(N, 1).unwrap();
        let x = Operator::hermitian(
            vac.basis.clone(),
            &ops.position[0].matrix * num_complex::Complex::new(3.0, 0.0),
        )
        .unwrap();
        let mut amp = crate::CVec::<f64>::zeros(N);
        amp[0] = num_complex::Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amp[1] = num_complex::Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let phi = QuantumState::pure(vac.basis.clone(), amp).unwrap();
        let rep = fleming_bound(&x, &vac, &phi, &tols()).unwrap();
        assert!(rep.printed_form_violated);
        assert!(rep.gram_det >= -1e-12);
        // The symmetrized product form still holds here.
        assert!(rep.product_lhs >= rep.product_rhs - 1e-10);
    }

    #[test]
    fn name_round_trip() {
        for s in [
            "heisenberg_kennard",
            "robertson_two",
            "trace_two",
            "schrodinger_two",
            "robertson_n",
            "hadamard_robertson",
            "trace_n",
            "trace_even",
            "symplectic_invariant_k3",
        ] {
            let name: UrName = s.parse().unwrap();
            assert_eq!(name.to_string(), s);
        }
        assert!("no_such_relation".parse::<UrName>().is_err());
    }

    #[test]
    fn eval_catalog_arity_errors() {
        let vac = vacuum();
        let (p, _) = pq();
        let t = tols();
        assert!(eval_catalog(&UrName::RobertsonTwo, &[&p], &vac, &t).is_err());
        assert!(trace_even(&[&p], &vac, &t).is_err());
    }
}
