//! Linear recombinations X'_i = Σ λ_ij X_j of an observable set, the
//! induced moment-matrix transforms, and invariance reports for the
//! catalog relations under GL(n), O(n) and Sp(2m) maps.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, UrError};
use crate::hilbert::{Operator, QuantumState};
use crate::relations::{eval_catalog, UrName};
use crate::verdict::{Tols, UrVerdict};
use crate::{real, CMat, RMat, Scalar};

/// 2m x 2m symplectic metric for the ordering (p_1..p_m, q_1..q_m):
/// J[ν, m+ν] = 1, J[m+ν, ν] = -1.
pub fn symplectic_metric<T: Scalar>(half: usize) -> RMat<T> {
    let n = 2 * half;
    let mut j = RMat::zeros(n, n);
    for nu in 0..half {
        j[(nu, half + nu)] = T::one();
        j[(half + nu, nu)] = -T::one();
    }
    j
}

/// A real linear map on an observable list, with its classification
/// defects computed once at construction.
#[derive(Debug, Clone)]
pub struct LinearMap<T: Scalar> {
    pub lambda: RMat<T>,
    pub det: T,
    /// max |ΛΛᵀ - I|.
    pub orthogonal_defect: T,
    /// max |ΛJΛᵀ - J|; `None` for odd dimension.
    pub symplectic_defect: Option<T>,
}

fn max_abs<T: Scalar>(m: &RMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

impl<T: Scalar> LinearMap<T> {
    pub fn new(lambda: RMat<T>) -> Result<Self> {
        let n = lambda.nrows();
        if n == 0 || lambda.ncols() != n {
            return Err(UrError::NonSquare {
                rows: lambda.nrows(),
                cols: lambda.ncols(),
            });
        }
        let det = lambda.determinant();
        let orthogonal_defect = max_abs(&(&lambda * lambda.transpose() - RMat::identity(n, n)));
        let symplectic_defect = if n % 2 == 0 {
            let j = symplectic_metric::<T>(n / 2);
            Some(max_abs(&(&lambda * &j * lambda.transpose() - j)))
        } else {
            None
        };
        Ok(LinearMap {
            lambda,
            det,
            orthogonal_defect,
            symplectic_defect,
        })
    }

    pub fn dim(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn is_invertible(&self) -> bool {
        self.det.abs() > real(1e-10)
    }

    pub fn is_orthogonal(&self, tol: T) -> bool {
        self.orthogonal_defect <= tol
    }

    pub fn is_symplectic(&self, tol: T) -> bool {
        matches!(self.symplectic_defect, Some(d) if d <= tol)
    }
}

/// Rotation in a (p, q) pair: p' = p cosθ + q sinθ, q' = -p sinθ + q cosθ.
/// Orthogonal and symplectic at once.
pub fn rotation2<T: Scalar>(theta: T) -> LinearMap<T> {
    let (s, c) = (theta.sin(), theta.cos());
    let lambda = RMat::from_row_slice(2, 2, &[c, s, -s, c]);
    LinearMap::new(lambda).expect("2x2 rotation is square")
}

/// X'_i = Σ_j λ_ij X_j. Real coefficients preserve Hermiticity, so the
/// outputs keep the `hermitian` flag when all inputs carry it.
pub fn apply_linear<T: Scalar>(
    map: &LinearMap<T>,
    observables: &[&Operator<T>],
) -> Result<Vec<Operator<T>>> {
    let n = observables.len();
    if n != map.dim() {
        return Err(UrError::DimensionMismatch {
            left: map.dim(),
            right: n,
        });
    }
    let basis = observables[0].basis.clone();
    let d = basis.dim();
    let all_hermitian = observables.iter().all(|x| x.hermitian);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = CMat::zeros(d, d);
        for (j, x) in observables.iter().enumerate() {
            if x.basis != basis {
                return Err(UrError::BasisMismatch);
            }
            acc += &x.matrix * Complex::new(map.lambda[(i, j)], T::zero());
        }
        let op = if all_hermitian {
            Operator::hermitian(basis.clone(), acc)?
        } else {
            Operator::general(basis.clone(), acc)?
        };
        out.push(op);
    }
    Ok(out)
}

/// σ' = Λ σ Λᵀ, the induced action on any of the real moment matrices.
pub fn transform_sigma<T: Scalar>(map: &LinearMap<T>, sigma: &RMat<T>) -> Result<RMat<T>> {
    if sigma.nrows() != map.dim() || sigma.ncols() != map.dim() {
        return Err(UrError::DimensionMismatch {
            left: map.dim(),
            right: sigma.nrows(),
        });
    }
    Ok(&map.lambda * sigma * map.lambda.transpose())
}

/// Which group to draw a random map from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Gaussian entries, rejected while |det| <= 1e-6.
    Gl,
    /// Q factor of a Gaussian matrix.
    Orthogonal,
    /// exp(J S) with S symmetric Gaussian; needs even dimension.
    Symplectic,
}

fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> RMat<T> {
    RMat::from_fn(n, n, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        real(x * scale)
    })
}

/// Draw one random map of the given kind.
pub fn random_map<T: Scalar, R: Rng + ?Sized>(
    kind: MapKind,
    n: usize,
    rng: &mut R,
) -> Result<LinearMap<T>> {
    if n == 0 {
        return Err(UrError::InvalidParameter("map dimension 0".into()));
    }
    match kind {
        MapKind::Gl => loop {
            let m = gaussian_matrix::<T, _>(n, 1.0, rng);
            let map = LinearMap::new(m)?;
            if map.det.abs() > real(1e-6) {
                return Ok(map);
            }
        },
        MapKind::Orthogonal => {
            let m = gaussian_matrix::<T, _>(n, 1.0, rng);
            let q = m.qr().q();
            LinearMap::new(q)
        }
        MapKind::Symplectic => {
            if n % 2 != 0 {
                return Err(UrError::BadOrder { r: 2, n });
            }
            // Modest scale keeps exp(JS) well conditioned.
            let s_raw = gaussian_matrix::<T, _>(n, 0.3, rng);
            let s = (&s_raw + s_raw.transpose()) * real::<T>(0.5);
            let generator = symplectic_metric::<T>(n / 2) * s;
            LinearMap::new(generator.exp())
        }
    }
}

/// One map's before/after comparison inside an [`InvarianceReport`].
#[derive(Debug, Clone)]
pub struct InvarianceEntry<T: Scalar> {
    pub map_det: T,
    pub orthogonal: bool,
    pub symplectic: bool,
    pub after: UrVerdict<T>,
    /// Both margins non-negative (at the floor) or both negative.
    pub margin_sign_preserved: bool,
    /// |lhs' - lhs|; meaningful for invariant quantities only.
    pub lhs_delta: T,
    /// When the reference verdict is saturated: |margin'| within 1e-7.
    pub saturation_preserved: Option<bool>,
}

/// How a catalog relation behaves under a set of linear maps on one state.
#[derive(Debug, Clone)]
pub struct InvarianceReport<T: Scalar> {
    pub ur: String,
    pub before: UrVerdict<T>,
    pub entries: Vec<InvarianceEntry<T>>,
}

/// Evaluate `ur` on the original observables and on each transformed set.
pub fn invariance_report<T: Scalar>(
    ur: &UrName,
    observables: &[&Operator<T>],
    state: &QuantumState<T>,
    maps: &[LinearMap<T>],
    tols: &Tols<T>,
) -> Result<InvarianceReport<T>> {
    let before = eval_catalog(ur, observables, state, tols)?;
    let class_tol = real::<T>(1e-8);
    let mut entries = Vec::with_capacity(maps.len());
    for map in maps {
        let transformed = apply_linear(map, observables)?;
        let refs: Vec<&Operator<T>> = transformed.iter().collect();
        let after = eval_catalog(ur, &refs, state, tols)?;
        let margin_sign_preserved = before.holds(tols.floor) == after.holds(tols.floor);
        let saturation_preserved = if before.saturated {
            Some(after.margin.abs() <= real(1e-7))
        } else {
            None
        };
        entries.push(InvarianceEntry {
            map_det: map.det,
            orthogonal: map.is_orthogonal(class_tol),
            symplectic: map.is_symplectic(class_tol),
            after: after.clone(),
            margin_sign_preserved,
            lhs_delta: (after.lhs - before.lhs).abs(),
            saturation_preserved,
        });
    }
    Ok(InvarianceReport {
        ur: ur.to_string(),
        before,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_operators, fock_state, random_pure, BasisSpec};
    use crate::moments;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pq(levels: usize) -> Vec<Operator<f64>> {
        let ops = fock_operators::<f64>(levels, 1).unwrap();
        ops.canonical_ordered()
    }

    #[test]
    fn metric_squares_to_minus_identity() {
        for m in 1..4 {
            let j = symplectic_metric::<f64>(m);
            let jj = &j * &j;
            assert_relative_eq!(
                (jj + RMat::<f64>::identity(2 * m, 2 * m)).norm(),
                0.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn rotation_is_orthogonal_and_symplectic() {
        let rot = rotation2(0.37_f64);
        assert_relative_eq!(rot.det, 1.0, epsilon = 1e-14);
        assert!(rot.is_orthogonal(1e-12));
        assert!(rot.is_symplectic(1e-12));
        assert!(rot.is_invertible());
    }

    #[test]
    fn shear_is_symplectic_not_orthogonal() {
        let map = LinearMap::new(RMat::from_row_slice(2, 2, &[1.0, 0.7, 0.0, 1.0])).unwrap();
        assert!(map.is_symplectic(1e-12));
        assert!(!map.is_orthogonal(1e-3));
    }

    #[test]
    fn sigma_transform_matches_transformed_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let basis = BasisSpec::fock(14, 1).unwrap();
        let obs = pq(14);
        let refs: Vec<&Operator<f64>> = obs.iter().collect();
        let t = Tols::ungated();
        for kind in [MapKind::Gl, MapKind::Orthogonal, MapKind::Symplectic] {
            let map = random_map::<f64, _>(kind, 2, &mut rng).unwrap();
            let psi = random_pure::<f64, _>(&basis, &mut rng);
            let b = moments::moment_bundle(&refs, &psi, &t).unwrap();
            let direct = transform_sigma(&map, &b.sigma).unwrap();
            let transformed = apply_linear(&map, &refs).unwrap();
            let trefs: Vec<&Operator<f64>> = transformed.iter().collect();
            let b2 = moments::moment_bundle(&trefs, &psi, &t).unwrap();
            assert_relative_eq!((direct - &b2.sigma).norm(), 0.0, epsilon = 1e-9);
            // C transforms the same way.
            let direct_c = transform_sigma(&map, &b.commutators).unwrap();
            assert_relative_eq!((direct_c - &b2.commutators).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn random_maps_classify_as_requested() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let gl = random_map::<f64, _>(MapKind::Gl, 3, &mut rng).unwrap();
            assert!(gl.is_invertible());
            let or = random_map::<f64, _>(MapKind::Orthogonal, 3, &mut rng).unwrap();
            assert!(or.is_orthogonal(1e-10));
            let sp = random_map::<f64, _>(MapKind::Symplectic, 4, &mut rng).unwrap();
            assert!(sp.is_symplectic(1e-8), "defect {:?}", sp.symplectic_defect);
        }
        assert!(random_map::<f64, _>(MapKind::Symplectic, 3, &mut rng).is_err());
    }

    #[test]
    fn hermitian_flag_survives_real_recombination() {
        let obs = pq(10);
        let refs: Vec<&Operator<f64>> = obs.iter().collect();
        let map = rotation2(1.1);
        let out = apply_linear(&map, &refs).unwrap();
        assert!(out.iter().all(|x| x.hermitian));
    }

    #[test]
    fn trace_relation_value_invariant_under_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let basis = BasisSpec::fock(14, 1).unwrap();
        let obs = pq(14);
        let refs: Vec<&Operator<f64>> = obs.iter().collect();
        let psi = random_pure::<f64, _>(&basis, &mut rng);
        let t = Tols::ungated();
        let maps: Vec<LinearMap<f64>> = (0..5)
            .map(|_| random_map::<f64, _>(MapKind::Orthogonal, 2, &mut rng).unwrap())
            .collect();
        let rep = invariance_report(&UrName::TraceN, &refs, &psi, &maps, &t).unwrap();
        for e in &rep.entries {
            assert!(e.orthogonal);
            assert!(e.lhs_delta < 1e-9, "Tr σ moved by {}", e.lhs_delta);
            assert!(e.margin_sign_preserved);
        }
    }

    #[test]
    fn symplectic_invariant_value_fixed_under_symplectic_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let vac = fock_state(0, 20).unwrap();
        let obs = pq(20);
        let refs: Vec<&Operator<f64>> = obs.iter().collect();
        let t = Tols::ungated();
        let maps: Vec<LinearMap<f64>> = (0..5)
            .map(|_| random_map::<f64, _>(MapKind::Symplectic, 2, &mut rng).unwrap())
            .collect();
        for k in [1usize, 2] {
            let rep = invariance_report(
                &UrName::SymplecticInvariant { k },
                &refs,
                &vac,
                &maps,
                &t,
            )
            .unwrap();
            assert!(rep.before.saturated);
            for e in &rep.entries {
                assert!(e.symplectic);
                assert!(e.lhs_delta < 1e-8, "invariant moved by {}", e.lhs_delta);
                assert_eq!(e.saturation_preserved, Some(true));
            }
        }
    }

    #[test]
    fn determinant_relation_sign_preserved_under_gl() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let basis = BasisSpec::fock(12, 1).unwrap();
        let obs = pq(12);
        let refs: Vec<&Operator<f64>> = obs.iter().collect();
        let t = Tols::ungated();
        let maps: Vec<LinearMap<f64>> = (0..8)
            .map(|_| random_map::<f64, _>(MapKind::Gl, 2, &mut rng).unwrap())
            .collect();
        for _ in 0..3 {
            let psi = random_pure::<f64, _>(&basis, &mut rng);
            let rep = invariance_report(&UrName::RobertsonN, &refs, &psi, &maps, &t).unwrap();
            assert!(rep.before.holds(1e-10));
            for e in &rep.entries {
                assert!(e.margin_sign_preserved);
                assert!(e.after.holds(1e-9));
            }
        }
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let obs = pq(8);
        let refs: Vec<&Operator<f64>> = obs.iter().collect();
        let map3 = LinearMap::new(RMat::<f64>::identity(3, 3)).unwrap();
        assert!(apply_linear(&map3, &refs).is_err());
        assert!(transform_sigma(&map3, &RMat::<f64>::identity(2, 2)).is_err());
        assert!(LinearMap::new(RMat::<f64>::zeros(2, 3)).is_err());
    }
}
