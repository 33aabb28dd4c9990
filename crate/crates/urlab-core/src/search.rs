//! Saturation scanning over named state families and derivative-free
//! minimization of relation margins over parametrized states.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrError};
use crate::hilbert::{
    coherent_state, spin_coherent_state, squeezed_state, BasisSpec, Operator, QuantumState,
};
use crate::relations::{eval_catalog, UrName};
use crate::verdict::{Tols, UrVerdict};
use crate::{real, CVec, Scalar};

/// Uniform closed-interval axis with `steps >= 1` samples.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridAxis<T: Scalar> {
    pub lo: T,
    pub hi: T,
    pub steps: usize,
}

impl<T: Scalar> GridAxis<T> {
    pub fn new(lo: T, hi: T, steps: usize) -> Result<Self> {
        if steps == 0 || hi < lo {
            return Err(UrError::InvalidParameter(format!(
                "bad grid axis: {steps} steps",
            )));
        }
        Ok(GridAxis { lo, hi, steps })
    }

    pub fn samples(&self) -> Vec<T> {
        if self.steps == 1 {
            return vec![(self.lo + self.hi) * real(0.5)];
        }
        let h = (self.hi - self.lo) / real((self.steps - 1) as f64);
        (0..self.steps)
            .map(|i| self.lo + h * real(i as f64))
            .collect()
    }
}

/// Parametrization of a family of states.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind<T: Scalar> {
    /// α = re + i·im. Parameters: [re, im].
    Coherent {
        alpha_re: GridAxis<T>,
        alpha_im: GridAxis<T>,
    },
    /// α as above, ζ = r·e^{iφ}. Parameters: [α_re, α_im, r, φ].
    Squeezed {
        alpha_re: GridAxis<T>,
        alpha_im: GridAxis<T>,
        zeta_r: GridAxis<T>,
        zeta_phase: GridAxis<T>,
    },
    /// Rotated highest-weight spin state. Parameters: [θ, φ].
    SpinCoherent {
        theta: GridAxis<T>,
        phi: GridAxis<T>,
    },
    /// 2·dim real parameters interleaved (re_0, im_0, re_1, ...) and
    /// normalized into a ket; no finite grid, minimization only.
    Generic,
}

/// A state family over a fixed basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFamily<T: Scalar> {
    pub basis: BasisSpec,
    pub kind: FamilyKind<T>,
}

impl<T: Scalar> StateFamily<T> {
    pub fn param_dim(&self) -> usize {
        match &self.kind {
            FamilyKind::Coherent { .. } | FamilyKind::SpinCoherent { .. } => 2,
            FamilyKind::Squeezed { .. } => 4,
            FamilyKind::Generic => 2 * self.basis.dim(),
        }
    }

    /// All grid points as parameter vectors; errors for the generic family.
    pub fn grid(&self) -> Result<Vec<Vec<T>>> {
        let axes: Vec<Vec<T>> = match &self.kind {
            FamilyKind::Coherent { alpha_re, alpha_im } => {
                vec![alpha_re.samples(), alpha_im.samples()]
            }
            FamilyKind::Squeezed {
                alpha_re,
                alpha_im,
                zeta_r,
                zeta_phase,
            } => vec![
                alpha_re.samples(),
                alpha_im.samples(),
                zeta_r.samples(),
                zeta_phase.samples(),
            ],
            FamilyKind::SpinCoherent { theta, phi } => vec![theta.samples(), phi.samples()],
            FamilyKind::Generic => {
                return Err(UrError::InvalidParameter(
                    "generic family has no finite grid".into(),
                ))
            }
        };
        let mut points: Vec<Vec<T>> = vec![vec![]];
        for axis in axes {
            let mut next = Vec::with_capacity(points.len() * axis.len());
            for p in &points {
                for &v in &axis {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            points = next;
        }
        Ok(points)
    }

    /// Build the state at one parameter vector.
    pub fn realize(&self, params: &[T], tols: &Tols<T>) -> Result<QuantumState<T>> {
        if params.len() != self.param_dim() {
            return Err(UrError::DimensionMismatch {
                left: self.param_dim(),
                right: params.len(),
            });
        }
        let tail = tols.tail.unwrap_or_else(|| real(1.0));
        match (&self.kind, &self.basis) {
            (FamilyKind::Coherent { .. }, BasisSpec::Fock { levels, modes: 1 }) => {
                coherent_state(Complex::new(params[0], params[1]), *levels, tail)
            }
            (FamilyKind::Squeezed { .. }, BasisSpec::Fock { levels, modes: 1 }) => {
                let zeta = Complex::new(params[2] * params[3].cos(), params[2] * params[3].sin());
                squeezed_state(Complex::new(params[0], params[1]), zeta, *levels, tail)
            }
            (FamilyKind::SpinCoherent { .. }, BasisSpec::Spin { two_j }) => {
                spin_coherent_state(*two_j, params[0], params[1])
            }
            (FamilyKind::Generic, basis) => {
                let dim = basis.dim();
                let mut psi = CVec::<T>::from_fn(dim, |i, _| {
                    Complex::new(params[2 * i], params[2 * i + 1])
                });
                let norm = psi.norm();
                if norm <= real(1e-12) {
                    return Err(UrError::InvalidParameter(
                        "generic parameters are numerically zero".into(),
                    ));
                }
                psi /= Complex::new(norm, T::zero());
                QuantumState::pure(basis.clone(), psi)
            }
            _ => Err(UrError::InvalidParameter(
                "family kind incompatible with basis".into(),
            )),
        }
    }
}

/// One evaluated grid point of a scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint<T: Scalar> {
    pub params: Vec<T>,
    pub verdict: UrVerdict<T>,
}

/// Result of scanning a relation over a family grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport<T: Scalar> {
    pub ur: String,
    pub points: Vec<ScanPoint<T>>,
    pub max_abs_margin: T,
    pub min_margin: T,
}

impl<T: Scalar> ScanReport<T> {
    /// True when every margin sits within ±tol of saturation.
    pub fn saturates_within(&self, tol: T) -> bool {
        self.max_abs_margin <= tol
    }
}

/// Evaluate `ur` at every grid point of the family.
pub fn saturation_scan<T: Scalar>(
    family: &StateFamily<T>,
    ur: &UrName,
    observables: &[&Operator<T>],
    tols: &Tols<T>,
) -> Result<ScanReport<T>> {
    let grid = family.grid()?;
    let mut points = Vec::with_capacity(grid.len());
    let mut max_abs = T::zero();
    let mut min_margin = T::max_value().expect("bounded scalar");
    for params in grid {
        let state = family.realize(&params, tols)?;
        let verdict = eval_catalog(ur, observables, &state, tols)?;
        max_abs = max_abs.max(verdict.margin.abs());
        min_margin = min_margin.min(verdict.margin);
        points.push(ScanPoint { params, verdict });
    }
    Ok(ScanReport {
        ur: ur.to_string(),
        points,
        max_abs_margin: max_abs,
        min_margin,
    })
}

/// Knobs for [`minimize_ur`]. Defaults: 5000 evaluations, 3 random
/// restarts, simplex scale 0.3, convergence diameter 1e-9, seed 0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinimizeOptions<T: Scalar> {
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub simplex_scale: T,
    pub tol_diameter: T,
}

impl<T: Scalar> Default for MinimizeOptions<T> {
    fn default() -> Self {
        MinimizeOptions {
            budget: 5000,
            restarts: 3,
            seed: 0,
            simplex_scale: real(0.3),
            tol_diameter: real(1e-9),
        }
    }
}

/// Outcome of a margin minimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeResult<T: Scalar> {
    pub best_params: Vec<T>,
    pub best_margin: T,
    pub start_margin: T,
    pub evaluations: usize,
    /// Every (parameters, margin) pair evaluated, in order.
    pub trace: Vec<(Vec<T>, T)>,
}

struct Objective<'a, T: Scalar> {
    family: &'a StateFamily<T>,
    ur: &'a UrName,
    observables: &'a [&'a Operator<T>],
    tols: &'a Tols<T>,
    trace: Vec<(Vec<T>, T)>,
    best: Option<(Vec<T>, T)>,
}

impl<T: Scalar> Objective<'_, T> {
    fn eval(&mut self, params: &[T]) -> T {
        // Infeasible points (failed state construction) get a flat penalty
        // so the simplex retreats from them.
        let margin = self
            .family
            .realize(params, self.tols)
            .and_then(|state| eval_catalog(self.ur, self.observables, &state, self.tols))
            .map(|v| v.margin)
            .unwrap_or_else(|_| real(1e6));
        self.trace.push((params.to_vec(), margin));
        let improved = match &self.best {
            Some((_, b)) => margin < *b,
            None => true,
        };
        if improved {
            self.best = Some((params.to_vec(), margin));
        }
        margin
    }

    fn spent(&self) -> usize {
        self.trace.len()
    }
}

/// One Nelder–Mead descent around `start`, spending at most the remaining
/// budget; standard reflection/expansion/contraction/shrink coefficients.
fn nelder_mead<T: Scalar>(
    obj: &mut Objective<'_, T>,
    start: &[T],
    scale: T,
    budget: usize,
    tol_diameter: T,
) {
    let d = start.len();
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(d + 1);
    let f0 = obj.eval(start);
    simplex.push((start.to_vec(), f0));
    for i in 0..d {
        let mut v = start.to_vec();
        v[i] += scale;
        let f = obj.eval(&v);
        simplex.push((v, f));
    }
    let (alpha, gamma, rho, shrink) = (T::one(), real::<T>(2.0), real::<T>(0.5), real::<T>(0.5));

    while obj.spent() < budget {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite margins"));
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(&a, &b)| (a - b).abs())
                    .fold(T::zero(), |m, x| m.max(x))
            })
            .fold(T::zero(), |m, x| m.max(x));
        if diameter < tol_diameter {
            break;
        }
        let centroid: Vec<T> = (0..d)
            .map(|i| {
                simplex[..d]
                    .iter()
                    .map(|(v, _)| v[i])
                    .fold(T::zero(), |s, x| s + x)
                    / real(d as f64)
            })
            .collect();
        let worst = simplex[d].clone();
        let lerp = |coef: T| -> Vec<T> {
            (0..d)
                .map(|i| centroid[i] + coef * (centroid[i] - worst.0[i]))
                .collect()
        };

        let reflected = lerp(alpha);
        let fr = obj.eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(gamma);
            let fe = obj.eval(&expanded);
            simplex[d] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 {
                lerp(rho)
            } else {
                lerp(-rho)
            };
            let fc = obj.eval(&contracted);
            if fc < worst.1.min(fr) {
                simplex[d] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v: Vec<T> = entry
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(&x, &b)| b + shrink * (x - b))
                        .collect();
                    let f = obj.eval(&v);
                    *entry = (v, f);
                }
            }
        }
        if obj.spent() >= budget {
            break;
        }
    }
}

/// Minimize the margin of `ur` over the family, starting at `start`.
///
/// Runs one descent from `start`, `opts.restarts` descents from seeded
/// random perturbations of it, then polishing descents around the incumbent
/// with a shrinking simplex until the budget runs out. The returned margin
/// never exceeds the start margin and the run is deterministic for a fixed
/// seed.
pub fn minimize_ur<T: Scalar>(
    ur: &UrName,
    observables: &[&Operator<T>],
    family: &StateFamily<T>,
    start: &[T],
    opts: &MinimizeOptions<T>,
    tols: &Tols<T>,
) -> Result<MinimizeResult<T>> {
    if start.len() != family.param_dim() {
        return Err(UrError::DimensionMismatch {
            left: family.param_dim(),
            right: start.len(),
        });
    }
    if opts.budget == 0 {
        return Err(UrError::InvalidParameter("zero evaluation budget".into()));
    }
    let mut obj = Objective {
        family,
        ur,
        observables,
        tols,
        trace: Vec::new(),
        best: None,
    };
    let start_margin = obj.eval(start);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    nelder_mead(&mut obj, start, opts.simplex_scale, opts.budget, opts.tol_diameter);
    for _ in 0..opts.restarts {
        if obj.spent() >= opts.budget {
            break;
        }
        let perturbed: Vec<T> = start
            .iter()
            .map(|&x| {
                let g: f64 = StandardNormal.sample(&mut rng);
                x + opts.simplex_scale * real(g)
            })
            .collect();
        nelder_mead(
            &mut obj,
            &perturbed,
            opts.simplex_scale,
            opts.budget,
            opts.tol_diameter,
        );
    }
    // Polish around the incumbent with progressively finer simplices.
    let mut scale = opts.simplex_scale * real(0.2);
    while obj.spent() < opts.budget && scale > real(1e-12) {
        let incumbent = obj.best.as_ref().expect("evaluated at least once").0.clone();
        nelder_mead(&mut obj, &incumbent, scale, opts.budget, opts.tol_diameter);
        scale *= real(0.25);
    }

    let (best_params, best_margin) = obj.best.take().expect("evaluated at least once");
    Ok(MinimizeResult {
        best_params,
        best_margin: best_margin.min(start_margin),
        start_margin,
        evaluations: obj.trace.len(),
        trace: obj.trace,
    })
}

/// Best coherent-state approximation to a single-mode pure state: seeds
/// α at <a> and polishes on shrinking 5x5 grids. Returns (α, fidelity).
pub fn best_coherent_fit<T: Scalar>(
    state: &QuantumState<T>,
    lowering: &Operator<T>,
) -> Result<(Complex<T>, T)> {
    let levels = match state.basis {
        BasisSpec::Fock { levels, modes: 1 } => levels,
        _ => {
            return Err(UrError::InvalidParameter(
                "coherent fit needs a single-mode Fock state".into(),
            ))
        }
    };
    let seed = crate::moments::complex_mean(lowering, state)?;
    let fid = |alpha: Complex<T>| -> Result<T> {
        let c = coherent_state(alpha, levels, real(1.0))?;
        state.fidelity(&c)
    };
    let mut center = seed;
    let mut best = (center, fid(center)?);
    let mut half_width: T = real(0.5);
    for _ in 0..8 {
        for i in -2i32..=2 {
            for j in -2i32..=2 {
                let step = half_width * real(0.5);
                let alpha = Complex::new(
                    center.re + step * real(i as f64),
                    center.im + step * real(j as f64),
                );
                let f = fid(alpha)?;
                if f > best.1 {
                    best = (alpha, f);
                }
            }
        }
        center = best.0;
        half_width *= real(0.3);
    }
    Ok(best)
}
