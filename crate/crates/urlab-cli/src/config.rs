//! TOML scenario schema and resolution into core objects.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use urlab_core::hilbert::{
    coherent_state, fock_operators, fock_state, multimode_vacuum, spin_coherent_state,
    spin_operators, squeezed_state, su11_operators, BasisSpec, Operator, QuantumState, StateForm,
};
use urlab_core::relations::UrName;
use urlab_core::verdict::Tols;
use urlab_core::{CMat, CVec};

pub type Cpx = [f64; 2];

pub fn cpx(p: Cpx) -> Complex<f64> {
    Complex::new(p[0], p[1])
}

pub fn pair(z: Complex<f64>) -> Cpx {
    [z.re, z.im]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: Option<u64>,
    pub basis: BasisConfig,
    #[serde(default)]
    pub tolerances: TolConfig,
    #[serde(default)]
    pub states: Vec<StateConfig>,
    #[serde(default)]
    pub observables: Vec<ObservableConfig>,
    #[serde(default)]
    pub relations: Vec<RelationConfig>,
    pub battery: Option<BatteryConfig>,
    pub sweep: Option<SweepConfig>,
    pub minimize: Option<MinimizeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BasisConfig {
    Fock { levels: usize, modes: Option<usize> },
    Spin { two_j: u32 },
    Su11 { k: f64, levels: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolConfig {
    pub floor: Option<f64>,
    pub saturation: Option<f64>,
    /// Tail-occupancy gate; absent disables the gate.
    pub tail: Option<f64>,
}

impl Default for TolConfig {
    fn default() -> Self {
        TolConfig {
            floor: None,
            saturation: None,
            tail: Some(1e-12),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StateKind {
    Fock { n: usize },
    Vacuum,
    Coherent { alpha: Cpx },
    Squeezed { alpha: Cpx, zeta: Cpx },
    SpinCoherent { theta: f64, phi: f64 },
    Amplitudes { amplitudes: Vec<Cpx> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateConfig {
    pub name: String,
    #[serde(flatten)]
    pub kind: StateKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ObservableKind {
    Position { mode: Option<usize> },
    Momentum { mode: Option<usize> },
    Number { mode: Option<usize> },
    Spin { index: usize },
    Su11 { index: usize },
    Matrix { rows: Vec<Vec<Cpx>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableConfig {
    pub name: String,
    #[serde(flatten)]
    pub kind: ObservableKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationConfig {
    pub name: String,
    #[serde(default)]
    pub observables: Vec<String>,
    pub state: String,
    #[serde(default)]
    pub expect_saturated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    #[serde(default)]
    pub pure_samples: usize,
    #[serde(default)]
    pub mixed_samples: usize,
    /// Mixed-state rank; defaults to 2.
    pub mixed_rank: Option<usize>,
    /// Number of random Hermitian observables per sample.
    pub observable_count: usize,
    /// Catalog relations evaluated per sample; defaults to the n-observable
    /// trio (robertson_n, hadamard_robertson, trace_n).
    pub relations: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SweepKind {
    /// Displaced squeezed states over a squeeze-magnitude grid.
    SqueezeR {
        alpha: Cpx,
        zeta_phase: f64,
        values: Vec<f64>,
    },
    /// Rotation angle applied to each relation's (two) observables.
    RotationTheta {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub kind: SweepKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    pub relation: String,
    pub observables: Vec<String>,
    /// "generic" or "gaussian".
    pub family: String,
    pub start: Vec<f64>,
    pub budget: Option<usize>,
    pub restarts: Option<usize>,
}

/// Fully resolved scenario: core objects keyed by config names.
pub struct Resolved {
    pub scenario: Scenario,
    pub basis: BasisSpec,
    pub tols: Tols<f64>,
    pub states: BTreeMap<String, QuantumState<f64>>,
    pub observables: BTreeMap<String, Operator<f64>>,
    pub seed: u64,
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    toml::from_str(text).context("scenario failed to parse")
}

impl Scenario {
    pub fn resolve(self, seed_override: Option<u64>) -> Result<Resolved> {
        let basis = match &self.basis {
            BasisConfig::Fock { levels, modes } => BasisSpec::fock(*levels, modes.unwrap_or(1))?,
            BasisConfig::Spin { two_j } => BasisSpec::spin(*two_j)?,
            BasisConfig::Su11 { k, levels } => BasisSpec::su11(*k, *levels)?,
        };
        let t = &self.tolerances;
        for v in [t.floor, t.saturation, t.tail].into_iter().flatten() {
            if v <= 0.0 {
                bail!("tolerances must be positive, got {v}");
            }
        }
        let tols = Tols {
            floor: t.floor.unwrap_or(1e-10),
            saturation: t.saturation.unwrap_or(1e-8),
            tail: t.tail,
        };
        let tail = tols.tail.unwrap_or(1.0);

        let mut states = BTreeMap::new();
        for sc in &self.states {
            let state = build_state(&basis, &sc.kind, tail)
                .with_context(|| format!("state '{}'", sc.name))?;
            if states.insert(sc.name.clone(), state).is_some() {
                bail!("duplicate state name '{}'", sc.name);
            }
        }
        let mut observables = BTreeMap::new();
        for oc in &self.observables {
            let op = build_observable(&basis, &oc.kind)
                .with_context(|| format!("observable '{}'", oc.name))?;
            if observables.insert(oc.name.clone(), op).is_some() {
                bail!("duplicate observable name '{}'", oc.name);
            }
        }
        // A parameter sweep injects a state named "swept" at run time.
        let sweep_injected = self.sweep.is_some();
        for rc in &self.relations {
            rc.name
                .parse::<UrName>()
                .map_err(|e| anyhow!("relation '{}': {e}", rc.name))?;
            if !states.contains_key(&rc.state) && !(sweep_injected && rc.state == "swept") {
                bail!("relation '{}' references unknown state '{}'", rc.name, rc.state);
            }
            for o in &rc.observables {
                if !observables.contains_key(o) {
                    bail!("relation '{}' references unknown observable '{o}'", rc.name);
                }
            }
        }
        if let Some(b) = &self.battery {
            if (b.pure_samples > 0 || b.mixed_samples > 0) && self.seed.is_none()
                && seed_override.is_none()
            {
                bail!("battery requires a seed");
            }
            if b.observable_count < 2 {
                bail!("battery needs at least two observables per sample");
            }
            if let Some(names) = &b.relations {
                for n in names {
                    n.parse::<UrName>().map_err(|e| anyhow!("battery: {e}"))?;
                }
            }
        }
        let seed = seed_override.or(self.seed).unwrap_or(0);
        Ok(Resolved {
            scenario: self,
            basis,
            tols,
            states,
            observables,
            seed,
        })
    }
}

fn build_state(basis: &BasisSpec, kind: &StateKind, tail: f64) -> Result<QuantumState<f64>> {
    let state = match (kind, basis) {
        (StateKind::Vacuum, BasisSpec::Fock { levels, modes }) => {
            multimode_vacuum(*levels, *modes)?
        }
        (StateKind::Fock { n }, BasisSpec::Fock { levels, modes: 1 }) => fock_state(*n, *levels)?,
        (StateKind::Coherent { alpha }, BasisSpec::Fock { levels, modes: 1 }) => {
            coherent_state(cpx(*alpha), *levels, tail)?
        }
        (StateKind::Squeezed { alpha, zeta }, BasisSpec::Fock { levels, modes: 1 }) => {
            squeezed_state(cpx(*alpha), cpx(*zeta), *levels, tail)?
        }
        (StateKind::SpinCoherent { theta, phi }, BasisSpec::Spin { two_j }) => {
            spin_coherent_state(*two_j, *theta, *phi)?
        }
        (StateKind::Amplitudes { amplitudes }, _) => {
            let psi = CVec::from_iterator(amplitudes.len(), amplitudes.iter().map(|&p| cpx(p)));
            QuantumState::pure(basis.clone(), psi)?
        }
        _ => bail!("state kind incompatible with basis"),
    };
    Ok(state)
}

fn build_observable(basis: &BasisSpec, kind: &ObservableKind) -> Result<Operator<f64>> {
    let op = match (kind, basis) {
        (ObservableKind::Position { mode }, BasisSpec::Fock { levels, modes }) => {
            let ops = fock_operators::<f64>(*levels, *modes)?;
            pick(ops.position, mode.unwrap_or(0), *modes)?
        }
        (ObservableKind::Momentum { mode }, BasisSpec::Fock { levels, modes }) => {
            let ops = fock_operators::<f64>(*levels, *modes)?;
            pick(ops.momentum, mode.unwrap_or(0), *modes)?
        }
        (ObservableKind::Number { mode }, BasisSpec::Fock { levels, modes }) => {
            let ops = fock_operators::<f64>(*levels, *modes)?;
            let m = mode.unwrap_or(0);
            let a = pick(ops.lowering, m, *modes)?;
            Operator::hermitian(basis.clone(), a.matrix.adjoint() * &a.matrix)?
        }
        (ObservableKind::Spin { index }, BasisSpec::Spin { two_j }) => {
            let trio = spin_operators::<f64>(*two_j)?;
            pick(trio.to_vec(), index.checked_sub(1).context("spin index is 1-based")?, 3)?
        }
        (ObservableKind::Su11 { index }, BasisSpec::Su11 { k, levels }) => {
            let trio = su11_operators::<f64>(*k, *levels)?;
            pick(trio.to_vec(), index.checked_sub(1).context("su11 index is 1-based")?, 3)?
        }
        (ObservableKind::Matrix { rows }, _) => {
            let d = basis.dim();
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                bail!("matrix must be {d}x{d}");
            }
            let m = CMat::from_fn(d, d, |i, j| cpx(rows[i][j]));
            Operator::hermitian(basis.clone(), m)?
        }
        _ => bail!("observable kind incompatible with basis"),
    };
    Ok(op)
}

fn pick(mut v: Vec<Operator<f64>>, idx: usize, count: usize) -> Result<Operator<f64>> {
    if idx >= count {
        bail!("index {idx} out of range ({count} available)");
    }
    Ok(v.swap_remove(idx))
}

/// Serializable snapshot of a pure state for counterexample certificates.
pub fn state_snapshot(state: &QuantumState<f64>) -> Vec<Vec<Cpx>> {
    match &state.form {
        StateForm::Pure(psi) => vec![psi.iter().map(|&z| pair(z)).collect()],
        StateForm::Mixed(rho) => (0..rho.nrows())
            .map(|i| (0..rho.ncols()).map(|j| pair(rho[(i, j)])).collect())
            .collect(),
    }
}
