use serde::{Deserialize, Serialize};

use crate::{real, Scalar};

/// Result of evaluating one inequality: `lhs >= rhs` with margin `lhs - rhs`.
///
/// `saturated` means the inequality holds with equality at the saturation
/// tolerance; `holds` compares the margin against the numerical floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UrVerdict<T: Scalar> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    pub margin: T,
    pub saturated: bool,
    pub tol: T,
    pub context: String,
}

impl<T: Scalar> UrVerdict<T> {
    pub fn new(name: impl Into<String>, lhs: T, rhs: T, tols: &Tols<T>) -> Self {
        let margin = lhs - rhs;
        UrVerdict {
            name: name.into(),
            lhs,
            rhs,
            margin,
            saturated: margin.abs() <= tols.saturation,
            tol: tols.saturation,
            context: String::new(),
        }
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = context.into();
        self
    }

    /// True when the margin is above the numerical floor `-floor`.
    pub fn holds(&self, floor: T) -> bool {
        self.margin >= -floor
    }
}

/// Tolerance bundle threaded through the catalog.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tols<T: Scalar> {
    /// Margins below `-floor` count as violations.
    pub floor: T,
    /// |margin| <= saturation flags the verdict as saturated.
    pub saturation: T,
    /// Top-two-level occupancy gate for truncated Fock states; `None` disables.
    pub tail: Option<T>,
}

impl<T: Scalar> Default for Tols<T> {
    fn default() -> Self {
        Tols {
            floor: real(1e-10),
            saturation: real(1e-8),
            tail: Some(real(1e-12)),
        }
    }
}

impl<T: Scalar> Tols<T> {
    /// Default tolerances with the Fock tail gate disabled.
    pub fn ungated() -> Self {
        Tols {
            tail: None,
            ..Tols::default()
        }
    }
}
