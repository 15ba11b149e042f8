//! Linear programs in the four-block form
//!
//! ```text
//!   min  cᵀx + offset
//!   s.t. A x  = b
//!        G x ≥ h
//!        l ≤ x ≤ u
//! ```
//!
//! with `K = [A; G]` and `q = (b, h)`.

mod mps;
mod sparse;

pub use mps::{parse_mps, read_problem, write_mps, MpsError, MpsFormat};
pub use sparse::{SparseError, SparseMatrix};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjSense {
    #[default]
    Minimize,
    Maximize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("{what} has length {got}, expected {expected}")]
    Dimension { what: &'static str, got: usize, expected: usize },
    #[error("A has {a} columns but G has {g}")]
    ColumnMismatch { a: usize, g: usize },
    #[error("variable {index}: lower bound {lower} exceeds upper bound {upper}")]
    InvertedBounds { index: usize, lower: f64, upper: f64 },
    #[error("{what}[{index}] is not a valid number")]
    BadValue { what: &'static str, index: usize },
}

/// Per-variable shape of the bound-multiplier cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundClass {
    /// `l = −∞, u = +∞`; multiplier fixed at 0.
    Free,
    /// `l = −∞, u` finite; multiplier in ℝ⁻.
    UpperOnly,
    /// `l` finite, `u = +∞`; multiplier in ℝ⁺.
    LowerOnly,
    /// Both bounds finite; multiplier unrestricted.
    Boxed,
}

impl BoundClass {
    pub fn of(lower: f64, upper: f64) -> Self {
        match (lower.is_finite(), upper.is_finite()) {
            (false, false) => BoundClass::Free,
            (false, true) => BoundClass::UpperOnly,
            (true, false) => BoundClass::LowerOnly,
            (true, true) => BoundClass::Boxed,
        }
    }

    /// Projection of a reduced cost onto this class's cone.
    #[inline]
    pub fn project(self, v: f64) -> f64 {
        match self {
            BoundClass::Free => 0.0,
            BoundClass::UpperOnly => v.min(0.0),
            BoundClass::LowerOnly => v.max(0.0),
            BoundClass::Boxed => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    a: SparseMatrix,
    g: SparseMatrix,
    c: Vec<f64>,
    b: Vec<f64>,
    h: Vec<f64>,
    l: Vec<f64>,
    u: Vec<f64>,
    objective_offset: f64,
    sense: ObjSense,
}

impl LpProblem {
    /// Validates and assembles a problem. `c` and `objective_offset` are in
    /// minimization form regardless of `sense`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: SparseMatrix,
        g: SparseMatrix,
        c: Vec<f64>,
        b: Vec<f64>,
        h: Vec<f64>,
        l: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if a.n_cols() != g.n_cols() {
            return Err(ModelError::ColumnMismatch { a: a.n_cols(), g: g.n_cols() });
        }
        let n = a.n_cols();
        let check = |what, v: &[f64], expected| {
            if v.len() != expected {
                Err(ModelError::Dimension { what, got: v.len(), expected })
            } else {
                Ok(())
            }
        };
        check("c", &c, n)?;
        check("l", &l, n)?;
        check("u", &u, n)?;
        check("b", &b, a.n_rows())?;
        check("h", &h, g.n_rows())?;
        for (what, v) in [("c", &c), ("b", &b), ("h", &h)] {
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(ModelError::BadValue { what, index });
            }
        }
        for i in 0..n {
            if l[i].is_nan() || l[i] == f64::INFINITY {
                return Err(ModelError::BadValue { what: "l", index: i });
            }
            if u[i].is_nan() || u[i] == f64::NEG_INFINITY {
                return Err(ModelError::BadValue { what: "u", index: i });
            }
            if l[i] > u[i] {
                return Err(ModelError::InvertedBounds { index: i, lower: l[i], upper: u[i] });
            }
        }
        Ok(LpProblem { a, g, c, b, h, l, u, objective_offset: 0.0, sense: ObjSense::Minimize })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.objective_offset = offset;
        self
    }

    pub fn with_sense(mut self, sense: ObjSense) -> Self {
        self.sense = sense;
        self
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }
    pub fn g(&self) -> &SparseMatrix {
        &self.g
    }
    pub fn c(&self) -> &[f64] {
        &self.c
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn h(&self) -> &[f64] {
        &self.h
    }
    pub fn lower(&self) -> &[f64] {
        &self.l
    }
    pub fn upper(&self) -> &[f64] {
        &self.u
    }
    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }
    pub fn sense(&self) -> ObjSense {
        self.sense
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.c.len()
    }
    /// Number of equality rows.
    pub fn m1(&self) -> usize {
        self.b.len()
    }
    /// Number of inequality rows.
    pub fn m2(&self) -> usize {
        self.h.len()
    }
    pub fn m(&self) -> usize {
        self.m1() + self.m2()
    }

    /// `q = (b, h)`.
    pub fn q(&self) -> Vec<f64> {
        self.b.iter().chain(&self.h).copied().collect()
    }

    /// Objective value in the user's sense (undoes the max→min negation).
    pub fn user_objective(&self, internal: f64) -> f64 {
        match self.sense {
            ObjSense::Minimize => internal,
            ObjSense::Maximize => -internal,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn replace_data(
        &self,
        a: SparseMatrix,
        g: SparseMatrix,
        c: Vec<f64>,
        b: Vec<f64>,
        h: Vec<f64>,
        l: Vec<f64>,
        u: Vec<f64>,
    ) -> Self {
        LpProblem { a, g, c, b, h, l, u, objective_offset: self.objective_offset, sense: self.sense }
    }
}

/// Stacks `K = [A; G]` and `q = (b, h)`.
pub fn stack_k(problem: &LpProblem) -> (SparseMatrix, Vec<f64>) {
    (problem.a.vstack(&problem.g), problem.q())
}

pub fn classify_bounds(problem: &LpProblem) -> Vec<BoundClass> {
    problem.l.iter().zip(&problem.u).map(|(&l, &u)| BoundClass::of(l, u)).collect()
}
