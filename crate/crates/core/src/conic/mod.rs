//! Conic programs in the standard form
//!
//! ```text
//! minimize    cᵀx
//! subject to  G x + s = h,   A x = b,   s ∈ K
//! ```
//!
//! where `K` is a product of nonnegative orthants, second-order cones and
//! real PSD cones (stored as full `n×n` column-major blocks so that the flat
//! dot product is the trace inner product). The two subproblems used by the
//! algorithms are assembled in [`socp`] and [`sdp`].

mod cones;
mod ipm;
pub mod sdp;
pub mod socp;
mod sparse;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use ipm::InteriorPoint;
pub use sdp::{solve_sdp_step, solve_sdp_step_with, SdpDump, SdpStepResult, SdpStepSpec, SinrConstraint};
pub use socp::{solve_socp_step, solve_socp_step_with, SocpDump, SocpStepResult, SocpStepSpec};
pub use sparse::{SparseMatrix, Triplets};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    NonNeg(usize),
    /// `(t, x)` with `‖x‖ ≤ t`; the size includes `t`.
    Soc(usize),
    /// Symmetric `n×n` block, `n²` rows.
    Psd(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::NonNeg(m) | Cone::Soc(m) => m,
            Cone::Psd(n) => n * n,
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            Cone::NonNeg(m) => m,
            Cone::Soc(_) => 1,
            Cone::Psd(n) => n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConicProblem<T: Real> {
    pub c: DVector<T>,
    pub g: SparseMatrix<T>,
    pub h: DVector<T>,
    pub a: DMatrix<T>,
    pub b: DVector<T>,
    pub cones: Vec<Cone>,
}

impl<T: Real> ConicProblem<T> {
    pub fn new(
        c: DVector<T>,
        g: SparseMatrix<T>,
        h: DVector<T>,
        a: DMatrix<T>,
        b: DVector<T>,
        cones: Vec<Cone>,
    ) -> Result<Self> {
        let n = c.len();
        let m: usize = cones.iter().map(Cone::dim).sum();
        if g.ncols() != n || a.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: g.ncols().max(a.ncols()),
            });
        }
        if g.nrows() != m || h.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: g.nrows(),
            });
        }
        if a.nrows() != b.len() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if cones.iter().any(|k| matches!(k, Cone::Soc(0) | Cone::Psd(0))) {
            return Err(Error::Invalid("empty cone".into()));
        }
        Ok(Self { c, g, h, a, b, cones })
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn degree(&self) -> usize {
        self.cones.iter().map(Cone::degree).sum()
    }

    pub fn to_dump(&self) -> ProblemDump {
        let v = |x: &DVector<T>| x.iter().map(|t| t.as_f64()).collect();
        ProblemDump {
            c: v(&self.c),
            g: self.g.to_triplets(),
            h: v(&self.h),
            a: (0..self.a.nrows())
                .map(|i| (0..self.a.ncols()).map(|j| self.a[(i, j)].as_f64()).collect())
                .collect(),
            b: v(&self.b),
            cones: self.cones.clone(),
        }
    }
}

/// Real-form problem in JSON: `G` as triplets, `A` as row-major rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemDump {
    pub c: Vec<f64>,
    pub g: Triplets,
    pub h: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
    NumericalTrouble,
}

/// Outcome of one conic solve. For [`SolveStatus::Infeasible`] the dual
/// fields hold the normalized certificate and the primal fields are the last
/// iterate.
#[derive(Clone, Debug)]
pub struct ConicStatus<T: Real> {
    pub status: SolveStatus,
    pub objective: T,
    pub x: DVector<T>,
    pub s: DVector<T>,
    pub y: DVector<T>,
    pub z: DVector<T>,
    pub primal_residual: T,
    pub dual_residual: T,
    pub gap: T,
    pub iterations: usize,
}

impl<T: Real> ConicStatus<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Seam for swapping the conic backend.
pub trait ConicSolver<T: Real> {
    fn solve(&self, problem: &ConicProblem<T>) -> ConicStatus<T>;
}
