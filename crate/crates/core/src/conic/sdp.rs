//! Relaxed waveform step: minimize the linear objective `Tr(A X) + offset`
//! over Hermitian `X ⪰ 0` subject to the per-tag SINR constraints
//! `Tr(G_j X) ≥ ρ̄_j (σ²‖g_j‖² + Tr(G̃_j X))`, `Tr X ≤ 2P` and optional
//! `X_nn ≤ 2P̄_s`.
//!
//! The solver works on `Y = X / 2P` through its real Hermitian parameters;
//! the PSD constraint is imposed on the real embedding of `Y`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ipm::InteriorPoint;
use super::socp::cvec_rows;
use super::{Cone, ConicProblem, ConicSolver, ConicStatus, ProblemDump, SolveStatus, SparseMatrix};
use crate::channel::ChannelRealization;
use crate::error::{check_len, Error, Result};
use crate::linalg::{embed_real, herm_dim, herm_from_params, herm_functional, hermitian_eigen, trace_product_re, CMatrix, CVector};
use crate::link::CombinerSet;
use crate::model::MDiagonalSet;
use crate::scalar::{Cplx, Real};

/// `Tr(G X) ≥ target (σ² ‖g‖² + Tr(G̃ X))` with `G = a aᴴ`, `G̃ = b bᴴ`.
#[derive(Clone, Debug)]
pub struct SinrConstraint<T: Real> {
    /// `H_jᴴ g_j`
    pub a: CVector<T>,
    /// `H̃_jᴴ g_j`
    pub b: CVector<T>,
    pub combiner_norm_sq: T,
    pub target: T,
}

impl<T: Real> SinrConstraint<T> {
    pub fn g(&self) -> CMatrix<T> {
        &self.a * self.a.adjoint()
    }

    pub fn g_tilde(&self) -> CMatrix<T> {
        &self.b * self.b.adjoint()
    }

    /// `Tr(G X) − target (σ²‖g‖² + Tr(G̃ X))`
    pub fn slack(&self, x: &CMatrix<T>, noise_var: T) -> T {
        let q = |v: &CVector<T>| (v.adjoint() * x * v)[(0, 0)].re;
        q(&self.a) - self.target * (noise_var * self.combiner_norm_sq + q(&self.b))
    }
}

#[derive(Clone, Debug)]
pub struct SdpStepSpec<T: Real> {
    /// Hermitian objective matrix `A`.
    pub objective: CMatrix<T>,
    pub offset: T,
    pub sinr: Vec<SinrConstraint<T>>,
    pub noise_var: T,
    pub tx_power: T,
    pub psd_limit: Option<T>,
    pub mset: MDiagonalSet<T>,
    /// Feasible point returned instead of the solver output when its
    /// objective is lower.
    pub warm_start: Option<CMatrix<T>>,
}

#[allow(clippy::too_many_arguments)]
impl<T: Real> SdpStepSpec<T> {
    pub fn new(
        objective: CMatrix<T>,
        offset: T,
        channel: &ChannelRealization<T>,
        combiners: &CombinerSet<T>,
        targets: &[T],
        noise_var: T,
        tx_power: T,
        psd_limit: Option<T>,
        mset: MDiagonalSet<T>,
    ) -> Result<Self> {
        let k = channel.n_tags();
        check_len(k, combiners.len())?;
        check_len(k, targets.len())?;
        let n = channel.n_tones();
        if objective.shape() != (n, n) {
            return Err(Error::Dimension {
                expected: n,
                got: objective.nrows(),
            });
        }
        let sinr = (0..k)
            .map(|j| {
                let g = combiners.get(j);
                SinrConstraint {
                    a: channel.h_diag(j).map(|z| z.conj()).component_mul(g),
                    b: channel.h_tilde_diag(j).map(|z| z.conj()).component_mul(g),
                    combiner_norm_sq: g.norm_squared(),
                    target: targets[j],
                }
            })
            .collect();
        Ok(Self {
            objective,
            offset,
            sinr,
            noise_var,
            tx_power,
            psd_limit,
            mset,
            warm_start: None,
        })
    }

    pub fn with_warm_start(mut self, x: CMatrix<T>) -> Self {
        self.warm_start = Some(x);
        self
    }

    pub fn n_tones(&self) -> usize {
        self.objective.nrows()
    }

    pub fn gamma(&self, x: &CMatrix<T>) -> T {
        trace_product_re(&self.objective, x) + self.offset
    }

    /// Real-form conic program over the parameters of `Y = X / 2P`, together
    /// with the factor the objective vector was divided by.
    pub fn build(&self) -> Result<(ConicProblem<T>, T)> {
        let n = self.n_tones();
        let nv = herm_dim(n);
        let two_p = T::lit(2.0) * self.tx_power;
        let mut trips: Vec<(usize, usize, T)> = Vec::new();
        let mut h: Vec<T> = Vec::new();

        let mut lp_rows = 0;
        for con in &self.sinr {
            if !(con.target > T::zero()) {
                continue;
            }
            let mut b = con.g() - con.g_tilde() * Cplx::new(con.target, T::zero());
            b *= Cplx::new(two_p / self.noise_var, T::zero());
            let f = herm_functional(&b);
            let rhs = con.target * con.combiner_norm_sq;
            let nrm = f.iter().fold(T::zero(), |a, &x| a + x * x).sqrt().max(rhs);
            if !(nrm > T::zero()) {
                continue;
            }
            for (i, &v) in f.iter().enumerate() {
                if v != T::zero() {
                    trips.push((lp_rows, i, -v / nrm));
                }
            }
            h.push(-rhs / nrm);
            lp_rows += 1;
        }
        for i in 0..n {
            trips.push((lp_rows, i, T::one()));
        }
        h.push(T::one());
        lp_rows += 1;
        if let Some(cap) = self.psd_limit {
            for i in 0..n {
                trips.push((lp_rows, i, T::one()));
                h.push(cap / self.tx_power);
                lp_rows += 1;
            }
        }

        let dim = 2 * n;
        let mut basis = vec![T::zero(); nv];
        for i in 0..nv {
            basis[i] = T::one();
            let e = embed_real(&herm_from_params(n, &basis));
            basis[i] = T::zero();
            for c in 0..dim {
                for r in 0..dim {
                    let v = e[(r, c)];
                    if v != T::zero() {
                        trips.push((lp_rows + c * dim + r, i, -v));
                    }
                }
            }
        }
        h.extend(std::iter::repeat_n(T::zero(), dim * dim));

        let f = herm_functional(&self.objective);
        let c = DVector::from_iterator(nv, f.iter().map(|&v| v * two_p));
        let cscale = if c.norm() > T::zero() { c.norm() } else { T::one() };
        let c = c / cscale;
        let m = h.len();
        let problem = ConicProblem::new(
            c,
            SparseMatrix::from_triplets(m, nv, &trips),
            DVector::from_vec(h),
            DMatrix::zeros(0, nv),
            DVector::zeros(0),
            vec![Cone::NonNeg(lp_rows), Cone::Psd(dim)],
        )?;
        Ok((problem, cscale))
    }

    pub fn to_dump(&self) -> Result<SdpDump> {
        let rows = |m: &CMatrix<T>| -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows())
                .map(|i| cvec_rows(&m.row(i).transpose().into_owned()))
                .collect()
        };
        Ok(SdpDump {
            objective: rows(&self.objective),
            offset: self.offset.as_f64(),
            sinr_g: self.sinr.iter().map(|c| rows(&c.g())).collect(),
            sinr_g_tilde: self.sinr.iter().map(|c| rows(&c.g_tilde())).collect(),
            targets: self.sinr.iter().map(|c| c.target.as_f64()).collect(),
            combiner_norm_sq: self.sinr.iter().map(|c| c.combiner_norm_sq.as_f64()).collect(),
            noise_var: self.noise_var.as_f64(),
            tx_power: self.tx_power.as_f64(),
            psd_limit: self.psd_limit.map(|t| t.as_f64()),
            conic: self.build()?.0.to_dump(),
        })
    }
}

/// JSON form of one relaxed step; complex matrices are row-major arrays of
/// `[re, im]` pairs.
#[derive(Clone, Debug, Serialize)]
pub struct SdpDump {
    pub objective: Vec<Vec<[f64; 2]>>,
    pub offset: f64,
    pub sinr_g: Vec<Vec<Vec<[f64; 2]>>>,
    pub sinr_g_tilde: Vec<Vec<Vec<[f64; 2]>>>,
    pub targets: Vec<f64>,
    pub combiner_norm_sq: Vec<f64>,
    pub noise_var: f64,
    pub tx_power: f64,
    pub psd_limit: Option<f64>,
    pub conic: ProblemDump,
}

#[derive(Clone, Debug)]
pub struct SdpStepResult<T: Real> {
    pub status: ConicStatus<T>,
    pub x: CMatrix<T>,
    /// `t[j][k] = Tr(M_{j,k} X)`
    pub t: Vec<Vec<Cplx<T>>>,
    pub gamma: T,
    pub used_warm_start: bool,
}

pub fn solve_sdp_step<T: Real>(spec: &SdpStepSpec<T>) -> Result<SdpStepResult<T>> {
    solve_sdp_step_with(spec, &InteriorPoint::default())
}

pub fn solve_sdp_step_with<T: Real>(spec: &SdpStepSpec<T>, solver: &dyn ConicSolver<T>) -> Result<SdpStepResult<T>> {
    let n = spec.n_tones();
    let (problem, _) = spec.build()?;
    let status = solver.solve(&problem);
    let two_p = T::lit(2.0) * spec.tx_power;
    let mut x = herm_from_params(n, status.x.as_slice()) * Cplx::new(two_p, T::zero());
    // clip the tiny negative eigenvalues left by the interior-point iterate
    let (vals, vecs) = hermitian_eigen(&x);
    if vals.iter().any(|&v| v < T::zero()) {
        let mut acc = CMatrix::zeros(n, n);
        for (i, &v) in vals.iter().enumerate() {
            if v > T::zero() {
                let u = vecs.column(i);
                acc += &u * u.adjoint() * Cplx::new(v, T::zero());
            }
        }
        x = acc;
    }
    let mut gamma = spec.gamma(&x);
    let mut used_warm_start = false;
    if let Some(w) = &spec.warm_start {
        let gw = spec.gamma(w);
        if status.status == SolveStatus::Optimal && gw < gamma {
            x = w.clone();
            gamma = gw;
            used_warm_start = true;
        }
    }
    let t = (0..spec.mset.n_tags()).map(|j| spec.mset.t_vector(j, &x)).collect();
    Ok(SdpStepResult {
        status,
        x,
        t,
        gamma,
        used_warm_start,
    })
}
