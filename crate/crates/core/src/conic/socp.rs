//! Waveform feasibility step for a fixed set of combiners: find the
//! smallest-norm `w` with
//!
//! ```text
//! Im(g_jᴴ H_j w) = 0,   Re(g_jᴴ H_j w)² ≥ δρ̄_j (σ²‖g_j‖² + |g_jᴴ H̃_j w|²),   ‖w‖² ≤ 2P
//! ```
//!
//! Variables are `u = [Re w; Im w] / √(2P)` followed by the epigraph
//! variable of `‖u‖`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ipm::InteriorPoint;
use super::{Cone, ConicProblem, ConicSolver, ConicStatus, ProblemDump, SolveStatus, SparseMatrix};
use crate::channel::ChannelRealization;
use crate::error::{check_len, Result};
use crate::linalg::CVector;
use crate::link::CombinerSet;
use crate::model::Waveform;
use crate::scalar::{Cplx, Real};

#[derive(Clone, Debug)]
pub struct SocpStepSpec<T: Real> {
    pub combiners: Vec<CVector<T>>,
    /// diagonals of `H_j`
    pub h: Vec<CVector<T>>,
    /// diagonals of `H̃_j`
    pub h_tilde: Vec<CVector<T>>,
    /// `δ ρ̄_j`
    pub thresholds: Vec<T>,
    pub noise_var: T,
    pub tx_power: T,
    pub psd_limit: Option<T>,
}

impl<T: Real> SocpStepSpec<T> {
    pub fn new(
        channel: &ChannelRealization<T>,
        combiners: &CombinerSet<T>,
        thresholds: Vec<T>,
        noise_var: T,
        tx_power: T,
        psd_limit: Option<T>,
    ) -> Result<Self> {
        let k = channel.n_tags();
        check_len(k, combiners.len())?;
        check_len(k, thresholds.len())?;
        Ok(Self {
            combiners: combiners.combiners.clone(),
            h: (0..k).map(|j| channel.h_diag(j)).collect(),
            h_tilde: (0..k).map(|j| channel.h_tilde_diag(j)).collect(),
            thresholds,
            noise_var,
            tx_power,
            psd_limit,
        })
    }

    pub fn n_tones(&self) -> usize {
        self.h.first().map_or(0, |v| v.len())
    }

    /// Real-form conic program.
    pub fn build(&self) -> Result<ConicProblem<T>> {
        let n = self.n_tones();
        let nu = 2 * n;
        let nv = nu + 1;
        let tau = nu;
        let scale = (T::lit(2.0) * self.tx_power).sqrt();
        let sigma = self.noise_var.sqrt();
        let mut trips: Vec<(usize, usize, T)> = Vec::new();
        let mut h: Vec<T> = Vec::new();
        let mut cones = Vec::new();
        let mut a_rows: Vec<Vec<T>> = Vec::new();

        // coefficients of Re(v·w) and Im(v·w) in u for v·w = Σ v_n w_n
        let re_coef = |v: &[Cplx<T>]| -> Vec<T> {
            let mut r = vec![T::zero(); nu];
            for (i, z) in v.iter().enumerate() {
                r[i] = z.re * scale;
                r[n + i] = -z.im * scale;
            }
            r
        };
        let im_coef = |v: &[Cplx<T>]| -> Vec<T> {
            let mut r = vec![T::zero(); nu];
            for (i, z) in v.iter().enumerate() {
                r[i] = z.im * scale;
                r[n + i] = z.re * scale;
            }
            r
        };

        for (j, &theta) in self.thresholds.iter().enumerate() {
            if !(theta > T::zero()) {
                continue;
            }
            let g = &self.combiners[j];
            let gn = g.norm();
            let c: Vec<Cplx<T>> = (0..n).map(|i| g[i].conj() * self.h[j][i] / Cplx::new(sigma, T::zero())).collect();
            let d: Vec<Cplx<T>> = (0..n)
                .map(|i| g[i].conj() * self.h_tilde[j][i] / Cplx::new(sigma, T::zero()))
                .collect();
            let row0 = h.len();
            let it = T::one() / theta.sqrt();
            for (col, v) in re_coef(&c).into_iter().enumerate() {
                trips.push((row0, col, -v * it));
            }
            h.push(T::zero());
            h.push(gn);
            for (col, v) in re_coef(&d).into_iter().enumerate() {
                trips.push((row0 + 2, col, -v));
            }
            h.push(T::zero());
            for (col, v) in im_coef(&d).into_iter().enumerate() {
                trips.push((row0 + 3, col, -v));
            }
            h.push(T::zero());
            cones.push(Cone::Soc(4));
            let mut eq = im_coef(&c);
            let nrm = eq.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
            if nrm > T::zero() {
                eq.iter_mut().for_each(|x| *x /= nrm);
                a_rows.push(eq);
            }
        }

        // ‖u‖ ≤ 1
        let row0 = h.len();
        h.push(T::one());
        for i in 0..nu {
            trips.push((row0 + 1 + i, i, -T::one()));
            h.push(T::zero());
        }
        cones.push(Cone::Soc(nu + 1));

        // ‖u‖ ≤ τ
        let row0 = h.len();
        trips.push((row0, tau, -T::one()));
        h.push(T::zero());
        for i in 0..nu {
            trips.push((row0 + 1 + i, i, -T::one()));
            h.push(T::zero());
        }
        cones.push(Cone::Soc(nu + 1));

        if let Some(cap) = self.psd_limit {
            let r = (cap / self.tx_power).sqrt();
            for i in 0..n {
                let row0 = h.len();
                h.push(r);
                trips.push((row0 + 1, i, -T::one()));
                h.push(T::zero());
                trips.push((row0 + 2, n + i, -T::one()));
                h.push(T::zero());
                cones.push(Cone::Soc(3));
            }
        }

        let m = h.len();
        let mut c = DVector::zeros(nv);
        c[tau] = T::one();
        let a = DMatrix::from_fn(a_rows.len(), nv, |i, j| if j < nu { a_rows[i][j] } else { T::zero() });
        let b = DVector::zeros(a_rows.len());
        ConicProblem::new(c, SparseMatrix::from_triplets(m, nv, &trips), DVector::from_vec(h), a, b, cones)
    }

    pub fn to_dump(&self) -> Result<SocpDump> {
        Ok(SocpDump {
            combiners: self.combiners.iter().map(cvec_rows).collect(),
            h: self.h.iter().map(cvec_rows).collect(),
            h_tilde: self.h_tilde.iter().map(cvec_rows).collect(),
            thresholds: self.thresholds.iter().map(|t| t.as_f64()).collect(),
            noise_var: self.noise_var.as_f64(),
            tx_power: self.tx_power.as_f64(),
            psd_limit: self.psd_limit.map(|t| t.as_f64()),
            conic: self.build()?.to_dump(),
        })
    }
}

pub(crate) fn cvec_rows<T: Real>(v: &CVector<T>) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect()
}

/// JSON form of one feasibility step: complex data as `[re, im]` pairs plus
/// the real conic program actually solved.
#[derive(Clone, Debug, Serialize)]
pub struct SocpDump {
    pub combiners: Vec<Vec<[f64; 2]>>,
    pub h: Vec<Vec<[f64; 2]>>,
    pub h_tilde: Vec<Vec<[f64; 2]>>,
    pub thresholds: Vec<f64>,
    pub noise_var: f64,
    pub tx_power: f64,
    pub psd_limit: Option<f64>,
    pub conic: ProblemDump,
}

#[derive(Clone, Debug)]
pub struct SocpStepResult<T: Real> {
    pub status: ConicStatus<T>,
    /// Present when the solve is optimal.
    pub waveform: Option<Waveform<T>>,
}

impl<T: Real> SocpStepResult<T> {
    pub fn is_feasible(&self) -> bool {
        self.waveform.is_some()
    }
}

pub fn solve_socp_step<T: Real>(spec: &SocpStepSpec<T>) -> Result<SocpStepResult<T>> {
    solve_socp_step_with(spec, &InteriorPoint::default())
}

pub fn solve_socp_step_with<T: Real>(
    spec: &SocpStepSpec<T>,
    solver: &dyn ConicSolver<T>,
) -> Result<SocpStepResult<T>> {
    let problem = spec.build()?;
    let status = solver.solve(&problem);
    let waveform = (status.status == SolveStatus::Optimal).then(|| {
        let n = spec.n_tones();
        let scale = (T::lit(2.0) * spec.tx_power).sqrt();
        Waveform::new(CVector::from_fn(n, |i, _| {
            Cplx::new(status.x[i] * scale, status.x[n + i] * scale)
        }))
    });
    Ok(SocpStepResult { status, waveform })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::link::sinr;

    fn single(gain: Cplx<f64>) -> ChannelRealization<f64> {
        ChannelRealization::new(
            CMatrix::from_element(1, 1, gain),
            CMatrix::from_element(1, 1, Cplx::new(1.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn zero_thresholds_admit_zero_waveform() {
        let ch = single(Cplx::new(0.5, 0.5));
        let g = CombinerSet::new(vec![CVector::from_element(1, Cplx::new(1.0, 0.0))]).unwrap();
        let spec = SocpStepSpec::new(&ch, &g, vec![0.0], 0.1, 1.0, None).unwrap();
        let r = solve_socp_step(&spec).unwrap();
        assert!(r.is_feasible());
        assert!(r.waveform.unwrap().weights.norm() < 1e-6);
    }

    #[test]
    fn single_tone_capacity_bound() {
        let c = Cplx::new(0.3, -0.4);
        let ch = single(c);
        let g = CombinerSet::new(vec![CVector::from_element(1, Cplx::new(1.0, 0.0))]).unwrap();
        let (p, s2) = (2.0, 0.1);
        let cap = 2.0 * p * c.norm_sqr() / s2;
        let below = SocpStepSpec::new(&ch, &g, vec![0.99 * cap], s2, p, None).unwrap();
        let r = solve_socp_step(&below).unwrap();
        let w = r.waveform.expect("feasible below the bound");
        assert!(sinr(&w, g.get(0), &ch, 0, s2).unwrap() >= 0.99 * cap * (1.0 - 1e-7));
        let above = SocpStepSpec::new(&ch, &g, vec![1.01 * cap], s2, p, None).unwrap();
        let r = solve_socp_step(&above).unwrap();
        assert_eq!(r.status.status, SolveStatus::Infeasible);
    }
}
