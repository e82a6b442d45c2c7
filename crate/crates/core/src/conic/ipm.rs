//! Homogeneous self-dual primal-dual interior-point method with
//! Nesterov–Todd scaling and Mehrotra predictor-corrector steps.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::cones::{boundary_shift, jordan_div, jordan_prod, max_step, soc_wtw, unit, Block, Scaling};
use super::{Cone, ConicProblem, ConicSolver, ConicStatus, SolveStatus};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct InteriorPoint<T: Real> {
    pub feastol: T,
    pub abstol: T,
    pub reltol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for InteriorPoint<T> {
    fn default() -> Self {
        let tol = T::solver_tol();
        Self {
            feastol: tol,
            abstol: tol,
            reltol: tol,
            max_iter: 200,
        }
    }
}

impl<T: Real> ConicSolver<T> for InteriorPoint<T> {
    fn solve(&self, problem: &ConicProblem<T>) -> ConicStatus<T> {
        Solver::new(problem, *self).run()
    }
}

/// Per-cone column structure of `G`, computed once per problem.
enum BlockCols<T: Real> {
    /// rows of the orthant
    NonNeg { rows: std::ops::Range<usize> },
    /// columns touching the block and the dense `m × cols` slice
    Soc { cols: Vec<usize>, dense: DMatrix<T> },
    /// per touching column: local `(p, q, value)` entries
    Psd { cols: Vec<usize>, entries: Vec<Vec<(usize, usize, T)>> },
}

struct Kkt<T: Real> {
    hchol: Cholesky<T, Dyn>,
    schur: Option<Cholesky<T, Dyn>>,
    /// `H⁻¹ Aᵀ`
    hinv_at: DMatrix<T>,
}

struct Solver<'a, T: Real> {
    p: &'a ConicProblem<T>,
    opts: InteriorPoint<T>,
    structure: Vec<BlockCols<T>>,
    m: usize,
}

struct Iterate<T: Real> {
    x: DVector<T>,
    y: DVector<T>,
    s: DVector<T>,
    z: DVector<T>,
    tau: T,
    kappa: T,
}

impl<'a, T: Real> Solver<'a, T> {
    fn new(p: &'a ConicProblem<T>, opts: InteriorPoint<T>) -> Self {
        let mut structure = Vec::new();
        let mut off = 0;
        for k in &p.cones {
            let dim = k.dim();
            let range = off..off + dim;
            let cols_touching = || -> Vec<usize> {
                (0..p.n_vars())
                    .filter(|&j| p.g.col(j).any(|(r, _)| range.contains(&r)))
                    .collect()
            };
            let st = match *k {
                Cone::NonNeg(_) => BlockCols::NonNeg { rows: range.clone() },
                Cone::Soc(_) => {
                    let cols = cols_touching();
                    let mut dense = DMatrix::zeros(dim, cols.len());
                    for (c, &j) in cols.iter().enumerate() {
                        for (r, v) in p.g.col(j) {
                            if range.contains(&r) {
                                dense[(r - off, c)] = v;
                            }
                        }
                    }
                    BlockCols::Soc { cols, dense }
                }
                Cone::Psd(n) => {
                    let cols = cols_touching();
                    let entries = cols
                        .iter()
                        .map(|&j| {
                            p.g.col(j)
                                .filter(|(r, _)| range.contains(r))
                                .map(|(r, v)| ((r - off) % n, (r - off) / n, v))
                                .collect()
                        })
                        .collect();
                    BlockCols::Psd { cols, entries }
                }
            };
            structure.push(st);
            off += dim;
        }
        Self {
            p,
            opts,
            structure,
            m: off,
        }
    }

    fn factor(&self, w: &Scaling<T>) -> Option<Kkt<T>> {
        let n = self.p.n_vars();
        let mut h = DMatrix::<T>::zeros(n, n);
        for (st, (_, _, blk)) in self.structure.iter().zip(&w.blocks) {
            match (st, blk) {
                (BlockCols::NonNeg { rows }, Block::NonNeg { d }) => {
                    for (i, r) in rows.clone().enumerate() {
                        let d2 = d[i] * d[i];
                        let entries: Vec<_> = self.p.g.row(r).collect();
                        for &(a, va) in &entries {
                            for &(b, vb) in &entries {
                                h[(a, b)] += d2 * va * vb;
                            }
                        }
                    }
                }
                (BlockCols::Soc { cols, dense }, Block::Soc { beta, v }) => {
                    let wtw = soc_wtw(*beta, v);
                    let prod = dense.transpose() * wtw * dense;
                    for (a, &ja) in cols.iter().enumerate() {
                        for (b, &jb) in cols.iter().enumerate() {
                            h[(ja, jb)] += prod[(a, b)];
                        }
                    }
                }
                (BlockCols::Psd { cols, entries }, Block::Psd { p, .. }) => {
                    // ⟨U_a, P U_b P⟩ = Σ U_a[i,j] U_b[k,l] P[i,k] P[l,j]
                    for a in 0..cols.len() {
                        for b in a..cols.len() {
                            let mut acc = T::zero();
                            for &(i, j, ua) in &entries[a] {
                                for &(k, l, ub) in &entries[b] {
                                    acc += ua * ub * p[(i, k)] * p[(l, j)];
                                }
                            }
                            h[(cols[a], cols[b])] += acc;
                            if a != b {
                                h[(cols[b], cols[a])] += acc;
                            }
                        }
                    }
                }
                _ => unreachable!("structure matches scaling"),
            }
        }
        let hchol = match h.clone().cholesky() {
            Some(c) => c,
            None => {
                let scale = (0..n).fold(T::zero(), |a, i| a.max(h[(i, i)])).max(T::one());
                let mut hr = h;
                for i in 0..n {
                    hr[(i, i)] += T::lit(1e-13) * scale;
                }
                hr.cholesky()?
            }
        };
        let at = self.p.a.transpose();
        let hinv_at = hchol.solve(&at);
        let schur = if self.p.a.nrows() > 0 {
            Some((&self.p.a * &hinv_at).cholesky()?)
        } else {
            None
        };
        Some(Kkt { hchol, schur, hinv_at })
    }

    /// Solves `Aᵀy + Gᵀz = bx`, `Ax = by`, `Gx − W⁻¹W⁻ᵀz = bz` with the
    /// third block given and returned in scaled form: takes `W bz`, returns
    /// `(x, y, W⁻ᵀz)`.
    fn kkt_solve(
        &self,
        kkt: &Kkt<T>,
        w: &Scaling<T>,
        bx: &DVector<T>,
        by: &DVector<T>,
        wbz: &DVector<T>,
    ) -> (DVector<T>, DVector<T>, DVector<T>) {
        let solve_once = |bx: &DVector<T>, by: &DVector<T>, wbz: &DVector<T>| {
            let r1 = bx + self.p.g.tr_mul_vec(&w.wt(wbz));
            let hr1 = kkt.hchol.solve(&r1);
            let (x, y) = match &kkt.schur {
                Some(s) => {
                    let y = s.solve(&(&self.p.a * &hr1 - by));
                    let x = &hr1 - &kkt.hinv_at * &y;
                    (x, y)
                }
                None => (hr1, DVector::zeros(0)),
            };
            let zt = w.w(&self.p.g.mul_vec(&x)) - wbz;
            (x, y, zt)
        };
        let (mut x, mut y, mut zt) = solve_once(bx, by, wbz);
        for _ in 0..2 {
            let ex = bx - (self.p.a.transpose() * &y + self.p.g.tr_mul_vec(&w.wt(&zt)));
            let ey = by - &self.p.a * &x;
            let ez = wbz - (w.w(&self.p.g.mul_vec(&x)) - &zt);
            let (dx, dy, dz) = solve_once(&ex, &ey, &ez);
            x += dx;
            y += dy;
            zt += dz;
        }
        (x, y, zt)
    }

    fn run(&self) -> ConicStatus<T> {
        let p = self.p;
        let cones = &p.cones;
        let n = p.n_vars();
        let nb = p.b.len();
        let m = self.m;
        let zero = T::zero();
        let one = T::one();
        let degree = T::of_usize(p.degree());
        let e = unit::<T>(cones, m);

        let trouble = |it: &Iterate<T>, k: usize| ConicStatus {
            status: SolveStatus::NumericalTrouble,
            objective: p.c.dot(&it.x) / it.tau,
            x: &it.x / it.tau,
            s: &it.s / it.tau,
            y: &it.y / it.tau,
            z: &it.z / it.tau,
            primal_residual: T::max_value().expect("bounded"),
            dual_residual: T::max_value().expect("bounded"),
            gap: T::max_value().expect("bounded"),
            iterations: k,
        };

        // Starting point from two least-squares solves with W = I.
        let ident = Scaling::identity(cones, m);
        let mut it = Iterate {
            x: DVector::zeros(n),
            y: DVector::zeros(nb),
            s: e.clone(),
            z: e.clone(),
            tau: one,
            kappa: one,
        };
        let Some(kkt0) = self.factor(&ident) else {
            return trouble(&it, 0);
        };
        let (x0, _, zz) = self.kkt_solve(&kkt0, &ident, &DVector::zeros(n), &p.b, &p.h);
        let (_, y0, z0) = self.kkt_solve(&kkt0, &ident, &(-&p.c), &DVector::zeros(nb), &DVector::zeros(m));
        it.x = x0;
        it.y = y0;
        it.s = -zz;
        it.z = z0;
        for v in [&mut it.s, &mut it.z] {
            let t = boundary_shift(cones, v);
            let nrm = v.norm().max(one);
            if t >= -T::lit(1e-8) * nrm {
                *v += &e * (one + t);
            }
        }

        let resx0 = p.c.norm().max(one);
        let resy0 = p.b.norm().max(one);
        let resz0 = p.h.norm().max(one);
        let tol = self.opts.feastol;
        let inaccurate = tol.sqrt();
        let mut best: Option<(T, ConicStatus<T>)> = None;
        let mut infeasible: Option<(T, ConicStatus<T>)> = None;

        for k in 0..=self.opts.max_iter {
            let hrx = -(p.a.transpose() * &it.y + p.g.tr_mul_vec(&it.z));
            let hry = &p.a * &it.x;
            let hrz = &it.s + p.g.mul_vec(&it.x);
            let rx = -&hrx + &p.c * it.tau;
            let ry = &hry - &p.b * it.tau;
            let rz = &hrz - &p.h * it.tau;
            let cx = p.c.dot(&it.x);
            let by = p.b.dot(&it.y);
            let hz = p.h.dot(&it.z);
            let rt = it.kappa + cx + by + hz;
            let tau = it.tau;

            let pcost = cx / tau;
            let dcost = -(by + hz) / tau;
            let gap = it.s.dot(&it.z) / (tau * tau);
            let pres = (ry.norm() / tau / resy0).max(rz.norm() / tau / resz0);
            let dres = rx.norm() / tau / resx0;
            let relgap = if pcost < zero {
                gap / -pcost
            } else if dcost > zero {
                gap / dcost
            } else {
                T::max_value().expect("bounded")
            };
            let pinf = if hz + by < zero {
                hrx.norm() / resx0 / -(hz + by)
            } else {
                T::max_value().expect("bounded")
            };
            let dinf = if cx < zero {
                (hry.norm() / resy0).max(hrz.norm() / resz0) / -cx
            } else {
                T::max_value().expect("bounded")
            };

            let snapshot = |status: SolveStatus| ConicStatus {
                status,
                objective: pcost,
                x: &it.x / tau,
                s: &it.s / tau,
                y: &it.y / tau,
                z: &it.z / tau,
                primal_residual: pres,
                dual_residual: dres,
                gap: relgap.min(gap),
                iterations: k,
            };

            let certificate = || ConicStatus {
                status: SolveStatus::Infeasible,
                objective: T::max_value().expect("bounded"),
                x: &it.x / tau,
                s: &it.s / tau,
                y: &it.y / -(hz + by),
                z: &it.z / -(hz + by),
                primal_residual: pres,
                dual_residual: pinf,
                gap: relgap.min(gap),
                iterations: k,
            };
            if !(pres.is_finite() && dres.is_finite() && gap.is_finite()) {
                return match (best, infeasible) {
                    (Some((_, st)), _) | (None, Some((_, st))) => st,
                    (None, None) => trouble(&it, k),
                };
            }
            if pres <= tol && dres <= tol && (gap <= self.opts.abstol || relgap <= self.opts.reltol) {
                return snapshot(SolveStatus::Optimal);
            }
            if pinf <= tol {
                return certificate();
            }
            // certificate at reduced accuracy, used if the method stalls
            if pinf <= inaccurate && infeasible.as_ref().is_none_or(|(b, _)| pinf < *b) {
                infeasible = Some((pinf, certificate()));
            }
            if dinf <= tol {
                return snapshot(SolveStatus::NumericalTrouble);
            }
            // best nearly-optimal iterate, reported if the method stalls
            let near = pres <= T::lit(10.0) * tol
                && dres <= T::lit(10.0) * tol
                && (gap <= T::lit(1e3) * self.opts.abstol || relgap <= T::lit(1e3) * self.opts.reltol);
            if near {
                let score = relgap.min(gap);
                if best.as_ref().is_none_or(|(b, _)| score < *b) {
                    best = Some((score, snapshot(SolveStatus::Optimal)));
                }
            }
            let cur = snapshot(SolveStatus::NumericalTrouble);
            let fallback = |best: Option<(T, ConicStatus<T>)>, status: SolveStatus| match (best, infeasible.clone()) {
                (Some((_, st)), _) | (None, Some((_, st))) => st,
                (None, None) => ConicStatus { status, ..cur.clone() },
            };
            if k == self.opts.max_iter {
                return fallback(best, SolveStatus::MaxIter);
            }
            // τ vanishing against κ: the iterate only drifts along the ray
            if infeasible.is_some() && it.tau < tol * tol * it.kappa {
                return fallback(best, SolveStatus::NumericalTrouble);
            }

            let Some(w) = Scaling::compute(cones, &it.s, &it.z) else {
                return fallback(best, SolveStatus::NumericalTrouble);
            };
            let Some(kkt) = self.factor(&w) else {
                return fallback(best, SolveStatus::NumericalTrouble);
            };
            let lam = &w.lambda;
            let mu = (it.s.dot(&it.z) + it.tau * it.kappa) / (degree + one);
            let (x1, y1, zt1) = self.kkt_solve(&kkt, &w, &(-&p.c), &p.b, &w.w(&p.h));
            let z1 = w.wt(&zt1);
            let denom = -it.kappa / it.tau + p.c.dot(&x1) + p.b.dot(&y1) + p.h.dot(&z1);
            let lam_sq = jordan_prod(cones, lam, lam);

            let mut affine: Option<(DVector<T>, DVector<T>, T, T)> = None;
            let mut sigma = zero;
            let mut stepped = false;
            for phase in 0..2 {
                let (eta, rhs_c, rhs_t) = match &affine {
                    None => (one, -&lam_sq, -it.tau * it.kappa),
                    Some((dsa, dza, dta, dka)) => {
                        let corr = jordan_prod(cones, dsa, dza);
                        (
                            one - sigma,
                            -&lam_sq - corr + &e * (sigma * mu),
                            -it.tau * it.kappa - *dta * *dka + sigma * mu,
                        )
                    }
                };
                let ldiv = jordan_div(cones, lam, &rhs_c);
                let bx = -&rx * eta;
                let by_ = -&ry * eta;
                let wbz = -w.w(&rz) * eta - &ldiv;
                let (x2, y2, zt2) = self.kkt_solve(&kkt, &w, &bx, &by_, &wbz);
                let z2 = w.wt(&zt2);
                let dtau = (-eta * rt - rhs_t / it.tau - (p.c.dot(&x2) + p.b.dot(&y2) + p.h.dot(&z2))) / denom;
                let dx = x2 + &x1 * dtau;
                let dy = y2 + &y1 * dtau;
                let dz = z2 + &z1 * dtau;
                let dkappa = (rhs_t - it.kappa * dtau) / it.tau;
                let dzt = zt2 + &zt1 * dtau;
                let dst = ldiv - &dzt;

                let mut amax = max_step(cones, lam, &dst).min(max_step(cones, lam, &dzt));
                if dtau < zero {
                    amax = amax.min(-it.tau / dtau);
                }
                if dkappa < zero {
                    amax = amax.min(-it.kappa / dkappa);
                }
                if !amax.is_finite() && amax != T::max_value().expect("bounded") {
                    return fallback(best, SolveStatus::NumericalTrouble);
                }
                if phase == 0 {
                    let a = amax.min(one);
                    sigma = (one - a).powi(3);
                    affine = Some((dst, dzt, dtau, dkappa));
                } else {
                    let a = (T::lit(0.99) * amax).min(one);
                    if !(a > T::lit(1e-12)) {
                        break;
                    }
                    let ds = w.winv(&dst);
                    it.x += dx * a;
                    it.y += dy * a;
                    it.z += dz * a;
                    it.s += ds * a;
                    it.tau += dtau * a;
                    it.kappa += dkappa * a;
                    stepped = true;
                }
            }
            if !stepped {
                return fallback(best, SolveStatus::NumericalTrouble);
            }
        }
        unreachable!("loop returns at max_iter")
    }
}
