//! Nesterov–Todd scalings and Jordan-algebra helpers for the supported cones.
//!
//! Convention: `W s = W⁻ᵀ z = λ`.

use nalgebra::{DMatrix, DVector};

use super::Cone;
use crate::scalar::Real;

fn blocks(cones: &[Cone]) -> impl Iterator<Item = (usize, Cone)> + '_ {
    cones.iter().scan(0usize, |off, &k| {
        let o = *off;
        *off += k.dim();
        Some((o, k))
    })
}

fn psd_block<T: Real>(x: &DVector<T>, off: usize, n: usize) -> DMatrix<T> {
    let m = DMatrix::from_column_slice(n, n, &x.as_slice()[off..off + n * n]);
    (&m + m.transpose()) * T::lit(0.5)
}

fn put_block<T: Real>(out: &mut DVector<T>, off: usize, m: &DMatrix<T>) {
    out.as_mut_slice()[off..off + m.len()].copy_from_slice(m.as_slice());
}

/// Identity element of the cone product.
pub(crate) fn unit<T: Real>(cones: &[Cone], m: usize) -> DVector<T> {
    let mut e = DVector::zeros(m);
    for (off, k) in blocks(cones) {
        match k {
            Cone::NonNeg(d) => (0..d).for_each(|i| e[off + i] = T::one()),
            Cone::Soc(_) => e[off] = T::one(),
            Cone::Psd(n) => (0..n).for_each(|i| e[off + i * n + i] = T::one()),
        }
    }
    e
}

/// Smallest `t` with `x + t e` on the cone boundary, i.e. minus the smallest
/// "eigenvalue" of `x` over all blocks.
pub(crate) fn boundary_shift<T: Real>(cones: &[Cone], x: &DVector<T>) -> T {
    let mut t = T::min_value().expect("bounded scalar");
    for (off, k) in blocks(cones) {
        let v = match k {
            Cone::NonNeg(d) => (0..d).fold(t, |a, i| a.max(-x[off + i])),
            Cone::Soc(d) => x.rows(off + 1, d - 1).norm() - x[off],
            Cone::Psd(n) => {
                let eig = psd_block(x, off, n).symmetric_eigen();
                -eig.eigenvalues.iter().copied().fold(T::max_value().expect("bounded"), T::min)
            }
        };
        t = t.max(v);
    }
    t
}

/// `u ∘ v`
pub(crate) fn jordan_prod<T: Real>(cones: &[Cone], u: &DVector<T>, v: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(u.len());
    for (off, k) in blocks(cones) {
        match k {
            Cone::NonNeg(d) => (0..d).for_each(|i| out[off + i] = u[off + i] * v[off + i]),
            Cone::Soc(d) => {
                out[off] = u.rows(off, d).dot(&v.rows(off, d));
                for i in 1..d {
                    out[off + i] = u[off] * v[off + i] + v[off] * u[off + i];
                }
            }
            Cone::Psd(n) => {
                let a = psd_block(u, off, n);
                let b = psd_block(v, off, n);
                let p = (&a * &b + &b * &a) * T::lit(0.5);
                put_block(&mut out, off, &p);
            }
        }
    }
    out
}

/// Solves `λ ∘ x = r` for `x`; PSD blocks of `λ` must be diagonal.
pub(crate) fn jordan_div<T: Real>(cones: &[Cone], lambda: &DVector<T>, r: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(r.len());
    for (off, k) in blocks(cones) {
        match k {
            Cone::NonNeg(d) => (0..d).for_each(|i| out[off + i] = r[off + i] / lambda[off + i]),
            Cone::Soc(d) => {
                let l0 = lambda[off];
                let l1 = lambda.rows(off + 1, d - 1);
                let r1 = r.rows(off + 1, d - 1);
                let det = l0 * l0 - l1.norm_squared();
                let x0 = (l0 * r[off] - l1.dot(&r1)) / det;
                out[off] = x0;
                for i in 1..d {
                    out[off + i] = (r[off + i] - x0 * lambda[off + i]) / l0;
                }
            }
            Cone::Psd(n) => {
                let two = T::lit(2.0);
                for q in 0..n {
                    for p in 0..n {
                        let li = lambda[off + p * n + p];
                        let lj = lambda[off + q * n + q];
                        out[off + q * n + p] = two * r[off + q * n + p] / (li + lj);
                    }
                }
            }
        }
    }
    out
}

/// Largest `α ≥ 0` (possibly infinite) with `λ + α d ∈ K` for interior `λ`
/// whose PSD blocks are diagonal.
pub(crate) fn max_step<T: Real>(cones: &[Cone], lambda: &DVector<T>, d: &DVector<T>) -> T {
    let inf = T::max_value().expect("bounded");
    let mut alpha = inf;
    for (off, k) in blocks(cones) {
        let a = match k {
            Cone::NonNeg(m) => (0..m).fold(inf, |a, i| {
                if d[off + i] < T::zero() {
                    a.min(-lambda[off + i] / d[off + i])
                } else {
                    a
                }
            }),
            Cone::Soc(m) => soc_step(lambda.rows(off, m).into_owned(), d.rows(off, m).into_owned()),
            Cone::Psd(n) => {
                let dm = psd_block(d, off, n);
                let isq: Vec<T> = (0..n).map(|i| T::one() / lambda[off + i * n + i].sqrt()).collect();
                let sc = DMatrix::from_fn(n, n, |p, q| dm[(p, q)] * isq[p] * isq[q]);
                let lmin = sc
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(inf, T::min);
                if lmin < T::zero() {
                    -T::one() / lmin
                } else {
                    inf
                }
            }
        };
        alpha = alpha.min(a);
    }
    alpha
}

fn soc_step<T: Real>(l: DVector<T>, d: DVector<T>) -> T {
    let inf = T::max_value().expect("bounded");
    let m = l.len();
    let l1 = l.rows(1, m - 1);
    let d1 = d.rows(1, m - 1);
    let a = d[0] * d[0] - d1.norm_squared();
    let b = T::lit(2.0) * (l[0] * d[0] - l1.dot(&d1));
    let c = l[0] * l[0] - l1.norm_squared();
    let mut best = inf;
    let mut consider = |r: T| {
        if r > T::zero() && r < best {
            best = r;
        }
    };
    if a == T::zero() {
        if b < T::zero() {
            consider(-c / b);
        }
    } else {
        let disc = b * b - T::lit(4.0) * a * c;
        if disc >= T::zero() {
            let sq = disc.sqrt();
            let q = if b >= T::zero() { -(b + sq) / T::lit(2.0) } else { (sq - b) / T::lit(2.0) };
            if q != T::zero() {
                consider(q / a);
                consider(c / q);
            }
        }
    }
    best
}

#[derive(Clone, Debug)]
pub(crate) enum Block<T: Real> {
    NonNeg { d: DVector<T> },
    /// `W = β (2 v vᵀ − J)`
    Soc { beta: T, v: DVector<T> },
    /// `W S = R⁻¹ S R⁻ᵀ`, `WᵀW U = P U P` with `P = (R Rᵀ)⁻¹`.
    Psd { r: DMatrix<T>, rinv: DMatrix<T>, p: DMatrix<T> },
}

#[derive(Clone, Debug)]
pub(crate) struct Scaling<T: Real> {
    pub blocks: Vec<(usize, Cone, Block<T>)>,
    pub lambda: DVector<T>,
}

fn soc_w_dense<T: Real>(beta: T, v: &DVector<T>) -> DMatrix<T> {
    let m = v.len();
    let two = T::lit(2.0);
    DMatrix::from_fn(m, m, |i, j| {
        let jj = if i != j {
            T::zero()
        } else if i == 0 {
            T::one()
        } else {
            -T::one()
        };
        beta * (two * v[i] * v[j] - jj)
    })
}

fn soc_winv_dense<T: Real>(beta: T, v: &DVector<T>) -> DMatrix<T> {
    // (1/β)(2 J v vᵀ J − J)
    let mut jv = v.clone();
    for i in 1..jv.len() {
        jv[i] = -jv[i];
    }
    let m = v.len();
    let two = T::lit(2.0);
    DMatrix::from_fn(m, m, |i, j| {
        let jj = if i != j {
            T::zero()
        } else if i == 0 {
            T::one()
        } else {
            -T::one()
        };
        (two * jv[i] * jv[j] - jj) / beta
    })
}

fn jnorm<T: Real>(x: &DVector<T>) -> Option<T> {
    let q = x[0] * x[0] - x.rows(1, x.len() - 1).norm_squared();
    if q > T::zero() && x[0] > T::zero() {
        Some(q.sqrt())
    } else {
        None
    }
}

impl<T: Real> Scaling<T> {
    pub fn identity(cones: &[Cone], m: usize) -> Self {
        let blocks = blocks(cones)
            .map(|(off, k)| {
                let b = match k {
                    Cone::NonNeg(d) => Block::NonNeg {
                        d: DVector::from_element(d, T::one()),
                    },
                    Cone::Soc(d) => {
                        let mut v = DVector::zeros(d);
                        v[0] = T::one();
                        Block::Soc { beta: T::one(), v }
                    }
                    Cone::Psd(n) => Block::Psd {
                        r: DMatrix::identity(n, n),
                        rinv: DMatrix::identity(n, n),
                        p: DMatrix::identity(n, n),
                    },
                };
                (off, k, b)
            })
            .collect();
        Self {
            blocks,
            lambda: unit(cones, m),
        }
    }

    /// NT scaling at interior `(s, z)`; `None` if either leaves the cone.
    pub fn compute(cones: &[Cone], s: &DVector<T>, z: &DVector<T>) -> Option<Self> {
        let mut out = Vec::with_capacity(cones.len());
        let mut lambda = DVector::zeros(s.len());
        for (off, k) in blocks(cones) {
            let b = match k {
                Cone::NonNeg(m) => {
                    let mut d = DVector::zeros(m);
                    for i in 0..m {
                        let (si, zi) = (s[off + i], z[off + i]);
                        if !(si > T::zero() && zi > T::zero()) {
                            return None;
                        }
                        d[i] = (zi / si).sqrt();
                        lambda[off + i] = (si * zi).sqrt();
                    }
                    Block::NonNeg { d }
                }
                Cone::Soc(m) => {
                    let sk = s.rows(off, m).into_owned();
                    let zk = z.rows(off, m).into_owned();
                    let sn = jnorm(&sk)?;
                    let zn = jnorm(&zk)?;
                    let beta = (zn / sn).sqrt();
                    let sb = sk / sn;
                    let zb = zk / zn;
                    let gamma = ((T::one() + sb.dot(&zb)) / T::lit(2.0)).sqrt();
                    let mut w = DVector::zeros(m);
                    w[0] = (zb[0] + sb[0]) / (T::lit(2.0) * gamma);
                    for i in 1..m {
                        w[i] = (zb[i] - sb[i]) / (T::lit(2.0) * gamma);
                    }
                    let mut v = w;
                    v[0] += T::one();
                    let nv = (T::lit(2.0) * v[0]).sqrt();
                    v /= nv;
                    let wm = soc_w_dense(beta, &v);
                    let l = wm * s.rows(off, m);
                    lambda.rows_mut(off, m).copy_from(&l);
                    Block::Soc { beta, v }
                }
                Cone::Psd(n) => {
                    let ls = psd_block(s, off, n).cholesky()?.unpack();
                    let lz = psd_block(z, off, n).cholesky()?.unpack();
                    let svd = (lz.transpose() * &ls).svd(true, true);
                    let u = svd.u?;
                    let vt = svd.v_t?;
                    let sv = svd.singular_values;
                    if sv.iter().any(|&x| !(x > T::zero())) {
                        return None;
                    }
                    let isq: Vec<T> = sv.iter().map(|&x| T::one() / x.sqrt()).collect();
                    // R = L_s V Λ^{-1/2},  R⁻¹ = Λ^{-1/2} Uᵀ L_zᵀ
                    let mut r = &ls * vt.transpose();
                    for (j, &f) in isq.iter().enumerate() {
                        r.column_mut(j).scale_mut(f);
                    }
                    let mut rinv = u.transpose() * lz.transpose();
                    for (i, &f) in isq.iter().enumerate() {
                        rinv.row_mut(i).scale_mut(f);
                    }
                    let p = rinv.transpose() * &rinv;
                    for i in 0..n {
                        lambda[off + i * n + i] = sv[i];
                    }
                    Block::Psd { r, rinv, p }
                }
            };
            out.push((off, k, b));
        }
        Some(Self { blocks: out, lambda })
    }

    fn apply(&self, x: &DVector<T>, op: Op) -> DVector<T> {
        let mut out = DVector::zeros(x.len());
        for (off, k, b) in &self.blocks {
            let off = *off;
            match (b, *k) {
                (Block::NonNeg { d }, Cone::NonNeg(m)) => {
                    for i in 0..m {
                        out[off + i] = match op {
                            Op::W | Op::Wt => d[i] * x[off + i],
                            Op::Winv | Op::Winvt => x[off + i] / d[i],
                            Op::WtW => d[i] * d[i] * x[off + i],
                        };
                    }
                }
                (Block::Soc { beta, v }, Cone::Soc(m)) => {
                    let mat = match op {
                        Op::W | Op::Wt => soc_w_dense(*beta, v),
                        Op::Winv | Op::Winvt => soc_winv_dense(*beta, v),
                        Op::WtW => {
                            let w = soc_w_dense(*beta, v);
                            &w * &w
                        }
                    };
                    let y = mat * x.rows(off, m);
                    out.rows_mut(off, m).copy_from(&y);
                }
                (Block::Psd { r, rinv, p }, Cone::Psd(n)) => {
                    let xm = psd_block(x, off, n);
                    let y = match op {
                        Op::W => rinv * xm * rinv.transpose(),
                        Op::Winv => r * xm * r.transpose(),
                        Op::Wt => rinv.transpose() * xm * rinv,
                        Op::Winvt => r.transpose() * xm * r,
                        Op::WtW => p * xm * p,
                    };
                    put_block(&mut out, off, &y);
                }
                _ => unreachable!("scaling block matches its cone"),
            }
        }
        out
    }

    pub fn w(&self, x: &DVector<T>) -> DVector<T> {
        self.apply(x, Op::W)
    }

    pub fn winv(&self, x: &DVector<T>) -> DVector<T> {
        self.apply(x, Op::Winv)
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn winvt(&self, x: &DVector<T>) -> DVector<T> {
        self.apply(x, Op::Winvt)
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn wtw(&self, x: &DVector<T>) -> DVector<T> {
        self.apply(x, Op::WtW)
    }

    pub fn wt(&self, x: &DVector<T>) -> DVector<T> {
        self.apply(x, Op::Wt)
    }
}

#[derive(Clone, Copy)]
#[cfg_attr(not(test), allow(dead_code))]
enum Op {
    W,
    Winv,
    Wt,
    Winvt,
    WtW,
}

/// Dense `WᵀW` of an SOC block.
pub(crate) fn soc_wtw<T: Real>(beta: T, v: &DVector<T>) -> DMatrix<T> {
    let w = soc_w_dense(beta, v);
    &w * &w
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn interior(cones: &[Cone], rng: &mut ChaCha8Rng) -> DVector<f64> {
        let m: usize = cones.iter().map(Cone::dim).sum();
        let mut x = DVector::zeros(m);
        for (off, k) in blocks(cones) {
            match k {
                Cone::NonNeg(d) => (0..d).for_each(|i| x[off + i] = rng.random::<f64>() + 0.1),
                Cone::Soc(d) => {
                    let mut nrm = 0.0;
                    for i in 1..d {
                        x[off + i] = rng.random::<f64>() - 0.5;
                        nrm += x[off + i] * x[off + i];
                    }
                    x[off] = nrm.sqrt() + 0.1 + rng.random::<f64>();
                }
                Cone::Psd(n) => {
                    let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
                    let p = &b * b.transpose() + DMatrix::identity(n, n) * 0.1;
                    put_block(&mut x, off, &p);
                }
            }
        }
        x
    }

    fn cones() -> Vec<Cone> {
        vec![Cone::NonNeg(3), Cone::Soc(4), Cone::Psd(3), Cone::Soc(2)]
    }

    #[test]
    fn nt_scaling_maps_s_and_z_to_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let k = cones();
            let s = interior(&k, &mut rng);
            let z = interior(&k, &mut rng);
            let w = Scaling::compute(&k, &s, &z).unwrap();
            let ws = w.w(&s);
            let wz = w.winvt(&z);
            assert!((&ws - &w.lambda).norm() < 1e-10 * (1.0 + ws.norm()));
            assert!((&wz - &w.lambda).norm() < 1e-10 * (1.0 + wz.norm()));
        }
    }

    #[test]
    fn scaling_inverses_and_adjoints_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = cones();
        let s = interior(&k, &mut rng);
        let z = interior(&k, &mut rng);
        let w = Scaling::compute(&k, &s, &z).unwrap();
        // symmetric test vectors
        let x = interior(&k, &mut rng);
        let y = interior(&k, &mut rng);
        assert!((w.winv(&w.w(&x)) - &x).norm() < 1e-10);
        assert!((w.w(&x).dot(&y) - x.dot(&w.wt(&y))).abs() < 1e-10);
        assert!((w.winvt(&w.wt(&x)) - &x).norm() < 1e-10);
        assert!((w.wtw(&x) - w.wt(&w.w(&x))).norm() < 1e-10);
    }

    #[test]
    fn jordan_division_inverts_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = cones();
        let s = interior(&k, &mut rng);
        let z = interior(&k, &mut rng);
        let lam = Scaling::compute(&k, &s, &z).unwrap().lambda;
        let x = interior(&k, &mut rng);
        let r = jordan_prod(&k, &lam, &x);
        assert!((jordan_div(&k, &lam, &r) - x).norm() < 1e-10);
    }

    #[test]
    fn max_step_lands_on_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = cones();
        let s = interior(&k, &mut rng);
        let z = interior(&k, &mut rng);
        let lam = Scaling::compute(&k, &s, &z).unwrap().lambda;
        let d = DVector::from_fn(lam.len(), |_, _| rng.random::<f64>() - 0.5);
        // keep PSD direction symmetric
        let d = {
            let mut d = d;
            for (off, c) in blocks(&k) {
                if let Cone::Psd(n) = c {
                    let m = psd_block(&d, off, n);
                    put_block(&mut d, off, &m);
                }
            }
            d * 10.0
        };
        let a = max_step(&k, &lam, &d);
        assert!(a.is_finite());
        let at = &lam + &d * a;
        assert!(boundary_shift(&k, &at).abs() < 1e-8);
        assert!(boundary_shift(&k, &(&lam + &d * (0.999 * a))) < 0.0);
    }
}
