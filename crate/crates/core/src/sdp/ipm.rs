//! Infeasible primal-dual interior-point method for real block-diagonal SDPs
//! with an additional nonnegative orthant block.
//!
//! Primal: `min <C, X>  s.t.  A(X) = b,  X ⪰ 0`.
//! Dual:   `max bᵀy     s.t.  Aᵀ(y) + Z = C,  Z ⪰ 0`.
//!
//! Search directions use the HKM scaling with a Mehrotra predictor-corrector.

use nalgebra::{DMatrix, DVector};

use crate::hermitian::{symmetric_eigen, symmetric_min_eigenvalue};

pub const GAP_TOL: f64 = 1e-7;
pub const FEAS_TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 200;
const STEP_FRACTION: f64 = 0.98;
/// After convergence, iterate at most this many more steps toward `REFINE_GAP`.
const REFINE_ITERS: usize = 8;
const REFINE_GAP: f64 = 1e-10;
/// `|Aᵀy + Z| / bᵀy` below this identifies a primal infeasibility ray.
const INFEASIBLE_RAY_TOL: f64 = 1e-8;

/// One equality row `Σ_k <A_k, X_k> + Σ_l a_l x_l = b`.
#[derive(Clone, Debug)]
pub(crate) struct RealRow {
    /// Dense symmetric coefficient per PSD block, `None` when zero.
    pub blocks: Vec<Option<DMatrix<f64>>>,
    /// Sparse orthant coefficients.
    pub lp: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct RealSdp {
    pub dims: Vec<usize>,
    pub lp_dim: usize,
    pub rows: Vec<RealRow>,
    pub c_blocks: Vec<DMatrix<f64>>,
    pub c_lp: DVector<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RealStatus {
    Optimal,
    Infeasible,
    Failed,
}

#[derive(Clone, Debug)]
pub(crate) struct RealSolution {
    pub status: RealStatus,
    pub x_blocks: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

#[derive(Clone)]
struct Point {
    x: Vec<DMatrix<f64>>,
    xl: DVector<f64>,
    y: DVector<f64>,
    z: Vec<DMatrix<f64>>,
    zl: DVector<f64>,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dy: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
    dzl: DVector<f64>,
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

impl RealSdp {
    fn m(&self) -> usize {
        self.rows.len()
    }

    fn b(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.rows.iter().map(|r| r.rhs))
    }

    /// `A(X)` for possibly nonsymmetric block arguments.
    fn apply(&self, x: &[DMatrix<f64>], xl: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.rows.iter().map(|row| {
                let mut acc = 0.0;
                for (k, a) in row.blocks.iter().enumerate() {
                    if let Some(a) = a {
                        acc += inner(a, &x[k]);
                    }
                }
                for &(l, v) in &row.lp {
                    acc += v * xl[l];
                }
                acc
            }),
        )
    }

    /// `Aᵀ(y)`.
    fn adjoint(&self, y: &DVector<f64>) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let mut blocks: Vec<DMatrix<f64>> = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        let mut lp = DVector::zeros(self.lp_dim);
        for (row, &yi) in self.rows.iter().zip(y.iter()) {
            for (k, a) in row.blocks.iter().enumerate() {
                if let Some(a) = a {
                    blocks[k] += a * yi;
                }
            }
            for &(l, v) in &row.lp {
                lp[l] += v * yi;
            }
        }
        (blocks, lp)
    }

    fn c_norm(&self) -> f64 {
        (self.c_blocks.iter().map(|c| c.norm_squared()).sum::<f64>() + self.c_lp.norm_squared()).sqrt()
    }

    fn primal_objective(&self, p: &Point) -> f64 {
        self.c_blocks.iter().zip(&p.x).map(|(c, x)| inner(c, x)).sum::<f64>() + self.c_lp.dot(&p.xl)
    }

    fn dual_residual(&self, p: &Point) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let (aty, atyl) = self.adjoint(&p.y);
        let rd = self.c_blocks.iter().zip(&aty).zip(&p.z).map(|((c, a), z)| c - a - z).collect();
        let rdl = &self.c_lp - atyl - &p.zl;
        (rd, rdl)
    }

    fn n_total(&self) -> f64 {
        (self.dims.iter().sum::<usize>() + self.lp_dim) as f64
    }
}

impl RealSdp {
    /// Primal objective, relative gap and relative primal residual of `p`
    /// against a fixed dual objective.
    fn primal_metrics(&self, p: &Point, dobj: f64) -> (f64, f64, f64) {
        let b = self.b();
        let pobj = self.primal_objective(p);
        let gap = complementarity(p).max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs());
        let pinf = (&b - self.apply(&p.x, &p.xl)).norm() / (1.0 + b.norm());
        (pobj, gap, pinf)
    }

    /// Gram matrix `A Aᵀ` of the constraint rows.
    fn gram(&self) -> DMatrix<f64> {
        let m = self.m();
        let mut g = DMatrix::zeros(m, m);
        for (i, ri) in self.rows.iter().enumerate() {
            for (j, rj) in self.rows.iter().enumerate().skip(i) {
                let mut v = 0.0;
                for (a, b) in ri.blocks.iter().zip(&rj.blocks) {
                    if let (Some(a), Some(b)) = (a, b) {
                        v += inner(a, b);
                    }
                }
                for &(li, vi) in &ri.lp {
                    for &(lj, vj) in &rj.lp {
                        if li == lj {
                            v += vi * vj;
                        }
                    }
                }
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

/// Minimum-norm correction onto `A(X) = b`. Accepted only if every block
/// stays PSD within the feasibility tolerance.
fn polish(prob: &RealSdp, p: &Point, rp: &DVector<f64>) -> Option<Point> {
    let w = prob.gram().svd(true, true).solve(rp, 1e-12).ok()?;
    let (dx, dxl) = prob.adjoint(&w);
    let q = Point { x: p.x.iter().zip(&dx).map(|(x, d)| sym(&(x + d))).collect(), xl: &p.xl + dxl, ..p.clone() };
    let psd = q.x.iter().all(|x| x.nrows() == 0 || min_eig(x).is_some_and(|v| v >= -FEAS_TOL));
    (psd && q.xl.iter().all(|&v| v >= -FEAS_TOL)).then_some(q)
}

fn complementarity(p: &Point) -> f64 {
    p.x.iter().zip(&p.z).map(|(x, z)| inner(x, z)).sum::<f64>() + p.xl.dot(&p.zl)
}

/// Largest step `α` keeping `x + α dx ⪰ 0`.
fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let n = x.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    let Some(chol) = x.clone().cholesky() else {
        return max_step_bisect(x, dx);
    };
    let l = chol.l();
    // W = L⁻¹ dX L⁻ᵀ
    let Some(linv_dx) = l.solve_lower_triangular(dx) else {
        return max_step_bisect(x, dx);
    };
    let Some(w) = l.solve_lower_triangular(&linv_dx.transpose()) else {
        return max_step_bisect(x, dx);
    };
    match min_eig(&sym(&w)) {
        Some(lmin) if lmin < 0.0 => -1.0 / lmin,
        Some(_) => f64::INFINITY,
        None => max_step_bisect(x, dx),
    }
}

fn min_eig(m: &DMatrix<f64>) -> Option<f64> {
    let n = m.nrows();
    let data: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| m[(i, j)])).collect();
    symmetric_min_eigenvalue(&data, n).ok()
}

/// Fallback for numerically singular `x`: bisect on the smallest eigenvalue.
fn max_step_bisect(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let floor = min_eig(x).unwrap_or(0.0).min(0.0);
    let ok = |a: f64| min_eig(&(x + dx * a)).is_some_and(|v| v >= floor);
    if ok(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn max_step_lp(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter().zip(dx.iter()).filter(|(_, d)| **d < 0.0).map(|(v, d)| -v / d).fold(f64::INFINITY, f64::min)
}

struct Factors {
    z_inv: Vec<DMatrix<f64>>,
    /// Upper factor `R` with `Rᵀ R` equal to the Schur matrix.
    r: DMatrix<f64>,
}

impl Factors {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let w = self.r.tr_solve_upper_triangular(rhs).unwrap_or_else(|| DVector::zeros(rhs.len()));
        self.r.solve_upper_triangular(&w).unwrap_or_else(|| DVector::zeros(rhs.len()))
    }
}

/// Any `L` with `L Lᵀ = x`, falling back to an eigen square root when `x`
/// is numerically singular.
fn psd_factor(x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(ch) = x.clone().cholesky() {
        return Some(ch.l());
    }
    let n = x.nrows();
    let data: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| x[(i, j)])).collect();
    let (vals, vecs) = symmetric_eigen(&data, n).ok()?;
    Some(DMatrix::from_fn(n, n, |i, j| vecs[i * n + j] * vals[j].max(0.0).sqrt()))
}

/// Builds the HKM Schur matrix `M_ij = tr(A_i X A_j Z⁻¹)` in factored form
/// `G Gᵀ` with `G_i = vec(Lᵀ A_i K)`, `X = L Lᵀ`, `Z⁻¹ = K Kᵀ`, and takes
/// the triangular factor from a QR of `Gᵀ`. This avoids squaring the
/// condition number near the optimum.
fn factorize(prob: &RealSdp, p: &Point) -> Option<Factors> {
    let nb = prob.dims.len();
    let mut z_inv = Vec::with_capacity(nb);
    let mut k_fac = Vec::with_capacity(nb);
    let mut l_fac = Vec::with_capacity(nb);
    for (x, z) in p.x.iter().zip(&p.z) {
        let lz = z.clone().cholesky()?.l();
        let n = z.nrows();
        let lz_inv = lz.solve_lower_triangular(&DMatrix::identity(n, n))?;
        let k = lz_inv.transpose();
        z_inv.push(&k * k.transpose());
        k_fac.push(k);
        l_fac.push(psd_factor(x)?);
    }
    let m = prob.m();
    let width: usize = prob.dims.iter().map(|n| n * n).sum::<usize>() + prob.lp_dim;
    let mut gt = DMatrix::<f64>::zeros(width, m);
    for (i, row) in prob.rows.iter().enumerate() {
        let mut off = 0;
        for (k, a) in row.blocks.iter().enumerate() {
            let n = prob.dims[k];
            if let Some(a) = a {
                let g = l_fac[k].transpose() * a * &k_fac[k];
                for (idx, v) in g.iter().enumerate() {
                    gt[(off + idx, i)] = *v;
                }
            }
            off += n * n;
        }
        for &(l, v) in &row.lp {
            gt[(off + l, i)] = v * (p.xl[l] / p.zl[l]).sqrt();
        }
    }
    let mut r = gt.qr().r();
    // Exactly dependent rows leave zero pivots.
    let scale = (0..m).map(|i| r[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    for i in 0..m {
        if r[(i, i)].abs() < 1e-15 * scale {
            r[(i, i)] = if r[(i, i)] < 0.0 { -1e-15 * scale } else { 1e-15 * scale };
        }
    }
    Some(Factors { z_inv, r })
}

/// Solves for the direction targeting `σμ`, optionally with the second-order
/// correction built from an affine direction.
fn direction(
    prob: &RealSdp,
    p: &Point,
    f: &Factors,
    rd: &(Vec<DMatrix<f64>>, DVector<f64>),
    sigma_mu: f64,
    corr: Option<&Direction>,
) -> Direction {
    let nb = prob.dims.len();
    // Per-block pieces whose A(.) enters the right-hand side:
    //   X Rd Z⁻¹ − σμ Z⁻¹ + dXa dZa Z⁻¹
    let mut t: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
    for k in 0..nb {
        let mut m = &p.x[k] * &rd.0[k] * &f.z_inv[k] - &f.z_inv[k] * sigma_mu;
        if let Some(a) = corr {
            m += &a.dx[k] * &a.dz[k] * &f.z_inv[k];
        }
        t.push(m);
    }
    let mut tl = DVector::zeros(prob.lp_dim);
    for l in 0..prob.lp_dim {
        let mut v = p.xl[l] * rd.1[l] / p.zl[l] - sigma_mu / p.zl[l];
        if let Some(a) = corr {
            v += a.dxl[l] * a.dzl[l] / p.zl[l];
        }
        tl[l] = v;
    }
    let rhs = prob.b() + prob.apply(&t, &tl);
    let dy = f.solve(&rhs);
    let (aty, atyl) = prob.adjoint(&dy);

    let mut dz = Vec::with_capacity(nb);
    let mut dx = Vec::with_capacity(nb);
    for (k, aty_k) in aty.iter().enumerate() {
        let dzk = &rd.0[k] - aty_k;
        let mut m = &f.z_inv[k] * sigma_mu - &p.x[k] - &p.x[k] * &dzk * &f.z_inv[k];
        if let Some(a) = corr {
            m -= &a.dx[k] * &a.dz[k] * &f.z_inv[k];
        }
        dx.push(sym(&m));
        dz.push(sym(&dzk));
    }
    let dzl = &rd.1 - atyl;
    let mut dxl = DVector::zeros(prob.lp_dim);
    for l in 0..prob.lp_dim {
        let mut v = sigma_mu / p.zl[l] - p.xl[l] - p.xl[l] * dzl[l] / p.zl[l];
        if let Some(a) = corr {
            v -= a.dxl[l] * a.dzl[l] / p.zl[l];
        }
        dxl[l] = v;
    }
    Direction { dx, dxl, dy, dz, dzl }
}

fn step_lengths(p: &Point, d: &Direction) -> (f64, f64) {
    let mut ap = max_step_lp(&p.xl, &d.dxl);
    let mut ad = max_step_lp(&p.zl, &d.dzl);
    for k in 0..p.x.len() {
        ap = ap.min(max_step_psd(&p.x[k], &d.dx[k]));
        ad = ad.min(max_step_psd(&p.z[k], &d.dz[k]));
    }
    (ap, ad)
}

fn advance(p: &Point, d: &Direction, ap: f64, ad: f64) -> Point {
    Point {
        x: p.x.iter().zip(&d.dx).map(|(x, dx)| x + dx * ap).collect(),
        xl: &p.xl + &d.dxl * ap,
        y: &p.y + &d.dy * ad,
        z: p.z.iter().zip(&d.dz).map(|(z, dz)| z + dz * ad).collect(),
        zl: &p.zl + &d.dzl * ad,
    }
}

struct Converged {
    x: Vec<DMatrix<f64>>,
    pobj: f64,
    dobj: f64,
    gap: f64,
    pinf: f64,
    dinf: f64,
}

pub(crate) fn solve(prob: &RealSdp) -> RealSolution {
    let b = prob.b();
    let b_norm = b.norm();
    let c_norm = prob.c_norm();
    let n_total = prob.n_total();

    let mut p = Point {
        x: prob.dims.iter().map(|&n| DMatrix::identity(n, n)).collect(),
        xl: DVector::from_element(prob.lp_dim, 1.0),
        y: DVector::zeros(prob.m()),
        z: prob.dims.iter().map(|&n| DMatrix::identity(n, n)).collect(),
        zl: DVector::from_element(prob.lp_dim, 1.0),
    };

    let mut status = RealStatus::Failed;
    let mut iterations = 0;
    let mut stalls = 0;
    let mut best: Option<Converged> = None;
    let mut refinements = 0;
    let (mut pobj, mut dobj, mut gap, mut pinf, mut dinf);
    loop {
        let rp = &b - prob.apply(&p.x, &p.xl);
        let rd = prob.dual_residual(&p);
        pobj = prob.primal_objective(&p);
        dobj = b.dot(&p.y);
        let xz = complementarity(&p);
        let scale = 1.0 + pobj.abs() + dobj.abs();
        gap = xz.max((pobj - dobj).abs()) / scale;
        pinf = rp.norm() / (1.0 + b_norm);
        let rd_norm = (rd.0.iter().map(|m| m.norm_squared()).sum::<f64>() + rd.1.norm_squared()).sqrt();
        dinf = rd_norm / (1.0 + c_norm);

        let mut candidate = None;
        if gap <= GAP_TOL && pinf <= FEAS_TOL && dinf <= FEAS_TOL {
            candidate = Some(Converged { x: p.x.clone(), pobj, dobj, gap, pinf, dinf });
        } else if gap <= GAP_TOL && dinf <= FEAS_TOL {
            if let Some(q) = polish(prob, &p, &rp) {
                let (qobj, qgap, qinf) = prob.primal_metrics(&q, dobj);
                if qgap <= GAP_TOL && qinf <= FEAS_TOL {
                    candidate = Some(Converged { x: q.x, pobj: qobj, dobj, gap: qgap, pinf: qinf, dinf });
                }
            }
        }
        if let Some(c) = candidate {
            if best.as_ref().is_none_or(|b| c.gap < b.gap) {
                best = Some(c);
            }
        }
        // Converged: keep going for a few steps while the gap still shrinks.
        if let Some(b) = &best {
            refinements += 1;
            if b.gap <= REFINE_GAP || refinements > REFINE_ITERS {
                break;
            }
        }
        if dobj > 0.0 {
            // Aᵀy + Z = C − Rd
            let ray = ((c_norm + rd_norm) / dobj).min(f64::INFINITY);
            if ray < INFEASIBLE_RAY_TOL && pinf > FEAS_TOL {
                status = RealStatus::Infeasible;
                break;
            }
        }
        if iterations >= MAX_ITER {
            break;
        }
        iterations += 1;

        let mu = xz / n_total;
        let Some(f) = factorize(prob, &p) else { break };
        let aff = direction(prob, &p, &f, &rd, 0.0, None);
        let (ap, ad) = step_lengths(&p, &aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let trial = advance(&p, &aff, ap, ad);
        let mu_aff = complementarity(&trial) / n_total;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let d = direction(prob, &p, &f, &rd, sigma * mu, Some(&aff));
        let (ap, ad) = step_lengths(&p, &d);
        let ap = (STEP_FRACTION * ap).min(1.0);
        let ad = (STEP_FRACTION * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        p = advance(&p, &d, ap, ad);
    }

    if let Some(b) = best {
        return RealSolution {
            status: RealStatus::Optimal,
            x_blocks: b.x,
            primal_objective: b.pobj,
            dual_objective: b.dobj,
            gap: b.gap,
            primal_residual: b.pinf,
            dual_residual: b.dinf,
            iterations,
        };
    }
    RealSolution {
        status,
        x_blocks: p.x,
        primal_objective: pobj,
        dual_objective: dobj,
        gap,
        primal_residual: pinf,
        dual_residual: dinf,
        iterations,
    }
}
