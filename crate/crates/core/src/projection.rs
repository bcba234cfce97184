//! The 4x4 projected state `ρ_P` in the orthonormalized basis, and the linear
//! constraints the estimates impose on it.
//!
//! `ρ_P` lives on `{|0>,|1>}_A ⊗ {|e0>,|e1>}_B` (A-major) with `|e0> = |λ0⁰>` and
//! `|λ1⁰> = s|e0> + sqrt(1-s²)|e1>`. Blocks carry the `1/2` prefactor of the
//! joint state, so `<λ_i|ρ_ab|λ_j> = 2 v_iᵀ X_ab v_j`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{offdiag_floors, supplementary_window, OffDiagFloors, ProbeRecord, SubspaceEstimate};
use crate::hermitian::{is_psd, ComplexMatrix, HermitianMatrix};

/// Overlaps at or above this are treated as identical eigenstates.
pub const DEGENERATE_OVERLAP: f64 = 1.0 - 1e-9;

/// Windows narrower than this are emitted as a single equality.
const EQUALITY_WIDTH: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthoBasis {
    /// `<λ0⁰|λ1⁰>`, real and non-negative by gauge choice.
    pub s: f64,
    /// `sqrt(1 - s²)`.
    pub t: f64,
}

impl OrthoBasis {
    pub fn new(s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidInput { field: "s", reason: format!("{s} is outside [0, 1]") });
        }
        if s >= DEGENERATE_OVERLAP {
            return Err(Error::DegenerateSubspace { s });
        }
        Ok(Self { s, t: (1.0 - s * s).sqrt() })
    }

    /// Coefficients of `|λ_j⁰>` over `(|e0>, |e1>)`.
    pub fn eigvec(&self, j: usize) -> [f64; 2] {
        match j {
            0 => [1.0, 0.0],
            _ => [self.s, self.t],
        }
    }
}

/// Picks the orthonormal basis for the pinned overlap of `estimate`.
pub fn fix_gauge(estimate: &SubspaceEstimate) -> Result<OrthoBasis> {
    OrthoBasis::new(estimate.pinned_overlap().min(DEGENERATE_OVERLAP))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

/// Real linear functional `tr(F X)` on Hermitian `X`, compared with `rhs`.
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub label: String,
    pub coeffs: HermitianMatrix,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(label: impl Into<String>, coeffs: HermitianMatrix, sense: Sense, rhs: f64) -> Self {
        Self { label: label.into(), coeffs, sense, rhs }
    }

    pub fn evaluate(&self, x: &HermitianMatrix) -> f64 {
        self.coeffs.inner(x)
    }

    /// Amount by which `x` violates the constraint, 0 if satisfied.
    pub fn violation(&self, x: &HermitianMatrix) -> f64 {
        let v = self.evaluate(x) - self.rhs;
        match self.sense {
            Sense::Ge => (-v).max(0.0),
            Sense::Le => v.max(0.0),
            Sense::Eq => v.abs(),
        }
    }

    /// Equalities fixing every real degree of freedom of a 4x4 matrix to `target`.
    pub fn pin_entries(target: &HermitianMatrix) -> Vec<Self> {
        let n = target.dim();
        let mut out = Vec::new();
        for p in 0..n {
            for q in p..n {
                let mut c = ComplexMatrix::zeros(n);
                c[(p, q)] = Complex64::new(1.0, 0.0);
                out.push(Self::new(format!("pin.re[{p},{q}]"), real_part(&c), Sense::Eq, target[(p, q)].re));
                if p != q {
                    out.push(Self::new(format!("pin.im[{p},{q}]"), imag_part(&c), Sense::Eq, target[(p, q)].im));
                }
            }
        }
        out
    }
}

/// Hermitian `F` with `tr(F X) = Re Σ C[p,q] X[p,q]` for Hermitian `X`.
pub fn real_part(c: &ComplexMatrix) -> HermitianMatrix {
    let n = c.dim();
    let mut f = ComplexMatrix::zeros(n);
    for p in 0..n {
        for q in 0..n {
            f[(p, q)] = 0.5 * (c[(q, p)] + c[(p, q)].conj());
        }
    }
    HermitianMatrix::symmetrized(&f)
}

/// Hermitian `F` with `tr(F X) = Im Σ C[p,q] X[p,q]` for Hermitian `X`.
pub fn imag_part(c: &ComplexMatrix) -> HermitianMatrix {
    real_part(&c.scale(Complex64::new(0.0, -1.0)))
}

/// Coefficients of `<λ_i|ρ_ab|λ_j> = 2 v_iᵀ X_ab v_j` as a complex-linear form.
fn block_element(basis: &OrthoBasis, a: usize, b: usize, i: usize, j: usize) -> ComplexMatrix {
    let (vi, vj) = (basis.eigvec(i), basis.eigvec(j));
    let mut c = ComplexMatrix::zeros(4);
    for k in 0..2 {
        for l in 0..2 {
            c[(2 * a + k, 2 * b + l)] = Complex64::new(2.0 * vi[k] * vj[l], 0.0);
        }
    }
    c
}

/// `a·Re z + b·Im z >= d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl HalfPlane {
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.a * z.re + self.b * z.im >= self.d - tol
    }
}

/// Intersection of half-planes acting on `z = <λ1⁰|ρ01|λ1⁰>`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexRegion {
    pub half_planes: Vec<HalfPlane>,
}

impl ConvexRegion {
    pub fn unconstrained() -> Self {
        Self::default()
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.half_planes.iter().all(|h| h.contains(z, tol))
    }

    /// The region's half-planes as constraints on `ρ_P`.
    pub fn constraints(&self, basis: &OrthoBasis) -> Vec<LinearConstraint> {
        let z = block_element(basis, 0, 1, 1, 1);
        self.half_planes
            .iter()
            .enumerate()
            .map(|(k, h)| {
                // a·Re z + b·Im z = Re((a - ib) z)
                let f = real_part(&z.scale(Complex64::new(h.a, -h.b)));
                LinearConstraint::new(format!("C6.region[{k}]"), f, Sense::Ge, h.d)
            })
            .collect()
    }
}

/// Convex cover of `{|z| >= r}` by the outer half-planes of the regular
/// `sides`-gon inscribed in `|z| = r` with a vertex at `z = r`.
pub fn polygon_regions(r: f64, sides: usize) -> Result<Vec<ConvexRegion>> {
    if sides != 4 && sides != 8 {
        return Err(Error::UnsupportedSides(sides));
    }
    if r <= 0.0 {
        return Ok(vec![ConvexRegion::unconstrained()]);
    }
    let n = sides as f64;
    let offset = r * (PI / n).cos();
    Ok((0..sides)
        .map(|k| {
            let phi = (2 * k + 1) as f64 * PI / n;
            ConvexRegion { half_planes: vec![HalfPlane { a: phi.cos(), b: phi.sin(), d: offset }] }
        })
        .collect())
}

/// Linear constraint set on `ρ_P` for one probe record; `ρ_P ⪰ 0` is implied.
#[derive(Clone, Debug)]
pub struct ProjectedStateTemplate {
    pub basis: OrthoBasis,
    pub constraints: Vec<LinearConstraint>,
    /// Floors `r0` (gauge element) and `r1` (polygon element).
    pub floors: OffDiagFloors,
    pub trace_cap: f64,
    pub block_trace_cap: f64,
}

impl ProjectedStateTemplate {
    /// Template from an explicit constraint list.
    pub fn from_constraints(basis: OrthoBasis, constraints: Vec<LinearConstraint>) -> Self {
        Self { basis, constraints, floors: OffDiagFloors { r0: 0.0, r1: 0.0 }, trace_cap: 1.0, block_trace_cap: 0.5 }
    }

    pub fn gauge_floor(&self) -> f64 {
        self.floors.r0
    }

    pub fn polygon_floor(&self) -> f64 {
        self.floors.r1
    }

    /// Largest violation of the linear constraints by `x`.
    pub fn max_violation(&self, x: &HermitianMatrix) -> f64 {
        self.constraints.iter().map(|c| c.violation(x)).fold(0.0, f64::max)
    }

    /// `x ⪰ 0` and every linear constraint holds, both to `tol`.
    pub fn is_satisfied_by(&self, x: &HermitianMatrix, tol: f64) -> Result<bool> {
        Ok(self.max_violation(x) <= tol && is_psd(x, tol)?)
    }

    /// `z = <λ1⁰|ρ01|λ1⁰>` evaluated at `x`.
    pub fn polygon_element(&self, x: &HermitianMatrix) -> Complex64 {
        let c = block_element(&self.basis, 0, 1, 1, 1);
        let mut z = Complex64::new(0.0, 0.0);
        for p in 0..4 {
            for q in 0..4 {
                z += c[(p, q)] * x[(p, q)];
            }
        }
        z
    }

    /// Block-diagonal state `½(|0><0| ⊗ |λ0⁰><λ0⁰| + |1><1| ⊗ |λ1⁰><λ1⁰|)`.
    /// It is separable, so it certifies a zero bound whenever it is feasible.
    pub fn classical_witness(&self) -> HermitianMatrix {
        let mut m = ComplexMatrix::zeros(4);
        for a in 0..2 {
            let v = self.basis.eigvec(a);
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * a + k, 2 * a + l)] = Complex64::new(0.5 * v[k] * v[l], 0.0);
                }
            }
        }
        HermitianMatrix::symmetrized(&m)
    }
}

fn push_window(out: &mut Vec<LinearConstraint>, label: &str, f: HermitianMatrix, lo: f64, hi: f64) {
    if hi - lo < EQUALITY_WIDTH {
        out.push(LinearConstraint::new(label, f, Sense::Eq, 0.5 * (lo + hi)));
    } else {
        out.push(LinearConstraint::new(format!("{label}.lower"), f.clone(), Sense::Ge, lo));
        out.push(LinearConstraint::new(format!("{label}.upper"), f, Sense::Le, hi));
    }
}

/// Constraint template at the pinned overlap of `estimate`.
pub fn assemble_constraints(probe: &ProbeRecord, estimate: &SubspaceEstimate) -> Result<ProjectedStateTemplate> {
    let basis = fix_gauge(estimate)?;
    assemble_with_basis(probe, estimate, basis)
}

/// Constraint template with the overlap forced to `s`, for scanning the
/// overlap window.
pub fn assemble_at_overlap(probe: &ProbeRecord, estimate: &SubspaceEstimate, s: f64) -> Result<ProjectedStateTemplate> {
    let basis = OrthoBasis::new(s.min(DEGENERATE_OVERLAP))?;
    assemble_with_basis(probe, estimate, basis)
}

fn assemble_with_basis(
    probe: &ProbeRecord,
    estimate: &SubspaceEstimate,
    basis: OrthoBasis,
) -> Result<ProjectedStateTemplate> {
    let (d0, d1) = estimate.defects.effective();
    let s = basis.s;
    let c = probe.input_overlap_c;
    let floors = offdiag_floors(c, d0, d1, s)?;
    let mut cons = Vec::with_capacity(16);

    let elem = |a, b, i, j| block_element(&basis, a, b, i, j);
    push_window(&mut cons, "C1", real_part(&elem(0, 0, 0, 0)), 1.0 - d0, 1.0);
    push_window(&mut cons, "C2", real_part(&elem(1, 1, 1, 1)), 1.0 - d1, 1.0);
    let (lo, hi) = supplementary_window(d0, s)?;
    push_window(&mut cons, "C3", real_part(&elem(0, 0, 1, 1)), lo, hi);
    let (lo, hi) = supplementary_window(d1, s)?;
    push_window(&mut cons, "C4", real_part(&elem(1, 1, 0, 0)), lo, hi);

    let gauge = elem(0, 1, 0, 0);
    cons.push(LinearConstraint::new("C5.gauge", imag_part(&gauge), Sense::Eq, 0.0));
    if floors.r0_active() {
        cons.push(LinearConstraint::new("C5.floor", real_part(&gauge), Sense::Ge, floors.r0));
    }

    let diag = |range: std::ops::Range<usize>| {
        let mut m = ComplexMatrix::zeros(4);
        for i in range {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        HermitianMatrix::symmetrized(&m)
    };
    cons.push(LinearConstraint::new("C7.trace", diag(0..4), Sense::Le, 1.0));
    cons.push(LinearConstraint::new("C7.block0", diag(0..2), Sense::Le, 0.5));
    cons.push(LinearConstraint::new("C7.block1", diag(2..4), Sense::Le, 0.5));

    Ok(ProjectedStateTemplate { basis, constraints: cons, floors, trace_cap: 1.0, block_trace_cap: 0.5 })
}
