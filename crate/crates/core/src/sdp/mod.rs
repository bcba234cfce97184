//! Semidefinite programs over Hermitian blocks and the Negativity minimization
//! built on top of them.
//!
//! Problems are stated on complex Hermitian blocks and lowered to real
//! symmetric blocks via `H ↦ [[Re H, -Im H], [Im H, Re H]]`. Since
//! `<E(F), E(X)> = 2 tr(F X)`, every lowered coefficient carries a factor 1/2.
//! Inequalities become equalities with a nonnegative slack.

mod bound;
mod face;
mod ipm;

pub use bound::{min_negativity, scan_overlap, BoundOptions, BoundResult, Mode, RegionOutcome, Shortcut};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::hermitian::{partial_transpose_a, ComplexMatrix, HermitianMatrix};
use crate::projection::{imag_part, real_part, ConvexRegion, LinearConstraint, ProjectedStateTemplate, Sense};
use ipm::{RealRow, RealSdp, RealStatus};

pub use ipm::{FEAS_TOL, GAP_TOL, MAX_ITER};

/// A real linear row over one or more Hermitian blocks:
/// `Σ_k tr(F_k X_k) (sense) rhs`.
#[derive(Clone, Debug)]
pub struct SdRow {
    pub label: String,
    pub terms: Vec<(usize, HermitianMatrix)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min Σ_k tr(C_k X_k)` over Hermitian `X_k ⪰ 0` subject to `rows`.
#[derive(Clone, Debug)]
pub struct SdProblem {
    pub block_dims: Vec<usize>,
    pub block_names: Vec<String>,
    pub rows: Vec<SdRow>,
    pub objective: Vec<(usize, HermitianMatrix)>,
    /// Per block, orthonormal columns `V` when the block is restricted to
    /// `X = V R V^H`.
    faces: Vec<Option<face::Face>>,
    /// Rows removed by [`SdProblem::restrict_to_faces`] as implied.
    pub implied_rows: Vec<String>,
}

impl SdProblem {
    pub fn new() -> Self {
        Self {
            block_dims: Vec::new(),
            block_names: Vec::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            faces: Vec::new(),
            implied_rows: Vec::new(),
        }
    }

    /// Declares a PSD block and returns its index.
    pub fn add_block(&mut self, name: impl Into<String>, dim: usize) -> usize {
        self.block_dims.push(dim);
        self.block_names.push(name.into());
        self.faces.push(None);
        self.block_dims.len() - 1
    }

    pub fn add_row(&mut self, label: impl Into<String>, terms: Vec<(usize, HermitianMatrix)>, sense: Sense, rhs: f64) {
        self.rows.push(SdRow { label: label.into(), terms, sense, rhs });
    }

    /// Adds a single-block constraint.
    pub fn add_constraint(&mut self, block: usize, c: &LinearConstraint) {
        self.add_row(c.label.clone(), vec![(block, c.coeffs.clone())], c.sense, c.rhs);
    }

    pub fn equalities(&self) -> impl Iterator<Item = &SdRow> {
        self.rows.iter().filter(|r| r.sense == Sense::Eq)
    }

    pub fn inequalities(&self) -> impl Iterator<Item = &SdRow> {
        self.rows.iter().filter(|r| r.sense != Sense::Eq)
    }

    /// Objective value at the given blocks.
    pub fn objective_value(&self, blocks: &[HermitianMatrix]) -> f64 {
        self.objective.iter().map(|(k, c)| c.inner(&blocks[*k])).sum()
    }

    /// Largest row violation at the given blocks.
    pub fn max_violation(&self, blocks: &[HermitianMatrix]) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let v: f64 = r.terms.iter().map(|(k, f)| f.inner(&blocks[*k])).sum::<f64>() - r.rhs;
                match r.sense {
                    Sense::Ge => (-v).max(0.0),
                    Sense::Le => v.max(0.0),
                    Sense::Eq => v.abs(),
                }
            })
            .fold(0.0, f64::max)
    }

    /// Restricts blocks to the faces of the PSD cone their rows force them
    /// onto and drops rows that become implied there. The solution is lifted
    /// back, so callers see the original block dimensions.
    pub fn restrict_to_faces(&mut self) {
        let dropped = face::restrict(self);
        self.implied_rows.extend(dropped);
    }

    /// Dimension of block `k` after face restriction.
    pub fn reduced_dim(&self, k: usize) -> usize {
        self.faces[k].as_ref().map_or(self.block_dims[k], |f| f.len())
    }

    fn lower(&self) -> RealSdp {
        let dims: Vec<usize> = (0..self.block_dims.len()).map(|k| 2 * self.reduced_dim(k)).collect();
        let embed_raw = |f: &HermitianMatrix| -> DMatrix<f64> {
            let n = 2 * f.dim();
            DMatrix::from_row_slice(n, n, &f.real_embedding()) * 0.5
        };
        let embed_in = |k: usize, f: &HermitianMatrix| -> DMatrix<f64> {
            match &self.faces[k] {
                Some(v) => embed_raw(&face::reduce(f, v)),
                None => embed_raw(f),
            }
        };
        let mut lp_dim = 0;
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let mut blocks: Vec<Option<DMatrix<f64>>> = vec![None; dims.len()];
            for (k, f) in &r.terms {
                let e = embed_in(*k, f);
                blocks[*k] = Some(match blocks[*k].take() {
                    Some(prev) => prev + e,
                    None => e,
                });
            }
            let lp = match r.sense {
                Sense::Eq => Vec::new(),
                Sense::Ge => {
                    lp_dim += 1;
                    vec![(lp_dim - 1, -1.0)]
                }
                Sense::Le => {
                    lp_dim += 1;
                    vec![(lp_dim - 1, 1.0)]
                }
            };
            rows.push(RealRow { blocks, lp, rhs: r.rhs });
        }
        let mut c_blocks: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (k, c) in &self.objective {
            c_blocks[*k] += embed_in(*k, c);
        }
        RealSdp { dims, lp_dim, rows, c_blocks, c_lp: DVector::zeros(lp_dim) }
    }
}

impl Default for SdProblem {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical_failure",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SdSolution {
    pub status: SolveStatus,
    /// Dual objective: a lower bound on the primal optimum up to the dual residual.
    pub objective: f64,
    pub primal_objective: f64,
    pub primal_blocks: Vec<HermitianMatrix>,
    /// Relative gap `max(<X,Z>, |p − d|) / (1 + |p| + |d|)`.
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

/// Solves `problem` by a primal-dual interior-point method. Deterministic.
pub fn solve(problem: &SdProblem) -> SdSolution {
    let real = problem.lower();
    let sol = ipm::solve(&real);
    let primal_blocks = sol
        .x_blocks
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let n = problem.reduced_dim(k);
            let data: Vec<f64> =
                (0..2 * n).flat_map(|i| (0..2 * n).map(move |j| (i, j))).map(|(i, j)| x[(i, j)]).collect();
            let r = HermitianMatrix::from_real_embedding(n, &data);
            match &problem.faces[k] {
                Some(v) => face::lift(&r, v, problem.block_dims[k]),
                None => r,
            }
        })
        .collect();
    let status = match sol.status {
        RealStatus::Optimal => SolveStatus::Optimal,
        RealStatus::Infeasible => SolveStatus::Infeasible,
        RealStatus::Failed => SolveStatus::NumericalFailure,
    };
    SdSolution {
        status,
        objective: sol.dual_objective,
        primal_objective: sol.primal_objective,
        primal_blocks,
        duality_gap: sol.gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        iterations: sol.iterations,
    }
}

type Part = fn(&ComplexMatrix) -> HermitianMatrix;

fn unit(p: usize, q: usize) -> ComplexMatrix {
    let mut c = ComplexMatrix::zeros(4);
    c[(p, q)] = num_complex::Complex64::new(1.0, 0.0);
    c
}

/// Negativity minimization over one region:
/// `min tr(M + N) − tr ρ` s.t. `ρ^{T_A} = M − N`, `ρ, M, N ⪰ 0`, the template
/// constraints on `ρ`, and the region half-planes.
pub fn compile(template: &ProjectedStateTemplate, region: &ConvexRegion) -> SdProblem {
    let mut prob = SdProblem::new();
    let rho = prob.add_block("rho", 4);
    let m = prob.add_block("M", 4);
    let n = prob.add_block("N", 4);
    add_template_rows(&mut prob, rho, template, region);

    // ρ^{T_A}[(a,i),(b,j)] = ρ[(b,i),(a,j)]
    for p in 0..4 {
        for q in p..4 {
            let (a, i, b, j) = (p / 2, p % 2, q / 2, q % 2);
            let src = unit(2 * b + i, 2 * a + j);
            let dst = unit(p, q);
            let parts: [(&str, Part); 2] = [("re", real_part), ("im", imag_part)];
            for (tag, part) in parts {
                if tag == "im" && p == q {
                    continue;
                }
                prob.add_row(
                    format!("pt.{tag}[{p},{q}]"),
                    vec![(rho, part(&src)), (m, part(&dst).scale(-1.0)), (n, part(&dst))],
                    Sense::Eq,
                    0.0,
                );
            }
        }
    }
    prob.objective = vec![
        (m, HermitianMatrix::identity(4)),
        (n, HermitianMatrix::identity(4)),
        (rho, HermitianMatrix::identity(4).scale(-1.0)),
    ];
    prob.restrict_to_faces();
    prob
}

/// Linear objective `tr(G ρ)` over the template and region, with `ρ` as the
/// only block.
pub fn compile_linear(
    template: &ProjectedStateTemplate,
    region: &ConvexRegion,
    objective: HermitianMatrix,
) -> SdProblem {
    let mut prob = SdProblem::new();
    let rho = prob.add_block("rho", 4);
    add_template_rows(&mut prob, rho, template, region);
    prob.objective = vec![(rho, objective)];
    prob.restrict_to_faces();
    prob
}

fn add_template_rows(prob: &mut SdProblem, rho: usize, template: &ProjectedStateTemplate, region: &ConvexRegion) {
    for c in &template.constraints {
        prob.add_constraint(rho, c);
    }
    for c in region.constraints(&template.basis) {
        prob.add_constraint(rho, &c);
    }
}

/// Negativity of the `rho` block of a compiled problem solution, computed
/// directly from its partial transpose.
pub fn negativity_of_solution(sol: &SdSolution) -> Option<f64> {
    let rho = sol.primal_blocks.first()?;
    let pt = partial_transpose_a(rho).ok()?;
    Some(crate::hermitian::trace_norm(&pt).ok()? - rho.trace())
}
