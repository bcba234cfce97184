use serde::{Deserialize, Serialize};

use super::{compile, solve, SolveStatus};
use crate::error::{Error, Result};
use crate::estimation::{estimate, estimate_exact, OffDiagFloors, ProbeRecord, SubspaceEstimate};
use crate::projection::{assemble_at_overlap, assemble_constraints, polygon_regions, ProjectedStateTemplate};

/// Witness feasibility tolerance for the zero-bound shortcut.
const WITNESS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Subspace parameters bounded from the measured moments.
    Estimated,
    /// Exactly known eigenvalues and overlap injected from the probe record.
    Exact,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Estimated => "estimated",
            Mode::Exact => "exact",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "estimated" => Ok(Mode::Estimated),
            "exact" => Ok(Mode::Exact),
            other => Err(Error::InvalidInput { field: "mode", reason: format!("`{other}` is not estimated|exact") }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundOptions {
    pub sides: usize,
    pub mode: Mode,
    /// Diagnostic only: pin the eigenstate overlap here instead of at the
    /// window's upper edge.
    pub overlap_override: Option<f64>,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { sides: 4, mode: Mode::Estimated, overlap_override: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionOutcome {
    pub region: usize,
    pub objective: f64,
    pub status: SolveStatus,
}

/// Why no SDP was solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shortcut {
    /// Both eigenstates coincide; nothing distinguishes the branches.
    DegenerateSubspace,
    /// Both floors are vacuous and the separable witness is feasible.
    SeparableWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub bound: f64,
    pub region_minima: Vec<RegionOutcome>,
    pub mode: Mode,
    pub polygon_sides: usize,
    pub estimate_echo: SubspaceEstimate,
    pub floors: Option<OffDiagFloors>,
    pub shortcut: Option<Shortcut>,
}

/// Lower bound on the Negativity of the joint state compatible with `probe`.
pub fn min_negativity(probe: &ProbeRecord, options: &BoundOptions) -> Result<BoundResult> {
    if options.sides != 4 && options.sides != 8 {
        return Err(Error::UnsupportedSides(options.sides));
    }
    let est = match options.mode {
        Mode::Estimated => estimate(probe)?,
        Mode::Exact => estimate_exact(probe)?,
    };
    let mut result = BoundResult {
        bound: 0.0,
        region_minima: Vec::new(),
        mode: options.mode,
        polygon_sides: options.sides,
        estimate_echo: est,
        floors: None,
        shortcut: None,
    };

    let assembled = match options.overlap_override {
        Some(s) => assemble_at_overlap(probe, &est, s),
        None => assemble_constraints(probe, &est),
    };
    let template = match assembled {
        Ok(t) => t,
        Err(Error::DegenerateSubspace { .. }) => {
            result.shortcut = Some(Shortcut::DegenerateSubspace);
            return Ok(result);
        }
        Err(e) => return Err(e),
    };
    result.floors = Some(template.floors);

    if !template.floors.r0_active() && !template.floors.r1_active() && witness_feasible(&template)? {
        result.shortcut = Some(Shortcut::SeparableWitness);
        return Ok(result);
    }

    let regions = polygon_regions(template.polygon_floor(), options.sides)?;
    for (k, region) in regions.iter().enumerate() {
        let sol = solve(&compile(&template, region));
        result.region_minima.push(RegionOutcome { region: k, objective: sol.objective, status: sol.status });
    }

    let best = result
        .region_minima
        .iter()
        .filter(|r| r.status == SolveStatus::Optimal)
        .map(|r| r.objective)
        .fold(f64::INFINITY, f64::min);
    if best.is_finite() {
        result.bound = best.max(0.0);
        return Ok(result);
    }
    if result.region_minima.iter().all(|r| r.status == SolveStatus::Infeasible) {
        return Err(Error::InconsistentData);
    }
    let detail = result
        .region_minima
        .iter()
        .map(|r| format!("region {}: {} (objective {:.3e})", r.region, r.status, r.objective))
        .collect::<Vec<_>>()
        .join("; ");
    Err(Error::SolverFailure(detail))
}

fn witness_feasible(template: &ProjectedStateTemplate) -> Result<bool> {
    template.is_satisfied_by(&template.classical_witness(), WITNESS_TOL)
}

/// Bounds with the eigenstate overlap forced to each of `steps` points across
/// `[b_l, b_u]`. Diagnostic for checking that the upper edge is the minimizer.
pub fn scan_overlap(probe: &ProbeRecord, options: &BoundOptions, steps: usize) -> Result<Vec<(f64, BoundResult)>> {
    let est = match options.mode {
        Mode::Estimated => estimate(probe)?,
        Mode::Exact => estimate_exact(probe)?,
    };
    let (lo, hi) = (est.b_lower, est.b_upper);
    (0..steps.max(1))
        .map(|i| {
            let s = if steps <= 1 { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 };
            let opts = BoundOptions { overlap_override: Some(s), ..*options };
            min_negativity(probe, &opts).map(|r| (s, r))
        })
        .collect()
}
