//! Moment-based estimates of the most-significant two-dimensional subspace.
//!
//! Quadratures follow `x = (a† + a)/√2`, so the vacuum variance is `1/2` and a
//! coherent state `|β>` has `<x> + i<p> = √2 β`.

use serde::{Deserialize, Serialize};

use crate::channels::ExactSubspace;
use crate::error::{Error, Result};

/// Quadrature means and variances of one conditional output state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl ConditionalMoments {
    pub fn new(mean_x: f64, mean_p: f64, var_x: f64, var_p: f64) -> Result<Self> {
        let m = Self { mean_x, mean_p, var_x, var_p };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [("mean_x", self.mean_x), ("mean_p", self.mean_p), ("var_x", self.var_x), ("var_p", self.var_p)];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidInput { field: name, reason: format!("{v} is not finite") });
            }
        }
        for (name, v) in [("var_x", self.var_x), ("var_p", self.var_p)] {
            if v < 0.0 {
                return Err(Error::InvalidInput { field: name, reason: format!("variance {v} is negative") });
            }
        }
        Ok(())
    }
}

/// Output statistics of both probes plus the known input overlap `c = <α|-α>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub state0: ConditionalMoments,
    pub state1: ConditionalMoments,
    pub input_overlap_c: f64,
    /// Exactly known subspace parameters, when a channel model supplies them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSubspace>,
}

impl ProbeRecord {
    pub fn new(state0: ConditionalMoments, state1: ConditionalMoments, input_overlap_c: f64) -> Result<Self> {
        let p = Self { state0, state1, input_overlap_c, exact: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_exact(mut self, exact: ExactSubspace) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.state0.validate()?;
        self.state1.validate()?;
        let c = self.input_overlap_c;
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidInput { field: "input_overlap_c", reason: format!("{c} is outside [0, 1]") });
        }
        if let Some(ex) = &self.exact {
            ex.validate()?;
        }
        Ok(())
    }
}

/// Upper bounds `U_j` on the eigenvalue defects `1 - λ_j⁰`, plus exact values
/// when they are known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectBounds {
    pub u0: f64,
    pub u1: f64,
    /// Exact eigenvalue defects `ε̃_j = 1 - λ_j⁰`.
    pub exact_eps_tilde: Option<(f64, f64)>,
    /// Exact coherent-state infidelities `ε_j`.
    pub exact_eps: Option<(f64, f64)>,
}

impl DefectBounds {
    /// Defects entering the projected-state windows: exact `ε̃_j` when present,
    /// otherwise the bounds `U_j`.
    pub fn effective(&self) -> (f64, f64) {
        self.exact_eps_tilde.unwrap_or((self.u0, self.u1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceEstimate {
    pub defects: DefectBounds,
    pub kappa: f64,
    pub b_lower: f64,
    pub b_upper: f64,
    pub exact_overlap: Option<f64>,
}

impl SubspaceEstimate {
    /// Overlap used to fix the orthonormal basis: the exact value when known,
    /// otherwise the upper window edge.
    pub fn pinned_overlap(&self) -> f64 {
        self.exact_overlap.unwrap_or(self.b_upper)
    }
}

/// Right-hand sides of the off-diagonal bounds. Non-positive values are vacuous.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagFloors {
    pub r0: f64,
    pub r1: f64,
}

impl OffDiagFloors {
    pub fn r0_active(&self) -> bool {
        self.r0 > 0.0
    }

    pub fn r1_active(&self) -> bool {
        self.r1 > 0.0
    }
}

fn check_defect(u: f64, state: Option<usize>) -> Result<()> {
    if !u.is_finite() || u >= 0.5 {
        return Err(Error::DefectDomain { state, u });
    }
    if u < 0.0 {
        return Err(Error::InvalidInput { field: "U", reason: format!("{u} is negative") });
    }
    Ok(())
}

/// `U = max(0, ½[(V(x)+½)(V(p)+½) − 1])`; fails when `U >= 1/2`.
pub fn eigen_defect_bound(m: &ConditionalMoments) -> Result<f64> {
    m.validate()?;
    let u = (0.5 * ((m.var_x + 0.5) * (m.var_p + 0.5) - 1.0)).max(0.0);
    check_defect(u, None)?;
    Ok(u)
}

/// Overlap modulus of the coherent states sharing the two probes' means.
pub fn kappa_from_means(m0: &ConditionalMoments, m1: &ConditionalMoments) -> f64 {
    // |β0 − β1|² with β = (x + ip)/√2.
    let dx = m0.mean_x - m1.mean_x;
    let dp = m0.mean_p - m1.mean_p;
    (-(dx * dx + dp * dp) / 4.0).exp()
}

fn noise_ratio(u: f64) -> f64 {
    (u / (1.0 - 2.0 * u)).sqrt()
}

/// Unclamped relaxed overlap window.
fn overlap_window_raw(u0: f64, u1: f64, kappa: f64) -> (f64, f64) {
    let q0 = noise_ratio(u0);
    let q1 = noise_ratio(u1);
    let k_perp = (1.0 - kappa * kappa).max(0.0).sqrt();
    let lower = kappa * (1.0 - 2.0 * u0).sqrt() * (1.0 - 2.0 * u1).sqrt() - k_perp * q0 - k_perp * q1 - q0 * q1;
    let upper = kappa + k_perp * q0 + k_perp * q1 + q0 * q1;
    (lower, upper)
}

/// Window `[b_l, b_u]` on `|<λ0⁰|λ1⁰>|` from `U_0`, `U_1` and `κ`, clamped to `[0, 1]`.
pub fn overlap_window_relaxed(u0: f64, u1: f64, kappa: f64) -> Result<(f64, f64)> {
    check_defect(u0, Some(0))?;
    check_defect(u1, Some(1))?;
    check_unit("kappa", kappa)?;
    let (lo, hi) = overlap_window_raw(u0, u1, kappa);
    Ok((lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)))
}

/// Unrelaxed window `[c_l, c_u]` in terms of the exact infidelities `ε_j` and
/// eigenvalue defects `ε̃_j`, clamped to `[0, 1]`.
pub fn overlap_window_full(kappa: f64, eps0: f64, eps1: f64, eps_t0: f64, eps_t1: f64) -> Result<(f64, f64)> {
    check_unit("kappa", kappa)?;
    for (field, t, e) in [("eps_tilde0", eps_t0, eps0), ("eps_tilde1", eps_t1, eps1)] {
        if !(t >= 0.0 && t <= e) {
            return Err(Error::InvalidInput { field, reason: format!("requires 0 <= eps_tilde ({t}) <= eps ({e})") });
        }
        if t >= 0.5 || e > 1.0 {
            return Err(Error::InvalidInput { field, reason: format!("eps_tilde {t} must be < 1/2 and eps {e} <= 1") });
        }
    }
    let k_perp = (1.0 - kappa * kappa).max(0.0).sqrt();
    // fid_j = √((1−ε_j)/(1−ε̃_j)), leak_j = √((ε_j−ε̃_j)/(1−2ε̃_j)),
    // keep_j = √((1−ε_j−ε̃_j)/(1−2ε̃_j)).
    let fid = |e: f64, t: f64| ((1.0 - e) / (1.0 - t)).max(0.0).sqrt();
    let leak = |e: f64, t: f64| ((e - t) / (1.0 - 2.0 * t)).max(0.0).sqrt();
    let keep = |e: f64, t: f64| ((1.0 - e - t) / (1.0 - 2.0 * t)).max(0.0).sqrt();
    let (f0, f1) = (fid(eps0, eps_t0), fid(eps1, eps_t1));
    let (l0, l1) = (leak(eps0, eps_t0), leak(eps1, eps_t1));
    let (k0, k1) = (keep(eps0, eps_t0), keep(eps1, eps_t1));
    let lower = kappa * k0 * k1 - k_perp * f0 * l1 - k_perp * f1 * l0 - l1 * l0;
    let upper = kappa * f0 * f1 + k_perp * f0 * l1 + k_perp * f1 * l0 + l1 * l0;
    Ok((lower.clamp(0.0, 1.0), upper.clamp(0.0, 1.0)))
}

/// Window on the supplementary fidelity `<λ_i⁰|ρ_j|λ_i⁰>`, `i != j`, for
/// defect bound `u` and eigenstate overlap `s`.
pub fn supplementary_window(u: f64, s: f64) -> Result<(f64, f64)> {
    check_defect(u, None)?;
    check_unit("s", s)?;
    let lo = (1.0 - u) * s * s;
    Ok((lo, lo + u))
}

/// Floors on `|<λ_j⁰|ρ01|λ_j⁰>|`.
pub fn offdiag_floors(c: f64, u0: f64, u1: f64, s: f64) -> Result<OffDiagFloors> {
    check_unit("c", c)?;
    check_defect(u0, Some(0))?;
    check_defect(u1, Some(1))?;
    check_unit("s", s)?;
    let r0 = c - u0.sqrt() * (1.0 - (1.0 - u1) * s * s).max(0.0).sqrt();
    let r1 = c - u1.sqrt() * (1.0 - (1.0 - u0) * s * s).max(0.0).sqrt();
    Ok(OffDiagFloors { r0, r1 })
}

fn check_unit(field: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidInput { field, reason: format!("{v} is outside [0, 1]") });
    }
    Ok(())
}

/// Full moment-based estimate for one probe record. Exact fields are left empty.
pub fn estimate(probe: &ProbeRecord) -> Result<SubspaceEstimate> {
    probe.validate()?;
    let u0 = eigen_defect_bound(&probe.state0).map_err(|e| with_state(e, 0))?;
    let u1 = eigen_defect_bound(&probe.state1).map_err(|e| with_state(e, 1))?;
    let kappa = kappa_from_means(&probe.state0, &probe.state1);
    let (b_lower, b_upper) = overlap_window_relaxed(u0, u1, kappa)?;
    Ok(SubspaceEstimate {
        defects: DefectBounds { u0, u1, exact_eps_tilde: None, exact_eps: None },
        kappa,
        b_lower,
        b_upper,
        exact_overlap: None,
    })
}

/// Moment-based estimate augmented with exactly known subspace parameters.
pub fn estimate_exact(probe: &ProbeRecord) -> Result<SubspaceEstimate> {
    let exact = probe.exact.ok_or(Error::MissingExactData)?;
    let mut est = estimate(probe)?;
    est.defects.exact_eps_tilde = Some((1.0 - exact.lambda0, 1.0 - exact.lambda1));
    est.exact_overlap = Some(exact.overlap_s);
    Ok(est)
}

fn with_state(err: Error, state: usize) -> Error {
    match err {
        Error::DefectDomain { u, .. } => Error::DefectDomain { state: Some(state), u },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sym(var: f64, mean_x: f64) -> ConditionalMoments {
        ConditionalMoments::new(mean_x, 0.0, var, var).unwrap()
    }

    #[test]
    fn defect_bound_examples() {
        assert_eq!(eigen_defect_bound(&sym(0.5, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(eigen_defect_bound(&sym(0.525, 0.0)).unwrap(), 0.0253125, epsilon = 1e-15);
        // Below the vacuum limit the bound clamps to 0.
        assert_eq!(eigen_defect_bound(&sym(0.45, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn defect_bound_domain_error_at_one_half() {
        let v = 2f64.sqrt() - 0.5;
        let m = ConditionalMoments::new(0.0, 0.0, v + 1e-12, v + 1e-12).unwrap();
        assert!(matches!(eigen_defect_bound(&m), Err(Error::DefectDomain { .. })));
        let m = ConditionalMoments::new(0.0, 0.0, 1.0, 1.0).unwrap();
        match eigen_defect_bound(&m) {
            Err(Error::DefectDomain { u, .. }) => assert_abs_diff_eq!(u, 0.625, epsilon = 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_variance_rejected() {
        assert!(ConditionalMoments::new(0.0, 0.0, -0.1, 0.5).is_err());
    }

    #[test]
    fn kappa_examples() {
        let r2 = 2f64.sqrt();
        assert_eq!(kappa_from_means(&sym(0.5, 1.0), &sym(0.5, 1.0)), 1.0);
        assert_abs_diff_eq!(kappa_from_means(&sym(0.5, r2), &sym(0.5, -r2)), (-2f64).exp(), epsilon = 1e-15);
        let p0 = ConditionalMoments::new(0.0, 0.0, 0.5, 0.5).unwrap();
        let p1 = ConditionalMoments::new(0.0, 2.0 * r2, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(kappa_from_means(&p0, &p1), (-2f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn relaxed_window_examples() {
        assert_eq!(overlap_window_relaxed(0.0, 0.0, 0.9).unwrap(), (0.9, 0.9));
        assert_eq!(overlap_window_relaxed(0.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
        let (lo, hi) = overlap_window_relaxed(0.0253125, 0.0253125, 0.9).unwrap();
        assert_abs_diff_eq!(lo, 0.6854258943371925, epsilon = 1e-12);
        assert_eq!(hi, 1.0);
        let (_, raw_hi) = overlap_window_raw(0.0253125, 0.0253125, 0.9);
        assert_abs_diff_eq!(raw_hi, 1.0690116056628074, epsilon = 1e-12);
        assert!(overlap_window_relaxed(0.5, 0.0, 0.5).is_err());
    }

    #[test]
    fn full_window_examples() {
        assert_eq!(overlap_window_full(0.7, 0.0, 0.0, 0.0, 0.0).unwrap(), (0.7, 0.7));
        let (lo, hi) = overlap_window_full(0.9, 0.05, 0.05, 0.05, 0.05).unwrap();
        assert_abs_diff_eq!(lo, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.9, epsilon = 1e-15);
        let (lo, hi) = overlap_window_full(0.4, 0.1, 0.2, 0.05, 0.01).unwrap();
        assert!(lo <= hi);
        assert!(overlap_window_full(0.4, 0.1, 0.2, 0.15, 0.01).is_err());
    }

    #[test]
    fn supplementary_window_examples() {
        let (lo, hi) = supplementary_window(0.0, 0.9).unwrap();
        assert_abs_diff_eq!(lo, 0.81, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.81, epsilon = 1e-15);
        let (lo, hi) = supplementary_window(0.0253125, 0.9).unwrap();
        assert_abs_diff_eq!(lo, 0.789496875, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.814809375, epsilon = 1e-15);
        assert_eq!(supplementary_window(0.0253125, 0.0).unwrap(), (0.0, 0.0253125));
    }

    #[test]
    fn floor_examples() {
        let f = offdiag_floors(0.7, 0.0, 0.0, 0.3).unwrap();
        assert_eq!((f.r0, f.r1), (0.7, 0.7));
        let f = offdiag_floors(0.5, 0.0253125, 0.0253125, 0.685419).unwrap();
        assert_abs_diff_eq!(f.r0, 0.38286026035487203, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r1, f.r0, epsilon = 1e-15);
        let f = offdiag_floors(0.1, 0.25, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(f.r0, -0.4, epsilon = 1e-15);
        assert!(!f.r0_active());
    }

    #[test]
    fn estimate_vacuum_probes() {
        let r2 = 2f64.sqrt();
        let probe = ProbeRecord::new(sym(0.5, r2), sym(0.5, -r2), (-2f64).exp()).unwrap();
        let est = estimate(&probe).unwrap();
        let k = (-2f64).exp();
        assert_eq!((est.defects.u0, est.defects.u1), (0.0, 0.0));
        assert_abs_diff_eq!(est.kappa, k, epsilon = 1e-15);
        assert_abs_diff_eq!(est.b_lower, k, epsilon = 1e-15);
        assert_abs_diff_eq!(est.b_upper, k, epsilon = 1e-15);
    }

    #[test]
    fn estimate_identical_states() {
        let probe = ProbeRecord::new(sym(0.525, 0.3), sym(0.525, 0.3), 0.5).unwrap();
        let est = estimate(&probe).unwrap();
        assert_eq!(est.kappa, 1.0);
        assert_eq!(est.b_upper, 1.0);
    }

    #[test]
    fn estimate_reports_offending_state() {
        let probe = ProbeRecord::new(sym(0.5, 1.0), sym(1.0, -1.0), 0.5).unwrap();
        assert!(matches!(estimate(&probe), Err(Error::DefectDomain { state: Some(1), .. })));
    }

    #[test]
    fn overlap_out_of_range_rejected() {
        assert!(ProbeRecord::new(sym(0.5, 1.0), sym(0.5, -1.0), 1.5).is_err());
    }
}
