//! Moment-level channel models that produce probe records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{ConditionalMoments, ProbeRecord};
use crate::hermitian::{ComplexMatrix, HermitianMatrix};

/// Coherent amplitude `α >= 0` of the probes `|±α>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputSpec {
    pub alpha: f64,
}

impl InputSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput { field: "alpha", reason: format!("{alpha} must be finite and >= 0") });
        }
        Ok(Self { alpha })
    }

    /// Inverse of [`input_overlap`]: `α = sqrt(-ln(c) / 2)`.
    pub fn from_overlap(c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidInput { field: "input_overlap_c", reason: format!("{c} is outside (0, 1]") });
        }
        Self::new((-c.ln() / 2.0).max(0.0).sqrt())
    }

    pub fn overlap(&self) -> f64 {
        input_overlap(self.alpha)
    }
}

/// Symmetric loss and excess-noise channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossNoiseChannel {
    /// Transmittivity in `[0, 1]`.
    pub transmittivity: f64,
    /// Excess noise in shot-noise units.
    pub excess_noise: f64,
}

impl LossNoiseChannel {
    pub fn new(transmittivity: f64, excess_noise: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittivity) {
            return Err(Error::InvalidInput { field: "T", reason: format!("{transmittivity} is outside [0, 1]") });
        }
        if !(excess_noise >= 0.0 && excess_noise.is_finite()) {
            return Err(Error::InvalidInput { field: "V", reason: format!("{excess_noise} must be finite and >= 0") });
        }
        Ok(Self { transmittivity, excess_noise })
    }
}

/// 50:50 beamsplitter whose second port carries a thermal state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalSplitterChannel {
    pub n_bar: f64,
}

impl ThermalSplitterChannel {
    pub fn new(n_bar: f64) -> Result<Self> {
        if !(n_bar >= 0.0 && n_bar.is_finite()) {
            return Err(Error::InvalidInput { field: "n_bar", reason: format!("{n_bar} must be finite and >= 0") });
        }
        Ok(Self { n_bar })
    }

    /// Thermal occupation reaching the output mode.
    fn transmitted_occupation(&self) -> f64 {
        0.5 * self.n_bar
    }
}

/// Exactly known largest eigenvalues of both conditional outputs and the
/// overlap of their eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSubspace {
    pub lambda0: f64,
    pub lambda1: f64,
    pub overlap_s: f64,
}

impl ExactSubspace {
    pub fn validate(&self) -> Result<()> {
        for (field, l) in [("lambda0", self.lambda0), ("lambda1", self.lambda1)] {
            if !(l > 0.0 && l <= 1.0) {
                return Err(Error::InvalidInput { field, reason: format!("{l} is outside (0, 1]") });
            }
            if 1.0 - l >= 0.5 {
                return Err(Error::InvalidInput {
                    field,
                    reason: format!("eigenvalue defect {} must be < 1/2", 1.0 - l),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.overlap_s) {
            return Err(Error::InvalidInput {
                field: "overlap_s",
                reason: format!("{} is outside [0, 1]", self.overlap_s),
            });
        }
        Ok(())
    }
}

/// `c = <α|-α> = exp(-2α²)`.
pub fn input_overlap(alpha: f64) -> f64 {
    (-2.0 * alpha * alpha).exp()
}

/// Negativity of the pure input state after the amplitude is scaled by `√T`:
/// `sqrt(1 - c^{2T})`.
pub fn initial_negativity(c: f64, transmittivity: f64) -> f64 {
    (1.0 - c.powf(2.0 * transmittivity)).max(0.0).sqrt()
}

pub fn simulate_loss_noise(input: InputSpec, ch: LossNoiseChannel) -> ProbeRecord {
    let mean = (2.0 * ch.transmittivity).sqrt() * input.alpha;
    let var = 0.5 * (1.0 + ch.excess_noise);
    ProbeRecord {
        state0: ConditionalMoments { mean_x: mean, mean_p: 0.0, var_x: var, var_p: var },
        state1: ConditionalMoments { mean_x: -mean, mean_p: 0.0, var_x: var, var_p: var },
        input_overlap_c: input.overlap(),
        exact: None,
    }
}

/// Exact subspace data of the loss-and-noise outputs: displaced thermal
/// states with occupation `V/2` centred on `±√T α`.
pub fn loss_noise_exact_subspace(input: InputSpec, ch: LossNoiseChannel) -> ExactSubspace {
    let lambda = 1.0 / (0.5 * ch.excess_noise + 1.0);
    let overlap_s = (-2.0 * ch.transmittivity * input.alpha * input.alpha).exp();
    ExactSubspace { lambda0: lambda, lambda1: lambda, overlap_s }
}

/// Moments and exact subspace of the thermal-splitter outputs.
///
/// The outputs are displaced thermal states with occupation `n̄/2`, so their
/// largest eigenvalue is `1/(n̄/2 + 1)` with the coherent state at the mean
/// as eigenvector; those coherent states overlap by `exp(-α²)`.
pub fn simulate_thermal_splitter(input: InputSpec, ch: ThermalSplitterChannel) -> (ProbeRecord, ExactSubspace) {
    let occ = ch.transmitted_occupation();
    let var = 0.5 + occ;
    let mean = input.alpha;
    let lambda = 1.0 / (occ + 1.0);
    let exact = ExactSubspace { lambda0: lambda, lambda1: lambda, overlap_s: (-input.alpha * input.alpha).exp() };
    let probe = ProbeRecord {
        state0: ConditionalMoments { mean_x: mean, mean_p: 0.0, var_x: var, var_p: var },
        state1: ConditionalMoments { mean_x: -mean, mean_p: 0.0, var_x: var, var_p: var },
        input_overlap_c: input.overlap(),
        exact: Some(exact),
    };
    (probe, exact)
}

/// Coherent amplitude `p + q·γ` with real `p`, `q`, where `γ` is the thermal
/// environment amplitude.
#[derive(Clone, Copy)]
struct AffineAmp {
    p: f64,
    q: f64,
}

/// Exponent of a product of coherent overlaps as `k + a·|γ|² + b·γ + c·γ̄`.
#[derive(Default)]
struct GaussExponent {
    k: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl GaussExponent {
    /// Adds the exponent of `<u|w> = exp(-|u|²/2 - |w|²/2 + ū w)`.
    fn add_overlap(&mut self, u: AffineAmp, w: AffineAmp) {
        self.k += -0.5 * u.p * u.p - 0.5 * w.p * w.p + u.p * w.p;
        self.a += -0.5 * u.q * u.q - 0.5 * w.q * w.q + u.q * w.q;
        self.b += -0.5 * u.p * u.q - 0.5 * w.p * w.q + u.p * w.q;
        self.c += -0.5 * u.p * u.q - 0.5 * w.p * w.q + u.q * w.p;
    }

    /// Average over the thermal P-function `exp(-|γ|²/n)/(πn)`.
    fn thermal_average(&self, n: f64) -> f64 {
        if n == 0.0 {
            return self.k.exp();
        }
        let a = 1.0 / n - self.a;
        (self.k + self.b * self.c / a).exp() / (n * a)
    }
}

/// Exact projection of the thermal-splitter output state onto
/// `{|0>,|1>} ⊗ {|e0>, |e1>}`, where `|e0>` is the top eigenvector of the
/// first conditional output and `|λ1⁰> = s|e0> + sqrt(1-s²)|e1>`.
///
/// Block `(a, b)` equals `½ <e_k|E(|a_a><a_b|)|e_l>` with `a_0 = α`, `a_1 = -α`.
pub fn thermal_projected_state(input: InputSpec, ch: ThermalSplitterChannel) -> Result<HermitianMatrix> {
    let alpha = input.alpha;
    let s = (-alpha * alpha).exp();
    if s >= 1.0 - 1e-9 {
        return Err(Error::DegenerateSubspace { s });
    }
    let t = (1.0 - s * s).sqrt();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let beta = alpha * r;
    let inputs = [alpha, -alpha];
    let eigvecs = [AffineAmp { p: beta, q: 0.0 }, AffineAmp { p: -beta, q: 0.0 }];
    // |e0> = |λ0>, |e1> = (|λ1> - s|λ0>)/t, as coefficients over (λ0, λ1).
    let basis = [[1.0, 0.0], [-s / t, 1.0 / t]];

    let gram = |a: usize, b: usize, i: usize, j: usize| -> f64 {
        let out = |x: f64| AffineAmp { p: x * r, q: r };
        let env = |x: f64| AffineAmp { p: -x * r, q: r };
        let mut e = GaussExponent::default();
        e.add_overlap(env(inputs[b]), env(inputs[a]));
        e.add_overlap(eigvecs[i], out(inputs[a]));
        e.add_overlap(out(inputs[b]), eigvecs[j]);
        e.thermal_average(ch.n_bar)
    };

    let mut rho = ComplexMatrix::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let mut v = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            v += basis[k][i] * basis[l][j] * gram(a, b, i, j);
                        }
                    }
                    rho[(2 * a + k, 2 * b + l)] = num_complex::Complex64::new(0.5 * v, 0.0);
                }
            }
        }
    }
    HermitianMatrix::new(rho)
}
