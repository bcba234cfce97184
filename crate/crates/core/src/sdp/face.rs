//! Restriction of blocks to the face of the PSD cone their rows force them
//! onto, and removal of rows that become redundant there.
//!
//! Pinned probe data (zero defect bounds) leave the state block without an
//! interior point, which stalls interior-point methods. A row pair
//! `<F, X> = β`, `<G, X> <= γ` with `W = (β/γ) G − F ⪰ 0` gives `<W, X> <= 0`,
//! hence `X W = 0` on the whole feasible set. Blocks are restricted to the
//! common null space of such certificates.

use num_complex::Complex64;

use super::{SdProblem, SdRow};
use crate::hermitian::{eig_hermitian, ComplexMatrix, HermitianMatrix};
use crate::projection::Sense;

const CERT_TOL: f64 = 1e-12;
const NULL_TOL: f64 = 1e-9;
const DEPENDENT_TOL: f64 = 1e-10;
const IMPLIED_TOL: f64 = 1e-9;

/// Orthonormal columns spanning a face.
pub(crate) type Face = Vec<Vec<Complex64>>;

/// `V^H F V` for the face columns `V`.
pub(crate) fn reduce(f: &HermitianMatrix, face: &Face) -> HermitianMatrix {
    let k = face.len();
    let n = f.dim();
    let mut out = ComplexMatrix::zeros(k);
    for (i, vi) in face.iter().enumerate() {
        for (j, vj) in face.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..n {
                for q in 0..n {
                    acc += vi[p].conj() * f[(p, q)] * vj[q];
                }
            }
            out[(i, j)] = acc;
        }
    }
    HermitianMatrix::symmetrized(&out)
}

/// `V R V^H`.
pub(crate) fn lift(r: &HermitianMatrix, face: &Face, n: usize) -> HermitianMatrix {
    let mut out = ComplexMatrix::zeros(n);
    for (i, vi) in face.iter().enumerate() {
        for (j, vj) in face.iter().enumerate() {
            let rij = r[(i, j)];
            for p in 0..n {
                for q in 0..n {
                    out[(p, q)] += vi[p] * rij * vj[q].conj();
                }
            }
        }
    }
    HermitianMatrix::symmetrized(&out)
}

fn is_psd_certificate(w: &HermitianMatrix) -> bool {
    let Ok(spec) = eig_hermitian(w) else {
        return false;
    };
    let scale = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    scale > 0.0 && spec.eigenvalues.iter().all(|&v| v >= -CERT_TOL * scale.max(1.0))
}

fn single_block(row: &SdRow) -> Option<(usize, &HermitianMatrix)> {
    match row.terms.as_slice() {
        [(k, f)] => Some((*k, f)),
        _ => None,
    }
}

/// Null space of the summed certificates for `block`, or `None` when no row
/// combination forces the block onto a proper face.
fn block_face(prob: &SdProblem, block: usize) -> Option<Face> {
    let n = prob.block_dims[block];
    let rows: Vec<(&HermitianMatrix, Sense, f64)> = prob
        .rows
        .iter()
        .filter_map(|r| single_block(r).filter(|(k, _)| *k == block).map(|(_, f)| (f, r.sense, r.rhs)))
        .collect();
    let mut total = HermitianMatrix::zeros(n);
    let mut found = false;
    for &(f, sense, beta) in &rows {
        if sense != Sense::Eq {
            continue;
        }
        // <F, X> = 0 with F ⪰ 0.
        if beta == 0.0 && is_psd_certificate(f) {
            total = total.add(f);
            found = true;
            continue;
        }
        for &(g, sense_g, gamma) in &rows {
            if sense_g != Sense::Le || gamma <= 0.0 || beta <= 0.0 {
                continue;
            }
            let w = g.scale(beta / gamma).sub(f);
            if is_psd_certificate(&w) {
                total = total.add(&w);
                found = true;
            }
        }
    }
    if !found {
        return None;
    }
    let spec = eig_hermitian(&total).ok()?;
    let top = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let face: Face = spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .filter(|(v, _)| v.abs() <= NULL_TOL * top.max(1.0))
        .map(|(_, vec)| vec.clone())
        .collect();
    (face.len() < n).then_some(face)
}

fn real_vector(h: &HermitianMatrix) -> Vec<f64> {
    let k = h.dim();
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        out.push(h[(i, i)].re);
        for j in i + 1..k {
            out.push(h[(i, j)].re * 2f64.sqrt());
            out.push(h[(i, j)].im * 2f64.sqrt());
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormalized equality rows with their transformed right-hand sides.
#[derive(Default)]
struct EqualitySpan {
    basis: Vec<(Vec<f64>, f64)>,
}

impl EqualitySpan {
    /// Component of `v` outside the span and the value the span forces on `v`.
    fn split(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let mut rest = v.to_vec();
        let mut value = 0.0;
        for (q, beta) in &self.basis {
            let c = dot(&rest, q);
            for (r, qi) in rest.iter_mut().zip(q) {
                *r -= c * qi;
            }
            value += c * beta;
        }
        (rest, value)
    }

    /// Adds `v` unless it is dependent. Returns whether it was added.
    fn push(&mut self, v: &[f64], rhs: f64) -> bool {
        let norm = dot(v, v).sqrt();
        let (rest, value) = self.split(v);
        let rn = dot(&rest, &rest).sqrt();
        if rn <= DEPENDENT_TOL * norm.max(1e-300) {
            return false;
        }
        self.basis.push((rest.iter().map(|x| x / rn).collect(), (rhs - value) / rn));
        true
    }
}

/// Restricts each block to its forced face and drops the single-block rows
/// on it that are dependent equalities or inequalities with a forced value
/// that already satisfies them. Returns the labels of dropped rows.
pub(crate) fn restrict(prob: &mut SdProblem) -> Vec<String> {
    let mut dropped = Vec::new();
    for block in 0..prob.block_dims.len() {
        let Some(face) = block_face(prob, block) else {
            continue;
        };
        let mut span = EqualitySpan::default();
        let mut keep = vec![true; prob.rows.len()];
        let reduced: Vec<Option<Vec<f64>>> = prob
            .rows
            .iter()
            .map(|r| single_block(r).filter(|(k, _)| *k == block).map(|(_, f)| real_vector(&reduce(f, &face))))
            .collect();
        for (i, r) in prob.rows.iter().enumerate() {
            if let (Some(v), Sense::Eq) = (&reduced[i], r.sense) {
                if !span.push(v, r.rhs) {
                    let (_, value) = span.split(v);
                    // Inconsistent dependent rows stay so the solver reports infeasibility.
                    keep[i] = (value - r.rhs).abs() > IMPLIED_TOL;
                }
            }
        }
        for (i, r) in prob.rows.iter().enumerate() {
            let Some(v) = &reduced[i] else { continue };
            if r.sense == Sense::Eq {
                continue;
            }
            let norm = dot(v, v).sqrt();
            let (rest, value) = span.split(v);
            if dot(&rest, &rest).sqrt() > DEPENDENT_TOL * norm.max(1e-300) {
                continue;
            }
            keep[i] = match r.sense {
                Sense::Ge => value < r.rhs - IMPLIED_TOL,
                Sense::Le => value > r.rhs + IMPLIED_TOL,
                Sense::Eq => unreachable!(),
            };
        }
        let mut idx = 0;
        prob.rows.retain(|r| {
            let k = keep[idx];
            idx += 1;
            if !k {
                dropped.push(r.label.clone());
            }
            k
        });
        prob.faces[block] = Some(face);
    }
    dropped
}
