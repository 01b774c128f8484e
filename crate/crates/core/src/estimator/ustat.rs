//! Pairwise sums behind the ratio estimators.
//!
//! Both estimators have the form
//! `μ̂ = Σ_{c,t} Y_c K(U_c, U_t) / Σ_{c,t} K(U_c, U_t)` over control × treated
//! pairs. The per-control inner sums `Σ_t K(U_c, U_t)` are computed
//! independently (in parallel) with compensated summation over treated rows
//! in input order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::density::{ProductKernel, ProjectionBasis};
use crate::summation::NeumaierSum;

/// Treated rows per block in the factored projection sums. Fixed so that the
/// reduction order never depends on scheduling.
const TREATED_BLOCK: usize = 128;

/// `Σ_t K_H(U_c − U_t)` for every control row `c`.
pub fn kernel_inner_sums(control: &[f64], treated: &[f64], dim: usize, kernel: &ProductKernel) -> Vec<f64> {
    control
        .par_chunks(dim)
        .map(|c| {
            let mut acc = NeumaierSum::new();
            for t in treated.chunks_exact(dim) {
                let k = kernel.eval_unchecked(c, t);
                if k != 0.0 {
                    acc.add(k);
                }
            }
            acc.value()
        })
        .collect()
}

/// Per-basis treated sums `s_l = Σ_t ψ_l(U_t)`.
pub fn basis_treated_sums(treated: &[f64], dim: usize, basis: &ProjectionBasis) -> Vec<f64> {
    let l = basis.len();
    let partials: Vec<Vec<f64>> = treated
        .par_chunks(dim * TREATED_BLOCK)
        .map(|block| {
            let mut acc = vec![NeumaierSum::new(); l];
            let mut psi = vec![0.0; l];
            let mut scratch = Vec::new();
            for t in block.chunks_exact(dim) {
                basis.eval_all_with(t, &mut psi, &mut scratch);
                for (a, &v) in acc.iter_mut().zip(&psi) {
                    a.add(v);
                }
            }
            acc.iter().map(NeumaierSum::value).collect()
        })
        .collect();
    let mut total = vec![NeumaierSum::new(); l];
    for part in &partials {
        for (a, &v) in total.iter_mut().zip(part) {
            a.add(v);
        }
    }
    total.iter().map(NeumaierSum::value).collect()
}

/// Factored form of `Σ_t K_L(U_c, U_t) = Σ_l ψ_l(U_c) s_l`, `O((n0 + n1) L)`.
pub fn projection_inner_sums(control: &[f64], treated: &[f64], dim: usize, basis: &ProjectionBasis) -> Vec<f64> {
    let sums = basis_treated_sums(treated, dim, basis);
    control
        .par_chunks(dim)
        .map_init(
            || (vec![0.0; basis.len()], Vec::new()),
            |(psi, scratch), c| {
                basis.eval_all_with(c, psi, scratch);
                let mut acc = NeumaierSum::new();
                for (p, s) in psi.iter().zip(&sums) {
                    acc.add(p * s);
                }
                acc.value()
            },
        )
        .collect()
}

/// Direct double sum with `K_L(U_c, U_t)` evaluated per pair, `O(n0 n1 L)`.
pub fn projection_inner_sums_direct(
    control: &[f64],
    treated: &[f64],
    dim: usize,
    basis: &ProjectionBasis,
) -> Vec<f64> {
    let treated_psi: Vec<Vec<f64>> = treated.chunks_exact(dim).map(|t| basis.eval_all(t)).collect();
    control
        .par_chunks(dim)
        .map(|c| {
            let psi = basis.eval_all(c);
            let mut acc = NeumaierSum::new();
            for tp in &treated_psi {
                let mut k = NeumaierSum::new();
                for (a, b) in psi.iter().zip(tp) {
                    k.add(a * b);
                }
                acc.add(k.value());
            }
            acc.value()
        })
        .collect()
}

/// `(Σ_c Y_c inner_c, Σ_c inner_c)` in control order.
pub fn ratio_parts(inner: &[f64], outcome: &[f64]) -> (f64, f64) {
    let mut num = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    for (&k, &y) in inner.iter().zip(outcome) {
        num.add(k * y);
        den.add(k);
    }
    (num.value(), den.value())
}
