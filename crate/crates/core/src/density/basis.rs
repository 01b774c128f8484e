use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::DensityError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    /// Tensor products of `1, √2 cos(πx), √2 cos(2πx), ...`.
    #[default]
    Cosine,
    /// Tensor products of the Haar system on `[0, 1]`.
    Haar,
}

impl BasisFamily {
    /// The `index`-th orthonormal function on `[0, 1]` of this family.
    #[inline]
    pub fn univariate(self, index: usize, x: f64) -> f64 {
        if index == 0 {
            return 1.0;
        }
        match self {
            BasisFamily::Cosine => SQRT_2 * (index as f64 * PI * x).cos(),
            BasisFamily::Haar => {
                let level = usize::BITS - 1 - index.leading_zeros();
                let shift = index - (1usize << level);
                let scale = (1u64 << level) as f64;
                let t = scale * x - shift as f64;
                let amp = scale.sqrt();
                if (0.0..0.5).contains(&t) {
                    amp
                } else if (0.5..1.0).contains(&t) || (t == 1.0 && shift + 1 == 1usize << level) {
                    -amp
                } else {
                    0.0
                }
            }
        }
    }
}

/// First `L` tensor basis functions on `[0,1]^d`.
///
/// Multi-indices are ordered in blocks of increasing maximum per-axis index:
/// block `m` holds every multi-index whose largest component is `m - 1`, in
/// lexicographic order. `L = m^d` therefore uses exactly the indices with all
/// components below `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBasis {
    family: BasisFamily,
    dim: usize,
    count: usize,
    #[serde(skip)]
    indices: Vec<u32>,
    #[serde(skip)]
    max_index: usize,
}

impl ProjectionBasis {
    pub fn new(family: BasisFamily, dim: usize, count: usize) -> Result<Self, DensityError> {
        if count < 1 {
            return Err(DensityError::EmptyBasis);
        }
        if dim == 0 {
            return Err(DensityError::DimensionMismatch { expected: 1, found: 0 });
        }
        let indices = block_multi_indices(dim, count);
        let max_index = indices.iter().copied().max().unwrap_or(0) as usize;
        Ok(Self { family, dim, count, indices, max_index })
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn multi_index(&self, l: usize) -> &[u32] {
        &self.indices[l * self.dim..(l + 1) * self.dim]
    }

    /// Per-axis tables `φ_a(x_k)` for `a ≤ max_index`, laid out axis-major.
    fn axis_table(&self, x: &[f64], table: &mut Vec<f64>) {
        let m = self.max_index + 1;
        table.clear();
        table.resize(self.dim * m, 0.0);
        for (k, &xk) in x.iter().enumerate() {
            let row = &mut table[k * m..(k + 1) * m];
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = self.family.univariate(a, xk);
            }
        }
    }

    /// Writes `ψ_1(x), ..., ψ_L(x)` into `out` using `scratch` for the axis tables.
    pub fn eval_all_with(&self, x: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        debug_assert_eq!(out.len(), self.count);
        self.axis_table(x, scratch);
        let m = self.max_index + 1;
        for (l, slot) in out.iter_mut().enumerate() {
            let idx = &self.indices[l * self.dim..(l + 1) * self.dim];
            let mut v = 1.0;
            for (k, &a) in idx.iter().enumerate() {
                v *= scratch[k * m + a as usize];
            }
            *slot = v;
        }
    }

    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.count];
        let mut scratch = Vec::new();
        self.eval_all_with(x, &mut out, &mut scratch);
        out
    }

    /// `ψ_l(x)` for a single `l` (0-based).
    pub fn eval(&self, l: usize, x: &[f64]) -> f64 {
        self.multi_index(l)
            .iter()
            .zip(x)
            .map(|(&a, &xk)| self.family.univariate(a as usize, xk))
            .product()
    }

    /// Projection kernel `K_L(u, v) = Σ_l ψ_l(u) ψ_l(v)`.
    pub fn kernel(&self, u: &[f64], v: &[f64]) -> Result<f64, DensityError> {
        if u.len() != self.dim || v.len() != self.dim {
            return Err(DensityError::DimensionMismatch { expected: self.dim, found: u.len().max(v.len()) });
        }
        let a = self.eval_all(u);
        let b = self.eval_all(v);
        Ok(crate::summation::sum(a.iter().zip(&b).map(|(x, y)| x * y)))
    }
}

/// Row-major `count × dim` multi-indices in block order.
fn block_multi_indices(dim: usize, count: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(count * dim);
    let mut prefix = vec![0u32; dim];
    let mut top = 0u32;
    while out.len() < count * dim {
        emit_block(dim, top, 0, false, &mut prefix, &mut out, count);
        top += 1;
    }
    out
}

/// Lexicographic multi-indices with components in `0..=top` and at least one
/// component equal to `top`.
fn emit_block(dim: usize, top: u32, pos: usize, hit: bool, prefix: &mut [u32], out: &mut Vec<u32>, count: usize) {
    if out.len() >= count * dim {
        return;
    }
    if pos == dim {
        if hit {
            out.extend_from_slice(prefix);
        }
        return;
    }
    let last = pos + 1 == dim;
    let start = if last && !hit { top } else { 0 };
    for a in start..=top {
        prefix[pos] = a;
        emit_block(dim, top, pos + 1, hit || a == top, prefix, out, count);
        if out.len() >= count * dim {
            return;
        }
    }
}
