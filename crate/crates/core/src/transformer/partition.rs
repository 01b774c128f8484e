//! Hierarchical equal-count partition of `[0,1]^d` built from control points.
//!
//! Level `k` of the tree splits the points of one prefix `(j_1, ..., j_{k-1})`
//! into `N0` groups along coordinate `k`, so that with `n0 = N0^d` every leaf
//! cube holds exactly one point.

use serde::{Deserialize, Serialize};

use super::{SmoothingKernel, TransformError};

/// One node of the partition tree: the breakpoints of a partition of `[0,1]`
/// along one coordinate, and (below the last level) one child per interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionNode {
    pub breakpoints: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub children: Vec<PartitionNode>,
}

impl PartitionNode {
    pub fn intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Index of the half-open interval `[b_j, b_{j+1})` containing `x`; the
    /// last interval is closed at 1.
    #[inline]
    pub fn locate(&self, x: f64) -> usize {
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        interior.partition_point(|&b| b <= x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    dim: usize,
    cells_per_axis: usize,
    root: PartitionNode,
    /// Row-major `n0 × d` cube indices (0-based) assigned during construction.
    #[serde(skip)]
    cell_assignment: Vec<usize>,
}

/// Largest `N0` with `N0^d <= n`.
pub fn cells_per_axis(n: usize, dim: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let mut guess = (n as f64).powf(1.0 / dim as f64).round() as usize;
    let pow = |b: usize| -> Option<usize> { (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(b)) };
    while guess > 1 && pow(guess).is_none_or(|p| p > n) {
        guess -= 1;
    }
    while pow(guess + 1).is_some_and(|p| p <= n) {
        guess += 1;
    }
    guess.max(1)
}

/// Sizes of `groups` consecutive groups of `m` sorted points, as equal as
/// possible with the remainder going to the lowest-index groups.
fn group_sizes(m: usize, groups: usize) -> impl Iterator<Item = usize> {
    let base = m / groups;
    let rem = m % groups;
    (0..groups).map(move |g| base + usize::from(g < rem))
}

impl Partition {
    /// Builds the partition from row-major control points in `[0,1]^d`.
    ///
    /// Ties along a coordinate are ordered by row index.
    pub fn build(points: &[f64], dim: usize) -> Result<Self, TransformError> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(TransformError::DimensionMismatch { expected: dim, found: points.len() });
        }
        let n = points.len() / dim;
        if n == 0 {
            return Err(TransformError::TooFewPoints(n));
        }
        if let Some(pos) = points.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(TransformError::OutOfDomain { row: pos / dim, coordinate: pos % dim, value: points[pos] });
        }
        let n0 = cells_per_axis(n, dim);
        let mut cell_assignment = vec![0usize; n * dim];
        let indices: Vec<usize> = (0..n).collect();
        let root = split(points, dim, n0, indices, 0, &mut cell_assignment);
        Ok(Self { dim, cells_per_axis: n0, root, cell_assignment })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N0`, the number of intervals at every node.
    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn root(&self) -> &PartitionNode {
        &self.root
    }

    pub fn n_points(&self) -> usize {
        self.cell_assignment.len() / self.dim
    }

    /// Cube index `(j_1, ..., j_d)` (0-based) assigned to construction point `i`.
    pub fn cell_of(&self, i: usize) -> &[usize] {
        &self.cell_assignment[i * self.dim..(i + 1) * self.dim]
    }

    /// Cube index containing `x`, following the half-open convention.
    pub fn locate(&self, x: &[f64]) -> Vec<usize> {
        let mut node = &self.root;
        let mut cell = Vec::with_capacity(self.dim);
        for (k, &xk) in x.iter().enumerate() {
            let j = node.locate(xk);
            cell.push(j);
            if k + 1 < self.dim {
                node = &node.children[j];
            }
        }
        cell
    }

    /// Evaluates the adaptive uniform transformer at `x ∈ [0,1]^d`.
    ///
    /// Coordinate `k` maps to `(j_k + T_S((x_k - M(I)) / |I|)) / N0`, where
    /// `I` is the interval of the current prefix containing `x_k`. The result
    /// always lies in the half-open grid cell `[j_k/N0, (j_k+1)/N0)`.
    pub fn transform(&self, smoothing: &SmoothingKernel, x: &[f64], out: &mut [f64]) {
        let n0 = self.cells_per_axis as f64;
        let mut node = &self.root;
        for k in 0..self.dim {
            let xk = x[k].clamp(0.0, 1.0);
            let j = node.locate(xk);
            let left = node.breakpoints[j];
            let right = node.breakpoints[j + 1];
            let width = right - left;
            let offset = (xk - 0.5 * (left + right)) / width;
            let lower = j as f64 / n0;
            let upper = (j + 1) as f64 / n0;
            let v = lower + smoothing.cdf(offset) / n0;
            out[k] = if j + 1 == self.cells_per_axis { v.clamp(lower, 1.0) } else { v.clamp(lower, upper.next_down()) };
            if k + 1 < self.dim {
                node = &node.children[j];
            }
        }
    }

    /// Serializes the breakpoint tree as JSON.
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

fn split(
    points: &[f64],
    dim: usize,
    n0: usize,
    mut group: Vec<usize>,
    level: usize,
    assignment: &mut [usize],
) -> PartitionNode {
    let coord = |i: usize| points[i * dim + level];
    group.sort_by(|&a, &b| coord(a).total_cmp(&coord(b)).then(a.cmp(&b)));

    let mut breakpoints = Vec::with_capacity(n0 + 1);
    breakpoints.push(0.0);
    let mut children = Vec::new();
    let mut start = 0;
    for (g, size) in group_sizes(group.len(), n0).enumerate() {
        let end = start + size;
        if g + 1 < n0 {
            let prev: f64 = *breakpoints.last().unwrap();
            let mid = 0.5 * (coord(group[end - 1]) + coord(group[end]));
            // Tied coordinates can collapse an interval; keep breakpoints strictly increasing.
            breakpoints.push(if mid > prev { mid } else { prev.next_up() });
        }
        for &i in &group[start..end] {
            assignment[i * dim + level] = g;
        }
        if level + 1 < dim {
            children.push(split(points, dim, n0, group[start..end].to_vec(), level + 1, assignment));
        }
        start = end;
    }
    breakpoints.push(1.0);
    PartitionNode { breakpoints, children }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unif_points(n: usize, dim: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n * dim).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn cells_per_axis_is_integer_root() {
        assert_eq!(cells_per_axis(1, 1), 1);
        assert_eq!(cells_per_axis(9, 2), 3);
        assert_eq!(cells_per_axis(10, 2), 3);
        assert_eq!(cells_per_axis(8, 2), 2);
        assert_eq!(cells_per_axis(1000, 3), 10);
        assert_eq!(cells_per_axis(999, 3), 9);
        assert_eq!(cells_per_axis(500, 4), 4);
        assert_eq!(cells_per_axis(3, 2), 1);
    }

    #[test]
    fn group_sizes_differ_by_at_most_one() {
        assert_eq!(group_sizes(10, 3).collect::<Vec<_>>(), vec![4, 3, 3]);
        assert_eq!(group_sizes(11, 3).collect::<Vec<_>>(), vec![4, 4, 3]);
        assert_eq!(group_sizes(9, 3).collect::<Vec<_>>(), vec![3, 3, 3]);
    }

    #[test]
    fn single_point_gives_unit_interval() {
        let p = Partition::build(&[0.3], 1).unwrap();
        assert_eq!(p.cells_per_axis(), 1);
        assert_eq!(p.root().breakpoints, vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_points_outside_cube() {
        assert!(matches!(
            Partition::build(&[0.2, 1.5], 1),
            Err(TransformError::OutOfDomain { row: 1, coordinate: 0, .. })
        ));
        assert!(matches!(Partition::build(&[], 1), Err(TransformError::TooFewPoints(0))));
    }

    #[test]
    fn four_points_in_the_plane() {
        let pts = [0.1, 0.1, 0.2, 0.9, 0.8, 0.2, 0.9, 0.8];
        let p = Partition::build(&pts, 2).unwrap();
        assert_eq!(p.cells_per_axis(), 2);
        assert_eq!(p.root().breakpoints, vec![0.0, 0.5, 1.0]);
        // Slab 0 holds (.1,.1), (.2,.9): split at (0.1 + 0.9) / 2.
        assert_eq!(p.root().children[0].breakpoints, vec![0.0, 0.5, 1.0]);
        // Slab 1 holds (.8,.2), (.9,.8): split at (0.2 + 0.8) / 2.
        assert_eq!(p.root().children[1].breakpoints, vec![0.0, 0.5, 1.0]);
        assert_eq!(p.cell_of(0), &[0, 0]);
        assert_eq!(p.cell_of(1), &[0, 1]);
        assert_eq!(p.cell_of(2), &[1, 0]);
        assert_eq!(p.cell_of(3), &[1, 1]);
    }

    #[test]
    fn nine_point_layout_one_point_per_cell() {
        // Picture coordinates (horizontal, vertical) on a 4×4 canvas; the first
        // coordinate is the vertical axis.
        let canvas = [
            (0.5, 0.2),
            (2.3, 0.9),
            (3.7, 0.6),
            (1.2, 2.3),
            (2.0, 1.6),
            (3.5, 2.6),
            (0.7, 3.3),
            (2.8, 3.6),
            (3.9, 3.0),
        ];
        let pts: Vec<f64> = canvas.iter().flat_map(|&(h, v)| [v / 4.0, h / 4.0]).collect();
        let p = Partition::build(&pts, 2).unwrap();
        assert_eq!(p.cells_per_axis(), 3);
        // Row slabs split between vertical 0.9|1.6 and 2.6|3.0, matching the
        // dashed lines at 1 and 2.7 in group membership.
        let slabs: Vec<usize> = (0..9).map(|i| p.cell_of(i)[0]).collect();
        assert_eq!(slabs, vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);
        let b = &p.root().breakpoints;
        assert!((b[1] - 1.25 / 4.0).abs() < 1e-15 && (b[2] - 2.8 / 4.0).abs() < 1e-15);
        let mut cells: Vec<Vec<usize>> = (0..9).map(|i| p.cell_of(i).to_vec()).collect();
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), 9);
        // Vertical dashed segments at 1.1/2.5, 1.4/2.2, 0.9/2.9 separate the
        // same points as the midpoint breakpoints.
        let figure_lines = [[1.1, 2.5], [1.4, 2.2], [0.9, 2.9]];
        for (i, &(h, _)) in canvas.iter().enumerate() {
            let slab = slabs[i];
            let by_figure = figure_lines[slab].iter().filter(|&&l| h > l).count();
            assert_eq!(p.cell_of(i)[1], by_figure, "point {i}");
        }
    }

    #[test]
    fn locate_agrees_with_assignment_and_grid() {
        let s = SmoothingKernel::Quartic;
        for (dim, n0) in [(1usize, 17usize), (2, 6), (3, 4)] {
            let n = n0.pow(dim as u32);
            let pts = unif_points(n, dim, 11 + dim as u64);
            let p = Partition::build(&pts, dim).unwrap();
            assert_eq!(p.cells_per_axis(), n0);
            let mut out = vec![0.0; dim];
            for i in 0..n {
                let x = &pts[i * dim..(i + 1) * dim];
                assert_eq!(p.locate(x), p.cell_of(i));
                p.transform(&s, x, &mut out);
                for k in 0..dim {
                    let j = p.cell_of(i)[k] as f64;
                    assert!(out[k] >= j / n0 as f64 && out[k] < (j + 1.0) / n0 as f64);
                }
            }
        }
    }

    #[test]
    fn uneven_occupancy_differs_by_at_most_one() {
        let pts = unif_points(37, 2, 5);
        let p = Partition::build(&pts, 2).unwrap();
        assert_eq!(p.cells_per_axis(), 6);
        let mut counts = vec![0usize; 36];
        for i in 0..37 {
            let c = p.cell_of(i);
            counts[c[0] * 6 + c[1]] += 1;
        }
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        assert!(hi - lo <= 1);
    }

    #[test]
    fn breakpoints_tile_unit_interval_with_ties() {
        let pts = [0.5, 0.5, 0.5, 0.5, 0.2, 0.9, 0.5, 0.5, 0.5];
        let p = Partition::build(&pts, 1).unwrap();
        let b = &p.root().breakpoints;
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 1.0);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn json_tree_round_trips_breakpoints() {
        let pts = unif_points(16, 2, 3);
        let p = Partition::build(&pts, 2).unwrap();
        let json = p.to_json().unwrap();
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back.root(), p.root());
    }
}
