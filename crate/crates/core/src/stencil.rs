//! Radial finite-difference stencils on the staggered grid.
//!
//! Interior rows use second-order centered differences. Row 0 borrows a ghost
//! value from across the pole: `f(-r, theta) = parity * f(r, theta + pi)`, with
//! parity `+1` for scalars and `-1` for polar vector components or radial
//! derivatives of scalars. The outer row takes a centered difference through a
//! cubic ghost, built from the wall value at `r = 1` when known and from the
//! last four rows otherwise.

use crate::grid::PolarGrid;

/// Behaviour of a quantity under `r -> -r` (equivalently `theta -> theta + pi`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Ghost at `1 + dr/2` from the wall value and the last three rows (nodes at
/// offsets `0, -1/2, -3/2, -5/2` in units of `dr`). Cubic, so the centered
/// difference through the ghost keeps the interior truncation error.
pub(crate) const GHOST_FROM_WALL: [f64; 4] = [16.0 / 5.0, -3.0, 1.0, -1.0 / 5.0];
/// First derivative at the wall from the wall value and the last three rows, times `dr`.
pub(crate) const WALL_SLOPE_WITH_VALUE: [f64; 4] = [46.0 / 15.0, -15.0 / 4.0, 5.0 / 6.0, -3.0 / 20.0];
/// Ghost at `1 + dr/2` from the last four rows.
pub(crate) const GHOST_ONE_SIDED: [f64; 4] = [4.0, -6.0, 4.0, -1.0];
/// First derivative at the wall from the last four rows, times `dr`.
pub(crate) const WALL_SLOPE_ONE_SIDED: [f64; 4] = [71.0 / 24.0, -47.0 / 8.0, 31.0 / 8.0, -23.0 / 24.0];
/// Value at the wall extrapolated from the last four rows.
pub(crate) const WALL_VALUE_ONE_SIDED: [f64; 4] = [35.0 / 16.0, -35.0 / 16.0, 21.0 / 16.0, -5.0 / 16.0];

/// Second derivative at the wall from the wall value and the last three rows, times `dr^2`.
pub(crate) const WALL_CURVATURE_WITH_VALUE: [f64; 4] = [24.0 / 5.0, -8.0, 4.0, -4.0 / 5.0];
/// Second derivative at the wall from the last four rows, times `dr^2`.
pub(crate) const WALL_CURVATURE_ONE_SIDED: [f64; 4] = [5.0 / 2.0, -13.0 / 2.0, 11.0 / 2.0, -3.0 / 2.0];

fn dot4(w: &[f64; 4], v: [f64; 4]) -> f64 {
    w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + w[3] * v[3]
}

/// Ghost value at `1 + dr/2` for angle `k`, from the wall value when known.
pub(crate) fn outer_ghost(grid: &PolarGrid, values: &[f64], wall: Option<&[f64]>, k: usize) -> f64 {
    let n_r = grid.n_r();
    let n_t = grid.n_theta();
    let row = |j: usize| values[j * n_t + k];
    match wall {
        Some(b) => dot4(&GHOST_FROM_WALL, [b[k], row(n_r - 1), row(n_r - 2), row(n_r - 3)]),
        None => dot4(&GHOST_ONE_SIDED, [row(n_r - 1), row(n_r - 2), row(n_r - 3), row(n_r - 4)]),
    }
}

/// Finite-difference weights (Fornberg's recursion) for the `order`-th
/// derivative at `x0` from values at `nodes`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Radial derivative at every node.
///
/// `wall` supplies values at `r = 1` per angle when known. Returns the node
/// derivatives and the derivative extrapolated to the wall.
pub fn radial_derivative(
    grid: &PolarGrid,
    values: &[f64],
    parity: Parity,
    wall: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>) {
    let n_r = grid.n_r();
    let n_t = grid.n_theta();
    let half = n_t / 2;
    let h = grid.dr();
    let inv_2h = 0.5 / h;
    let sign = parity.sign();
    let mut out = vec![0.0; values.len()];
    for k in 0..n_t {
        let ghost = sign * values[(k + half) % n_t];
        out[k] = (values[n_t + k] - ghost) * inv_2h;
    }
    for j in 1..n_r - 1 {
        let (lo, mid, hi) = ((j - 1) * n_t, j * n_t, (j + 1) * n_t);
        for k in 0..n_t {
            out[mid + k] = (values[hi + k] - values[lo + k]) * inv_2h;
        }
    }
    let last = (n_r - 1) * n_t;
    let row = |j: usize, k: usize| values[j * n_t + k];
    let mut wall_slope = vec![0.0; n_t];
    for k in 0..n_t {
        let ghost = outer_ghost(grid, values, wall, k);
        out[last + k] = (ghost - row(n_r - 2, k)) * inv_2h;
        wall_slope[k] = match wall {
            Some(b) => dot4(&WALL_SLOPE_WITH_VALUE, [b[k], row(n_r - 1, k), row(n_r - 2, k), row(n_r - 3, k)]),
            None => dot4(
                &WALL_SLOPE_ONE_SIDED,
                [row(n_r - 1, k), row(n_r - 2, k), row(n_r - 3, k), row(n_r - 4, k)],
            ),
        } / h;
    }
    (out, wall_slope)
}

/// Second radial derivative at `r = 1`, per angle.
pub fn wall_second_derivative(grid: &PolarGrid, values: &[f64], wall: Option<&[f64]>) -> Vec<f64> {
    let n_r = grid.n_r();
    let n_t = grid.n_theta();
    let h2 = grid.dr() * grid.dr();
    let row = |j: usize, k: usize| values[j * n_t + k];
    (0..n_t)
        .map(|k| {
            let v = match wall {
                Some(b) => dot4(&WALL_CURVATURE_WITH_VALUE, [b[k], row(n_r - 1, k), row(n_r - 2, k), row(n_r - 3, k)]),
                None => dot4(
                    &WALL_CURVATURE_ONE_SIDED,
                    [row(n_r - 1, k), row(n_r - 2, k), row(n_r - 3, k), row(n_r - 4, k)],
                ),
            };
            v / h2
        })
        .collect()
}

/// Values at `r = 1` extrapolated from the last four rows.
pub fn extrapolate_to_wall(grid: &PolarGrid, values: &[f64]) -> Vec<f64> {
    let n_r = grid.n_r();
    let n_t = grid.n_theta();
    let row = |j: usize, k: usize| values[j * n_t + k];
    (0..n_t)
        .map(|k| dot4(&WALL_VALUE_ONE_SIDED, [row(n_r - 1, k), row(n_r - 2, k), row(n_r - 3, k), row(n_r - 4, k)]))
        .collect()
}
