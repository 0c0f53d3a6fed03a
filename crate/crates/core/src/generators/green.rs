//! Green function of simple random walk killed on leaving a lattice box.
//!
//! `g(x, y)` is the expected number of visits to `y` by the walk started at
//! `x` before it first exits the box; as a matrix, `g = (I - P)^{-1}` with
//! `P` the walk's transition matrix restricted to the box. `I - P` is
//! symmetric positive definite, so columns are computed by conjugate
//! gradients.

use rayon::prelude::*;

use super::GenError;
use crate::graph::BoxSpec;

/// Relative residual at which a column solve stops.
pub const GREEN_TOLERANCE: f64 = 1e-12;

/// Apply `I - P` on the sites of `bx` (zero boundary values outside).
fn apply_killed_laplacian(bx: &BoxSpec, x: &[f64], out: &mut [f64]) {
    let d = bx.d;
    let side = bx.side() as usize;
    let inv = 1.0 / (2 * d) as f64;
    let strides: Vec<usize> = (0..d).map(|a| bx.stride(a)).collect();
    let mut pos = vec![0usize; d];
    for i in 0..x.len() {
        let mut acc = 0.0;
        for a in 0..d {
            if pos[a] > 0 {
                acc += x[i - strides[a]];
            }
            if pos[a] + 1 < side {
                acc += x[i + strides[a]];
            }
        }
        out[i] = x[i] - inv * acc;
        // odometer increment, last axis fastest
        for a in (0..d).rev() {
            pos[a] += 1;
            if pos[a] < side {
                break;
            }
            pos[a] = 0;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Column `g(·, y)` for the site with lexicographic index `target`.
pub fn green_column(bx: &BoxSpec, target: usize) -> Result<Vec<f64>, GenError> {
    let n = bx.site_count();
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; n];
    r[target] = 1.0;
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = 1.0;
    let max_iter = 20 * n.max(100);
    for _ in 0..max_iter {
        apply_killed_laplacian(bx, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        if rr_next.sqrt() <= GREEN_TOLERANCE {
            return Ok(x);
        }
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
    }
    Err(GenError::SolverDidNotConverge { iterations: max_iter })
}

/// `g(x, y)` for the walk killed on exiting `bx`.
pub fn killed_green(bx: &BoxSpec, x: &[i64], y: &[i64]) -> Result<f64, GenError> {
    let xi = bx.site_index(x).ok_or_else(|| GenError::InvalidParameter(format!("{x:?} outside box")))?;
    let yi = bx.site_index(y).ok_or_else(|| GenError::InvalidParameter(format!("{y:?} outside box")))?;
    Ok(green_column(bx, yi)?[xi])
}

/// Dense matrix `g(t_i, t_j)` over target sites of the killing box,
/// symmetrised. Columns are solved in parallel.
pub fn green_matrix(bx: &BoxSpec, targets: &[usize]) -> Result<Vec<Vec<f64>>, GenError> {
    let columns: Vec<Vec<f64>> = targets
        .par_iter()
        .map(|&t| green_column(bx, t).map(|col| targets.iter().map(|&s| col[s]).collect()))
        .collect::<Result<_, _>>()?;
    let k = targets.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = 0.5 * (columns[j][i] + columns[i][j]);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Independent route: Dirichlet eigen-expansion on the box, whose
    /// eigenvectors are products of sines.
    fn spectral_green(bx: &BoxSpec, x: &[i64], y: &[i64]) -> f64 {
        let side = bx.side() as usize;
        let l1 = (side + 1) as f64;
        let d = bx.d;
        let to_j = |c: i64| (c + bx.n as i64 + 1) as f64;
        let mut total = 0.0;
        let modes = side.pow(d as u32);
        for idx in 0..modes {
            let mut rem = idx;
            let mut prod = 1.0;
            let mut mu = 0.0;
            for a in 0..d {
                let k = (rem % side + 1) as f64;
                rem /= side;
                prod *= (2.0 / l1) * (PI * k * to_j(x[a]) / l1).sin() * (PI * k * to_j(y[a]) / l1).sin();
                mu += (PI * k / l1).cos();
            }
            total += prod / (1.0 - mu / d as f64);
        }
        total
    }

    #[test]
    fn cg_matches_spectral_expansion() {
        let bx = BoxSpec::lattice(4, 3);
        for (x, y) in [([0, 0, 0], [0, 0, 0]), ([0, 0, 0], [1, 0, 0]), ([-4, 2, 3], [1, -1, 0])] {
            let cg = killed_green(&bx, &x, &y).unwrap();
            let sp = spectral_green(&bx, &x, &y);
            assert!((cg - sp).abs() < 1e-9, "{x:?} {y:?}: {cg} vs {sp}");
        }
    }

    #[test]
    fn one_dimensional_gambler_ruin() {
        // On {−n..n−1} killed outside, g(x,x) = 2 (x+n+1)(n−x) / (2n+1).
        let bx = BoxSpec::lattice(5, 1);
        for x in -5i64..5 {
            let exact = 2.0 * (x + 6) as f64 * (5 - x) as f64 / 11.0;
            assert!((killed_green(&bx, &[x], &[x]).unwrap() - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn green_increases_with_box() {
        let g4 = killed_green(&BoxSpec::lattice(4, 3), &[0, 0, 0], &[0, 0, 0]).unwrap();
        let g8 = killed_green(&BoxSpec::lattice(8, 3), &[0, 0, 0], &[0, 0, 0]).unwrap();
        assert!(g4 < g8);
        // full-lattice value is about 1.516
        assert!(g8 < 1.52);
    }
}
