//! Exact expected extinction times on small graphs.
//!
//! States are infected sets encoded as bitmasks. For every non-empty `S`,
//!
//! ```text
//! q(S) h(S) - Σ_{x∈S} h(S∖x) - Σ_{y∉S} λ·|N(y) ∩ S|·h(S∪y) = 1,   h(∅) = 0,
//! ```
//!
//! with `q(S) = |S| + λ·Σ_{y∉S} |N(y) ∩ S|`. Transitions only move between
//! adjacent popcount levels, so the system is block tridiagonal in `|S|`.
//! Up to [`DIRECT_MAX_VERTICES`] vertices it is solved exactly by block
//! elimination from level 1 upward (dense LU per level); larger graphs use
//! Jacobi-preconditioned BiCGSTAB.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::ContactError;
use crate::graph::Graph;

pub const MAX_EXACT_VERTICES: usize = 20;
pub const DIRECT_MAX_VERTICES: usize = 12;
/// Residual target for both solver routes.
pub const EXACT_TOLERANCE: f64 = 1e-10;
const MAX_KRYLOV_ITERATIONS: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactMethod {
    Auto,
    Direct,
    Iterative,
}

#[derive(Clone, Debug)]
pub struct ExactSolution {
    /// `values[S]` is the expected extinction time from infected set `S`.
    pub values: Vec<f64>,
    /// Normwise backward error `‖Ah − 1‖∞ / (‖A‖∞‖h‖∞ + 1)`.
    pub residual: f64,
    pub vertex_count: usize,
}

impl ExactSolution {
    /// Expected extinction time from full occupancy.
    pub fn from_full(&self) -> f64 {
        self.values[(1usize << self.vertex_count) - 1]
    }
}

struct Chain {
    nv: usize,
    lambda: f64,
    nbr: Vec<u32>,
}

impl Chain {
    fn new(g: &Graph, lambda: f64) -> Result<Self, ContactError> {
        let nv = g.vertex_count();
        if nv == 0 {
            return Err(ContactError::EmptyGraph);
        }
        if nv > MAX_EXACT_VERTICES {
            return Err(ContactError::TooManyVertices { vertices: nv, limit: MAX_EXACT_VERTICES });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ContactError::InvalidConfig(format!("infection rate {lambda} must be finite and >= 0")));
        }
        let nbr = (0..nv)
            .map(|x| g.neighbors(x).iter().fold(0u32, |m, &y| m | (1 << y)))
            .collect();
        Ok(Chain { nv, lambda, nbr })
    }

    fn full(&self) -> u32 {
        ((1u64 << self.nv) - 1) as u32
    }

    /// Healthy vertices `y` with `λ·|N(y) ∩ s| > 0`, paired with that rate.
    fn infections(&self, s: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let lambda = self.lambda;
        (0..self.nv).filter_map(move |y| {
            let bit = 1u32 << y;
            if s & bit != 0 || lambda == 0.0 {
                return None;
            }
            let k = (self.nbr[y] & s).count_ones();
            (k > 0).then_some((s | bit, lambda * k as f64))
        })
    }

    fn exit_rate(&self, s: u32) -> f64 {
        s.count_ones() as f64 + self.infections(s).map(|(_, r)| r).sum::<f64>()
    }

    /// `(A h)(s)` for the absorption operator.
    fn apply_row(&self, s: u32, h: &[f64]) -> f64 {
        let mut acc = self.exit_rate(s) * h[s as usize];
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            acc -= h[(s ^ bit) as usize];
        }
        for (t, r) in self.infections(s) {
            acc -= r * h[t as usize];
        }
        acc
    }

    fn backward_error(&self, h: &[f64]) -> f64 {
        let (res, norm_a) = (1..=self.full())
            .into_par_iter()
            .map(|s| {
                let r = (self.apply_row(s, h) - 1.0).abs();
                // Row sum of |A|: diagonal plus off-diagonals equal to it minus the
                // rate into the empty state.
                let q = self.exit_rate(s);
                (r, 2.0 * q)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        let norm_h = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        res / (norm_a * norm_h + 1.0)
    }

    fn solve_direct(&self) -> Vec<f64> {
        let nv = self.nv;
        let nstates = 1usize << nv;
        let mut levels: Vec<Vec<u32>> = vec![Vec::new(); nv + 1];
        let mut pos = vec![0usize; nstates];
        for s in 0..nstates as u32 {
            let k = s.count_ones() as usize;
            pos[s as usize] = levels[k].len();
            levels[k].push(s);
        }
        // h_k = A_k h_{k+1} + b_k, stored for back-substitution.
        let mut coupling: Vec<DMatrix<f64>> = Vec::with_capacity(nv);
        let mut offsets: Vec<Vec<f64>> = Vec::with_capacity(nv);
        let mut top = 0.0;
        for k in 1..=nv {
            let states = &levels[k];
            let c = states.len();
            let mut m = DMatrix::<f64>::zeros(c, c);
            let mut rhs_b = vec![1.0; c];
            for (i, &s) in states.iter().enumerate() {
                m[(i, i)] = self.exit_rate(s);
                if k > 1 {
                    let a_prev = &coupling[k - 2];
                    let b_prev = &offsets[k - 2];
                    let mut rest = s;
                    while rest != 0 {
                        let bit = rest & rest.wrapping_neg();
                        rest ^= bit;
                        let r = pos[(s ^ bit) as usize];
                        for j in 0..c {
                            m[(i, j)] -= a_prev[(r, j)];
                        }
                        rhs_b[i] += b_prev[r];
                    }
                }
            }
            let ncols = if k < nv { levels[k + 1].len() } else { 0 };
            let mut rhs = DMatrix::<f64>::zeros(c, ncols + 1);
            for (i, &s) in states.iter().enumerate() {
                if k < nv {
                    for (t, r) in self.infections(s) {
                        rhs[(i, pos[t as usize])] += r;
                    }
                }
                rhs[(i, ncols)] = rhs_b[i];
            }
            let sol = m.lu().solve(&rhs).expect("absorption system is nonsingular");
            if k == nv {
                top = sol[(0, 0)];
            } else {
                offsets.push(sol.column(ncols).iter().copied().collect());
                coupling.push(sol.columns(0, ncols).into_owned());
            }
        }
        let mut h = vec![0.0; nstates];
        h[nstates - 1] = top;
        let mut upper: Vec<f64> = vec![top];
        for k in (1..nv).rev() {
            let a = &coupling[k - 1];
            let b = &offsets[k - 1];
            let cur: Vec<f64> = (0..levels[k].len())
                .map(|i| b[i] + (0..upper.len()).map(|j| a[(i, j)] * upper[j]).sum::<f64>())
                .collect();
            for (i, &s) in levels[k].iter().enumerate() {
                h[s as usize] = cur[i];
            }
            upper = cur;
        }
        h
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1..].par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = self.apply_row((i + 1) as u32, x);
        });
    }

    fn solve_iterative(&self) -> Result<Vec<f64>, ContactError> {
        let n = 1usize << self.nv;
        let diag: Vec<f64> = (0..n as u32).map(|s| if s == 0 { 1.0 } else { self.exit_rate(s) }).collect();
        let precondition = |v: &[f64]| -> Vec<f64> { v.iter().zip(&diag).map(|(a, d)| a / d).collect() };
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.par_iter().zip(b).map(|(x, y)| x * y).sum() };
        let mut b = vec![1.0; n];
        b[0] = 0.0;
        let bnorm = dot(&b, &b).sqrt();
        let mut x = vec![0.0; n];
        let mut r = b.clone();
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut t = vec![0.0; n];
        for _ in 0..MAX_KRYLOV_ITERATIONS {
            let rho_next = dot(&r_hat, &r);
            if rho_next == 0.0 {
                break;
            }
            let beta = (rho_next / rho) * (alpha / omega);
            rho = rho_next;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            let y = precondition(&p);
            self.apply(&y, &mut v);
            alpha = rho / dot(&r_hat, &v);
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            if dot(&s, &s).sqrt() <= EXACT_TOLERANCE * bnorm {
                for i in 0..n {
                    x[i] += alpha * y[i];
                }
                return Ok(x);
            }
            let z = precondition(&s);
            self.apply(&z, &mut t);
            omega = dot(&t, &s) / dot(&t, &t);
            for i in 0..n {
                x[i] += alpha * y[i] + omega * z[i];
                r[i] = s[i] - omega * t[i];
            }
            if dot(&r, &r).sqrt() <= EXACT_TOLERANCE * bnorm {
                return Ok(x);
            }
        }
        Err(ContactError::NotConverged { iterations: MAX_KRYLOV_ITERATIONS })
    }
}

/// Expected extinction time from every infected set.
pub fn exact_extinction_times(g: &Graph, lambda: f64, method: ExactMethod) -> Result<ExactSolution, ContactError> {
    let chain = Chain::new(g, lambda)?;
    let direct = match method {
        ExactMethod::Auto => chain.nv <= DIRECT_MAX_VERTICES,
        ExactMethod::Direct => true,
        ExactMethod::Iterative => false,
    };
    let values = if direct { chain.solve_direct() } else { chain.solve_iterative()? };
    let residual = chain.backward_error(&values);
    if residual > EXACT_TOLERANCE {
        return Err(ContactError::ResidualTooLarge { residual });
    }
    Ok(ExactSolution { values, residual, vertex_count: chain.nv })
}

/// `E[τ_G]` from full occupancy.
pub fn exact_expected_extinction(g: &Graph, lambda: f64) -> Result<f64, ContactError> {
    exact_extinction_times(g, lambda, ExactMethod::Auto).map(|s| s.from_full())
}

/// Write the absorption system in MatrixMarket coordinate format. Row and
/// column `i` (1-based) is the infected set with bitmask `i`; the
/// right-hand side is the all-ones vector.
pub fn dump_absorption_system<W: Write>(g: &Graph, lambda: f64, mut w: W) -> Result<(), ContactError> {
    let chain = Chain::new(g, lambda)?;
    let full = chain.full();
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    for s in 1..=full {
        entries.push((s, s, chain.exit_rate(s)));
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            if s ^ bit != 0 {
                entries.push((s, s ^ bit, -1.0));
            }
        }
        for (t, r) in chain.infections(s) {
            entries.push((s, t, -r));
        }
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "% contact process absorption system: lambda={lambda} vertices={}", chain.nv)?;
    writeln!(w, "% row/column index = infected-set bitmask; right-hand side = all ones")?;
    writeln!(w, "{full} {full} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{i} {j} {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(k: usize) -> f64 {
        (1..=k).map(|i| 1.0 / i as f64).sum()
    }

    #[test]
    fn hand_values() {
        assert_eq!(exact_expected_extinction(&Graph::path(1), 3.0).unwrap(), 1.0);
        // E[τ | both] = 1 + (1 + λ)/2 on K2
        assert!((exact_expected_extinction(&Graph::complete(2), 2.0).unwrap() - 2.5).abs() < 1e-12);
        assert!((exact_expected_extinction(&Graph::path(3), 0.0).unwrap() - 11.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_is_harmonic_number() {
        for g in [Graph::path(5), Graph::cycle(4), Graph::star(4), Graph::complete(6)] {
            let k = g.vertex_count();
            assert!((exact_expected_extinction(&g, 0.0).unwrap() - harmonic(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_and_iterative_agree() {
        for (g, lambda) in [(Graph::path(8), 2.0), (Graph::cycle(7), 1.0), (Graph::star(6), 0.5)] {
            let d = exact_extinction_times(&g, lambda, ExactMethod::Direct).unwrap();
            let i = exact_extinction_times(&g, lambda, ExactMethod::Iterative).unwrap();
            for (a, b) in d.values.iter().zip(&i.values) {
                assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn too_many_vertices() {
        assert!(matches!(
            exact_expected_extinction(&Graph::path(21), 1.0),
            Err(ContactError::TooManyVertices { vertices: 21, .. })
        ));
    }

    #[test]
    fn dump_is_coordinate_format() {
        let mut buf = Vec::new();
        dump_absorption_system(&Graph::complete(2), 2.0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('%')).collect();
        // states 1, 2, 3; entries: 3 diagonals, 2 infections, 2 recoveries
        assert_eq!(lines[0], "3 3 7");
        assert!(lines.contains(&"3 3 2"));
        assert!(lines.contains(&"1 3 -2"));
        assert!(lines.contains(&"3 1 -1"));
    }
}
