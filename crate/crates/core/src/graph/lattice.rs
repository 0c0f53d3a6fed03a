//! Boxes `B_n` in `Z^d` and `R^d`, and lexicographic site indexing.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxFlavor {
    /// Integer sites `{-n, ..., n-1}^d`.
    Lattice,
    /// The closed cube `[-n, n]^d`.
    Continuum,
}

/// The box `B_n` at scale `n` in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub n: u32,
    pub d: usize,
    pub flavor: BoxFlavor,
}

impl BoxSpec {
    pub fn lattice(n: u32, d: usize) -> Self {
        assert!(n >= 1 && d >= 1, "box needs n >= 1 and d >= 1");
        BoxSpec { n, d, flavor: BoxFlavor::Lattice }
    }

    pub fn continuum(n: u32, d: usize) -> Self {
        assert!(n >= 1 && d >= 1, "box needs n >= 1 and d >= 1");
        BoxSpec { n, d, flavor: BoxFlavor::Continuum }
    }

    /// Side length `2n`.
    pub fn side(&self) -> u64 {
        2 * self.n as u64
    }

    /// `(2n)^d`: number of sites of the lattice box, volume of the continuum one.
    pub fn measure(&self) -> f64 {
        (self.side() as f64).powi(self.d as i32)
    }

    /// Number of lattice sites, `(2n)^d`.
    pub fn site_count(&self) -> usize {
        (self.side() as usize).pow(self.d as u32)
    }

    /// Same flavor and dimension at another scale.
    pub fn rescaled(&self, n: u32) -> Self {
        BoxSpec { n, ..*self }
    }

    pub fn contains_site(&self, x: &[i64]) -> bool {
        let n = self.n as i64;
        x.len() == self.d && x.iter().all(|&c| c >= -n && c < n)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        let n = self.n as f64;
        x.len() == self.d && x.iter().all(|&c| c >= -n && c <= n)
    }

    /// Stride of coordinate `axis` in the lexicographic site index.
    pub fn stride(&self, axis: usize) -> usize {
        (self.side() as usize).pow((self.d - 1 - axis) as u32)
    }

    /// Lexicographic index of a site (first coordinate most significant).
    pub fn site_index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains_site(x) {
            return None;
        }
        let n = self.n as i64;
        let side = self.side() as usize;
        Some(x.iter().fold(0usize, |acc, &c| acc * side + (c + n) as usize))
    }

    /// Inverse of [`BoxSpec::site_index`], written into `out`.
    pub fn site_coords_into(&self, mut idx: usize, out: &mut [i64]) {
        let side = self.side() as usize;
        let n = self.n as i64;
        for axis in (0..self.d).rev() {
            out[axis] = (idx % side) as i64 - n;
            idx /= side;
        }
    }

    pub fn site_coords(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.d];
        self.site_coords_into(idx, &mut out);
        out
    }

    /// Number of nearest-neighbour edges inside the lattice box:
    /// `d (2n)^(d-1) (2n-1)`.
    pub fn edge_count(&self) -> usize {
        let side = self.side() as usize;
        self.d * side.pow(self.d as u32 - 1) * (side - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let b = BoxSpec::lattice(2, 3);
        assert_eq!(b.site_count(), 64);
        for i in 0..b.site_count() {
            let x = b.site_coords(i);
            assert!(b.contains_site(&x));
            assert_eq!(b.site_index(&x), Some(i));
        }
        assert_eq!(b.site_coords(0), vec![-2, -2, -2]);
        assert_eq!(b.site_index(&[2, 0, 0]), None);
    }

    #[test]
    fn edge_count_by_enumeration() {
        let b = BoxSpec::lattice(3, 2);
        let mut count = 0;
        for i in 0..b.site_count() {
            let x = b.site_coords(i);
            for axis in 0..2 {
                let mut y = x.clone();
                y[axis] += 1;
                if b.contains_site(&y) {
                    count += 1;
                }
            }
        }
        assert_eq!(count, b.edge_count());
    }
}
