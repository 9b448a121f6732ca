use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Hard cap on spatial rank. Everything in this crate works in 1, 2, or 3
/// space dimensions; fixed-size arrays avoid per-point allocation.
pub const MAX_RANK: usize = 3;

/// A spatial point. Axes beyond the grid rank are zero and ignored.
pub type Point = [f64; MAX_RANK];

/// A multi-index into a grid. Axes beyond the grid rank are zero.
pub type Idx = [usize; MAX_RANK];

/// Uniform cell-centered grid over a box or torus.
///
/// Cell `i` along axis `a` has its sample point at `origin[a] + (i + 1/2) * h[a]`.
/// Periodic axes wrap indices modulo `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    rank: usize,
    n: Idx,
    h: Point,
    periodic: [bool; MAX_RANK],
    origin: Point,
}

impl GridSpec {
    pub fn new(n: &[usize], h: &[f64], periodic: &[bool], origin: &[f64]) -> Result<Self> {
        let rank = n.len();
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::Domain(format!("grid rank {rank} outside 1..=3")));
        }
        if h.len() != rank || periodic.len() != rank || origin.len() != rank {
            return Err(Error::Domain("grid axis arrays must share length".into()));
        }
        let mut g = GridSpec {
            rank,
            n: [1; MAX_RANK],
            h: [1.0; MAX_RANK],
            periodic: [false; MAX_RANK],
            origin: [0.0; MAX_RANK],
        };
        for a in 0..rank {
            if n[a] < 2 {
                return Err(Error::Domain(format!("axis {a}: need at least 2 points")));
            }
            if !(h[a] > 0.0) || !h[a].is_finite() {
                return Err(Error::Domain(format!("axis {a}: spacing must be positive")));
            }
            g.n[a] = n[a];
            g.h[a] = h[a];
            g.periodic[a] = periodic[a];
            g.origin[a] = origin[a];
        }
        Ok(g)
    }

    /// Periodic unit torus-style grid: `n` cells per axis over extent 1.
    pub fn torus(rank: usize, n: usize) -> Result<Self> {
        let h = 1.0 / n as f64;
        Self::new(
            &vec![n; rank],
            &vec![h; rank],
            &vec![true; rank],
            &vec![0.0; rank],
        )
    }

    /// Zero-origin box grid with the given per-axis extent, all axes non-periodic.
    pub fn boxed(n: &[usize], extent: &[f64]) -> Result<Self> {
        let h: Vec<f64> = n
            .iter()
            .zip(extent)
            .map(|(&ni, &e)| e / ni as f64)
            .collect();
        Self::new(n, &h, &vec![false; n.len()], &vec![0.0; n.len()])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n(&self, a: usize) -> usize {
        self.n[a]
    }

    pub fn h(&self, a: usize) -> f64 {
        self.h[a]
    }

    pub fn origin(&self, a: usize) -> f64 {
        self.origin[a]
    }

    pub fn is_periodic(&self, a: usize) -> bool {
        self.periodic[a]
    }

    pub fn fully_periodic(&self) -> bool {
        (0..self.rank).all(|a| self.periodic[a])
    }

    pub fn extent(&self, a: usize) -> f64 {
        self.n[a] as f64 * self.h[a]
    }

    pub fn min_extent(&self) -> f64 {
        (0..self.rank).map(|a| self.extent(a)).fold(f64::MAX, f64::min)
    }

    pub fn max_h(&self) -> f64 {
        (0..self.rank).map(|a| self.h[a]).fold(0.0, f64::max)
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        (0..self.rank).map(|a| self.n[a]).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_vol(&self) -> f64 {
        (0..self.rank).map(|a| self.h[a]).product()
    }

    /// Coordinate of the cell center along one axis.
    pub fn center(&self, a: usize, i: usize) -> f64 {
        self.origin[a] + (i as f64 + 0.5) * self.h[a]
    }

    pub fn point_of(&self, idx: Idx) -> Point {
        let mut p = [0.0; MAX_RANK];
        for a in 0..self.rank {
            p[a] = self.center(a, idx[a]);
        }
        p
    }

    /// Row-major linear index, axis 0 slowest.
    pub fn linear(&self, idx: Idx) -> usize {
        let mut k = 0;
        for a in 0..self.rank {
            k = k * self.n[a] + idx[a];
        }
        k
    }

    pub fn unlinear(&self, mut k: usize) -> Idx {
        let mut idx = [0usize; MAX_RANK];
        for a in (0..self.rank).rev() {
            idx[a] = k % self.n[a];
            k /= self.n[a];
        }
        idx
    }

    /// Signed displacement `x1 - x0` along an axis, wrapped to the nearest
    /// periodic image when the axis is periodic.
    pub fn delta(&self, a: usize, x0: f64, x1: f64) -> f64 {
        let mut d = x1 - x0;
        if self.periodic[a] {
            let e = self.extent(a);
            d -= e * (d / e).round();
        }
        d
    }

    /// Euclidean distance with periodic wrapping.
    pub fn distance(&self, x0: &Point, x1: &Point) -> f64 {
        let mut s = 0.0;
        for a in 0..self.rank {
            let d = self.delta(a, x0[a], x1[a]);
            s += d * d;
        }
        s.sqrt()
    }

    /// Nearest cell index to a point (periodic axes wrap, others clamp).
    pub fn nearest(&self, x: &Point) -> Idx {
        let mut idx = [0usize; MAX_RANK];
        for a in 0..self.rank {
            let u = (x[a] - self.origin[a]) / self.h[a] - 0.5;
            let i = u.round() as i64;
            idx[a] = self.wrap_or_clamp(a, i);
        }
        idx
    }

    pub fn wrap_or_clamp(&self, a: usize, i: i64) -> usize {
        let n = self.n[a] as i64;
        if self.periodic[a] {
            (i.rem_euclid(n)) as usize
        } else {
            i.clamp(0, n - 1) as usize
        }
    }

    /// Iterate all multi-indices in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = Idx> + '_ {
        (0..self.len()).map(move |k| self.unlinear(k))
    }
}

/// Uniform time sampling: slice `j` is at `t0 + j * dt`.
///
/// Each slice represents the time cell `[t_j - dt/2, t_j + dt/2)`; cylinder
/// windows weight slices by their overlap with the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSpec {
    pub nt: usize,
    pub dt: f64,
    pub t0: f64,
}

impl TimeSpec {
    pub fn new(nt: usize, dt: f64, t0: f64) -> Result<Self> {
        if nt < 1 {
            return Err(Error::Domain("need at least one time slice".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain("dt must be positive".into()));
        }
        Ok(TimeSpec { nt, dt, t0 })
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.nt - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nt).map(move |j| self.time(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_roundtrip() {
        let g = GridSpec::new(&[4, 3, 2], &[0.5, 1.0, 2.0], &[true, false, true], &[0.0; 3])
            .unwrap();
        for k in 0..g.len() {
            assert_eq!(g.linear(g.unlinear(k)), k);
        }
        assert_eq!(g.len(), 24);
        assert_eq!(g.cell_vol(), 1.0);
    }

    #[test]
    fn wrapped_delta() {
        let g = GridSpec::torus(1, 10).unwrap();
        assert!((g.delta(0, 0.05, 0.95) + 0.1).abs() < 1e-12);
        assert!((g.delta(0, 0.95, 0.05) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(GridSpec::new(&[1], &[0.1], &[false], &[0.0]).is_err());
        assert!(GridSpec::new(&[4], &[0.0], &[false], &[0.0]).is_err());
        assert!(TimeSpec::new(0, 0.1, 0.0).is_err());
    }
}
