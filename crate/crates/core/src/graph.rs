//! Time-indexed Lipschitz graphs carrying surface measure.
//!
//! A family holds, per time slice, a d-dimensional base grid and height
//! samples for the remaining `D - d` coordinates. `d == D` is the whole
//! domain (heights empty, weight = cell volume); `d == 0` is a single
//! moving point with counting measure.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{GridSpec, Idx, Point, MAX_RANK};

#[derive(Debug, Clone)]
pub struct GraphSlice {
    /// Height samples, node-major: `heights[node * codim + c]`.
    pub heights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GraphFamily {
    d: usize,
    ambient: GridSpec,
    base: GridSpec,
    lipschitz: f64,
    slices: Vec<GraphSlice>,
}

impl GraphFamily {
    /// Build and validate: every pair of neighboring base nodes must satisfy
    /// `|g(x) - g(y)| <= L |x - y|`, and graph points must lie inside the
    /// ambient box on non-periodic axes.
    pub fn new(
        ambient: GridSpec,
        base: GridSpec,
        lipschitz: f64,
        slices: Vec<GraphSlice>,
    ) -> Result<Self> {
        let d = base.rank();
        let big_d = ambient.rank();
        if d > big_d {
            return Err(Error::Domain(format!("graph dim {d} exceeds ambient {big_d}")));
        }
        let codim = big_d - d;
        if slices.is_empty() {
            return Err(Error::Domain("graph family needs at least one slice".into()));
        }
        for (j, s) in slices.iter().enumerate() {
            if s.heights.len() != base.len() * codim {
                return Err(Error::Domain(format!(
                    "slice {j}: expected {} heights, found {}",
                    base.len() * codim,
                    s.heights.len()
                )));
            }
        }
        let fam = GraphFamily {
            d,
            ambient,
            base,
            lipschitz,
            slices,
        };
        fam.check_lipschitz()?;
        fam.check_inside()?;
        Ok(fam)
    }

    /// The whole spatial domain as a graph (`d = D`, zero heights).
    pub fn full_domain(ambient: GridSpec, nt: usize) -> Result<Self> {
        let base = ambient.clone();
        let slices = (0..nt.max(1))
            .map(|_| GraphSlice { heights: Vec::new() })
            .collect();
        GraphFamily::new(ambient, base, 0.0, slices)
    }

    /// Codimension-1 graph over the first `D-1` axes of the ambient grid,
    /// with heights given by a function of (slice, base point).
    pub fn codim1(
        ambient: GridSpec,
        lipschitz: f64,
        nt: usize,
        g: impl Fn(usize, &Point) -> f64,
    ) -> Result<Self> {
        let big_d = ambient.rank();
        let d = big_d - 1;
        let n: Vec<usize> = (0..d).map(|a| ambient.n(a)).collect();
        let h: Vec<f64> = (0..d).map(|a| ambient.h(a)).collect();
        let per: Vec<bool> = (0..d).map(|a| ambient.is_periodic(a)).collect();
        let org: Vec<f64> = (0..d).map(|a| ambient.origin(a)).collect();
        let base = GridSpec::new(&n, &h, &per, &org)?;
        let slices = (0..nt.max(1))
            .map(|j| {
                let heights = (0..base.len())
                    .map(|k| g(j, &base.point_of(base.unlinear(k))))
                    .collect();
                GraphSlice { heights }
            })
            .collect();
        GraphFamily::new(ambient, base, lipschitz, slices)
    }

    fn check_lipschitz(&self) -> Result<()> {
        let codim = self.codim();
        if codim == 0 || self.d == 0 {
            return Ok(());
        }
        let b = &self.base;
        // Exact comparison with a small slack for float roundoff.
        let tol = 1.0 + 1e-9;
        for (j, s) in self.slices.iter().enumerate() {
            for k in 0..b.len() {
                let idx = b.unlinear(k);
                for a in 0..self.d {
                    let mut nb = idx;
                    if idx[a] + 1 < b.n(a) {
                        nb[a] = idx[a] + 1;
                    } else if b.is_periodic(a) {
                        nb[a] = 0;
                    } else {
                        continue;
                    }
                    let kn = b.linear(nb);
                    let mut diff2 = 0.0;
                    for c in 0..codim {
                        let dh = s.heights[k * codim + c] - s.heights[kn * codim + c];
                        diff2 += dh * dh;
                    }
                    let step = b.h(a);
                    if diff2.sqrt() > self.lipschitz * step * tol {
                        return Err(Error::Domain(format!(
                            "slice {j}: height jump {} exceeds L*h = {} between neighbors",
                            diff2.sqrt(),
                            self.lipschitz * step
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_inside(&self) -> Result<()> {
        let codim = self.codim();
        for s in &self.slices {
            for k in 0..self.base.len() {
                for c in 0..codim {
                    let a = self.d + c;
                    if self.ambient.is_periodic(a) {
                        continue;
                    }
                    let v = s.heights[k * codim + c];
                    let lo = self.ambient.origin(a);
                    let hi = lo + self.ambient.extent(a);
                    if v < lo || v > hi {
                        return Err(Error::Domain(format!(
                            "graph point coordinate {v} escapes the box [{lo}, {hi}]",
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn codim(&self) -> usize {
        self.ambient.rank() - self.d
    }

    pub fn ambient(&self) -> &GridSpec {
        &self.ambient
    }

    pub fn base(&self) -> &GridSpec {
        &self.base
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn nt(&self) -> usize {
        self.slices.len()
    }

    pub fn nodes(&self) -> usize {
        if self.d == 0 {
            1
        } else {
            self.base.len()
        }
    }

    /// Ambient coordinates of one graph node.
    pub fn point(&self, slice: usize, node: usize) -> Point {
        let codim = self.codim();
        let mut p = [0.0f64; MAX_RANK];
        if self.d > 0 {
            let idx: Idx = self.base.unlinear(node);
            for a in 0..self.d {
                p[a] = self.base.center(a, idx[a]);
            }
        }
        for c in 0..codim {
            p[self.d + c] = self.slices[slice].heights[node * codim + c];
        }
        p
    }

    /// Surface-measure weights for one slice: base cell d-volume times the
    /// area element `sqrt(1 + |grad g|^2)` from finite differences of the
    /// heights. For `d = D` this is exactly the cell volume; for `d = 0`
    /// the single node carries counting weight 1.
    pub fn weights(&self, slice: usize) -> Vec<f64> {
        if self.d == 0 {
            return vec![1.0];
        }
        let codim = self.codim();
        let vol = self.base.cell_vol();
        if codim == 0 {
            return vec![vol; self.base.len()];
        }
        let s = &self.slices[slice];
        // Finite-difference gradient of each height component.
        let b = &self.base;
        let mut grad2 = vec![0.0f64; b.len()];
        for c in 0..codim {
            let comp: Vec<f64> = (0..b.len()).map(|k| s.heights[k * codim + c]).collect();
            let f = ScalarField::new(b.clone(), None, crate::field::Extension::Periodic, comp)
                .expect("height layout");
            for a in 0..self.d {
                let dg = f.fd_partial(0, a);
                for (g2, v) in grad2.iter_mut().zip(&dg) {
                    *g2 += v * v;
                }
            }
        }
        grad2
            .into_iter()
            .map(|g2| vol * (1.0 + g2).sqrt())
            .collect()
    }

    /// Total surface measure of one slice (approximates the d-dimensional
    /// Hausdorff measure of the graph).
    pub fn total_measure(&self, slice: usize) -> f64 {
        self.weights(slice).iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_graph_unit_square_area() {
        let amb = GridSpec::boxed(&[32, 32, 32], &[1.0, 1.0, 1.0]).unwrap();
        let gf = GraphFamily::codim1(amb, 0.0, 1, |_, _| 0.5).unwrap();
        let h = 1.0 / 32.0;
        let total = gf.total_measure(0);
        assert!((total - 1.0).abs() <= h, "total = {total}");
    }

    #[test]
    fn tilted_plane_area_sqrt2() {
        let amb = GridSpec::boxed(&[64, 64, 64], &[1.0, 1.0, 2.0]).unwrap();
        // g(x, y) = x, slope 1 along the first base axis.
        let gf = GraphFamily::codim1(amb, 1.0, 1, |_, p| p[0]).unwrap();
        let total = gf.total_measure(0);
        let h = 1.0 / 64.0;
        assert!(
            (total - 2.0f64.sqrt()).abs() <= 2.0 * h,
            "total = {total}, expected sqrt(2)"
        );
    }

    #[test]
    fn full_domain_measure_exact() {
        let amb = GridSpec::torus(2, 16).unwrap();
        let gf = GraphFamily::full_domain(amb, 1).unwrap();
        let total = gf.total_measure(0);
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_violation_rejected() {
        let amb = GridSpec::boxed(&[8, 8], &[1.0, 1.0]).unwrap();
        // Slope 2 but claimed constant 1: must be rejected at construction.
        let r = GraphFamily::codim1(amb, 1.0, 1, |_, p| 2.0 * p[0]);
        assert!(r.is_err());
    }
}
