use crate::error::{Error, Result};
use crate::grid::{GridSpec, Idx, Point, TimeSpec, MAX_RANK};
use serde::{Deserialize, Serialize};

/// Behavior of a field outside its box for non-periodic axes (and outside
/// the time range). Periodic axes always wrap regardless of this flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extension {
    ZeroOutside,
    Periodic,
}

/// Real scalar samples on a uniform grid, optionally stacked in time.
///
/// Data is row-major with time slowest. `+inf` is a legal sample value;
/// norm and measure code treats it as such.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub time: Option<TimeSpec>,
    pub extension: Extension,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(
        grid: GridSpec,
        time: Option<TimeSpec>,
        extension: Extension,
        data: Vec<f64>,
    ) -> Result<Self> {
        let nt = time.as_ref().map_or(1, |t| t.nt);
        let expected = nt * grid.len();
        if data.len() != expected {
            return Err(Error::Truncation {
                expected,
                found: data.len(),
            });
        }
        Ok(ScalarField {
            grid,
            time,
            extension,
            data,
        })
    }

    pub fn zeros(grid: GridSpec, time: Option<TimeSpec>, extension: Extension) -> Self {
        let nt = time.as_ref().map_or(1, |t| t.nt);
        let len = nt * grid.len();
        ScalarField {
            grid,
            time,
            extension,
            data: vec![0.0; len],
        }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        let len = grid.len();
        ScalarField {
            grid,
            time: None,
            extension: Extension::Periodic,
            data: vec![c; len],
        }
    }

    /// Build a spatial field from a function of the cell center.
    pub fn from_fn(grid: GridSpec, extension: Extension, f: impl Fn(&Point) -> f64) -> Self {
        let data = (0..grid.len())
            .map(|k| f(&grid.point_of(grid.unlinear(k))))
            .collect();
        ScalarField {
            grid,
            time: None,
            extension,
            data,
        }
    }

    /// Build a spacetime field from a function of (t, cell center).
    pub fn from_fn_spacetime(
        grid: GridSpec,
        time: TimeSpec,
        extension: Extension,
        f: impl Fn(f64, &Point) -> f64,
    ) -> Self {
        let ncell = grid.len();
        let mut data = Vec::with_capacity(time.nt * ncell);
        for j in 0..time.nt {
            let t = time.time(j);
            for k in 0..ncell {
                data.push(f(t, &grid.point_of(grid.unlinear(k))));
            }
        }
        ScalarField {
            grid,
            time: Some(time),
            extension,
            data,
        }
    }

    pub fn nt(&self) -> usize {
        self.time.as_ref().map_or(1, |t| t.nt)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn slice(&self, j: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[j * n..(j + 1) * n]
    }

    pub fn slice_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[j * n..(j + 1) * n]
    }

    /// Borrow one time slice as a standalone spatial field view (copying).
    pub fn slice_field(&self, j: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            time: None,
            extension: self.extension,
            data: self.slice(j).to_vec(),
        }
    }

    pub fn at(&self, j: usize, idx: Idx) -> f64 {
        self.data[j * self.grid.len() + self.grid.linear(idx)]
    }

    pub fn at_spatial(&self, idx: Idx) -> f64 {
        self.data[self.grid.linear(idx)]
    }

    /// Multilinear interpolation at a spatial point within one time slice.
    /// Non-periodic axes use the extension rule outside the box.
    pub fn interp(&self, j: usize, x: &Point) -> f64 {
        let g = &self.grid;
        let r = g.rank();
        let slice = self.slice(j);
        // Per-axis lower cell and weight.
        let mut i0 = [0i64; MAX_RANK];
        let mut w = [0.0f64; MAX_RANK];
        for a in 0..r {
            let u = (x[a] - g.origin(a)) / g.h(a) - 0.5;
            let f = u.floor();
            i0[a] = f as i64;
            w[a] = u - f;
        }
        let mut acc = 0.0;
        let corners = 1usize << r;
        'corner: for c in 0..corners {
            let mut weight = 1.0;
            let mut idx = [0usize; MAX_RANK];
            for a in 0..r {
                let hi = (c >> a) & 1 == 1;
                weight *= if hi { w[a] } else { 1.0 - w[a] };
                let i = i0[a] + hi as i64;
                let n = g.n(a) as i64;
                if g.is_periodic(a) {
                    idx[a] = i.rem_euclid(n) as usize;
                } else if i < 0 || i >= n {
                    match self.extension {
                        Extension::ZeroOutside => continue 'corner,
                        Extension::Periodic => idx[a] = i.rem_euclid(n) as usize,
                    }
                } else {
                    idx[a] = i as usize;
                }
            }
            if weight != 0.0 {
                acc += weight * slice[g.linear(idx)];
            }
        }
        acc
    }

    /// Interpolate in space and linearly in time; zero outside the time range
    /// under `ZeroOutside`, clamped otherwise.
    pub fn interp_spacetime(&self, t: f64, x: &Point) -> f64 {
        match &self.time {
            None => self.interp(0, x),
            Some(ts) => {
                let u = (t - ts.t0) / ts.dt;
                if u <= 0.0 {
                    if u < 0.0 && self.extension == Extension::ZeroOutside {
                        // Linearly fade to zero over half a slice.
                        if u < -0.5 {
                            return 0.0;
                        }
                        return (1.0 + 2.0 * u) * self.interp(0, x);
                    }
                    return self.interp(0, x);
                }
                let jmax = (ts.nt - 1) as f64;
                if u >= jmax {
                    if u > jmax && self.extension == Extension::ZeroOutside {
                        if u > jmax + 0.5 {
                            return 0.0;
                        }
                        return (1.0 - 2.0 * (u - jmax)) * self.interp(ts.nt - 1, x);
                    }
                    return self.interp(ts.nt - 1, x);
                }
                let j = u.floor() as usize;
                let w = u - j as f64;
                (1.0 - w) * self.interp(j, x) + w * self.interp(j + 1, x)
            }
        }
    }

    /// `sum(|f|^p * cellvol)` over the whole grid (and dt when time-stacked):
    /// the p-th power of the Lp norm with respect to the product measure.
    pub fn lp_pow(&self, p: f64) -> f64 {
        let w = self.grid.cell_vol() * self.time.as_ref().map_or(1.0, |t| t.dt);
        self.data.iter().map(|v| v.abs().powf(p) * w).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        let w = self.grid.cell_vol() * self.time.as_ref().map_or(1.0, |t| t.dt);
        self.data.iter().map(|v| v.abs() * w).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            time: self.time.clone(),
            extension: self.extension,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.data.len(), other.data.len());
        ScalarField {
            grid: self.grid.clone(),
            time: self.time.clone(),
            extension: self.extension,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Central finite-difference partial derivative along `axis` of one slice.
    /// Periodic axes wrap; box axes use one-sided differences at the walls.
    pub fn fd_partial(&self, j: usize, axis: usize) -> Vec<f64> {
        let g = &self.grid;
        let slice = self.slice(j);
        let mut out = vec![0.0; g.len()];
        let n = g.n(axis);
        let h = g.h(axis);
        for k in 0..g.len() {
            let idx = g.unlinear(k);
            let i = idx[axis];
            let (vm, vp, denom) = if g.is_periodic(axis) {
                let mut m = idx;
                m[axis] = (i + n - 1) % n;
                let mut p = idx;
                p[axis] = (i + 1) % n;
                (slice[g.linear(m)], slice[g.linear(p)], 2.0 * h)
            } else if i == 0 {
                let mut p = idx;
                p[axis] = 1;
                (slice[k], slice[g.linear(p)], h)
            } else if i == n - 1 {
                let mut m = idx;
                m[axis] = n - 2;
                (slice[g.linear(m)], slice[k], h)
            } else {
                let mut m = idx;
                m[axis] = i - 1;
                let mut p = idx;
                p[axis] = i + 1;
                (slice[g.linear(m)], slice[g.linear(p)], 2.0 * h)
            };
            out[k] = (vp - vm) / denom;
        }
        out
    }
}

/// D scalar components sharing one grid and time sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::Domain("vector field needs components".into()));
        }
        let g = comps[0].grid.clone();
        let t = comps[0].time.clone();
        for c in &comps {
            if c.grid != g || c.time != t {
                return Err(Error::Domain(
                    "vector components must share grid and time".into(),
                ));
            }
        }
        Ok(VectorField { comps })
    }

    pub fn zeros(grid: GridSpec, time: Option<TimeSpec>, extension: Extension) -> Self {
        let d = grid.rank();
        VectorField {
            comps: (0..d)
                .map(|_| ScalarField::zeros(grid.clone(), time.clone(), extension))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.comps[0].grid
    }

    pub fn time(&self) -> Option<&TimeSpec> {
        self.comps[0].time.as_ref()
    }

    pub fn comp(&self, c: usize) -> &ScalarField {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut ScalarField {
        &mut self.comps[c]
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    /// Drift evaluation: multilinear in space, linear in time, zero outside.
    pub fn eval(&self, t: f64, x: &Point) -> Point {
        let mut v = [0.0; MAX_RANK];
        for (c, comp) in self.comps.iter().enumerate() {
            v[c] = comp.interp_spacetime(t, x);
        }
        v
    }

    /// Frobenius norm of the finite-difference spatial Jacobian, per slice.
    pub fn jacobian_frobenius(&self, j: usize) -> ScalarField {
        let g = self.grid().clone();
        let mut sq = vec![0.0; g.len()];
        for comp in &self.comps {
            for axis in 0..g.rank() {
                let d = comp.fd_partial(j, axis);
                for (s, v) in sq.iter_mut().zip(&d) {
                    *s += v * v;
                }
            }
        }
        ScalarField {
            grid: g,
            time: None,
            extension: self.comps[0].extension,
            data: sq.into_iter().map(f64::sqrt).collect(),
        }
    }

    pub fn l2_pow(&self) -> f64 {
        self.comps.iter().map(|c| c.lp_pow(2.0)).sum()
    }
}

/// A loaded field: scalar or vector, depending on what was on disk.
#[derive(Debug, Clone)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interp_reproduces_linear_function() {
        let g = GridSpec::boxed(&[16, 16], &[1.0, 1.0]).unwrap();
        let f = ScalarField::from_fn(g, Extension::ZeroOutside, |p| 2.0 * p[0] - p[1]);
        let x = [0.4375, 0.71875, 0.0];
        assert!((f.interp(0, &x) - (2.0 * x[0] - x[1])).abs() < 1e-12);
    }

    #[test]
    fn interp_periodic_wraps() {
        let g = GridSpec::torus(1, 8).unwrap();
        let f = ScalarField::from_fn(g, Extension::Periodic, |p| (2.0 * std::f64::consts::PI * p[0]).sin());
        // Interpolation across the seam stays bounded and continuous.
        let a = f.interp(0, &[0.999, 0.0, 0.0]);
        let b = f.interp(0, &[0.001, 0.0, 0.0]);
        assert!((a - b).abs() < 0.1);
    }

    #[test]
    fn fd_partial_linear_exact() {
        let g = GridSpec::boxed(&[12, 10], &[1.0, 2.0]).unwrap();
        let f = ScalarField::from_fn(g.clone(), Extension::ZeroOutside, |p| 3.0 * p[0] + 0.5 * p[1]);
        let dx = f.fd_partial(0, 0);
        let dy = f.fd_partial(0, 1);
        for k in 0..g.len() {
            assert!((dx[k] - 3.0).abs() < 1e-10);
            assert!((dy[k] - 0.5).abs() < 1e-10);
        }
    }
}
