use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point};

/// Volume of the Euclidean ball of radius `rho` in dimension `d`.
pub fn ball_volume(d: usize, rho: f64) -> f64 {
    match d {
        1 => 2.0 * rho,
        2 => std::f64::consts::PI * rho * rho,
        3 => 4.0 / 3.0 * std::f64::consts::PI * rho * rho * rho,
        _ => panic!("unsupported dimension {d}"),
    }
}

/// Distance from `x` to the box boundary of the grid domain.
///
/// Periodic axes contribute nothing (the torus has no boundary); a fully
/// periodic grid returns `+inf`.
pub fn boundary_distance(grid: &GridSpec, x: &Point) -> f64 {
    let mut d = f64::INFINITY;
    for a in 0..grid.rank() {
        if grid.is_periodic(a) {
            continue;
        }
        let lo = grid.origin(a);
        let hi = lo + grid.extent(a);
        d = d.min(x[a] - lo).min(hi - x[a]);
    }
    d
}

/// Parabolic distance `(|t1 - t2| + |x1 - x2|^2)^(1/2)`, with the spatial
/// distance wrapped on periodic axes.
pub fn parabolic_distance(grid: &GridSpec, p1: (f64, &Point), p2: (f64, &Point)) -> f64 {
    let dx = grid.distance(p1.1, p2.1);
    ((p1.0 - p2.0).abs() + dx * dx).sqrt()
}

/// Normalized parabolic distance to the parabolic boundary:
/// `min(sqrt(t), dist(x, boundary), r0) / (L + 4)`.
pub fn r_star(t: f64, x: &Point, grid: &GridSpec, lipschitz: f64, r0: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("r_star needs t > 0, got {t}")));
    }
    if !(r0 > 0.0) {
        return Err(Error::Domain("r_star needs r0 > 0".into()));
    }
    let d = t.sqrt().min(boundary_distance(grid, x)).min(r0);
    Ok(d / (lipschitz + 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_star_torus() {
        let g = GridSpec::torus(3, 8).unwrap();
        let x = [0.3, 0.3, 0.3];
        // min(sqrt(4), inf, 1) / 4 = 1/4
        assert_eq!(r_star(4.0, &x, &g, 0.0, 1.0).unwrap(), 0.25);
        // min(0.5, inf, 1) / 4 = 0.125
        assert_eq!(r_star(0.25, &x, &g, 0.0, 1.0).unwrap(), 0.125);
        assert!(r_star(0.0, &x, &g, 0.0, 1.0).is_err());
    }

    #[test]
    fn r_star_box_center() {
        let g = GridSpec::boxed(&[8, 8, 8], &[1.0, 1.0, 1.0]).unwrap();
        let x = [0.5, 0.5, 0.5];
        // min(3, 0.5, 1) / 5 = 0.1
        let v = r_star(9.0, &x, &g, 1.0, 1.0).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn parabolic_distance_cases() {
        let g = GridSpec::boxed(&[4, 4, 4], &[10.0, 10.0, 10.0]).unwrap();
        let o = [0.0, 0.0, 0.0];
        assert_eq!(parabolic_distance(&g, (0.0, &o), (1.0, &o)), 1.0);
        let p = [3.0, 4.0, 0.0];
        assert_eq!(parabolic_distance(&g, (0.0, &o), (0.0, &p)), 5.0);
        let q = [1.0, 0.0, 0.0];
        let v = parabolic_distance(&g, (1.0, &q), (0.0, &o));
        assert!((v - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn parabolic_distance_symmetric_zero() {
        let g = GridSpec::torus(2, 16).unwrap();
        let a = [0.1, 0.9, 0.0];
        let b = [0.7, 0.2, 0.0];
        let d1 = parabolic_distance(&g, (0.3, &a), (0.8, &b));
        let d2 = parabolic_distance(&g, (0.8, &b), (0.3, &a));
        assert_eq!(d1, d2);
        assert_eq!(parabolic_distance(&g, (0.3, &a), (0.3, &a)), 0.0);
    }
}
