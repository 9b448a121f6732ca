//! Mixed-norm lattice of higher velocity derivatives: measured norms at
//! the exponent vertices of the integrability diagram, emitted as CSV so
//! the diagram can be replotted from data.

use crate::norms::LorentzParams;
use crate::ns::{self, FlowSnapshotSeries};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormKind {
    /// Strong nested norm (solid vertices).
    Strong,
    /// Weak-in-t, weak-in-x nested norm (dashed, p < q).
    WeakWeak,
    /// Weak-in-t, strong-in-x nested norm (dashed, p > q).
    WeakStrong,
    /// Joint weak norm surrogate at the diagonal (nested weak used here).
    Diagonal,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeRow {
    pub order: usize,
    pub inv_p: f64,
    pub inv_q: f64,
    pub kind: NormKind,
    pub value: f64,
}

/// Exponent vertices per derivative order: `(1/p, 1/q, kind)`.
fn vertices(order: usize) -> Vec<(f64, f64, NormKind)> {
    match order {
        1 => vec![
            (2.0, 0.0, NormKind::Strong),
            (0.5, 0.5, NormKind::Strong),
            (0.0, 1.0, NormKind::Strong),
        ],
        2 => vec![
            (3.0, 0.0, NormKind::Strong),
            (1.5, 0.5, NormKind::WeakWeak),
            (0.75, 0.75, NormKind::Diagonal),
            (0.0, 1.5, NormKind::WeakStrong),
        ],
        3 => vec![
            (3.5, 1.0 / 6.0, NormKind::Strong),
            (2.5, 0.5, NormKind::WeakWeak),
            (1.0, 1.0, NormKind::Diagonal),
            (1.0 / 3.0, 5.0 / 3.0, NormKind::WeakStrong),
        ],
        _ => Vec::new(),
    }
}

fn lorentz_of(inv: f64, weak: bool) -> LorentzParams {
    if inv == 0.0 {
        LorentzParams::sup()
    } else if weak {
        LorentzParams::weak(1.0 / inv)
    } else {
        LorentzParams::strong(1.0 / inv)
    }
}

fn norm_at(
    series: &FlowSnapshotSeries,
    order: usize,
    t0: f64,
    inv_p: f64,
    inv_q: f64,
    kind: NormKind,
) -> f64 {
    let (wt, wx) = match kind {
        NormKind::Strong => (false, false),
        NormKind::WeakWeak | NormKind::Diagonal => (true, true),
        NormKind::WeakStrong => (true, false),
    };
    ns::gradn_mixed_norm(
        series,
        order,
        t0,
        lorentz_of(inv_p, wt),
        lorentz_of(inv_q, wx),
    )
}

/// Measured norms at every lattice vertex for derivative orders 1..=3.
pub fn figure_lattice(series: &FlowSnapshotSeries, t0: f64) -> Vec<LatticeRow> {
    let mut rows = Vec::new();
    for order in 1..=3usize {
        for (inv_p, inv_q, kind) in vertices(order) {
            let value = norm_at(series, order, t0, inv_p, inv_q, kind);
            rows.push(LatticeRow {
                order,
                inv_p,
                inv_q,
                kind,
                value,
            });
        }
    }
    rows
}

pub fn lattice_csv(rows: &[LatticeRow]) -> String {
    let mut out = String::from("order,inv_p,inv_q,kind,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:?},{}\n",
            r.order, r.inv_p, r.inv_q, r.kind, r.value
        ));
    }
    out
}

/// Log-convexity of the measured nested weak norms along the dashed
/// segments: at the midpoint of each segment the norm is at most the
/// geometric mean of the endpoint norms, within the stated slack.
/// Returns the worst midpoint/bound factor.
pub fn dashed_segment_convexity(series: &FlowSnapshotSeries, t0: f64) -> f64 {
    let mut worst = 0.0f64;
    for order in 2..=3usize {
        let vs = vertices(order);
        // Dashed segments connect consecutive non-solid vertices.
        for w in vs.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.2 == NormKind::Strong && b.2 == NormKind::Strong {
                continue;
            }
            let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
            let na = norm_at(series, order, t0, a.0, a.1, NormKind::WeakWeak);
            let nb = norm_at(series, order, t0, b.0, b.1, NormKind::WeakWeak);
            let nm = norm_at(series, order, t0, mid.0, mid.1, NormKind::WeakWeak);
            let bound = (na * nb).sqrt();
            if bound > 0.0 && nm.is_finite() {
                worst = worst.max(nm / bound);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_flow_lattice_vanishes() {
        let series = ns::taylor_green(16, 1.0, 0.0, 0.2, 3);
        let rows = figure_lattice(&series, 0.05);
        assert!(rows.iter().all(|r| r.value == 0.0));
    }

    #[test]
    fn vortex_lattice_finite_low_orders() {
        let series = ns::taylor_green(24, 1.0, 1.0, 0.3, 5);
        let rows = figure_lattice(&series, 0.05);
        for r in &rows {
            if r.order <= 2 {
                assert!(r.value.is_finite() && r.value > 0.0, "{r:?}");
            }
        }
        let csv = lattice_csv(&rows);
        assert!(csv.lines().count() == rows.len() + 1);
    }

    #[test]
    fn dashed_segments_log_convex_within_slack() {
        let series = ns::taylor_green(24, 1.0, 1.0, 0.3, 5);
        let worst = dashed_segment_convexity(&series, 0.05);
        assert!(worst <= 1.05, "midpoint factor {worst}");
    }
}
