//! Verification harness: suite configuration, machine-readable reports,
//! fitted constants, and refinement-stability verdicts.
//!
//! Reports are deterministic given (seed, grids, suite): trials use
//! independent counter-derived RNG streams and all reductions follow a
//! fixed order, so reruns are bit-identical regardless of thread count.

pub mod lattice;
pub mod randfields;
pub mod suites;

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    LemmasSpace,
    TraceSpace,
    TraceSpacetime,
    Anisotropic,
    Lagrangian,
    Cantor,
    Lorentz,
    NsTheorems,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 8] = [
        SuiteKind::LemmasSpace,
        SuiteKind::TraceSpace,
        SuiteKind::TraceSpacetime,
        SuiteKind::Anisotropic,
        SuiteKind::Lagrangian,
        SuiteKind::Cantor,
        SuiteKind::Lorentz,
        SuiteKind::NsTheorems,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteKind::LemmasSpace => "lemmas-space",
            SuiteKind::TraceSpace => "trace-space",
            SuiteKind::TraceSpacetime => "trace-spacetime",
            SuiteKind::Anisotropic => "anisotropic",
            SuiteKind::Lagrangian => "lagrangian",
            SuiteKind::Cantor => "cantor",
            SuiteKind::Lorentz => "lorentz",
            SuiteKind::NsTheorems => "ns-theorems",
        }
    }
}

impl FromStr for SuiteKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| Error::UnknownSuite(s.into()))
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: SuiteKind,
    pub grids: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Refinement-stability band: the fitted constant at the finest grid
    /// must lie within this relative distance of the coarsest.
    pub band: f64,
    /// Cantor depth.
    pub depth: u32,
    /// Epsilon of the norm-separation pair.
    pub epsilon: f64,
}

impl SuiteConfig {
    pub fn new(suite: SuiteKind) -> Self {
        let (grids, trials) = match suite {
            SuiteKind::LemmasSpace => (vec![32, 64], 30),
            SuiteKind::TraceSpace => (vec![32, 64, 128], 20),
            SuiteKind::TraceSpacetime | SuiteKind::Anisotropic => (vec![32, 64, 128], 20),
            SuiteKind::Lagrangian => (vec![32, 64, 128], 20),
            SuiteKind::Cantor => (vec![], 1),
            SuiteKind::Lorentz => (vec![256, 512], 20),
            SuiteKind::NsTheorems => (vec![64, 96], 20),
        };
        SuiteConfig {
            suite,
            grids,
            trials,
            seed: 0x5eed,
            band: 0.30,
            depth: 8,
            epsilon: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub grid: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    /// Inequality identifier (what is being measured).
    pub name: String,
    /// Stable anchor string for auditing the report against its source.
    pub anchor: String,
    pub params: BTreeMap<String, f64>,
    pub trials: Vec<TrialRow>,
    /// Max ratio over all trials.
    pub fitted_constant: f64,
    /// Per-grid fitted constants in grid order.
    pub refinement_series: Vec<(usize, f64)>,
    pub verdict: Verdict,
    pub notes: String,
}

impl VerificationReport {
    /// Ratio-bounded inequality with a refinement-stability verdict:
    /// the fitted constant must be finite, the finest grid within `band`
    /// of the coarsest, and the series must not double monotonically.
    pub fn ratio_bounded(
        name: &str,
        anchor: &str,
        params: BTreeMap<String, f64>,
        trials: Vec<TrialRow>,
        grids: &[usize],
        band: f64,
    ) -> Self {
        let mut series = Vec::new();
        for &g in grids {
            let c = trials
                .iter()
                .filter(|r| r.grid == g)
                .map(|r| r.ratio)
                .fold(0.0f64, f64::max);
            series.push((g, c));
        }
        let fitted = trials.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
        let (verdict, notes) = refinement_verdict(&series, fitted, band);
        VerificationReport {
            name: name.into(),
            anchor: anchor.into(),
            params,
            trials,
            fitted_constant: fitted,
            refinement_series: series,
            verdict,
            notes,
        }
    }

    /// Threshold check: pass iff every trial has `lhs <= rhs`.
    pub fn threshold(
        name: &str,
        anchor: &str,
        params: BTreeMap<String, f64>,
        trials: Vec<TrialRow>,
    ) -> Self {
        let worst = trials.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
        let ok = trials.iter().all(|r| r.lhs <= r.rhs && r.lhs.is_finite());
        VerificationReport {
            name: name.into(),
            anchor: anchor.into(),
            params,
            trials,
            fitted_constant: worst,
            refinement_series: Vec::new(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            notes: if ok {
                String::new()
            } else {
                "threshold exceeded".into()
            },
        }
    }

    /// Interval check on a single measured value.
    pub fn value_in(
        name: &str,
        anchor: &str,
        value: f64,
        lo: f64,
        hi: f64,
    ) -> Self {
        let ok = value.is_finite() && value >= lo && value <= hi;
        let mut params = BTreeMap::new();
        params.insert("lo".into(), lo);
        params.insert("hi".into(), hi);
        VerificationReport {
            name: name.into(),
            anchor: anchor.into(),
            params,
            trials: vec![TrialRow {
                trial: 0,
                grid: 0,
                lhs: value,
                rhs: hi,
                ratio: if hi > 0.0 { value / hi } else { value },
            }],
            fitted_constant: value,
            refinement_series: Vec::new(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            notes: format!("value {value} expected in [{lo}, {hi}]"),
        }
    }
}

fn refinement_verdict(series: &[(usize, f64)], fitted: f64, band: f64) -> (Verdict, String) {
    if !fitted.is_finite() {
        return (Verdict::Fail, "fitted constant not finite".into());
    }
    if series.len() < 2 {
        return (
            Verdict::Fail,
            "refinement claims need at least two grid sizes".into(),
        );
    }
    let first = series.first().unwrap().1;
    let last = series.last().unwrap().1;
    if first == 0.0 && last == 0.0 {
        return (Verdict::Pass, "identically zero".into());
    }
    if first <= 0.0 {
        return (Verdict::Fail, "coarsest fitted constant vanished".into());
    }
    let drift = (last - first).abs() / first;
    if drift > band {
        return (
            Verdict::Fail,
            format!("finest constant drifts {:.1}% from coarsest", 100.0 * drift),
        );
    }
    let monotone_up = series.windows(2).all(|w| w[1].1 > w[0].1);
    if monotone_up && last >= 2.0 * first {
        return (Verdict::Fail, "monotone doubling trend".into());
    }
    (Verdict::Pass, format!("drift {:.1}%", 100.0 * drift))
}

pub fn all_pass(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.verdict == Verdict::Pass)
}

/// Stable JSON rendering of a report set.
pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    serde_json::to_string_pretty(reports).expect("report serialization")
}

/// Run one verification suite.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    match cfg.suite {
        SuiteKind::LemmasSpace => suites::lemmas_space(cfg),
        SuiteKind::TraceSpace => suites::trace_space(cfg),
        SuiteKind::TraceSpacetime => suites::trace_spacetime(cfg),
        SuiteKind::Anisotropic => suites::anisotropic(cfg),
        SuiteKind::Lagrangian => suites::lagrangian_suite(cfg),
        SuiteKind::Cantor => suites::cantor_suite(cfg),
        SuiteKind::Lorentz => suites::lorentz_suite(cfg),
        SuiteKind::NsTheorems => suites::ns_theorems(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for k in SuiteKind::ALL {
            assert_eq!(SuiteKind::from_str(k.as_str()).unwrap(), k);
        }
        assert!(SuiteKind::from_str("nope").is_err());
    }

    #[test]
    fn refinement_verdict_bands() {
        let ok = refinement_verdict(&[(32, 1.0), (64, 1.2)], 1.2, 0.3);
        assert_eq!(ok.0, Verdict::Pass);
        let drift = refinement_verdict(&[(32, 1.0), (64, 1.6)], 1.6, 0.3);
        assert_eq!(drift.0, Verdict::Fail);
        let zero = refinement_verdict(&[(32, 0.0), (64, 0.0)], 0.0, 0.3);
        assert_eq!(zero.0, Verdict::Pass);
    }
}
