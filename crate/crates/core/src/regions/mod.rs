//! Achievable and converse rate regions, membership checks and the
//! minimal common-randomness search.

mod erasure;
mod expr;
mod kinds;
mod search;

pub use erasure::{
    bernoulli_with_entropy, erasure_cascade, erasure_cascade_joint, sweep_erasure_frontier, sweep_to_csv, ErasurePoint, SweepRow,
};
pub use search::{search_min_r0, SearchConfig, SearchOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{mutual_information, FiniteDist};
use expr::{EntropyTable, Expr};
use kinds::{KindSpec, Rhs};

/// Default tolerance for Markov and inequality checks.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    InnerNoState,
    OuterNoState,
    InnerGeneral,
    OuterGeneral,
    PerfectChannel,
    LosslessDecoder,
    Separation,
    UVotimesX,
    Cuff,
}

impl RegionKind {
    pub const ALL: [RegionKind; 9] = [
        RegionKind::InnerNoState,
        RegionKind::OuterNoState,
        RegionKind::InnerGeneral,
        RegionKind::OuterGeneral,
        RegionKind::PerfectChannel,
        RegionKind::LosslessDecoder,
        RegionKind::Separation,
        RegionKind::UVotimesX,
        RegionKind::Cuff,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| format!("{k:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown region kind {s}")))
    }
}

/// A joint distribution with its rates. `r` is the communication rate and
/// is only read by [`RegionKind::Cuff`].
#[derive(Debug, Clone)]
pub struct RegionPoint {
    pub joint: FiniteDist,
    pub r: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative when violated.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovReport {
    pub name: String,
    /// Conditional mutual information in bits.
    pub cmi: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: RegionKind,
    pub member: bool,
    pub constraints: Vec<ConstraintReport>,
    pub violations: Vec<String>,
    pub markov: Vec<MarkovReport>,
    pub markov_ok: bool,
}

/// `I(A;C|B)` in bits; zero iff `A - B - C` is a Markov chain.
pub fn check_markov(joint: &FiniteDist, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    mutual_information(joint, a, c, b)
}

pub(crate) struct Compiled {
    pub spec: KindSpec,
    pub table: EntropyTable,
}

impl Compiled {
    pub fn new(kind: RegionKind, layout: &FiniteDist) -> Result<Self> {
        let names = layout.names();
        let spec = kinds::spec(kind, &names, |a| layout.axis_size(a).unwrap_or(1))?;
        let mut all: Vec<&Expr> = spec.chains.iter().map(|c| &c.expr).collect();
        for c in &spec.constraints {
            all.push(&c.lhs);
            match &c.rhs {
                Rhs::Expr(e) => all.push(e),
                Rhs::Min(v) => all.extend(v.iter()),
            }
        }
        all.push(&spec.r0_requirement);
        let sets: Vec<Vec<String>> = all.iter().flat_map(|e| e.sets().cloned()).collect();
        let table = EntropyTable::new(layout, sets.iter())?;
        Ok(Compiled { spec, table })
    }

    pub fn rhs(&self, rhs: &Rhs, h: &[f64], r0: f64, r: f64) -> f64 {
        match rhs {
            Rhs::Expr(e) => self.table.eval(e, h, r0, r),
            Rhs::Min(v) => v.iter().map(|e| self.table.eval(e, h, r0, r)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Membership with the default tolerance.
pub fn check_membership(kind: RegionKind, point: &RegionPoint) -> Result<Verdict> {
    check_membership_with_tol(kind, point, CHECK_TOL)
}

pub fn check_membership_with_tol(kind: RegionKind, point: &RegionPoint, tol: f64) -> Result<Verdict> {
    for (name, v) in [("R0", point.r0), ("R", point.r)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("rate {name} must be a finite non-negative number, got {v}")));
        }
    }
    let compiled = Compiled::new(kind, &point.joint)?;
    let marg = compiled.table.marginals(point.joint.pmf());
    let h = compiled.table.entropies(&marg);

    let markov: Vec<MarkovReport> = compiled
        .spec
        .chains
        .iter()
        .map(|c| {
            let cmi = compiled.table.eval(&c.expr, &h, 0.0, 0.0).max(0.0);
            MarkovReport {
                name: c.name.to_string(),
                cmi,
                holds: cmi <= tol,
            }
        })
        .collect();
    let markov_ok = markov.iter().all(|m| m.holds);

    let mut constraints = Vec::new();
    for c in &compiled.spec.constraints {
        let lhs = compiled.table.eval(&c.lhs, &h, point.r0, point.r);
        let rhs = compiled.rhs(&c.rhs, &h, point.r0, point.r);
        constraints.push(ConstraintReport {
            name: c.name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
        });
    }
    if compiled.spec.cap_checked {
        for &(axis, cap) in &compiled.spec.caps {
            let size = point.joint.axis_size(axis)?;
            constraints.push(ConstraintReport {
                name: format!("|{axis}| <= {cap}"),
                lhs: size as f64,
                rhs: cap as f64,
                slack: cap as f64 - size as f64,
            });
        }
    }
    let mut violations: Vec<String> = constraints.iter().filter(|c| c.slack < -tol).map(|c| c.name.clone()).collect();
    violations.extend(markov.iter().filter(|m| !m.holds).map(|m| m.name.clone()));
    Ok(Verdict {
        kind,
        member: violations.is_empty(),
        constraints,
        violations,
        markov,
        markov_ok,
    })
}
