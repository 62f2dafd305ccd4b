//! The variational-distance inequalities used throughout the achievability
//! arguments, as checkable predicates.

use super::dist::FiniteDist;
use super::kernel::Kernel;
use super::measures::{mutual_information, total_variation};
use crate::error::Result;

/// Outcome of the Pinsker / Csiszar sandwich on `I(A;B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PinskerCsiszarReport {
    /// `TV(P_AB, P_A P_B)`.
    pub tv: f64,
    pub mutual_information: f64,
    /// `tv^2 / (2 ln 2)`.
    pub lower_bound: f64,
    /// `d log2(|A| / d)` with `d = 2 tv` the L1 distance; `None` when `|A| < 4`.
    pub upper_bound: Option<f64>,
    pub lower_ok: bool,
    pub upper_ok: Option<bool>,
    pub lower_slack: f64,
    pub upper_slack: Option<f64>,
    pub alphabet_a: usize,
}

/// Upper bound `d log2(size / d)` evaluated at `d = 2 tv`; zero when `tv = 0`.
pub fn csiszar_upper_bound(tv: f64, size: usize) -> f64 {
    let d = 2.0 * tv;
    if d <= 0.0 {
        0.0
    } else {
        d * (size as f64 / d).log2()
    }
}

pub fn check_pinsker_csiszar(p_ab: &FiniteDist, a: &[&str], b: &[&str], tol: f64) -> Result<PinskerCsiszarReport> {
    let pa = p_ab.marginal(a)?;
    let pb = p_ab.marginal(b)?;
    let mut names: Vec<&str> = a.to_vec();
    names.extend_from_slice(b);
    let joint = p_ab.marginal(&names)?;
    let tv = total_variation(&joint, &pa.product(&pb)?)?;
    let mi = mutual_information(p_ab, a, b, &[])?;
    let alphabet_a = pa.len();
    let lower_bound = tv * tv / (2.0 * std::f64::consts::LN_2);
    let lower_slack = mi - lower_bound;
    let upper_bound = (alphabet_a >= 4).then(|| csiszar_upper_bound(tv, alphabet_a));
    let upper_slack = upper_bound.map(|u| u - mi);
    Ok(PinskerCsiszarReport {
        tv,
        mutual_information: mi,
        lower_bound,
        upper_bound,
        lower_ok: lower_slack >= -tol,
        upper_ok: upper_slack.map(|s| s >= -tol),
        lower_slack,
        upper_slack,
        alphabet_a,
    })
}

/// `TV(P_AB, Q_AB) - TV(P_A, Q_A)`; non-negative up to rounding.
pub fn marginal_tv_gap(p: &FiniteDist, q: &FiniteDist, keep: &[&str]) -> Result<f64> {
    let joint = total_variation(p, q)?;
    let marg = total_variation(&p.marginal(keep)?, &q.marginal(keep)?)?;
    Ok(joint - marg)
}

/// `|TV(P K, Q K) - TV(P, Q)|` for a common kernel `K`.
pub fn kernel_tv_gap(p: &FiniteDist, q: &FiniteDist, k: &Kernel) -> Result<f64> {
    let before = total_variation(p, q)?;
    let after = total_variation(&k.compose(p)?, &k.compose(q)?)?;
    Ok((after - before).abs())
}
