use super::expr::Expr;
use super::RegionKind;
use crate::error::{Error, Result};

pub(crate) enum Rhs {
    Expr(Expr),
    Min(Vec<Expr>),
}

/// `lhs <= rhs`.
pub(crate) struct Constraint {
    pub name: &'static str,
    pub lhs: Expr,
    pub rhs: Rhs,
    pub involves_r0: bool,
}

pub(crate) struct Chain {
    pub name: &'static str,
    pub expr: Expr,
}

pub(crate) struct KindSpec {
    pub chains: Vec<Chain>,
    pub constraints: Vec<Constraint>,
    /// Smallest R0 meeting every rate constraint, as a function of R.
    pub r0_requirement: Expr,
    /// `(axis, cap)` cardinality bounds for auxiliaries.
    pub caps: Vec<(&'static str, usize)>,
    pub cap_checked: bool,
}

impl RegionKind {
    pub(crate) fn required_axes(self) -> &'static [&'static str] {
        use RegionKind::*;
        match self {
            InnerNoState | OuterNoState | InnerGeneral | OuterGeneral => &["U", "W", "X", "Y", "V"],
            PerfectChannel => &["U", "W", "X", "V"],
            LosslessDecoder => &["U", "W", "X", "Y"],
            Separation => &["U", "W1", "W2", "X", "Y", "V"],
            UVotimesX => &["U", "W", "X", "V"],
            Cuff => &["U", "W", "V"],
        }
    }

    pub(crate) fn optional_axes(self) -> &'static [&'static str] {
        use RegionKind::*;
        match self {
            InnerGeneral | OuterGeneral | Separation => &["S", "Z"],
            PerfectChannel => &["Z", "Y"],
            LosslessDecoder => &["S", "Z", "V"],
            _ => &[],
        }
    }
}

fn lin(e: Expr) -> Rhs {
    Rhs::Expr(e)
}

pub(crate) fn spec(kind: RegionKind, names: &[&str], size_of: impl Fn(&str) -> usize) -> Result<KindSpec> {
    for a in kind.required_axes() {
        if !names.contains(a) {
            return Err(Error::structural(format!("{kind:?} needs axis {a}")));
        }
    }
    for n in names {
        if !kind.required_axes().contains(n) && !kind.optional_axes().contains(n) {
            return Err(Error::structural(format!("{kind:?} does not use axis {n}")));
        }
    }
    // Absent optional axes behave as constants.
    let f = |set: &[&'static str]| -> Vec<&'static str> { set.iter().copied().filter(|a| names.contains(a)).collect() };
    let mi = |a: &[&'static str], b: &[&'static str], c: &[&'static str]| Expr::mi(&f(a), &f(b), &f(c));
    let h = |a: &[&'static str], c: &[&'static str]| Expr::h(&f(a), &f(c));
    let card = |set: &[&str], extra: usize| set.iter().filter(|a| names.contains(a)).map(|a| size_of(a)).product::<usize>() + extra;
    let chain = |name, a: &[&'static str], b: &[&'static str], c: &[&'static str]| {
        if f(a).is_empty() || f(c).is_empty() {
            None
        } else {
            Some(Chain { name, expr: mi(a, c, b) })
        }
    };
    let info = |name, lhs, rhs| Constraint { name, lhs, rhs, involves_r0: false };
    let rate = |name, lhs, rhs| Constraint { name, lhs, rhs, involves_r0: true };

    use RegionKind::*;
    let general_chains = || {
        vec![
            chain("Z-(U,S)-(X,Y,W)", &["Z"], &["U", "S"], &["X", "Y", "W"]),
            chain("Y-(X,S)-(U,W)", &["Y"], &["X", "S"], &["U", "W"]),
            chain("(W,X)-U-(S,Z)", &["W", "X"], &["U"], &["S", "Z"]),
        ]
    };
    let mut chains: Vec<Option<Chain>>;
    let constraints: Vec<Constraint>;
    let r0_requirement: Expr;
    let mut caps = Vec::new();
    let mut cap_checked = true;
    match kind {
        InnerNoState | OuterNoState => {
            chains = vec![
                chain("Y-X-(U,W)", &["Y"], &["X"], &["U", "W"]),
                chain("V-(Y,W)-(X,U)", &["V"], &["Y", "W"], &["X", "U"]),
            ];
            let need = mi(&["W"], &["U", "X", "V"], &["Y"]);
            let bound = if kind == InnerNoState { mi(&["W"], &["Y"], &[]) } else { mi(&["X"], &["Y"], &[]) };
            constraints = vec![
                info(if kind == InnerNoState { "I(W;U) <= I(W;Y)" } else { "I(W;U) <= I(X;Y)" }, mi(&["W"], &["U"], &[]), lin(bound)),
                rate("R0 >= I(W;UXV|Y)", need.clone(), lin(Expr::r0())),
            ];
            r0_requirement = need;
            caps.push(("W", card(&["U", "X", "Y", "V"], 4)));
            cap_checked = kind == OuterNoState;
        }
        InnerGeneral | OuterGeneral => {
            chains = general_chains();
            chains.push(chain("V-(Y,Z,W)-(X,S,U)", &["V"], &["Y", "Z", "W"], &["X", "S", "U"]));
            let need = mi(&["W"], &["U", "S", "X", "V"], &["Y", "Z"]);
            let rhs = if kind == InnerGeneral {
                lin(mi(&["W"], &["Y", "Z"], &[]))
            } else {
                Rhs::Min(vec![
                    mi(&["X", "U", "S"], &["Y", "Z"], &[]),
                    mi(&["X", "S"], &["Y"], &[]).plus(mi(&["U"], &["Z"], &[])),
                ])
            };
            let name = if kind == InnerGeneral {
                "I(W;U) <= I(W;YZ)"
            } else {
                "I(W;U) <= min{I(XUS;YZ), I(XS;Y)+I(U;Z)}"
            };
            constraints = vec![
                info(name, mi(&["W"], &["U"], &[]), rhs),
                rate("R0 >= I(W;USXV|YZ)", need.clone(), lin(Expr::r0())),
            ];
            r0_requirement = need;
            caps.push(("W", card(&["U", "S", "Z", "X", "Y", "V"], 5)));
            cap_checked = kind == OuterGeneral;
        }
        PerfectChannel => {
            chains = vec![
                chain("Z-U-(X,W)", &["Z"], &["U"], &["X", "W"]),
                chain("V-(X,Z,W)-U", &["V"], &["X", "Z", "W"], &["U"]),
            ];
            if names.contains(&"Y") {
                chains.push(Some(Chain {
                    name: "Y=X",
                    expr: h(&["X"], &["Y"]).plus(h(&["Y"], &["X"])),
                }));
            }
            let need = mi(&["W"], &["U", "V"], &["X", "Z"]);
            constraints = vec![
                info(
                    "I(WX;U) <= H(X)+I(W;Z|X)",
                    mi(&["W", "X"], &["U"], &[]),
                    lin(h(&["X"], &[]).plus(mi(&["W"], &["Z"], &["X"]))),
                ),
                rate("R0 >= I(W;UV|XZ)", need.clone(), lin(Expr::r0())),
            ];
            r0_requirement = need;
            caps.push(("W", card(&["U", "Z", "X", "V"], 4)));
        }
        LosslessDecoder => {
            chains = general_chains();
            if names.contains(&"V") {
                chains.push(Some(Chain {
                    name: "V=U",
                    expr: h(&["U"], &["V"]).plus(h(&["V"], &["U"])),
                }));
            }
            let need = mi(&["W"], &["U", "S", "X"], &["Y", "Z"]);
            constraints = vec![
                info("I(W;U) <= I(W;YZ)", mi(&["W"], &["U"], &[]), lin(mi(&["W"], &["Y", "Z"], &[]))),
                rate("R0 >= I(W;USX|YZ)", need.clone(), lin(Expr::r0())),
            ];
            r0_requirement = need;
            caps.push(("W", card(&["U", "S", "Z", "X", "Y"], 3)));
        }
        Separation => {
            chains = vec![
                chain("Z-U-W2", &["Z"], &["U"], &["W2"]),
                chain("Y-(X,S)-W1", &["Y"], &["X", "S"], &["W1"]),
                chain("V-(Z,W2)-U", &["V"], &["Z", "W2"], &["U"]),
                Some(Chain {
                    name: "(U,Z,W2,V) independent of (S,X,W1,Y)",
                    expr: mi(&["U", "Z", "W2", "V"], &["S", "X", "W1", "Y"], &[]),
                }),
            ];
            let need = mi(&["W1"], &["S", "X"], &["Y"]).plus(mi(&["W2"], &["U", "V"], &["Z"]));
            constraints = vec![
                info(
                    "I(W1;S)+I(W2;U) <= I(W1;Y)+I(W2;Z)",
                    mi(&["W1"], &["S"], &[]).plus(mi(&["W2"], &["U"], &[])),
                    lin(mi(&["W1"], &["Y"], &[]).plus(mi(&["W2"], &["Z"], &[]))),
                ),
                rate("R0 >= I(W1;SX|Y)+I(W2;UV|Z)", need.clone(), lin(Expr::r0())),
            ];
            r0_requirement = need;
            let c = card(&["U", "S", "Z", "X", "Y", "V"], 3);
            caps.push(("W1", c));
            caps.push(("W2", c));
        }
        UVotimesX => {
            chains = vec![
                chain("U-W-V", &["U"], &["W"], &["V"]),
                Some(Chain {
                    name: "X independent of (U,W,V)",
                    expr: mi(&["X"], &["U", "W", "V"], &[]),
                }),
            ];
            let need = mi(&["U", "V"], &["W"], &[]);
            constraints = vec![
                info("I(W;U) <= H(X)", mi(&["W"], &["U"], &[]), lin(h(&["X"], &[]))),
                rate("R0 >= I(UV;W)", need.clone(), lin(Expr::r0())),
            ];
            r0_requirement = need;
            caps.push(("W", card(&["U", "V"], 1)));
        }
        Cuff => {
            chains = vec![chain("U-W-V", &["U"], &["W"], &["V"])];
            let need = mi(&["U", "V"], &["W"], &[]);
            constraints = vec![
                info("R >= I(U;W)", mi(&["U"], &["W"], &[]), lin(Expr::r())),
                rate("R+R0 >= I(UV;W)", need.clone(), lin(Expr::r().plus(Expr::r0()))),
            ];
            r0_requirement = need.minus(Expr::r());
            caps.push(("W", card(&["U", "V"], 1)));
        }
    }
    Ok(KindSpec {
        chains: chains.into_iter().flatten().collect(),
        constraints,
        r0_requirement,
        caps,
        cap_checked,
    })
}
