//! Information measures. Everything is in bits; `0 log 0 = 0`.

use super::dist::FiniteDist;
use crate::error::{Error, Result};

fn same_axes(p: &FiniteDist, q: &FiniteDist) -> Result<()> {
    if p.axes() != q.axes() {
        return Err(Error::structural(format!(
            "axis mismatch: {:?} vs {:?}",
            p.names(),
            q.names()
        )));
    }
    Ok(())
}

/// Half the L1 distance between two pmfs on the same product space.
pub fn total_variation(p: &FiniteDist, q: &FiniteDist) -> Result<f64> {
    same_axes(p, q)?;
    Ok(tv_slices(p.pmf(), q.pmf()))
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `D(P || Q)` in bits; `+inf` when `P` puts mass outside the support of `Q`.
pub fn kl_divergence(p: &FiniteDist, q: &FiniteDist) -> Result<f64> {
    same_axes(p, q)?;
    let mut d = 0.0;
    for (&a, &b) in p.pmf().iter().zip(q.pmf()) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += a * (a / b).log2();
        }
    }
    Ok(d.max(0.0))
}

pub(crate) fn entropy_of_pmf(pmf: &[f64]) -> f64 {
    -pmf
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Joint entropy of the named axes.
pub fn joint_entropy(p: &FiniteDist, names: &[&str]) -> Result<f64> {
    Ok(entropy_of_pmf(p.marginal(names)?.pmf()))
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let mut out = a.to_vec();
    for n in b {
        if !out.contains(n) {
            out.push(n);
        }
    }
    out
}

fn disjoint(sets: &[&[&str]]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if let Some(n) = a.iter().find(|n| b.contains(n)) {
                return Err(Error::structural(format!("axis {n} appears in two arguments")));
            }
        }
    }
    Ok(())
}

/// Conditional entropy `H(of | given)`.
pub fn entropy(p: &FiniteDist, of: &[&str], given: &[&str]) -> Result<f64> {
    let h_joint = joint_entropy(p, &union(of, given))?;
    let h_given = joint_entropy(p, given)?;
    Ok(h_joint - h_given)
}

/// Conditional mutual information `I(A; B | given)`.
pub fn mutual_information(p: &FiniteDist, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
    disjoint(&[a, b, given])?;
    let ag = union(a, given);
    let bg = union(b, given);
    let abg = union(&ag, b);
    Ok(joint_entropy(p, &ag)? + joint_entropy(p, &bg)? - joint_entropy(p, &abg)? - joint_entropy(p, given)?)
}

/// Binary entropy function `h(p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("binary entropy argument {p} outside [0,1]")));
    }
    Ok(h2(p))
}

/// Unchecked binary entropy for internal use on known-valid arguments.
pub(crate) fn h2(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::dist::Alphabet;

    fn bern(p: f64) -> FiniteDist {
        FiniteDist::bernoulli("X", p).unwrap()
    }

    fn coupled(size: usize) -> FiniteDist {
        let axes = vec![Alphabet::new("X", size).unwrap(), Alphabet::new("Y", size).unwrap()];
        FiniteDist::from_fn(axes, |i| if i[0] == i[1] { 1.0 / size as f64 } else { 0.0 }).unwrap()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(total_variation(&bern(0.3), &bern(0.3)).unwrap(), 0.0);
        assert_eq!(total_variation(&bern(0.0), &bern(1.0)).unwrap(), 1.0);
        assert!((total_variation(&bern(0.5), &bern(0.75)).unwrap() - 0.25).abs() < 1e-15);
        let other = FiniteDist::bernoulli("Y", 0.5).unwrap();
        assert!(matches!(total_variation(&bern(0.5), &other), Err(Error::Structural(_))));
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&bern(0.2), &bern(0.2)).unwrap(), 0.0);
        assert!((kl_divergence(&bern(1.0), &bern(0.5)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(kl_divergence(&bern(0.5), &bern(0.0)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&bern(0.5), &["X"], &[]).unwrap() - 1.0).abs() < 1e-15);
        assert!(entropy(&coupled(2), &["X"], &["Y"]).unwrap().abs() < 1e-15);
        assert!((entropy(&bern(0.75), &["X"], &[]).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-12);
        assert!(entropy(&bern(0.5), &["Q"], &[]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let prod = bern(0.3).product(&FiniteDist::bernoulli("Y", 0.6).unwrap()).unwrap();
        assert!(mutual_information(&prod, &["X"], &["Y"], &[]).unwrap().abs() < 1e-12);
        assert!((mutual_information(&coupled(2), &["X"], &["Y"], &[]).unwrap() - 1.0).abs() < 1e-12);
        assert!(mutual_information(&coupled(2), &["X"], &["X"], &[]).is_err());
    }

    #[test]
    fn erasure_channel_information() {
        // U ~ Bern(1/2), V = U w.p. 1/4 and erased (symbol 2) otherwise.
        let axes = vec![Alphabet::new("U", 2).unwrap(), Alphabet::new("V", 3).unwrap()];
        let pe = 0.75;
        let d = FiniteDist::from_fn(axes, |i| {
            0.5 * match i[1] {
                2 => pe,
                v if v == i[0] => 1.0 - pe,
                _ => 0.0,
            }
        })
        .unwrap();
        assert!((mutual_information(&d, &["U"], &["V"], &[]).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.75).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-12);
        assert!(binary_entropy(1.2).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }
}
