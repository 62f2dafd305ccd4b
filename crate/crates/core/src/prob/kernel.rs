use super::dist::{check_axes, product_size, Alphabet, FiniteDist, MASS_TOL};
use crate::error::{Error, Result};

/// Conditional pmf `P(to | from)`, one row per point of the `from` space.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    from: Vec<Alphabet>,
    to: Vec<Alphabet>,
    rows: Vec<f64>,
}

impl Kernel {
    pub fn new(from: Vec<Alphabet>, to: Vec<Alphabet>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut all = from.clone();
        all.extend(to.iter().cloned());
        check_axes(&all)?;
        let n_from = product_size(&from);
        let n_to = product_size(&to);
        if rows.len() != n_from {
            return Err(Error::structural(format!(
                "kernel has {} rows, conditioning space has {n_from}",
                rows.len()
            )));
        }
        let mut flat = Vec::with_capacity(n_from * n_to);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_to {
                return Err(Error::structural(format!("row {i} has {} entries, expected {n_to}", row.len())));
            }
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::domain(format!("row {i} has an invalid probability")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > MASS_TOL {
                return Err(Error::domain(format!("row {i} sums to {s}")));
            }
            flat.extend(row);
        }
        Ok(Kernel { from, to, rows: flat })
    }

    /// Builds a kernel from `f(from_index, to_index)`.
    pub fn from_fn(from: Vec<Alphabet>, to: Vec<Alphabet>, f: impl Fn(&[usize], &[usize]) -> f64) -> Result<Self> {
        let from_sizes: Vec<usize> = from.iter().map(|a| a.size).collect();
        let to_sizes: Vec<usize> = to.iter().map(|a| a.size).collect();
        let mut rows = Vec::new();
        let mut fi = vec![0; from.len()];
        for _ in 0..product_size(&from) {
            let mut ti = vec![0; to.len()];
            let mut row = Vec::new();
            for _ in 0..product_size(&to) {
                row.push(f(&fi, &ti));
                super::dist::increment(&mut ti, &to_sizes);
            }
            rows.push(row);
            super::dist::increment(&mut fi, &from_sizes);
        }
        Self::new(from, to, rows)
    }

    /// Binary symmetric channel `from -> to` with crossover `p`.
    pub fn bsc(from: &str, to: &str, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("crossover probability {p}")));
        }
        Kernel::new(
            vec![Alphabet::new(from, 2)?],
            vec![Alphabet::new(to, 2)?],
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        )
    }

    pub fn from_axes(&self) -> &[Alphabet] {
        &self.from
    }

    pub fn to_axes(&self) -> &[Alphabet] {
        &self.to
    }

    pub fn num_rows(&self) -> usize {
        product_size(&self.from)
    }

    pub fn row_len(&self) -> usize {
        product_size(&self.to)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.row_len();
        &self.rows[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks(self.row_len())
    }

    /// Joint `P(from) K(to | from)` with axes `from ++ to`.
    pub fn compose(&self, p: &FiniteDist) -> Result<FiniteDist> {
        if p.axes() != self.from.as_slice() {
            return Err(Error::structural(format!(
                "kernel conditions on {:?}, distribution has {:?}",
                self.from.iter().map(|a| &a.name).collect::<Vec<_>>(),
                p.names()
            )));
        }
        let mut axes = self.from.clone();
        axes.extend(self.to.iter().cloned());
        let mut pmf = Vec::with_capacity(p.len() * self.row_len());
        for (i, &pi) in p.pmf().iter().enumerate() {
            pmf.extend(self.row(i).iter().map(|k| pi * k));
        }
        Ok(FiniteDist::from_parts_unchecked(axes, pmf))
    }

    /// Output distribution of the channel driven by `p`.
    pub fn push_forward(&self, p: &FiniteDist) -> Result<FiniteDist> {
        let joint = self.compose(p)?;
        let names: Vec<&str> = self.to.iter().map(|a| a.name.as_str()).collect();
        joint.marginal(&names)
    }
}
