use crate::error::{Error, Result};

pub(crate) fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::domain(format!("block length {n} is not a power of two")));
    }
    Ok(n.trailing_zeros())
}

/// In-place `x <- x G_n` over GF(2), `G_n = [[1,0],[1,1]]^{(x) m}`.
/// `G_n` is an involution, so the same call inverts it.
pub fn polar_transform(x: &mut [u8]) -> Result<()> {
    log2_exact(x.len())?;
    let n = x.len();
    let mut bit = 1;
    while bit < n {
        for i in 0..n {
            if i & bit == 0 {
                x[i] ^= x[i | bit];
            }
        }
        bit <<= 1;
    }
    Ok(())
}

pub fn polar_encode(r: &[u8]) -> Result<Vec<u8>> {
    let mut w = r.to_vec();
    polar_transform(&mut w)?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kron_row(r: &[u8]) -> Vec<u8> {
        // Dense G_n built by repeated Kronecker products.
        let mut g = vec![vec![1u8]];
        while g.len() < r.len() {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for i in 0..m {
                for j in 0..m {
                    next[i][j] = g[i][j];
                    next[i + m][j] = g[i][j];
                    next[i + m][j + m] = g[i][j];
                }
            }
            g = next;
        }
        (0..r.len())
            .map(|j| r.iter().enumerate().fold(0u8, |acc, (i, &b)| acc ^ (b & g[i][j])))
            .collect()
    }

    #[test]
    fn matches_dense_kronecker() {
        for n in [1usize, 2, 4, 8, 16] {
            for seed in 0..20u32 {
                let r: Vec<u8> = (0..n).map(|i| ((seed.wrapping_mul(2654435761) >> (i % 32)) & 1) as u8).collect();
                assert_eq!(polar_encode(&r).unwrap(), kron_row(&r));
            }
        }
    }

    #[test]
    fn involution() {
        let r: Vec<u8> = (0..64).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let mut w = r.clone();
        polar_transform(&mut w).unwrap();
        polar_transform(&mut w).unwrap();
        assert_eq!(w, r);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(polar_encode(&[0, 1, 0]).unwrap_err().kind(), "domain");
        assert_eq!(polar_encode(&[]).unwrap_err().kind(), "domain");
    }
}
