//! Cepstral transform `C_k = sum_{i=1}^{N} ln(E_i) cos(pi k (i - 1/2) / N)`
//! for `k = 0..K-1`, without orthonormal scaling. `C_0` is the plain sum of
//! log energies (the dc channel).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Cosines for one (N, K) pair. The argument `pi k (2i - 1) / (2N)` is a
/// multiple of `2 pi / 4N`, so one period of `4N` samples covers every term.
#[derive(Debug, Clone)]
pub struct DctTable {
    n: usize,
    k: usize,
    period: Vec<f64>,
}

impl DctTable {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("cepstral transform needs at least one energy"));
        }
        if k > n {
            return Err(Error::config(format!("{k} cepstra requested from {n} energies")));
        }
        let len = 4 * n;
        let period = (0..len)
            .map(|j| (2.0 * PI * j as f64 / len as f64).cos())
            .collect();
        Ok(Self { n, k, period })
    }

    pub fn num_inputs(&self) -> usize {
        self.n
    }

    pub fn num_outputs(&self) -> usize {
        self.k
    }

    /// Table index of `cos(pi k (i - 1/2) / N)` for 1-based `i`.
    pub(crate) fn index(&self, k: usize, i: usize) -> usize {
        (k * (2 * i - 1)) % (4 * self.n)
    }

    pub fn apply(&self, log_energies: &[f64]) -> Result<Vec<f64>> {
        if log_energies.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: log_energies.len(),
            });
        }
        Ok((0..self.k)
            .map(|k| {
                log_energies
                    .iter()
                    .enumerate()
                    .map(|(i0, le)| le * self.period[self.index(k, i0 + 1)])
                    .sum()
            })
            .collect())
    }
}

/// Takes linear energies (all positive) and returns `K` cepstra.
pub fn dct_cepstrum(energies: &[f64], num_cepstra: usize) -> Result<Vec<f64>> {
    let table = DctTable::new(energies.len(), num_cepstra)?;
    let logs: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
    table.apply(&logs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_larger_than_n_is_a_config_error() {
        assert!(matches!(dct_cepstrum(&[1.0; 4], 5), Err(Error::Config(_))));
    }

    #[test]
    fn constant_energies_only_excite_c0() {
        let e = 3.5f64;
        let c = dct_cepstrum(&[e; 26], 26).unwrap();
        assert!((c[0] - 26.0 * e.ln()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn table_index_wraps_one_period() {
        let t = DctTable::new(26, 13).unwrap();
        for k in 0..13 {
            for i in 1..=26 {
                let direct = (PI * k as f64 * (i as f64 - 0.5) / 26.0).cos();
                assert!((t.period[t.index(k, i)] - direct).abs() < 1e-14);
            }
        }
    }
}
