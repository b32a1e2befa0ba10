//! Deutsch-Jozsa input shortening over shared EPR pairs.

use crate::error::{Error, Result};

/// Largest n accepted by the statevector simulation (n² amplitudes).
pub const MAX_DJ_N: usize = 1 << 11;

/// Exact joint distribution of the two measurement results (a, b).
#[derive(Clone, Debug, PartialEq)]
pub struct DjDistribution {
    pub n: usize,
    pub log_n: u32,
    /// Index (a << log_n) | b.
    probs: Vec<f64>,
}

impl DjDistribution {
    pub fn prob(&self, a: u64, b: u64) -> f64 {
        self.probs[((a as usize) << self.log_n) | b as usize]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Pr[a = b].
    pub fn diagonal_mass(&self) -> f64 {
        (0..self.n).map(|a| self.probs[(a << self.log_n) | a]).sum()
    }

    /// Outcomes with probability above `tol`, in (a, b) order.
    pub fn support(&self, tol: f64) -> Vec<(u64, u64, f64)> {
        let m = self.log_n;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > tol)
            .map(|(i, p)| ((i >> m) as u64, (i & ((1 << m) - 1)) as u64, *p))
            .collect()
    }
}

pub fn check_power_of_two(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("n = {n} must be a power of 2, at least 2")));
    }
    Ok(n.trailing_zeros())
}

/// In-place unnormalized Walsh-Hadamard transform over `len` entries spaced
/// `stride` apart starting at `offset`.
fn wht(v: &mut [i64], offset: usize, stride: usize, len: usize) {
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let (p, q) = (offset + j * stride, offset + (j + h) * stride);
                let (u, w) = (v[p], v[q]);
                v[p] = u + w;
                v[q] = u - w;
            }
        }
        h *= 2;
    }
}

/// Alice and Bob share log n EPR pairs, apply the phases (-1)^{x_i} and
/// (-1)^{y_i} to their halves, apply Hadamards to every qubit and measure.
pub fn dj_shorten(x: &[bool], y: &[bool]) -> Result<DjDistribution> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("|x| = {n}, |y| = {}", y.len())));
    }
    let m = check_power_of_two(n)?;
    if n > MAX_DJ_N {
        return Err(Error::BudgetExceeded(format!("n = {n} exceeds {MAX_DJ_N}")));
    }
    // Amplitudes are kept as integers times 1/(n√n), so cancellations are
    // exact. Index (i_A << m) | i_B.
    let mut psi = vec![0i64; n * n];
    for i in 0..n {
        psi[(i << m) | i] = 1;
    }
    for i in 0..n {
        for j in 0..n {
            let flip = x[i] ^ y[j];
            if flip {
                psi[(i << m) | j] = -psi[(i << m) | j];
            }
        }
    }
    for b in 0..n {
        wht(&mut psi, b, n, n);
    }
    for a in 0..n {
        wht(&mut psi, a * n, 1, n);
    }
    let norm = (n as f64).powi(3);
    let probs = psi.iter().map(|&v| (v * v) as f64 / norm).collect();
    Ok(DjDistribution { n, log_n: m, probs })
}

pub fn bits_of(v: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (v >> i) & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// |1/(n√n) Σ_i (-1)^{x_i + y_i + <a⊕b, i>}|²
    fn closed_form(x: &[bool], y: &[bool], a: usize, b: usize) -> f64 {
        let n = x.len() as f64;
        let s: f64 = (0..x.len())
            .map(|i| {
                let e = (x[i] ^ y[i]) as u32 + ((a ^ b) & i).count_ones();
                if e % 2 == 0 { 1.0 } else { -1.0 }
            })
            .sum();
        (s / (n * n.sqrt())).powi(2)
    }

    #[test]
    fn equal_inputs_land_on_diagonal() {
        let x = bits_of(0b1011, 4);
        let d = dj_shorten(&x, &x).unwrap();
        assert!((d.diagonal_mass() - 1.0).abs() < 1e-12);
        for a in 0..4 {
            assert!((d.prob(a, a) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_difference_avoids_diagonal() {
        let d = dj_shorten(&bits_of(0, 4), &bits_of(0b1100, 4)).unwrap();
        assert!(d.diagonal_mass().abs() < 1e-12);
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_bit_example() {
        let x = [false, true];
        let d = dj_shorten(&x, &x).unwrap();
        let s = d.support(1e-12);
        assert_eq!(s.len(), 2);
        assert!((d.prob(0, 0) - 0.5).abs() < 1e-12 && (d.prob(1, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matches_closed_form() {
        for (xv, yv, n) in [(0b0110u64, 0b0101u64, 4usize), (0xA5, 0x3C, 8), (0x1234, 0xFEDC, 16)] {
            let (x, y) = (bits_of(xv, n), bits_of(yv, n));
            let d = dj_shorten(&x, &y).unwrap();
            for a in 0..n {
                for b in 0..n {
                    assert!((d.prob(a as u64, b as u64) - closed_form(&x, &y, a, b)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(dj_shorten(&[false; 3], &[false; 3]).is_err());
        assert!(dj_shorten(&[false; 4], &[false; 2]).is_err());
    }
}
