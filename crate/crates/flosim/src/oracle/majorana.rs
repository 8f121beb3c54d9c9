//! Brute-force Majorana-operator simulator on a handful of modes.
//!
//! Represents `2k` Majorana modes on `k` qubits through the Jordan-Wigner
//! construction (`c_{2j} = Z_0..Z_{j-1} X_j`, `c_{2j+1} = Z_0..Z_{j-1} Y_j`)
//! and evolves a dense state vector. Exponentially expensive, so it is only
//! used to validate the covariance-matrix engine on small instances.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense state of `2k` Majorana modes (`k` qubits). Mode indices are local,
/// `0..2k`.
#[derive(Debug, Clone)]
pub struct DenseMajorana {
    k: usize,
    psi: Vec<Complex64>,
}

impl DenseMajorana {
    /// Deterministic generic (non-Gaussian, nowhere-orthogonal in practice)
    /// state, used as a seed for projector-based initializations.
    pub fn generic(num_modes: usize) -> Self {
        Self::generic_with_seed(num_modes, 0)
    }

    fn generic_with_seed(num_modes: usize, seed: u64) -> Self {
        assert!(num_modes % 2 == 0 && num_modes >= 2 && num_modes <= 16);
        let k = num_modes / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(0xF105_0000 + seed);
        let mut psi: Vec<Complex64> = (0..1usize << k)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = norm(&psi);
        for a in &mut psi {
            *a /= norm;
        }
        Self { k, psi }
    }

    /// State stabilized by `sign * i c_p c_q = +1` for each pair, obtained by
    /// projecting a generic seed and renormalizing.
    pub fn from_pairing(num_modes: usize, pairs: &[(usize, usize, i8)]) -> Self {
        for seed in 0..8 {
            let mut s = Self::generic_with_seed(num_modes, seed);
            let mut ok = true;
            for &(p, q, sign) in pairs {
                if s.measure(p, q, sign).is_none() {
                    ok = false;
                    break;
                }
            }
            if ok {
                return s;
            }
        }
        unreachable!("all seeds orthogonal to the pairing codespace");
    }

    pub fn num_modes(&self) -> usize {
        2 * self.k
    }

    /// Apply `c_p` to the state in place.
    pub fn apply_c(&mut self, p: usize) {
        let j = p / 2;
        let y = p % 2 == 1;
        let dim = self.psi.len();
        let mut out = vec![Complex64::ZERO; dim];
        let zmask = (1usize << j) - 1;
        let flip = 1usize << j;
        for (idx, &a) in self.psi.iter().enumerate() {
            if a == Complex64::ZERO {
                continue;
            }
            let zpar = (idx & zmask).count_ones() % 2;
            let mut coeff = if zpar == 1 {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            };
            if y {
                coeff *= if idx & flip == 0 {
                    Complex64::new(0.0, 1.0)
                } else {
                    Complex64::new(0.0, -1.0)
                };
            }
            out[idx ^ flip] += coeff * a;
        }
        self.psi = out;
    }

    /// Apply `exp(gamma c_p c_q) = cos(gamma) I + sin(gamma) c_p c_q`.
    pub fn rotate(&mut self, p: usize, q: usize, gamma: f64) {
        let mut branch = self.clone();
        branch.apply_c(q);
        branch.apply_c(p);
        let (c, s) = (gamma.cos(), gamma.sin());
        for (a, b) in self.psi.iter_mut().zip(branch.psi.iter()) {
            *a = c * *a + s * *b;
        }
    }

    /// Project onto `i c_p c_q = outcome` and renormalize. Returns the
    /// outcome probability, or `None` if it vanishes.
    pub fn measure(&mut self, p: usize, q: usize, outcome: i8) -> Option<f64> {
        let mut branch = self.clone();
        branch.apply_c(q);
        branch.apply_c(p);
        let phase = Complex64::new(0.0, f64::from(outcome));
        for (a, b) in self.psi.iter_mut().zip(branch.psi.iter()) {
            *a = (*a + phase * *b) / 2.0;
        }
        let n = norm(&self.psi);
        if n * n <= 1e-12 {
            return None;
        }
        for a in &mut self.psi {
            *a /= n;
        }
        Some(n * n)
    }

    /// `<i c_p c_q>` on the current (normalized) state.
    pub fn expectation_pair(&self, p: usize, q: usize) -> f64 {
        let mut branch = self.clone();
        branch.apply_c(q);
        branch.apply_c(p);
        let mut acc = Complex64::ZERO;
        for (a, b) in self.psi.iter().zip(branch.psi.iter()) {
            acc += a.conj() * *b;
        }
        (Complex64::new(0.0, 1.0) * acc).re
    }

    /// `<i^{k/2} c_{x1} .. c_{xk}>` for an even-sized mode list.
    pub fn wick_expectation(&self, modes: &[usize]) -> f64 {
        assert!(modes.len() % 2 == 0);
        let mut branch = self.clone();
        for &p in modes.iter().rev() {
            branch.apply_c(p);
        }
        let mut acc = Complex64::ZERO;
        for (a, b) in self.psi.iter().zip(branch.psi.iter()) {
            acc += a.conj() * *b;
        }
        (Complex64::new(0.0, 1.0).powu((modes.len() / 2) as u32) * acc).re
    }

    /// Raw amplitude vector (little-endian qubit indexing).
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.psi
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        assert_eq!(self.k, other.k);
        self.psi
            .iter()
            .zip(other.psi.iter())
            .map(|(a, b)| a.conj() * *b)
            .sum()
    }

    /// Full covariance matrix of the current state.
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let n = 2 * self.k;
        let mut m = vec![vec![0.0; n]; n];
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    m[p][q] = self.expectation_pair(p, q);
                }
            }
        }
        m
    }
}

fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anticommutation_relations() {
        let n = 6;
        for p in 0..n {
            for q in 0..n {
                let s = DenseMajorana::generic(n);
                let mut pq = s.clone();
                pq.apply_c(q);
                pq.apply_c(p);
                let mut qp = s.clone();
                qp.apply_c(p);
                qp.apply_c(q);
                for (a, b) in pq.psi.iter().zip(qp.psi.iter()) {
                    let sum = a + b;
                    let want = if p == q { 2.0 * s.psi[0] } else { Complex64::ZERO };
                    let _ = want;
                    if p == q {
                        continue;
                    }
                    assert!(sum.norm() < 1e-12, "c_{p} c_{q} do not anticommute");
                }
            }
        }
    }

    #[test]
    fn pairing_expectations() {
        let s = DenseMajorana::from_pairing(4, &[(0, 1, 1), (2, 3, 1)]);
        assert!((s.expectation_pair(0, 1) - 1.0).abs() < 1e-12);
        assert!((s.expectation_pair(2, 3) - 1.0).abs() < 1e-12);
        assert!(s.expectation_pair(0, 2).abs() < 1e-12);

        let t = DenseMajorana::from_pairing(4, &[(0, 2, -1), (1, 3, 1)]);
        assert!((t.expectation_pair(0, 2) + 1.0).abs() < 1e-12);
        assert!((t.expectation_pair(1, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_unitary() {
        let mut s = DenseMajorana::from_pairing(6, &[(0, 1, 1), (2, 3, 1), (4, 5, 1)]);
        s.rotate(1, 4, 0.7);
        assert!((norm(&s.psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_probabilities_sum_to_one() {
        let mut s = DenseMajorana::from_pairing(4, &[(0, 1, 1), (2, 3, 1)]);
        s.rotate(1, 2, 0.6);
        let plus = s.clone().measure(0, 1, 1).unwrap();
        let minus = s.clone().measure(0, 1, -1).unwrap();
        assert!((plus + minus - 1.0).abs() < 1e-12);
        assert!((plus - (1.0 + (1.2f64).cos()) / 2.0).abs() < 1e-12);
    }
}
