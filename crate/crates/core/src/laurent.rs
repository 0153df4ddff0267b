//! Finite Laurent polynomials `Σ a_k z^k` with `k` ranging over a contiguous
//! window of integers, possibly negative.
//!
//! Evaluation splits the window at `k = 0` and runs Horner separately in `z`
//! and in `1/z`, so a coefficient vector spanning `-K..=K` costs `2K` complex
//! multiply-adds per point.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Laurent {
    min_power: i32,
    coeffs: Vec<Complex64>,
}

impl Default for Laurent {
    fn default() -> Self {
        Self::zero()
    }
}

impl Laurent {
    pub fn new(min_power: i32, coeffs: Vec<Complex64>) -> Self {
        let mut l = Self { min_power, coeffs };
        l.trim();
        l
    }

    pub fn zero() -> Self {
        Self {
            min_power: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(0, vec![c])
    }

    pub fn monomial(power: i32, c: Complex64) -> Self {
        Self::new(power, vec![c])
    }

    /// Builds a Laurent polynomial from `(power, coefficient)` pairs; repeated powers add.
    pub fn from_terms(terms: &[(i32, Complex64)]) -> Self {
        if terms.is_empty() {
            return Self::zero();
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap();
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for &(k, c) in terms {
            coeffs[(k - lo) as usize] += c;
        }
        Self::new(lo, coeffs)
    }

    pub fn min_power(&self) -> i32 {
        self.min_power
    }

    pub fn max_power(&self) -> i32 {
        self.min_power + self.coeffs.len() as i32 - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|k|` carrying a coefficient.
    pub fn degree(&self) -> usize {
        if self.is_zero() {
            0
        } else {
            self.min_power.unsigned_abs().max(self.max_power().unsigned_abs()) as usize
        }
    }

    pub fn coeff(&self, power: i32) -> Complex64 {
        let idx = power - self.min_power;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Returns the single `(power, coefficient)` pair when this is a monomial.
    pub fn as_monomial(&self) -> Option<(i32, Complex64)> {
        (self.coeffs.len() == 1).then(|| (self.min_power, self.coeffs[0]))
    }

    fn trim(&mut self) {
        let zero = |c: &Complex64| c.re == 0.0 && c.im == 0.0;
        while self.coeffs.last().is_some_and(zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| zero(c)).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.min_power += lead as i32;
        }
        if self.coeffs.is_empty() {
            self.min_power = 0;
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.coeffs.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let lo = self.min_power;
        let hi = self.max_power();
        let mut total = Complex64::new(0.0, 0.0);
        if hi >= 0 {
            let start = lo.max(0);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (start..=hi).rev() {
                acc = acc * z + self.coeff(k);
            }
            if start > 0 {
                acc *= z.powi(start);
            }
            total += acc;
        }
        if lo < 0 {
            let w = z.inv();
            let stop = hi.min(-1);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in lo..=stop {
                acc = acc * w + self.coeff(k);
            }
            // acc = Σ a_k w^{k_stop_abs..}, shift by the smallest |k|
            let shift = -stop;
            acc *= w.powi(shift);
            total += acc;
        }
        total
    }

    pub fn derivative(&self) -> Self {
        let terms: Vec<(i32, Complex64)> = (self.min_power..=self.max_power())
            .filter(|&k| k != 0)
            .map(|k| (k - 1, self.coeff(k) * k as f64))
            .collect();
        Self::from_terms(&terms)
    }

    /// Termwise primitive, returning the coefficient of `z^-1` separately since
    /// it integrates to `a_{-1} log z`.
    pub fn antiderivative(&self) -> (Self, Complex64) {
        let terms: Vec<(i32, Complex64)> = (self.min_power..=self.max_power())
            .filter(|&k| k != -1)
            .map(|k| (k + 1, self.coeff(k) / (k + 1) as f64))
            .collect();
        (Self::from_terms(&terms), self.coeff(-1))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.min_power, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn shift(&self, by: i32) -> Self {
        Self::new(self.min_power + by, self.coeffs.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.min_power.min(other.min_power);
        let hi = self.max_power().max(other.max_power());
        let coeffs = (lo..=hi).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self::new(lo, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(self.min_power + other.min_power, coeffs)
    }

    /// Quotient `self / d` when `d` divides `self` up to a remainder of relative
    /// size `tol`.
    pub fn div_exact(&self, d: &Self, tol: f64) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let dn = d.coeffs.len() - 1;
        let nn = self.coeffs.len() - 1;
        if nn < dn {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Complex64::new(0.0, 0.0); nn - dn + 1];
        let lead = d.coeffs[dn];
        for i in (0..=nn - dn).rev() {
            let q = rem[i + dn] / lead;
            quot[i] = q;
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i + j] -= q * dc;
            }
        }
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let resid = rem[..dn].iter().map(|c| c.norm()).fold(0.0, f64::max);
        (resid <= tol * scale).then(|| Self::new(self.min_power - d.min_power, quot))
    }

    /// Roots in `C \ {0}` of the Laurent polynomial, i.e. roots of
    /// `z^{-min_power} · self` excluding the origin. Computed as eigenvalues of
    /// the companion matrix.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::Representation("roots of the zero Laurent polynomial".into()));
        }
        let n = self.coeffs.len() - 1;
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[n];
        let mut companion = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let eig = companion
            .eigenvalues()
            .ok_or_else(|| Error::Representation("companion eigenvalues did not converge".into()))?;
        Ok(eig.iter().copied().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn brute(l: &Laurent, z: Complex64) -> Complex64 {
        (l.min_power()..=l.max_power()).map(|k| l.coeff(k) * z.powi(k)).sum()
    }

    #[test]
    fn horner_matches_direct_sum() {
        let l = Laurent::new(-3, vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0), c(0.5, 0.5), c(-2.0, 1.0)]);
        for z in [c(0.7, 0.2), c(-1.3, 0.9), c(0.01, 2.0)] {
            assert!((l.eval(z) - brute(&l, z)).norm() < 1e-12 * brute(&l, z).norm().max(1.0));
        }
        let only_neg = Laurent::new(-4, vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let z = c(0.4, -0.3);
        assert!((only_neg.eval(z) - brute(&only_neg, z)).norm() < 1e-10);
        let only_pos = Laurent::new(2, vec![c(1.0, 1.0), c(-1.0, 0.0)]);
        assert!((only_pos.eval(z) - brute(&only_pos, z)).norm() < 1e-14);
    }

    #[test]
    fn trims_zero_ends() {
        let l = Laurent::new(-2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(l.min_power(), -1);
        assert_eq!(l.max_power(), -1);
        assert_eq!(l.as_monomial(), Some((-1, c(1.0, 0.0))));
    }

    #[test]
    fn antiderivative_splits_log_term() {
        let l = Laurent::from_terms(&[(-2, c(1.0, 0.0)), (-1, c(3.0, 0.0)), (1, c(2.0, 0.0))]);
        let (prim, log) = l.antiderivative();
        assert_eq!(log, c(3.0, 0.0));
        assert_eq!(prim.coeff(-1), c(-1.0, 0.0));
        assert_eq!(prim.coeff(2), c(1.0, 0.0));
        assert!((prim.derivative().add(&Laurent::monomial(-1, log)).sub(&l)).coeffs().iter().all(|a| a.norm() < 1e-15));
    }

    #[test]
    fn roots_of_shifted_polynomial() {
        // z^-1 (z - 2)(z + 0.5i) = z - 2 + 0.5i - i / z
        let p = Laurent::from_terms(&[(1, c(1.0, 0.0)), (0, c(-2.0, 0.5)), (-1, c(0.0, -1.0))]);
        let mut roots = p.roots().unwrap();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((roots[0] - c(0.0, -0.5)).norm() < 1e-12);
        assert!((roots[1] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn product_evaluates_as_product() {
        let a = Laurent::from_terms(&[(-1, c(1.0, 0.0)), (2, c(0.0, 1.0))]);
        let b = Laurent::from_terms(&[(0, c(2.0, 0.0)), (-3, c(1.0, -1.0))]);
        let z = c(0.9, 0.4);
        assert!((a.mul(&b).eval(z) - a.eval(z) * b.eval(z)).norm() < 1e-12);
    }
}
