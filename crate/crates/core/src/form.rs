//! Holomorphic 1-form coefficients `f` (with the form being `f dz`) built as finite
//! sums of terms `scale · e^{exponent} · numer / denom`, each piece a Laurent
//! polynomial.
//!
//! Gauss-map data `g = (P/Q)·e^u` turns the Weierstrass inversion into products
//! of such terms, which keeps isotropy an algebraic identity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::laurent::Laurent;

const EXACT_DIV_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub scale: Complex64,
    #[serde(default, skip_serializing_if = "Laurent::is_zero")]
    pub exponent: Laurent,
    pub numer: Laurent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denom: Option<Laurent>,
}

impl ExpTerm {
    pub fn laurent(numer: Laurent) -> Self {
        Self {
            scale: Complex64::new(1.0, 0.0),
            exponent: Laurent::zero(),
            numer,
            denom: None,
        }
    }

    pub fn exponential(exponent: Laurent, numer: Laurent) -> Self {
        Self {
            scale: Complex64::new(1.0, 0.0),
            exponent,
            numer,
            denom: None,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut v = self.scale * self.numer.eval(z);
        if !self.exponent.is_zero() {
            v *= self.exponent.eval(z).exp();
        }
        if let Some(d) = &self.denom {
            v /= d.eval(z);
        }
        v
    }

    /// Product of two terms; monomial and exactly dividing denominators are
    /// cancelled so that removable singularities disappear structurally.
    pub fn mul(&self, other: &Self) -> Self {
        let denom = match (&self.denom, &other.denom) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(a.mul(b)),
        };
        Self {
            scale: self.scale * other.scale,
            exponent: self.exponent.add(&other.exponent),
            numer: self.numer.mul(&other.numer),
            denom,
        }
        .simplified()
    }

    pub fn simplified(mut self) -> Self {
        let Some(d) = self.denom.take() else {
            return self;
        };
        if let Some((k, c)) = d.as_monomial() {
            self.numer = self.numer.shift(-k).scale(c.inv());
            return self;
        }
        match self.numer.div_exact(&d, EXACT_DIV_TOL) {
            Some(q) => self.numer = q,
            None => self.denom = Some(d),
        }
        self
    }

    /// Largest `|k|` among the Laurent pieces.
    pub fn degree(&self) -> usize {
        let d = self.denom.as_ref().map_or(0, Laurent::degree);
        self.exponent.degree().max(self.numer.degree()).max(d)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HoloForm {
    pub terms: Vec<ExpTerm>,
}

impl HoloForm {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn from_laurent(l: Laurent) -> Self {
        Self {
            terms: vec![ExpTerm::laurent(l)],
        }
    }

    /// `e^{exponent} · base`.
    pub fn exponential(exponent: Laurent, base: &HoloForm) -> Self {
        let factor = ExpTerm::exponential(exponent, Laurent::constant(Complex64::new(1.0, 0.0)));
        base.mul_term(&factor)
    }

    /// `dz`
    pub fn dz() -> Self {
        Self::from_laurent(Laurent::constant(Complex64::new(1.0, 0.0)))
    }

    /// `dz / z`
    pub fn dz_over_z() -> Self {
        Self::from_laurent(Laurent::monomial(-1, Complex64::new(1.0, 0.0)))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    scale: t.scale * c,
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn mul_term(&self, t: &ExpTerm) -> Self {
        Self {
            terms: self.terms.iter().map(|s| s.mul(t)).collect(),
        }
    }

    /// The underlying Laurent polynomial when the form has no exponential or
    /// rational factor.
    pub fn as_laurent(&self) -> Option<Laurent> {
        let mut acc = Laurent::zero();
        for t in &self.terms {
            if !t.exponent.is_zero() || t.denom.is_some() {
                return None;
            }
            acc = acc.add(&t.numer.scale(t.scale));
        }
        Some(acc)
    }

    pub fn denominators(&self) -> impl Iterator<Item = &Laurent> {
        self.terms.iter().filter_map(|t| t.denom.as_ref())
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(ExpTerm::degree).max().unwrap_or(0)
    }

    /// True when no term carries negative powers in any piece, so the form is
    /// holomorphic at the origin apart from denominators.
    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| {
            (t.numer.is_zero() || t.numer.min_power() >= 0)
                && (t.exponent.is_zero() || t.exponent.min_power() >= 0)
                && t.denom.as_ref().is_none_or(|d| d.min_power() >= 0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn monomial_denominator_cancels() {
        let a = ExpTerm::laurent(Laurent::from_terms(&[(1, c(1.0, 0.0)), (3, c(-1.0, 0.0))]));
        let b = ExpTerm {
            denom: Some(Laurent::monomial(1, c(2.0, 0.0))),
            ..ExpTerm::laurent(Laurent::constant(c(1.0, 0.0)))
        };
        let p = a.mul(&b);
        assert!(p.denom.is_none());
        assert_eq!(p.numer.coeff(0), c(0.5, 0.0));
        assert_eq!(p.numer.coeff(2), c(-0.5, 0.0));
        assert!(p.eval(c(0.0, 0.0)).is_finite());
    }

    #[test]
    fn exact_polynomial_denominator_cancels() {
        // (z^2 - 1) / (z - 1) = z + 1
        let num = Laurent::from_terms(&[(2, c(1.0, 0.0)), (0, c(-1.0, 0.0))]);
        let den = Laurent::from_terms(&[(1, c(1.0, 0.0)), (0, c(-1.0, 0.0))]);
        let t = ExpTerm {
            denom: Some(den),
            ..ExpTerm::laurent(num)
        }
        .simplified();
        assert!(t.denom.is_none());
        assert!((t.eval(c(1.0, 0.0)) - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn exponential_term_evaluates() {
        let f = HoloForm::exponential(Laurent::monomial(1, c(1.0, 0.0)), &HoloForm::dz_over_z());
        let z = c(0.3, -0.8);
        assert!((f.eval(z) - z.exp() / z).norm() < 1e-14);
        assert!(f.as_laurent().is_none());
        assert_eq!(HoloForm::dz().as_laurent(), Some(Laurent::constant(c(1.0, 0.0))));
    }
}
