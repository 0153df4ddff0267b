//! Contour quadrature for holomorphic integrands `f(z) dz`.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Values that quadrature can accumulate: scalars or component triples.
pub trait Integrand: Copy + Send + Sync {
    fn zero() -> Self;
    fn plus(self, other: Self) -> Self;
    fn times(self, c: Complex64) -> Self;
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn times(self, c: Complex64) -> Self {
        self * c
    }
}

impl Integrand for [Complex64; 3] {
    fn zero() -> Self {
        [Complex64::new(0.0, 0.0); 3]
    }
    fn plus(self, o: Self) -> Self {
        [self[0] + o[0], self[1] + o[1], self[2] + o[2]]
    }
    fn times(self, c: Complex64) -> Self {
        [self[0] * c, self[1] * c, self[2] * c]
    }
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];

const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn unit_rule() -> impl Iterator<Item = (f64, f64)> {
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
}

/// `∫ f(z) dz` along the straight segment from `a` to `b`.
pub fn segment<V: Integrand, F: Fn(Complex64) -> V>(f: &F, a: Complex64, b: Complex64) -> V {
    let d = b - a;
    unit_rule()
        .fold(V::zero(), |acc, (t, w)| acc.plus(f(a + d * t).times(Complex64::new(w, 0.0))))
        .times(d)
}

/// `∫ f(z) dz` along the circular arc `center + radius·e^{iθ}`, `θ` from `t0` to `t1`.
pub fn arc<V: Integrand, F: Fn(Complex64) -> V>(f: &F, center: Complex64, radius: f64, t0: f64, t1: f64) -> V {
    let span = t1 - t0;
    if span == 0.0 {
        return V::zero();
    }
    // split long arcs so each panel stays well inside the rule's accuracy
    let panels = ((span.abs() / (PI / 16.0)).ceil() as usize).max(1);
    let h = span / panels as f64;
    let mut acc = V::zero();
    for p in 0..panels {
        let a = t0 + h * p as f64;
        for (t, w) in unit_rule() {
            let e = Complex64::from_polar(radius, a + h * t);
            acc = acc.plus(f(center + e).times(Complex64::i() * e * (w * h)));
        }
    }
    acc
}

/// `∫ f(z) dz` along a polyline.
pub fn polyline<V: Integrand, F: Fn(Complex64) -> V>(f: &F, pts: &[Complex64]) -> V {
    pts.windows(2).fold(V::zero(), |acc, w| acc.plus(segment(f, w[0], w[1])))
}

/// Trapezoid rule for `∮ f(z) dz` over a full positively oriented circle;
/// spectrally accurate for Laurent integrands.
pub fn circle<V: Integrand, F: Fn(Complex64) -> V>(f: &F, center: Complex64, radius: f64, nodes: usize) -> V {
    let h = 2.0 * PI / nodes as f64;
    (0..nodes)
        .fold(V::zero(), |acc, k| {
            let e = Complex64::from_polar(radius, h * k as f64);
            acc.plus(f(center + e).times(Complex64::i() * e))
        })
        .times(Complex64::new(h, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weights_sum_to_one() {
        let s: f64 = unit_rule().map(|(_, w)| w).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn segment_exact_for_polynomials() {
        let f = |z: Complex64| z.powi(7) * 3.0 - z;
        let a = c(0.1, -0.4);
        let b = c(1.2, 0.7);
        let exact = (b.powi(8) - a.powi(8)) * (3.0 / 8.0) - (b * b - a * a) * 0.5;
        assert!((segment(&f, a, b) - exact).norm() < 1e-13);
    }

    #[test]
    fn residue_on_circle() {
        let f = |z: Complex64| z.inv() + z.powi(-2) * 5.0 + z.powi(3);
        let two_pi_i = c(0.0, 2.0 * PI);
        assert!((circle(&f, c(0.0, 0.0), 0.7, 256) - two_pi_i).norm() < 1e-12);
        assert!((arc(&f, c(0.0, 0.0), 0.7, 0.0, 2.0 * PI) - two_pi_i).norm() < 1e-12);
    }
}
