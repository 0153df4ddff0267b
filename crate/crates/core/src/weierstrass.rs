//! Weierstrass data: triples of holomorphic 1-forms, the immersion they
//! integrate to, induced metric, Gauss map, flux and the Lorentzian swap.
//!
//! Convention: `dX_j = Re φ_j` and `ds² = Σ |φ_j|²`. With this normalization
//! the Euclidean length of `dX(v)` is `λ|v|/√2`, so distances reported in the
//! metric `Σ|φ_j|²` are `√2` times Euclidean lengths on the surface.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{generator_cycle, Cycle, Grid, Region};
use crate::error::{Error, Result};
use crate::form::{ExpTerm, HoloForm};
use crate::laurent::Laurent;
use crate::quadrature;

pub const CONVENTION: &str = "dX=Re(phi)";
/// Trapezoid nodes for period integrals over a full circle.
pub const PERIOD_NODES: usize = 4096;
/// Default tolerance on real periods.
pub const PERIOD_TOL: f64 = 1e-9;
/// Below this the induced metric counts as vanishing.
pub const BRANCH_TOL: f64 = 1e-24;

const ROOT_TOL: f64 = 1e-9;

type C3 = [Complex64; 3];

fn one() -> Laurent {
    Laurent::constant(Complex64::new(1.0, 0.0))
}

/// Gauss map in the form `g = (numer/denom)·e^{exponent}` together with `φ3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussPair {
    pub numer: Laurent,
    pub denom: Laurent,
    #[serde(default)]
    pub exponent: Laurent,
    pub phi3: HoloForm,
}

impl GaussPair {
    pub fn exponential(exponent: Laurent, phi3: HoloForm) -> Self {
        Self {
            numer: one(),
            denom: one(),
            exponent,
            phi3,
        }
    }

    pub fn rational(numer: Laurent, denom: Laurent, phi3: HoloForm) -> Self {
        Self {
            numer,
            denom,
            exponent: Laurent::zero(),
            phi3,
        }
    }

    /// `g ≡ m`
    pub fn constant(m: Complex64, phi3: HoloForm) -> Self {
        Self::rational(Laurent::constant(m), one(), phi3)
    }

    pub fn g(&self, z: Complex64) -> Complex64 {
        self.rational_part(z) * self.exponent.eval(z).exp()
    }

    /// `numer/denom` at `z`.
    pub fn rational_part(&self, z: Complex64) -> Complex64 {
        self.numer.eval(z) / self.denom.eval(z)
    }

    /// Zeros and poles of `g` inside `region` (with multiplicity), from the
    /// rational part only since `e^u` never vanishes.
    pub fn zeros_and_poles(&self, region: &Region) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let mut zeros = Vec::new();
        let mut poles = Vec::new();
        let inside = |z: &Complex64| region.contains(*z, ROOT_TOL);
        zeros.extend(self.numer.roots()?.into_iter().filter(inside));
        poles.extend(self.denom.roots()?.into_iter().filter(inside));
        let origin = Complex64::new(0.0, 0.0);
        if region.contains(origin, ROOT_TOL) {
            let order = self.numer.min_power() - self.denom.min_power();
            let target = if order > 0 { &mut zeros } else { &mut poles };
            target.extend(std::iter::repeat_n(origin, order.unsigned_abs() as usize));
        }
        Ok((zeros, poles))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassTriple {
    pub carrier: Region,
    pub phi: [HoloForm; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauss: Option<GaussPair>,
}

/// JSON document for a serialized triple.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripleDocument {
    convention: String,
    carrier: Region,
    degree: usize,
    phi: [HoloForm; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gauss: Option<GaussPair>,
}

impl WeierstrassTriple {
    pub fn from_laurent(carrier: Region, phi: [Laurent; 3]) -> Self {
        let [a, b, c] = phi;
        Self {
            carrier,
            phi: [HoloForm::from_laurent(a), HoloForm::from_laurent(b), HoloForm::from_laurent(c)],
            gauss: None,
        }
    }

    pub fn eval(&self, z: Complex64) -> C3 {
        [self.phi[0].eval(z), self.phi[1].eval(z), self.phi[2].eval(z)]
    }

    pub fn lambda2_at(&self, z: Complex64) -> f64 {
        self.eval(z).iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn degree(&self) -> usize {
        self.phi.iter().map(HoloForm::degree).max().unwrap_or(0)
    }

    pub fn phi3(&self) -> &HoloForm {
        &self.phi[2]
    }

    /// `∮ φ_j` over a cycle; circles use the trapezoid rule, other polylines
    /// Gauss–Legendre panels.
    pub fn periods(&self, cycle: &Cycle) -> C3 {
        let f = |z: Complex64| self.eval(z);
        match cycle.circle {
            Some(c) => {
                let v: C3 = quadrature::circle(&f, c.center, c.radius, PERIOD_NODES);
                v.times_turns(c.turns)
            }
            None => quadrature::polyline(&f, &cycle.points),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TripleDocument {
            convention: CONVENTION.to_string(),
            carrier: self.carrier,
            degree: self.degree(),
            phi: self.phi.clone(),
            gauss: self.gauss.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: TripleDocument = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        if doc.convention != CONVENTION {
            return Err(Error::Config {
                path: "convention".into(),
                message: format!("expected \"{CONVENTION}\", found \"{}\"", doc.convention),
            });
        }
        Ok(Self {
            carrier: doc.carrier,
            phi: doc.phi,
            gauss: doc.gauss,
        })
    }
}

trait TimesTurns {
    fn times_turns(self, turns: i32) -> Self;
}

impl TimesTurns for C3 {
    fn times_turns(self, turns: i32) -> Self {
        let s = f64::from(turns);
        [self[0] * s, self[1] * s, self[2] * s]
    }
}

fn check_form_on(form: &HoloForm, carrier: &Region, label: &str) -> Result<()> {
    let origin = Complex64::new(0.0, 0.0);
    let has_origin = carrier.contains(origin, ROOT_TOL);
    for t in &form.terms {
        let negative = (!t.numer.is_zero() && t.numer.min_power() < 0) || (!t.exponent.is_zero() && t.exponent.min_power() < 0);
        if negative && has_origin {
            return Err(Error::Representation(format!("{label} has a pole at the origin, which lies in the carrier")));
        }
        if let Some(d) = &t.denom {
            if has_origin && d.min_power() > 0 {
                return Err(Error::Representation(format!("{label} has a pole at the origin")));
            }
            if let Some(p) = d.roots()?.into_iter().find(|p| carrier.contains(*p, ROOT_TOL)) {
                return Err(Error::Representation(format!(
                    "{label} has a pole at {p}: zeros/poles of g do not match zeros of phi3"
                )));
            }
        }
    }
    Ok(())
}

/// `φ1 = ½(1/g − g)φ3`, `φ2 = (i/2)(1/g + g)φ3`.
pub fn from_gauss_pair(pair: &GaussPair, carrier: Region) -> Result<WeierstrassTriple> {
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let inv_g = ExpTerm {
        scale: Complex64::new(1.0, 0.0),
        exponent: pair.exponent.scale(Complex64::new(-1.0, 0.0)),
        numer: pair.denom.clone(),
        denom: Some(pair.numer.clone()),
    };
    let g = ExpTerm {
        scale: Complex64::new(1.0, 0.0),
        exponent: pair.exponent.clone(),
        numer: pair.numer.clone(),
        denom: Some(pair.denom.clone()),
    };
    let a = pair.phi3.mul_term(&inv_g);
    let b = pair.phi3.mul_term(&g);
    let phi1 = a.scale(half).add(&b.scale(-half));
    let phi2 = a.scale(half_i).add(&b.scale(half_i));
    check_form_on(&pair.phi3, &carrier, "phi3")?;
    check_form_on(&phi1, &carrier, "phi1")?;
    check_form_on(&phi2, &carrier, "phi2")?;
    let triple = WeierstrassTriple {
        carrier,
        phi: [phi1, phi2, pair.phi3.clone()],
        gauss: Some(pair.clone()),
    };
    let (zeros, poles) = pair.zeros_and_poles(&carrier)?;
    for p in zeros.iter().chain(poles.iter()) {
        if triple.lambda2_at(*p) < BRANCH_TOL {
            return Err(Error::Representation(format!(
                "zero order of phi3 at {p} exceeds the order of g there"
            )));
        }
    }
    Ok(triple)
}

/// Sup over grid nodes of `|Σφ_j²| / Σ|φ_j|²`.
pub fn isotropy_residual(triple: &WeierstrassTriple, grid: &Grid) -> f64 {
    grid.nodes()
        .par_iter()
        .map(|n| {
            let p = triple.eval(n.z);
            let s = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            s.norm() / p.iter().map(|v| v.norm_sqr()).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathOrder {
    /// Disks: straight rays from the center. Annuli: radial to the ring, then
    /// along the ring.
    Primary,
    /// Disks: ray at angle 0, then along the ring. Annuli: along the basepoint
    /// ring, then radial.
    Alternate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImmersionField {
    pub grid: Grid,
    pub basepoint: Complex64,
    pub values: Vec<[f64; 3]>,
    /// `max |X3 − h|` when prescribed samples were supplied.
    pub h_error: Option<f64>,
}

impl ImmersionField {
    pub fn sup_distance(&self, other: &ImmersionField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn third(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[2]).collect()
    }
}

fn add3(a: C3, b: C3) -> C3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Real periods over the generator of an annular grid region; error on the
/// first component above tolerance.
pub fn check_real_periods(triple: &WeierstrassTriple, region: &Region, tol: f64) -> Result<C3> {
    let Region::Annulus(a) = region else {
        return Ok([Complex64::new(0.0, 0.0); 3]);
    };
    let per = triple.periods(&generator_cycle(a));
    for (j, p) in per.iter().enumerate() {
        if p.re.abs() > tol {
            return Err(Error::WellDefinedness {
                component: j + 1,
                period: p.re,
            });
        }
    }
    Ok(per)
}

pub fn integrate_immersion(
    triple: &WeierstrassTriple,
    basepoint: Complex64,
    grid: &Grid,
    prescribed_h: Option<&[f64]>,
) -> Result<ImmersionField> {
    integrate_immersion_with(triple, basepoint, grid, prescribed_h, PathOrder::Primary)
}

pub fn integrate_immersion_with(
    triple: &WeierstrassTriple,
    basepoint: Complex64,
    grid: &Grid,
    prescribed_h: Option<&[f64]>,
    order: PathOrder,
) -> Result<ImmersionField> {
    let region = *grid.parent();
    if !region.contains(basepoint, 1e-12) {
        return Err(Error::Precondition(format!("basepoint {basepoint} is outside the grid region")));
    }
    check_real_periods(triple, &region, PERIOD_TOL)?;
    let f = |z: Complex64| triple.eval(z);
    let c = region.center();
    let na = grid.angular_count();
    let nr = grid.radial_count();
    let mut acc = vec![[Complex64::new(0.0, 0.0); 3]; grid.len()];
    let rel = basepoint - c;
    let (rho0, th0) = (rel.norm(), rel.arg());
    let at = |rho: f64, th: f64| c + Complex64::from_polar(rho, th);

    match (region, order) {
        (Region::Disk(_), PathOrder::Primary) => {
            let base: C3 = quadrature::segment(&f, basepoint, c);
            acc[0] = base;
            let rays: Vec<Vec<C3>> = (0..na)
                .into_par_iter()
                .map(|j| {
                    let mut v = base;
                    let mut out = Vec::with_capacity(nr - 1);
                    for i in 1..nr {
                        v = add3(v, quadrature::segment(&f, grid.z(grid.index(i - 1, j)), grid.z(grid.index(i, j))));
                        out.push(v);
                    }
                    out
                })
                .collect();
            for (j, ray) in rays.into_iter().enumerate() {
                for (k, v) in ray.into_iter().enumerate() {
                    acc[grid.index(k + 1, j)] = v;
                }
            }
        }
        (Region::Disk(_), PathOrder::Alternate) => {
            let base: C3 = quadrature::segment(&f, basepoint, c);
            acc[0] = base;
            let mut spoke = vec![base; nr];
            for i in 1..nr {
                spoke[i] = add3(spoke[i - 1], quadrature::segment(&f, grid.z(grid.index(i - 1, 0)), grid.z(grid.index(i, 0))));
            }
            let rings: Vec<Vec<C3>> = (1..nr)
                .into_par_iter()
                .map(|i| {
                    let rho = grid.row_radius(i);
                    let mut v = spoke[i];
                    let mut out = vec![v];
                    for j in 1..na {
                        v = add3(v, quadrature::arc(&f, c, rho, grid.angle(j - 1), grid.angle(j)));
                        out.push(v);
                    }
                    out
                })
                .collect();
            for (k, ring) in rings.into_iter().enumerate() {
                for (j, v) in ring.into_iter().enumerate() {
                    acc[grid.index(k + 1, j)] = v;
                }
            }
        }
        (Region::Annulus(_), PathOrder::Primary) => {
            let rings: Vec<Vec<C3>> = (0..nr)
                .into_par_iter()
                .map(|i| {
                    let rho = grid.row_radius(i);
                    let mut v = quadrature::segment(&f, basepoint, at(rho, th0));
                    v = add3(v, quadrature::arc(&f, c, rho, th0, 0.0));
                    let mut out = vec![v];
                    for j in 1..na {
                        v = add3(v, quadrature::arc(&f, c, rho, grid.angle(j - 1), grid.angle(j)));
                        out.push(v);
                    }
                    out
                })
                .collect();
            for (i, ring) in rings.into_iter().enumerate() {
                for (j, v) in ring.into_iter().enumerate() {
                    acc[grid.index(i, j)] = v;
                }
            }
        }
        (Region::Annulus(_), PathOrder::Alternate) => {
            let mut around = Vec::with_capacity(na);
            let mut v: C3 = quadrature::arc(&f, c, rho0, th0, 0.0);
            around.push(v);
            for j in 1..na {
                v = add3(v, quadrature::arc(&f, c, rho0, grid.angle(j - 1), grid.angle(j)));
                around.push(v);
            }
            let rays: Vec<Vec<C3>> = (0..na)
                .into_par_iter()
                .map(|j| {
                    let th = grid.angle(j);
                    let mut out = vec![[Complex64::new(0.0, 0.0); 3]; nr];
                    // walk outward and inward from the basepoint radius
                    let split = (0..nr).find(|&i| grid.row_radius(i) >= rho0).unwrap_or(nr);
                    let mut v = around[j];
                    let mut prev = at(rho0, th);
                    for i in split..nr {
                        let z = grid.z(grid.index(i, j));
                        v = add3(v, quadrature::segment(&f, prev, z));
                        out[i] = v;
                        prev = z;
                    }
                    let mut v = around[j];
                    let mut prev = at(rho0, th);
                    for i in (0..split).rev() {
                        let z = grid.z(grid.index(i, j));
                        v = add3(v, quadrature::segment(&f, prev, z));
                        out[i] = v;
                        prev = z;
                    }
                    out
                })
                .collect();
            for (j, ray) in rays.into_iter().enumerate() {
                for (i, v) in ray.into_iter().enumerate() {
                    acc[grid.index(i, j)] = v;
                }
            }
        }
    }

    let values: Vec<[f64; 3]> = acc.iter().map(|v| [v[0].re, v[1].re, v[2].re]).collect();
    let h_error = match prescribed_h {
        Some(h) => {
            if h.len() != values.len() {
                return Err(Error::Precondition(format!(
                    "prescribed h has {} samples for {} nodes",
                    h.len(),
                    values.len()
                )));
            }
            Some(values.iter().zip(h).map(|(x, h)| (x[2] - h).abs()).fold(0.0, f64::max))
        }
        None => None,
    };
    Ok(ImmersionField {
        grid: grid.clone(),
        basepoint,
        values,
        h_error,
    })
}

/// Conformal factor samples: `ds² = λ² |dz|²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricField {
    pub lambda2: Vec<f64>,
}

impl MetricField {
    pub fn lambda(&self) -> Vec<f64> {
        self.lambda2.iter().map(|v| v.sqrt()).collect()
    }

    pub fn min(&self) -> f64 {
        self.lambda2.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn induced_metric(triple: &WeierstrassTriple, grid: &Grid) -> Result<MetricField> {
    let lambda2: Vec<f64> = grid.nodes().par_iter().map(|n| triple.lambda2_at(n.z)).collect();
    if let Some((node, _)) = lambda2.iter().enumerate().find(|(_, v)| !(**v >= BRANCH_TOL) || !v.is_finite()) {
        if lambda2[node].is_finite() {
            return Err(Error::BranchPoint { node, z: grid.z(node) });
        }
        return Err(Error::Representation(format!("metric is not finite at node {node} (z = {})", grid.z(node))));
    }
    Ok(MetricField { lambda2 })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussReport {
    pub values: Vec<Complex64>,
    pub has_zeros: bool,
    pub has_poles: bool,
}

impl GaussReport {
    pub fn omits_zero_and_infinity(&self) -> bool {
        !self.has_zeros && !self.has_poles
    }

    pub fn summary(&self) -> &'static str {
        match (self.has_zeros, self.has_poles) {
            (false, false) => "omits 0 and infinity",
            (true, false) => "has zeros",
            (false, true) => "has poles",
            (true, true) => "has zeros and poles",
        }
    }
}

fn winding_of<F: Fn(Complex64) -> Complex64>(f: F, center: Complex64, radius: f64) -> i32 {
    let n = 2048;
    let pts: Vec<Complex64> = (0..=n)
        .map(|k| f(center + Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64)))
        .collect();
    let total: f64 = pts.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}

/// `g = φ3/(φ1 − iφ2)` on the grid plus zero/pole detection on the grid region.
pub fn gauss_map(triple: &WeierstrassTriple, grid: &Grid) -> Result<GaussReport> {
    let i = Complex64::i();
    let values: Vec<Complex64> = grid
        .nodes()
        .par_iter()
        .map(|n| {
            let p = triple.eval(n.z);
            p[2] / (p[0] - i * p[1])
        })
        .collect();
    let region = grid.parent();
    if let Some(pair) = &triple.gauss {
        let (zeros, poles) = pair.zeros_and_poles(region)?;
        return Ok(GaussReport {
            values,
            has_zeros: !zeros.is_empty(),
            has_poles: !poles.is_empty(),
        });
    }
    let g = |z: Complex64| {
        let p = triple.eval(z);
        p[2] / (p[0] - i * p[1])
    };
    let circles = region.boundary_circles();
    let mut count = winding_of(g, circles[0].0, circles[0].1);
    if let Some(&(c, r)) = circles.get(1) {
        count -= winding_of(g, c, r);
    }
    let near_zero = values.iter().any(|v| v.norm() < 1e-9);
    let near_pole = values.iter().any(|v| !v.is_finite() || v.norm() > 1e9);
    Ok(GaussReport {
        values,
        has_zeros: near_zero || count > 0,
        has_poles: near_pole || count < 0,
    })
}

/// Imaginary parts of the periods of `φ_j` over a cycle.
pub fn flux(triple: &WeierstrassTriple, cycle: &Cycle) -> [f64; 3] {
    let p = triple.periods(cycle);
    [p[0].im, p[1].im, p[2].im]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwapMode {
    /// `Y = (X3, X2*, X1*)`
    First,
    /// `Z = (X1*, X3, X2)`
    Second,
}

#[derive(Clone, Debug)]
pub struct SwapResult {
    pub psi: WeierstrassTriple,
    pub field: ImmersionField,
}

/// Lorentzian data from a minimal immersion by swapping in conjugate
/// harmonics. `X_j* = Im ∫ φ_j`, so `dX_j* = Re(−i φ_j)`.
pub fn maximal_swap(triple: &WeierstrassTriple, field: &ImmersionField, mode: SwapMode) -> Result<SwapResult> {
    let minus_i = Complex64::new(0.0, -1.0);
    let [p1, p2, p3] = &triple.phi;
    let phi = match mode {
        SwapMode::First => [p3.clone(), p2.scale(minus_i), p1.scale(minus_i)],
        SwapMode::Second => [p1.scale(minus_i), p3.clone(), p2.clone()],
    };
    let psi = WeierstrassTriple {
        carrier: triple.carrier,
        phi,
        gauss: None,
    };
    let field = integrate_immersion(&psi, field.basepoint, &field.grid, None)?;
    Ok(SwapResult { psi, field })
}

/// Sup of `|−ψ1² + ψ2² + ψ3²| / Σ|ψ_j|²`.
pub fn lorentz_residual(psi: &WeierstrassTriple, grid: &Grid) -> f64 {
    grid.nodes()
        .par_iter()
        .map(|n| {
            let p = psi.eval(n.z);
            let s = -p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            s.norm() / p.iter().map(|v| v.norm_sqr()).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_annulus, sample_grid};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn catenoid() -> WeierstrassTriple {
        let pair = GaussPair::rational(Laurent::monomial(1, c(1.0, 0.0)), one(), HoloForm::dz_over_z());
        from_gauss_pair(&pair, Region::annulus(0.5, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn catenoid_is_isotropic() {
        let t = catenoid();
        let grid = sample_grid(&t.carrier, 16, 64).unwrap();
        assert!(isotropy_residual(&t, &grid) < 1e-12);
        let z = c(0.8, 0.6);
        let p = t.eval(z);
        assert!((p[0] - (z.powi(-2) - c(1.0, 0.0)) * 0.5).norm() < 1e-14);
    }

    #[test]
    fn enneper_on_disk() {
        let pair = GaussPair::rational(Laurent::monomial(1, c(1.0, 0.0)), one(), HoloForm::from_laurent(Laurent::monomial(1, c(1.0, 0.0))));
        let t = from_gauss_pair(&pair, Region::disk(1.0).unwrap()).unwrap();
        let z = c(0.3, 0.4);
        assert!((t.eval(z)[0] - (c(1.0, 0.0) - z * z) * 0.5).norm() < 1e-15);
        assert!(t.eval(c(0.0, 0.0))[0].is_finite());
    }

    #[test]
    fn mismatched_zero_rejected() {
        // g = z with phi3 = dz on the unit disk: 1/g has an uncancelled pole
        let pair = GaussPair::rational(Laurent::monomial(1, c(1.0, 0.0)), one(), HoloForm::dz());
        assert!(matches!(from_gauss_pair(&pair, Region::disk(1.0).unwrap()), Err(Error::Representation(_))));
        // g = z - 0.5 with phi3 = dz: pole of 1/g at 0.5
        let pair = GaussPair::rational(Laurent::from_terms(&[(1, c(1.0, 0.0)), (0, c(-0.5, 0.0))]), one(), HoloForm::dz());
        assert!(matches!(from_gauss_pair(&pair, Region::disk(1.0).unwrap()), Err(Error::Representation(_))));
    }

    #[test]
    fn catenoid_flux_and_height() {
        let t = catenoid();
        let a = make_annulus(0.5, 2.0).unwrap();
        let f = flux(&t, &generator_cycle(&a));
        assert!(f[0].abs() < 1e-8 && f[1].abs() < 1e-8 && (f[2] - 2.0 * PI).abs() < 1e-8);
        let grid = sample_grid(&t.carrier, 64, 256).unwrap();
        let h: Vec<f64> = grid.nodes().iter().map(|n| n.z.norm().ln()).collect();
        let x = integrate_immersion(&t, c(1.0, 0.0), &grid, Some(&h)).unwrap();
        assert!(x.h_error.unwrap() < 1e-8);
    }

    #[test]
    fn real_period_is_reported() {
        let carrier = Region::annulus(0.5, 2.0).unwrap();
        let p = 0.3 / (2.0 * PI);
        let t = WeierstrassTriple::from_laurent(
            carrier,
            [Laurent::monomial(-1, c(0.0, -p)), Laurent::zero(), Laurent::zero()],
        );
        let grid = sample_grid(&carrier, 4, 16).unwrap();
        match integrate_immersion(&t, c(1.0, 0.0), &grid, None) {
            Err(Error::WellDefinedness { component, period }) => {
                assert_eq!(component, 1);
                assert!((period - 0.3).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let t = catenoid();
        let back = WeierstrassTriple::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(t.to_json().unwrap().contains("dX=Re(phi)"));
    }
}
