//! Runge-type blending: global Laurent Weierstrass data fitted to piecewise
//! targets on a region, labyrinth bands and arcs.
//!
//! The unknowns live in Gauss-pair variables, `g = (P/Q)·e^u` with `u` a
//! Laurent polynomial and `φ3` either fixed or of the form `e^w·ψ`, so
//! isotropy holds exactly whatever the fit quality. Exactness and flux along
//! concentric cycles are restored afterwards by Newton on `u_{±1}` (and
//! `w_{±1}`).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{sample_grid, Grid, Region};
use crate::error::{Error, Result};
use crate::form::{ExpTerm, HoloForm};
use crate::labyrinth::LabyrinthSpec;
use crate::laurent::Laurent;
use crate::quadrature;
use crate::weierstrass::{from_gauss_pair, isotropy_residual, GaussPair, WeierstrassTriple, PERIOD_NODES};

/// Largest Laurent degree the solver accepts.
pub const MAX_DEGREE: usize = 256;
/// Degrees tried by [`blend_adaptive`].
pub const DEGREE_LADDER: [usize; 4] = [8, 16, 32, 64];
/// Rows per least-squares block.
const CHUNK_ROWS: usize = 2048;
const ISOTROPY_TOL: f64 = 1e-8;

type C3 = [Complex64; 3];

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplePart {
    Region,
    Labyrinth,
    Arc,
}

/// One collocation sample. `u` and `w` are the target values of the fitted
/// exponents on a branch chosen by the caller; `phi` is the target `φ/dz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendSample {
    pub z: Complex64,
    pub part: SamplePart,
    pub weight: f64,
    pub u: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Complex64>,
    pub phi: C3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phi3Mode {
    /// `φ3` is copied to the output unchanged.
    Fixed(HoloForm),
    /// `φ3 = e^w·ψ` with `ψ dz` nonvanishing on the carrier and `w` fitted.
    Nonvanishing { psi: Laurent },
}

/// Prescribed imaginary periods over the circle `|z| = radius`; real periods
/// are required to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxConstraint {
    pub radius: f64,
    pub flux: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendTarget {
    /// Region the output is holomorphic on; centered at the origin.
    pub carrier: Region,
    pub gauss_numer: Laurent,
    pub gauss_denom: Laurent,
    pub phi3: Phi3Mode,
    pub samples: Vec<BlendSample>,
    #[serde(default)]
    pub constraints: Vec<FluxConstraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendSettings {
    pub degree: usize,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
    /// Resolution of the carrier grid used for isotropy and `min|φ3|`.
    pub report_grid: (usize, usize),
}

impl Default for BlendSettings {
    fn default() -> Self {
        Self {
            degree: 32,
            newton_max_iter: 50,
            newton_tol: 1e-10,
            report_grid: (64, 256),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartResidual {
    pub samples: usize,
    /// `sup |φ − φ_target|` (Euclidean in ℂ³).
    pub sup_phi: f64,
    /// `sup |u − u_target|`, and the same for `w` when fitted.
    pub sup_log: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub region: Option<PartResidual>,
    pub labyrinth: Option<PartResidual>,
    pub arc: Option<PartResidual>,
    /// `(Σ weight·|Δ|² / Σ weight)^{1/2}` over the exponent targets: the
    /// least-squares objective, non-increasing in the degree.
    pub weighted_rms: f64,
    /// `|Im∮φ − p|` componentwise per constraint.
    pub flux_err: Vec<[f64; 3]>,
    /// `|Re∮φ|` componentwise per constraint.
    pub period_err: Vec<[f64; 3]>,
    pub isotropy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_phi3: Option<f64>,
}

impl ResidualReport {
    /// Sup deviation on the region samples, the quantity held to `ε`.
    pub fn region_sup(&self) -> f64 {
        self.region.map_or(0.0, |r| r.sup_phi)
    }

    pub fn max_flux_err(&self) -> f64 {
        self.flux_err.iter().flatten().chain(self.period_err.iter().flatten()).copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlendResult {
    pub triple: WeierstrassTriple,
    pub degree: usize,
    pub report: ResidualReport,
    pub newton_iterations: usize,
}

/// Scaled monomials `(z/R)^k` and `(r/z)^k`, which keep the collocation
/// matrix well conditioned on the carrier.
#[derive(Clone, Copy, Debug)]
struct Basis {
    degree: usize,
    outer: f64,
    inner: Option<f64>,
}

impl Basis {
    fn new(carrier: &Region, degree: usize) -> Self {
        Self {
            degree,
            outer: carrier.outer_radius(),
            inner: (!carrier.is_disk()).then(|| carrier.inner_radius()),
        }
    }

    fn len(&self) -> usize {
        if self.inner.is_some() {
            2 * self.degree + 1
        } else {
            self.degree + 1
        }
    }

    fn fill_row(&self, z: Complex64, row: &mut [Complex64]) {
        let mut p = Complex64::new(1.0, 0.0);
        let q = z / self.outer;
        for v in row.iter_mut().take(self.degree + 1) {
            *v = p;
            p *= q;
        }
        if let Some(r) = self.inner {
            let q = r / z;
            let mut p = q;
            for v in row[self.degree + 1..].iter_mut() {
                *v = p;
                p *= q;
            }
        }
    }

    fn laurent_of(&self, a: &[Complex64]) -> Laurent {
        let d = self.degree as i32;
        let mut terms: Vec<(i32, Complex64)> = (0..=d).map(|k| (k, a[k as usize] / self.outer.powi(k))).collect();
        if let Some(r) = self.inner {
            terms.extend((1..=d).map(|k| (-k, a[(d + k) as usize] * r.powi(k))));
        }
        Laurent::from_terms(&terms)
    }
}

/// Upper-triangular factor of `[A | b]` for one block of weighted rows.
fn block_factor(basis: &Basis, rows: &[(Complex64, f64, Complex64)]) -> DMatrix<Complex64> {
    let n = basis.len();
    let mut m = DMatrix::<Complex64>::zeros(rows.len(), n + 1);
    let mut buf = vec![c0(); n];
    for (i, &(z, w, t)) in rows.iter().enumerate() {
        basis.fill_row(z, &mut buf);
        let s = w.sqrt();
        for (k, v) in buf.iter().enumerate() {
            m[(i, k)] = v * s;
        }
        m[(i, n)] = t * s;
    }
    m.qr().r()
}

fn stack(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(a.nrows() + b.nrows(), a.ncols());
    m.rows_mut(0, a.nrows()).copy_from(a);
    m.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    m.qr().r()
}

/// Weighted least squares `min Σ w|Σ a_k φ_k(z) − t|²` by blockwise QR
/// (blocks factored in parallel, merged in a fixed order so results are
/// reproducible) and a minimum-norm SVD solve. Returns coefficients and the
/// weighted residual sum of squares.
fn weighted_lsq(basis: &Basis, rows: &[(Complex64, f64, Complex64)]) -> Result<(Vec<Complex64>, f64)> {
    let n = basis.len();
    let mut blocks: Vec<DMatrix<Complex64>> = rows.par_chunks(CHUNK_ROWS).map(|c| block_factor(basis, c)).collect();
    while blocks.len() > 1 {
        blocks = blocks
            .chunks(2)
            .map(|p| if p.len() == 2 { stack(&p[0], &p[1]) } else { p[0].clone() })
            .collect();
    }
    let Some(raug) = blocks.pop() else {
        return Err(Error::Precondition("blend target has no samples".into()));
    };
    let mut r = DMatrix::<Complex64>::zeros(n, n);
    let mut c = DVector::<Complex64>::zeros(n);
    let filled = raug.nrows().min(n);
    r.rows_mut(0, filled).copy_from(&raug.view((0, 0), (filled, n)));
    for i in 0..filled {
        c[i] = raug[(i, n)];
    }
    let tail = if raug.nrows() > n { raug[(n, n)].norm_sqr() } else { 0.0 };
    let svd = r.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-15).max(f64::MIN_POSITIVE);
    let x = svd
        .solve(&c, eps)
        .map_err(|e| Error::Precondition(format!("least-squares solve failed: {e}")))?;
    let res = (&r * &x - &c).norm_squared() + tail;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("least-squares solution is not finite".into()));
    }
    Ok((x.iter().copied().collect(), res))
}

fn phi3_form(target: &BlendTarget, w: Option<&Laurent>) -> HoloForm {
    match (&target.phi3, w) {
        (Phi3Mode::Fixed(f), _) => f.clone(),
        (Phi3Mode::Nonvanishing { psi }, Some(w)) => HoloForm {
            terms: vec![ExpTerm::exponential(w.clone(), psi.clone())],
        },
        (Phi3Mode::Nonvanishing { psi }, None) => HoloForm::from_laurent(psi.clone()),
    }
}

fn pair_of(target: &BlendTarget, u: &Laurent, w: Option<&Laurent>) -> GaussPair {
    GaussPair {
        numer: target.gauss_numer.clone(),
        denom: target.gauss_denom.clone(),
        exponent: u.clone(),
        phi3: phi3_form(target, w),
    }
}

fn check_target(target: &BlendTarget, degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::Precondition(format!("degree {degree} exceeds the cap {MAX_DEGREE}")));
    }
    if target.carrier.center().norm() > 0.0 {
        return Err(Error::Precondition("blend carriers must be centered at the origin".into()));
    }
    if target.samples.is_empty() {
        return Err(Error::Precondition("blend target has no samples".into()));
    }
    let nonvanishing = matches!(target.phi3, Phi3Mode::Nonvanishing { .. });
    for (k, s) in target.samples.iter().enumerate() {
        if !(s.weight > 0.0 && s.weight.is_finite()) || !s.u.is_finite() {
            return Err(Error::Precondition(format!("sample {k} has an invalid weight or exponent target")));
        }
        if nonvanishing && !s.w.is_some_and(|w| w.is_finite()) {
            return Err(Error::Precondition(format!("sample {k} lacks a phi3 exponent target")));
        }
        let norm: f64 = s.phi.iter().map(|v| v.norm_sqr()).sum();
        let iso = (s.phi[0] * s.phi[0] + s.phi[1] * s.phi[1] + s.phi[2] * s.phi[2]).norm();
        if !(norm > 0.0) || iso > ISOTROPY_TOL * norm {
            return Err(Error::Precondition(format!(
                "sample {k} at {} is not isotropic nonvanishing data",
                s.z
            )));
        }
    }
    if let Phi3Mode::Nonvanishing { psi } = &target.phi3 {
        let origin_inside = target.carrier.contains(c0(), 1e-12);
        if psi.is_zero()
            || (origin_inside && psi.min_power() != 0)
            || psi.roots()?.into_iter().any(|p| target.carrier.contains(p, 1e-9))
        {
            return Err(Error::Precondition("psi must be nonvanishing and holomorphic on the carrier".into()));
        }
    }
    for c in &target.constraints {
        if target.carrier.is_disk() || !target.carrier.contains(Complex64::new(c.radius, 0.0), 0.0) {
            return Err(Error::Precondition(format!(
                "constraint circle of radius {} does not lie in an annular carrier",
                c.radius
            )));
        }
    }
    Ok(())
}

/// Which exponent a Newton unknown belongs to and its power of `z`.
#[derive(Clone, Copy, Debug)]
enum Var {
    U(i32),
    W(i32),
}

/// Constraint residuals and their derivatives in the Newton unknowns, by the
/// trapezoid rule on each circle. Per circle the equations are
/// `∮φ3/g = i p1 + p2`, `∮gφ3 = p2 − i p1` and, when `w` is free, `∮φ3 = i p3`.
fn constraint_system(target: &BlendTarget, pair: &GaussPair, vars: &[Var]) -> (Vec<Complex64>, DMatrix<Complex64>) {
    let free = matches!(target.phi3, Phi3Mode::Nonvanishing { .. });
    let per = if free { 3 } else { 2 };
    let m = per * target.constraints.len();
    let mut e = vec![c0(); m];
    let mut jac = DMatrix::<Complex64>::zeros(m, vars.len());
    let h = 2.0 * PI / PERIOD_NODES as f64;
    for (ci, c) in target.constraints.iter().enumerate() {
        let row = per * ci;
        for k in 0..PERIOD_NODES {
            let z = Complex64::from_polar(c.radius, h * k as f64);
            let dz = Complex64::i() * z * h;
            let p3 = pair.phi3.eval(z) * dz;
            let g = pair.g(z);
            let a = p3 / g;
            let b = p3 * g;
            e[row] += a;
            e[row + 1] += b;
            if free {
                e[row + 2] += p3;
            }
            for (vi, v) in vars.iter().enumerate() {
                match *v {
                    Var::U(p) => {
                        let zp = z.powi(p);
                        jac[(row, vi)] -= zp * a;
                        jac[(row + 1, vi)] += zp * b;
                    }
                    Var::W(p) => {
                        let zp = z.powi(p);
                        jac[(row, vi)] += zp * a;
                        jac[(row + 1, vi)] += zp * b;
                        jac[(row + 2, vi)] += zp * p3;
                    }
                }
            }
        }
        let [p1, p2, p3] = c.flux;
        e[row] -= Complex64::new(p2, p1);
        e[row + 1] -= Complex64::new(p2, -p1);
        if free {
            e[row + 2] -= Complex64::new(0.0, p3);
        }
    }
    (e, jac)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn apply(u: &Laurent, w: Option<&Laurent>, vars: &[Var], step: &[Complex64], t: f64) -> (Laurent, Option<Laurent>) {
    let mut du = Vec::new();
    let mut dw = Vec::new();
    for (v, s) in vars.iter().zip(step) {
        match *v {
            Var::U(p) => du.push((p, *s * t)),
            Var::W(p) => dw.push((p, *s * t)),
        }
    }
    let u = u.add(&Laurent::from_terms(&du));
    let w = w.map(|w| w.add(&Laurent::from_terms(&dw)));
    (u, w)
}

/// Damped Newton on the lowest coefficients; minimum-norm steps.
fn correct_periods(
    target: &BlendTarget,
    mut u: Laurent,
    mut w: Option<Laurent>,
    settings: &BlendSettings,
) -> Result<(Laurent, Option<Laurent>, usize)> {
    if target.constraints.is_empty() {
        return Ok((u, w, 0));
    }
    let mut vars = vec![Var::U(-1), Var::U(1)];
    if w.is_some() {
        vars.extend([Var::W(-1), Var::W(1)]);
    }
    let (mut e, mut jac) = constraint_system(target, &pair_of(target, &u, w.as_ref()), &vars);
    let mut res = norm(&e);
    for it in 0..settings.newton_max_iter {
        if res <= settings.newton_tol {
            return Ok((u, w, it));
        }
        let rhs = DVector::from_iterator(e.len(), e.iter().map(|v| -v));
        let svd = jac.clone().svd(true, true);
        let eps = svd.singular_values.max() * 1e-13;
        let step = svd
            .solve(&rhs, eps)
            .map_err(|_| Error::PeriodSolver { iterations: it, residual: res })?;
        let step: Vec<Complex64> = step.iter().copied().collect();
        let mut t = 1.0;
        loop {
            let (nu, nw) = apply(&u, w.as_ref(), &vars, &step, t);
            let (ne, nj) = constraint_system(target, &pair_of(target, &nu, nw.as_ref()), &vars);
            let nres = norm(&ne);
            if nres.is_finite() && nres < res {
                u = nu;
                w = nw;
                e = ne;
                jac = nj;
                res = nres;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::PeriodSolver { iterations: it + 1, residual: res });
            }
        }
    }
    if res <= settings.newton_tol {
        Ok((u, w, settings.newton_max_iter))
    } else {
        Err(Error::PeriodSolver {
            iterations: settings.newton_max_iter,
            residual: res,
        })
    }
}

/// Fit the target at a fixed degree.
pub fn blend(target: &BlendTarget, settings: &BlendSettings) -> Result<BlendResult> {
    check_target(target, settings.degree)?;
    let basis = Basis::new(&target.carrier, settings.degree);
    let urows: Vec<_> = target.samples.iter().map(|s| (s.z, s.weight, s.u)).collect();
    let (ua, _) = weighted_lsq(&basis, &urows)?;
    let u = basis.laurent_of(&ua);
    let w = match target.phi3 {
        Phi3Mode::Fixed(_) => None,
        Phi3Mode::Nonvanishing { .. } => {
            let wrows: Vec<_> = target.samples.iter().map(|s| (s.z, s.weight, s.w.unwrap_or_default())).collect();
            let (wa, _) = weighted_lsq(&basis, &wrows)?;
            Some(basis.laurent_of(&wa))
        }
    };
    let (u, w, newton_iterations) = correct_periods(target, u, w, settings)?;
    let pair = pair_of(target, &u, w.as_ref());
    let triple = from_gauss_pair(&pair, target.carrier)?;
    let mut result = BlendResult {
        triple,
        degree: settings.degree,
        report: ResidualReport::default(),
        newton_iterations,
    };
    result.report = residual_report(&result, target, settings.report_grid)?;
    Ok(result)
}

/// Deviations of a blend result from its target, constraint errors and
/// isotropy on a carrier grid of the given resolution.
pub fn residual_report(result: &BlendResult, target: &BlendTarget, grid: (usize, usize)) -> Result<ResidualReport> {
    let triple = &result.triple;
    let pair = triple
        .gauss
        .as_ref()
        .ok_or_else(|| Error::Precondition("blend results carry Gauss-pair data".into()))?;
    let w = match &target.phi3 {
        Phi3Mode::Nonvanishing { .. } => pair.phi3.terms.first().map(|t| t.exponent.clone()),
        Phi3Mode::Fixed(_) => None,
    };
    let per: Vec<(SamplePart, f64, f64, f64, f64)> = target
        .samples
        .par_iter()
        .map(|s| {
            let p = triple.eval(s.z);
            let dphi = (0..3).map(|j| (p[j] - s.phi[j]).norm_sqr()).sum::<f64>().sqrt();
            let mut dlog = (pair.exponent.eval(s.z) - s.u).norm();
            let mut sq = dlog * dlog;
            if let (Some(w), Some(tw)) = (&w, s.w) {
                let dw = (w.eval(s.z) - tw).norm();
                dlog = dlog.max(dw);
                sq += dw * dw;
            }
            (s.part, dphi, dlog, s.weight * sq, s.weight)
        })
        .collect();
    let part = |which: SamplePart| {
        let mut acc: Option<PartResidual> = None;
        for &(_, dphi, dlog, _, _) in per.iter().filter(|r| r.0 == which) {
            let a = acc.get_or_insert_with(PartResidual::default);
            a.samples += 1;
            a.sup_phi = a.sup_phi.max(dphi);
            a.sup_log = a.sup_log.max(dlog);
        }
        acc
    };
    let (num, den) = per.iter().fold((0.0, 0.0), |(n, d), r| (n + r.3, d + r.4));
    let mut flux_err = Vec::new();
    let mut period_err = Vec::new();
    for c in &target.constraints {
        let f = |z: Complex64| triple.eval(z);
        let p: C3 = quadrature::circle(&f, c0(), c.radius, PERIOD_NODES);
        flux_err.push([0, 1, 2].map(|j| (p[j].im - c.flux[j]).abs()));
        period_err.push([0, 1, 2].map(|j| p[j].re.abs()));
    }
    let g = sample_grid(&target.carrier, grid.0, grid.1)?;
    let min_phi3 = match target.phi3 {
        Phi3Mode::Nonvanishing { .. } => Some(min_abs_phi3(triple, &g)),
        Phi3Mode::Fixed(_) => None,
    };
    Ok(ResidualReport {
        region: part(SamplePart::Region),
        labyrinth: part(SamplePart::Labyrinth),
        arc: part(SamplePart::Arc),
        weighted_rms: (num / den).sqrt(),
        flux_err,
        period_err,
        isotropy: isotropy_residual(triple, &g),
        min_phi3,
    })
}

/// `min |φ3/dz|` over grid nodes.
pub fn min_abs_phi3(triple: &WeierstrassTriple, grid: &Grid) -> f64 {
    grid.nodes()
        .par_iter()
        .map(|n| triple.phi3().eval(n.z).norm())
        .reduce(|| f64::INFINITY, f64::min)
}

/// Blend at increasing degrees until the region deviation is at most `eps`.
/// Reports the best attempt inside the budget error otherwise.
pub fn blend_adaptive(target: &BlendTarget, degrees: &[usize], eps: f64, settings: &BlendSettings) -> Result<BlendResult> {
    let mut best: Option<BlendResult> = None;
    for &degree in degrees {
        let r = blend(target, &BlendSettings { degree, ..*settings })?;
        if r.report.region_sup() <= eps {
            return Ok(r);
        }
        if best.as_ref().is_none_or(|b| r.report.region_sup() < b.report.region_sup()) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| Error::Precondition("empty degree ladder".into()))?;
    Err(Error::ApproximationBudget {
        achieved: best.report.region_sup(),
        requested: eps,
        degree: best.degree,
        best: Box::new(best),
    })
}

/// If `form` is `e^w·ψ` for the given `ψ`, returns `w`.
pub fn exponent_over(form: &HoloForm, psi: &Laurent) -> Option<Laurent> {
    match form.terms.as_slice() {
        [t] if t.denom.is_none() && t.numer.scale(t.scale) == *psi => Some(t.exponent.clone()),
        [t] if t.denom.is_none() && t.exponent.is_zero() => {
            let q = t.numer.scale(t.scale).div_exact(psi, 1e-12)?;
            (q.degree() == 0 && q.coeff(0).norm() > 0.0).then(|| Laurent::constant(q.coeff(0).ln()))
        }
        _ => None,
    }
}

/// Region samples reproducing an existing triple on a grid. The exponent
/// targets are exact when the triple already uses the target's `P/Q` (and
/// `ψ`); otherwise logarithms are continued along the grid.
pub fn samples_from_triple(
    target: &BlendTarget,
    triple: &WeierstrassTriple,
    grid: &Grid,
    part: SamplePart,
    weight: f64,
) -> Result<Vec<BlendSample>> {
    let pq = |z: Complex64| target.gauss_numer.eval(z) / target.gauss_denom.eval(z);
    let phis: Vec<C3> = grid.nodes().par_iter().map(|n| triple.eval(n.z)).collect();
    let u: Vec<Complex64> = match &triple.gauss {
        Some(p) if p.numer == target.gauss_numer && p.denom == target.gauss_denom => {
            grid.nodes().iter().map(|n| p.exponent.eval(n.z)).collect()
        }
        _ => {
            let ratio: Vec<Complex64> = grid
                .nodes()
                .iter()
                .zip(&phis)
                .map(|(n, p)| p[2] / (p[0] - Complex64::i() * p[1]) / pq(n.z))
                .collect();
            grid.unwrap_log(&ratio)
        }
    };
    let w: Option<Vec<Complex64>> = match &target.phi3 {
        Phi3Mode::Fixed(_) => None,
        Phi3Mode::Nonvanishing { psi } => Some(match exponent_over(triple.phi3(), psi) {
            Some(w) => grid.nodes().iter().map(|n| w.eval(n.z)).collect(),
            None => {
                let ratio: Vec<Complex64> = grid.nodes().iter().zip(&phis).map(|(n, p)| p[2] / psi.eval(n.z)).collect();
                grid.unwrap_log(&ratio)
            }
        }),
    };
    Ok(grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, n)| BlendSample {
            z: n.z,
            part,
            weight,
            u: u[k],
            w: w.as_ref().map(|w| w[k]),
            phi: phis[k],
        })
        .collect())
}

/// Shift `values[k].im` by multiples of `2π` so consecutive entries differ
/// by less than `π`.
pub fn unwrap_sequence(values: &mut [Complex64]) {
    for k in 1..values.len() {
        let d = ((values[k - 1].im - values[k].im) / (2.0 * PI)).round();
        values[k].im += 2.0 * PI * d;
    }
}

/// Labyrinth samples with target `g ≡ m` (and `φ3` given by `phi3`). Within
/// each band the branch of `log(m·Q/P)` is continued around the band away
/// from its slit and then shifted by a multiple of `2πi` towards `reference`.
#[allow(clippy::too_many_arguments)]
pub fn labyrinth_samples(
    target: &BlendTarget,
    spec: &LabyrinthSpec,
    radii: usize,
    angular: usize,
    m: f64,
    phi3: &HoloForm,
    reference: &Laurent,
    weight: f64,
) -> Vec<BlendSample> {
    let c = spec.parent.center;
    let pts = spec.sample_points(radii, angular);
    let mut out = Vec::with_capacity(pts.len());
    for band in &spec.bands {
        // collect rows of this band ordered by angle measured from the slit
        let mut rows: Vec<Vec<(f64, Complex64)>> = vec![Vec::new(); radii];
        for &(z, b) in &pts {
            if b != band.n {
                continue;
            }
            let w = z - c;
            let from_slit = (w * Complex64::from_polar(1.0, -band.slit_angle)).arg().rem_euclid(2.0 * PI);
            let ri = (((w.norm() - band.inner) / band.thickness() * radii as f64) as usize).min(radii - 1);
            rows[ri].push((from_slit, z));
        }
        let mut prev_first: Option<Complex64> = None;
        let mut band_samples = Vec::new();
        for row in rows.iter_mut() {
            row.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut logs: Vec<Complex64> = row
                .iter()
                .map(|&(_, z)| (Complex64::new(m, 0.0) * target.gauss_denom.eval(z) / target.gauss_numer.eval(z)).ln())
                .collect();
            unwrap_sequence(&mut logs);
            if let (Some(p), Some(first)) = (prev_first, logs.first().copied()) {
                let d = ((p.im - first.im) / (2.0 * PI)).round();
                logs.iter_mut().for_each(|v| v.im += 2.0 * PI * d);
            }
            prev_first = logs.first().copied().or(prev_first);
            band_samples.extend(row.iter().zip(logs).map(|(&(_, z), u)| (z, u)));
        }
        if band_samples.is_empty() {
            continue;
        }
        let mean_gap: f64 =
            band_samples.iter().map(|(z, u)| reference.eval(*z).im - u.im).sum::<f64>() / band_samples.len() as f64;
        let shift = 2.0 * PI * (mean_gap / (2.0 * PI)).round();
        let (half, half_i) = (Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5));
        for (z, mut u) in band_samples {
            u.im += shift;
            let f = phi3.eval(z);
            let g = Complex64::new(m, 0.0);
            let phi = [half * (g.inv() - g) * f, half_i * (g.inv() + g) * f, f];
            out.push(BlendSample {
                z,
                part: SamplePart::Labyrinth,
                weight,
                u,
                w: None,
                phi,
            });
        }
    }
    out
}

/// Generalized Weierstrass data along an arc: the values `φ(α(s))·α′(s)`
/// whose real part is `dX(α′)` and whose imaginary part is the normal field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkedArcData {
    pub arc: Vec<Complex64>,
    /// Normalized arclength parameter at each vertex.
    pub s: Vec<f64>,
    /// Unit tangent `α′` at each vertex.
    pub tangent: Vec<Complex64>,
    /// Exponent `u` of the Gauss map along the arc.
    pub u: Vec<Complex64>,
    /// `φ/dz` at each vertex.
    pub phi: Vec<C3>,
    /// `dX(α′) + iϖ̃` with `|ϖ̃| = |dX(α′)|`.
    pub combined: Vec<C3>,
    pub dx: Vec<[f64; 3]>,
    /// Unit normal field `ϖ`.
    pub normal: Vec<[f64; 3]>,
    /// Coefficients of `sin(πs)` and `sin(2πs)` in `u`.
    pub coefficients: [Complex64; 2],
    pub iterations: usize,
    /// `max_j |∮φ_j − i p_j|` over the closed cycle.
    pub flux_residual: f64,
}

fn cumulative(arc: &[Complex64]) -> Vec<f64> {
    let mut s = vec![0.0; arc.len()];
    for k in 1..arc.len() {
        s[k] = s[k - 1] + (arc[k] - arc[k - 1]).norm();
    }
    let total = s[s.len() - 1];
    s.iter_mut().for_each(|v| *v /= total);
    s
}

/// Extend a triple on `region` along an arc leaving and re-entering it. Along
/// the arc `φ3` is kept and `g = (P/Q)·e^{u(s)}` with
/// `u(s) = (1−s)u(P₁) + s·u(P₂) + a·sin(πs) + b·sin(2πs)`; the complex
/// parameters `a, b` are solved so that the cycle formed by the arc and the
/// straight closing segment back through the region has periods `i·flux`.
pub fn extend_along_arc(
    triple: &WeierstrassTriple,
    region: &Region,
    arc: &[Complex64],
    flux_target: [f64; 3],
    settings: &BlendSettings,
) -> Result<MarkedArcData> {
    let pair = triple
        .gauss
        .as_ref()
        .ok_or_else(|| Error::Precondition("arc extension needs Gauss-pair data".into()))?;
    if arc.len() < 2 {
        return Err(Error::Precondition("arc needs at least two vertices".into()));
    }
    let (p1, p2) = (arc[0], arc[arc.len() - 1]);
    let tol = crate::domain::ARC_ENDPOINT_TOL;
    if region.depth(p1).abs() > tol || region.depth(p2).abs() > tol {
        return Err(Error::Precondition("arc endpoints must lie on the region boundary".into()));
    }
    if arc[1..arc.len() - 1].iter().any(|z| region.contains(*z, -tol)) {
        return Err(Error::Precondition("arc meets the region away from its endpoints".into()));
    }
    let s = cumulative(arc);
    // dense check that ∂h does not vanish on the arc
    for w in arc.windows(2) {
        for (t, _) in quadrature::unit_rule() {
            if pair.phi3.eval(w[0] + (w[1] - w[0]) * t).norm() < 1e-12 {
                return Err(Error::Precondition("phi3 vanishes on the arc".into()));
            }
        }
    }
    let closing: C3 = quadrature::segment(&|z: Complex64| triple.eval(z), p2, p1);
    let third = Complex64::new(0.0, flux_target[2]);
    let mut check3 = closing[2] + quadrature::polyline(&|z: Complex64| pair.phi3.eval(z), arc);
    check3 -= third;
    if check3.norm() > 1e-6 {
        return Err(Error::Precondition(format!(
            "third flux component {} does not match Im of the phi3 period",
            flux_target[2]
        )));
    }
    let (ua, ub) = (pair.exponent.eval(p1), pair.exponent.eval(p2));
    let u_at = |t: f64, ab: [Complex64; 2]| {
        ua * (1.0 - t) + ub * t + ab[0] * (PI * t).sin() + ab[1] * (2.0 * PI * t).sin()
    };
    let [pp1, pp2, _] = flux_target;
    let want = [Complex64::new(pp2, pp1), Complex64::new(pp2, -pp1)];
    // residuals and Jacobian of (∫φ3/g, ∫gφ3) plus the closing contribution
    let system = |ab: [Complex64; 2]| {
        let mut e = [closing[0] - Complex64::i() * closing[1], -(closing[0] + Complex64::i() * closing[1])];
        let mut j = [[c0(); 2]; 2];
        for (k, w) in arc.windows(2).enumerate() {
            let d = w[1] - w[0];
            for (t, wt) in quadrature::unit_rule() {
                let z = w[0] + d * t;
                let sp = s[k] + (s[k + 1] - s[k]) * t;
                let f = pair.phi3.eval(z) * d * wt;
                let g = pair.rational_part(z) * u_at(sp, ab).exp();
                let (a, b) = (f / g, f * g);
                let (s1, s2) = ((PI * sp).sin(), (2.0 * PI * sp).sin());
                e[0] += a;
                e[1] += b;
                j[0][0] -= a * s1;
                j[0][1] -= a * s2;
                j[1][0] += b * s1;
                j[1][1] += b * s2;
            }
        }
        ([e[0] - want[0], e[1] - want[1]], j)
    };
    let mut ab = [c0(); 2];
    let (mut e, mut j) = system(ab);
    let mut res = norm(&e);
    let mut iterations = 0;
    while res > settings.newton_tol {
        if iterations == settings.newton_max_iter {
            return Err(Error::FluxMatching { iterations, residual: res });
        }
        iterations += 1;
        let jm = DMatrix::from_row_slice(2, 2, &[j[0][0], j[0][1], j[1][0], j[1][1]]);
        let svd = jm.svd(true, true);
        let eps = svd.singular_values.max() * 1e-13;
        let step = svd
            .solve(&DVector::from_vec(vec![-e[0], -e[1]]), eps)
            .map_err(|_| Error::FluxMatching { iterations, residual: res })?;
        let mut t = 1.0;
        loop {
            let cand = [ab[0] + step[0] * t, ab[1] + step[1] * t];
            let (ne, nj) = system(cand);
            let nres = norm(&ne);
            if nres.is_finite() && nres < res {
                ab = cand;
                e = ne;
                j = nj;
                res = nres;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::FluxMatching { iterations, residual: res });
            }
        }
    }
    let n = arc.len();
    let mut out = MarkedArcData {
        arc: arc.to_vec(),
        s: s.clone(),
        tangent: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        combined: Vec::with_capacity(n),
        dx: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
        coefficients: ab,
        iterations,
        flux_residual: e.iter().map(|v| v.norm()).fold(0.0, f64::max),
    };
    let (half, half_i) = (Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5));
    for k in 0..n {
        let d = if k + 1 < n { arc[k + 1] - arc[k] } else { arc[k] - arc[k - 1] };
        let tangent = d / d.norm();
        let z = arc[k];
        let u = u_at(s[k], ab);
        let g = pair.rational_part(z) * u.exp();
        let f = pair.phi3.eval(z);
        let phi = [half * (g.inv() - g) * f, half_i * (g.inv() + g) * f, f];
        let v = phi.map(|p| p * tangent);
        let dx = v.map(|c| c.re);
        let im = v.map(|c| c.im);
        let len = im.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.tangent.push(tangent);
        out.u.push(u);
        out.phi.push(phi);
        out.combined.push(v);
        out.dx.push(dx);
        out.normal.push(im.map(|x| x / len));
    }
    Ok(out)
}

/// Arc samples for a blend target from marked data.
pub fn arc_samples(data: &MarkedArcData, weight: f64) -> Vec<BlendSample> {
    data.arc
        .iter()
        .zip(&data.u)
        .zip(&data.phi)
        .map(|((&z, &u), &phi)| BlendSample {
            z,
            part: SamplePart::Arc,
            weight,
            u,
            w: None,
            phi,
        })
        .collect()
}
