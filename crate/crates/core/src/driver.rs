//! Stage pipelines: one completeness stage, the `1/n²` exhaustion schedule
//! with a prescribed harmonic third coordinate, and the nonvanishing-`φ3`
//! recursion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blend::{
    arc_samples, blend, extend_along_arc, labyrinth_samples, min_abs_phi3, samples_from_triple, BlendResult,
    BlendSettings, BlendTarget, FluxConstraint, MarkedArcData, Phi3Mode, SamplePart, DEGREE_LADDER,
};
use crate::domain::{circular_arc, generator_cycle, sample_grid, AnnulusChart, ExhaustionTower, Grid, Region};
use crate::error::{Error, Result};
use crate::form::HoloForm;
use crate::labyrinth::{build_labyrinth, compute_mu, DeformParams, LabyrinthSpec};
use crate::laurent::Laurent;
use crate::metric::metric_graph;
use crate::weierstrass::{
    flux, from_gauss_pair, gauss_map, induced_metric, integrate_immersion, GaussPair, GaussReport, ImmersionField,
    WeierstrassTriple,
};

/// Hard cap on the number of stages of a run.
pub const MAX_STAGES: usize = 6;
/// Edges whose endpoint `λ` differ by more than this factor count as unresolved.
pub const LAMBDA_RATIO_LIMIT: f64 = 2.0;
const MAX_INSET: f64 = 0.45;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    /// `sup ‖Y_n − Y_{n−1}‖` on `V_{n−1}`.
    pub sup_change: f64,
    pub sup_change_target: f64,
    /// `dist(P₀, ∂V_n)` in the induced metric.
    pub distance: f64,
    pub distance_target: f64,
    /// Largest flux or real-period error over the generator cycles.
    pub flux_err: f64,
    /// `sup |(Y_n)₃ − h|` on `V_n`.
    pub h_err: f64,
    /// `min |φ3/dz|` on `V_n`.
    pub min_phi3: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub mu: f64,
    pub degree: usize,
    /// Largest `λ` ratio across a grid edge of the distance computation.
    pub lambda_ratio: f64,
    pub resolved: bool,
    pub phi3_unchanged: bool,
}

impl StageReport {
    pub fn sup_change_pass(&self) -> bool {
        self.sup_change < self.sup_change_target
    }

    pub fn distance_pass(&self) -> bool {
        self.resolved && self.distance > self.distance_target
    }

    pub fn passed(&self) -> bool {
        self.sup_change_pass() && self.distance_pass()
    }
}

/// Closed-form primitive of a Laurent `φ3`: `h = Re F + a·log|z|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Primitive {
    antiderivative: Laurent,
    log_coeff: f64,
}

/// Harmonic third coordinate `h` through `φ3 = 2∂h`, with the initial Gauss
/// data `g = φ3/dz` written as `(P/Q)·e^u` and the prescribed flux over the
/// generator cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPrescription {
    pub label: String,
    pub phi3: HoloForm,
    pub gauss: GaussPair,
    pub flux: [f64; 3],
    primitive: Option<Primitive>,
}

impl HarmonicPrescription {
    /// `h = Re z`: `φ3 = dz`, `g ≡ 1`.
    pub fn re_z() -> Self {
        Self::custom(Laurent::constant(Complex64::new(1.0, 0.0)), [0.0; 3])
            .expect("dz is a valid prescription")
            .labelled("re-z")
    }

    /// `h = log|z|`: `φ3 = dz/z`, `g = 1/z`, flux `(0, 0, 2π)`.
    pub fn log_abs() -> Self {
        Self::custom(Laurent::monomial(-1, Complex64::new(1.0, 0.0)), [0.0, 0.0, 2.0 * PI])
            .expect("dz/z is a valid prescription")
            .labelled("log-abs")
    }

    /// `φ3 = L dz` for a Laurent `L`; the residue must be real and the third
    /// flux component must equal `Im∮φ3 = 2π·a₋₁`.
    pub fn custom(l: Laurent, flux: [f64; 3]) -> Result<Self> {
        if l.is_zero() {
            return Err(Error::Precondition("phi3 must not vanish identically".into()));
        }
        let (antiderivative, a) = l.antiderivative();
        if a.im.abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "residue {a} of phi3 is not real, so h = Re∫phi3 is multivalued"
            )));
        }
        check_flux3(2.0 * PI * a.re, flux[2])?;
        Ok(Self {
            label: "custom".into(),
            phi3: HoloForm::from_laurent(l.clone()),
            gauss: GaussPair::rational(l.clone(), Laurent::constant(Complex64::new(1.0, 0.0)), HoloForm::from_laurent(l)),
            flux,
            primitive: Some(Primitive {
                antiderivative,
                log_coeff: a.re,
            }),
        })
    }

    /// `h = Re∫φ3` for `φ3 = e^w·ψ` (the output of the nonvanishing run);
    /// `g = φ3/dz = ψ·e^w`.
    pub fn from_exponential(phi3: &HoloForm, flux: [f64; 3]) -> Result<Self> {
        let [t] = phi3.terms.as_slice() else {
            return Err(Error::Precondition("expected a single exponential term".into()));
        };
        if t.denom.is_some() {
            return Err(Error::Precondition("expected a term without denominator".into()));
        }
        let gauss = GaussPair {
            numer: t.numer.scale(t.scale),
            denom: Laurent::constant(Complex64::new(1.0, 0.0)),
            exponent: t.exponent.clone(),
            phi3: phi3.clone(),
        };
        Ok(Self {
            label: "exponential".into(),
            phi3: phi3.clone(),
            gauss,
            flux,
            primitive: None,
        })
    }

    fn labelled(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    /// `h(z)` when a closed form exists.
    pub fn h_at(&self, z: Complex64) -> Option<f64> {
        self.primitive
            .as_ref()
            .map(|p| p.antiderivative.eval(z).re + if p.log_coeff != 0.0 { p.log_coeff * z.norm().ln() } else { 0.0 })
    }

    /// `h − h(P₀)` on the grid; by numerical integration of `φ3` when no
    /// closed form exists.
    pub fn h_samples(&self, grid: &Grid, basepoint: Complex64) -> Result<Vec<f64>> {
        match self.h_at(basepoint) {
            Some(h0) => Ok(grid.nodes().par_iter().map(|n| self.h_at(n.z).unwrap_or(0.0) - h0).collect()),
            None => {
                let t = self.initial_triple(*grid.parent())?;
                Ok(integrate_immersion(&t, basepoint, grid, None)?.third())
            }
        }
    }

    /// Weierstrass data `(φ3/g, φ3)` with `g = φ3/dz` on a region.
    pub fn initial_triple(&self, carrier: Region) -> Result<WeierstrassTriple> {
        from_gauss_pair(&self.gauss, carrier)
    }

    /// Consistency with a region: the origin may only be in a disk carrier if
    /// `φ3` is holomorphic there, and the flux must vanish on disks.
    pub fn validate_on(&self, region: &Region) -> Result<()> {
        if region.is_disk() && self.flux.iter().any(|v| *v != 0.0) {
            return Err(Error::Precondition("a disk has no cycles; the flux must be zero".into()));
        }
        self.initial_triple(*region).map(|_| ())
    }

    /// Max of the 5-point polar Laplacian of `h` over interior grid nodes.
    /// For harmonic `h` this is pure truncation error, `O(step²)`.
    pub fn laplacian_residual(&self, grid: &Grid) -> Option<f64> {
        self.primitive.as_ref()?;
        let (dr, dt) = (grid.radial_step(), grid.angular_step());
        let c = grid.parent().center();
        let first = if grid.parent().is_disk() { 2 } else { 1 };
        let mut worst: f64 = 0.0;
        for i in first..grid.radial_count() - 1 {
            let rho = grid.row_radius(i);
            for j in 0..grid.angular_count() {
                let at = |r: f64, t: f64| self.h_at(c + Complex64::from_polar(r, t)).unwrap_or(0.0);
                let th = grid.angle(j);
                let h0 = at(rho, th);
                let hrr = (at(rho + dr, th) - 2.0 * h0 + at(rho - dr, th)) / (dr * dr);
                let hr = (at(rho + dr, th) - at(rho - dr, th)) / (2.0 * dr);
                let htt = (at(rho, th + dt) - 2.0 * h0 + at(rho, th - dt)) / (dt * dt);
                worst = worst.max((hrr + hr / rho + htt / (rho * rho)).abs());
            }
        }
        Some(worst)
    }
}

/// Rejects a third flux component that disagrees with `Im∮φ3`.
pub fn check_flux3(expected: f64, given: f64) -> Result<()> {
    if (expected - given).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "third flux component must equal Im of the phi3 period, {expected}, got {given}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSettings {
    pub degree: usize,
    /// Weight of region samples relative to labyrinth samples.
    pub region_weight: f64,
    /// Times the region weight may grow tenfold when the change is too big.
    pub escalations: usize,
    /// Times `N` may double when the distance target is unmet.
    pub n_doublings: usize,
    /// Cap on collocation rows per blend.
    pub max_rows: usize,
    /// Collar inset as a fraction of the gap between `U` and `V`.
    pub inset: f64,
    pub band_radii: usize,
    pub band_angular: usize,
    pub u_grid: (usize, usize),
    pub v_grid: (usize, usize),
    pub max_refinements: usize,
    pub newton_max_iter: usize,
}

impl Default for StageSettings {
    fn default() -> Self {
        Self {
            degree: 64,
            region_weight: 10.0,
            escalations: 3,
            n_doublings: 4,
            max_rows: 400_000,
            inset: 0.1,
            band_radii: 2,
            band_angular: 128,
            u_grid: (32, 128),
            v_grid: (128, 512),
            max_refinements: 2,
            newton_max_iter: 50,
        }
    }
}

impl StageSettings {
    fn blend(&self, degree: usize) -> BlendSettings {
        BlendSettings {
            degree,
            newton_max_iter: self.newton_max_iter,
            ..BlendSettings::default()
        }
    }
}

/// Immersion data at the end of a stage.
#[derive(Clone, Debug)]
pub struct StageState {
    pub region: Region,
    pub triple: WeierstrassTriple,
    pub basepoint: Complex64,
}

#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub state: StageState,
    pub field: ImmersionField,
    pub report: StageReport,
    pub blend: Option<BlendResult>,
}

/// Default base point: the center of a disk, `√(rR)` on the positive axis for
/// an annulus.
pub fn default_basepoint(region: &Region) -> Complex64 {
    match region {
        Region::Disk(d) => d.center,
        Region::Annulus(a) => a.center + (a.inner_radius * a.outer_radius).sqrt(),
    }
}

/// Distance from the grid node nearest `p0` to the boundary of the grid
/// region, refining while the metric varies too fast across edges.
pub fn distance_to_boundary(
    triple: &WeierstrassTriple,
    region: &Region,
    p0: Complex64,
    grid: (usize, usize),
    refinements: usize,
) -> Result<(f64, f64, bool, Grid)> {
    let (mut nr, mut na) = grid;
    let mut level = 0;
    loop {
        let g = sample_grid(region, nr, na)?;
        let graph = metric_graph(&g, &induced_metric(triple, &g)?)?;
        let d = graph.set_distance(&[g.nearest_node(p0)], &g.boundary())?;
        let ratio = graph.max_lambda_ratio();
        let resolved = ratio <= LAMBDA_RATIO_LIMIT;
        if resolved || level == refinements || sample_grid(region, 2 * nr, 2 * na).is_err() {
            return Ok((d, ratio, resolved, g));
        }
        level += 1;
        nr *= 2;
        na *= 2;
    }
}

fn flux_error(triple: &WeierstrassTriple, region: &Region, p: [f64; 3]) -> f64 {
    match region {
        Region::Disk(_) => 0.0,
        Region::Annulus(a) => {
            let per = triple.periods(&generator_cycle(a));
            (0..3).map(|j| per[j].re.abs().max((per[j].im - p[j]).abs())).fold(0.0, f64::max)
        }
    }
}

/// Collars of `V° − U`: one for a disk pair, two (inner and outer) for an
/// annulus pair, each inset by `inset` of the gap on both sides.
fn collars(u: &Region, v: &Region, inset: f64) -> Result<Vec<AnnulusChart>> {
    let make = |a: f64, b: f64| {
        let d = inset * (b - a);
        AnnulusChart::new(a + d, b - d, v.center())
    };
    match (u, v) {
        (Region::Disk(_), Region::Disk(_)) => Ok(vec![make(u.outer_radius(), v.outer_radius())?]),
        (Region::Annulus(_), Region::Annulus(_)) => Ok(vec![
            make(u.outer_radius(), v.outer_radius())?,
            make(v.inner_radius(), u.inner_radius())?,
        ]),
        _ => Err(Error::Precondition("V − U must be annular".into())),
    }
}

/// Collars and `μ`, widening the inset in steps of 0.1 while `φ3` has a
/// zero on or near a collar.
fn collars_avoiding_zeros(u: &Region, v: &Region, phi3: &HoloForm, inset: f64) -> Result<(Vec<AnnulusChart>, f64)> {
    let mut inset = inset;
    loop {
        let cs = collars(u, v, inset)?;
        let mut mu = Ok(f64::INFINITY);
        for c in &cs {
            let grid = sample_grid(&Region::Annulus(*c), 16, 256)?;
            mu = match (mu, compute_mu(phi3, c, &grid)) {
                (Ok(a), Ok(b)) => Ok(a.min(b)),
                (Err(e), _) | (_, Err(e)) => Err(e),
            };
        }
        match mu {
            Ok(mu) => return Ok((cs, mu)),
            Err(Error::Precondition(_)) if inset + 0.1 < MAX_INSET => inset += 0.1,
            Err(e) => return Err(e),
        }
    }
}

fn smallest_fitting_n(cs: &[AnnulusChart]) -> usize {
    let width = cs.iter().map(AnnulusChart::width).fold(f64::INFINITY, f64::min);
    ((2.0 / width).floor() as usize + 1).max(2)
}

fn stage_report_base(stage: usize, eps: f64) -> StageReport {
    StageReport {
        stage,
        sup_change_target: eps,
        distance_target: 1.0 / eps,
        ..StageReport::default()
    }
}

/// Measurements shared by every stage kind.
#[allow(clippy::too_many_arguments)]
fn measure(
    report: &mut StageReport,
    triple: &WeierstrassTriple,
    region: &Region,
    p0: Complex64,
    prescription: &HarmonicPrescription,
    settings: &StageSettings,
) -> Result<ImmersionField> {
    let (d, ratio, resolved, grid) = distance_to_boundary(triple, region, p0, settings.v_grid, settings.max_refinements)?;
    report.distance = d;
    report.lambda_ratio = ratio;
    report.resolved = resolved;
    let h = prescription.h_samples(&grid, p0)?;
    let field = integrate_immersion(triple, p0, &grid, Some(&h))?;
    report.h_err = field.h_error.unwrap_or(0.0);
    report.flux_err = flux_error(triple, region, prescription.flux);
    report.min_phi3 = min_abs_phi3(triple, &grid);
    report.phi3_unchanged = triple.phi3() == &prescription.phi3;
    Ok(field)
}

/// One completeness stage: from `prev` on `U` to data on `V ⊃ U` whose
/// change on `U` is at most `eps` and whose intrinsic distance from `P₀` to
/// `∂V` should exceed `1/eps`. The Gauss map is pushed towards `M` on
/// labyrinths in the collars of `V − U` while `φ3` stays fixed.
pub fn completeness_stage(
    stage: usize,
    prev: &StageState,
    v: &Region,
    prescription: &HarmonicPrescription,
    eps: f64,
    settings: &StageSettings,
) -> Result<StageOutcome> {
    let u = &prev.region;
    let p0 = prev.basepoint;
    let mut report = stage_report_base(stage, eps);
    if u == v {
        let field = measure(&mut report, &prev.triple, v, p0, prescription, settings)?;
        return Ok(StageOutcome {
            state: prev.clone(),
            field,
            report,
            blend: None,
        });
    }
    if !u.concentric_with(v) || u.gap_inside(v) <= 0.0 || v.center().norm() > 0.0 {
        return Err(Error::Precondition("completeness stages need concentric U ⊂ V° centered at 0".into()));
    }
    let ugrid = sample_grid(u, settings.u_grid.0, settings.u_grid.1)?;
    let before = integrate_immersion(&prev.triple, p0, &ugrid, None)?;
    let phi3 = prescription.phi3.clone();
    let (cs, mu) = collars_avoiding_zeros(u, v, &phi3, settings.inset)?;
    report.mu = mu;
    let constraints: Vec<FluxConstraint> = match u {
        Region::Annulus(a) => vec![FluxConstraint {
            radius: (a.inner_radius * a.outer_radius).sqrt(),
            flux: prescription.flux,
        }],
        Region::Disk(_) => Vec::new(),
    };
    let reference = prev.triple.gauss.as_ref().map(|g| g.exponent.clone()).unwrap_or_default();
    let mut n = smallest_fitting_n(&cs);
    let mut last: Option<StageOutcome> = None;
    for _ in 0..=settings.n_doublings {
        let m = DeformParams::default_m(n);
        report.n = n;
        report.m = m;
        let specs: Vec<LabyrinthSpec> = cs.iter().map(|c| build_labyrinth(c, n)).collect::<Result<_>>()?;
        let mut target = BlendTarget {
            carrier: *v,
            gauss_numer: prescription.gauss.numer.clone(),
            gauss_denom: prescription.gauss.denom.clone(),
            phi3: Phi3Mode::Fixed(phi3.clone()),
            samples: Vec::new(),
            constraints: constraints.clone(),
        };
        let mut band = Vec::new();
        for spec in &specs {
            band.extend(labyrinth_samples(
                &target,
                spec,
                settings.band_radii,
                settings.band_angular,
                m,
                &phi3,
                &reference,
                1.0,
            ));
        }
        if band.len() + ugrid.len() > settings.max_rows {
            break;
        }
        let mut weight = settings.region_weight;
        let mut fitted = None;
        for _ in 0..=settings.escalations {
            target.samples = samples_from_triple(&target, &prev.triple, &ugrid, SamplePart::Region, weight)?;
            target.samples.extend_from_slice(&band);
            let r = blend(&target, &settings.blend(settings.degree))?;
            let after = integrate_immersion(&r.triple, p0, &ugrid, None)?;
            let change = after.sup_distance(&before);
            let ok = change <= eps;
            fitted = Some((r, change));
            if ok {
                break;
            }
            weight *= 10.0;
        }
        let (r, change) = fitted.expect("at least one blend attempt");
        report.sup_change = change;
        report.degree = r.degree;
        let field = measure(&mut report, &r.triple, v, p0, prescription, settings)?;
        let outcome = StageOutcome {
            state: StageState {
                region: *v,
                triple: r.triple.clone(),
                basepoint: p0,
            },
            field,
            report: report.clone(),
            blend: Some(r),
        };
        if report.passed() {
            return Ok(outcome);
        }
        last = Some(outcome);
        if !report.sup_change_pass() {
            break;
        }
        n *= 2;
    }
    let report = last.map(|o| o.report).unwrap_or(report);
    let reason = if !report.sup_change_pass() {
        format!("sup-change {:.3e} not below {:.3e}", report.sup_change, report.sup_change_target)
    } else if !report.resolved {
        format!("distance grid unresolved (lambda ratio {:.2})", report.lambda_ratio)
    } else {
        format!(
            "distance {:.4} not above {:.4} at N = {}",
            report.distance, report.distance_target, report.n
        )
    };
    Err(Error::StageFailure {
        stage,
        reason,
        report: Box::new(report),
        partial: Vec::new(),
    })
}

#[derive(Clone, Debug)]
pub struct ExhaustionRun {
    pub reports: Vec<StageReport>,
    pub triple: WeierstrassTriple,
    pub field: ImmersionField,
}

impl ExhaustionRun {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(StageReport::passed)
    }
}

fn check_stages(tower: &ExhaustionTower, stages: usize) -> Result<()> {
    if stages == 0 || stages > MAX_STAGES || stages > tower.len() {
        return Err(Error::Precondition(format!(
            "stage count {stages} must be in 1..={} and at most the tower length {}",
            MAX_STAGES,
            tower.len()
        )));
    }
    Ok(())
}

/// First stage: the prescription's own data on `V_1`.
fn initial_stage(prescription: &HarmonicPrescription, v1: &Region, settings: &StageSettings) -> Result<StageOutcome> {
    prescription.validate_on(v1)?;
    let triple = prescription.initial_triple(*v1)?;
    let p0 = default_basepoint(v1);
    let mut report = stage_report_base(1, 1.0);
    let field = measure(&mut report, &triple, v1, p0, prescription, settings)?;
    Ok(StageOutcome {
        state: StageState {
            region: *v1,
            triple,
            basepoint: p0,
        },
        field,
        report,
        blend: None,
    })
}

/// Stages `n = 1..=stages` with `ε_n = 1/n²` and distance target `n²`.
/// Failing stages abort the run; the error carries the completed reports.
pub fn run_exhaustion(
    prescription: &HarmonicPrescription,
    tower: &ExhaustionTower,
    stages: usize,
    settings: &StageSettings,
) -> Result<ExhaustionRun> {
    check_stages(tower, stages)?;
    let first = initial_stage(prescription, tower.stage(1), settings)?;
    let mut reports = vec![first.report.clone()];
    let mut state = first.state;
    let mut field = first.field;
    for n in 2..=stages {
        let eps = 1.0 / (n * n) as f64;
        match completeness_stage(n, &state, tower.stage(n), prescription, eps, settings) {
            Ok(out) => {
                reports.push(out.report);
                state = out.state;
                field = out.field;
            }
            Err(Error::StageFailure { stage, reason, report, .. }) => {
                return Err(Error::StageFailure {
                    stage,
                    reason,
                    report,
                    partial: reports,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ExhaustionRun {
        reports,
        triple: state.triple,
        field,
    })
}

#[derive(Clone, Debug)]
pub struct NonvanishingRun {
    pub reports: Vec<StageReport>,
    pub triple: WeierstrassTriple,
    pub field: ImmersionField,
    pub gauss: GaussReport,
    pub eps: f64,
    /// `Σ sup ‖Y_n − Y_{n−1}‖`.
    pub drift_total: f64,
    /// `ε·π²/6`.
    pub drift_bound: f64,
    /// Oscillation of the seed's third coordinate on `V_1`.
    pub initial_oscillation: f64,
}

impl NonvanishingRun {
    pub fn drift_within_bound(&self) -> bool {
        self.drift_total <= self.drift_bound
    }

    /// The limit's third coordinate cannot be constant when the total drift
    /// is below half the initial oscillation.
    pub fn nonconstant(&self) -> bool {
        self.initial_oscillation > 2.0 * self.drift_bound
    }

    /// Flux carried over to the prescription of the composed run.
    pub fn prescription(&self, flux: [f64; 3]) -> Result<HarmonicPrescription> {
        HarmonicPrescription::from_exponential(self.triple.phi3(), flux)
    }
}

/// Stage `n` approximates `Y_{n−1}` on `V_{n−1}` within `ε/n²` by data on
/// `V_n` with `φ3 = e^w·ψ`; `ψ` is the seed's `φ3/dz`, which must be a
/// nonvanishing Laurent polynomial on the tower.
pub fn run_nonvanishing(
    seed: &GaussPair,
    psi: &Laurent,
    flux: [f64; 3],
    tower: &ExhaustionTower,
    stages: usize,
    eps: f64,
    settings: &StageSettings,
) -> Result<NonvanishingRun> {
    check_stages(tower, stages)?;
    let v1 = tower.stage(1);
    let p0 = default_basepoint(v1);
    let mut triple = from_gauss_pair(seed, *v1)?;
    let (grid1, field1) = stage_field(&triple, v1, p0, settings)?;
    let min1 = min_abs_phi3(&triple, &grid1);
    if !(min1 > 0.0) {
        return Err(Error::NonvanishingViolation { stage: 1, min_phi3: min1 });
    }
    let x3 = field1.third();
    let initial_oscillation = x3.iter().copied().fold(f64::NEG_INFINITY, f64::max) - x3.iter().copied().fold(f64::INFINITY, f64::min);
    let mut reports = vec![StageReport {
        stage: 1,
        sup_change_target: eps,
        min_phi3: min1,
        flux_err: flux_error(&triple, v1, flux),
        degree: triple.degree(),
        resolved: true,
        ..StageReport::default()
    }];
    let mut field = field1;
    let mut drift_total = 0.0;
    for n in 2..=stages {
        let (u, v) = (tower.stage(n - 1), tower.stage(n));
        let target_eps = eps / (n * n) as f64;
        let ugrid = sample_grid(u, settings.u_grid.0, settings.u_grid.1)?;
        let before = integrate_immersion(&triple, p0, &ugrid, None)?;
        let mut target = BlendTarget {
            carrier: *v,
            gauss_numer: seed.numer.clone(),
            gauss_denom: seed.denom.clone(),
            phi3: Phi3Mode::Nonvanishing { psi: psi.clone() },
            samples: Vec::new(),
            constraints: match u {
                Region::Annulus(a) => vec![FluxConstraint {
                    radius: (a.inner_radius * a.outer_radius).sqrt(),
                    flux,
                }],
                Region::Disk(_) => Vec::new(),
            },
        };
        target.samples = samples_from_triple(&target, &triple, &ugrid, SamplePart::Region, 1.0)?;
        let mut chosen = None;
        for &degree in DEGREE_LADDER.iter().filter(|&&d| d <= settings.degree) {
            let r = blend(&target, &settings.blend(degree))?;
            let change = integrate_immersion(&r.triple, p0, &ugrid, None)?.sup_distance(&before);
            let done = change < target_eps;
            chosen = Some((r, change));
            if done {
                break;
            }
        }
        let (r, change) = chosen.ok_or_else(|| Error::Precondition("degree cap below the ladder".into()))?;
        let (vgrid, vfield) = stage_field(&r.triple, v, p0, settings)?;
        let min_phi3 = min_abs_phi3(&r.triple, &vgrid);
        if !(min_phi3 > 0.0) {
            return Err(Error::NonvanishingViolation { stage: n, min_phi3 });
        }
        let report = StageReport {
            stage: n,
            sup_change: change,
            sup_change_target: target_eps,
            min_phi3,
            flux_err: flux_error(&r.triple, v, flux),
            degree: r.degree,
            resolved: true,
            ..StageReport::default()
        };
        if !report.sup_change_pass() {
            return Err(Error::StageFailure {
                stage: n,
                reason: format!("sup-change {change:.3e} not below {target_eps:.3e}"),
                report: Box::new(report),
                partial: reports,
            });
        }
        drift_total += change;
        reports.push(report);
        triple = r.triple;
        field = vfield;
    }
    let vgrid = field.grid.clone();
    let gauss = gauss_map(&triple, &vgrid)?;
    Ok(NonvanishingRun {
        reports,
        triple,
        field,
        gauss,
        eps,
        drift_total,
        drift_bound: eps * PI * PI / 6.0,
        initial_oscillation,
    })
}

fn stage_field(triple: &WeierstrassTriple, region: &Region, p0: Complex64, settings: &StageSettings) -> Result<(Grid, ImmersionField)> {
    let grid = sample_grid(region, settings.u_grid.0, settings.u_grid.1)?;
    let field = integrate_immersion(triple, p0, &grid, None)?;
    Ok((grid, field))
}

/// Result of adding the hole of an annulus to a disk: arc extension plus a
/// re-blend on the annulus with the prescribed flux.
#[derive(Clone, Debug)]
pub struct TopologyStep {
    pub arc: MarkedArcData,
    pub blend: BlendResult,
    /// Change on the disk samples.
    pub sup_change: f64,
    pub flux_err: f64,
}

/// Extend data from an off-center disk `U` inside the annulus `V` along the
/// circular arc around the hole through the center of `U`, then blend onto
/// `V` with the flux prescribed on the new cycle.
pub fn topology_step(
    triple: &WeierstrassTriple,
    u: &Region,
    v: &Region,
    prescription: &HarmonicPrescription,
    settings: &StageSettings,
) -> Result<TopologyStep> {
    let (Region::Disk(d), Region::Annulus(a)) = (u, v) else {
        return Err(Error::Precondition("topology step goes from a disk to an annulus".into()));
    };
    if u.gap_inside(v) <= 0.0 || a.center.norm() > 0.0 {
        return Err(Error::Precondition("U must lie inside V away from the hole".into()));
    }
    let rho = d.center.norm();
    let base = d.center.arg();
    // the circle |z| = rho meets ∂U at base ± half
    let half = 2.0 * (d.radius / (2.0 * rho)).asin();
    let arc = circular_arc(a.center, rho, base + half, base + 2.0 * PI - half, 256);
    let data = extend_along_arc(triple, u, &arc, prescription.flux, &settings.blend(settings.degree))?;
    let ugrid = sample_grid(u, settings.u_grid.0, settings.u_grid.1)?;
    let mut target = BlendTarget {
        carrier: *v,
        gauss_numer: prescription.gauss.numer.clone(),
        gauss_denom: prescription.gauss.denom.clone(),
        phi3: Phi3Mode::Fixed(prescription.phi3.clone()),
        samples: Vec::new(),
        constraints: vec![FluxConstraint {
            radius: rho,
            flux: prescription.flux,
        }],
    };
    target.samples = samples_from_triple(&target, triple, &ugrid, SamplePart::Region, settings.region_weight)?;
    target.samples.extend(arc_samples(&data, 1.0));
    let r = blend(&target, &settings.blend(settings.degree))?;
    let before = integrate_immersion(triple, d.center, &ugrid, None)?;
    let after = integrate_immersion(&r.triple, d.center, &ugrid, None)?;
    let flux_err = flux_error(&r.triple, v, prescription.flux);
    Ok(TopologyStep {
        arc: data,
        sup_change: after.sup_distance(&before),
        flux_err,
        blend: r,
    })
}

/// Data to check that a stage's flux is preserved: `Im∮φ` on the generator.
pub fn generator_flux(triple: &WeierstrassTriple, region: &Region) -> Option<[f64; 3]> {
    match region {
        Region::Annulus(a) => Some(flux(triple, &generator_cycle(a))),
        Region::Disk(_) => None,
    }
}
