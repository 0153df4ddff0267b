//! Labyrinths of slit annular bands inside an annulus `C`, the constants `μ`
//! and `M`, the constant-Gauss-map deformation and the pointwise check of the
//! metric amplification on the bands.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{AnnulusChart, Grid, Region};
use crate::error::{Error, Result};
use crate::form::HoloForm;
use crate::weierstrass::{GaussPair, WeierstrassTriple};

/// Closed-inequality tolerance for band membership, in radius and angle.
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Safety factor applied to the grid minimum of `|φ3/dz|`.
pub const MU_FACTOR: f64 = 0.9;
/// Radial samples a band needs before the bound check is meaningful.
pub const MIN_SAMPLES_PER_BAND: usize = 3;

/// One set `K_n`: radii in `[inner, outer]`, angles outside the slit of
/// half-width `half_slit` around `slit_angle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub n: usize,
    pub inner: f64,
    pub outer: f64,
    pub slit_angle: f64,
    pub half_slit: f64,
}

impl Band {
    pub fn thickness(&self) -> f64 {
        self.outer - self.inner
    }

    /// Membership of a point given relative to the annulus center.
    pub fn contains(&self, w: Complex64) -> bool {
        let m = w.norm();
        if m < self.inner - MEMBERSHIP_TOL || m > self.outer + MEMBERSHIP_TOL {
            return false;
        }
        // arg((-1)^n w) in [0, 2π)
        let rotated = if self.n % 2 == 1 { -w } else { w };
        let mut a = rotated.arg();
        if a < 0.0 {
            a += 2.0 * PI;
        }
        a >= self.half_slit - MEMBERSHIP_TOL && a <= 2.0 * PI - self.half_slit + MEMBERSHIP_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabyrinthSpec {
    pub parent: AnnulusChart,
    #[serde(rename = "N")]
    pub n: usize,
    pub bands: Vec<Band>,
}

pub fn build_labyrinth(c: &AnnulusChart, n: usize) -> Result<LabyrinthSpec> {
    if n < 2 || !c.fits_labyrinth(n) {
        return Err(Error::LabyrinthFit {
            two_over_n: 2.0 / n.max(1) as f64,
            width: c.width(),
        });
    }
    let nf = n as f64;
    let n3 = nf.powi(3);
    let s = |k: usize| c.outer_radius - k as f64 / n3;
    let bands = (1..=2 * n * n)
        .map(|k| Band {
            n: k,
            inner: s(k) + 1.0 / (4.0 * n3),
            outer: s(k - 1) - 1.0 / (4.0 * n3),
            slit_angle: if k % 2 == 1 { PI } else { 0.0 },
            half_slit: 1.0 / (nf * nf),
        })
        .collect();
    Ok(LabyrinthSpec { parent: *c, n, bands })
}

impl LabyrinthSpec {
    /// `s_k = R − k/N³`.
    pub fn s(&self, k: usize) -> f64 {
        self.parent.outer_radius - k as f64 / (self.n as f64).powi(3)
    }

    pub fn thickness(&self) -> f64 {
        1.0 / (2.0 * (self.n as f64).powi(3))
    }

    /// 1-based band index containing `z`, if any.
    pub fn membership(&self, z: Complex64) -> Option<usize> {
        let w = z - self.parent.center;
        let m = w.norm();
        let n3 = (self.n as f64).powi(3);
        // bands are sorted by decreasing radius; only two candidates can match
        let k = ((self.parent.outer_radius - m) * n3).floor() as i64 + 1;
        [k - 1, k, k + 1]
            .into_iter()
            .filter(|&k| k >= 1 && (k as usize) <= self.bands.len())
            .find(|&k| self.bands[k as usize - 1].contains(w))
            .map(|k| k as usize)
    }

    /// Collocation points inside the bands: `radii` evenly spaced interior
    /// radii per band and `angular` equally spaced angles, slits removed.
    pub fn sample_points(&self, radii: usize, angular: usize) -> Vec<(Complex64, usize)> {
        let mut out = Vec::new();
        for b in &self.bands {
            for r in 0..radii {
                let rho = b.inner + b.thickness() * (r as f64 + 0.5) / radii as f64;
                for j in 0..angular {
                    let th = 2.0 * PI * (j as f64 + 0.5) / angular as f64;
                    let w = Complex64::from_polar(rho, th);
                    if b.contains(w) {
                        out.push((self.parent.center + w, b.n));
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `node,re,im,band` rows, band 0 meaning outside the labyrinth.
    pub fn membership_csv(&self, grid: &Grid) -> String {
        let mut s = String::from("node,re,im,band\n");
        for (k, node) in grid.nodes().iter().enumerate() {
            let band = self.membership(node.z).unwrap_or(0);
            let _ = writeln!(s, "{k},{:.12e},{:.12e},{band}", node.z.re, node.z.im);
        }
        s
    }

    /// Fewest grid rings falling inside any band.
    pub fn min_samples_per_band(&self, grid: &Grid) -> usize {
        let radii: Vec<f64> = (0..grid.radial_count()).map(|i| grid.row_radius(i)).collect();
        let shift = (grid.parent().center() - self.parent.center).norm();
        if shift > 1e-12 {
            return 0;
        }
        self.bands
            .iter()
            .map(|b| {
                radii
                    .iter()
                    .filter(|&&r| r >= b.inner - MEMBERSHIP_TOL && r <= b.outer + MEMBERSHIP_TOL)
                    .count()
            })
            .min()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformParams {
    pub mu: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl DeformParams {
    /// `M = 4N⁴`.
    pub fn default_m(n: usize) -> f64 {
        4.0 * (n as f64).powi(4)
    }
}

/// `0.9 · min |φ3/dz|` over grid nodes inside `c`, after checking that `φ3`
/// has no zeros on `c` (grid minimum and argument principle).
pub fn compute_mu(phi3: &HoloForm, c: &AnnulusChart, grid: &Grid) -> Result<f64> {
    let vals: Vec<f64> = grid
        .nodes()
        .par_iter()
        .filter(|n| c.contains(n.z, 1e-12))
        .map(|n| phi3.eval(n.z).norm())
        .collect();
    if vals.is_empty() {
        return Err(Error::Precondition("grid has no nodes on C".into()));
    }
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(0.0, f64::max);
    let zeros = zero_count(phi3, c);
    if zeros != 0 || !(min > 1e-12 * max.max(1e-300)) {
        return Err(Error::Precondition(format!(
            "phi3 vanishes on C (zero count {zeros}, grid minimum {min:.3e}); shrink C"
        )));
    }
    Ok(MU_FACTOR * min)
}

/// Zeros minus poles of `φ3/dz` inside the annulus, by the argument principle.
pub fn zero_count(phi3: &HoloForm, c: &AnnulusChart) -> i32 {
    let winding = |r: f64| {
        let n = 4096;
        let pts: Vec<Complex64> = (0..=n)
            .map(|k| phi3.eval(c.center + Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64)))
            .collect();
        let total: f64 = pts.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
        (total / (2.0 * PI)).round() as i32
    };
    winding(c.outer_radius) - winding(c.inner_radius)
}

/// `(½(1/M − M)φ3, (i/2)(1/M + M)φ3, φ3)`, whose Gauss map is `≡ M`.
pub fn lopez_ros_deform(phi3: &HoloForm, carrier: Region, m: f64) -> Result<WeierstrassTriple> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!("deformation needs M > 0, got {m}")));
    }
    let a = Complex64::new(0.5 * (1.0 / m - m), 0.0);
    let b = Complex64::new(0.0, 0.5 * (1.0 / m + m));
    Ok(WeierstrassTriple {
        carrier,
        phi: [phi3.scale(a), phi3.scale(b), phi3.clone()],
        gauss: Some(GaussPair::constant(Complex64::new(m, 0.0), phi3.clone())),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub nodes_checked: usize,
    /// `min λ²/(N⁸μ²)` over labyrinth nodes.
    pub min_ratio: f64,
    pub worst_node: usize,
    pub worst_z: Complex64,
    /// `min λ² / (¼(1/M + M)²μ²)` over labyrinth nodes.
    pub min_first_ratio: f64,
    /// `¼(1/M + M)²/N⁸`.
    pub intermediate_ratio: f64,
    pub intermediate_margin: f64,
    pub m_exceeds_2n4: bool,
    pub min_samples_per_band: usize,
    /// `min λ²/μ²` over all nodes of `C`.
    pub min_ratio_on_c: f64,
}

pub fn verify_metric_bound(
    deformed: &WeierstrassTriple,
    spec: &LabyrinthSpec,
    params: &DeformParams,
    grid: &Grid,
) -> Result<BoundReport> {
    let samples = spec.min_samples_per_band(grid);
    if samples < MIN_SAMPLES_PER_BAND {
        return Err(Error::Resolution(format!(
            "bands get {samples} radial samples, need at least {MIN_SAMPLES_PER_BAND}"
        )));
    }
    let n8 = (spec.n as f64).powi(8);
    let mu2 = params.mu * params.mu;
    let amp = 0.25 * (1.0 / params.m + params.m).powi(2);
    let rows: Vec<(usize, f64, bool)> = grid
        .nodes()
        .par_iter()
        .enumerate()
        .filter(|(_, n)| spec.parent.contains(n.z, MEMBERSHIP_TOL))
        .map(|(k, n)| (k, deformed.lambda2_at(n.z), spec.membership(n.z).is_some()))
        .collect();
    let mut report = BoundReport {
        nodes_checked: 0,
        min_ratio: f64::INFINITY,
        worst_node: 0,
        worst_z: Complex64::new(0.0, 0.0),
        min_first_ratio: f64::INFINITY,
        intermediate_ratio: amp / n8,
        intermediate_margin: amp / n8 - 1.0,
        m_exceeds_2n4: params.m > 2.0 * (spec.n as f64).powi(4),
        min_samples_per_band: samples,
        min_ratio_on_c: f64::INFINITY,
    };
    for (k, l2, on_k) in rows {
        report.min_ratio_on_c = report.min_ratio_on_c.min(l2 / mu2);
        if !on_k {
            continue;
        }
        report.nodes_checked += 1;
        let r = l2 / (n8 * mu2);
        if r < report.min_ratio {
            report.min_ratio = r;
            report.worst_node = k;
            report.worst_z = grid.z(k);
        }
        report.min_first_ratio = report.min_first_ratio.min(l2 / (amp * mu2));
    }
    if report.nodes_checked == 0 {
        return Err(Error::Resolution("no grid node falls inside the labyrinth".into()));
    }
    if !(report.min_ratio > 1.0) {
        return Err(Error::BoundViolated {
            node: report.worst_node,
            ratio: report.min_ratio,
        });
    }
    Ok(report)
}

/// Ring count that puts at least `per_band` rings inside every band of a
/// labyrinth with parameter `n` on `c`.
pub fn radial_count_for(c: &AnnulusChart, n: usize, per_band: usize) -> usize {
    let thickness = 1.0 / (2.0 * (n as f64).powi(3));
    let step = thickness / (per_band as f64 + 0.5);
    (c.width() / step).ceil() as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_annulus, sample_grid};
    use crate::weierstrass::isotropy_residual;

    #[test]
    fn band_intervals() {
        let c = make_annulus(0.25, 1.0).unwrap();
        let l = build_labyrinth(&c, 3).unwrap();
        assert_eq!(l.bands.len(), 18);
        assert!((l.s(1) - (1.0 - 1.0 / 27.0)).abs() < 1e-15);
        assert!((l.bands[0].inner - (l.s(1) + 1.0 / 108.0)).abs() < 1e-15);
        assert!((l.bands[0].outer - (1.0 - 1.0 / 108.0)).abs() < 1e-15);
        assert!(matches!(build_labyrinth(&c, 2), Err(Error::LabyrinthFit { .. })));
    }

    #[test]
    fn slit_excludes_point() {
        let c = make_annulus(0.25, 1.0).unwrap();
        let l = build_labyrinth(&c, 3).unwrap();
        let z = Complex64::from_polar(0.98, PI);
        assert!(!l.bands[0].contains(z));
        assert_eq!(l.membership(z), None);
        assert_eq!(l.membership(Complex64::new(0.98, 0.0)), Some(1));
        assert_eq!(l.membership(Complex64::from_polar(0.98, 0.05)), Some(1));
    }

    #[test]
    fn mu_examples() {
        let c = make_annulus(0.25, 1.0).unwrap();
        let grid = sample_grid(&Region::Annulus(c), 16, 64).unwrap();
        assert!((compute_mu(&HoloForm::dz(), &c, &grid).unwrap() - 0.9).abs() < 1e-15);
        assert!((compute_mu(&HoloForm::dz_over_z(), &c, &grid).unwrap() - 0.9).abs() < 1e-12);
        let off = AnnulusChart::new(0.25, 1.0, Complex64::new(0.5, 0.0)).unwrap();
        let grid = sample_grid(&Region::Annulus(off), 16, 64).unwrap();
        let z = HoloForm::from_laurent(crate::laurent::Laurent::monomial(1, Complex64::new(1.0, 0.0)));
        assert!(matches!(compute_mu(&z, &off, &grid), Err(Error::Precondition(_))));
    }

    #[test]
    fn deformation_values() {
        let carrier = Region::disk(1.0).unwrap();
        let t = lopez_ros_deform(&HoloForm::dz(), carrier, 2.0).unwrap();
        let p = t.eval(Complex64::new(0.2, 0.1));
        assert!((p[0] - Complex64::new(-0.75, 0.0)).norm() < 1e-15);
        assert!((p[1] - Complex64::new(0.0, 1.25)).norm() < 1e-15);
        let grid = sample_grid(&carrier, 8, 32).unwrap();
        assert!(isotropy_residual(&t, &grid) < 1e-15);
        assert_eq!(t.phi[2], HoloForm::dz());
    }

    #[test]
    fn resolution_is_enforced() {
        let c = make_annulus(0.25, 1.0).unwrap();
        let l = build_labyrinth(&c, 3).unwrap();
        let t = lopez_ros_deform(&HoloForm::dz(), Region::Annulus(c), 324.0).unwrap();
        let params = DeformParams { mu: 0.9, m: 324.0 };
        let coarse = sample_grid(&Region::Annulus(c), 64, 256).unwrap();
        assert!(matches!(verify_metric_bound(&t, &l, &params, &coarse), Err(Error::Resolution(_))));
        let fine = sample_grid(&Region::Annulus(c), radial_count_for(&c, 3, 3), 256).unwrap();
        let r = verify_metric_bound(&t, &l, &params, &fine).unwrap();
        assert!(r.min_samples_per_band >= 3);
        assert!(r.min_ratio > 1.0);
    }
}
