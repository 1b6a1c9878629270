use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StabilityFunction;
use crate::error::{Error, Result};
use crate::tableau::MriTableau;

/// Slack allowed on `|R| ≤ 1` before a cell is declared unstable.
pub const SCAN_TOLERANCE: f64 = 1e-12;

/// Sector `{z : |arg z − π| ≤ angle, |z| ≤ radius}` with the angle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub angle: f64,
    pub radius: f64,
}

impl SectorSpec {
    pub fn new(angle: f64, radius: f64) -> Result<Self> {
        let s = SectorSpec { angle, radius };
        s.validate()?;
        Ok(s)
    }

    /// The sector containing only the origin.
    pub fn origin() -> Self {
        SectorSpec { angle: 0.0, radius: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=90.0).contains(&self.angle) {
            return Err(Error::Config(format!("sector angle {} must lie in [0, 90] degrees", self.angle)));
        }
        if !(self.radius >= 0.0) || !self.radius.is_finite() {
            return Err(Error::Config(format!("sector radius {} must be finite and non-negative", self.radius)));
        }
        Ok(())
    }
}

/// How densely a sector is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SectorSampling {
    /// Points on each boundary ray.
    pub ray_points: usize,
    /// Points on the arc `|z| = radius`.
    pub arc_points: usize,
    /// Interior lattice size: radii × angles.
    pub radial: usize,
    pub angular: usize,
    /// Rays and lattice radii are log-spaced over this many decades below the radius.
    pub decades: f64,
}

impl Default for SectorSampling {
    fn default() -> Self {
        SectorSampling { ray_points: 32, arc_points: 32, radial: 16, angular: 16, decades: 6.0 }
    }
}

impl SectorSampling {
    /// Sparser sampling for joint scans, whose cost is the product of two sectors.
    pub fn coarse() -> Self {
        SectorSampling { ray_points: 12, arc_points: 9, radial: 6, angular: 6, decades: 6.0 }
    }

    pub fn refined(&self) -> Self {
        SectorSampling {
            ray_points: 2 * self.ray_points,
            arc_points: 2 * self.arc_points,
            radial: 2 * self.radial,
            angular: 2 * self.angular,
            decades: self.decades,
        }
    }

    fn radii(&self, radius: f64, n: usize) -> impl Iterator<Item = f64> + '_ {
        (0..n).map(move |j| {
            let frac = if n > 1 { j as f64 / (n - 1) as f64 } else { 1.0 };
            radius * 10f64.powf(-self.decades * (1.0 - frac))
        })
    }
}

/// Origin, both boundary rays, the outer arc and an interior log-radial lattice.
pub fn sector_samples(spec: &SectorSpec, sampling: &SectorSampling) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    if spec.radius == 0.0 {
        return out;
    }
    let alpha = spec.angle.to_radians();
    let pi = std::f64::consts::PI;
    let signs: &[f64] = if alpha == 0.0 { &[1.0] } else { &[1.0, -1.0] };
    for &sg in signs {
        let dir = Complex64::from_polar(1.0, pi + sg * alpha);
        out.extend(sampling.radii(spec.radius, sampling.ray_points).map(|r| dir * r));
    }
    if alpha > 0.0 {
        let n = sampling.arc_points.max(2);
        for j in 0..n {
            let th = pi - alpha + 2.0 * alpha * j as f64 / (n - 1) as f64;
            out.push(Complex64::from_polar(spec.radius, th));
        }
        for r in sampling.radii(spec.radius, sampling.radial) {
            for j in 0..sampling.angular {
                let th = pi - alpha + 2.0 * alpha * (j as f64 + 0.5) / sampling.angular as f64;
                out.push(Complex64::from_polar(r, th));
            }
        }
    }
    out
}

/// Rectangle of the complex plane, sampled on an inclusive grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Window {
    pub fn new(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        let w = Window { re_min: re.0, re_max: re.1, im_min: im.0, im_max: im.1, n_re, n_im };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_re < 2 || self.n_im < 2 {
            return Err(Error::Config(format!("grid resolution {}x{} must be at least 2x2", self.n_re, self.n_im)));
        }
        if !(self.re_min < self.re_max) || !(self.im_min < self.im_max) {
            return Err(Error::Config("window bounds must satisfy min < max".into()));
        }
        Ok(())
    }

    pub fn re(&self, i: usize) -> f64 {
        self.re_min + (self.re_max - self.re_min) * i as f64 / (self.n_re - 1) as f64
    }

    pub fn im(&self, j: usize) -> f64 {
        self.im_min + (self.im_max - self.im_min) * j as f64 / (self.n_im - 1) as f64
    }

    pub fn cells(&self) -> usize {
        self.n_re * self.n_im
    }

    /// Cell `idx` in row-major order over (im, re).
    pub fn point(&self, idx: usize) -> Complex64 {
        Complex64::new(self.re(idx % self.n_re), self.im(idx / self.n_re))
    }
}

/// Which variable the scan grid covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    /// Grid over `zE`, maximum over sampled `zF` and `zI`.
    Joint,
    /// Grid over `zE` with `zI = 0`.
    Explicit,
    /// Grid over `zI` with `zE = 0`.
    Implicit,
}

/// Component selector for [`scan_component_region`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Explicit,
    Implicit,
}

/// Stability indicator over a window, with the worst `|R|` found in each cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionScan {
    pub method: String,
    pub kind: ScanKind,
    pub fast: SectorSpec,
    pub implicit: Option<SectorSpec>,
    pub window: Window,
    pub sampling: SectorSampling,
    pub tolerance: f64,
    pub stable_cells: usize,
    pub total_cells: usize,
    /// Row-major over (im, re).
    #[serde(skip)]
    pub max_abs: Vec<f64>,
}

impl RegionScan {
    pub fn indicator(&self, idx: usize) -> bool {
        self.max_abs[idx] <= 1.0 + self.tolerance
    }

    pub fn is_empty(&self) -> bool {
        self.stable_cells == 0
    }

    pub fn all_stable(&self) -> bool {
        self.stable_cells == self.total_cells
    }

    pub fn stable_fraction(&self) -> f64 {
        self.stable_cells as f64 / self.total_cells as f64
    }

    /// Fraction of cells whose indicator differs from `other` on the same window.
    pub fn disagreement(&self, other: &RegionScan) -> f64 {
        let n = self.max_abs.len().min(other.max_abs.len());
        let diff = (0..n).filter(|&i| self.indicator(i) != other.indicator(i)).count();
        diff as f64 / n.max(1) as f64
    }

    /// CSV with columns `re, im, indicator, maxAbsR`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,indicator,maxAbsR\n");
        for (idx, m) in self.max_abs.iter().enumerate() {
            let z = self.window.point(idx);
            out.push_str(&format!("{:e},{:e},{},{:e}\n", z.re, z.im, u8::from(self.indicator(idx)), m));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<stem>.csv` and the `<stem>.json` sidecar.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::File::create(dir.join(format!("{stem}.csv")))?.write_all(self.to_csv().as_bytes())?;
        std::fs::File::create(dir.join(format!("{stem}.json")))?.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }
}

/// Joint region: `zE` cells stable for every sampled `zF ∈ fast` and `zI ∈ implicit`.
pub fn scan_joint_region(
    t: &MriTableau,
    fast: SectorSpec,
    implicit: SectorSpec,
    window: Window,
    sampling: &SectorSampling,
) -> Result<RegionScan> {
    implicit.validate()?;
    let zi = sector_samples(&implicit, sampling);
    scan(t, ScanKind::Joint, fast, Some(implicit), &zi, window, sampling)
}

/// Single-component region: `zE` with `zI = 0`, or `zI` with `zE = 0`, stable for every sampled `zF ∈ fast`.
pub fn scan_component_region(
    t: &MriTableau,
    which: Component,
    fast: SectorSpec,
    window: Window,
    sampling: &SectorSampling,
) -> Result<RegionScan> {
    let kind = match which {
        Component::Explicit => ScanKind::Explicit,
        Component::Implicit => ScanKind::Implicit,
    };
    scan(t, kind, fast, None, &[Complex64::new(0.0, 0.0)], window, sampling)
}

fn scan(
    t: &MriTableau,
    kind: ScanKind,
    fast: SectorSpec,
    implicit: Option<SectorSpec>,
    zi_samples: &[Complex64],
    window: Window,
    sampling: &SectorSampling,
) -> Result<RegionScan> {
    fast.validate()?;
    window.validate()?;
    let sf = StabilityFunction::new(t);
    let factors: Vec<_> = sector_samples(&fast, sampling).into_iter().map(|z| sf.fast_factors(z)).collect();
    let zero = Complex64::new(0.0, 0.0);
    let max_abs: Vec<f64> = (0..window.cells())
        .into_par_iter()
        .map(|idx| {
            let z = window.point(idx);
            let mut worst = 0.0f64;
            for f in &factors {
                for &zs in zi_samples {
                    let (ze, zi) = match kind {
                        ScanKind::Joint => (z, zs),
                        ScanKind::Explicit => (z, zero),
                        ScanKind::Implicit => (zero, z),
                    };
                    let r = sf.eval_with(f, ze, zi).norm();
                    worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
                }
            }
            worst
        })
        .collect();
    let tolerance = SCAN_TOLERANCE;
    let stable_cells = max_abs.iter().filter(|&&m| m <= 1.0 + tolerance).count();
    Ok(RegionScan {
        method: t.name.clone(),
        kind,
        fast,
        implicit,
        window,
        sampling: *sampling,
        tolerance,
        stable_cells,
        total_cells: window.cells(),
        max_abs,
    })
}
