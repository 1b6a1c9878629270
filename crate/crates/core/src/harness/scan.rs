use serde::{Deserialize, Serialize};

use super::{write_pair, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::stability::{scan_component_region, scan_joint_region, Component, RegionScan, ScanKind, SectorSampling, SectorSpec, Window};
use crate::tableau::load_builtin;

/// Region-scan settings: one scan per method, fast sector and (for joint
/// scans) implicit sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct StabilitySettings {
    pub kind: ScanKind,
    pub fast: Vec<SectorSpec>,
    /// Implicit sectors of joint scans; ignored otherwise.
    pub implicit: Vec<SectorSpec>,
    pub window: Window,
    pub sampling: SectorSampling,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        StabilitySettings {
            kind: ScanKind::Explicit,
            fast: vec![SectorSpec { angle: 10.0, radius: 1e2 }, SectorSpec { angle: 45.0, radius: 1e2 }],
            implicit: vec![SectorSpec { angle: 10.0, radius: 1e4 }],
            window: Window { re_min: -6.0, re_max: 1.0, im_min: -4.0, im_max: 4.0, n_re: 100, n_im: 100 },
            sampling: SectorSampling::default(),
        }
    }
}

impl StabilitySettings {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if self.fast.is_empty() || (self.kind == ScanKind::Joint && self.implicit.is_empty()) {
            return Err(Error::Config("stability scan needs at least one sector".into()));
        }
        for s in self.fast.iter().chain(&self.implicit) {
            s.validate()?;
        }
        Ok(())
    }

    fn combos(&self) -> Vec<(SectorSpec, Option<SectorSpec>)> {
        let mut out = Vec::new();
        for f in &self.fast {
            if self.kind == ScanKind::Joint {
                out.extend(self.implicit.iter().map(|i| (*f, Some(*i))));
            } else {
                out.push((*f, None));
            }
        }
        out
    }
}

fn stem(scan: &RegionScan) -> String {
    let kind = serde_json::to_value(scan.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    let mut s = format!("stability_{}_{}_fast{}-{:e}", scan.method, kind, scan.fast.angle, scan.fast.radius);
    if let Some(i) = scan.implicit {
        s.push_str(&format!("_implicit{}-{:e}", i.angle, i.radius));
    }
    s
}

/// Scans every (method, sector) combination. With an output directory each
/// scan is written as CSV plus a JSON sidecar that also echoes the config.
pub fn run_stability_export(cfg: &ExperimentConfig) -> Result<Vec<RegionScan>> {
    let mut cfg = cfg.clone();
    cfg.kind = ExperimentKind::Stability;
    cfg.validate()?;
    let st = &cfg.stability;
    let mut out = Vec::new();
    for method in cfg.method_names() {
        let t = load_builtin(&method)?;
        for (fast, implicit) in st.combos() {
            let scan = match (st.kind, implicit) {
                (ScanKind::Joint, Some(i)) => scan_joint_region(&t, fast, i, st.window, &st.sampling)?,
                (ScanKind::Implicit, _) => scan_component_region(&t, Component::Implicit, fast, st.window, &st.sampling)?,
                _ => scan_component_region(&t, Component::Explicit, fast, st.window, &st.sampling)?,
            };
            if let Some(dir) = &cfg.out {
                let json = serde_json::json!({ "scan": scan, "config": cfg });
                write_pair(dir, &stem(&scan), &scan.to_csv(), &serde_json::to_string_pretty(&json)?)?;
            }
            out.push(scan);
        }
    }
    Ok(out)
}
