use std::path::Path;

use serde::Serialize;

use super::{write_pair, ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::tableau::{load_builtin, load_inner, read_tableau, Finding, MriTableau};
use crate::theory::{base_ark, c_statistic, check_ark_order, check_coupling_order, check_internal_consistency, embedding_order, method_order};

/// Highest order whose conditions are implemented.
const MAX_CHECKED_ORDER: usize = 4;

/// Aggregated order checks of one tableau.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodVerification {
    pub method: String,
    /// `builtin` or the tableau file path.
    pub source: String,
    pub inner: String,
    pub inner_order: usize,
    pub stages: usize,
    pub n_omega: usize,
    /// Set when a tableau file could not be parsed; no checks ran.
    pub load_error: Option<String>,
    pub findings: Vec<Finding>,
    pub consistency: bool,
    /// Labels of violated consistency conditions.
    pub consistency_failures: Vec<String>,
    /// Order of the slow base pair alone.
    pub base_order: usize,
    /// Highest order (3 or 4) whose coupling conditions all hold.
    pub coupling_order: Option<usize>,
    /// Order certified with the configured inner method.
    pub certified_order: usize,
    /// Order of the outer tableau given a sufficiently accurate inner method.
    pub tableau_order: usize,
    pub embedding_order: Option<usize>,
    /// C-statistic at the certified order; needs residuals one order higher.
    pub c_statistic: Option<f64>,
    /// Order stated by the method name, capped at the highest checkable order.
    pub expected_order: Option<usize>,
    pub note: Option<String>,
}

impl MethodVerification {
    pub fn pass(&self) -> bool {
        self.load_error.is_none()
            && self.findings.is_empty()
            && self.consistency
            && self.expected_order.map_or(true, |p| self.tableau_order >= p)
    }

    fn failed_load(source: &str, err: String) -> Self {
        MethodVerification {
            method: source.to_string(),
            source: source.to_string(),
            inner: String::new(),
            inner_order: 0,
            stages: 0,
            n_omega: 0,
            load_error: Some(err),
            findings: Vec::new(),
            consistency: false,
            consistency_failures: Vec::new(),
            base_order: 0,
            coupling_order: None,
            certified_order: 0,
            tableau_order: 0,
            embedding_order: None,
            c_statistic: None,
            expected_order: None,
            note: None,
        }
    }
}

/// Order stated by names such as `imex-mri-sr43` or `merk5`.
fn stated_order(name: &str) -> Option<usize> {
    let lower = name.to_ascii_lowercase();
    let digits = lower.strip_prefix("merk").or_else(|| lower.strip_prefix("imex-mri-sr"))?;
    let p = digits.chars().next()?.to_digit(10)? as usize;
    Some(p.min(MAX_CHECKED_ORDER))
}

/// Runs every order check on `t` with an inner method of order `inner_order`.
pub fn verify_tableau(t: &MriTableau, source: &str, inner: &str, inner_order: usize) -> MethodVerification {
    let findings = t.validate_structure();
    let mut v = MethodVerification::failed_load(source, String::new());
    v.method = t.name.clone();
    v.load_error = None;
    v.inner = inner.to_string();
    v.inner_order = inner_order;
    v.stages = t.stages();
    v.n_omega = t.n_omega();
    v.expected_order = stated_order(&t.name);
    if !findings.is_empty() {
        v.findings = findings;
        return v;
    }
    let cons = check_internal_consistency(t);
    v.consistency = cons.all_pass();
    v.consistency_failures = cons.failures().iter().map(|c| c.label.clone()).collect();
    let ark = base_ark(t);
    v.base_order = (1..=MAX_CHECKED_ORDER).take_while(|&p| check_ark_order(&ark, p).all_pass()).last().unwrap_or(0);
    v.coupling_order = (3..=MAX_CHECKED_ORDER)
        .take_while(|&p| check_coupling_order(t, p).is_ok_and(|r| r.all_pass()))
        .last();
    v.certified_order = method_order(t, inner_order);
    // The inner-order floor grows with nΩ; this always clears it.
    let ample = MAX_CHECKED_ORDER + v.n_omega + 2;
    v.tableau_order = method_order(t, ample);
    v.embedding_order = embedding_order(t, ample);
    if v.embedding_order.is_some() && v.tableau_order > 0 {
        v.c_statistic = c_statistic(t, v.tableau_order).ok();
    }
    let named = t.name.to_ascii_lowercase();
    let higher = named.strip_prefix("merk").and_then(|d| d.parse::<usize>().ok()).is_some_and(|p| p > MAX_CHECKED_ORDER);
    if higher {
        v.note = Some(format!(
            "verified to order {}; order {} out of scope",
            v.tableau_order,
            v.tableau_order + 1
        ));
    } else if v.embedding_order.is_some() && v.c_statistic.is_none() {
        v.note = Some(format!("C-statistic needs order-{} residuals, out of scope", v.tableau_order + 1));
    }
    if v.certified_order < v.tableau_order {
        let extra = format!("inner {} (order {inner_order}) limits the run to order {}", v.inner, v.certified_order);
        v.note = Some(match v.note.take() {
            Some(n) => format!("{n}; {extra}"),
            None => extra,
        });
    }
    v
}

/// Verifies the configured builtins and tableau files. Builtins use their
/// configured or default inner method; files use the inner method mapped to
/// their name, falling back to `zonneveld` (order 4).
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Vec<MethodVerification>> {
    let mut cfg = cfg.clone();
    cfg.kind = ExperimentKind::Verify;
    let builtins = if cfg.methods.is_empty() && !cfg.tableau_files.is_empty() { Vec::new() } else { cfg.method_names() };
    let mut out = Vec::new();
    for m in builtins {
        let t = load_builtin(&m)?;
        let inner = load_inner(&cfg.inner_name(&m)?)?;
        out.push(verify_tableau(&t, "builtin", &inner.name, inner.order));
    }
    for path in &cfg.tableau_files {
        let source = path.display().to_string();
        match read_tableau(path) {
            Ok(t) => {
                let inner_name = cfg.inner.get(&t.name).cloned().unwrap_or_else(|| "zonneveld".to_string());
                let inner = load_inner(&inner_name)?;
                out.push(verify_tableau(&t, &source, &inner.name, inner.order));
            }
            Err(e) => out.push(MethodVerification::failed_load(&source, e.to_string())),
        }
    }
    if let Some(dir) = &cfg.out {
        write_verification(dir, &out, &cfg)?;
    }
    Ok(out)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

/// Fixed-width human-readable table, one line per method.
pub fn verification_table(rows: &[MethodVerification]) -> String {
    let mut out = format!(
        "{:<16} {:<18} {:>2} {:>3} {:<9} {:<11} {:>4} {:>8} {:>7} {:>9} {:>5} {:>10}  {}\n",
        "method", "inner", "s", "nΩ", "structure", "consistency", "base", "coupling", "tableau", "certified", "emb", "C", "note"
    );
    for r in rows {
        if let Some(e) = &r.load_error {
            out.push_str(&format!("{:<16} load error: {e}\n", r.method));
            continue;
        }
        let structure = if r.findings.is_empty() { "ok".to_string() } else { format!("{} issues", r.findings.len()) };
        let note = match (&r.note, r.findings.first()) {
            (_, Some(f)) => f.message.clone(),
            (Some(n), None) => n.clone(),
            (None, None) => String::new(),
        };
        out.push_str(&format!(
            "{:<16} {:<18} {:>2} {:>3} {:<9} {:<11} {:>4} {:>8} {:>7} {:>9} {:>5} {:>10}  {}\n",
            r.method,
            r.inner,
            r.stages,
            r.n_omega,
            structure,
            if r.consistency { "exact" } else { "FAIL" },
            r.base_order,
            opt(r.coupling_order),
            r.tableau_order,
            r.certified_order,
            opt(r.embedding_order),
            r.c_statistic.map_or_else(|| "-".to_string(), |c| format!("{c:.4e}")),
            note
        ));
    }
    out
}

fn write_verification(dir: &Path, rows: &[MethodVerification], cfg: &ExperimentConfig) -> Result<()> {
    let json = serde_json::json!({ "methods": rows, "config": cfg });
    let mut csv = String::from("method,inner,stages,nOmega,findings,consistency,baseOrder,couplingOrder,tableauOrder,certifiedOrder,embeddingOrder,cStatistic\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.inner,
            r.stages,
            r.n_omega,
            r.findings.len(),
            u8::from(r.consistency),
            r.base_order,
            r.coupling_order.map_or(String::new(), |p| p.to_string()),
            r.tableau_order,
            r.certified_order,
            r.embedding_order.map_or(String::new(), |p| p.to_string()),
            r.c_statistic.map_or(String::new(), |c| format!("{c:e}"))
        ));
    }
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("verify.txt"), verification_table(rows))?;
    write_pair(dir, "verify", &csv, &serde_json::to_string_pretty(&json)?)
}
