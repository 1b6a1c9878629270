use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Embedding, MriTableau};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{format_fraction, parse_fraction, Rational};

/// Interchange layout; every coefficient is a fraction string such as `"3/5"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableauFile {
    pub name: String,
    pub s: usize,
    pub n_omega: usize,
    pub c: Vec<String>,
    pub omega: Vec<Vec<Vec<String>>>,
    pub gamma: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emb_omega: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emb_gamma: Option<Vec<String>>,
}

fn row_strings(r: &[Rational]) -> Vec<String> {
    r.iter().map(format_fraction).collect()
}

fn mat_strings(m: &Mat<Rational>) -> Vec<Vec<String>> {
    m.rows().map(row_strings).collect()
}

fn parse_row(r: &[String], s: usize, what: &str) -> Result<Vec<Rational>> {
    if r.len() != s {
        return Err(Error::Parse(format!("{what}: expected {s} entries, got {}", r.len())));
    }
    r.iter().map(|x| parse_fraction(x)).collect()
}

fn parse_mat(m: &[Vec<String>], s: usize, what: &str) -> Result<Mat<Rational>> {
    if m.len() != s {
        return Err(Error::Parse(format!("{what}: expected {s} rows, got {}", m.len())));
    }
    let rows = m
        .iter()
        .enumerate()
        .map(|(i, r)| parse_row(r, s, &format!("{what} row {}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Mat::from_rows(rows))
}

impl From<&MriTableau> for TableauFile {
    fn from(t: &MriTableau) -> Self {
        TableauFile {
            name: t.name.clone(),
            s: t.stages(),
            n_omega: t.n_omega(),
            c: row_strings(&t.c),
            omega: t.omega.iter().map(mat_strings).collect(),
            gamma: mat_strings(&t.gamma),
            emb_omega: t.embedding.as_ref().map(|e| e.omega.iter().map(|r| row_strings(r)).collect()),
            emb_gamma: t.embedding.as_ref().map(|e| row_strings(&e.gamma)),
        }
    }
}

impl TryFrom<&TableauFile> for MriTableau {
    type Error = Error;

    fn try_from(f: &TableauFile) -> Result<Self> {
        let s = f.s;
        if f.omega.len() != f.n_omega {
            return Err(Error::Parse(format!(
                "nOmega = {} but {} omega matrices given",
                f.n_omega,
                f.omega.len()
            )));
        }
        let c = parse_row(&f.c, s, "c")?;
        let omega = f
            .omega
            .iter()
            .enumerate()
            .map(|(k, m)| parse_mat(m, s, &format!("omega[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let gamma = parse_mat(&f.gamma, s, "gamma")?;
        let embedding = match (&f.emb_omega, &f.emb_gamma) {
            (None, None) => None,
            (Some(eo), eg) => {
                let omega = eo
                    .iter()
                    .enumerate()
                    .map(|(k, r)| parse_row(r, s, &format!("embOmega[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                let gamma = match eg {
                    Some(g) => parse_row(g, s, "embGamma")?,
                    None => vec![Rational::default(); s],
                };
                Some(Embedding { omega, gamma })
            }
            (None, Some(_)) => return Err(Error::Parse("embGamma given without embOmega".into())),
        };
        Ok(MriTableau { name: f.name.clone(), c, omega, gamma, embedding })
    }
}

pub fn tableau_to_json(t: &MriTableau) -> String {
    serde_json::to_string_pretty(&TableauFile::from(t)).expect("tableau serializes")
}

pub fn tableau_from_json(text: &str) -> Result<MriTableau> {
    let f: TableauFile = serde_json::from_str(text)?;
    MriTableau::try_from(&f)
}

pub fn write_tableau(t: &MriTableau, path: &Path) -> Result<()> {
    std::fs::write(path, tableau_to_json(t))?;
    Ok(())
}

pub fn read_tableau(path: &Path) -> Result<MriTableau> {
    tableau_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{builtin_names, load_builtin};

    #[test]
    fn builtins_round_trip_losslessly() {
        for name in builtin_names() {
            let t = load_builtin(name).unwrap();
            let back = tableau_from_json(&tableau_to_json(&t)).unwrap();
            assert_eq!(back, t, "{name}");
        }
    }

    #[test]
    fn file_uses_fraction_strings() {
        let text = tableau_to_json(&load_builtin("imex-mri-sr21").unwrap());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["c"][1], "3/5");
        assert_eq!(v["nOmega"], 1);
        assert_eq!(v["gamma"][3][1], "-215249/226665");
        assert_eq!(v["embGamma"][0], "-31/12");
    }

    #[test]
    fn disk_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        let t = load_builtin("merk4").unwrap();
        write_tableau(&t, &p).unwrap();
        assert_eq!(read_tableau(&p).unwrap(), t);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let t = load_builtin("imex-mri-sr21").unwrap();
        let mut f = TableauFile::from(&t);
        f.c[1] = "3/0".into();
        assert!(MriTableau::try_from(&f).is_err());
        let mut f = TableauFile::from(&t);
        f.n_omega = 2;
        assert!(MriTableau::try_from(&f).is_err());
        let mut f = TableauFile::from(&t);
        f.gamma.pop();
        assert!(MriTableau::try_from(&f).is_err());
        assert!(tableau_from_json("{\"name\": 1}").is_err());
    }
}
