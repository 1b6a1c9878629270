use super::{merk, Embedding, MriTableau};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{parse_fraction, Rational};

const NAMES: [&str; 7] = [
    "imex-mri-sr21",
    "imex-mri-sr32",
    "imex-mri-sr43",
    "merk2",
    "merk3",
    "merk4",
    "merk5",
];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// Inner method paired with each builtin by default (same order as the outer method).
pub fn default_inner(name: &str) -> Option<&'static str> {
    Some(match canonical(name)? {
        "imex-mri-sr21" | "merk2" => "heun",
        "imex-mri-sr32" | "merk3" => "bogacki-shampine",
        "imex-mri-sr43" | "merk4" => "zonneveld",
        "merk5" => "cash-karp",
        _ => return None,
    })
}

fn canonical(name: &str) -> Option<&'static str> {
    let lower = name.trim().to_ascii_lowercase();
    let key = lower.strip_prefix("imex-mri-").unwrap_or(&lower);
    let key = key.replace(['(', ')'], "");
    Some(match key.as_str() {
        "sr21" => "imex-mri-sr21",
        "sr32" => "imex-mri-sr32",
        "sr43" => "imex-mri-sr43",
        "merk2" => "merk2",
        "merk3" => "merk3",
        "merk4" => "merk4",
        "merk5" => "merk5",
        _ => return None,
    })
}

/// Loads one of the shipped methods. Accepts `imex-mri-sr21` or the short `sr21`.
pub fn load_builtin(name: &str) -> Result<MriTableau> {
    let key = canonical(name).ok_or_else(|| Error::UnknownMethod(name.to_string()))?;
    Ok(match key {
        "imex-mri-sr21" => sr21(),
        "imex-mri-sr32" => sr32(),
        "imex-mri-sr43" => sr43(),
        "merk2" => merk::merk2(),
        "merk3" => merk::merk3(),
        "merk4" => merk::merk4(),
        "merk5" => merk::merk5(),
        _ => unreachable!(),
    })
}

fn q(s: &str) -> Rational {
    parse_fraction(s).expect("builtin coefficient")
}

fn vector(entries: &str) -> Vec<Rational> {
    entries.split_whitespace().map(q).collect()
}

/// Lower-triangular matrix from ragged rows; missing entries are zero.
fn lower(s: usize, rows: &[&str]) -> Mat<Rational> {
    assert_eq!(rows.len(), s);
    let mut m = Mat::zeros(s, s);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.split_whitespace().enumerate() {
            m[(i, j)] = q(v);
        }
    }
    m
}

fn sr21() -> MriTableau {
    let s = 4;
    MriTableau {
        name: "imex-mri-sr21".into(),
        c: vector("0 3/5 4/15 1"),
        omega: vec![lower(s, &["0", "3/5", "14/165 2/11", "-13/54 137/270 11/15"])],
        gamma: lower(
            s,
            &[
                "0",
                "-11/23 11/23",
                "-6692/52371 -18355/52371 11/23",
                "11621/90666 -215249/226665 17287/50370 11/23",
            ],
        ),
        embedding: Some(Embedding {
            omega: vec![vector("-1/4 1/2 3/4 0")],
            gamma: vector("-31/12 -1/6 11/4 0"),
        }),
    }
}

fn sr32() -> MriTableau {
    let s = 5;
    MriTableau {
        name: "imex-mri-sr32".into(),
        c: vector("0 23/34 4/5 17/15 1"),
        omega: vec![
            lower(
                s,
                &[
                    "0",
                    "23/34",
                    "71/70 -3/14",
                    "124/1155 4/7 5/11",
                    "162181/187680 119/1380 11/32 -5/17",
                ],
            ),
            lower(
                s,
                &[
                    "0",
                    "0",
                    "-14453/63825 14453/63825",
                    // the (4,2) sign is positive; the row must sum to zero
                    "-2101267877/1206582300 2476735438/301645575 -13575085/2098404",
                    "-762580446799/588660102960 11083240219/4328383110 -211274129/100368304 89562055/106641323",
                ],
            ),
        ],
        gamma: lower(
            s,
            &[
                "0",
                "-4/7 4/7",
                "-2707004/3127425 919904/3127425 4/7",
                "852879271/703839675 -1575000496/703839675 5/11 4/7",
                "43136869/2019912118 -73810600/1009956059 -17653551/87822266 -13993902/43911133 4/7",
            ],
        ),
        embedding: Some(Embedding {
            omega: vec![
                vector("76355/74834 -46/31 67/34 -36/71 0"),
                vector("-3732974/2278035 13857574/2278035 -52/9 4/3 0"),
            ],
            gamma: vector("-179/4140 799/14490 1/14 -1/12 0"),
        }),
    }
}

fn sr43() -> MriTableau {
    let s = 7;
    MriTableau {
        name: "imex-mri-sr43".into(),
        c: vector("0 1/4 3/4 11/20 1/2 1 1"),
        omega: vec![
            lower(
                s,
                &[
                    "0",
                    "1/4",
                    "9/8 -3/8",
                    "187/2340 7/9 -4/13",
                    "64/165 1/6 -3/5 6/11",
                    "1816283/549120 -2/9 -4/11 -1/6 -2561809/1647360",
                    "0 7/11 -2203/264 10825/792 -85/12 841/396",
                ],
            ),
            lower(
                s,
                &[
                    "0",
                    "0",
                    "-11/4 11/4",
                    "-1228/2925 -92/225 808/975",
                    "-2572/2805 167/255 199/136 -1797/1496",
                    "-1816283/274560 253/36 -23/44 76/3 -20775791/823680",
                    "0 107/132 1289/88 -9275/792 0 -371/99",
                ],
            ),
        ],
        gamma: lower(
            s,
            &[
                "0",
                "-1/4 1/4",
                "1/4 -1/2 1/4",
                "13/100 -7/30 -11/75 1/4",
                "6/85 -301/1360 -99/544 45/544 1/4",
                "0 -9/4 -19/48 -75/16 85/12 1/4",
                "0",
            ],
        ),
        embedding: Some(Embedding {
            omega: vec![
                vector("1/400 49/12 43/6 -7/10 -85/12 -2963/1200 0"),
                vector("-1/200 -137/24 -235/16 1237/80 0 2963/600 0"),
            ],
            gamma: vector("0 0 0 0 0 0 0"),
        }),
    }
}
