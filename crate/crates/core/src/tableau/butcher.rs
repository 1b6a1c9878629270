use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{self, int, parse_fraction, Rational};

/// Explicit Runge–Kutta table with optional embedded weights, in exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTable {
    pub name: String,
    pub a: Mat<Rational>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    pub b_hat: Option<Vec<Rational>>,
    pub order: usize,
    pub emb_order: Option<usize>,
}

const INNER: [&str; 7] = ["heun", "bogacki-shampine", "zonneveld", "dormand-prince", "cash-karp", "fehlberg", "rk4"];

pub fn inner_names() -> &'static [&'static str] {
    &INNER
}

fn q(s: &str) -> Rational {
    parse_fraction(s).expect("builtin coefficient")
}

fn vector(entries: &str) -> Vec<Rational> {
    entries.split_whitespace().map(q).collect()
}

fn table(
    name: &str,
    rows: &[&str],
    b: &str,
    b_hat: Option<&str>,
    order: usize,
    emb_order: Option<usize>,
) -> ButcherTable {
    let s = rows.len() + 1;
    let mut a = Mat::zeros(s, s);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.split_whitespace().enumerate() {
            a[(i + 1, j)] = q(v);
        }
    }
    let c = (0..s)
        .map(|i| a.row(i).iter().fold(rational::zero(), |acc, x| acc + x))
        .collect();
    ButcherTable {
        name: name.into(),
        a,
        b: vector(b),
        c,
        b_hat: b_hat.map(vector),
        order,
        emb_order,
    }
}

/// Loads a shipped inner method by name.
pub fn load_inner(name: &str) -> Result<ButcherTable> {
    let key = name.trim().to_ascii_lowercase().replace('_', "-");
    Ok(match key.as_str() {
        "heun" | "heun-euler" => table("heun", &["1"], "1/2 1/2", Some("1 0"), 2, Some(1)),
        "bogacki-shampine" | "bs3" => table(
            "bogacki-shampine",
            &["1/2", "0 3/4", "2/9 1/3 4/9"],
            "2/9 1/3 4/9 0",
            Some("7/24 1/4 1/3 1/8"),
            3,
            Some(2),
        ),
        "zonneveld" => table(
            "zonneveld",
            &["1/2", "0 1/2", "0 0 1", "5/32 7/32 13/32 -1/32"],
            "1/6 1/3 1/3 1/6 0",
            Some("-1/2 7/3 7/3 13/6 -16/3"),
            4,
            Some(3),
        ),
        "dormand-prince" | "dopri5" => table(
            "dormand-prince",
            &[
                "1/5",
                "3/40 9/40",
                "44/45 -56/15 32/9",
                "19372/6561 -25360/2187 64448/6561 -212/729",
                "9017/3168 -355/33 46732/5247 49/176 -5103/18656",
                "35/384 0 500/1113 125/192 -2187/6784 11/84",
            ],
            "35/384 0 500/1113 125/192 -2187/6784 11/84 0",
            Some("5179/57600 0 7571/16695 393/640 -92097/339200 187/2100 1/40"),
            5,
            Some(4),
        ),
        "cash-karp" => table(
            "cash-karp",
            &[
                "1/5",
                "3/40 9/40",
                "3/10 -9/10 6/5",
                "-11/54 5/2 -70/27 35/27",
                "1631/55296 175/512 575/13824 44275/110592 253/4096",
            ],
            "37/378 0 250/621 125/594 0 512/1771",
            Some("2825/27648 0 18575/48384 13525/55296 277/14336 1/4"),
            5,
            Some(4),
        ),
        "fehlberg" | "rkf45" => table(
            "fehlberg",
            &[
                "1/4",
                "3/32 9/32",
                "1932/2197 -7200/2197 7296/2197",
                "439/216 -8 3680/513 -845/4104",
                "-8/27 2 -3544/2565 1859/4104 -11/40",
            ],
            "16/135 0 6656/12825 28561/56430 -9/50 2/55",
            Some("25/216 0 1408/2565 2197/4104 -1/5 0"),
            5,
            Some(4),
        ),
        "rk4" => table("rk4", &["1/2", "0 1/2", "0 0 1"], "1/6 1/3 1/3 1/6", None, 4, None),
        _ => return Err(Error::UnknownInner(name.to_string())),
    })
}

impl ButcherTable {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Checks shape, explicitness, `c = A·1` and `Σ b = 1`.
    pub fn validate(&self) -> Result<()> {
        let s = self.stages();
        let bad = |m: String| Err(Error::InvalidTableau(format!("{}: {m}", self.name)));
        if self.a.nrows() != s || self.a.ncols() != s || self.c.len() != s {
            return bad("inconsistent dimensions".into());
        }
        if self.b_hat.as_ref().is_some_and(|bh| bh.len() != s) {
            return bad("embedded weights have wrong length".into());
        }
        for i in 0..s {
            if self.a.row(i)[i..].iter().any(|v| !v.is_zero()) {
                return bad(format!("row {} is not explicit", i + 1));
            }
            let rs = self.a.row(i).iter().fold(rational::zero(), |acc, x| acc + x);
            if rs != self.c[i] {
                return bad(format!("c[{}] differs from the row sum of A", i + 1));
            }
        }
        let sb = self.b.iter().fold(rational::zero(), |acc, x| acc + x);
        if sb != int(1) {
            return bad("weights do not sum to one".into());
        }
        Ok(())
    }

    /// The table of `n` uniform steps of this method taken as a single step.
    pub fn composite(&self, n: usize) -> ButcherTable {
        assert!(n >= 1);
        let s = self.stages();
        let inv = rational::rat(1, n as i64);
        let mut a = Mat::zeros(n * s, n * s);
        for p in 0..n {
            for i in 0..s {
                for q in 0..p {
                    for j in 0..s {
                        a[(p * s + i, q * s + j)] = &self.b[j] * &inv;
                    }
                }
                for j in 0..s {
                    a[(p * s + i, p * s + j)] = &self.a[(i, j)] * &inv;
                }
            }
        }
        let c = (0..n)
            .flat_map(|p| self.c.iter().map(move |ci| (ci + int(p as i64)) * rational::rat(1, n as i64)))
            .collect();
        let b = (0..n).flat_map(|_| self.b.iter().map(|x| x * &inv)).collect();
        ButcherTable {
            name: format!("{}x{n}", self.name),
            a,
            b,
            c,
            b_hat: None,
            order: self.order,
            emb_order: None,
        }
    }

    pub fn to_f64(&self) -> ExplicitRk {
        let s = self.stages();
        ExplicitRk {
            name: self.name.clone(),
            a: (0..s).map(|i| self.a.row(i)[..i].iter().map(rational::to_f64).collect()).collect(),
            b: self.b.iter().map(rational::to_f64).collect(),
            c: self.c.iter().map(rational::to_f64).collect(),
            d: self.b_hat.as_ref().map(|bh| {
                self.b.iter().zip(bh).map(|(b, bh)| rational::to_f64(&(b - bh))).collect()
            }),
            order: self.order,
            emb_order: self.emb_order,
        }
    }
}

/// Floating-point explicit RK method used for the fast solves.
#[derive(Debug, Clone)]
pub struct ExplicitRk {
    pub name: String,
    /// Strictly lower part of `A`, row `i` has `i` entries.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// `b − b̂`, the error weights, when embedded.
    pub d: Option<Vec<f64>>,
    pub order: usize,
    pub emb_order: Option<usize>,
}

impl ExplicitRk {
    pub fn stages(&self) -> usize {
        self.b.len()
    }
}
