use super::*;
use crate::rational::{int, rat, zero};
use crate::tableau::{builtin_names, load_builtin, load_inner, Embedding};
use proptest::prelude::*;

fn sr(name: &str) -> MriTableau {
    load_builtin(name).unwrap()
}

#[test]
fn builtins_are_internally_consistent() {
    for name in builtin_names() {
        let r = check_internal_consistency(&sr(name));
        assert!(r.all_pass(), "{name}: {:?}", r.failures());
    }
}

#[test]
fn consistency_residual_reports_perturbation_exactly() {
    let mut t = sr("imex-mri-sr21");
    t.omega[0][(1, 0)] += rat(1, 1000);
    let r = check_internal_consistency(&t);
    assert_eq!(r.get("Omega0*1 - c").unwrap().residual, rat(1, 1000));
    assert!(r.get("Gamma*1").unwrap().pass());
}

#[test]
fn sr21_row_three_sums_to_c3() {
    let t = sr("imex-mri-sr21");
    assert_eq!(&t.omega[0][(2, 0)] + &t.omega[0][(2, 1)], rat(4, 15));
    assert_eq!(&t.gamma[(1, 0)] + &t.gamma[(1, 1)], zero());
}

#[test]
fn third_order_coupling() {
    for name in ["imex-mri-sr32", "imex-mri-sr43", "merk2", "merk3", "merk4", "merk5"] {
        let r = check_coupling_order(&sr(name), 3).unwrap();
        assert!(r.all_pass(), "{name}");
    }
    // n_Ω = 1 with b'c = 1/2 misses by exactly 1/12
    let r = check_coupling_order(&sr("imex-mri-sr21"), 3).unwrap();
    assert_eq!(r.conditions[0].residual, rat(1, 12));
}

#[test]
fn fourth_order_coupling() {
    for name in ["imex-mri-sr43", "merk4", "merk5"] {
        let r = check_coupling_order(&sr(name), 4).unwrap();
        assert_eq!(r.conditions.iter().filter(|c| !c.implied).count(), 6);
        assert!(r.all_pass(), "{name}: {:?}", r.failures());
    }
    assert!(!check_coupling_order(&sr("imex-mri-sr32"), 4).unwrap().all_pass());
    assert!(check_coupling_order(&sr("merk2"), 5).is_err());
}

#[test]
fn base_pair_orders() {
    let cases = [
        ("imex-mri-sr21", 2),
        ("imex-mri-sr32", 3),
        ("imex-mri-sr43", 4),
        ("merk2", 2),
        ("merk3", 3),
        ("merk4", 4),
        ("merk5", 4),
    ];
    for (name, p) in cases {
        let ark = base_ark(&sr(name));
        assert!(check_ark_order(&ark, p).all_pass(), "{name} base fails order {p}");
        if p < 4 {
            assert!(!check_ark_order(&ark, p + 1).all_pass(), "{name} base exceeds order {p}");
        }
    }
}

#[test]
fn merk5_base_is_fifth_order_as_plain_rk() {
    let ark = base_ark(&sr("merk5"));
    assert_eq!(ark.ae, ark.ai);
    assert!(check_rk_order(&ark.ae, &ark.be, 5).all_pass());
}

#[test]
fn sr21_base_is_dirk_with_repeated_diagonal() {
    let ark = base_ark(&sr("imex-mri-sr21"));
    let diag: Vec<Rational> = (0..4).map(|i| ark.ai[(i, i)].clone()).collect();
    assert_eq!(diag, vec![zero(), rat(11, 23), rat(11, 23), rat(11, 23)]);
    let merk = base_ark(&sr("merk2"));
    assert_eq!(merk.ae, merk.ai);
}

#[test]
fn sr43_base_last_gamma_row_is_zero_so_weights_coincide() {
    let ark = base_ark(&sr("imex-mri-sr43"));
    assert_eq!(ark.be, ark.bi);
}

#[test]
fn explicit_euler_fails_second_order_by_half() {
    let a = Mat::from_rows(vec![vec![zero()]]);
    let r = check_rk_order(&a, &[int(1)], 2);
    assert!(r.get("t").unwrap().pass());
    assert_eq!(r.get("t[t]").unwrap().residual, rat(-1, 2));
}

#[test]
fn ark_condition_counts() {
    let ark = base_ark(&sr("imex-mri-sr21"));
    let r = check_ark_order(&ark, 4);
    let per: Vec<usize> = (1..=4).map(|q| r.residuals_of_order(q).len()).collect();
    assert_eq!(per, vec![2, 4, 14, 52]);
}

#[test]
fn method_orders() {
    let cases = [
        ("imex-mri-sr21", 2, 2),
        ("imex-mri-sr32", 3, 3),
        ("imex-mri-sr32", 2, 2),
        ("imex-mri-sr43", 4, 4),
        ("merk2", 2, 2),
        ("merk3", 3, 3),
        ("merk4", 4, 3),
        ("merk4", 5, 4),
        ("merk5", 5, 3),
        ("merk5", 6, 4),
        ("merk5", 9, 4),
    ];
    for (name, inner, expect) in cases {
        assert_eq!(method_order(&sr(name), inner), expect, "{name} with inner order {inner}");
    }
    let mut broken = sr("imex-mri-sr21");
    broken.omega[0][(3, 0)] += int(1);
    assert_eq!(method_order(&broken, 4), 0);
}

#[test]
fn embedding_orders_and_last_gamma() {
    for (name, p, inner) in [("imex-mri-sr21", 1, 2), ("imex-mri-sr32", 2, 3), ("imex-mri-sr43", 3, 4)] {
        let t = sr(name);
        assert_eq!(embedding_order(&t, inner), Some(p), "{name}");
        assert!(t.embedding.unwrap().gamma.last().unwrap().is_zero());
    }
    assert_eq!(embedding_order(&sr("merk3"), 3), None);
}

#[test]
fn c_statistic_values() {
    let t = sr("imex-mri-sr21");
    let c = c_statistic(&t, 2).unwrap();
    assert!((c - 9.924_795_677_408_92e-2).abs() < 1e-14);
    let c32 = c_statistic(&sr("imex-mri-sr32"), 3).unwrap();
    assert!((c32 - 2.732_263_858_255_871).abs() < 1e-12);
    assert!(matches!(c_statistic(&sr("imex-mri-sr43"), 4), Err(Error::OrderUnavailable(5))));
    assert!(matches!(c_statistic(&sr("merk2"), 1), Err(Error::DegenerateEmbedding(_))));
    // an embedding equal to the primary method has identical higher-order residuals
    let mut same = sr("imex-mri-sr21");
    same.embedding = Some(Embedding {
        omega: vec![same.omega[0].row(3).to_vec()],
        gamma: same.gamma.row(3).to_vec(),
    });
    assert_eq!(c_statistic(&same, 3).unwrap(), 0.0);
    // embedding of order p has a vanishing τ̂^{(p)}
    assert!(matches!(c_statistic(&same, 2), Err(Error::DegenerateEmbedding(2))));
}

#[test]
fn gark_tree_conditions_confirm_simplified_theory() {
    let dp = load_inner("dormand-prince").unwrap();
    for name in builtin_names() {
        let t = sr(name);
        let p = method_order(&t, 5).max(if *name == "merk5" { 4 } else { 0 });
        let g = assemble_gark(&t, &dp).unwrap();
        let r = check_gark_order(&g, p);
        assert!(r.all_pass(), "{name} GARK order {p}: {:?}", r.failures().first());
    }
    for name in ["imex-mri-sr21", "imex-mri-sr32"] {
        let t = sr(name);
        let p = method_order(&t, 5);
        let g = assemble_gark(&t, &dp).unwrap();
        assert!(!check_gark_order(&g, p + 1).all_pass(), "{name} exceeds order {p}");
    }
}

fn second_order_family(c2: Rational, extra: Rational) -> MriTableau {
    // four explicit stages, c = (0, c2, c3, 1), base weights with b'1 = 1 and b'c = 1/2
    let c3 = rat(1, 3);
    let s = 4;
    let mut om = Mat::zeros(s, s);
    om[(1, 0)] = c2.clone();
    om[(2, 0)] = &c3 - &extra;
    om[(2, 1)] = extra;
    // b = (b1, b2, b3, 0): choose b3 = 1/4, then b2 c2 + c3/4 = 1/2
    let b3 = rat(1, 4);
    let b2 = (rat(1, 2) - &c3 * &b3) / &c2;
    let b1 = int(1) - &b2 - &b3;
    om[(3, 0)] = b1;
    om[(3, 1)] = b2;
    om[(3, 2)] = b3;
    MriTableau {
        name: "family".into(),
        c: vec![zero(), c2, c3, int(1)],
        omega: vec![om],
        gamma: Mat::zeros(s, s),
        embedding: None,
    }
}

proptest! {
    #[test]
    fn single_tendency_matrix_cannot_reach_third_order(
        p in 1i64..200, q in 1i64..200, ep in -50i64..50, eq in 1i64..50
    ) {
        let t = second_order_family(rat(p, q), rat(ep, eq));
        let ark = base_ark(&t);
        prop_assert!(check_ark_order(&ark, 2).all_pass());
        prop_assert!(check_internal_consistency(&t).all_pass());
        let bc = ark.be.iter().zip(&t.c).fold(zero(), |a, (b, c)| a + b * c);
        let r = check_coupling_order(&t, 3).unwrap();
        prop_assert_eq!(&r.conditions[0].residual, &(bc / int(2) - rat(1, 6)));
        prop_assert_eq!(&r.conditions[0].residual, &rat(1, 12));
    }
}
