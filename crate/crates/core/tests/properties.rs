use std::sync::Arc;

use proptest::prelude::*;
use qcoh::cech::{cech_complex, structure_module, OpenSubset, SectionsModule};
use qcoh::graded::{actions_commute, DegreewiseModule, FPGradedModule, Module, Relation};
use qcoh::linalg::{FieldSpec, Mat};
use qcoh::matlis::matlis_dual;
use qcoh::poly::{HomogPoly, PolyRing};

fn fields() -> [FieldSpec; 2] {
    [FieldSpec::Rationals, FieldSpec::prime(7).unwrap()]
}

fn mat(field: FieldSpec, rows: &[Vec<i64>], cols: usize) -> Mat {
    Mat::from_rows(field, cols, rows.iter().map(|r| r.iter().map(|&v| field.from_i64(v)).collect()).collect())
}

fn matrix_strategy() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| (Just(c), prop::collection::vec(prop::collection::vec(-3i64..=3, c), r)))
}

fn ring(field: FieldSpec) -> Arc<PolyRing> {
    PolyRing::new(field, &["x", "y"]).unwrap()
}

/// A homogeneous polynomial of degree `d` in `x, y` with coefficients in `-2..=2`.
fn poly(r: &PolyRing, d: i64, coeffs: &[i64]) -> HomogPoly {
    if d < 0 {
        return HomogPoly::zero(d);
    }
    let f = r.field();
    let terms = (0..=d as u32).map(|i| (vec![d as u32 - i, i], f.from_i64(coeffs[i as usize % coeffs.len()]))).collect();
    HomogPoly::from_terms(r, terms).unwrap()
}

#[derive(Clone, Debug)]
struct Presentation {
    gens: Vec<i64>,
    relations: Vec<(i64, Vec<Vec<i64>>)>,
}

fn presentation_strategy() -> impl Strategy<Value = Presentation> {
    (prop::collection::vec(0i64..=2, 1..=3), prop::collection::vec((0i64..=3, prop::collection::vec(prop::collection::vec(-2i64..=2, 4), 3)), 0..=3))
        .prop_map(|(gens, relations)| Presentation { gens, relations })
}

fn build(r: &Arc<PolyRing>, p: &Presentation) -> Arc<FPGradedModule> {
    let top = *p.gens.iter().max().unwrap();
    let relations = p
        .relations
        .iter()
        .filter_map(|(extra, coeffs)| {
            let deg = (top + extra).min(3).max(top);
            let entries = p.gens.iter().enumerate().map(|(i, &e)| poly(r, deg - e, &coeffs[i])).collect();
            Relation::new(&p.gens, entries).unwrap()
        })
        .collect();
    FPGradedModule::new(r.clone(), "M", p.gens.clone(), relations)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rref_is_idempotent((cols, rows) in matrix_strategy()) {
        for f in fields() {
            let a = mat(f, &rows, cols);
            let (r, pivots) = a.rref();
            let (rr, pivots2) = r.rref();
            prop_assert_eq!(&rr, &r);
            prop_assert_eq!(pivots, pivots2);
        }
    }

    #[test]
    fn rank_nullity((cols, rows) in matrix_strategy()) {
        for f in fields() {
            let a = mat(f, &rows, cols);
            let k = a.kernel_basis();
            prop_assert_eq!(a.rank() + k.cols(), cols);
            prop_assert!(a.mul(&k).is_zero());
            prop_assert_eq!(k.rank(), k.cols());
            prop_assert_eq!(a.transpose().rank(), a.rank());
        }
    }

    #[test]
    fn free_module_hilbert_function(gens in prop::collection::vec(-3i64..=3, 1..=4), d in -6i64..=8) {
        let r = ring(FieldSpec::Rationals);
        let m = FPGradedModule::free(r, "F", gens.clone());
        let expected: usize = gens.iter().map(|&e| (d - e + 1).max(0) as usize).sum();
        prop_assert_eq!(m.dim(d), expected);
    }

    #[test]
    fn hypersurface_hilbert_function(k in 1i64..=3, coeffs in prop::collection::vec(-2i64..=2, 4), d in 0i64..=8) {
        let r = ring(FieldSpec::Rationals);
        let p = poly(&r, k, &coeffs);
        prop_assume!(!p.is_zero());
        let m = FPGradedModule::cyclic(r, "R/(p)", 0, vec![p]);
        prop_assert_eq!(m.dim(d) as i64, (d + 1) - (d - k + 1).max(0));
    }

    #[test]
    fn actions_commute_on_constructed_modules(p in presentation_strategy()) {
        for f in fields() {
            let r = ring(f);
            let m: Module = build(&r, &p);
            prop_assert!(actions_commute(m.as_ref(), -2, 5));
            let dual: Module = matlis_dual(&m);
            prop_assert!(actions_commute(dual.as_ref(), -6, 1));
        }
    }

    #[test]
    fn biduality_of_random_presentations(p in presentation_strategy()) {
        let r = ring(FieldSpec::Rationals);
        let m: Module = build(&r, &p);
        let dd = matlis_dual(&(matlis_dual(&m) as Module));
        for d in -1..=5 {
            prop_assert_eq!(dd.dim(d), m.dim(d));
            for v in 0..2 {
                prop_assert_eq!(dd.act(v, d), m.act(v, d));
            }
        }
    }
}

#[test]
fn sections_modules_have_commuting_actions() {
    let r = ring(FieldSpec::Rationals);
    let w = OpenSubset::new(r.clone(), vec![r.var(0), r.var(1)]).unwrap();
    for m in [structure_module(&r).as_module(), FPGradedModule::cyclic(r.clone(), "R/(y)", 0, vec![r.var(1)]).as_module()] {
        let s = SectionsModule::new(cech_complex(&m, &w, 8));
        assert!(actions_commute(s.as_ref(), -4, 3));
    }
}
