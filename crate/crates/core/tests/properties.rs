//! Randomized structural properties: homogeneity, bilinearity, translation
//! invariance and the monotone behaviour of the weights.

use cmlab_core::harness::{FamilyKind, FamilyParams, TestFamily};
use cmlab_core::multipliers::{apply_bilinear, BilinearSymbol};
use cmlab_core::paraproducts::{pi, ParaproductConfig, ParaproductSpec};
use cmlab_core::spaces::{bmo_norm, lp_norm, BMO_norm};
use cmlab_core::weights::{make_log_weight, RegularizedWeight};
use cmlab_core::{Complex64, Grid, SampledField};
use proptest::prelude::*;

fn field(kind: usize, seed: u64) -> SampledField {
    let grid = Grid::line(128).unwrap();
    TestFamily::new(FamilyKind::ALL[kind % FamilyKind::ALL.len()], seed).generate(&grid, &FamilyParams::default())
}

fn shift(f: &SampledField, by: usize) -> SampledField {
    let v = f.values();
    let n = v.len();
    SampledField::new(*f.grid(), (0..n).map(|i| v[(i + by) % n]).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_norm_is_homogeneous(kind in 0usize..8, seed in any::<u64>(), c in -50.0f64..50.0, p in 1.0f64..6.0) {
        let f = field(kind, seed);
        let lhs = lp_norm(&f.scale(Complex64::new(c, 0.0)), p);
        prop_assert!((lhs - c.abs() * lp_norm(&f, p)).abs() <= 1e-12 * lhs.max(1e-300));
    }

    #[test]
    fn bmo_norms_ignore_constants_and_half_period_shifts(kind in 0usize..8, seed in any::<u64>(), c in -5.0f64..5.0) {
        let f = field(kind, seed);
        let g = f.add(&SampledField::constant(*f.grid(), Complex64::new(c, 0.0)));
        let b = BMO_norm(&f);
        prop_assert!((BMO_norm(&g) - b).abs() <= 1e-10 * b.max(1.0));
        // a half-period shift maps the dyadic and half-shifted cubes onto themselves
        let s = shift(&f, 64);
        prop_assert!((BMO_norm(&s) - b).abs() <= 1e-10 * b.max(1.0));
        prop_assert!(bmo_norm(&f) >= b - 1e-12);
    }

    #[test]
    fn paraproduct_is_bilinear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (f1, f2, g) = (field(0, seed), field(5, seed ^ 1), field(6, seed ^ 2));
        let spec = ParaproductSpec::for_grid(f1.grid(), ParaproductConfig::default());
        let (ca, cb) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
        let lhs = pi(&spec, &f1.scale(ca).add(&f2.scale(cb)), &g);
        let rhs = pi(&spec, &f1, &g).scale(ca).add(&pi(&spec, &f2, &g).scale(cb));
        prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-10 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn bilinear_multipliers_commute_with_translation(seed in any::<u64>(), by in 0usize..128, which in 0usize..3) {
        let sigma = BilinearSymbol::builtin(["one", "riesz-ratio", "kato-ponce-b1"][which]).unwrap();
        let (f, g) = (field(1, seed), field(7, seed.wrapping_add(9)));
        let lhs = apply_bilinear(&sigma, &shift(&f, by), &shift(&g, by));
        let rhs = shift(&apply_bilinear(&sigma, &f, &g), by);
        prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-10 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn log_weights_are_monotone(b in -2.0f64..2.0, t in 1e-6f64..1.0, r in 0.5f64..2048.0) {
        let w = make_log_weight(b);
        let (near, far) = (w.eval(t), w.eval(t / 2.0));
        if b >= 0.0 { prop_assert!(far >= near) } else { prop_assert!(far <= near) }
        prop_assert_eq!(w.eval(1.0 + t), 1.0);
        let rw = RegularizedWeight::log(b);
        let (lo, hi) = rw.equivalence();
        let ratio = rw.eval(r) / rw.reference(r);
        prop_assert!(ratio >= lo * (1.0 - 1e-12) && ratio <= hi * (1.0 + 1e-12));
    }
}
