use proptest::prelude::*;

use hardedge::config::ExperimentConfig;
use hardedge::micro::micro_model;
use hardedge::num::{cabs, cf, cone, cpow, cr, dec, to_f64};
use hardedge::oracle::rate_fit;
use hardedge::parametrix::{OuterPsi, SzegoFunction};
use hardedge::predict::{cd_part, mixed_zeros};
use hardedge::spectral::build_critical_potential;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn rate_fit_recovers_power_laws(s in -3.0f64..1.0, c in 1e-3f64..1e3, n0 in 4.0f64..100.0) {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| {
            let n = n0 * 2f64.powi(i);
            (n, c * n.powf(s))
        }).collect();
        let f = rate_fit(&pts).unwrap();
        prop_assert!((f.slope - s).abs() < 1e-9);
        prop_assert!(f.residual < 1e-9);
    }

    #[test]
    fn szego_jump_holds_on_the_cut(a in 0.5f64..2.0, w in 0.5f64..3.0, alpha in -0.9f64..2.0, u in 0.01f64..0.99) {
        let cp = build_critical_potential(a, a + w, 1.0, 1).unwrap();
        let sz = SzegoFunction::new(&cp, dec(alpha));
        let x = dec(a + w * u);
        let prod = sz.boundary(x, true).unwrap() * sz.boundary(x, false).unwrap();
        let xa = cpow(cr(x), dec(alpha));
        prop_assert!(to_f64(cabs(prod - xa) / cabs(xa)) < 1e-50);
    }

    #[test]
    fn outer_parametrix_is_unimodular(k in 0i64..4, r in 0i64..2, re in -3.0f64..6.0, im in 0.2f64..3.0, lower in any::<bool>()) {
        let cp = build_critical_potential(1.0, 3.0, 1.0, 1).unwrap();
        let o = OuterPsi::new(&cp, dec(0.5), k, r);
        let z = cf(re, if lower { -im } else { im });
        let d = o.eval(z).unwrap().det();
        prop_assert!(to_f64(cabs(d - cone())) < 1e-50);
    }

    #[test]
    fn cd_kernel_is_symmetric(k in 1usize..4, x in 0.05f64..8.0, y in 0.05f64..8.0) {
        let m = micro_model(0.5, 1, &[], 4).unwrap();
        let a = cd_part(&m, k, cf(x, 0.0), cf(y, 0.0));
        let b = cd_part(&m, k, cf(y, 0.0), cf(x, 0.0));
        prop_assert!(to_f64(cabs(a - b)) <= 1e-40 * (1.0 + to_f64(cabs(a))));
    }

    #[test]
    fn mixed_zeros_interlace(k in 1usize..4, c in 1e-3f64..1e3) {
        let m = micro_model(0.5, 1, &[], 4).unwrap();
        let mixed = mixed_zeros(&m, k, dec(c));
        let low = m.zeros(k - 1).unwrap();
        let high = m.zeros(k).unwrap();
        prop_assert_eq!(mixed.len(), k);
        for (i, z) in mixed.iter().enumerate() {
            prop_assert!(*z > high[i]);
            if i + 1 < k {
                prop_assert!(*z < low[i]);
            }
        }
    }

    #[test]
    fn config_round_trips(a in 0.1f64..5.0, w in 0.1f64..5.0, kappa in -2.0f64..3.4, nu in 1u32..5, alpha in -0.9f64..3.0) {
        let mut c = ExperimentConfig::default();
        c.spectral.a = a;
        c.spectral.b = a + w;
        c.spectral.nu = nu;
        c.regime.kappa = kappa;
        c.micro.alpha = alpha;
        c.validate().unwrap();
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}
