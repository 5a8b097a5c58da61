use heun_core::hypergeom::{gamma_ratio, gauss_2f1, gauss_2f1_derivative, hyper_3f2_unit, hyper_unit, pochhammer, HyperParams2F1};
use proptest::prelude::*;

fn f(a: f64, b: f64, c: f64, z: f64) -> f64 {
    gauss_2f1(HyperParams2F1::new(a, b, c, z), 1e-16).unwrap().value
}

fn off_int() -> impl Strategy<Value = f64> {
    (0.3f64..4.5).prop_filter("away from integers", |x| (x - x.round()).abs() > 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn symmetric_in_upper_parameters(a in -2.0f64..3.0, b in -2.0f64..3.0, c in off_int(), z in 0.0f64..0.9) {
        let (x, y) = (f(a, b, c, z), f(b, a, c, z));
        prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
    }

    #[test]
    fn gauss_contiguous_in_c(a in -2.0f64..3.0, b in -2.0f64..3.0, c in off_int(), z in 0.01f64..0.9) {
        let c = c + 1.0;
        let d = gauss_2f1_derivative(HyperParams2F1::new(a, b, c, z), 1e-16).unwrap().value;
        let lhs = z * d;
        let rhs = (c - 1.0) * (f(a, b, c - 1.0, z) - f(a, b, c, z));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn euler_transform(a in -2.0f64..3.0, b in -2.0f64..3.0, c in off_int(), z in 0.0f64..0.7) {
        let lhs = f(a, b, c, z);
        let rhs = (1.0 - z).powf(c - a - b) * f(c - a, c - b, c, z);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn polynomial_case_is_finite_sum(m in 0usize..8, b in -2.0f64..3.0, c in off_int(), z in 0.0f64..1.0) {
        let a = -(m as f64);
        let terms: Vec<f64> = (0..=m)
            .map(|k| pochhammer(a, k) * pochhammer(b, k) / (pochhammer(c, k) * pochhammer(1.0, k)) * z.powi(k as i32))
            .collect();
        let direct: f64 = terms.iter().sum();
        // Alternating terms cancel; the error scales with their total mass.
        let mass: f64 = terms.iter().map(|t| t.abs()).sum();
        let v = f(a, b, c, z);
        prop_assert!((v - direct).abs() <= 1e-13 * mass);
    }

    #[test]
    fn gauss_theorem_at_one(a in -1.5f64..2.5, b in -1.5f64..2.5, s in 0.6f64..3.0) {
        let c = a + b + s;
        prop_assume!(c > 0.05);
        let closed = gamma_ratio(&[c, s], &[c - a, c - b]).unwrap();
        let series = hyper_unit(&[a, b], &[c], 1e-13).unwrap().value;
        prop_assert!((closed - series).abs() <= 1e-8 * closed.abs().max(1e-3));
    }

    #[test]
    fn pfaff_saalschutz(n in 1usize..6, a in 0.2f64..2.0, b in 0.2f64..2.0, c in 0.3f64..3.0) {
        let d = 1.0 + a + b - c - n as f64;
        prop_assume!((d - d.round()).abs() > 0.05 || d > 0.0);
        let closed = pochhammer(c - a, n) * pochhammer(c - b, n) / (pochhammer(c, n) * pochhammer(c - a - b, n));
        let v = hyper_3f2_unit([-(n as f64), a, b], [c, d], 1e-14).unwrap().value;
        // Near-pole lower parameters make the terms large and cancelling.
        let mass: f64 = (0..=n)
            .map(|k| {
                (pochhammer(-(n as f64), k) * pochhammer(a, k) * pochhammer(b, k)
                    / (pochhammer(c, k) * pochhammer(d, k) * pochhammer(1.0, k)))
                .abs()
            })
            .sum();
        prop_assert!((v - closed).abs() <= 1e-13 * mass.max(closed.abs()).max(1.0));
    }
}
