use std::f64::consts::PI;

use proptest::prelude::*;
use statrs::function::beta::beta;
use subcrit::bubble::{
    alpha_n, compute_constants, critical_exponent, eval_bubble, eval_bubble_gradient, sphere_area, BubbleParams,
    QuadSettings,
};

/// `∫_0^∞ r^a (1+r²)^{-q} dr = ½ B((a+1)/2, q−(a+1)/2)`.
fn beta_moment(a: f64, q: f64) -> f64 {
    0.5 * beta((a + 1.0) / 2.0, q - (a + 1.0) / 2.0)
}

#[test]
fn n3_integrals_match_closed_forms() {
    let t = compute_constants(3, &QuadSettings::default()).unwrap();
    let i6 = 3f64.powf(1.5) * PI * PI / 4.0;
    let i5 = 3f64.powf(1.25) * 4.0 * PI / 3.0;
    assert!((t.int_u_crit - i6).abs() < 1e-10 * i6);
    assert!((t.int_u_crit_minus_one - i5).abs() < 1e-10 * i5);
    assert!((t.omega - 2.136832).abs() < 1e-6);
    assert!((t.c_small - 1.0 / 128.0).abs() < 1e-13);
    assert!((t.c_big - 5.0 / 6.0 * i6).abs() < 1e-10);
    assert!((t.bubble_energy - i6 / 3.0).abs() < 1e-10);
    assert!(t.quad_error < 1e-9);
}

#[test]
fn gradient_energy_equals_potential_energy() {
    for n in 3..=7 {
        let t = compute_constants(n, &QuadSettings::default()).unwrap();
        assert!(
            (t.int_grad_sq - t.int_u_crit).abs() < 1e-10 * t.int_u_crit,
            "N={n}: {} vs {}",
            t.int_grad_sq,
            t.int_u_crit
        );
        let ps = critical_exponent(n);
        assert!((t.c_big - (1.0 - 1.0 / ps) * ps * t.omega).abs() < 1e-10 * t.c_big);
        assert_eq!(t.alpha_n, alpha_n(n));
    }
}

#[test]
fn beta_function_oracle_all_dimensions() {
    for n in 3..=8 {
        let nf = n as f64;
        let t = compute_constants(n, &QuadSettings::default()).unwrap();
        let ps = critical_exponent(n);
        let sigma = sphere_area(n);
        let a = alpha_n(n);
        let crit = sigma * a.powf(ps) * beta_moment(nf - 1.0, nf);
        let crit1 = sigma * a.powf(ps - 1.0) * beta_moment(nf - 1.0, (nf + 2.0) / 2.0);
        assert!((t.int_u_crit - crit).abs() < 1e-9 * crit, "N={n}");
        assert!((t.int_u_crit_minus_one - crit1).abs() < 1e-9 * crit1, "N={n}");
        let bound = if n <= 4 { 1e-9 } else { 1e-11 * t.gamma.abs().max(t.int_u_crit) };
        assert!(t.quad_error < bound, "N={n}: {}", t.quad_error);
    }
}

#[test]
fn log_moment_against_digamma_oracle() {
    // ∫ r^{N−1}(1+r²)^{−N} log(1+r²) dr = −d/dq of the Beta moment at q = N,
    // = ½ B(N/2, N/2) (ψ(N) − ψ(N/2)).
    use statrs::function::gamma::digamma;
    for n in 3..=6 {
        let nf = n as f64;
        let t = compute_constants(n, &QuadSettings::default()).unwrap();
        let ps = critical_exponent(n);
        let sigma = sphere_area(n);
        let a = alpha_n(n);
        let m0 = beta_moment(nf - 1.0, nf);
        let ml = 0.5 * beta(nf / 2.0, nf / 2.0) * (digamma(nf) - digamma(nf / 2.0));
        let expected = sigma * a.powf(ps) * (a.ln() * m0 - 0.5 * (nf - 2.0) * ml);
        assert!(
            (t.int_u_crit_log_u - expected).abs() < 1e-9 * expected.abs(),
            "N={n}: {} vs {expected}",
            t.int_u_crit_log_u
        );
        let gamma = t.int_u_crit / (ps * ps) - expected / ps + 0.5 * t.omega * t.c_small.ln();
        assert!((t.gamma - gamma).abs() < 1e-9);
    }
}

#[test]
fn rejects_low_dimension() {
    assert!(compute_constants(2, &QuadSettings::default()).is_err());
}

#[test]
fn constants_json_schema() {
    let t = compute_constants(3, &QuadSettings::default()).unwrap();
    let v: serde_json::Value = serde_json::to_value(&t).unwrap();
    for key in ["N", "alphaN", "CN", "cN", "omegaN", "gammaN", "quad_error"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn bubble_solves_limiting_equation_at_second_order() {
    // 7-point Laplacian residual of −ΔU − U^{2*−1} should shrink by ~4 per halving.
    let p = BubbleParams::new(3, 1.0, 1.0, vec![0.1, -0.2, 0.05]).unwrap();
    let x = [0.7, 0.3, -0.4];
    let residual = |h: f64| {
        let mut lap = -6.0 * eval_bubble(&p, &x).unwrap();
        for d in 0..3 {
            for s in [-1.0, 1.0] {
                let mut y = x;
                y[d] += s * h;
                lap += eval_bubble(&p, &y).unwrap();
            }
        }
        lap /= h * h;
        (-lap - eval_bubble(&p, &x).unwrap().powi(5)).abs()
    };
    let r1 = residual(0.02);
    let r2 = residual(0.01);
    let order = (r1 / r2).log2();
    assert!((order - 2.0).abs() < 0.2, "order {order}");
}

fn finite_difference_gradient(p: &BubbleParams, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|d| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[d] += h;
            b[d] -= h;
            (eval_bubble(p, &a).unwrap() - eval_bubble(p, &b).unwrap()) / (2.0 * h)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences(
        x in prop::array::uniform3(-2.0f64..2.0),
        eps in 0.05f64..1.0,
        lambda in 0.5f64..2.0,
    ) {
        let p = BubbleParams::new(3, eps, lambda, vec![0.0; 3]).unwrap();
        let g = eval_bubble_gradient(&p, &x).unwrap();
        let fd = finite_difference_gradient(&p, &x, 1e-5);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-8);
        prop_assert!(err <= 1e-6 * norm, "err {err} norm {norm}");
    }

    #[test]
    fn gradient_points_toward_center(x in prop::array::uniform4(-3.0f64..3.0), c in prop::array::uniform4(-1.0f64..1.0)) {
        let p = BubbleParams::new(4, 0.3, 1.2, c.to_vec()).unwrap();
        let g = eval_bubble_gradient(&p, &x).unwrap();
        let dot: f64 = g.iter().zip(c.iter().zip(&x)).map(|(gi, (ci, xi))| gi * (ci - xi)).sum();
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dn = c.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!((dot - gn * dn).abs() <= 1e-10 * (gn * dn).max(1e-300));
    }

    #[test]
    fn profile_is_positive_and_radially_decreasing(r1 in 0.0f64..50.0, dr in 1e-3f64..10.0, n in 3usize..7) {
        let p = BubbleParams::new(n, 0.5, 1.0, vec![0.0; n]).unwrap();
        let mut x1 = vec![0.0; n];
        let mut x2 = vec![0.0; n];
        x1[0] = r1;
        x2[0] = r1 + dr;
        let u1 = eval_bubble(&p, &x1).unwrap();
        let u2 = eval_bubble(&p, &x2).unwrap();
        prop_assert!(u1 > u2 && u2 > 0.0);
    }
}
