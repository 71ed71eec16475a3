use std::f64::consts::PI;

use subcrit::green::AxisGreen;
use subcrit::reduced::{
    bounds_report, find_t0_r0, log_plus, mu_embed, psi_k, Configuration, T0R0Options,
};
use subcrit::saddle::{
    coercivity_scan, fallback_starts, hessian_psi_k, hessian_psi_tilde, inertia, k0_start, multi_start, solve_critical_point,
    solve_saddle, verify_bounds, CoercivityOptions, Method, SaddleOptions,
};
use subcrit::Error;

fn unit_axis() -> AxisGreen {
    AxisGreen::unit(3).unwrap()
}

fn k0(axis: &AxisGreen) -> (Configuration, f64, f64) {
    let found = find_t0_r0(axis, &T0R0Options::default()).unwrap();
    (k0_start(found.t0, found.r0).unwrap(), found.t0, found.r0)
}

#[test]
fn saddle_from_k0_start() {
    let axis = unit_axis();
    let (start, t0, r0) = k0(&axis);
    let r = solve_saddle(&axis, &start, &SaddleOptions::default()).unwrap();
    assert!(r.grad_norm <= 1e-8);
    assert!(r.iterations <= 50);
    assert!(r.config.in_m(&axis));
    assert!(r.config.lambda.iter().all(|l| *l > 0.0));
    for id in &r.identities {
        assert!((id - 1.0).abs() < 1e-6, "{:?}", r.identities);
    }
    let sum: f64 = r.identities.iter().sum();
    assert!((sum - 4.0).abs() < 1e-5);
    assert!(r.inertia[0] >= 1 && r.inertia[1] >= 1, "{:?}", r.inertia);
    assert_eq!(r.inertia, [7, 1, 0]);
    assert!(r.warnings.is_empty());
    assert!((r.value + 0.8522695).abs() < 1e-6, "{}", r.value);
    let b = bounds_report(&axis, t0, r0).unwrap();
    assert!(verify_bounds(&r, &b));
    // Every iterate stayed ordered, and the trace starts at the initial point.
    assert_eq!(r.trace.len(), r.iterations + 1);
    assert!(r.trace.last().unwrap().grad_norm <= 1e-8);
}

#[test]
fn saddle_reached_from_every_k0_radius() {
    let axis = unit_axis();
    let mut values = Vec::new();
    for r0 in [0.02, 0.03, 0.04, 0.05, 0.06] {
        let r = solve_saddle(&axis, &k0_start(0.0, r0).unwrap(), &SaddleOptions::default()).unwrap();
        assert_eq!(r.inertia[1], 1);
        values.push(r.value);
    }
    for v in &values {
        assert!((v - values[0]).abs() < 1e-10);
    }
}

#[test]
fn solve_is_deterministic() {
    let axis = unit_axis();
    let (start, _, _) = k0(&axis);
    let a = solve_saddle(&axis, &start, &SaddleOptions::default()).unwrap();
    let b = solve_saddle(&axis, &start, &SaddleOptions::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.trace, b.trace);
}

#[test]
fn damped_newton_preserves_reflection_symmetry() {
    let axis = unit_axis();
    let opts = SaddleOptions {
        method: Method::DampedNewton,
        ..Default::default()
    };
    for r0 in [0.05, 0.1, 0.2] {
        let start = mu_embed(1.3, 0.9, 1.3, [-1.5 * r0, -0.5 * r0, 0.5 * r0, 1.5 * r0]).unwrap();
        let r = solve_saddle(&axis, &start, &opts).unwrap();
        let (l, t) = (&r.config.lambda, &r.config.t);
        assert!((l[0] - l[3]).abs() < 1e-8 && (l[1] - l[2]).abs() < 1e-8);
        assert!((t[0] + t[3]).abs() < 1e-8 && (t[1] + t[2]).abs() < 1e-8);
        let sum: f64 = r.identities.iter().sum();
        assert!((sum - 4.0).abs() < 1e-5);
    }
}

#[test]
fn divergence_is_reported_with_trace() {
    let axis = unit_axis();
    let (start, _, _) = k0(&axis);
    let opts = SaddleOptions {
        max_iter: 2,
        ..Default::default()
    };
    match solve_saddle(&axis, &start, &opts) {
        Err(Error::Divergence { iterations, reason }) => {
            assert_eq!(iterations, 2);
            assert!(reason.contains("last iterate"));
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn invalid_start_is_rejected() {
    let axis = unit_axis();
    let unordered = Configuration::alternating([1.0; 4], [0.1, -0.1, 0.2, 0.3]).unwrap();
    assert!(matches!(
        solve_saddle(&axis, &unordered, &SaddleOptions::default()),
        Err(Error::Config(_))
    ));
    let same_signs = Configuration::new(vec![1; 4], vec![1.0; 4], vec![-0.3, -0.1, 0.1, 0.3]).unwrap();
    assert!(matches!(
        solve_saddle(&axis, &same_signs, &SaddleOptions::default()),
        Err(Error::Parameter(_))
    ));
    let bad = SaddleOptions {
        tol: 0.0,
        ..Default::default()
    };
    let (start, _, _) = k0(&axis);
    assert!(matches!(solve_saddle(&axis, &start, &bad), Err(Error::Config(_))));
}

#[test]
fn hessian_symmetry_and_diagonal() {
    let axis = unit_axis();
    let (start, _, _) = k0(&axis);
    for cfg in [
        start,
        Configuration::alternating([2.1, 3.0, 0.9, 2.9], [-0.73, -0.07, 0.25, 0.55]).unwrap(),
    ] {
        let h = hessian_psi_tilde(&cfg, &axis).unwrap();
        assert!(h.asymmetry <= 1e-6, "{}", h.asymmetry);
        for i in 0..4 {
            let exact = axis.h(cfg.t[i]).unwrap() + 1.0 / cfg.lambda[i].powi(2);
            let fd = h.matrix[(i, i)];
            assert!(exact > 0.0 && (fd - exact).abs() <= 1e-5 * exact, "{fd} vs {exact}");
        }
    }
}

#[test]
fn single_bubble_minimum_is_nondegenerate() {
    let axis = unit_axis();
    let star = Configuration::new(vec![1], vec![(4.0 * PI).sqrt()], vec![0.0]).unwrap();
    let h = hessian_psi_k(&star, &axis).unwrap();
    let (_, inr) = inertia(&h.matrix, 1e-8);
    assert_eq!(inr, [2, 0, 0]);

    let opts = SaddleOptions {
        target_index: 0,
        ..Default::default()
    };
    let start = Configuration::new(vec![1], vec![1.0], vec![0.3]).unwrap();
    let r = solve_critical_point(&axis, &start, &opts).unwrap();
    let expected = 0.5 - 0.5 * (4.0 * PI).ln();
    assert!((r.value - expected).abs() < 1e-12);
    assert!(r.config.t[0].abs() < 1e-7);
    // The one-bubble value sits above its own coercivity floor.
    let floor = -2.0 * log_plus(2.0 / axis.domain.robin_minimum().sqrt());
    assert!(r.value >= floor);
}

#[test]
fn verify_bounds_rejects_value_below_lower() {
    let axis = unit_axis();
    let (start, t0, r0) = k0(&axis);
    let b = bounds_report(&axis, t0, r0).unwrap();
    let mut r = solve_saddle(&axis, &start, &SaddleOptions::default()).unwrap();
    r.value = b.lower - 1.0;
    assert!(!verify_bounds(&r, &b));
}

#[test]
fn multi_start_reports_distinct_points() {
    let axis = unit_axis();
    let (start, t0, r0) = k0(&axis);
    let mut starts = vec![start];
    starts.extend(fallback_starts(&axis, t0, r0));
    let m = multi_start(&axis, &starts, &SaddleOptions::default());
    assert!(!m.points.is_empty());
    for (i, p) in m.points.iter().enumerate() {
        assert!(p.grad_norm <= 1e-8);
        for q in &m.points[..i] {
            let d: f64 = p
                .config
                .to_vec()
                .iter()
                .zip(q.config.to_vec())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(d > 1e-4);
        }
    }
    // The saddle and its mirror image share one value.
    for p in &m.points {
        if p.inertia[1] == 1 {
            assert!((p.value + 0.8522695).abs() < 1e-6);
        }
    }
}

#[test]
fn coercivity_minima_increase_and_are_stable() {
    let axis = unit_axis();
    let (start, _, _) = k0(&axis);
    let levels = [10.0, 20.0, 40.0];
    let base = coercivity_scan(&axis, &start, &levels, &CoercivityOptions::default()).unwrap();
    let doubled = coercivity_scan(
        &axis,
        &start,
        &levels,
        &CoercivityOptions {
            samples: 200,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(base.increasing);
    for (a, b) in base.rows.iter().zip(&doubled.rows) {
        let (a, b) = (a.minimum.unwrap(), b.minimum.unwrap());
        assert!((a - b).abs() <= 0.05 * a.abs(), "{a} vs {b}");
    }
    for row in &base.rows {
        let cfg = row.config.as_ref().unwrap();
        let phi = subcrit::reduced::phi_penalty(cfg, &axis).unwrap();
        assert!((phi - row.m / 2.0).abs() < 1e-8, "Φ = {phi}");
        assert!((psi_k(cfg, &axis).unwrap() - row.minimum.unwrap()).abs() < 1e-12);
    }
}

#[test]
fn coercivity_skips_empty_levels() {
    let axis = unit_axis();
    let (start, _, _) = k0(&axis);
    let t = coercivity_scan(&axis, &start, &[-5.0, 10.0], &CoercivityOptions::default()).unwrap();
    assert!(t.rows[0].minimum.is_none() && t.rows[0].note.is_some());
    assert!(t.rows[1].minimum.is_some());
    assert!(coercivity_scan(&axis, &start, &[20.0, 10.0], &CoercivityOptions::default()).is_err());
}
