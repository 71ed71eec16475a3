use std::cell::RefCell;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subcrit::bubble::{alpha_n, compute_constants, lambda_of_big_lambda, sphere_area, ConstantsTable, QuadSettings};
use subcrit::green::{robin_h, AxisGreen, BallDomain};
use subcrit::pde::{
    axis_bubble, config_sites, expansion_gap, projection_rate, reduced_gradient, AxisymGrid, Field, GridSpec, Harness,
    Laplacian, Site,
};
use subcrit::reduced::{find_t0_r0, Configuration, T0R0Options};
use subcrit::saddle::{k0_start, solve_saddle, SaddleOptions};
use subcrit::Error;

fn unit() -> BallDomain {
    BallDomain::unit(3).unwrap()
}

fn table() -> ConstantsTable {
    compute_constants(3, &QuadSettings::default()).unwrap()
}

fn saddle_config() -> Configuration {
    let axis = AxisGreen::unit(3).unwrap();
    let f = find_t0_r0(&axis, &T0R0Options::default()).unwrap();
    solve_saddle(&axis, &k0_start(f.t0, f.r0).unwrap(), &SaddleOptions::default())
        .unwrap()
        .config
}

fn harness_for(cfg: &Configuration, eps: f64, spec: GridSpec) -> Harness {
    Harness::for_sites(&unit(), spec, &config_sites(cfg, eps, &table()).unwrap()).unwrap()
}

#[test]
fn constant_boundary_data_is_reproduced() {
    let sites = [Site { z: 0.2, mu: 0.01 }];
    let h = Harness::for_sites(&unit(), GridSpec { nz: 129, nr: 65 }, &sites).unwrap();
    let f = h.solve_dirichlet_laplace(|_, _| -1.75).unwrap();
    assert!(f.values.iter().all(|v| (v + 1.75).abs() <= 1e-10));
}

fn harmonic_error(n: usize) -> f64 {
    // 1/|x − q| with q = (2, 0, 0) outside the ball.
    let exact = |z: f64, r: f64| 1.0 / ((z - 2.0).powi(2) + r * r).sqrt();
    let lap = Laplacian::new(AxisymGrid::uniform(&unit(), 2 * n - 1, n).unwrap()).unwrap();
    let f = lap.harmonic_extension(exact).unwrap();
    let g = &lap.grid;
    let mut err = 0.0f64;
    for &k in &lap.nodes {
        let (i, j) = (k / g.nr, k % g.nr);
        err = err.max((f.values[k] - exact(g.z[i], g.r[j])).abs());
    }
    err
}

#[test]
fn harmonic_oracle_converges_at_second_order() {
    let e = [harmonic_error(33), harmonic_error(65), harmonic_error(129)];
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.7..=2.3).contains(&order), "errors {e:?}, order {order}");
    }
}

#[test]
fn bubble_trace_extension_matches_green_representation() {
    let d = unit();
    // Small ε keeps the O(μ²) trace corrections below the tolerance.
    let (eps, xi) = (0.005, 0.3);
    let p = axis_bubble(&d, eps, 1.0, xi).unwrap();
    let mu = p.mu();
    let h = Harness::for_sites(&d, GridSpec::default(), &[Site { z: xi, mu }]).unwrap();
    let ext = h.solve_dirichlet_laplace(|z, r| p.profile((z - xi).powi(2) + r * r)).unwrap();
    let lead = alpha_n(3) * mu.sqrt() * sphere_area(3);
    let g = h.grid();
    let mut worst = 0.0f64;
    for &k in &h.lap.nodes {
        let (i, j) = (k / g.nr, k % g.nr);
        let oracle = lead * robin_h(&d, &[g.z[i], g.r[j], 0.0], &[xi, 0.0, 0.0]).unwrap();
        worst = worst.max((ext.values[k] - oracle).abs() / oracle);
    }
    assert!(worst < 1e-3, "relative deviation {worst}");
}

#[test]
fn projection_error_scales_like_sqrt_epsilon() {
    let r = projection_rate(&unit(), 1.0, 0.0, &[0.1, 0.05, 0.025], GridSpec::default()).unwrap();
    assert!(r.constant_spread <= 2.0, "{:?}", r.rows);
    let mid = &r.rows[1];
    assert!(mid.reduction >= 5.0, "{mid:?}");
    assert!(r.rows.iter().all(|row| row.core_cells >= 6.0));
    // Centered bubble: the harmonic correction is the constant α(μ/(1+μ²))^{1/2}.
    for row in &r.rows {
        let exact = alpha_n(3) * (row.mu / (1.0 + row.mu * row.mu)).sqrt();
        assert!((row.sup_error - exact).abs() <= 1e-9 * exact);
    }
}

#[test]
fn projection_obeys_maximum_principle_and_vanishes_outside() {
    let d = unit();
    let p = axis_bubble(&d, 0.05, 0.7, -0.4).unwrap();
    let h = Harness::for_sites(&d, GridSpec::default(), &[Site { z: -0.4, mu: p.mu() }]).unwrap();
    let pu = h.project_bubble(&p).unwrap();
    let u = h.sample_bubble(&p).unwrap();
    for (k, inside) in h.grid().mask.iter().enumerate() {
        if *inside {
            assert!(pu.values[k] <= u.values[k]);
            assert!(pu.values[k] > 0.0);
        } else {
            assert_eq!(pu.values[k], 0.0);
        }
    }
}

#[test]
fn projection_guards() {
    let d = unit();
    let h = Harness::uniform(&d, GridSpec { nz: 65, nr: 33 }).unwrap();
    let near = axis_bubble(&d, 0.5, 1.0, 0.95).unwrap();
    assert!(matches!(h.project_bubble(&near), Err(Error::Resolution(_))));
    let thin = axis_bubble(&d, 0.5, 0.01, 0.0).unwrap();
    match h.project_bubble(&thin) {
        Err(Error::Resolution(msg)) => assert!(msg.contains("--grid-nz"), "{msg}"),
        other => panic!("expected resolution error, got {other:?}"),
    }
    let off = subcrit::BubbleParams::new(3, 0.5, 1.0, vec![0.0, 0.2, 0.0]).unwrap();
    assert!(matches!(h.project_bubble(&off), Err(Error::Domain(_))));
}

#[test]
fn single_term_assembly_equals_projection() {
    let d = unit();
    let t = table();
    let cfg = Configuration::new(vec![1], vec![2.0], vec![0.1]).unwrap();
    let eps = 0.05;
    let h = harness_for(&cfg, eps, GridSpec::default());
    let v = h.assemble_v(&cfg, eps, &t).unwrap();
    let p = axis_bubble(&d, eps, lambda_of_big_lambda(2.0, &t).unwrap(), 0.1).unwrap();
    assert_eq!(v, h.project_bubble(&p).unwrap());
}

#[test]
fn symmetric_alternating_configuration_gives_odd_v() {
    let cfg = Configuration::alternating([2.0, 1.5, 1.5, 2.0], [-0.6, -0.2, 0.2, 0.6]).unwrap();
    let eps = 0.05;
    let h = harness_for(&cfg, eps, GridSpec::default());
    let v = h.assemble_v(&cfg, eps, &table()).unwrap();
    let g = h.grid();
    let scale = v.sup_norm();
    for i in 0..g.nz {
        assert!((g.z[i] + g.z[g.nz - 1 - i]).abs() < 1e-12);
        for j in 0..g.nr {
            let s = v.get(i, j) + v.get(g.nz - 1 - i, j);
            assert!(s.abs() <= 1e-9 * scale, "({i},{j}): {s}");
        }
    }
    let e = h.energy_i(&v, eps).unwrap();
    let e_neg = h.energy_i(&v.scaled(-1.0), eps).unwrap();
    assert!((e - e_neg).abs() <= 1e-10 * e.abs());
}

#[test]
fn energy_is_invariant_under_reflection() {
    let cfg = Configuration::alternating([2.9, 0.95, 3.0, 2.1], [-0.55, -0.25, 0.07, 0.73]).unwrap();
    let eps = 0.05;
    let t = table();
    let e = |c: &Configuration| {
        let h = harness_for(c, eps, GridSpec::default());
        h.energy_i(&h.assemble_v(c, eps, &t).unwrap(), eps).unwrap()
    };
    let (a, b) = (e(&cfg), e(&cfg.reflected(0.0)));
    assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
}

#[test]
fn peak_matches_nearest_bubble() {
    let cfg = saddle_config();
    let t = table();
    let eps = 0.05;
    let h = harness_for(&cfg, eps, GridSpec::default());
    let v = h.assemble_v(&cfg, eps, &t).unwrap();
    let peak = cfg
        .lambda
        .iter()
        .map(|l| alpha_n(3) * (lambda_of_big_lambda(*l, &t).unwrap() * eps).powf(-0.5))
        .fold(0.0, f64::max);
    let sup = v.sup_norm();
    assert!((sup - peak).abs() <= 0.1 * peak, "{sup} vs {peak}");
}

#[test]
fn energy_of_zero_and_scaling() {
    let cfg = Configuration::new(vec![1], vec![2.0], vec![0.0]).unwrap();
    let eps = 0.05;
    let h = harness_for(&cfg, eps, GridSpec { nz: 257, nr: 129 });
    assert_eq!(h.energy_i(&Field::zeros(h.grid()), eps).unwrap(), 0.0);
    let u = h.assemble_v(&cfg, eps, &table()).unwrap();
    let q = 6.0 - eps;
    // Split I(u) = D − P/q by evaluating at u and 2u.
    let i1 = h.energy_i(&u, eps).unwrap();
    let i2 = h.energy_i(&u.scaled(2.0), eps).unwrap();
    let p = (4.0 * i1 - i2) * q / (2f64.powf(q) - 4.0);
    let d = i1 + p / q;
    let v = h.lap.gather(&u);
    let direct_d = h.lap.dirichlet_energy(&v);
    let direct_p: f64 = v.iter().zip(&h.lap.volume).map(|(x, w)| w * x.abs().powf(q)).sum();
    assert!((d - direct_d).abs() <= 1e-8 * direct_d);
    assert!((p - direct_p).abs() <= 1e-8 * direct_p);
    let three = h.energy_i(&u.scaled(3.0), eps).unwrap();
    assert!((three - (9.0 * direct_d - 3f64.powf(q) * direct_p / q)).abs() <= 1e-9 * three.abs());
}

#[test]
fn energy_rejects_nonzero_boundary_values() {
    let h = Harness::uniform(&unit(), GridSpec { nz: 33, nr: 17 }).unwrap();
    let f = Field::from_fn(h.grid(), |_, _| 1.0);
    assert!(matches!(h.energy_i(&f, 0.05), Err(Error::Parameter(_))));
}

#[test]
fn linear_solution_residual_is_the_nonlinear_mismatch() {
    let cfg = Configuration::new(vec![1], vec![2.0], vec![0.0]).unwrap();
    let eps = 0.05;
    let h = harness_for(&cfg, eps, GridSpec { nz: 257, nr: 129 });
    let v0 = h.lap.gather(&h.assemble_v(&cfg, eps, &table()).unwrap());
    let f = |x: f64| x.abs().powf(4.0 - eps) * x;
    let load: Vec<f64> = v0.iter().zip(&h.lap.volume).map(|(x, w)| w * f(*x)).collect();
    let u = h.lap.solve(&load).unwrap();
    let field = h.lap.scatter(&u, |_, _| 0.0);
    let res = h.residual(&field, eps).unwrap();
    for ((r, a), b) in res.iter().zip(&v0).zip(&u) {
        let expected = f(*a) - f(*b);
        assert!((r - expected).abs() <= 1e-6 * f(*a).abs().max(1.0), "{r} vs {expected}");
    }
}

#[test]
fn random_field_residual_dwarfs_saddle_residual() {
    let cfg = saddle_config();
    let eps = 0.05;
    let h = harness_for(&cfg, eps, GridSpec::default());
    let v = h.assemble_v(&cfg, eps, &table()).unwrap();
    let scale = v.sup_norm();
    let rng = RefCell::new(ChaCha8Rng::seed_from_u64(11));
    let noise = Field::interior_from_fn(h.grid(), |_, _| scale * rng.borrow_mut().gen_range(-1.0..1.0));
    let (a, b) = (h.residual_norm(&v, eps).unwrap(), h.residual_norm(&noise, eps).unwrap());
    assert!(b >= 100.0 * a, "{b} vs {a}");
    let (a, b) = (
        h.residual_dual_norm(&v, eps).unwrap(),
        h.residual_dual_norm(&noise, eps).unwrap(),
    );
    assert!(b >= 100.0 * a, "{b} vs {a}");
}

#[test]
fn saddle_residual_and_reduced_gradient_decay_with_epsilon() {
    let cfg = saddle_config();
    let t = table();
    let spec = GridSpec { nz: 1025, nr: 513 };
    let mut dual = Vec::new();
    let mut grad = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let h = harness_for(&cfg, eps, spec);
        let v = h.assemble_v(&cfg, eps, &t).unwrap();
        dual.push(h.residual_dual_norm(&v, eps).unwrap());
        if eps != 0.05 {
            let g = reduced_gradient(&h, &cfg, eps, &t, 1e-4).unwrap();
            grad.push(g.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
    }
    assert!(dual[0] > dual[1] && dual[1] > dual[2], "{dual:?}");
    assert!(grad[1] <= 0.5 * grad[0], "{grad:?}");
}

#[test]
fn single_bubble_expansion_gap_shrinks() {
    let axis = AxisGreen::unit(3).unwrap();
    let cfg = Configuration::new(vec![1], vec![(4.0 * PI).sqrt()], vec![0.0]).unwrap();
    let r = expansion_gap(&axis, &cfg, &[0.1, 0.05, 0.025], &table(), GridSpec::default(), false).unwrap();
    assert!(r.decreasing);
    // Exact radial values of the remainder for a centered bubble.
    for (row, exact) in r.rows.iter().zip([-0.4110, -0.2666, -0.1662]) {
        assert!((row.gap - exact).abs() < 3e-3, "{} vs {exact}", row.gap);
    }
    assert!(expansion_gap(&axis, &cfg, &[0.05, 0.1], &table(), GridSpec::default(), false).is_err());
}

#[test]
fn field_exports_round_trip() {
    let h = Harness::for_sites(&unit(), GridSpec { nz: 33, nr: 17 }, &[Site { z: 0.1, mu: 0.2 }]).unwrap();
    let f = Field::interior_from_fn(h.grid(), |z, r| z * z - 0.5 * r);
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("f.bin");
    f.write_binary(h.grid(), &bin).unwrap();
    let (g, hz, hr) = Field::read_binary(&bin).unwrap();
    assert_eq!(f, g);
    assert_eq!((hz, hr), (h.grid().hz, h.grid().hr));
    let csv = dir.path().join("f.csv");
    f.write_csv(h.grid(), &csv).unwrap();
    let mut rd = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<(f64, f64, f64)> = rd.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 33 * 17);
    let (i, j) = (7, 5);
    let row = rows[i * 17 + j];
    assert_eq!(row, (h.grid().z[i], h.grid().r[j], f.get(i, j)));
}
