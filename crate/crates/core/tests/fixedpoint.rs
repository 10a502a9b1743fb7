use std::f64::consts::PI;

use thermogas::fixedpoint::{check_smallness, e_norm, phi_map, picard_iterate, PicardConfig};
use thermogas::integrator::solve_linearized;
use thermogas::lp::{besov_norm, BesovSpec, DyadicFamily};
use thermogas::model::{Kappa3Profile, ModelParams};
use thermogas::random::random_field;
use thermogas::{Grid, RealField, SpectralField};

fn params() -> ModelParams {
    ModelParams::new(1.0, 1.5, 0.8, Kappa3Profile::Tanh { alpha: 0.2 }).unwrap()
}

fn config() -> PicardConfig {
    PicardConfig {
        t_final: 0.5,
        dt: 0.01,
        tol: 1e-13,
        max_iter: 30,
        c_radius: 0.05,
        m_const: 1.0,
    }
}

/// Band-limited data with `‖a₀‖ + ‖θ̃₀‖` in `Ḃ^{3/2}_{2,1}` equal to `size`.
fn data(grid: &Grid, size: f64) -> (RealField, RealField) {
    let family = DyadicFamily::new(grid);
    let a = random_field(grid, 21, 3, 1.0);
    let t = random_field(grid, 22, 3, 1.0);
    let spec = BesovSpec::critical();
    let total = besov_norm(&family, &a, spec).unwrap() + besov_norm(&family, &t, spec).unwrap();
    let s = size / total;
    (a.map(|v| v * s), t.map(|v| v * s))
}

fn zeros(grid: &Grid, steps: usize) -> Vec<[SpectralField; 2]> {
    vec![[SpectralField::zeros(grid), SpectralField::zeros(grid)]; steps]
}

#[test]
fn map_preserves_zero() {
    let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
    let zero = RealField::zeros(&grid);
    let p = params();
    let input = solve_linearized(&zero, &zero, &zeros(&grid, 10), &p, 0.1, 0.01).unwrap();
    let out = phi_map(&input, &zero, &zero, &p).unwrap();
    assert_eq!(e_norm(&out).unwrap(), 0.0);
}

#[test]
fn map_of_zero_trajectory_is_free_evolution() {
    let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
    let p = params();
    let zero = RealField::zeros(&grid);
    let (a, t) = data(&grid, 0.01);
    let input = solve_linearized(&zero, &zero, &zeros(&grid, 20), &p, 0.2, 0.01).unwrap();
    let out = phi_map(&input, &a, &t, &p).unwrap();
    let free = solve_linearized(&a, &t, &zeros(&grid, 20), &p, 0.2, 0.01).unwrap();
    for i in 0..out.len() {
        for c in 0..2 {
            assert_eq!(out.spectral(i)[c], free.spectral(i)[c]);
        }
    }
}

#[test]
fn zero_data_converges_at_once() {
    let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
    let zero = RealField::zeros(&grid);
    let (traj, report) = picard_iterate(&zero, &zero, &params(), &config()).unwrap();
    assert!(report.converged());
    assert_eq!(report.iterations(), 1);
    assert_eq!(e_norm(&traj).unwrap(), 0.0);
    assert!(report.smallness.bound_satisfied);
}

#[test]
fn small_data_contracts_to_the_direct_solution() {
    let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
    let (a, t) = data(&grid, 1e-3);
    let cfg = config();
    let (limit, report) = picard_iterate(&a, &t, &params(), &cfg).unwrap();
    assert!(report.converged(), "{}", report.summary());
    assert!(report.contraction_ratios.iter().all(|&r| r < 1.0));
    assert!(report.direct_l2_distance.unwrap() <= 1e-6);
    assert!(report.smallness.contained().unwrap());
    assert!(report.final_residual.unwrap() <= 2.0 * report.direct_residual.unwrap());

    // Feeding the limit back changes it by at most the tolerance.
    let again = phi_map(&limit, &a, &t, &params()).unwrap();
    let shift = (e_norm(&again).unwrap() - e_norm(&limit).unwrap()).abs();
    assert!(shift <= cfg.tol);
}

#[test]
fn contraction_ratio_scales_with_data_size() {
    let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
    let first_ratio = |size: f64| {
        let (a, t) = data(&grid, size);
        let (_, r) = picard_iterate(&a, &t, &params(), &config()).unwrap();
        r.contraction_ratios[0]
    };
    let ratios: Vec<f64> = [1e-4, 1e-3, 1e-2].into_iter().map(first_ratio).collect();
    for w in ratios.windows(2) {
        let factor = w[1] / w[0];
        assert!((5.0..=15.0).contains(&factor), "{ratios:?}");
    }
}

#[test]
fn large_data_is_flagged() {
    let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
    let (a, t) = data(&grid, 10.0);
    let (_, report) = picard_iterate(&a, &t, &params(), &config()).unwrap();
    assert!(!report.smallness.bound_satisfied);
    assert!(report.summary().contains("smallness=violated"));
}

#[test]
fn smallness_bound_comparison() {
    let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
    let zero = RealField::zeros(&grid);
    let r = check_smallness(&zero, &zero, 1e-9, 1.0).unwrap();
    assert_eq!(r.data_norm, 0.0);
    assert!(r.bound_satisfied);
    let (a, t) = data(&grid, 0.4);
    let r = check_smallness(&a, &t, 0.2, 1.0).unwrap();
    assert!((r.bound() - 0.1).abs() < 1e-15);
    assert!((r.data_norm - 0.4).abs() < 1e-12);
    assert!(!r.bound_satisfied);
}

#[test]
fn report_csv_layout() {
    let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
    let (a, t) = data(&grid, 1e-3);
    let (_, report) = picard_iterate(&a, &t, &params(), &config()).unwrap();
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iteration,e_norm,difference,ratio");
    assert_eq!(lines.len(), report.e_norms.len() + 1);
    assert!(lines[1].starts_with("0,") && lines[1].ends_with(",,"));
}
