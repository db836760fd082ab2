use dimred_core::harness::{fit_rate, run_sweep, sweep_checks, sweep_csv, Check, ExperimentConfig};
use dimred_core::Error;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

#[test]
fn free_product_state_stays_condensed() {
    let cfg = config("profile = \"zero\"\nn = [2, 3, 4]\nt_final = 0.2\nsamples = 2\nexpect_decreasing = false\n");
    let out = run_sweep(&cfg).unwrap();
    assert!(out.failures.is_empty());
    assert_eq!(out.rows.len(), 9);
    for r in &out.rows {
        assert!(
            r.trace_distance < 1e-8,
            "N={} t={} {}",
            r.n_particles,
            r.t,
            r.trace_distance
        );
        assert!(r.bridge_holds);
    }
    assert!(matches!(
        fit_rate(&out.rows),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn interacting_sweep_decreases_in_n() {
    let cfg = config("n = [2, 3, 4, 5]\nt_final = 0.2\n");
    let out = run_sweep(&cfg).unwrap();
    let checks = sweep_checks(&out, true);
    let failed: Vec<&Check> = checks.iter().filter(|c| c.failed()).collect();
    assert!(failed.is_empty(), "{failed:?}");
    let initial: Vec<f64> = out
        .rows
        .iter()
        .filter(|r| r.t == 0.0)
        .map(|r| r.trace_distance)
        .collect();
    assert!(initial.iter().all(|&d| d < 1e-10), "{initial:?}");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let cfg = config("n = [2, 3]\nt_final = 0.1\nsamples = 2\n");
    let a = run_sweep(&cfg).unwrap();
    let b = run_sweep(&cfg).unwrap();
    let header = cfg.header();
    assert_eq!(
        sweep_csv(&header, &a.rows).unwrap(),
        sweep_csv(&header, &b.rows).unwrap()
    );
}

#[test]
fn failing_point_does_not_stop_the_sweep() {
    let cfg = config("n = [2, 3, 8]\nt_final = 0.05\nexcitation_cap = \"none\"\nsize_cap = 5000\n");
    let out = run_sweep(&cfg).unwrap();
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].n_particles, 8);
    assert!(matches!(out.failures[0].error, Error::Size { .. }));
    assert_eq!(out.rows.iter().filter(|r| r.t > 0.0).count(), 2);
    assert!(sweep_checks(&out, true)
        .iter()
        .any(|c| c.name == "failed_points" && c.failed()));
}
