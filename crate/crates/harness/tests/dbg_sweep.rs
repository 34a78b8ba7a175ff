use iscsc_core::config::SystemConfig;
use iscsc_sim::experiments::*;
use iscsc_sim::emit::crb_plot_table;

#[test]
fn dbg_crbsweep() {
    let mut cfg = SystemConfig::<f64> {
        users: 2,
        ..Default::default()
    };
    cfg.loops.ao_tol_bits = 1e-5;
    cfg.loops.ao_max_epochs = 4;
    let spec = ExperimentSpec {
        kind: ExperimentKind::CrbSweep,
        values: vec![400.0, 1000.0, 2500.0, 6000.0, 15000.0],
        baselines: vec![Baseline::Proposed],
        trials: 2,
        seed: 99,
    };
    let t0 = std::time::Instant::now();
    let rows = run_crb_sweep(&spec, &cfg).unwrap();
    println!("total {:.1}s, {} rows", t0.elapsed().as_secs_f64(), rows.len());
    for r in &rows {
        println!("  {} xi={} s={:.6} status={:?} {:.1}s ep={}", r.scenario, r.sweep_value, r.s_min_bits, r.status, r.seconds, r.epochs);
    }
    let table = crb_plot_table(&rows);
    for &x in &spec.values {
        println!(
            "xi {:>7}: 1t-9fa={:.6} 3t-9fa={:.6} 3t-15fa={:.6}",
            x,
            table.mean(x, "1t-9fa").unwrap_or(f64::NAN),
            table.mean(x, "3t-9fa").unwrap_or(f64::NAN),
            table.mean(x, "3t-15fa").unwrap_or(f64::NAN)
        );
    }
}
