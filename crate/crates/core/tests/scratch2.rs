// temporary calibration (deleted before finalizing)
use gaussperc_core::kernels::Kernel;
use gaussperc_core::percolation::*;
use std::time::Instant;

#[test]
#[ignore]
fn cal_arm_is_targets() {
    let k = Kernel::cauchy(0.5, 2).unwrap();
    for &target in &[0.0f64, -0.25] {
        for &(r, n) in &[(16.0f64, 3000usize), (32.0, 2000), (64.0, 1000), (128.0, 500)] {
            let t0 = Instant::now();
            let spec = EventSpec { kind: EventKind::Arm { r_in: 0.0, r_out: r }, level: -1.0 };
            let grid = spec.kind.default_grid(0.25).unwrap();
            let cfg = IsConfig { level_target: target, ..Default::default() };
            let (e, _) = is_estimate(&k, &grid, &spec, n, 7, &cfg).unwrap();
            println!("target={target} R={r} n={n}: p={:.5} se={:.5} rel={:.3} ess={:.1} -logp={:.4} ({:?})",
                e.p_hat, e.se, e.se / e.p_hat, e.ess, -e.p_hat.ln(), t0.elapsed());
        }
    }
}
