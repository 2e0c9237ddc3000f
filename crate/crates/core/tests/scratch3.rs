// temporary calibration (deleted before finalizing)
use gaussperc_core::experiments::diameter_table;
use gaussperc_core::kernels::Kernel;
use gaussperc_core::percolation::*;
use std::time::Instant;

#[test]
#[ignore]
fn cal_xi() {
    let k = Kernel::cauchy(0.5, 2).unwrap();
    let t0 = Instant::now();
    let xi = correlation_length(&k, 0.25, 0.15, &[-0.5, -0.35, -0.25], 500, 3, 160.0).unwrap();
    for x in &xi {
        println!("level={} xi={:?} bracket_lo={} probes={:?}", x.level, x.xi, x.bracket_lo,
            x.tested.iter().map(|e| (e.scale, (e.p_hat*1e3).round()/1e3)).collect::<Vec<_>>());
    }
    println!("xi elapsed {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn cal_diameter() {
    let k = Kernel::cauchy(0.5, 2).unwrap();
    let t0 = Instant::now();
    let table = diameter_table(&k, 0.5, &[64.0, 128.0, 256.0], -1.0, 60, 23).unwrap();
    for (r, ds) in &table {
        let med = ds[ds.len() / 2];
        println!("R={r}: D_med={med:.2} range=({:.1},{:.1}) ratio={:.3}",
            ds[0], ds[ds.len()-1], med / r.ln().powi(2));
    }
    println!("diameter elapsed {:?}", t0.elapsed());
}
