//! Temporary probe: rough logical-rate curves to calibrate sweep grids.

use quirc_core::circuit::noise::NoiseParams;
use quirc_core::surgery::{build_layout, logical_error_rate, MergeOptions};

#[test]
#[ignore]
fn probe_curves() {
    let shots = 30_000;
    println!("--- p_local sweep (p_spam=0.01) ---");
    for &p in &[0.005f64, 0.01, 0.02, 0.03, 0.04, 0.05] {
        let np = NoiseParams::local_only(0.01, p);
        let mut line = format!("p_local={p:<6}");
        for d in [3usize, 5] {
            let l = build_layout(d, None).unwrap();
            let t0 = std::time::Instant::now();
            let e = logical_error_rate(&l, &np, MergeOptions::standard(d), shots, 42).unwrap();
            line += &format!("  d{d}: {:?} ({:.1?})", e.rate, t0.elapsed());
        }
        println!("{line}");
    }
    for &base in &[0.0f64, 0.002, 0.005] {
        println!("--- p_remote sweep (p_spam=0.01, p_local={base}) ---");
        for &p in &[0.05f64, 0.10, 0.15, 0.20, 0.28, 0.36] {
            let np = NoiseParams {
                p_spam: 0.01,
                p_local: base,
                p_remote_x: p,
                p_remote_z: p / 2.0,
                p_latency: 0.0,
            };
            let mut line = format!("p_rx={p:<6}");
            for d in [3usize, 5] {
                let l = build_layout(d, None).unwrap();
                let e = logical_error_rate(&l, &np, MergeOptions::standard(d), shots, 43).unwrap();
                line += &format!("  d{d}: {:?}", e.rate);
            }
            println!("{line}");
        }
    }
    println!("--- p_latency sweep (p_spam=0.01, p_local=0) ---");
    for &p in &[0.02f64, 0.05, 0.08, 0.12, 0.16, 0.22] {
        let np = NoiseParams { p_spam: 0.01, p_latency: p, ..Default::default() };
        let mut line = format!("p_lat={p:<6}");
        for d in [3usize, 5] {
            let l = build_layout(d, None).unwrap();
            let e = logical_error_rate(&l, &np, MergeOptions::standard(d), shots, 44).unwrap();
            line += &format!("  d{d}: {:?}", e.rate);
        }
        println!("{line}");
    }
    println!("--- full model ratio (criterion 10) ---");
    for &pl in &[0.002f64, 0.005] {
        for d in [3usize, 5] {
            let l = build_layout(d, None).unwrap();
            let local = NoiseParams::local_only(0.01, pl);
            let full = NoiseParams {
                p_spam: 0.01,
                p_local: pl,
                p_remote_x: 0.06,
                p_remote_z: 0.03,
                p_latency: 0.01,
            };
            let el = logical_error_rate(&l, &local, MergeOptions::standard(d), shots, 45).unwrap();
            let ef = logical_error_rate(&l, &full, MergeOptions::standard(d), shots, 46).unwrap();
            println!(
                "p_local={pl} d{d}: local {} full {} ratio {:.2}",
                el.rate,
                ef.rate,
                ef.rate / el.rate.max(1e-9)
            );
        }
    }
}
