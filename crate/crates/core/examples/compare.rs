//! Prints analysis and simulation coverage side by side for one protocol.
//!
//! `cargo run --release -p mmshare --example compare -- dcsr 2000`

use std::time::Instant;

use mmshare::analysis::{avg_contenders, coverage_curve, AnalysisContext};
use mmshare::simulator::{estimate_transmission_probability, simulate_coverage, Scenario, SimConfig};
use mmshare::{NetworkParams, Protocol};

fn main() -> mmshare::Result<()> {
    let mut args = std::env::args().skip(1);
    let protocol: Protocol = args.next().as_deref().unwrap_or("dcsr").parse()?;
    let iterations: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let params = NetworkParams::default();
    let cfg = SimConfig { iterations_pt: iterations, iterations_cov: iterations, ..Default::default() };

    let t = Instant::now();
    let sc = Scenario::new(params, protocol)?;
    let est = estimate_transmission_probability(&cfg, &sc)?;
    let sim = simulate_coverage(&cfg, &sc, est.p_t)?;
    println!("simulation: {:.1?}, p_T = {:.4}, mean contenders = {:.3}", t.elapsed(), est.p_t, est.mean_contenders);

    let ana = if protocol.family() == mmshare::protocols::Family::Transmitter {
        None
    } else {
        let t = Instant::now();
        let ctx = AnalysisContext::new(params, protocol)?;
        let res = coverage_curve(&cfg.z_grid_db, &ctx)?;
        let n = if protocol == Protocol::NonCs { 0.0 } else { avg_contenders(&ctx)? };
        println!("analysis: {:.1?}, p_T = {:.4}, mean contenders = {:.3}", t.elapsed(), res.p_t, n);
        Some(res)
    };
    println!("{:>6} {:>9} {:>9} {:>9}", "z_db", "sim", "stderr", "analysis");
    for (i, z) in cfg.z_grid_db.iter().enumerate() {
        let a = ana.as_ref().map_or(f64::NAN, |a| a.p_c[i]);
        println!("{z:>6.1} {:>9.4} {:>9.4} {a:>9.4}", sim.p_c[i], sim.stderr[i]);
    }
    Ok(())
}
