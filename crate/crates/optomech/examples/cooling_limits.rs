//! Sideband-cooling limits under laser phase noise: integrate the
//! occupation-noise spectrum for the steady-state phonon number and compare
//! with the closed-form minima.
//!
//! Run with: cargo run --release --example cooling_limits

use optomech::{spectrum, SystemParams};

fn main() {
    // resolved-sideband cooling point: Omega = 40 kappa, Delta = -Omega
    let base = |gamma_l: f64| {
        SystemParams::from_kappa_units(2e5, 40.0, 1e-4, gamma_l, -40.0, 50.0, 2.56e8, 0.0)
            .unwrap()
    };

    println!("{:>10} {:>14} {:>16} {:>16}", "gamma/k", "<n> (spectrum)", "n_min (weak-cpl)", "n_min (good-cav)");
    for gl in [0.0, 0.05, 0.1, 0.2, 0.5] {
        let p = base(gl);
        let grid = spectrum::noise_spectrum(&p, &spectrum::GridSpec::default_for(&p)).unwrap();
        let n = spectrum::mean_phonon_number(&grid);
        let wc = spectrum::n_min_weak_coupling(&p).unwrap();
        let gc = spectrum::n_min_good_cavity(&p);
        println!(
            "{gl:>10} {:>14.6e} {:>16.6e} {:>16.6e}",
            n.value, wc, gc.value
        );
    }

    println!();
    println!("each linewidth unit of kappa adds 2 gamma/kappa to the floor:");
    let p0 = base(0.0);
    let p1 = base(0.1);
    let ratio = spectrum::n_min_good_cavity(&p1).value / spectrum::n_min_good_cavity(&p0).value;
    println!("  n_min(0.1 kappa) / n_min(0) = {ratio:.6}  (expected 1.2)");
}
