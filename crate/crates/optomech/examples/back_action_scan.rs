//! Scan the radiation-pressure damping and spring shift over detuning for a
//! few laser linewidths.
//!
//! A finite linewidth always weakens the damping at the sideband-resonant
//! detuning Delta = -Omega, but for smaller red detunings it can enhance it:
//! the phase-diffusion-broadened drive overlaps the cooling sideband better
//! than the monochromatic one.
//!
//! Run with: cargo run --example back_action_scan

use optomech::{analytics, SystemParams};

fn main() {
    let kappa = 2e5;
    let linewidths = [0.0, 0.1, 0.3, 1.0]; // units of kappa

    println!("Omega = 4 kappa, N_max = 1e6, Gamma = 1e-3 kappa");
    println!();
    print!("{:>10}", "Delta/k");
    for g in linewidths {
        print!("  {:>12}", format!("G_opt(g={g})"));
    }
    println!("  {:>14}", "shift(g=0.3)/k");

    for i in 0..17 {
        let delta = -8.0 + i as f64; // units of kappa
        print!("{delta:>10.2}");
        let mut shift = 0.0;
        for g in linewidths {
            let p = SystemParams::from_kappa_units(
                kappa, 4.0, 1e-3, g, delta, 50.0, 1e6, 0.0,
            )
            .unwrap();
            let damping = analytics::optical_damping(&p);
            print!("  {:>12.4}", damping.value);
            if g == 0.3 {
                shift = analytics::frequency_shift(&p).value / kappa;
            }
        }
        println!("  {shift:>14.3e}");
    }

    println!();
    println!("damping enhancement at Delta = -2.6 kappa (between -Omega and 0):");
    for g in [0.2, 0.4, 0.6] {
        let at = |gamma_l: f64| {
            let p = SystemParams::from_kappa_units(
                kappa, 4.0, 1e-3, gamma_l, -2.6, 50.0, 1e6, 0.0,
            )
            .unwrap();
            analytics::optical_damping(&p).value
        };
        println!("  gamma = {g:>4} kappa: G_opt(gamma)/G_opt(0) = {:.4}", at(g) / at(0.0));
    }
}
