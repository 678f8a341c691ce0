//! Back-action-evading measurement: time-averaged quadrature variances under
//! an amplitude-modulated resonant drive, and how laser phase noise spoils
//! the protection of the measured (cosine) quadrature.
//!
//! Run with: cargo run --example bae_quadratures

use optomech::{quadratures, SystemParams};

fn main() {
    let params = |omega: f64, gamma_l: f64| {
        SystemParams::from_kappa_units(2e5, omega, 1e-4, gamma_l, 0.0, 50.0, 1e6, 0.0).unwrap()
    };

    println!("Omega = 5 kappa, n_M = 0:");
    println!(
        "{:>10} {:>14} {:>14} {:>14} {:>10}",
        "gamma/k", "var_x", "var_y", "ba_x/ba_y", "validity"
    );
    for gl in [0.0, 0.05, 0.1, 0.2, 0.3] {
        let p = params(5.0, gl);
        let v = quadratures::quadrature_variances(&p);
        println!(
            "{gl:>10} {:>14.6e} {:>14.6e} {:>14.6e} {:>10?}",
            v.var_x,
            v.var_y,
            quadratures::heating_ratio(&p),
            v.validity
        );
    }

    println!();
    println!("good-cavity protection factor ba_y / ba_x = 32 (Omega/kappa)^2 / 9 at gamma = 0:");
    for omega in [5.0, 10.0, 40.0] {
        let v = quadratures::quadrature_variances_good_cavity(&params(omega, 0.0));
        let exact = 32.0 * omega * omega / 9.0;
        println!(
            "  Omega = {omega:>4} kappa: {:.6e}  (closed form {:.6e})",
            v.ba_y / v.ba_x,
            exact
        );
    }

    println!();
    println!("linewidth degradation of the heating ratio near Omega ~ 0.8 kappa:");
    let h = |omega: f64, gl: f64| quadratures::heating_ratio(&params(omega, gl));
    for omega in [0.7, 0.8, 0.9] {
        println!(
            "  Omega = {omega} kappa: h(0.3 kappa)/h(0) = {:.2}",
            h(omega, 0.3) / h(omega, 0.0)
        );
    }
}
