//! Amplitude-modulated resonant driving: time-averaged variances of the
//! cosine (X) and sine (Y) quadratures of the mirror motion, their
//! back-action parts, and the X/Y heating ratio that quantifies how laser
//! phase noise degrades a back-action-evading measurement.
//!
//! The drive here is sinusoidal at the mechanical frequency with the laser
//! on cavity resonance; only (P, Omega) enter, so the functions ignore
//! `detuning`. All variances are dimensionless (phonon units).

use serde::Serialize;

use crate::system::{SystemParams, HBAR};

/// How well the parameters satisfy the assumptions behind a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    Ok,
    Marginal,
    Outside,
}

/// Time-averaged quadrature variances and their decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureVariances {
    /// Time-averaged variance of the cosine quadrature.
    pub var_x: f64,
    /// Time-averaged variance of the sine quadrature.
    pub var_y: f64,
    /// Undriven value (2 n_M + 1) / 2 shared by both quadratures.
    pub thermal_floor: f64,
    /// Drive-induced part of var_x (back-action heating of X).
    pub ba_x: f64,
    /// Excess of var_y over var_x (the part only the sine quadrature sees).
    pub ba_y: f64,
    pub validity: Validity,
}

/// Weak-coupling / weak-noise validity classification shared by the two
/// variance routines.
fn classify(p: &SystemParams, good_cavity: bool) -> Validity {
    let s = p.scaled();
    // g0^2 |B0|^2 / kappa^2 at Delta = 0
    let coupling = 4.0 * s.g0 * s.g0 * s.b0_sq;
    let (g, gm) = (s.gamma_l, s.gamma);
    let ok = g <= 0.1 && gm <= 0.1 && coupling <= 0.01 && (!good_cavity || s.omega >= 20.0);
    let marginal = g <= 0.5 && gm <= 0.5 && coupling <= 0.1 && (!good_cavity || s.omega >= 5.0);
    if ok {
        Validity::Ok
    } else if marginal {
        Validity::Marginal
    } else {
        Validity::Outside
    }
}

/// Drive-strength prefactor |b0|^2 g0^2 / Gamma in units of kappa^2.
fn drive_prefactor(p: &SystemParams) -> f64 {
    let s = p.scaled();
    if s.b0_sq == 0.0 {
        return 0.0;
    }
    s.b0_sq * s.g0 * s.g0 / s.gamma
}

fn ba_terms_full(p: &SystemParams) -> (f64, f64) {
    let s = p.scaled();
    let f = drive_prefactor(p);
    let (w2, g) = (s.omega * s.omega, s.gamma_l);
    let w4 = w2 * w2;
    let (l1, l4, l16) = (1.0 + w2, 1.0 + 4.0 * w2, 1.0 + 16.0 * w2);
    let ba_x = 48.0
        * f
        * ((1.0 + 12.0 * w2) / (l4 * l4 * l16)
            + 3.0 * g * (512.0 * w4 * w4 + 352.0 * w4 * w2 - 104.0 * w4 - 20.0 * w2 - 1.0)
                / (l1 * l4 * l4 * l4 * l16 * l16));
    let ba_y = 32.0
        * f
        * ((4.0 * w2 - 1.0) / (l4 * l4)
            - g * (32.0 * w4 * w2 + 24.0 * w4 + 16.0 * w2 - 3.0) / (l1 * l4 * l4 * l4));
    (ba_x, ba_y)
}

fn assemble(p: &SystemParams, ba_x: f64, ba_y: f64, good_cavity: bool) -> QuadratureVariances {
    let floor = (2.0 * p.n_th + 1.0) / 2.0;
    QuadratureVariances {
        var_x: floor + ba_x,
        var_y: floor + ba_x + ba_y,
        thermal_floor: floor,
        ba_x,
        ba_y,
        validity: classify(p, good_cavity),
    }
}

/// Time-averaged quadrature variances under sinusoidal resonant driving,
/// full expressions in kappa and Omega (valid for gamma, Gamma << kappa,
/// Omega and weak coupling).
pub fn quadrature_variances(p: &SystemParams) -> QuadratureVariances {
    let (ba_x, ba_y) = ba_terms_full(p);
    assemble(p, ba_x, ba_y, false)
}

/// Good-cavity (kappa << Omega) limit of [`quadrature_variances`].
pub fn quadrature_variances_good_cavity(p: &SystemParams) -> QuadratureVariances {
    let s = p.scaled();
    let f = drive_prefactor(p);
    let (w2, g) = (s.omega * s.omega, s.gamma_l);
    let w4 = w2 * w2;
    let ba_x = f * 9.0 * (1.0 + 2.0 * g) / (4.0 * w4);
    let ba_y = f * (8.0 * (1.0 - 2.0 * g) / w2 + 16.0 * g / w4);
    assemble(p, ba_x, ba_y, true)
}

/// Ratio of cosine-quadrature to sine-quadrature drive heating (n_M plays
/// no role in the back-action parts and is forced to zero).
pub fn heating_ratio(p: &SystemParams) -> f64 {
    let mut q = *p;
    q.n_th = 0.0;
    let v = quadrature_variances(&q);
    v.ba_x / v.ba_y
}

/// Rotating-frame quadratures of a sampled phase-space trajectory:
///
/// X = [x / x_zpt * cos(Omega t) - p / p_zpt * sin(Omega t)] / sqrt(2),
/// Y = [x / x_zpt * sin(Omega t) + p / p_zpt * cos(Omega t)] / sqrt(2),
///
/// with p = M v and p_zpt = hbar / (2 x_zpt). The normalization is chosen
/// so a classical thermal trajectory time-averages to <X^2> = <Y^2> = n_M;
/// the Monte-Carlo estimator adds the +1/2 floor to match the quantum
/// convention of [`quadrature_variances`].
pub fn quadrature_trajectory(
    p: &SystemParams,
    t: &[f64],
    x: &[f64],
    v: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let x_zpt = p.x_zpt();
    let p_zpt = HBAR / (2.0 * x_zpt);
    let root2 = std::f64::consts::SQRT_2;
    let mut qx = Vec::with_capacity(t.len());
    let mut qy = Vec::with_capacity(t.len());
    for ((&ti, &xi), &vi) in t.iter().zip(x).zip(v) {
        let (s, c) = (p.omega_m * ti).sin_cos();
        let a = xi / x_zpt;
        let b = p.mass * vi / p_zpt;
        qx.push((a * c - b * s) / root2);
        qy.push((a * s + b * c) / root2);
    }
    (qx, qy)
}
