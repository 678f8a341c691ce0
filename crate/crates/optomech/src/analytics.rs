//! Closed-form single-frequency-driving results at finite laser linewidth:
//! intracavity energy, back-action damping, optical spring shift, and the
//! damping-enhancement criterion.
//!
//! All expressions are evaluated in kappa-normalized variables and scaled
//! back to SI at the end; see [`crate::system::KappaScaled`].

use crate::error::Result;
use crate::quad;
use crate::system::SystemParams;

/// Which sideband coefficient to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// A rate together with a validity indicator. Warnings are data, not logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlaggedRate {
    pub value: f64,
    /// True when the parameters violate the assumption behind the formula
    /// (weak damping for `optical_damping`, small shift for
    /// `frequency_shift`).
    pub outside_validity: bool,
}

/// Bundle of the closed-form back-action quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackActionResult {
    /// Optical damping Gamma_opt (rad/s).
    pub gamma_opt: f64,
    /// Optical spring shift DeltaOmega_opt (rad/s).
    pub delta_omega_opt: f64,
    /// A+ coefficient (s).
    pub a_plus: f64,
    /// A- coefficient (s).
    pub a_minus: f64,
    /// B+ coefficient ((rad/s)^2).
    pub b_plus: f64,
    /// B- coefficient ((rad/s)^2).
    pub b_minus: f64,
    /// Mean intracavity field energy |beta_0|^2 (J).
    pub beta0_sq: f64,
    /// True if the weak-damping assumption Gamma + Gamma_opt << kappa fails.
    pub outside_validity: bool,
}

/// Mean intracavity field energy |beta_0|^2 (J).
///
/// |beta_0|^2 = P * 4 (2 gamma + kappa) / [(2 gamma + kappa)^2 + 4 Delta^2].
pub fn intracavity_energy(p: &SystemParams) -> f64 {
    let s = p.scaled();
    let c = 2.0 * s.gamma_l + 1.0;
    p.power * 4.0 * c / (c * c + 4.0 * s.delta * s.delta) / p.kappa
}

/// Dimensionless A-coefficient (kappa * A_pm), normalized variables.
fn a_coeff_scaled(delta: f64, omega: f64, gamma_l: f64, sign: Sign) -> f64 {
    let c = 2.0 * gamma_l + 1.0;
    let shifted = match sign {
        Sign::Plus => delta - omega,
        Sign::Minus => delta + omega,
    };
    let num = (gamma_l + 1.0) * c * c
        + 2.0 * gamma_l * (shifted * shifted + delta * delta)
        + omega * omega;
    let den = (c * c + 4.0 * shifted * shifted) * (1.0 + omega * omega);
    num / den
}

/// Dimensionless B-coefficient (B_pm / kappa^2), normalized variables.
fn b_coeff_scaled(delta: f64, omega: f64, gamma_l: f64, sign: Sign) -> f64 {
    let c = 2.0 * gamma_l + 1.0;
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let shifted = delta + s * omega;
    let two_d = 2.0 * delta + s * omega;
    let num = c * c * c + two_d * two_d + (8.0 * gamma_l * delta + 4.0 * delta * omega * omega) * shifted
        - 4.0 * gamma_l * gamma_l * omega * omega;
    let den = c * c + 4.0 * shifted * shifted;
    num / den
}

/// Sideband coefficient A_pm (s).
pub fn coeff_a(p: &SystemParams, sign: Sign) -> f64 {
    let s = p.scaled();
    a_coeff_scaled(s.delta, s.omega, s.gamma_l, sign) / p.kappa
}

/// Spring coefficient B_pm ((rad/s)^2).
pub fn coeff_b(p: &SystemParams, sign: Sign) -> f64 {
    let s = p.scaled();
    b_coeff_scaled(s.delta, s.omega, s.gamma_l, sign) * p.kappa * p.kappa
}

/// Optical damping Gamma_opt (rad/s) with a weak-damping validity flag.
pub fn optical_damping(p: &SystemParams) -> FlaggedRate {
    let s = p.scaled();
    let c = 2.0 * s.gamma_l + 1.0;
    let drive = s.g0 * s.g0 * s.b0_sq; // g0^2 |b0|^2 / kappa^3
    let a_diff = a_coeff_scaled(s.delta, s.omega, s.gamma_l, Sign::Minus)
        - a_coeff_scaled(s.delta, s.omega, s.gamma_l, Sign::Plus);
    let value = 16.0 * drive * a_diff / (c * c + 4.0 * s.delta * s.delta) * p.kappa;
    let outside_validity = (p.gamma_m + value).abs() > p.kappa / 10.0;
    FlaggedRate {
        value,
        outside_validity,
    }
}

/// Optical spring shift DeltaOmega_opt (rad/s) with a small-shift flag.
pub fn frequency_shift(p: &SystemParams) -> FlaggedRate {
    let s = p.scaled();
    let c = 2.0 * s.gamma_l + 1.0;
    let drive = s.g0 * s.g0 * s.b0_sq;
    let b_diff = b_coeff_scaled(s.delta, s.omega, s.gamma_l, Sign::Plus)
        - b_coeff_scaled(s.delta, s.omega, s.gamma_l, Sign::Minus);
    let value = -(4.0 * drive / s.omega) * b_diff
        / ((c * c + 4.0 * s.delta * s.delta) * (1.0 + s.omega * s.omega))
        * p.kappa;
    let outside_validity = value.abs() > p.omega_m / 10.0;
    FlaggedRate {
        value,
        outside_validity,
    }
}

/// All closed-form back-action quantities at once.
pub fn back_action(p: &SystemParams) -> BackActionResult {
    let damping = optical_damping(p);
    let shift = frequency_shift(p);
    BackActionResult {
        gamma_opt: damping.value,
        delta_omega_opt: shift.value,
        a_plus: coeff_a(p, Sign::Plus),
        a_minus: coeff_a(p, Sign::Minus),
        b_plus: coeff_b(p, Sign::Plus),
        b_minus: coeff_b(p, Sign::Minus),
        beta0_sq: intracavity_energy(p),
        outside_validity: damping.outside_validity || shift.outside_validity,
    }
}

/// Independent gamma = 0 damping reference (standard sideband-cooling rate),
/// coded from the zero-linewidth literature form rather than the finite-gamma
/// coefficients.
pub fn reference_damping_zero_gamma(p: &SystemParams) -> f64 {
    let s = p.scaled();
    let (d, w) = (s.delta, s.omega);
    let n_cav = s.b0_sq / (0.25 + d * d);
    let lorentz = |x: f64| 1.0 / (0.25 + x * x);
    s.g0 * s.g0 * n_cav * (lorentz(d + w) - lorentz(d - w)) * p.kappa
}

/// Independent gamma = 0 spring reference (standard optical-spring shift).
pub fn reference_shift_zero_gamma(p: &SystemParams) -> f64 {
    let s = p.scaled();
    let (d, w) = (s.delta, s.omega);
    let n_cav = s.b0_sq / (0.25 + d * d);
    let term = |x: f64| x / (0.25 + x * x);
    s.g0 * s.g0 * n_cav * (term(d + w) + term(d - w)) * p.kappa
}

/// Outcome of the damping-enhancement criterion G(Delta, gamma) > G(Delta, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enhancement {
    pub enhanced: bool,
    pub g_gamma: f64,
    pub g_zero: f64,
}

/// Weighted sideband asymmetry G(Delta, gamma) =
/// |integral (A_-(nu) - A_+(nu)) |beta_0(nu - Delta, gamma)|^2 d nu|,
/// with A_pm(nu) meaning A_pm evaluated at detuning nu (same linewidth) and
/// the intensity Lorentzian centered at Delta.
fn g_weight(p: &SystemParams, gamma_l: f64, tol: f64) -> Result<f64> {
    let s = p.scaled();
    let c = 2.0 * gamma_l + 1.0;
    let intensity = |nu: f64| {
        let x = nu - s.delta;
        4.0 * c / (c * c + 4.0 * x * x)
    };
    let integrand = |nu: f64| {
        (a_coeff_scaled(nu, s.omega, gamma_l, Sign::Minus)
            - a_coeff_scaled(nu, s.omega, gamma_l, Sign::Plus))
            * intensity(nu)
    };
    // integrand decays as nu^-3; cut where the tail contributes < tol/10
    let scale = s.delta.abs() + s.omega + c;
    let cutoff = scale * (10.0 / tol).cbrt().max(10.0);
    // pre-split around the Lorentzian and the two sideband peaks
    let mut knots = vec![
        -cutoff,
        s.delta - 10.0 * c,
        s.delta + 10.0 * c,
        -s.omega,
        s.omega,
        cutoff,
    ];
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();
    let mut total = 0.0;
    for pair in knots.windows(2) {
        if pair[1] > pair[0] {
            total += quad::integrate(&integrand, pair[0], pair[1], tol)?;
        }
    }
    Ok(total.abs())
}

/// Decide whether the finite linewidth increases back-action damping.
pub fn damping_enhancement(p: &SystemParams, quadrature_tol: f64) -> Result<Enhancement> {
    let s = p.scaled();
    let g_gamma = g_weight(p, s.gamma_l, quadrature_tol)?;
    let g_zero = g_weight(p, 0.0, quadrature_tol)?;
    Ok(Enhancement {
        enhanced: g_gamma > g_zero,
        g_gamma,
        g_zero,
    })
}
