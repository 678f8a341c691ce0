//! Quantum noise spectral density of the mechanical occupation, the minimum
//! phonon number (closed form and by quadrature), and the frequency-domain
//! linear-response solution used as the independent second route to S_N.

use num_complex::Complex64;
use serde::Serialize;

use crate::analytics;
use crate::error::{Error, Result};
use crate::system::SystemParams;

/// Spectrum building blocks at one frequency (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumComponents {
    /// Optical (back-action) noise weight ((rad/s)^2).
    pub sigma_opt: f64,
    /// Thermal noise weight ((rad/s)^2).
    pub sigma_th: f64,
    /// Response denominator Lambda(omega) ((rad/s)^2).
    pub lambda: Complex64,
    /// Field-mediated self-energy sigma(omega) (rad/s).
    pub sigma: Complex64,
}

/// Kappa-normalized working set for the spectrum formulas.
struct Norm {
    omega_m: f64,
    gamma_m: f64,
    gamma_l: f64,
    delta: f64,
    /// g0^2 |B0|^2 / kappa^2 (dimensionless).
    gb: f64,
    n_th: f64,
}

impl Norm {
    fn new(p: &SystemParams) -> Self {
        let s = p.scaled();
        let b0_abs_sq = s.b0_sq / (0.25 + s.delta * s.delta);
        Norm {
            omega_m: s.omega,
            gamma_m: s.gamma,
            gamma_l: s.gamma_l,
            delta: s.delta,
            gb: s.g0 * s.g0 * b0_abs_sq,
            n_th: s.n_th,
        }
    }

    fn chi_m_inv(&self, w: f64) -> Complex64 {
        Complex64::new(self.gamma_m / 2.0, -(w - self.omega_m))
    }

    fn chi_r(&self, w: f64) -> Complex64 {
        Complex64::new(0.5, -(w + self.delta)).inv()
    }

    fn sigma(&self, w: f64) -> Complex64 {
        self.gb * (self.chi_r(w) - self.chi_r(-w).conj())
    }

    fn lambda(&self, w: f64) -> Complex64 {
        self.chi_m_inv(w) * self.chi_m_inv(-w).conj()
            - Complex64::new(0.0, 2.0 * self.omega_m) * self.sigma(w)
    }

    /// S_N at normalized frequency w, in units of 1/kappa.
    fn s_n(&self, w: f64) -> f64 {
        let c = 2.0 * self.gamma_l + 1.0;
        let sigma = self.sigma(w);
        let chi_m_inv = self.chi_m_inv(w);
        let lorentz = c * c + 4.0 * (w + self.delta) * (w + self.delta);
        let sigma_opt = 4.0 * self.gb / lorentz * chi_m_inv.norm_sqr();
        let sigma_th =
            self.n_th * (chi_m_inv + sigma).norm_sqr() + (self.n_th + 1.0) * sigma.norm_sqr();
        (c * sigma_opt + self.gamma_m * sigma_th) / self.lambda(w).norm_sqr()
    }
}

/// Spectrum components at one frequency (rad/s).
pub fn spectrum_components(p: &SystemParams, omega: f64) -> SpectrumComponents {
    let n = Norm::new(p);
    let k = p.kappa;
    let w = omega / k;
    let c = 2.0 * n.gamma_l + 1.0;
    let chi_m_inv = n.chi_m_inv(w);
    let sigma = n.sigma(w);
    let lorentz = c * c + 4.0 * (w + n.delta) * (w + n.delta);
    let sigma_opt = 4.0 * n.gb / lorentz * chi_m_inv.norm_sqr();
    let sigma_th = n.n_th * (chi_m_inv + sigma).norm_sqr() + (n.n_th + 1.0) * sigma.norm_sqr();
    SpectrumComponents {
        sigma_opt: sigma_opt * k * k,
        sigma_th: sigma_th * k * k,
        lambda: n.lambda(w) * k * k,
        sigma: sigma * k,
    }
}

/// Noise spectral density S_N at one frequency (seconds).
pub fn s_n_at(p: &SystemParams, omega: f64) -> f64 {
    Norm::new(p).s_n(omega / p.kappa) / p.kappa
}

/// Sampling plan for [`noise_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// Half-span; the grid covers [-span, span] (rad/s).
    pub span: f64,
    /// Uniform base samples across the span.
    pub base_points: usize,
    /// Add arctangent-clustered samples around the four response peaks so
    /// narrow mechanical lines are resolved without exploding the grid.
    pub refine_peaks: bool,
    /// Clustered samples per peak.
    pub points_per_peak: usize,
}

impl GridSpec {
    /// Default plan: [-8 Omega, 8 Omega], 2^16 + 1 base points, refined.
    pub fn default_for(p: &SystemParams) -> Self {
        GridSpec {
            span: 8.0 * p.omega_m.max(p.kappa),
            base_points: (1 << 16) + 1,
            refine_peaks: true,
            points_per_peak: 4001,
        }
    }
}

/// Sampled S_N over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    /// Strictly increasing frequencies (rad/s).
    pub omega: Vec<f64>,
    /// S_N values (seconds).
    pub s_n: Vec<f64>,
    /// Analytic 1/omega^2 tail estimate beyond the span (dimensionless
    /// occupation units), added by [`mean_phonon_number`].
    pub tail_estimate: f64,
    /// False when min |Lambda| over the grid fell below 1e-10 max |Lambda|
    /// (parametric instability; the linearized spectrum is invalid).
    pub stable: bool,
    /// kappa used for normalized serialization.
    pub kappa: f64,
}

fn peak_samples(center: f64, width: f64, span: f64, count: usize) -> Vec<f64> {
    // w * tan(theta) spacing equidistributes a Lorentzian of HWHM w
    let theta_lo = ((-span - center) / width).atan();
    let theta_hi = ((span - center) / width).atan();
    (0..count)
        .map(|i| {
            let t = theta_lo + (theta_hi - theta_lo) * i as f64 / (count - 1) as f64;
            center + width * t.tan()
        })
        .collect()
}

/// Sample S_N over the requested grid.
pub fn noise_spectrum(p: &SystemParams, spec: &GridSpec) -> Result<SpectrumGrid> {
    let gamma_opt0 = {
        let mut q = *p;
        q.gamma_l = 0.0;
        analytics::optical_damping(&q).value
    };
    let margin = spec.span - p.omega_m;
    let needed = 10.0 * (p.gamma_m + gamma_opt0.abs()).max(p.kappa);
    if margin < needed {
        return Err(Error::GridTooNarrow {
            needed,
            have: margin,
        });
    }

    let mut omega: Vec<f64> = (0..spec.base_points)
        .map(|i| -spec.span + 2.0 * spec.span * i as f64 / (spec.base_points - 1) as f64)
        .collect();
    if spec.refine_peaks {
        let mech_width = (p.gamma_m + gamma_opt0.abs()).max(1e-9 * p.kappa);
        let cav_width = p.gamma_l + p.kappa / 2.0;
        for (center, width) in [
            (p.omega_m, mech_width),
            (-p.omega_m, mech_width),
            (p.detuning, cav_width),
            (-p.detuning, cav_width),
        ] {
            omega.extend(peak_samples(center, width, spec.span, spec.points_per_peak));
        }
        omega.sort_by(|a, b| a.partial_cmp(b).unwrap());
        omega.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * spec.span);
    }

    let n = Norm::new(p);
    let k = p.kappa;
    let s_n: Vec<f64> = omega.iter().map(|&w| n.s_n(w / k) / k).collect();

    let mut min_lambda = f64::INFINITY;
    let mut max_lambda = 0.0f64;
    for &w in &omega {
        let l = n.lambda(w / k).norm();
        min_lambda = min_lambda.min(l);
        max_lambda = max_lambda.max(l);
    }
    let stable = min_lambda >= 1e-10 * max_lambda;

    let tail = (s_n[0] * omega[0].abs() + s_n[s_n.len() - 1] * omega[omega.len() - 1])
        / (2.0 * std::f64::consts::PI);

    Ok(SpectrumGrid {
        omega,
        s_n,
        tail_estimate: tail,
        stable,
        kappa: k,
    })
}

/// Occupation estimate with its truncation-error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononEstimate {
    pub value: f64,
    /// Size of the analytic tail correction that was added; bounds the
    /// truncation error of the finite span.
    pub truncation_error: f64,
}

/// (1/2 pi) integral of S_N over the grid (trapezoid) plus the 1/omega^2
/// tail correction beyond the span.
pub fn mean_phonon_number(grid: &SpectrumGrid) -> PhononEstimate {
    let mut sum = 0.0;
    for i in 1..grid.omega.len() {
        sum += 0.5 * (grid.s_n[i] + grid.s_n[i - 1]) * (grid.omega[i] - grid.omega[i - 1]);
    }
    let value = sum / (2.0 * std::f64::consts::PI) + grid.tail_estimate;
    PhononEstimate {
        value,
        truncation_error: grid.tail_estimate,
    }
}

/// Weak-coupling minimum occupation (Gamma_opt << kappa), closed form.
pub fn n_min_weak_coupling(p: &SystemParams) -> Result<f64> {
    if p.detuning >= 0.0 {
        return Err(Error::BlueDetunedNoMinimum);
    }
    let s = p.scaled();
    let (d, w) = (s.delta, s.omega);
    let c = 2.0 * s.gamma_l + 1.0;
    let num = c * (1.0 + 4.0 * (d - w) * (d - w)) * (1.0 + 4.0 * (d + w) * (d + w));
    let den = 16.0 * d * w * (c * c + 4.0 * (d - w) * (d - w));
    Ok(-num / den)
}

/// Good-cavity minimum occupation (gamma << kappa << Omega, Delta = -Omega).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodCavityNmin {
    pub value: f64,
    /// True if the good-cavity preconditions are clearly violated.
    pub outside_validity: bool,
}

pub fn n_min_good_cavity(p: &SystemParams) -> GoodCavityNmin {
    let s = p.scaled();
    let c = 2.0 * s.gamma_l + 1.0;
    GoodCavityNmin {
        value: c / (16.0 * s.omega * s.omega),
        outside_validity: !(s.gamma_l < 1.0 && s.omega > 1.0),
    }
}

/// Transfer coefficients of the linear-response solution: the mechanical
/// annihilation amplitude A[omega] written as a linear combination of the
/// four input noises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCoefficients {
    pub d_in: Complex64,
    pub d_in_dag: Complex64,
    pub a_in: Complex64,
    pub a_in_dag: Complex64,
    pub sigma_denominator: Complex64,
}

fn transfer_at(n: &Norm, w: f64) -> Result<TransferCoefficients> {
    let chi_m = n.chi_m_inv(w).inv();
    let chi_m_conj_neg = n.chi_m_inv(-w).conj().inv();
    let sigma = n.sigma(w);
    let big_sigma = Complex64::new(1.0, 0.0) + sigma * (chi_m - chi_m_conj_neg);
    if big_sigma.norm() < 1e-12 {
        return Err(Error::SingularSigma(1e-12));
    }
    // Optical noise enters through the phase-noise-broadened cavity response:
    // channel weight kappa -> 2 gamma + kappa and the same substitution in
    // the Lorentzian, which is what produces the (2 gamma + kappa) sigma_opt
    // weight of the direct formula.
    let c = 2.0 * n.gamma_l + 1.0;
    let chi_rg = |x: f64| Complex64::new(c / 2.0, -(x + n.delta)).inv();
    let g_b0 = n.gb.sqrt(); // g0 |B0| with B0 taken real-positive
    let i = Complex64::i();
    let sqrt_gamma = n.gamma_m.sqrt();

    // inhomogeneous coefficients of the A equation (channels D, Ddag, A, Adag)
    let m = [
        i * g_b0 * c.sqrt() * chi_rg(w),
        i * g_b0 * c.sqrt() * chi_rg(-w).conj(),
        Complex64::new(-sqrt_gamma, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    // and of the conjugate (A-dagger) equation
    let m_bar = [
        -i * g_b0 * c.sqrt() * chi_rg(w),
        -i * g_b0 * c.sqrt() * chi_rg(-w).conj(),
        Complex64::new(0.0, 0.0),
        Complex64::new(-sqrt_gamma, 0.0),
    ];
    let mut a = [Complex64::new(0.0, 0.0); 4];
    for ch in 0..4 {
        let u = (chi_m * m[ch] + chi_m_conj_neg * m_bar[ch]) / big_sigma;
        a[ch] = chi_m * (m[ch] - sigma * u);
    }
    Ok(TransferCoefficients {
        d_in: a[0],
        d_in_dag: a[1],
        a_in: a[2],
        a_in_dag: a[3],
        sigma_denominator: big_sigma,
    })
}

/// Linear-response transfer coefficients at `omega` (rad/s). The
/// coefficients are dimensionless except for the sqrt(rate) channel weights,
/// which are carried in kappa-normalized units.
pub fn linear_response_solve(p: &SystemParams, omega: f64) -> Result<TransferCoefficients> {
    transfer_at(&Norm::new(p), omega / p.kappa)
}

/// Rebuild S_N at `omega` (seconds) by contracting the transfer
/// coefficients with the two-frequency input correlations. Independent
/// second route to the direct closed form.
pub fn s_n_from_transfer(p: &SystemParams, omega: f64) -> Result<f64> {
    let n = Norm::new(p);
    let t = transfer_at(&n, -omega / p.kappa)?;
    let s = t.d_in_dag.norm_sqr()
        + n.n_th * t.a_in.norm_sqr()
        + (n.n_th + 1.0) * t.a_in_dag.norm_sqr();
    Ok(s / p.kappa)
}

impl SpectrumGrid {
    /// CSV with kappa-normalized columns `omega_over_kappa,s_n_times_kappa`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "omega_over_kappa,s_n_times_kappa")?;
        for (w, s) in self.omega.iter().zip(&self.s_n) {
            writeln!(out, "{},{}", w / self.kappa, s * self.kappa)?;
        }
        Ok(())
    }

    /// JSON document with a parameter echo.
    pub fn to_json(&self, p: &SystemParams) -> serde_json::Value {
        serde_json::json!({
            "params": p,
            "stable": self.stable,
            "tail_estimate": self.tail_estimate,
            "omega": self.omega,
            "s_n": self.s_n,
        })
    }
}
