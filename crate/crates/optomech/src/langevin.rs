//! Independent oracles for the closed forms: stochastic integration of the
//! classical mirror-field equations with laser phase diffusion, ring-down
//! estimation of the effective damping and frequency, Monte-Carlo quadrature
//! variances, and a deterministic phase-averaged intensity kernel.
//!
//! The equations of motion are
//!
//! x'' + Gamma x' + Omega^2 x = (|beta|^2 - |beta_0|^2) / (M L)
//!                              + sqrt(2 k_B T_eff Gamma / M) nu(t),
//! beta' = [i (Delta + g0 x / x_zpt) - kappa/2] beta + sqrt(kappa P) e^{i phi(t)},
//!
//! with phi a Wiener process, d phi = sqrt(2 gamma dt) N(0,1), so the drive
//! field decorrelates as <e^{i[phi(t)-phi(s)]}> = e^{-gamma |t-s|}. The
//! radiation-pressure mean is subtracted analytically so trajectories
//! fluctuate around zero displacement.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics;
use crate::error::{Error, Result};
use crate::system::{SystemParams, KB};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// First-order Euler-Maruyama reference scheme.
    EulerMaruyama,
    /// Exact exponential propagation of the field's linear part plus
    /// velocity-Verlet splitting with an exact Ornstein-Uhlenbeck thermal
    /// step for the mirror (second order deterministically; default).
    ExponentialVerlet,
}

/// Shape of the drive amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveMode {
    /// Constant-amplitude drive sqrt(kappa P) e^{i phi}.
    Constant,
    /// Amplitude modulated at the mechanical frequency,
    /// sqrt(kappa P) sin(Omega t) e^{i phi} (back-action evasion drive).
    SineModulated,
}

/// Simulation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Step (s); must satisfy dt <= min(1/kappa, 1/Omega, 1/Gamma_eff) / 50.
    pub dt: f64,
    /// Total simulated time (s).
    pub duration: f64,
    /// Ensemble size.
    pub n_traj: usize,
    /// RNG seed; trajectory k uses an independent stream k of this seed.
    pub seed: u64,
    /// Initial displacement amplitude (m): x(0) = 0, v(0) = Omega x0, so the
    /// noiseless trajectory is x0 sin(Omega t). Advisory: x0 >= x_zpt.
    pub x0: f64,
    pub scheme: Scheme,
    pub drive: DriveMode,
    /// Hold the mirror at x = 0 (field-only runs).
    pub freeze_mirror: bool,
    /// Start (x, v) from the classical thermal distribution instead of the
    /// ring-down initial condition.
    pub thermal_init: bool,
    /// Record every k-th step (k >= 1).
    pub record_every: usize,
}

impl SimConfig {
    pub fn new(dt: f64, duration: f64, n_traj: usize, seed: u64, x0: f64) -> Self {
        SimConfig {
            dt,
            duration,
            n_traj,
            seed,
            x0,
            scheme: Scheme::ExponentialVerlet,
            drive: DriveMode::Constant,
            freeze_mirror: false,
            thermal_init: false,
            record_every: 1,
        }
    }

    fn validated(&self, p: &SystemParams) -> Result<()> {
        if !(self.dt > 0.0 && self.duration >= self.dt) {
            return Err(Error::InvalidParams("dt must be > 0 and <= duration".into()));
        }
        if self.n_traj < 1 || self.record_every < 1 {
            return Err(Error::InvalidParams(
                "n_traj and record_every must be >= 1".into(),
            ));
        }
        // with a frozen mirror only the field timescale matters
        let mut bound = 1.0 / p.kappa / 50.0;
        if !self.freeze_mirror {
            bound = bound.min(1.0 / p.omega_m / 50.0);
            let gamma_eff = p.gamma_m + analytics::optical_damping(p).value.abs();
            if gamma_eff > 0.0 {
                bound = bound.min(1.0 / gamma_eff / 50.0);
            }
        }
        if self.dt > bound {
            return Err(Error::InvalidParams(format!(
                "dt = {} exceeds stability bound {}",
                self.dt, bound
            )));
        }
        Ok(())
    }
}

/// Time series of one stochastic run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Sample times (s).
    pub t: Vec<f64>,
    /// Position (m).
    pub x: Vec<f64>,
    /// Velocity (m/s).
    pub v: Vec<f64>,
    /// Intracavity field, real part (sqrt J).
    pub beta_re: Vec<f64>,
    /// Intracavity field, imaginary part (sqrt J).
    pub beta_im: Vec<f64>,
    /// Laser phase (rad).
    pub phi: Vec<f64>,
}

impl Trajectory {
    /// CSV with columns t,x,v,beta_re,beta_im,phi.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,v,beta_re,beta_im,phi")?;
        for i in 0..self.t.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.t[i], self.x[i], self.v[i], self.beta_re[i], self.beta_im[i], self.phi[i]
            )?;
        }
        Ok(())
    }
}

/// Monte-Carlo point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl EstimateWithError {
    /// Mean and standard error of a sample of per-trajectory estimates.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var =
                samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        EstimateWithError {
            value: mean,
            std_error,
            n_samples: n,
        }
    }
}

/// Mean radiation-pressure intensity subtracted from the force so that the
/// mirror fluctuates about x = 0 (J).
fn mean_intensity(p: &SystemParams, drive: DriveMode) -> f64 {
    match drive {
        DriveMode::Constant => analytics::intracavity_energy(p),
        DriveMode::SineModulated => {
            // DC part of the phase-averaged |beta|^2 under the sinusoidal
            // drive: (P/2) Sum_{n=+-1} Re[1 / (mu_n + gamma)],
            // mu_n = i (n Omega - Delta) + kappa/2
            let mut dc = 0.0;
            for n in [-1.0, 1.0] {
                let mu = Complex64::new(p.kappa / 2.0, n * p.omega_m - p.detuning);
                dc += (mu + p.gamma_l).inv().re;
            }
            p.power / 2.0 * dc
        }
    }
}

struct Stepper<'a> {
    p: &'a SystemParams,
    cfg: &'a SimConfig,
    inv_ml: f64,
    omega_sq: f64,
    g0_over_xzpt: f64,
    sqrt_kp: f64,
    rp_mean: f64,
    // Ornstein-Uhlenbeck thermal step constants
    ou_decay: f64,
    ou_noise: f64,
    phase_step: f64,
    // Euler-Maruyama thermal kick
    em_noise: f64,
    beta_bound_sq: f64,
}

impl<'a> Stepper<'a> {
    fn new(p: &'a SystemParams, cfg: &'a SimConfig) -> Self {
        let dt = cfg.dt;
        let t_eff = p.t_eff();
        let ou_decay = (-p.gamma_m * dt).exp();
        Stepper {
            p,
            cfg,
            inv_ml: 1.0 / (p.mass * p.length),
            omega_sq: p.omega_m * p.omega_m,
            g0_over_xzpt: p.g0() / p.x_zpt(),
            sqrt_kp: (p.kappa * p.power).sqrt(),
            rp_mean: mean_intensity(p, cfg.drive),
            ou_decay,
            ou_noise: ((1.0 - ou_decay * ou_decay) * KB * t_eff / p.mass).sqrt(),
            phase_step: (2.0 * p.gamma_l * dt).sqrt(),
            em_noise: (2.0 * KB * t_eff * p.gamma_m / p.mass * dt).sqrt(),
            beta_bound_sq: 1e6 * 4.0 * p.power / p.kappa,
        }
    }

    fn accel(&self, x: f64, beta: Complex64) -> f64 {
        (beta.norm_sqr() - self.rp_mean) * self.inv_ml - self.omega_sq * x
    }

    fn drive_amp(&self, t: f64) -> f64 {
        match self.cfg.drive {
            DriveMode::Constant => 1.0,
            DriveMode::SineModulated => (self.p.omega_m * t).sin(),
        }
    }

    /// Exponential update of the field over dt at frozen mirror position.
    fn field_step(&self, beta: Complex64, x: f64, phi: f64, t: f64) -> Complex64 {
        let lambda = Complex64::new(
            -self.p.kappa / 2.0,
            self.p.detuning + self.g0_over_xzpt * x,
        );
        let drive = self.sqrt_kp * self.drive_amp(t) * Complex64::new(0.0, phi).exp();
        let e = (lambda * self.cfg.dt).exp();
        e * beta + drive * (e - 1.0) / lambda
    }
}

fn run_one(p: &SystemParams, cfg: &SimConfig, stream: u64) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let stepper = Stepper::new(p, cfg);
    let dt = cfg.dt;
    let n_steps = (cfg.duration / dt).round() as usize;

    let (mut x, mut v) = if cfg.freeze_mirror {
        (0.0, 0.0)
    } else if cfg.thermal_init {
        let t_eff = p.t_eff();
        let sx = (KB * t_eff / (p.mass * p.omega_m * p.omega_m)).sqrt();
        let sv = (KB * t_eff / p.mass).sqrt();
        let nx: f64 = rng.sample(StandardNormal);
        let nv: f64 = rng.sample(StandardNormal);
        (sx * nx, sv * nv)
    } else {
        (0.0, p.omega_m * cfg.x0)
    };
    let mut phi = 0.0f64;
    // start the field in the instantaneous steady state of the initial drive
    let lambda0 = Complex64::new(-p.kappa / 2.0, p.detuning + stepper.g0_over_xzpt * x);
    let mut beta = -stepper.sqrt_kp * stepper.drive_amp(0.0) / lambda0 * Complex64::new(1.0, 0.0);

    let cap = n_steps / cfg.record_every + 2;
    let mut out = Trajectory {
        t: Vec::with_capacity(cap),
        x: Vec::with_capacity(cap),
        v: Vec::with_capacity(cap),
        beta_re: Vec::with_capacity(cap),
        beta_im: Vec::with_capacity(cap),
        phi: Vec::with_capacity(cap),
    };
    let mut record = |t: f64, x: f64, v: f64, beta: Complex64, phi: f64| -> Result<()> {
        if !(x.is_finite() && v.is_finite() && beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        out.t.push(t);
        out.x.push(x);
        out.v.push(v);
        out.beta_re.push(beta.re);
        out.beta_im.push(beta.im);
        out.phi.push(phi);
        Ok(())
    };
    record(0.0, x, v, beta, phi)?;

    for step in 0..n_steps {
        let t = step as f64 * dt;
        match cfg.scheme {
            Scheme::ExponentialVerlet => {
                let half = 0.5 * dt;
                if !cfg.freeze_mirror {
                    v += half * stepper.accel(x, beta);
                    x += half * v;
                    v = stepper.ou_decay * v
                        + stepper.ou_noise * rng.sample::<f64, _>(StandardNormal);
                }
                phi += stepper.phase_step * rng.sample::<f64, _>(StandardNormal);
                beta = stepper.field_step(beta, x, phi, t + half);
                if !cfg.freeze_mirror {
                    x += half * v;
                    v += half * stepper.accel(x, beta);
                }
            }
            Scheme::EulerMaruyama => {
                let a = stepper.accel(x, beta) - p.gamma_m * v;
                let lambda =
                    Complex64::new(-p.kappa / 2.0, p.detuning + stepper.g0_over_xzpt * x);
                let drive =
                    stepper.sqrt_kp * stepper.drive_amp(t) * Complex64::new(0.0, phi).exp();
                beta += dt * (lambda * beta + drive);
                if !cfg.freeze_mirror {
                    x += dt * v;
                    v += dt * a + stepper.em_noise * rng.sample::<f64, _>(StandardNormal);
                }
                phi += stepper.phase_step * rng.sample::<f64, _>(StandardNormal);
            }
        }
        if stepper.beta_bound_sq > 0.0 && beta.norm_sqr() > stepper.beta_bound_sq {
            return Err(Error::StepTooLarge { t: t + dt });
        }
        if (step + 1) % cfg.record_every == 0 || step + 1 == n_steps {
            record((step + 1) as f64 * dt, x, v, beta, phi)?;
        }
    }
    Ok(out)
}

/// Integrate one trajectory (RNG stream 0 of the configured seed).
pub fn simulate(p: &SystemParams, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validated(p)?;
    run_one(p, cfg, 0)
}

/// Integrate an ensemble in parallel; trajectory k uses RNG stream k, so
/// results are independent of thread scheduling.
pub fn simulate_ensemble(p: &SystemParams, cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    cfg.validated(p)?;
    (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|k| run_one(p, cfg, k))
        .collect()
}

/// Demodulate a position record at the mechanical frequency and fit the
/// ring-down: returns (Gamma_eff, Omega_eff) for one trajectory.
fn fit_ringdown(p: &SystemParams, t: &[f64], x: &[f64], x_scale: f64) -> Result<(f64, f64)> {
    // z(t) = x(t) e^{-i Omega t}, boxcar-averaged over one period, decays as
    // e^{-Gamma_eff t / 2} e^{i (Omega_eff - Omega) t}
    let h = t[1] - t[0];
    // fractional-length window covering exactly one period, so the counter-
    // rotating e^{-2 i Omega t} component cancels instead of leaking into
    // the phase fit through integer rounding of the window
    let period_samples = (2.0 * std::f64::consts::PI / p.omega_m) / h;
    let window = period_samples.floor() as usize;
    let frac = period_samples - window as f64;
    if window < 4 || t.len() < 2 * (window + 1) {
        return Err(Error::FitNotConverged(
            "record too coarse for one-period demodulation".into(),
        ));
    }
    let z: Vec<Complex64> = t
        .iter()
        .zip(x)
        .map(|(&ti, &xi)| xi * Complex64::new(0.0, -p.omega_m * ti).exp())
        .collect();
    let n_avg = z.len() - window - 1;
    let mut zbar = Vec::with_capacity(n_avg);
    let mut acc: Complex64 = z[..window].iter().sum();
    for i in 0..n_avg {
        zbar.push((acc + frac * z[i + window]) / period_samples);
        acc += z[i + window] - z[i];
    }
    // keep the decaying head of the envelope, above the noise floor
    let e0 = zbar[0].norm();
    if !(e0 > 1e-6 * x_scale) {
        return Err(Error::FitNotConverged("zero initial envelope".into()));
    }
    let cut = zbar
        .iter()
        .position(|z| z.norm() < 0.05 * e0)
        .unwrap_or(zbar.len());
    let used = &zbar[..cut.max(2)];
    if used.len() < 10 {
        return Err(Error::FitNotConverged("fewer than 10 envelope points".into()));
    }
    // linear least squares on log-envelope and unwrapped phase
    let n = used.len();
    let times: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let mut log_e = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    let mut prev = used[0].arg();
    let mut offset = 0.0;
    for zi in used {
        log_e.push(zi.norm().ln());
        let mut a = zi.arg();
        while a + offset - prev > std::f64::consts::PI {
            a -= 2.0 * std::f64::consts::PI;
        }
        while a + offset - prev < -std::f64::consts::PI {
            offset += 2.0 * std::f64::consts::PI;
            if a + offset - prev > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
                break;
            }
        }
        prev = a + offset;
        phase.push(prev);
    }
    let slope = |y: &[f64]| -> f64 {
        let tm = times.iter().sum::<f64>() / n as f64;
        let ym = y.iter().sum::<f64>() / n as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for (ti, yi) in times.iter().zip(y) {
            num += (ti - tm) * (yi - ym);
            den += (ti - tm) * (ti - tm);
        }
        num / den
    };
    let gamma_eff = -2.0 * slope(&log_e);
    let omega_eff = p.omega_m + slope(&phase);
    if !(gamma_eff.is_finite() && omega_eff.is_finite()) {
        return Err(Error::FitNotConverged("non-finite fit result".into()));
    }
    Ok((gamma_eff, omega_eff))
}

/// Ring-down estimates of the effective damping Gamma_eff = Gamma +
/// Gamma_opt and frequency Omega_eff = Omega + DeltaOmega_opt from an
/// ensemble of trajectories (per-trajectory fits, aggregated).
pub fn estimate_damping_and_shift(
    ensemble: &[Trajectory],
    p: &SystemParams,
    cfg: &SimConfig,
) -> Result<(EstimateWithError, EstimateWithError)> {
    let mut gammas = Vec::with_capacity(ensemble.len());
    let mut omegas = Vec::with_capacity(ensemble.len());
    for traj in ensemble {
        let (g, w) = fit_ringdown(p, &traj.t, &traj.x, cfg.x0)?;
        gammas.push(g);
        omegas.push(w);
    }
    let gamma = EstimateWithError::from_samples(&gammas);
    let omega = EstimateWithError::from_samples(&omegas);
    let decay = gamma.value * cfg.duration;
    if decay < 2.0 {
        return Err(Error::InsufficientDecay(decay));
    }
    Ok((gamma, omega))
}

/// Ring-down estimates from group-averaged position records. The ensemble is
/// split into `n_groups` equal groups and each group's mean x(t) is fitted;
/// the group fits are then aggregated. Averaging before fitting suppresses
/// incoherent noise-driven motion by 1/sqrt(group size), which keeps the
/// envelope fit usable when the steady-state noise amplitude rivals the
/// coherent ring-down (e.g. a strongly phase-noise-heated oscillator).
pub fn estimate_damping_and_shift_averaged(
    ensemble: &[Trajectory],
    p: &SystemParams,
    cfg: &SimConfig,
    n_groups: usize,
) -> Result<(EstimateWithError, EstimateWithError)> {
    if n_groups < 2 || ensemble.len() < 2 * n_groups {
        return Err(Error::InvalidParams(
            "group-averaged ring-down needs >= 2 groups of >= 2 trajectories".into(),
        ));
    }
    let group_size = ensemble.len() / n_groups;
    let n_t = ensemble[0].t.len();
    let mut gammas = Vec::with_capacity(n_groups);
    let mut omegas = Vec::with_capacity(n_groups);
    for g in 0..n_groups {
        let members = &ensemble[g * group_size..(g + 1) * group_size];
        let mut mean_x = vec![0.0; n_t];
        for traj in members {
            for (m, &xi) in mean_x.iter_mut().zip(&traj.x) {
                *m += xi;
            }
        }
        for m in &mut mean_x {
            *m /= group_size as f64;
        }
        let (gam, om) = fit_ringdown(p, &ensemble[0].t, &mean_x, cfg.x0)?;
        gammas.push(gam);
        omegas.push(om);
    }
    let gamma = EstimateWithError::from_samples(&gammas);
    let omega = EstimateWithError::from_samples(&omegas);
    let decay = gamma.value * cfg.duration;
    if decay < 2.0 {
        return Err(Error::InsufficientDecay(decay));
    }
    Ok((gamma, omega))
}

/// Time-averaged quadrature variances by Monte Carlo under the sinusoidal
/// resonant drive (detuning forced to zero), classical-limit check of the
/// closed-form variances. Returns (var_x, var_y) with jackknife errors.
pub fn quadrature_variance_mc(
    p: &SystemParams,
    cfg: &SimConfig,
) -> Result<(EstimateWithError, EstimateWithError)> {
    let mut q = *p;
    q.detuning = 0.0;
    let mut c = *cfg;
    c.drive = DriveMode::SineModulated;
    c.thermal_init = true;
    if cfg.n_traj < 2 {
        return Err(Error::InvalidParams(
            "quadrature_variance_mc needs n_traj >= 2 (paired estimator)".into(),
        ));
    }
    let ensemble = simulate_ensemble(&q, &c)?;
    // Paired-difference estimator: (X_a - X_b)/sqrt(2) over trajectory
    // pairs cancels the coherent driven motion (equilibrium shift and the
    // 2 Omega response of the sinusoidal drive), leaving the fluctuation
    // variance the closed forms describe.
    let mut vx = Vec::with_capacity(ensemble.len() / 2);
    let mut vy = Vec::with_capacity(ensemble.len() / 2);
    for pair in ensemble.chunks_exact(2) {
        let burn = pair[0].t.len() / 10;
        let quads = |traj: &Trajectory| {
            crate::quadratures::quadrature_trajectory(
                &q,
                &traj.t[burn..],
                &traj.x[burn..],
                &traj.v[burn..],
            )
        };
        let (ax, ay) = quads(&pair[0]);
        let (bx, by) = quads(&pair[1]);
        let m = ax.len() as f64;
        let half_diff_sq = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).map(|(u, w)| (u - w) * (u - w)).sum::<f64>() / (2.0 * m)
        };
        // quantum half-phonon floor added by convention
        vx.push(half_diff_sq(&ax, &bx) + 0.5);
        vy.push(half_diff_sq(&ay, &by) + 0.5);
    }
    Ok((jackknife(&vx), jackknife(&vy)))
}

/// Jackknife mean and standard error of per-trajectory estimates.
fn jackknife(samples: &[f64]) -> EstimateWithError {
    let n = samples.len();
    if n < 2 {
        return EstimateWithError {
            value: samples.first().copied().unwrap_or(f64::NAN),
            std_error: 0.0,
            n_samples: n,
        };
    }
    let total: f64 = samples.iter().sum();
    let mean = total / n as f64;
    let loo: Vec<f64> = samples.iter().map(|s| (total - s) / (n - 1) as f64).collect();
    let loo_mean = loo.iter().sum::<f64>() / n as f64;
    let var = loo.iter().map(|l| (l - loo_mean) * (l - loo_mean)).sum::<f64>() * (n - 1) as f64
        / n as f64;
    EstimateWithError {
        value: mean,
        std_error: var.sqrt(),
        n_samples: n,
    }
}

/// Bessel function of the first kind by its power series; intended for the
/// small arguments (z <= 1e-3 scale) of the oscillation-amplitude expansion.
fn bessel_j(n: i32, z: f64) -> f64 {
    let (n_abs, sign) = if n < 0 {
        (-n as u32, if n % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (n as u32, 1.0)
    };
    let half = z / 2.0;
    // leading term (z/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n_abs {
        term *= half / k as f64;
    }
    let mut sum = term;
    for m in 1..=30 {
        term *= -half * half / (m as f64 * (m as f64 + n_abs as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sign * sum
}

/// Output of [`averaged_intensity_response`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedResponse {
    /// Optical damping from the out-of-phase intensity component (rad/s).
    pub gamma_opt: f64,
    /// Spring shift from the in-phase intensity component (rad/s).
    pub delta_omega_opt: f64,
    /// DC phase-averaged intracavity energy (J).
    pub beta0_sq: f64,
}

/// Deterministic oracle: phase-averaged intracavity intensity for the
/// ansatz x(t) = x0 sin(Omega t), expanded in Bessel functions of
/// epsilon = omega_c x0 / (L Omega) and truncated at |n| <= truncation_n.
/// The long-time double-time integral is evaluated in closed form per mode
/// pair; the DC component gives |beta_0|^2 and the e^{+- i Omega t}
/// components give Gamma_opt and DeltaOmega_opt.
pub fn averaged_intensity_response(
    p: &SystemParams,
    x0: f64,
    truncation_n: i32,
    quad_tol: f64,
) -> Result<AveragedResponse> {
    if truncation_n < 2 {
        return Err(Error::InvalidParams("truncation_n must be >= 2".into()));
    }
    let s = p.scaled();
    let eps = p.omega_c * x0 / (p.length * p.omega_m);
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParams("x0 must give a finite epsilon > 0".into()));
    }
    let n = truncation_n;
    let mu = |k: i32| Complex64::new(0.5, k as f64 * s.omega - s.delta);
    let kernel = |n1: i32, n2: i32| -> Complex64 {
        let (m1, m2) = (mu(n1), mu(n2).conj());
        ((m1 + s.gamma_l).inv() + (m2 + s.gamma_l).inv()) / (m1 + m2)
    };
    let j: Vec<f64> = (-n..=n).map(|k| bessel_j(k, eps)).collect();
    let jn = |k: i32| j[(k + n) as usize];

    let mut dc = 0.0;
    let mut dc_edge = 0.0;
    let mut c_plus = Complex64::new(0.0, 0.0);
    let mut c_plus_edge = 0.0;
    for k in -n..=n {
        let d = jn(k) * jn(k) * kernel(k, k).re;
        dc += d;
        if k.abs() == n {
            dc_edge += d.abs();
        }
        if k + 1 <= n {
            // i^{(k+1)-k} = i
            let term = Complex64::i() * jn(k + 1) * jn(k) * kernel(k + 1, k);
            c_plus += term;
            if k.abs() == n || (k + 1).abs() == n {
                c_plus_edge += term.norm();
            }
        }
    }
    if dc_edge > quad_tol * dc.abs() || c_plus_edge > quad_tol * c_plus.norm() {
        return Err(Error::TruncationError {
            order: n,
            contribution: (dc_edge / dc.abs().max(1e-300))
                .max(c_plus_edge / c_plus.norm().max(1e-300)),
            tol: quad_tol,
        });
    }

    // Matching the intensity's e^{+- i Omega t} components against
    // M L [ -Omega_opt^2 x(t) - Gamma_opt x'(t) ] with x = x0 sin(Omega t):
    // the cos component gives the damping, the sin component the spring.
    let drive = s.g0 * s.g0 * s.b0_sq; // g0^2 |b0|^2 / kappa^3
    let pref = 2.0 * drive / eps;
    let gamma_opt = -2.0 * c_plus.re * pref / s.omega * p.kappa;
    let omega_opt_sq = 2.0 * c_plus.im * pref; // in kappa^2 units
    let delta_omega_opt = omega_opt_sq / (2.0 * s.omega) * p.kappa;
    let beta0_sq = p.power * dc / p.kappa;
    Ok(AveragedResponse {
        gamma_opt,
        delta_omega_opt,
        beta0_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{
        frequency_shift, intracavity_energy, optical_damping, reference_damping_zero_gamma,
    };
    use approx::assert_relative_eq;

    fn params(
        omega: f64,
        delta: f64,
        gamma_l: f64,
        gamma_m: f64,
        n_max: f64,
        n_th: f64,
    ) -> SystemParams {
        SystemParams::from_kappa_units(2e5, omega, gamma_m, gamma_l, delta, 50.0, n_max, n_th)
            .unwrap()
    }

    #[test]
    fn free_oscillation_amplitude_conserved() {
        // P = 0, Gamma = 0, T = 0: amplitude error < 1e-4 over 100 periods
        let p = params(4.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let period = 2.0 * std::f64::consts::PI / p.omega_m;
        let mut cfg = SimConfig::new(period / 1000.0, 100.0 * period, 1, 1, 5.0 * p.x_zpt());
        cfg.record_every = 100;
        let traj = simulate(&p, &cfg).unwrap();
        let a0 = cfg.x0;
        for i in 0..traj.t.len() {
            let a = (traj.x[i].powi(2) + (traj.v[i] / p.omega_m).powi(2)).sqrt();
            assert_relative_eq!(a, a0, max_relative = 1e-4);
        }
        // and the phase stays locked to x0 sin(Omega t) at this dt
        let i = traj.t.len() / 2;
        assert_relative_eq!(
            traj.x[i],
            a0 * (p.omega_m * traj.t[i]).sin(),
            epsilon = 1e-3 * a0
        );
    }

    #[test]
    fn frozen_mirror_steady_state_no_noise() {
        // gamma = 0, x frozen: |beta|^2 relaxes to kappa P / ((kappa/2)^2 + Delta^2)
        let p = params(4.0, -2.0, 0.0, 0.0, 1e6, 0.0);
        let mut cfg = SimConfig::new(5e-8, 2e-4, 1, 3, 0.0);
        cfg.freeze_mirror = true;
        cfg.record_every = 100;
        let traj = simulate(&p, &cfg).unwrap();
        let b = Complex64::new(
            *traj.beta_re.last().unwrap(),
            *traj.beta_im.last().unwrap(),
        );
        let expect = p.kappa * p.power / ((p.kappa / 2.0).powi(2) + p.detuning.powi(2));
        assert_relative_eq!(b.norm_sqr(), expect, max_relative = 1e-9);
        assert_relative_eq!(b.norm_sqr(), intracavity_energy(&p), max_relative = 1e-9);
    }

    #[test]
    fn frozen_mirror_noisy_mean_intensity() {
        // gamma = 0.5 kappa, Delta = 2 kappa: time+ensemble mean |beta|^2
        // matches the phase-averaged closed form within 2 standard errors
        let p = params(4.0, 2.0, 0.5, 0.0, 1e6, 0.0);
        let mut cfg = SimConfig::new(5e-8, 4e-4, 500, 11, 0.0);
        cfg.freeze_mirror = true;
        cfg.record_every = 10;
        let ensemble = simulate_ensemble(&p, &cfg).unwrap();
        let means: Vec<f64> = ensemble
            .iter()
            .map(|tr| {
                let burn = tr.t.len() / 5;
                let m = (tr.t.len() - burn) as f64;
                tr.beta_re[burn..]
                    .iter()
                    .zip(&tr.beta_im[burn..])
                    .map(|(re, im)| re * re + im * im)
                    .sum::<f64>()
                    / m
            })
            .collect();
        let est = EstimateWithError::from_samples(&means);
        let expect = intracavity_energy(&p);
        assert!(
            (est.value - expect).abs() < 2.0 * est.std_error,
            "got {} +/- {}, expected {}",
            est.value,
            est.std_error,
            expect
        );
    }

    #[test]
    fn phase_diffusion_calibration() {
        // <e^{i phi(t)}> decays at rate gamma, fitted within 3%
        let p = params(4.0, 0.0, 0.1, 0.0, 0.0, 0.0);
        let mut cfg = SimConfig::new(2e-8, 1.2e-4, 1000, 21, 0.0);
        cfg.freeze_mirror = true;
        cfg.record_every = 300;
        let ensemble = simulate_ensemble(&p, &cfg).unwrap();
        let n_t = ensemble[0].t.len();
        let mut log_means = Vec::with_capacity(n_t);
        for i in 0..n_t {
            let mean: Complex64 = ensemble
                .iter()
                .map(|tr| Complex64::new(0.0, tr.phi[i]).exp())
                .sum::<Complex64>()
                / ensemble.len() as f64;
            log_means.push(mean.norm().ln());
        }
        // least-squares slope of ln|<e^{i phi}>| vs t
        let t = &ensemble[0].t;
        let tm = t.iter().sum::<f64>() / n_t as f64;
        let ym = log_means.iter().sum::<f64>() / n_t as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for (ti, yi) in t.iter().zip(&log_means) {
            num += (ti - tm) * (yi - ym);
            den += (ti - tm) * (ti - tm);
        }
        let rate = -num / den;
        assert_relative_eq!(rate, p.gamma_l, max_relative = 0.03);
    }

    #[test]
    fn classical_equipartition() {
        // <x^2> = k_B T_eff / M Omega^2 for the undriven thermal oscillator
        let p = params(4.0, 0.0, 0.0, 0.05, 0.0, 50.0);
        let mut cfg = SimConfig::new(2.5e-8, 2e-3, 64, 5, 0.0);
        cfg.thermal_init = true;
        cfg.record_every = 20;
        let ensemble = simulate_ensemble(&p, &cfg).unwrap();
        let mut x2 = Vec::new();
        let mut v2 = Vec::new();
        for tr in &ensemble {
            let m = tr.t.len() as f64;
            x2.push(tr.x.iter().map(|x| x * x).sum::<f64>() / m);
            v2.push(tr.v.iter().map(|v| v * v).sum::<f64>() / m);
        }
        let ex = EstimateWithError::from_samples(&x2);
        let ev = EstimateWithError::from_samples(&v2);
        let kt = KB * p.t_eff();
        let expect_x = kt / (p.mass * p.omega_m * p.omega_m);
        let expect_v = kt / p.mass;
        assert!((ex.value - expect_x).abs() < 3.0 * ex.std_error.max(0.02 * expect_x));
        assert!((ev.value - expect_v).abs() < 3.0 * ev.std_error.max(0.02 * expect_v));
    }

    #[test]
    fn deterministic_convergence_order() {
        // gamma = 0, no thermal noise: halving dt shrinks the error by ~4
        // for the default scheme
        let p = params(4.0, -4.0, 0.0, 0.0, 1e6, 0.0);
        let period = 2.0 * std::f64::consts::PI / p.omega_m;
        let end_x = |dt: f64| {
            let cfg = SimConfig::new(dt, 4.0 * period, 1, 1, 5.0 * p.x_zpt());
            let tr = simulate(&p, &cfg).unwrap();
            *tr.x.last().unwrap()
        };
        let dt0 = period / 512.0;
        let (x1, x2, x3) = (end_x(dt0), end_x(dt0 / 2.0), end_x(dt0 / 4.0));
        let ratio = (x1 - x2) / (x2 - x3);
        assert!(
            (2.8..=6.0).contains(&ratio),
            "convergence ratio {ratio} not ~4"
        );
        // the first-order reference scheme: its oscillation amplitude
        // inflates with an O(dt) error, halving at each dt halving
        let end_amp = |dt: f64| {
            let mut cfg = SimConfig::new(dt, 4.0 * period, 1, 1, 5.0 * p.x_zpt());
            cfg.scheme = Scheme::EulerMaruyama;
            let tr = simulate(&p, &cfg).unwrap();
            (tr.x.last().unwrap().powi(2) + (tr.v.last().unwrap() / p.omega_m).powi(2)).sqrt()
        };
        let (a1, a2, a3) = (end_amp(dt0), end_amp(dt0 / 2.0), end_amp(dt0 / 4.0));
        let ratio_em = (a1 - a2) / (a2 - a3);
        assert!(
            (1.5..=2.9).contains(&ratio_em),
            "Euler amplitude ratio {ratio_em} not ~2"
        );
    }

    #[test]
    fn seed_reproducibility() {
        let p = params(4.0, -4.0, 0.2, 1e-3, 1e6, 1.0);
        let mut cfg = SimConfig::new(2.5e-8, 5e-5, 3, 42, 3.0 * p.x_zpt());
        cfg.record_every = 7;
        let a = simulate_ensemble(&p, &cfg).unwrap();
        let b = simulate_ensemble(&p, &cfg).unwrap();
        assert_eq!(a, b);
        let mut cfg2 = cfg;
        cfg2.seed = 43;
        let c = simulate_ensemble(&p, &cfg2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ringdown_recovers_bare_rates() {
        // P = 0 ring-down: fitted (Gamma, Omega) equal the inputs
        let p = params(4.0, 0.0, 0.0, 0.02, 0.0, 0.0);
        let mut cfg = SimConfig::new(2.5e-8, 1.5e-3, 1, 9, 10.0 * p.x_zpt());
        cfg.record_every = 10;
        let traj = simulate(&p, &cfg).unwrap();
        let (g, w) = estimate_damping_and_shift(&[traj], &p, &cfg).unwrap();
        assert_relative_eq!(g.value, p.gamma_m, max_relative = 0.01);
        // the integrator's own frequency bias is ~(Omega dt)^2 / 24
        assert_relative_eq!(w.value, p.omega_m, max_relative = 1e-4);
    }

    /// Fitted frequency of the undriven ring-down at the same step size;
    /// subtracting it removes the integrator's systematic frequency bias
    /// from shift measurements.
    fn baseline_frequency(p: &SystemParams, cfg: &SimConfig) -> f64 {
        let mut q = *p;
        q.power = 0.0;
        let traj = simulate(&q, cfg).unwrap();
        fit_ringdown(&q, &traj.t, &traj.x, cfg.x0).unwrap().1
    }

    #[test]
    fn ringdown_insufficient_decay() {
        let p = params(4.0, 0.0, 0.0, 0.02, 0.0, 0.0);
        let mut cfg = SimConfig::new(2.5e-8, 2e-4, 1, 9, 10.0 * p.x_zpt());
        cfg.record_every = 10;
        let traj = simulate(&p, &cfg).unwrap();
        assert!(matches!(
            estimate_damping_and_shift(&[traj], &p, &cfg),
            Err(Error::InsufficientDecay(_))
        ));
    }

    #[test]
    fn ringdown_matches_analytics_zero_linewidth() {
        // gamma = 0, Delta = -Omega: single noiseless trajectory recovers
        // Gamma_opt and the spring shift
        let p = params(4.0, -4.0, 0.0, 0.0, 2.6e6, 0.0);
        let gamma_opt = optical_damping(&p).value;
        let shift = frequency_shift(&p).value;
        let duration = 3.0 / gamma_opt;
        let mut cfg = SimConfig::new(2.4e-8, duration, 1, 9, 2.0 * p.x_zpt());
        cfg.record_every = 10;
        let traj = simulate(&p, &cfg).unwrap();
        let (g, w) = estimate_damping_and_shift(&[traj], &p, &cfg).unwrap();
        assert_relative_eq!(g.value, gamma_opt, max_relative = 0.05);
        let w0 = baseline_frequency(&p, &cfg);
        assert_relative_eq!(w.value - w0, shift, max_relative = 0.05);
    }

    #[test]
    fn ringdown_matches_analytics_with_phase_noise() {
        // gamma = 0.2 kappa, Delta = -2 kappa: ensemble estimate within
        // 10% / 3 standard errors of the closed forms. Phase-noise intensity
        // fluctuations heat the oscillator far above x_zpt at this drive, so
        // the ring-down starts high and is fitted on group-averaged records
        // where the incoherent motion cancels.
        let p = params(4.0, -2.0, 0.2, 0.0, 2.6e6, 0.0);
        let gamma_opt = optical_damping(&p).value;
        let duration = 3.5 / gamma_opt;
        let mut cfg = SimConfig::new(2.4e-8, duration, 40, 17, 500.0 * p.x_zpt());
        cfg.record_every = 10;
        let ensemble = simulate_ensemble(&p, &cfg).unwrap();
        let (g, w) = estimate_damping_and_shift_averaged(&ensemble, &p, &cfg, 8).unwrap();
        let pass = |est: &EstimateWithError, expect: f64| {
            (est.value - expect).abs() <= (3.0 * est.std_error).max(0.10 * expect.abs())
        };
        assert!(
            pass(&g, gamma_opt),
            "Gamma_eff {} +/- {} vs {}",
            g.value,
            g.std_error,
            gamma_opt
        );
        let shift = frequency_shift(&p).value;
        let est_shift = EstimateWithError {
            value: w.value - baseline_frequency(&p, &cfg),
            std_error: w.std_error,
            n_samples: w.n_samples,
        };
        assert!(
            pass(&est_shift, shift),
            "shift {} +/- {} vs {}",
            est_shift.value,
            est_shift.std_error,
            shift
        );
    }

    #[test]
    fn blue_detuning_amplifies() {
        // Delta = +Omega: fitted Gamma_eff is negative (amplification)
        let p = params(4.0, 4.0, 0.0, 0.0, 2.6e6, 0.0);
        let gamma_opt = optical_damping(&p).value;
        assert!(gamma_opt < 0.0);
        let mut cfg = SimConfig::new(2.4e-8, 1.0 / gamma_opt.abs(), 1, 9, 2.0 * p.x_zpt());
        cfg.record_every = 10;
        let traj = simulate(&p, &cfg).unwrap();
        let (g, _) = fit_ringdown(&p, &traj.t, &traj.x, cfg.x0)
            .map(|gw| {
                (
                    EstimateWithError {
                        value: gw.0,
                        std_error: 0.0,
                        n_samples: 1,
                    },
                    gw.1,
                )
            })
            .unwrap();
        assert!(g.value < 0.0);
        assert_relative_eq!(g.value, gamma_opt, max_relative = 0.1);
    }

    #[test]
    fn bessel_small_argument() {
        // classical series values
        assert_relative_eq!(bessel_j(0, 1e-4), 1.0 - 2.5e-9, max_relative = 1e-12);
        assert_relative_eq!(bessel_j(1, 1e-4), 5e-5, max_relative = 1e-8);
        assert_relative_eq!(bessel_j(2, 2e-3), 5e-7, max_relative = 1e-6);
        assert_eq!(bessel_j(-1, 1e-3), -bessel_j(1, 1e-3));
        assert_eq!(bessel_j(-2, 1e-3), bessel_j(2, 1e-3));
        // moderate argument against a trusted reference value J_1(0.5)
        assert_relative_eq!(bessel_j(1, 0.5), 0.242268457674874, max_relative = 1e-12);
    }

    #[test]
    fn kernel_dc_matches_intracavity_energy() {
        for (delta, g) in [(-4.0, 0.0), (-4.0, 0.3), (-2.0, 0.5), (3.0, 0.2)] {
            let p = params(4.0, delta, g, 0.0, 1e6, 0.0);
            let eps_x0 = 1e-6 * p.length * p.omega_m / p.omega_c; // epsilon = 1e-6
            let r = averaged_intensity_response(&p, eps_x0, 3, 1e-3).unwrap();
            assert_relative_eq!(r.beta0_sq, intracavity_energy(&p), max_relative = 1e-8);
        }
    }

    #[test]
    fn kernel_matches_zero_linewidth_reference() {
        for delta in [-6.0, -4.0, -2.0, 1.5, 3.0] {
            let p = params(4.0, delta, 0.0, 0.0, 1e6, 0.0);
            let x0 = 1e-4 * p.length * p.omega_m / p.omega_c;
            let r = averaged_intensity_response(&p, x0, 3, 1e-3).unwrap();
            assert_relative_eq!(
                r.gamma_opt,
                reference_damping_zero_gamma(&p),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn kernel_matches_analytics_finite_linewidth() {
        let p = params(4.0, -4.0, 0.3, 0.0, 1e6, 0.0);
        let x0 = 1e-4 * p.length * p.omega_m / p.omega_c;
        let r = averaged_intensity_response(&p, x0, 3, 1e-3).unwrap();
        assert_relative_eq!(r.gamma_opt, optical_damping(&p).value, max_relative = 1e-5);
        assert_relative_eq!(
            r.delta_omega_opt,
            frequency_shift(&p).value,
            max_relative = 1e-5
        );
    }

    #[test]
    fn kernel_truncation_error_detected() {
        let p = params(4.0, -4.0, 0.1, 0.0, 1e6, 0.0);
        let x0 = 0.5 * p.length * p.omega_m / p.omega_c; // epsilon = 0.5
        assert!(matches!(
            averaged_intensity_response(&p, x0, 2, 1e-6),
            Err(Error::TruncationError { .. })
        ));
    }

    #[test]
    fn quadrature_mc_undriven_floor() {
        // P = 0, n_M = 10: time-averaged variances equal n_M + 1/2
        let p = params(4.0, 0.0, 0.0, 0.05, 0.0, 10.0);
        let mut cfg = SimConfig::new(2.5e-8, 1.5e-3, 48, 31, 0.0);
        cfg.record_every = 20;
        let (vx, vy) = quadrature_variance_mc(&p, &cfg).unwrap();
        let expect = 10.5;
        assert!(
            (vx.value - expect).abs() < (3.0 * vx.std_error).max(0.05 * expect),
            "var_x {} +/- {}",
            vx.value,
            vx.std_error
        );
        assert!(
            (vy.value - expect).abs() < (3.0 * vy.std_error).max(0.05 * expect),
            "var_y {} +/- {}",
            vy.value,
            vy.std_error
        );
    }

    #[test]
    fn quadrature_mc_phase_noise_heats_quadratures() {
        // T = 0 classical baseline under the modulated drive: with gamma = 0
        // the integrator carries no stochastic force at all (vacuum
        // fluctuations are outside the classical model), so both
        // time-averaged variances sit exactly on the half-phonon floor.
        // Laser phase noise is a classical channel the integrator does
        // contain; switching it on must lift both quadratures off the
        // floor -- in particular the nominally protected cosine quadrature.
        let mut cfg = SimConfig::new(5e-8, 8e-3, 48, 13, 0.0);
        cfg.record_every = 10;
        let run = |gamma_l: f64| {
            let p = params(2.0, 0.0, gamma_l, 0.01, 2e6, 0.0);
            quadrature_variance_mc(&p, &cfg).unwrap()
        };
        let (x0, y0) = run(0.0);
        assert_relative_eq!(x0.value, 0.5, max_relative = 1e-9);
        assert_relative_eq!(y0.value, 0.5, max_relative = 1e-9);
        let (x1, y1) = run(0.4);
        assert!(
            x1.value - 0.5 > 3.0 * x1.std_error,
            "cosine-quadrature heating {} +/- {} not significant",
            x1.value - 0.5,
            x1.std_error
        );
        assert!(
            y1.value - 0.5 > 3.0 * y1.std_error,
            "sine-quadrature heating {} +/- {} not significant",
            y1.value - 0.5,
            y1.std_error
        );
    }

    #[test]
    fn step_too_large_detected() {
        // A huge mirror amplitude makes the optomechanical detuning swing
        // exceed 1/dt; the first-order field update then amplifies |beta|
        // each step and the stability monitor fires before overflow.
        let p = params(4.0, 0.0, 0.0, 0.0, 1e6, 0.0);
        let mut cfg = SimConfig::new(2.5e-8, 1e-3, 1, 1, 1e6 * p.x_zpt());
        cfg.scheme = Scheme::EulerMaruyama;
        match simulate(&p, &cfg) {
            Err(Error::StepTooLarge { .. }) => {}
            other => panic!("expected StepTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_state_detected() {
        // the explicit Euler scheme slowly inflates the free oscillator's
        // energy; over enough periods the state overflows and is reported
        let p = params(4.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let mut cfg = SimConfig::new(2.5e-8, 0.4, 1, 1, 10.0 * p.x_zpt());
        cfg.scheme = Scheme::EulerMaruyama;
        cfg.record_every = 1000;
        match simulate(&p, &cfg) {
            Err(Error::NonFiniteState { .. }) => {}
            Ok(tr) => {
                // if it has not overflowed yet, the energy must at least
                // show the characteristic inflation
                let a_end = (tr.x.last().unwrap().powi(2)
                    + (tr.v.last().unwrap() / p.omega_m).powi(2))
                .sqrt();
                assert!(a_end > 1e3 * cfg.x0, "no Euler energy inflation seen");
            }
            other => panic!("expected NonFiniteState, got {other:?}"),
        }
    }

    #[test]
    fn trajectory_csv() {
        let p = params(4.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let mut cfg = SimConfig::new(2.5e-8, 1e-5, 1, 1, p.x_zpt());
        cfg.record_every = 10;
        let tr = simulate(&p, &cfg).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,v,beta_re,beta_im,phi\n"));
        assert_eq!(text.lines().count(), tr.t.len() + 1);
    }

    #[test]
    fn dt_bound_enforced() {
        let p = params(4.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let cfg = SimConfig::new(1e-5, 1e-3, 1, 1, p.x_zpt());
        assert!(matches!(simulate(&p, &cfg), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn std_error_scales_inverse_sqrt_n() {
        // doubling the ensemble four-fold halves the standard error (roughly)
        let p = params(4.0, 0.0, 0.1, 0.0, 1e5, 0.0);
        let se = |n: usize, seed: u64| {
            let mut cfg = SimConfig::new(5e-8, 2e-4, n, seed, 0.0);
            cfg.freeze_mirror = true;
            cfg.record_every = 20;
            let ens = simulate_ensemble(&p, &cfg).unwrap();
            let means: Vec<f64> = ens
                .iter()
                .map(|tr| {
                    tr.beta_re
                        .iter()
                        .zip(&tr.beta_im)
                        .map(|(re, im)| re * re + im * im)
                        .sum::<f64>()
                        / tr.t.len() as f64
                })
                .collect();
            EstimateWithError::from_samples(&means).std_error
        };
        let r = se(64, 2) / se(256, 2);
        assert!((1.3..3.1).contains(&r), "scaling ratio {r}");
    }
}
