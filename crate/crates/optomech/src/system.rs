//! System parameters, derived scales, and the two linear response functions.
//!
//! All rates and frequencies are stored in SI (rad/s). Internally, the
//! analytic modules evaluate everything in units of the cavity decay rate
//! `kappa`; the [`KappaScaled`] view performs that normalization once so the
//! wide dynamic range of SI inputs (rates spanning ten orders of magnitude)
//! never enters a single expression.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J s), CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K), CODATA 2018.
pub const KB: f64 = 1.380_649e-23;

/// Physical constants and rates of the driven optomechanical system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Mechanical angular frequency Omega (rad/s).
    pub omega_m: f64,
    /// Cavity angular frequency omega_c (rad/s).
    pub omega_c: f64,
    /// Cavity energy decay rate kappa (rad/s).
    pub kappa: f64,
    /// Mechanical damping Gamma (rad/s).
    pub gamma_m: f64,
    /// Laser linewidth (phase-diffusion HWHM) gamma (rad/s).
    pub gamma_l: f64,
    /// Detuning Delta = omega_l - omega_c (rad/s).
    pub detuning: f64,
    /// Effective mass M (kg).
    pub mass: f64,
    /// Cavity length L (m).
    pub length: f64,
    /// Drive power P (W).
    pub power: f64,
    /// Thermal occupation n_M (dimensionless).
    pub n_th: f64,
}

/// Non-fatal issues recorded while building parameters from a config source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamWarning {
    /// Both `n_th` and `t_eff` were supplied; the direct `n_th` wins.
    NthOverridesTeff,
}

impl SystemParams {
    /// Validate the physical invariants; returns the parameters unchanged.
    pub fn validated(self) -> Result<Self> {
        fn check(cond: bool, msg: &str) -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::InvalidParams(msg.to_string()))
            }
        }
        check(self.omega_m > 0.0, "omega_m must be > 0")?;
        check(self.omega_c > 0.0, "omega_c must be > 0")?;
        check(self.kappa > 0.0, "kappa must be > 0")?;
        check(self.gamma_m >= 0.0, "gamma_m must be >= 0")?;
        check(self.gamma_l >= 0.0, "gamma_l must be >= 0")?;
        check(self.mass > 0.0, "mass must be > 0")?;
        check(self.length > 0.0, "length must be > 0")?;
        check(self.power >= 0.0, "power must be >= 0")?;
        check(self.n_th >= 0.0, "n_th must be >= 0")?;
        check(self.finite(), "all parameters must be finite")?;
        Ok(self)
    }

    fn finite(&self) -> bool {
        [
            self.omega_m,
            self.omega_c,
            self.kappa,
            self.gamma_m,
            self.gamma_l,
            self.detuning,
            self.mass,
            self.length,
            self.power,
            self.n_th,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    /// Ground-state position uncertainty x_zpt = sqrt(hbar / 2 M Omega) (m).
    pub fn x_zpt(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega_m)).sqrt()
    }

    /// Optomechanical coupling g0 = (omega_c / L) x_zpt (rad/s).
    pub fn g0(&self) -> f64 {
        self.omega_c / self.length * self.x_zpt()
    }

    /// Effective bath temperature consistent with `n_th` (K).
    pub fn t_eff(&self) -> f64 {
        self.n_th * HBAR * self.omega_m / KB
    }

    /// Drive scale |b0|^2 = P / hbar omega_c (1/s).
    pub fn b0_sq(&self) -> f64 {
        self.power / (HBAR * self.omega_c)
    }

    /// Kappa-normalized view used by the analytic modules.
    pub fn scaled(&self) -> KappaScaled {
        let k = self.kappa;
        KappaScaled {
            kappa: k,
            omega: self.omega_m / k,
            gamma: self.gamma_m / k,
            gamma_l: self.gamma_l / k,
            delta: self.detuning / k,
            g0: self.g0() / k,
            b0_sq: self.b0_sq() / k,
            n_th: self.n_th,
        }
    }

    /// Convenience constructor from kappa-normalized rates.
    ///
    /// `omega_m`, `gamma_m`, `gamma_l` and `detuning` are given in units of
    /// `kappa`; `g0` is in rad/s and the drive is set through the maximum
    /// intracavity photon number `n_max = 4P / hbar omega_c kappa`. The
    /// remaining SI fields (mass, cavity frequency) take laboratory-scale
    /// defaults; the cavity length follows from `g0`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_kappa_units(
        kappa: f64,
        omega_m: f64,
        gamma_m: f64,
        gamma_l: f64,
        detuning: f64,
        g0: f64,
        n_max: f64,
        n_th: f64,
    ) -> Result<Self> {
        let omega_c = 1.77e15; // 1064 nm drive
        let mass = 1.0e-12;
        let omega_m_si = omega_m * kappa;
        let x_zpt = (HBAR / (2.0 * mass * omega_m_si)).sqrt();
        let length = omega_c * x_zpt / g0;
        let power = n_max * HBAR * omega_c * kappa / 4.0;
        SystemParams {
            omega_m: omega_m_si,
            omega_c,
            kappa,
            gamma_m: gamma_m * kappa,
            gamma_l: gamma_l * kappa,
            detuning: detuning * kappa,
            mass,
            length,
            power,
            n_th,
        }
        .validated()
    }

    /// Read parameters from a flat `key = value` file or a JSON document,
    /// decided by the file extension (`.json` selects JSON).
    pub fn from_file(path: &Path) -> Result<(Self, Vec<ParamWarning>)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigMissing(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_flat_str(&text)
        }
    }

    /// Parse a UTF-8 `key = value` configuration (one pair per line,
    /// `#` starts a comment).
    pub fn from_flat_str(text: &str) -> Result<(Self, Vec<ParamWarning>)> {
        let mut map = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::ConfigParse {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let value: f64 = value.trim().parse().map_err(|e| Error::ConfigParse {
                line: i + 1,
                msg: format!("bad number `{}`: {e}", value.trim()),
            })?;
            map.insert(key.trim().to_string(), value);
        }
        Self::from_map(map)
    }

    /// Parse a JSON document with the same field names as the flat format.
    pub fn from_json_str(text: &str) -> Result<(Self, Vec<ParamWarning>)> {
        let map: HashMap<String, f64> = serde_json::from_str(text)?;
        Self::from_map(map)
    }

    fn from_map(mut map: HashMap<String, f64>) -> Result<(Self, Vec<ParamWarning>)> {
        let mut warnings = Vec::new();
        let mut take = |key: &str| -> Result<f64> {
            map.remove(key)
                .ok_or_else(|| Error::ConfigMissing(format!("field `{key}`")))
        };
        let omega_m = take("omega_m")?;
        let omega_c = take("omega_c")?;
        let kappa = take("kappa")?;
        let gamma_m = take("gamma_m")?;
        let gamma_l = take("gamma_l")?;
        let detuning = take("detuning")?;
        let mass = take("mass")?;
        let length = take("length")?;
        let power = take("power")?;
        let n_th_direct = map.remove("n_th");
        let t_eff = map.remove("t_eff");
        let n_th = match (n_th_direct, t_eff) {
            (Some(n), Some(_)) => {
                warnings.push(ParamWarning::NthOverridesTeff);
                n
            }
            (Some(n), None) => n,
            (None, Some(t)) => KB * t / (HBAR * omega_m),
            (None, None) => return Err(Error::ConfigMissing("field `n_th` or `t_eff`".into())),
        };
        if let Some(key) = map.keys().next() {
            return Err(Error::InvalidParams(format!("unknown field `{key}`")));
        }
        let p = SystemParams {
            omega_m,
            omega_c,
            kappa,
            gamma_m,
            gamma_l,
            detuning,
            mass,
            length,
            power,
            n_th,
        }
        .validated()?;
        Ok((p, warnings))
    }
}

/// Rates in units of kappa, plus the coupling combinations the analytics use.
#[derive(Debug, Clone, Copy)]
pub struct KappaScaled {
    /// The normalization rate itself (rad/s), for converting results back.
    pub kappa: f64,
    /// Omega / kappa.
    pub omega: f64,
    /// Gamma / kappa.
    pub gamma: f64,
    /// gamma (laser linewidth) / kappa.
    pub gamma_l: f64,
    /// Delta / kappa.
    pub delta: f64,
    /// g0 / kappa.
    pub g0: f64,
    /// |b0|^2 / kappa = P / hbar omega_c kappa.
    pub b0_sq: f64,
    /// Thermal occupation (already dimensionless).
    pub n_th: f64,
}

/// Derived drive scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Maximum intracavity photon number N_max = 4P / hbar omega_c kappa.
    pub n_max: f64,
    /// |b0|^2 = P / hbar omega_c (1/s).
    pub b0_sq: f64,
    /// B0 = sqrt(P kappa / hbar omega_c) chi_R(0) (dimensionless).
    pub big_b0: Complex64,
}

/// Compute the derived drive scales.
pub fn derive_scales(p: &SystemParams) -> DerivedScales {
    let b0_sq = p.b0_sq();
    let n_max = 4.0 * b0_sq / p.kappa;
    let chi_r0 = Complex64::new(p.kappa / 2.0, -p.detuning).inv();
    let big_b0 = (b0_sq * p.kappa).sqrt() * chi_r0;
    DerivedScales {
        n_max,
        b0_sq,
        big_b0,
    }
}

/// Complex linear response value (1 / (rad/s)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibility {
    pub value: Complex64,
}

/// Mechanical response chi_M(omega) = 1 / (Gamma/2 - i (omega - Omega)).
pub fn mech_susceptibility(p: &SystemParams, omega: f64) -> Result<Susceptibility> {
    if p.gamma_m == 0.0 && omega == p.omega_m {
        return Err(Error::PoleOnRealAxis);
    }
    Ok(Susceptibility {
        value: Complex64::new(p.gamma_m / 2.0, -(omega - p.omega_m)).inv(),
    })
}

/// Optical response chi_R(omega) = 1 / (kappa/2 - i (omega + Delta)).
pub fn cav_susceptibility(p: &SystemParams, omega: f64) -> Result<Susceptibility> {
    if p.kappa == 0.0 && omega == -p.detuning {
        return Err(Error::PoleOnRealAxis);
    }
    Ok(Susceptibility {
        value: Complex64::new(p.kappa / 2.0, -(omega + p.detuning)).inv(),
    })
}
