//! Regularized vacuum kinetic-energy densities.
//!
//! Each mode contributes `eps = (w^2 chi^2 + chi'^2) / (4 pi w)`; the free
//! field contributes `w / (4 pi)` per family. Summing the difference over both
//! families and all `w` gives a density that is constant inside the well and
//! zero outside. The constant is `eta1 + eta2 = -eta`, with
//!
//! ```text
//! eta1 = -(Lambda / pi a^2) int_0^inf y e^-y / (y e^y + Lambda sinh y) dy
//! eta2 = +(Lambda / pi a^2) int_0^inf y e^-y / (y e^y + Lambda cosh y) dy
//! ```
//!
//! After the switch-off the profile splits into two half-height pulses moving
//! apart at unit speed.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::modes::{Eigenmode, Family, ModeId, PotentialConfig};
use crate::profile::PiecewiseProfile;
use crate::quadrature::{
    integrate_damped_oscillatory, integrate_with_breaks, QuadratureResult, QuadratureSpec,
};

/// Static energy density of one mode.
pub fn eps_static(mode: ModeId, cfg: &PotentialConfig, x: f64) -> f64 {
    let m = Eigenmode::new(mode, *cfg);
    let w = m.omega();
    let (c, d) = (m.value(x), m.derivative(x));
    (w * w * c * c + d * d) / (4.0 * PI * w)
}

/// Free-field density of one mode family.
pub fn eps_free(omega: f64) -> f64 {
    omega / (4.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaPair {
    pub eta1: f64,
    pub eta2: f64,
}

impl EtaPair {
    /// `eta = -(eta1 + eta2)`, the depth of the well's negative density.
    pub fn eta(&self) -> f64 {
        -(self.eta1 + self.eta2) + 0.0
    }
}

/// `y e^-y / (y e^y + Lambda sinh y)` without overflow.
fn eta1_core(y: f64, strength: f64) -> f64 {
    if y == 0.0 {
        return 1.0 / (1.0 + strength);
    }
    let e2 = (-2.0 * y).exp();
    y * e2 / (y + 0.5 * strength * -(-2.0 * y).exp_m1())
}

/// `y e^-y / (y e^y + Lambda cosh y)` without overflow.
fn eta2_core(y: f64, strength: f64) -> f64 {
    let e2 = (-2.0 * y).exp();
    y * e2 / (y + 0.5 * strength * (1.0 + e2))
}

/// Evaluate both integrals with the given spec, bypassing the cache.
pub fn compute_eta_pair(cfg: &PotentialConfig, spec: &QuadratureSpec) -> Result<EtaPair> {
    let strength = cfg.strength();
    if strength == 0.0 {
        return Ok(EtaPair { eta1: 0.0, eta2: 0.0 });
    }
    let a = cfg.separation();
    let pref = strength / (PI * a * a);
    let breaks = [0.0, 1.0, 8.0, f64::INFINITY];
    let i1 = integrate_with_breaks(|y| eta1_core(y, strength), &breaks, spec)?.into_converged()?;
    let i2 = integrate_with_breaks(|y| eta2_core(y, strength), &breaks, spec)?.into_converged()?;
    Ok(EtaPair {
        eta1: -pref * i1.value,
        eta2: pref * i2.value,
    })
}

fn eta_cache() -> &'static RwLock<HashMap<(u64, u64), EtaPair>> {
    static CACHE: OnceLock<RwLock<HashMap<(u64, u64), EtaPair>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Spec used by [`eta_pair`].
pub fn eta_spec() -> QuadratureSpec {
    QuadratureSpec::default().with_tolerances(1e-8, 1e-15)
}

/// `eta1`, `eta2` at rel. tolerance 1e-8, cached per configuration.
pub fn eta_pair(cfg: &PotentialConfig) -> Result<EtaPair> {
    let key = (cfg.lambda().to_bits(), cfg.separation().to_bits());
    if let Some(hit) = eta_cache().read().ok().and_then(|c| c.get(&key).copied()) {
        return Ok(hit);
    }
    let pair = compute_eta_pair(cfg, &eta_spec())?;
    if let Ok(mut c) = eta_cache().write() {
        // Deterministic, so a racing writer stores the same value.
        c.entry(key).or_insert(pair);
    }
    Ok(pair)
}

/// `sum_j [eps(j, w, x) - w/4pi]`.
pub fn mode_sum_integrand(cfg: &PotentialConfig, x: f64, omega: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    Family::BOTH
        .iter()
        .map(|&fam| {
            let id = ModeId::new(fam, omega).expect("omega > 0");
            eps_static(id, cfg, x) - eps_free(omega)
        })
        .sum()
}

/// Damping schedule and panel width for the mode sum, scaled to the well.
///
/// At large `w` the integrand behaves like `cos(2 w a) / w`, so panels of one
/// period `pi / a` resolve it, and damping exponents are expressed in units
/// of `a / 2`.
pub fn mode_sum_spec(cfg: &PotentialConfig) -> QuadratureSpec {
    let h = cfg.half_width();
    QuadratureSpec::oscillatory()
        .with_damping(vec![0.4, 0.2, 0.1, 0.05, 0.025])
        .scaled_damping(h)
        .with_oscillation_period(PI / cfg.separation())
}

/// Mode-sum energy density at `x` with the default damped spec.
pub fn mode_sum_density(cfg: &PotentialConfig, x: f64) -> Result<QuadratureResult<f64>> {
    mode_sum_density_with(cfg, x, &mode_sum_spec(cfg))
}

pub fn mode_sum_density_with(
    cfg: &PotentialConfig,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult<f64>> {
    if cfg.strength() == 0.0 {
        return Ok(QuadratureResult {
            value: 0.0,
            error: 0.0,
            converged: true,
            evaluations: 0,
        });
    }
    integrate_damped_oscillatory(|w| mode_sum_integrand(cfg, x, w), spec)
}

/// `-eta` on `(-a/2, a/2)`, zero elsewhere.
pub fn static_profile_from_eta(eta: f64, a: f64) -> PiecewiseProfile {
    let h = 0.5 * a;
    PiecewiseProfile::new(vec![-h, h], vec![0.0, -eta + 0.0, 0.0]).expect("a > 0")
}

pub fn static_profile(cfg: &PotentialConfig) -> Result<PiecewiseProfile> {
    Ok(static_profile_from_eta(eta_pair(cfg)?.eta(), cfg.separation()))
}

/// Half the static profile moved left by `t` plus half moved right.
pub fn evolved_profile_from_eta(eta: f64, a: f64, t: f64) -> PiecewiseProfile {
    let half = static_profile_from_eta(eta, a).scaled(0.5);
    half.shifted(-t).add(&half.shifted(t))
}

/// Evolved profile; `t <= 0` returns the static one.
pub fn evolved_profile(cfg: &PotentialConfig, t: f64) -> Result<PiecewiseProfile> {
    let eta = eta_pair(cfg)?.eta();
    if t <= 0.0 {
        return Ok(static_profile_from_eta(eta, cfg.separation()));
    }
    Ok(evolved_profile_from_eta(eta, cfg.separation(), t))
}

/// Direction of a pulse after the switch-off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Right,
    Left,
}

/// Density seen at fixed `x` from one moving pulse, as a function of `t >= 0`.
/// Zero for `t < 0`.
pub fn pulse_time_profile(eta: f64, a: f64, x: f64, dir: Direction) -> Result<PiecewiseProfile> {
    let h = 0.5 * a;
    // Right pulse covers x when x - t in (-h, h); left pulse when x + t in (-h, h).
    let (lo, hi) = match dir {
        Direction::Right => (x - h, x + h),
        Direction::Left => (-h - x, h - x),
    };
    PiecewiseProfile::boxcar(lo.max(0.0), hi, -0.5 * eta)
}

/// Density at fixed `x` as a function of `t`: the static value for `t < 0`,
/// the sum of both pulses afterwards.
pub fn time_profile(eta: f64, a: f64, x: f64) -> Result<PiecewiseProfile> {
    let right = pulse_time_profile(eta, a, x, Direction::Right)?;
    let left = pulse_time_profile(eta, a, x, Direction::Left)?;
    let after = right.add(&left);
    let before = static_profile_from_eta(eta, a).value_at(x);
    if before == 0.0 {
        return Ok(after);
    }
    let past = PiecewiseProfile::new(vec![0.0], vec![before, 0.0])?;
    Ok(past.add(&after))
}

pub fn total_energy(profile: &PiecewiseProfile) -> f64 {
    profile.total_energy()
}
