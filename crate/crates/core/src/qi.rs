//! Quantum-inequality experiments on the switched-off double-delta vacuum.
//!
//! - Spatial: the `t = 0` profile averaged against a Lorentzian of width `tau`
//!   gives `-(2 eta / pi) atan(a / 2 tau)`, which decays like `1/tau` while the
//!   bound decays like `1/tau^2`, so large widths violate it.
//! - Temporal: at `x = tau/2` the right-moving pulse passes through the
//!   quartic window, giving roughly `-15 eta a / (16 tau)` against `-5/(3 pi tau^2)`.
//! - Pulse inventory: after the switch-off the energy density is nowhere positive.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::{self, eta_pair, Direction};
use crate::error::{Error, Result};
use crate::evolution::mode_energy_in_box;
use crate::modes::{ModeId, PotentialConfig};
use crate::profile::PiecewiseProfile;
use crate::quadrature::QuadratureSpec;
use crate::sampling::{
    weighted_average, weighted_average_quadrature, xi_min_reference, SamplingFunction,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRow {
    pub tau: f64,
    /// Closed-form weighted average.
    pub lhs: f64,
    /// Same average by adaptive quadrature.
    pub lhs_quadrature: f64,
    pub bound: f64,
    pub violated: bool,
    pub violated_quadrature: bool,
    /// Large-`tau` approximation of `lhs`.
    pub asymptotic: f64,
    pub asymptotic_rel_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub experiment: String,
    pub lambda: f64,
    pub a: f64,
    pub eta: f64,
    pub rows: Vec<ViolationRow>,
    /// Smallest sampled `tau` from which every larger sample violates.
    pub crossover_sampled: Option<f64>,
    /// Root of `lhs(tau) = bound(tau)` found by bisection.
    pub crossover_bisected: Option<f64>,
    /// Largest `|contribution|` of terms the analysis sets to zero.
    pub dropped_contribution: f64,
    pub routes_agree: bool,
}

impl ViolationReport {
    pub fn any_violation(&self) -> bool {
        self.rows.iter().any(|r| r.violated)
    }

    fn finish(mut self) -> Self {
        self.routes_agree = self.rows.iter().all(|r| r.violated == r.violated_quadrature);
        self.crossover_sampled = sampled_crossover(&self.rows);
        self
    }
}

fn sampled_crossover(rows: &[ViolationRow]) -> Option<f64> {
    let mut sorted: Vec<&ViolationRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    let mut first = None;
    for r in sorted.iter().rev() {
        if !r.violated {
            break;
        }
        first = Some(r.tau);
    }
    first
}

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::param("tau", "empty sweep"));
    }
    if let Some(t) = taus.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::param("tau", format!("must be finite and > 0, got {t}")));
    }
    Ok(())
}

/// Spec for the quadrature route of the weighted averages.
pub fn average_spec() -> QuadratureSpec {
    QuadratureSpec::default().with_tolerances(1e-12, 1e-300)
}

/// Spatial average of the `t = 0` profile `-(2 eta / pi) atan(a / 2 tau)`.
pub fn spatial_lhs(eta: f64, a: f64, tau: f64) -> f64 {
    -(2.0 * eta / PI) * (a / (2.0 * tau)).atan()
}

/// Root of `spatial_lhs = -1/(24 pi tau^2)`, to relative precision `rel`.
///
/// `tau^2 (lhs - bound)` is strictly decreasing in `tau`, so the root is unique.
pub fn spatial_crossover(eta: f64, a: f64, rel: f64) -> Option<f64> {
    if eta <= 0.0 {
        return None;
    }
    let h = |tau: f64| tau * tau * spatial_lhs(eta, a, tau) + 1.0 / (24.0 * PI);
    let (mut lo, mut hi) = (a, a);
    while h(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return None;
        }
    }
    while h(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    while hi - lo > rel * lo {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Lorentzian-averaged `t = 0` profile against the bound, over `taus`.
pub fn spatial_qi_experiment(cfg: &PotentialConfig, taus: &[f64]) -> Result<ViolationReport> {
    check_taus(taus)?;
    let eta = eta_pair(cfg)?.eta();
    let a = cfg.separation();
    let profile = energy::evolved_profile(cfg, 0.0)?;
    let spec = average_spec();
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let rho = SamplingFunction::lorentzian(tau)?;
        let lhs = weighted_average(&profile, &rho)?;
        let lhs_q = weighted_average_quadrature(&profile, &rho, &spec)?.into_converged()?.value;
        let bound = xi_min_reference(&rho);
        let asymptotic = -eta * a / (PI * tau);
        rows.push(ViolationRow {
            tau,
            lhs,
            lhs_quadrature: lhs_q,
            bound,
            violated: lhs < bound,
            violated_quadrature: lhs_q < bound,
            asymptotic,
            asymptotic_rel_deviation: rel_dev(lhs, asymptotic),
        });
    }
    Ok(ViolationReport {
        experiment: "spatial".into(),
        lambda: cfg.lambda(),
        a,
        eta,
        rows,
        crossover_sampled: None,
        crossover_bisected: spatial_crossover(eta, a, 1e-6),
        dropped_contribution: 0.0,
        routes_agree: false,
    }
    .finish())
}

fn rel_dev(x: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if x == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((x - reference) / reference).abs()
    }
}

/// `-(eta N / 2) {...}`: the window integral written out as differences of
/// powers of `tau +- a`.
pub fn temporal_bracket(eta: f64, a: f64, tau: f64) -> f64 {
    let n = 30.0 / tau.powi(5);
    let (p, m) = (tau + a, tau - a);
    let t5 = (p.powi(5) - m.powi(5)) / (5.0 * 32.0);
    let t4 = tau * (p.powi(4) - m.powi(4)) / (2.0 * 16.0);
    let t3 = tau * tau * (p.powi(3) - m.powi(3)) / (3.0 * 8.0);
    -0.5 * eta * n * (t5 - t4 + t3)
}

/// Time average at `x = tau/2` with the quartic weight, for each `tau > a`.
pub fn temporal_qi_experiment(cfg: &PotentialConfig, taus: &[f64]) -> Result<ViolationReport> {
    check_taus(taus)?;
    let a = cfg.separation();
    if let Some(t) = taus.iter().find(|&&t| t <= a) {
        return Err(Error::param("tau", format!("must exceed a = {a}, got {t}")));
    }
    let eta = eta_pair(cfg)?.eta();
    let spec = average_spec();
    let mut rows = Vec::with_capacity(taus.len());
    let mut dropped: f64 = 0.0;
    for &tau in taus {
        let x = 0.5 * tau;
        let rho = SamplingFunction::quartic(tau)?;
        let right = energy::pulse_time_profile(eta, a, x, Direction::Right)?;
        let left = energy::pulse_time_profile(eta, a, x, Direction::Left)?;
        let both = right.add(&left);
        dropped = dropped.max(weighted_average(&left, &rho)?.abs());
        let lhs = weighted_average(&both, &rho)?;
        let lhs_q = weighted_average_quadrature(&both, &rho, &spec)?.into_converged()?.value;
        let bound = xi_min_reference(&rho);
        let asymptotic = -15.0 * eta * a / (16.0 * tau);
        rows.push(ViolationRow {
            tau,
            lhs,
            lhs_quadrature: lhs_q,
            bound,
            violated: lhs < bound,
            violated_quadrature: lhs_q < bound,
            asymptotic,
            asymptotic_rel_deviation: rel_dev(lhs, asymptotic),
        });
    }
    Ok(ViolationReport {
        experiment: "temporal".into(),
        lambda: cfg.lambda(),
        a,
        eta,
        rows,
        crossover_sampled: None,
        crossover_bisected: None,
        dropped_contribution: dropped,
        routes_agree: false,
    }
    .finish())
}

/// A maximal run of negative density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub start: f64,
    pub end: f64,
    pub width: f64,
    pub energy: f64,
    pub min_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveInterval {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumInterestReport {
    pub t: f64,
    pub window: (f64, f64),
    pub eta: f64,
    pub pulses: Vec<Pulse>,
    pub positive_intervals: Vec<PositiveInterval>,
    pub all_nonpositive: bool,
    pub total_energy_in_window: f64,
    pub caveat: String,
}

pub const QUANTUM_INTEREST_CAVEAT: &str = "Only the finite window is inspected. Any positive energy \
deposited when the potential was originally switched on is assumed to have propagated beyond \
every finite window; this scan can neither confirm nor exclude it.";

/// Pulses and positive intervals of the evolved profile inside `window`.
pub fn quantum_interest_scan(cfg: &PotentialConfig, t: f64, window: (f64, f64)) -> Result<QuantumInterestReport> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("must be finite and >= 0, got {t}")));
    }
    let (wlo, whi) = window;
    if !(wlo < whi) || wlo.is_nan() || whi.is_nan() {
        return Err(Error::param("window", format!("need lo < hi, got ({wlo}, {whi})")));
    }
    let eta = eta_pair(cfg)?.eta();
    let profile = energy::evolved_profile(cfg, t)?;
    Ok(scan_profile(&profile, t, window, eta))
}

pub fn scan_profile(profile: &PiecewiseProfile, t: f64, window: (f64, f64), eta: f64) -> QuantumInterestReport {
    let (wlo, whi) = window;
    let mut pulses: Vec<Pulse> = Vec::new();
    let mut positive = Vec::new();
    let mut total = 0.0;
    let mut open: Option<Pulse> = None;
    for iv in profile.intervals() {
        let (lo, hi) = (iv.lo.max(wlo), iv.hi.min(whi));
        if lo >= hi {
            continue;
        }
        if iv.value != 0.0 {
            total += iv.value * (hi - lo);
        }
        if iv.value < 0.0 {
            let energy = iv.value * (hi - lo);
            match open.as_mut() {
                Some(p) if p.end == lo => {
                    p.end = hi;
                    p.width = p.end - p.start;
                    p.energy += energy;
                    p.min_density = p.min_density.min(iv.value);
                }
                _ => {
                    if let Some(p) = open.take() {
                        pulses.push(p);
                    }
                    open = Some(Pulse { start: lo, end: hi, width: hi - lo, energy, min_density: iv.value });
                }
            }
        } else {
            if let Some(p) = open.take() {
                pulses.push(p);
            }
            if iv.value > 0.0 {
                positive.push(PositiveInterval { lo, hi, density: iv.value });
            }
        }
    }
    if let Some(p) = open.take() {
        pulses.push(p);
    }
    QuantumInterestReport {
        t,
        window,
        eta,
        all_nonpositive: positive.is_empty(),
        pulses,
        positive_intervals: positive,
        total_energy_in_window: total,
        caveat: QUANTUM_INTEREST_CAVEAT.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub eta: f64,
    pub a: f64,
    /// `-eta a`.
    pub expected: f64,
    pub samples: Vec<(f64, f64)>,
    pub exact: bool,
    pub max_abs_deviation: f64,
}

/// Total energy of the evolved profile at each sample time.
pub fn conservation_check(cfg: &PotentialConfig, t_samples: &[f64]) -> Result<ConservationReport> {
    if let Some(t) = t_samples.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::param("t", format!("must be finite and >= 0, got {t}")));
    }
    let eta = eta_pair(cfg)?.eta();
    let a = cfg.separation();
    let expected = -eta * a;
    let mut samples = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        samples.push((t, energy::total_energy(&energy::evolved_profile(cfg, t)?)));
    }
    let max_abs_deviation = samples.iter().map(|(_, e)| (e - expected).abs()).fold(0.0, f64::max);
    Ok(ConservationReport {
        eta,
        a,
        expected,
        exact: samples.iter().all(|&(_, e)| e == expected),
        samples,
        max_abs_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeConservation {
    pub samples: Vec<(f64, f64)>,
    pub max_rel_spread: f64,
    pub quadrature_error: f64,
}

/// `int |d_t f|^2 + |d_x f|^2` over `[-half_box, half_box]` at each time.
pub fn mode_conservation_spot_check(
    cfg: &PotentialConfig,
    mode: ModeId,
    half_box: f64,
    t_samples: &[f64],
) -> Result<ModeConservation> {
    let spec = QuadratureSpec::default().with_tolerances(1e-10, 1e-14);
    let mut samples = Vec::new();
    let mut err: f64 = 0.0;
    for &t in t_samples {
        if t < 0.0 || half_box - t <= cfg.half_width() {
            return Err(Error::param("half_box", "box must contain the light cone"));
        }
        let r = mode_energy_in_box(mode, cfg, t, half_box, &spec)?.into_converged()?;
        err = err.max(r.error);
        samples.push((t, r.value));
    }
    let first = samples.first().map(|s| s.1).unwrap_or(0.0);
    let spread = samples.iter().map(|s| rel_dev(s.1, first)).fold(0.0, f64::max);
    Ok(ModeConservation { samples, max_rel_spread: spread, quadrature_error: err })
}
