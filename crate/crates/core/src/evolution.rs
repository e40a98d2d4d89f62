//! Mode functions after the potential is switched off at `t = 0`.
//!
//! Before the switch the positive-frequency mode is `exp(-i w t) chi(x) / sqrt(2 pi w)`.
//! Afterwards it solves the free wave equation with that Cauchy data, which
//! d'Alembert's formula gives in closed form:
//!
//! ```text
//! f(x,t) = [chi(x-t) + chi(x+t) - i w (F(x+t) - F(x-t))] / (2 sqrt(2 pi w))
//! ```
//!
//! with `F` the antiderivative of `chi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::modes::{Eigenmode, ModeId, PotentialConfig};
use crate::quadrature::{integrate_with_breaks, QuadratureResult, QuadratureSpec};

/// Mode value and its first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolvedModeValue {
    pub value: Complex64,
    pub dt: Complex64,
    pub dx: Complex64,
}

fn norm(omega: f64) -> f64 {
    (2.0 * PI * omega).sqrt()
}

/// Evaluate the evolved mode. For `t < 0` the static mode is returned.
pub fn f_plus(mode: ModeId, cfg: &PotentialConfig, x: f64, t: f64) -> EvolvedModeValue {
    evolve(&Eigenmode::new(mode, *cfg), x, t)
}

pub fn evolve(m: &Eigenmode, x: f64, t: f64) -> EvolvedModeValue {
    let w = m.omega();
    let n = norm(w);
    let i = Complex64::i();
    if t < 0.0 {
        let phase = Complex64::from_polar(1.0 / n, -w * t);
        return EvolvedModeValue {
            value: phase * m.value(x),
            dt: phase * (-i * w * m.value(x)),
            dx: phase * m.derivative(x),
        };
    }
    let (xm, xp) = (x - t, x + t);
    let (cm, cp) = (m.value(xm), m.value(xp));
    let (dm, dp) = (m.derivative(xm), m.derivative(xp));
    let half = 0.5 / n;
    let value = Complex64::new(cm + cp, -w * (m.antiderivative(xp) - m.antiderivative(xm))) * half;
    let dt = Complex64::new(dp - dm, -w * (cp + cm)) * half;
    let dx = Complex64::new(dp + dm, -w * (cp - cm)) * half;
    EvolvedModeValue { value, dt, dx }
}

/// Energy density of one evolved mode,
/// `(1/8 pi w) [chi'(x-t)^2 + chi'(x+t)^2 + w^2 (chi(x+t)^2 + chi(x-t)^2)]`.
pub fn mode_energy_evolved(mode: ModeId, cfg: &PotentialConfig, x: f64, t: f64) -> f64 {
    let m = Eigenmode::new(mode, *cfg);
    let w = m.omega();
    let (xm, xp) = (x - t, x + t);
    let (cm, cp) = (m.value(xm), m.value(xp));
    let (dm, dp) = (m.derivative(xm), m.derivative(xp));
    (dm * dm + dp * dp + w * w * (cp * cp + cm * cm)) / (8.0 * PI * w)
}

/// `int_{-half_box}^{half_box} |d_t f|^2 + |d_x f|^2 dx` for one mode.
/// The integral is independent of `t` while the box contains the light cone.
pub fn mode_energy_in_box(
    mode: ModeId,
    cfg: &PotentialConfig,
    t: f64,
    half_box: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult<f64>> {
    let m = Eigenmode::new(mode, *cfg);
    let h = cfg.half_width();
    let mut breaks = vec![-half_box, half_box];
    for s in [-h, h] {
        for shift in [-t, t] {
            let b = s + shift;
            if b > -half_box && b < half_box {
                breaks.push(b);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    integrate_with_breaks(
        |x| {
            let e = evolve(&m, x, t);
            e.dt.norm_sqr() + e.dx.norm_sqr()
        },
        &breaks,
        spec,
    )
}

/// True when `(x, t)` lies outside the future light cone of the delta sites,
/// where the evolved mode still equals the static one.
pub fn outside_light_cone(cfg: &PotentialConfig, x: f64, t: f64) -> bool {
    x.abs() - t > cfg.half_width()
}
