//! Eigenmodes of the massless field in the repulsive double-delta potential
//! `V(x) = lambda [delta(x - a/2) + delta(x + a/2)]`.
//!
//! For each frequency `omega > 0` there is an odd and an even solution of
//! `-omega^2 chi - chi'' + V chi = 0`:
//!
//! ```text
//! odd:   A1 sin(omega x)  for |x| < a/2,   sin(omega x + delta1 sgn x)  outside
//! even:  A2 cos(omega x)  for |x| < a/2,   cos(omega x + delta2 sgn x)  outside
//! ```
//!
//! The amplitude and phase follow from continuity of `chi` and the jump
//! `chi'(a/2+) - chi'(a/2-) = lambda chi(a/2)`. They depend only on the
//! dimensionless `Lambda = lambda a / 2` and `Omega = omega a / 2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Double-delta potential parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    lambda: f64,
    a: f64,
}

impl PotentialConfig {
    pub fn new(lambda: f64, a: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::param("a", format!("must be finite and > 0, got {a}")));
        }
        Ok(Self { lambda, a })
    }

    /// Build from the dimensionless strength `Lambda = lambda a / 2`.
    pub fn from_strength(strength: f64, a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::param("a", format!("must be finite and > 0, got {a}")));
        }
        Self::new(2.0 * strength / a, a)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn separation(&self) -> f64 {
        self.a
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.a
    }

    /// `Lambda = lambda a / 2`.
    pub fn strength(&self) -> f64 {
        self.lambda * self.a / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `j = 1`, sine-like.
    Odd,
    /// `j = 2`, cosine-like.
    Even,
}

impl Family {
    pub const BOTH: [Family; 2] = [Family::Odd, Family::Even];

    pub fn index(self) -> u8 {
        match self {
            Family::Odd => 1,
            Family::Even => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeId {
    pub family: Family,
    omega: f64,
}

impl ModeId {
    pub fn new(family: Family, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::param("omega", format!("must be finite and > 0, got {omega}")));
        }
        Ok(Self { family, omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `Omega = omega a / 2`.
    pub fn scaled(&self, cfg: &PotentialConfig) -> f64 {
        self.omega * cfg.half_width()
    }
}

/// Amplitude inside the well and phase shift outside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeShape {
    pub amplitude_sq: f64,
    pub amplitude: f64,
    /// Phase of the outer wave, in `(-pi, pi]`. It is fixed by the matching
    /// conditions, so it can sit outside the principal arctan branch when the
    /// inner amplitude is kept positive.
    pub phase: f64,
}

/// Amplitude and phase for one family at frequency `omega`.
pub fn mode_shape(family: Family, omega: f64, cfg: &PotentialConfig) -> Result<ModeShape> {
    let id = ModeId::new(family, omega)?;
    Ok(shape_unchecked(family, id.scaled(cfg), cfg.strength()))
}

fn shape_unchecked(family: Family, big_omega: f64, strength: f64) -> ModeShape {
    let (s, c) = big_omega.sin_cos();
    let ratio = strength / big_omega;
    // (sin, cos) of the outer phase Omega + delta, up to the common factor A.
    let (sin_outer, cos_outer, inv) = match family {
        Family::Odd => {
            let q = c + ratio * s;
            (s, q, s * s + q * q)
        }
        Family::Even => {
            let q = s - ratio * c;
            (q, c, c * c + q * q)
        }
    };
    let amplitude_sq = 1.0 / inv;
    let theta = sin_outer.atan2(cos_outer);
    ModeShape {
        amplitude_sq,
        amplitude: amplitude_sq.sqrt(),
        phase: wrap_phase(theta - big_omega),
    }
}

fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x - two_pi * (x / two_pi).round();
    if y <= -PI {
        y += two_pi;
    }
    y
}

/// `tan(delta)` from the closed-form ratio; useful as a branch-free check.
pub fn tan_phase(family: Family, big_omega: f64, strength: f64) -> f64 {
    let ratio = strength / big_omega;
    let (s, c) = big_omega.sin_cos();
    let s2 = (2.0 * big_omega).sin();
    match family {
        Family::Odd => -ratio * s * s / (1.0 + 0.5 * ratio * s2),
        Family::Even => -ratio * c * c / (1.0 - 0.5 * ratio * s2),
    }
}

/// Which side of a delta site a one-sided derivative is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One eigenmode with its amplitude and phase resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenmode {
    pub id: ModeId,
    pub cfg: PotentialConfig,
    pub shape: ModeShape,
}

impl Eigenmode {
    pub fn new(id: ModeId, cfg: PotentialConfig) -> Self {
        let shape = shape_unchecked(id.family, id.scaled(&cfg), cfg.strength());
        Self { id, cfg, shape }
    }

    pub fn with(family: Family, omega: f64, cfg: PotentialConfig) -> Result<Self> {
        Ok(Self::new(ModeId::new(family, omega)?, cfg))
    }

    pub fn omega(&self) -> f64 {
        self.id.omega
    }

    #[inline]
    fn inside(&self, x: f64) -> bool {
        x.abs() <= self.cfg.half_width()
    }

    /// `chi(x)`. At `|x| = a/2` the inner form is used.
    pub fn value(&self, x: f64) -> f64 {
        let w = self.id.omega;
        if self.inside(x) {
            let inner = match self.id.family {
                Family::Odd => (w * x).sin(),
                Family::Even => (w * x).cos(),
            };
            return self.shape.amplitude * inner;
        }
        let arg = w * x + self.shape.phase * x.signum();
        match self.id.family {
            Family::Odd => arg.sin(),
            Family::Even => arg.cos(),
        }
    }

    fn inner_derivative(&self, x: f64) -> f64 {
        let w = self.id.omega;
        let d = match self.id.family {
            Family::Odd => (w * x).cos(),
            Family::Even => -(w * x).sin(),
        };
        self.shape.amplitude * w * d
    }

    fn outer_derivative(&self, x: f64) -> f64 {
        let w = self.id.omega;
        let sign = if x >= 0.0 { 1.0 } else { -1.0 };
        let arg = w * x + self.shape.phase * sign;
        match self.id.family {
            Family::Odd => w * arg.cos(),
            Family::Even => -w * arg.sin(),
        }
    }

    /// `chi'(x)`. At `|x| = a/2` the inner one-sided derivative is returned.
    pub fn derivative(&self, x: f64) -> f64 {
        if self.inside(x) {
            self.inner_derivative(x)
        } else {
            self.outer_derivative(x)
        }
    }

    /// One-sided derivative, meaningful at the delta sites.
    pub fn derivative_from(&self, x: f64, side: Side) -> f64 {
        let h = self.cfg.half_width();
        let at_site = x.abs() == h;
        if !at_site {
            return self.derivative(x);
        }
        // Left of +a/2 and right of -a/2 are inside the well.
        let inner = (x > 0.0) == (side == Side::Left);
        if inner {
            self.inner_derivative(x)
        } else {
            self.outer_derivative(x)
        }
    }

    /// `int_0^x chi(y) dy`, continuous in `x`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let r = self.antiderivative_nonneg(x.abs());
        match self.id.family {
            // Odd integrand: even antiderivative.
            Family::Odd => r,
            Family::Even => r * x.signum(),
        }
    }

    fn antiderivative_nonneg(&self, x: f64) -> f64 {
        let w = self.id.omega;
        let h = self.cfg.half_width();
        let amp = self.shape.amplitude;
        let big_omega = w * h;
        let delta = self.shape.phase;
        match self.id.family {
            Family::Odd => {
                if x <= h {
                    amp * (1.0 - (w * x).cos()) / w
                } else {
                    let edge = amp * (1.0 - big_omega.cos()) / w;
                    edge + ((big_omega + delta).cos() - (w * x + delta).cos()) / w
                }
            }
            Family::Even => {
                if x <= h {
                    amp * (w * x).sin() / w
                } else {
                    let edge = amp * big_omega.sin() / w;
                    edge + ((w * x + delta).sin() - (big_omega + delta).sin()) / w
                }
            }
        }
    }
}

/// `chi_{lambda, j omega}(x)`.
pub fn chi(mode: ModeId, cfg: &PotentialConfig, x: f64) -> f64 {
    Eigenmode::new(mode, *cfg).value(x)
}

pub fn chi_derivative(mode: ModeId, cfg: &PotentialConfig, x: f64) -> f64 {
    Eigenmode::new(mode, *cfg).derivative(x)
}

pub fn chi_antiderivative(mode: ModeId, cfg: &PotentialConfig, x: f64) -> f64 {
    Eigenmode::new(mode, *cfg).antiderivative(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_with_breaks, QuadratureSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(strength: f64) -> PotentialConfig {
        PotentialConfig::from_strength(strength, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PotentialConfig::new(-1.0, 1.0).is_err());
        assert!(PotentialConfig::new(1.0, 0.0).is_err());
        assert!(PotentialConfig::new(f64::NAN, 1.0).is_err());
        assert!(ModeId::new(Family::Odd, 0.0).is_err());
        assert!(ModeId::new(Family::Even, -2.0).is_err());
    }

    #[test]
    fn strength_is_lambda_a_over_two() {
        let c = PotentialConfig::new(3.0, 0.5).unwrap();
        assert_eq!(c.strength(), 0.75);
        assert_eq!(PotentialConfig::from_strength(0.75, 0.5).unwrap().lambda(), 3.0);
    }

    #[test]
    fn free_field_limit() {
        let c = cfg(0.0);
        for fam in Family::BOTH {
            let s = mode_shape(fam, 1.7, &c).unwrap();
            assert_eq!(s.amplitude_sq, 1.0);
            assert_eq!(s.phase, 0.0);
        }
        let odd = Eigenmode::with(Family::Odd, 2.3, c).unwrap();
        let even = Eigenmode::with(Family::Even, 2.3, c).unwrap();
        for x in [-3.1, -0.5, -0.2, 0.0, 0.4, 0.5, 7.0] {
            assert_relative_eq!(odd.value(x), (2.3 * x).sin(), epsilon = 1e-15);
            assert_relative_eq!(even.derivative(x), -2.3 * (2.3 * x).sin(), epsilon = 1e-14);
            assert_relative_eq!(even.antiderivative(x), (2.3 * x).sin() / 2.3, epsilon = 1e-15);
        }
    }

    #[test]
    fn strong_coupling_suppresses_interior() {
        for fam in Family::BOTH {
            let s = mode_shape(fam, 2.0, &cfg(1e6)).unwrap();
            assert!(s.amplitude_sq < 1e-10, "{fam:?} {s:?}");
        }
    }

    #[test]
    fn phase_at_half_pi() {
        // Omega = pi/2: sin(2 Omega) = 0, sin^2 Omega = 1, tan delta1 = -Lambda/Omega.
        let strength = 1.3;
        let c = cfg(strength);
        let omega = PI / c.separation();
        let s = mode_shape(Family::Odd, omega, &c).unwrap();
        assert_relative_eq!(s.phase.tan(), -strength / (PI / 2.0), max_relative = 1e-13);
    }

    #[test]
    fn phase_matches_closed_tangent() {
        for (strength, big_omega) in [(1.0, 1.0), (0.3, 4.2), (10.0, 2.0), (5.0, 0.1)] {
            let c = cfg(strength);
            for fam in Family::BOTH {
                let s = mode_shape(fam, 2.0 * big_omega, &c).unwrap();
                assert_relative_eq!(
                    s.phase.tan(),
                    tan_phase(fam, big_omega, strength),
                    max_relative = 1e-10,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn continuity_at_edge_example() {
        let c = cfg(1.0);
        let m = Eigenmode::with(Family::Odd, 2.0, c).unwrap();
        let inside = m.shape.amplitude * 1f64.sin();
        let outside = (1.0 + m.shape.phase).sin();
        assert_relative_eq!(inside, outside, max_relative = 1e-14);
    }

    #[test]
    fn jump_condition_example() {
        let c = cfg(1.0);
        for fam in Family::BOTH {
            let m = Eigenmode::with(fam, 1.4, c).unwrap();
            for x in [0.5, -0.5] {
                let jump = m.derivative_from(x, Side::Right) - m.derivative_from(x, Side::Left);
                assert_relative_eq!(jump, c.lambda() * m.value(x), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn odd_derivative_at_origin() {
        let m = Eigenmode::with(Family::Odd, 1.9, cfg(2.0)).unwrap();
        assert_relative_eq!(m.derivative(0.0), m.shape.amplitude * 1.9, max_relative = 1e-15);
    }

    #[test]
    fn antiderivative_zero_at_origin() {
        for fam in Family::BOTH {
            let m = Eigenmode::with(fam, 3.3, cfg(0.7)).unwrap();
            assert_eq!(m.antiderivative(0.0), 0.0);
        }
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let c = cfg(1.0);
        let m = Eigenmode::with(Family::Odd, 1.8, c).unwrap();
        let q = integrate_with_breaks(|y| m.value(y), &[0.0, 0.5, 1.0], &QuadratureSpec::default())
            .unwrap();
        assert_relative_eq!(m.antiderivative(1.0), q.value, epsilon = 1e-10);
        let q = integrate_with_breaks(|y| m.value(y), &[-2.0, -0.5, 0.0], &QuadratureSpec::default())
            .unwrap();
        assert_relative_eq!(-m.antiderivative(-2.0), q.value, epsilon = 1e-10);
    }

    /// Integrate the interior ODE with RK4 from the origin, apply the delta
    /// jump, continue outside and read off amplitude and phase of the outer
    /// wave. Returns `(A^2, tan delta)`.
    fn shoot(family: Family, strength: f64, big_omega: f64) -> (f64, f64) {
        let a = 1.0;
        let lambda = 2.0 * strength / a;
        let w = 2.0 * big_omega / a;
        let (mut y, mut dy) = match family {
            // Unit inner amplitude.
            Family::Odd => (0.0, w),
            Family::Even => (1.0, 0.0),
        };
        let rk4 = |y: &mut f64, dy: &mut f64, len: f64| {
            let n = 20_000;
            let h = len / n as f64;
            for _ in 0..n {
                let f = |_y: f64, _dy: f64| (_dy, -w * w * _y);
                let (k1a, k1b) = f(*y, *dy);
                let (k2a, k2b) = f(*y + 0.5 * h * k1a, *dy + 0.5 * h * k1b);
                let (k3a, k3b) = f(*y + 0.5 * h * k2a, *dy + 0.5 * h * k2b);
                let (k4a, k4b) = f(*y + h * k3a, *dy + h * k3b);
                *y += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
                *dy += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            }
        };
        rk4(&mut y, &mut dy, a / 2.0);
        dy += lambda * y;
        rk4(&mut y, &mut dy, 0.3);
        let x = a / 2.0 + 0.3;
        // Outer wave B sin(w x + phi) or B cos(w x + phi).
        let b2 = y * y + (dy / w) * (dy / w);
        let phi = match family {
            Family::Odd => y.atan2(dy / w) - w * x,
            Family::Even => (-dy / w).atan2(y) - w * x,
        };
        // Unit outer amplitude means A = 1/B.
        (1.0 / b2, phi.tan())
    }

    #[test]
    fn shape_agrees_with_shooting() {
        let c = cfg(1.0);
        for fam in Family::BOTH {
            let s = mode_shape(fam, 2.0, &c).unwrap();
            let (a2, tan_delta) = shoot(fam, 1.0, 1.0);
            assert_relative_eq!(s.amplitude_sq, a2, max_relative = 1e-9);
            assert_relative_eq!(s.phase.tan(), tan_delta, max_relative = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn continuous_at_delta_sites(strength in 1e-3f64..10.0, big_omega in 1e-3f64..10.0) {
            let c = cfg(strength);
            for fam in Family::BOTH {
                let m = Eigenmode::with(fam, 2.0 * big_omega, c).unwrap();
                for edge in [0.5, -0.5] {
                    let inner = m.value(edge);
                    let outer = m.value(edge * (1.0 + 1e-15));
                    let arg = 2.0 * big_omega * edge + m.shape.phase * edge.signum();
                    let outer_exact = match fam { Family::Odd => arg.sin(), Family::Even => arg.cos() };
                    prop_assert!((inner - outer_exact).abs() < 1e-12, "{fam:?} {inner} {outer_exact}");
                    prop_assert!((inner - outer).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn derivative_jump(strength in 1e-3f64..10.0, big_omega in 1e-2f64..10.0) {
            let c = cfg(strength);
            for fam in Family::BOTH {
                let m = Eigenmode::with(fam, 2.0 * big_omega, c).unwrap();
                for edge in [0.5, -0.5] {
                    let jump = m.derivative_from(edge, Side::Right) - m.derivative_from(edge, Side::Left);
                    let expected = c.lambda() * m.value(edge);
                    let scale = (c.lambda() * m.value(edge)).abs().max(m.omega() * 1e-3);
                    prop_assert!((jump - expected).abs() <= 1e-10 * scale.max(1.0),
                        "{fam:?} jump {jump} expected {expected}");
                }
            }
        }

        #[test]
        fn parity(strength in 0.0f64..10.0, w in 1e-2f64..20.0, x in -5.0f64..5.0) {
            let c = cfg(strength);
            let odd = Eigenmode::with(Family::Odd, w, c).unwrap();
            let even = Eigenmode::with(Family::Even, w, c).unwrap();
            prop_assert_eq!(odd.value(-x), -odd.value(x));
            prop_assert_eq!(even.value(-x), even.value(x));
        }

        #[test]
        fn helmholtz_away_from_sites(strength in 0.0f64..10.0, w in 0.1f64..10.0, x in -3.0f64..3.0) {
            let h = 1e-4;
            prop_assume!(((x.abs() - 0.5).abs()) > 10.0 * h);
            let c = cfg(strength);
            for fam in Family::BOTH {
                let m = Eigenmode::with(fam, w, c).unwrap();
                let second = (m.value(x + h) - 2.0 * m.value(x) + m.value(x - h)) / (h * h);
                let residual = second + w * w * m.value(x);
                prop_assert!(residual.abs() <= 1e-6 * (w * w).max(1.0), "{fam:?} residual {residual}");
            }
        }

        #[test]
        fn antiderivative_differentiates_to_chi(strength in 0.0f64..10.0, w in 0.1f64..10.0, x in -3.0f64..3.0) {
            let h = 1e-6;
            prop_assume!(((x.abs() - 0.5).abs()) > 10.0 * h);
            let c = cfg(strength);
            for fam in Family::BOTH {
                let m = Eigenmode::with(fam, w, c).unwrap();
                let fd = (m.antiderivative(x + h) - m.antiderivative(x - h)) / (2.0 * h);
                prop_assert!((fd - m.value(x)).abs() < 1e-7, "{fam:?} {fd} vs {}", m.value(x));
            }
        }
    }
}
