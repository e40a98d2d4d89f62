//! Massive scalar field with a single delta potential `2 lambda delta(x)`.
//!
//! Even modes are `A_k cos(k|x| + delta_k)` with `delta_k = -atan(lambda/k)`;
//! odd modes do not feel the potential and are left out. Mode regularization
//! gives the total energy shift
//!
//! ```text
//! dE = -(1/2pi) int_0^inf [delta_k k / w_k + lambda k^2 / (w_k (k^2 + lambda^2))] dk
//!    = lambda/2pi - m/4 + (m^2/2pi) B(lambda, m)
//! ```
//!
//! Temporal point splitting by `alpha` gives `dE - lambda/2pi` instead, the
//! extra term coming from `(i alpha/2pi) int k delta_k exp(-i w_k alpha) dk`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_damped_oscillatory, integrate_with_breaks, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassiveDeltaConfig {
    m: f64,
    lambda: f64,
}

impl MassiveDeltaConfig {
    pub fn new(m: f64, lambda: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::param("m", format!("must be finite and > 0, got {m}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
        }
        Ok(Self { m, lambda })
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega(&self, k: f64) -> f64 {
        k.hypot(self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    ModeNumeric,
    ClosedForm,
    PointSplitAnalytic,
    PointSplitNumeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyShiftResult {
    pub value: f64,
    pub route: Route,
    pub error: f64,
    pub converged: bool,
}

impl EnergyShiftResult {
    fn exact(value: f64, route: Route) -> Self {
        Self { value, route, error: 0.0, converged: true }
    }
}

/// `delta_k = -atan(lambda / k)`.
pub fn phase_shift(k: f64, lambda: f64) -> f64 {
    -(lambda / k).atan()
}

/// Quantized wavenumber of even mode `n` in a box of length `L`, solving
/// `k = k0 - 2 delta_k / L` with `k0 = (2 pi / L)(n + 1/2)`.
pub fn quantized_k(n: u32, length: f64, lambda: f64) -> Result<f64> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::param("L", format!("must be finite and > 0, got {length}")));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    let k0 = 2.0 * PI / length * (n as f64 + 0.5);
    let mut k = k0;
    const MAX_ITER: usize = 10_000;
    for _ in 0..MAX_ITER {
        let next = k0 - 2.0 * phase_shift(k, lambda) / length;
        if (next - k).abs() <= 1e-15 * next.abs() {
            return Ok(next);
        }
        k = next;
    }
    Err(Error::FixedPoint(MAX_ITER))
}

/// `A_k^2 = 1 / (w L (1 - sin(2 delta)/(L k)))`.
pub fn finite_amplitude_sq(cfg: &MassiveDeltaConfig, k: f64, length: f64) -> f64 {
    let s2 = (2.0 * phase_shift(k, cfg.lambda)).sin();
    1.0 / (cfg.omega(k) * length * (1.0 - s2 / (length * k)))
}

/// Energy of one even mode in a box: `(A^2/2)(w^2 L - m^2 sin(2 delta)/k)`.
pub fn finite_mode_energy(cfg: &MassiveDeltaConfig, k: f64, length: f64) -> f64 {
    let w = cfg.omega(k);
    let s2 = (2.0 * phase_shift(k, cfg.lambda)).sin();
    0.5 * finite_amplitude_sq(cfg, k, length) * (w * w * length - cfg.m * cfg.m * s2 / k)
}

/// First-order large-`L` expansion: `(1/2)(w - 2 lambda k^2 / (w L (k^2 + lambda^2)))`.
pub fn finite_mode_energy_expansion(cfg: &MassiveDeltaConfig, k: f64, length: f64) -> f64 {
    let w = cfg.omega(k);
    let l = cfg.lambda;
    0.5 * (w - 2.0 * l * k * k / (w * length * (k * k + l * l)))
}

/// `h(u) = -atan(u) + u/(1+u^2)`, with a series for small `u`.
fn h(u: f64) -> f64 {
    if u < 0.05 {
        // sum (-1)^n u^(2n+1) 2n/(2n+1), n >= 1
        let u2 = u * u;
        let mut term = u * u2;
        let mut sum = 0.0;
        for n in 1..12 {
            let nf = n as f64;
            sum += term * (2.0 * nf) / (2.0 * nf + 1.0);
            term *= -u2;
        }
        sum * -1.0
    } else {
        -u.atan() + u / (1.0 + u * u)
    }
}

/// The fused mode-regularized integrand `-(1/2pi)(k/w) h(lambda/k)`.
pub fn mode_integrand(cfg: &MassiveDeltaConfig, k: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    -(k / cfg.omega(k)) * h(cfg.lambda / k) / (2.0 * PI)
}

/// `dE` by adaptive quadrature of the fused integrand.
pub fn delta_e_mode_numeric(cfg: &MassiveDeltaConfig) -> Result<EnergyShiftResult> {
    delta_e_mode_numeric_with(cfg, &mode_spec())
}

/// Spec used by [`delta_e_mode_numeric`].
pub fn mode_spec() -> QuadratureSpec {
    QuadratureSpec::default().with_tolerances(1e-11, 1e-300)
}

pub fn delta_e_mode_numeric_with(cfg: &MassiveDeltaConfig, spec: &QuadratureSpec) -> Result<EnergyShiftResult> {
    if cfg.lambda == 0.0 {
        return Ok(EnergyShiftResult::exact(0.0, Route::ModeNumeric));
    }
    let mut breaks = vec![0.0, cfg.m, cfg.lambda, 10.0 * cfg.m.max(cfg.lambda), f64::INFINITY];
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate_with_breaks(|k| mode_integrand(cfg, k), &breaks, spec)?;
    Ok(EnergyShiftResult { value: r.value, route: Route::ModeNumeric, error: r.error, converged: r.converged })
}

/// `B` in `dE = lambda/2pi - m/4 + (m^2/2pi) B`.
pub fn closed_form_b(m: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return PI / (2.0 * m);
    }
    let d = lambda * lambda - m * m;
    if d.abs() < 1e-6 * m * m {
        // B = G(z)/lambda with G(z) = artanh(sqrt z)/sqrt z, z = d/lambda^2.
        let z = d / (lambda * lambda);
        return (1.0 + z / 3.0 + z * z / 5.0) / lambda;
    }
    let r = d.abs().sqrt();
    if d > 0.0 {
        // (1/(2r)) ln((lambda + r)/(lambda - r)) = ln((lambda + r)/m) / r
        ((lambda + r) / m).ln() / r
    } else {
        r.atan2(lambda) / r
    }
}

/// Closed form `lambda/2pi - m/4 + (m^2/2pi) B`.
pub fn delta_e_closed(cfg: &MassiveDeltaConfig) -> EnergyShiftResult {
    let (m, l) = (cfg.m, cfg.lambda);
    let value = if l == 0.0 {
        0.0
    } else {
        l / (2.0 * PI) - m / 4.0 + m * m / (2.0 * PI) * closed_form_b(m, l)
    };
    EnergyShiftResult::exact(value, Route::ClosedForm)
}

/// `omega cos(omega alpha)`: one-particle energy under a point-split Hamiltonian.
pub fn pathological_mode_energy(omega: f64, alpha: f64) -> f64 {
    omega * (omega * alpha).cos()
}

/// `dE - lambda/2pi`.
pub fn delta_e_pointsplit_analytic(cfg: &MassiveDeltaConfig) -> EnergyShiftResult {
    let value = delta_e_closed(cfg).value - cfg.lambda / (2.0 * PI);
    EnergyShiftResult::exact(value, Route::PointSplitAnalytic)
}

/// Per-`alpha` samples of the point-split energy shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSample {
    pub alpha: f64,
    /// The term carrying `alpha` explicitly.
    pub tb: Complex64,
    /// The remaining finite term.
    pub tc: Complex64,
    pub error: f64,
    pub converged: bool,
}

impl AlphaSample {
    pub fn total(&self) -> Complex64 {
        self.tb + self.tc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSplitReport {
    pub lambda: f64,
    pub m: f64,
    pub analytic: EnergyShiftResult,
    pub numeric: EnergyShiftResult,
    pub samples: Vec<AlphaSample>,
    /// `lim Re(tb)`, expected `-lambda/2pi`.
    pub tb_limit: f64,
    pub expected_offset: f64,
    /// `|numeric - analytic| / |analytic|`.
    pub discrepancy: f64,
}

/// Damped specs for one split: the integrand behaves like `exp(-i k alpha)`.
pub fn split_spec(alpha: f64) -> QuadratureSpec {
    QuadratureSpec::oscillatory()
        .with_tolerances(1e-5, 1e-14)
        .with_damping(vec![0.2, 0.1, 0.05, 0.025, 0.0125])
        .scaled_damping(alpha)
        .with_oscillation_period(2.0 * PI / alpha)
}

/// Both point-split terms at one `alpha`.
pub fn point_split_sample(cfg: &MassiveDeltaConfig, alpha: f64) -> Result<AlphaSample> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be finite and > 0, got {alpha}")));
    }
    let spec = split_spec(alpha);
    let phase = |k: f64| Complex64::from_polar(1.0, -cfg.omega(k) * alpha);
    let tb_f = |k: f64| phase(k) * (k * phase_shift(k, cfg.lambda));
    let tc_f = |k: f64| phase(k) * mode_integrand(cfg, k);
    let tb = integrate_damped_oscillatory(tb_f, &spec)?;
    let tc = integrate_damped_oscillatory(tc_f, &spec)?;
    let pref = Complex64::new(0.0, alpha / (2.0 * PI));
    Ok(AlphaSample {
        alpha,
        tb: tb.value * pref,
        tc: tc.value,
        error: tb.error * alpha / (2.0 * PI) + tc.error,
        converged: tb.converged && tc.converged,
    })
}

/// Fit `y = c0 + c1 x^2 ln x + c2 x^2 (+ c3 x^3)` and return `c0`.
fn log_aware_limit(xs: &[f64], ys: &[f64], with_cubic: bool) -> Option<f64> {
    let n = if with_cubic { 4 } else { 3 };
    if xs.len() < n {
        return None;
    }
    let idx: Vec<usize> = {
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
        order.into_iter().take(n).collect()
    };
    let mut a = vec![vec![0.0; n + 1]; n];
    for (row, &i) in idx.iter().enumerate() {
        let x = xs[i];
        let basis = [1.0, x * x * x.ln(), x * x, x * x * x];
        a[row][..n].copy_from_slice(&basis[..n]);
        a[row][n] = ys[i];
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        a.swap(col, piv);
        if a[col][col] == 0.0 {
            return None;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some(a[0][n] / a[0][0])
}

/// `alpha -> 0` limit of samples with a spread-based error estimate.
pub fn extrapolate_alpha(alphas: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    let three = log_aware_limit(alphas, values, false)
        .ok_or_else(|| Error::param("alpha_schedule", "need at least 3 distinct values"))?;
    let spread = log_aware_limit(alphas, values, true).map_or(f64::INFINITY, |four| (four - three).abs());
    Ok((three, spread))
}

pub const DEFAULT_ALPHA_SCHEDULE: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Point-split energy shift: analytic `dE - lambda/2pi` and the numeric
/// `alpha -> 0` extrapolation of both terms.
pub fn delta_e_pointsplit(cfg: &MassiveDeltaConfig, alpha_schedule: &[f64]) -> Result<PointSplitReport> {
    if alpha_schedule.len() < 3 {
        return Err(Error::param("alpha_schedule", "need at least 3 values"));
    }
    if alpha_schedule.windows(2).any(|w| w[1] >= w[0]) || alpha_schedule.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::param("alpha_schedule", "must be positive and strictly decreasing"));
    }
    let expected_offset = -cfg.lambda / (2.0 * PI);
    let analytic = delta_e_pointsplit_analytic(cfg);
    if cfg.lambda == 0.0 {
        return Ok(PointSplitReport {
            lambda: 0.0,
            m: cfg.m,
            analytic,
            numeric: EnergyShiftResult::exact(0.0, Route::PointSplitNumeric),
            samples: Vec::new(),
            tb_limit: 0.0,
            expected_offset,
            discrepancy: 0.0,
        });
    }
    let samples = alpha_schedule
        .iter()
        .map(|&a| point_split_sample(cfg, a))
        .collect::<Result<Vec<_>>>()?;
    let totals: Vec<f64> = samples.iter().map(|s| s.total().re).collect();
    let tbs: Vec<f64> = samples.iter().map(|s| s.tb.re).collect();
    let (value, spread) = extrapolate_alpha(alpha_schedule, &totals)?;
    let (tb_limit, _) = extrapolate_alpha(alpha_schedule, &tbs)?;
    let sample_err = samples.iter().map(|s| s.error).fold(0.0, f64::max);
    let error = spread + sample_err;
    let discrepancy = if analytic.value == 0.0 {
        value.abs()
    } else {
        ((value - analytic.value) / analytic.value).abs()
    };
    Ok(PointSplitReport {
        lambda: cfg.lambda,
        m: cfg.m,
        analytic,
        numeric: EnergyShiftResult {
            value,
            route: Route::PointSplitNumeric,
            error,
            converged: samples.iter().all(|s| s.converged) && error <= 1e-3 * value.abs().max(1e-12),
        },
        samples,
        tb_limit,
        expected_offset,
        discrepancy,
    })
}

/// Default schedule scaled to the mass.
pub fn default_alpha_schedule(cfg: &MassiveDeltaConfig) -> Vec<f64> {
    DEFAULT_ALPHA_SCHEDULE.iter().map(|a| a / cfg.m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(lambda: f64) -> MassiveDeltaConfig {
        MassiveDeltaConfig::new(1.0, lambda).unwrap()
    }

    #[test]
    fn rejects_bad_config() {
        assert!(MassiveDeltaConfig::new(0.0, 1.0).is_err());
        assert!(MassiveDeltaConfig::new(1.0, -1.0).is_err());
    }

    #[test]
    fn phase_examples() {
        assert_relative_eq!(phase_shift(2.0, 2.0), -PI / 4.0, max_relative = 1e-15);
        assert_eq!(phase_shift(3.0, 0.0), 0.0);
        assert_eq!(quantized_k(4, 10.0, 0.0).unwrap(), 2.0 * PI / 10.0 * 4.5);
    }

    #[test]
    fn quantized_k_meets_boundary_condition() {
        let k = quantized_k(3, 100.0, 1.0).unwrap();
        assert!((k * 50.0 + phase_shift(k, 1.0)).cos().abs() < 1e-10);
    }

    #[test]
    fn series_matches_direct_h() {
        for u in [1e-3f64, 0.01, 0.049] {
            let direct = -u.atan() + u / (1.0 + u * u);
            assert_relative_eq!(h(u), direct, max_relative = 1e-9);
        }
        assert_relative_eq!(h(0.04), -2.0 / 3.0 * 0.04f64.powi(3), max_relative = 2e-3);
    }

    #[test]
    fn closed_form_examples() {
        // Independent high-precision reference values.
        let refs = [
            (0.1, 0.00115249435),
            (0.5, 0.02202756128),
            (0.99, 0.06725098443),
            (1.01, 0.06937303215),
            (2.0, 0.18932270996),
            (10.0, 1.38942804667),
            (1000.0, 158.906152814),
        ];
        for (l, v) in refs {
            assert_relative_eq!(delta_e_closed(&cfg(l)).value, v, max_relative = 1e-8);
        }
    }

    #[test]
    fn closed_form_at_branch_point() {
        let v = delta_e_closed(&cfg(1.0)).value;
        assert_relative_eq!(v, 1.0 / PI - 0.25, max_relative = 1e-14);
        let lo = delta_e_closed(&cfg(1.0 - 1e-6)).value;
        let hi = delta_e_closed(&cfg(1.0 + 1e-6)).value;
        assert_relative_eq!(lo, v, max_relative = 1e-5);
        assert_relative_eq!(hi, v, max_relative = 1e-5);
        let lo = delta_e_closed(&cfg(1.0 - 1e-8)).value;
        let hi = delta_e_closed(&cfg(1.0 + 1e-8)).value;
        assert_relative_eq!(lo, hi, max_relative = 1e-6);
    }

    #[test]
    fn closed_form_free_field() {
        assert_eq!(delta_e_closed(&cfg(0.0)).value, 0.0);
        // The small-lambda limit of the formula is continuous with zero.
        assert!(delta_e_closed(&cfg(1e-9)).value.abs() < 1e-9);
    }

    #[test]
    fn series_branch_agrees_with_exact_branches() {
        for d in [3e-7, -3e-7] {
            let l = (1.0f64 + d).sqrt();
            let series = closed_form_b(1.0, l);
            let r = (l * l - 1.0f64).abs().sqrt();
            let exact = if d > 0.0 { ((l + r) / 1.0).ln() / r } else { r.atan2(l) / r };
            assert_relative_eq!(series, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn mode_numeric_matches_closed_form() {
        for l in [0.1, 0.5, 0.99, 1.01, 2.0, 10.0] {
            let c = cfg(l);
            let n = delta_e_mode_numeric(&c).unwrap();
            assert!(n.converged);
            assert_relative_eq!(n.value, delta_e_closed(&c).value, max_relative = 1e-6);
        }
        assert_eq!(delta_e_mode_numeric(&cfg(0.0)).unwrap().value, 0.0);
    }

    #[test]
    fn pathological_energy() {
        for alpha in [0.1, 1.0] {
            assert_eq!(pathological_mode_energy(PI / alpha, alpha), -PI / alpha);
        }
        assert_relative_eq!(pathological_mode_energy(3.0, 1e-9), 3.0, max_relative = 1e-15);
        assert!(pathological_mode_energy(PI / 2.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_aware_fit_recovers_constant() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 2.0 + 3.0 * x * x * x.ln() - x * x).collect();
        let (v, spread) = extrapolate_alpha(&xs, &ys).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
        assert!(spread < 1e-10);
    }

    #[test]
    fn pointsplit_free_field() {
        let r = delta_e_pointsplit(&cfg(0.0), &DEFAULT_ALPHA_SCHEDULE).unwrap();
        assert_eq!(r.analytic.value, 0.0);
        assert_eq!(r.numeric.value, 0.0);
    }

    #[test]
    fn pointsplit_numeric_route() {
        let c = cfg(2.0);
        let r = delta_e_pointsplit(&c, &default_alpha_schedule(&c)).unwrap();
        assert_relative_eq!(r.analytic.value, -0.12898717623, max_relative = 1e-9);
        assert!(r.discrepancy <= 1e-3, "{r:#?}");
        assert_relative_eq!(r.tb_limit, -2.0 / (2.0 * PI), max_relative = 1e-3);
        assert_eq!(r.analytic.route, Route::PointSplitAnalytic);
        assert_eq!(r.numeric.route, Route::PointSplitNumeric);
    }

    #[test]
    fn finite_box_expansion_error_is_second_order() {
        let c = cfg(1.0);
        let k = 1.3;
        let err = |l: f64| (finite_mode_energy(&c, k, l) - finite_mode_energy_expansion(&c, k, l)).abs();
        let (e1, e2, e3) = (err(100.0), err(200.0), err(400.0));
        assert_relative_eq!(e1 / e2, 4.0, max_relative = 0.05);
        assert_relative_eq!(e2 / e3, 4.0, max_relative = 0.05);
    }

    #[test]
    fn finite_box_free_energy() {
        // lambda = 0: E = w/2 exactly.
        let c = cfg(0.0);
        assert_relative_eq!(finite_mode_energy(&c, 0.7, 50.0), 0.5 * c.omega(0.7), max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn closed_form_positive_and_offset(l in 1e-3f64..50.0) {
            let c = cfg(l);
            let closed = delta_e_closed(&c).value;
            prop_assert!(closed > 0.0);
            let ps = delta_e_pointsplit_analytic(&c).value;
            prop_assert!(ps < closed);
            let offset = ps - closed;
            prop_assert!((offset + l / (2.0 * PI)).abs() <= 4.0 * f64::EPSILON * closed.abs().max(l));
        }

        #[test]
        fn phase_in_range(k in 1e-6f64..1e6, l in 0.0f64..1e6) {
            let d = phase_shift(k, l);
            prop_assert!(d <= 0.0 && d > -PI / 2.0);
        }

        #[test]
        fn branch_continuity(m in 0.1f64..10.0) {
            let lo = delta_e_closed(&MassiveDeltaConfig::new(m, m * (1.0 - 1e-8)).unwrap()).value;
            let hi = delta_e_closed(&MassiveDeltaConfig::new(m, m * (1.0 + 1e-8)).unwrap()).value;
            prop_assert!(((lo - hi) / hi).abs() < 1e-6);
        }
    }
}
