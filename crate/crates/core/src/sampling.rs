//! Sampling functions and the lower bound they impose on averaged energy
//! densities of a massless field in two dimensions,
//! `xi_min[rho] = -(1/24 pi) int rho'^2 / rho`.
//!
//! Two kinds are built in: the Lorentzian `tau / (pi (v^2 + tau^2))` and the
//! compact quartic `N t^2 (t - tau)^2` on `[0, tau]` with `N = 30 / tau^5`.
//! Other shapes plug in through [`Weight`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::PiecewiseProfile;
use crate::quadrature::{integrate_with_breaks, QuadratureResult, QuadratureSpec};

/// A normalized, non-negative, continuous weight on the line.
pub trait Weight {
    fn value(&self, v: f64) -> f64;
    fn derivative(&self, v: f64) -> f64;
    /// Closed support `[lo, hi]`; ends may be infinite.
    fn support(&self) -> (f64, f64);
    /// Points where quadrature should split, besides the support ends.
    fn scale_points(&self) -> Vec<f64> {
        Vec::new()
    }
    /// `int_lo^hi rho`, if known in closed form.
    fn mass(&self, _lo: f64, _hi: f64) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingKind {
    Lorentzian,
    QuarticCompact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingFunction {
    pub kind: SamplingKind,
    tau: f64,
}

impl SamplingFunction {
    pub fn new(kind: SamplingKind, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::param("tau", format!("must be finite and > 0, got {tau}")));
        }
        Ok(Self { kind, tau })
    }

    pub fn lorentzian(tau: f64) -> Result<Self> {
        Self::new(SamplingKind::Lorentzian, tau)
    }

    pub fn quartic(tau: f64) -> Result<Self> {
        Self::new(SamplingKind::QuarticCompact, tau)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Normalization constant of the quartic, `30 / tau^5`.
    pub fn quartic_norm(&self) -> f64 {
        30.0 / self.tau.powi(5)
    }

    /// Cumulative weight up to `v`.
    pub fn cdf(&self, v: f64) -> f64 {
        match self.kind {
            SamplingKind::Lorentzian => 0.5 + (v / self.tau).atan() / PI,
            SamplingKind::QuarticCompact => self.quartic_primitive(v.clamp(0.0, self.tau)),
        }
    }

    /// `N (t^5/5 - tau t^4/2 + tau^2 t^3/3)`.
    fn quartic_primitive(&self, t: f64) -> f64 {
        let tau = self.tau;
        self.quartic_norm() * t * t * t * (t * t / 5.0 - tau * t / 2.0 + tau * tau / 3.0)
    }
}

impl Weight for SamplingFunction {
    fn value(&self, v: f64) -> f64 {
        let tau = self.tau;
        match self.kind {
            SamplingKind::Lorentzian => tau / (PI * (v * v + tau * tau)),
            SamplingKind::QuarticCompact => {
                if !(0.0..=tau).contains(&v) {
                    return 0.0;
                }
                let u = v * (v - tau);
                self.quartic_norm() * u * u
            }
        }
    }

    fn derivative(&self, v: f64) -> f64 {
        let tau = self.tau;
        match self.kind {
            SamplingKind::Lorentzian => {
                let d = v * v + tau * tau;
                -2.0 * tau * v / (PI * d * d)
            }
            SamplingKind::QuarticCompact => {
                if !(0.0..=tau).contains(&v) {
                    return 0.0;
                }
                2.0 * self.quartic_norm() * v * (v - tau) * (2.0 * v - tau)
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match self.kind {
            SamplingKind::Lorentzian => (f64::NEG_INFINITY, f64::INFINITY),
            SamplingKind::QuarticCompact => (0.0, self.tau),
        }
    }

    fn scale_points(&self) -> Vec<f64> {
        match self.kind {
            SamplingKind::Lorentzian => vec![-self.tau, 0.0, self.tau],
            SamplingKind::QuarticCompact => vec![0.5 * self.tau],
        }
    }

    fn mass(&self, lo: f64, hi: f64) -> Option<f64> {
        if lo >= hi {
            return Some(0.0);
        }
        Some(match self.kind {
            // Difference of arctangents avoids cancelling against 1/2.
            SamplingKind::Lorentzian => ((hi / self.tau).atan() - (lo / self.tau).atan()) / PI,
            SamplingKind::QuarticCompact => self.cdf(hi) - self.cdf(lo),
        })
    }
}

fn split_points<W: Weight + ?Sized>(rho: &W, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(rho.scale_points().into_iter().filter(|&p| p > lo && p < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `rho'^2 / rho`, zero where `rho` vanishes.
fn fisher_density<W: Weight + ?Sized>(rho: &W, v: f64) -> f64 {
    let r = rho.value(v);
    if r <= 0.0 {
        return 0.0;
    }
    let d = rho.derivative(v);
    d * d / r
}

fn check_weight<W: Weight + ?Sized>(rho: &W) -> Result<()> {
    let (lo, hi) = rho.support();
    if lo >= hi {
        return Err(Error::Sampling("empty support".into()));
    }
    // Probe positivity on a grid covering the support and its scale points.
    let mut probes = split_points(rho, lo, hi);
    probes.retain(|p| p.is_finite());
    if probes.is_empty() {
        probes.push(0.0);
    }
    let span = probes.last().unwrap() - probes.first().unwrap();
    let (plo, phi) = (probes[0], *probes.last().unwrap());
    let pad = if span > 0.0 { span } else { 1.0 };
    let (glo, ghi) = (
        if lo.is_finite() { plo } else { plo - 10.0 * pad },
        if hi.is_finite() { phi } else { phi + 10.0 * pad },
    );
    for i in 0..=512 {
        let v = glo + (ghi - glo) * i as f64 / 512.0;
        let r = rho.value(v);
        if r.is_nan() || r < 0.0 {
            return Err(Error::Sampling(format!("weight is negative or undefined at {v}: {r}")));
        }
    }
    // At a finite edge where rho -> 0, rho'^2/rho must stay bounded.
    for (edge, inward) in [(lo, 1.0), (hi, -1.0)] {
        if !edge.is_finite() || rho.value(edge) > 0.0 {
            continue;
        }
        let probe = |d: f64| fisher_density(rho, edge + inward * d * span.max(f64::MIN_POSITIVE));
        let (near, mid, far) = (probe(1e-7), probe(1e-5), probe(1e-3));
        if near > 30.0 * mid.max(f64::MIN_POSITIVE) && mid > 30.0 * far.max(f64::MIN_POSITIVE) {
            return Err(Error::Sampling(format!(
                "rho'^2/rho diverges at the support edge {edge}; the bound functional is not finite"
            )));
        }
    }
    Ok(())
}

/// `-(1/24 pi) int rho'^2/rho` by adaptive quadrature over the support.
pub fn xi_min<W: Weight + ?Sized>(rho: &W) -> Result<QuadratureResult<f64>> {
    xi_min_with(rho, &xi_spec())
}

/// Spec used by [`xi_min`].
pub fn xi_spec() -> QuadratureSpec {
    QuadratureSpec::default().with_tolerances(1e-11, 1e-300)
}

pub fn xi_min_with<W: Weight + ?Sized>(rho: &W, spec: &QuadratureSpec) -> Result<QuadratureResult<f64>> {
    check_weight(rho)?;
    let (lo, hi) = rho.support();
    let pts = split_points(rho, lo, hi);
    let r = integrate_with_breaks(|v| fisher_density(rho, v), &pts, spec)?;
    Ok(r.scale(-1.0 / (24.0 * PI)))
}

/// Closed forms as used for the inequality checks:
/// `-1/(24 pi tau^2)` for the Lorentzian, `-5/(3 pi tau^2)` for the quartic.
pub fn xi_min_reference(rho: &SamplingFunction) -> f64 {
    let t2 = rho.tau * rho.tau;
    match rho.kind {
        SamplingKind::Lorentzian => -1.0 / (24.0 * PI * t2),
        SamplingKind::QuarticCompact => -5.0 / (3.0 * PI * t2),
    }
}

/// `xi_min` evaluated from the Fisher integral in closed form:
/// `int rho'^2/rho = 1/(2 tau^2)` (Lorentzian) or `40/tau^2` (quartic).
pub fn xi_min_analytic(rho: &SamplingFunction) -> f64 {
    let t2 = rho.tau * rho.tau;
    let fisher = match rho.kind {
        SamplingKind::Lorentzian => 0.5 / t2,
        SamplingKind::QuarticCompact => 40.0 / t2,
    };
    -fisher / (24.0 * PI)
}

/// `int profile * rho` from closed-form masses of each interval.
pub fn weighted_average<W: Weight + ?Sized>(profile: &PiecewiseProfile, rho: &W) -> Result<f64> {
    let mut total = 0.0;
    for iv in profile.intervals().filter(|iv| iv.value != 0.0) {
        let m = rho
            .mass(iv.lo, iv.hi)
            .ok_or_else(|| Error::Sampling("weight has no closed-form mass".into()))?;
        total += iv.value * m;
    }
    Ok(total)
}

/// `int profile * rho` by adaptive quadrature on each non-zero interval.
pub fn weighted_average_quadrature<W: Weight + ?Sized>(
    profile: &PiecewiseProfile,
    rho: &W,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult<f64>> {
    let (slo, shi) = rho.support();
    let mut acc = QuadratureResult { value: 0.0, error: 0.0, converged: true, evaluations: 0 };
    for iv in profile.intervals().filter(|iv| iv.value != 0.0) {
        let (lo, hi) = (iv.lo.max(slo), iv.hi.min(shi));
        if lo >= hi {
            continue;
        }
        let r = integrate_with_breaks(|v| rho.value(v), &split_points(rho, lo, hi), spec)?;
        acc.value += iv.value * r.value;
        acc.error += iv.value.abs() * r.error;
        acc.converged &= r.converged;
        acc.evaluations += r.evaluations;
    }
    Ok(acc)
}

/// `int f * rho` for a general density by adaptive quadrature.
pub fn weighted_average_fn<W, F>(f: F, rho: &W, breaks: &[f64], spec: &QuadratureSpec) -> Result<QuadratureResult<f64>>
where
    W: Weight + ?Sized,
    F: Fn(f64) -> f64,
{
    let (lo, hi) = rho.support();
    let mut pts = split_points(rho, lo, hi);
    pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate_with_breaks(|v| f(v) * rho.value(v), &pts, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tight() -> QuadratureSpec {
        QuadratureSpec::default().with_tolerances(1e-13, 1e-300)
    }

    #[test]
    fn rejects_bad_width() {
        assert!(SamplingFunction::lorentzian(0.0).is_err());
        assert!(SamplingFunction::quartic(-1.0).is_err());
    }

    #[test]
    fn normalization() {
        for tau in [0.1, 1.0, 100.0] {
            for rho in [SamplingFunction::lorentzian(tau).unwrap(), SamplingFunction::quartic(tau).unwrap()] {
                let (lo, hi) = rho.support();
                let q = integrate_with_breaks(|v| rho.value(v), &split_points(&rho, lo, hi), &tight()).unwrap();
                assert_relative_eq!(q.value, 1.0, max_relative = 1e-12);
                assert_relative_eq!(rho.mass(lo, hi).unwrap(), 1.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn quartic_norm_from_normalization() {
        // int_0^tau t^2 (t - tau)^2 dt = tau^5 / 30.
        let tau = 1.7;
        let q = integrate_with_breaks(|t: f64| (t * (t - tau)).powi(2), &[0.0, tau], &tight()).unwrap();
        assert_relative_eq!(1.0 / q.value, SamplingFunction::quartic(tau).unwrap().quartic_norm(), max_relative = 1e-13);
    }

    #[test]
    fn quartic_edges() {
        let rho = SamplingFunction::quartic(2.0).unwrap();
        assert_eq!(rho.value(0.0), 0.0);
        assert_eq!(rho.value(2.0), 0.0);
        assert_eq!(rho.derivative(0.0), 0.0);
        assert_eq!(rho.derivative(2.0), 0.0);
    }

    #[test]
    fn quartic_bound_closed_form() {
        for tau in [0.1, 1.0, 10.0] {
            let rho = SamplingFunction::quartic(tau).unwrap();
            let q = xi_min(&rho).unwrap();
            assert!(q.converged);
            assert_relative_eq!(q.value, -5.0 / (3.0 * PI * tau * tau), max_relative = 1e-8);
            assert_relative_eq!(q.value, xi_min_reference(&rho), max_relative = 1e-8);
        }
    }

    #[test]
    fn quartic_fisher_is_polynomial() {
        let rho = SamplingFunction::quartic(1.3).unwrap();
        for t in [0.1, 0.5, 0.9, 1.2] {
            let poly = 4.0 * rho.quartic_norm() * (2.0 * t - 1.3f64).powi(2);
            assert_relative_eq!(fisher_density(&rho, t), poly, max_relative = 1e-12);
        }
    }

    #[test]
    fn lorentzian_bound_by_quadrature() {
        // int rho'^2/rho = 4 tau/pi int v^2/(v^2+tau^2)^3 = 1/(2 tau^2).
        for tau in [0.1, 1.0, 10.0] {
            let rho = SamplingFunction::lorentzian(tau).unwrap();
            let q = xi_min(&rho).unwrap();
            assert!(q.converged);
            assert_relative_eq!(q.value, xi_min_analytic(&rho), max_relative = 1e-9);
            // The commonly quoted -1/(24 pi tau^2) is twice this value.
            assert_relative_eq!(xi_min_reference(&rho) / q.value, 2.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn bound_scales_as_inverse_square() {
        for kind in [SamplingKind::Lorentzian, SamplingKind::QuarticCompact] {
            let unit = xi_min(&SamplingFunction::new(kind, 1.0).unwrap()).unwrap().value;
            for tau in [0.5, 2.0, 10.0] {
                let v = xi_min(&SamplingFunction::new(kind, tau).unwrap()).unwrap().value;
                assert_relative_eq!(v, unit / (tau * tau), max_relative = 1e-9);
            }
        }
    }

    struct Custom<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(F, G, (f64, f64));

    impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> Weight for Custom<F, G> {
        fn value(&self, v: f64) -> f64 {
            (self.0)(v)
        }
        fn derivative(&self, v: f64) -> f64 {
            (self.1)(v)
        }
        fn support(&self) -> (f64, f64) {
            self.2
        }
    }

    #[test]
    fn rejects_negative_weight() {
        let w = Custom(|v: f64| 1.5 * (1.0 - 4.0 * v * v) - 0.5, |v: f64| -12.0 * v, (-0.5, 0.5));
        assert!(matches!(xi_min(&w), Err(Error::Sampling(_))));
    }

    #[test]
    fn rejects_divergent_edge() {
        // rho = 2t on [0, 1]: rho'^2/rho = 2/t diverges at 0.
        let w = Custom(|t: f64| 2.0 * t, |_| 2.0, (0.0, 1.0));
        assert!(matches!(xi_min(&w), Err(Error::Sampling(_))));
    }

    #[test]
    fn custom_weight_plugs_in() {
        // Squared bump (15/16)(1 - v^2)^2 has rho'^2/rho = 15 v^2.
        let w = Custom(
            |v: f64| if v.abs() <= 1.0 { 15.0 / 16.0 * (1.0 - v * v).powi(2) } else { 0.0 },
            |v: f64| if v.abs() <= 1.0 { -15.0 / 4.0 * v * (1.0 - v * v) } else { 0.0 },
            (-1.0, 1.0),
        );
        let q = xi_min(&w).unwrap();
        assert_relative_eq!(q.value, -10.0 / (24.0 * PI), max_relative = 1e-9);
    }

    #[test]
    fn static_profile_lorentzian_average() {
        let (eta, a, tau) = (0.07, 1.0, 3.0);
        let p = PiecewiseProfile::new(vec![-a / 2.0, a / 2.0], vec![0.0, -eta, 0.0]).unwrap();
        let rho = SamplingFunction::lorentzian(tau).unwrap();
        let exact = -(2.0 * eta / PI) * (a / (2.0 * tau)).atan();
        assert_relative_eq!(weighted_average(&p, &rho).unwrap(), exact, max_relative = 1e-14);
        let q = weighted_average_quadrature(&p, &rho, &tight()).unwrap();
        assert_relative_eq!(q.value, exact, max_relative = 1e-12);
    }

    #[test]
    fn zero_profile_average() {
        let rho = SamplingFunction::quartic(1.0).unwrap();
        assert_eq!(weighted_average(&PiecewiseProfile::zero(), &rho).unwrap(), 0.0);
    }

    #[test]
    fn general_density_route() {
        let rho = SamplingFunction::lorentzian(1.0).unwrap();
        // int cos(v) tau/(pi(v^2+tau^2)) dv = e^{-tau}; the mapped tail oscillates.
        let q = weighted_average_fn(f64::cos, &rho, &[], &tight().with_max_subdivisions(20_000)).unwrap();
        assert_relative_eq!(q.value, (-1.0f64).exp(), max_relative = 1e-7);
    }

    proptest! {
        #[test]
        fn closed_masses_match_quadrature(
            tau in 0.1f64..10.0,
            lo in -20.0f64..20.0,
            width in 0.0f64..10.0,
            value in -3.0f64..3.0,
            quartic in any::<bool>(),
        ) {
            let rho = if quartic { SamplingFunction::quartic(tau) } else { SamplingFunction::lorentzian(tau) }.unwrap();
            prop_assume!(width > 1e-9);
            let p = PiecewiseProfile::boxcar(lo, lo + width, value).unwrap();
            let closed = weighted_average(&p, &rho).unwrap();
            let quad = weighted_average_quadrature(&p, &rho, &tight()).unwrap().value;
            prop_assert!((closed - quad).abs() <= 1e-10, "{closed} vs {quad}");
        }
    }
}
