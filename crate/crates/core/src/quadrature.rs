//! Numerical integration engine.
//!
//! Everything in the crate that needs an integral goes through this module:
//!
//! - [`integrate`] and [`integrate_with_breaks`]: globally adaptive 21-point
//!   Gauss-Kronrod quadrature on finite, semi-infinite and infinite intervals.
//!   Infinite tails are mapped with `x = lo + t/(1-t)`; optional endpoint
//!   singularities are softened with the map `x = lo + w(1 - cos(pi u))/2`.
//! - [`integrate_damped_oscillatory`]: integrals over `[0, inf)` that only
//!   converge conditionally. Each is regularized as
//!   `F(eps) = int f(k) exp(-eps k) dk` over a decreasing damping schedule and
//!   extrapolated polynomially to `eps = 0`.
//!
//! Both real and complex integrands are supported through [`QuadValue`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values an integrand may return.
pub trait QuadValue:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Tolerances and schedules for the integrators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bisections allowed beyond the initial partition.
    pub max_subdivisions: usize,
    /// Damping exponents for oscillatory integrals, strictly decreasing.
    pub damping: Vec<f64>,
    /// Polynomial degree of the `eps -> 0` extrapolation; 0 disables it.
    pub extrapolation_order: usize,
    /// Typical oscillation period of a damped integrand. Used as the width of
    /// the initial panels so that no panel starts out under-resolved.
    pub oscillation_period: Option<f64>,
    /// Soften integrable power-law singularities at finite endpoints.
    pub endpoint_singular: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            damping: vec![0.1, 0.05, 0.025, 0.0125, 0.00625],
            extrapolation_order: 4,
            oscillation_period: None,
            endpoint_singular: false,
        }
    }
}

impl QuadratureSpec {
    /// Defaults for damped-oscillatory extrapolations.
    pub fn oscillatory() -> Self {
        Self {
            rel_tol: 1e-4,
            ..Self::default()
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    pub fn with_damping(mut self, schedule: Vec<f64>) -> Self {
        self.damping = schedule;
        self
    }

    pub fn with_extrapolation_order(mut self, order: usize) -> Self {
        self.extrapolation_order = order;
        self
    }

    pub fn with_oscillation_period(mut self, period: f64) -> Self {
        self.oscillation_period = Some(period);
        self
    }

    pub fn with_endpoint_singularities(mut self, on: bool) -> Self {
        self.endpoint_singular = on;
        self
    }

    /// Damping schedule multiplied by `factor`, e.g. to express it in the
    /// natural units of an integrand.
    pub fn scaled_damping(mut self, factor: f64) -> Self {
        for eps in &mut self.damping {
            *eps *= factor;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::InvalidSpec(format!(
                "tolerances must be positive, got rel {} abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.damping.iter().any(|&e| !positive(e)) {
            return Err(Error::InvalidSpec("damping values must be positive".into()));
        }
        if self.damping.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidSpec(
                "damping schedule must be strictly decreasing".into(),
            ));
        }
        if self.extrapolation_order > 0 && self.damping.len() < 3.max(self.extrapolation_order + 1)
        {
            return Err(Error::InvalidSpec(format!(
                "extrapolation of order {} needs at least {} damping points, got {}",
                self.extrapolation_order,
                3.max(self.extrapolation_order + 1),
                self.damping.len()
            )));
        }
        if let Some(p) = self.oscillation_period {
            if !positive(p) {
                return Err(Error::InvalidSpec("oscillation period must be positive".into()));
            }
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl<T: QuadValue> QuadratureResult<T> {
    /// Turn a non-converged result into an error.
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                value: self.value.modulus(),
                error: self.error,
                evaluations: self.evaluations,
            })
        }
    }

    pub fn map<U, F: FnOnce(T) -> U>(self, f: F) -> QuadratureResult<U> {
        QuadratureResult {
            value: f(self.value),
            error: self.error,
            converged: self.converged,
            evaluations: self.evaluations,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        QuadratureResult {
            value: self.value * factor,
            error: self.error * factor.abs(),
            ..self
        }
    }
}

// Gauss-Kronrod 10/21 abscissae and weights (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Change of variables applied to one initial piece.
#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `[lo, inf)` from `t in [0, 1)`.
    UpperTail { lo: f64 },
    /// `(-inf, hi]` from `t in [0, 1)`.
    LowerTail { hi: f64 },
    /// `[lo, lo + width]` from `u in [0, 1]`, flat at both ends.
    Cosine { lo: f64, width: f64 },
}

impl Map {
    #[inline]
    fn eval<T: QuadValue, F: Fn(f64) -> T>(&self, f: &F, t: f64) -> T {
        match *self {
            Map::Identity => f(t),
            Map::UpperTail { lo } => {
                let s = 1.0 - t;
                let x = lo + t / s;
                if !x.is_finite() {
                    return T::zero();
                }
                f(x) * (1.0 / (s * s))
            }
            Map::LowerTail { hi } => {
                let s = 1.0 - t;
                let x = hi - t / s;
                if !x.is_finite() {
                    return T::zero();
                }
                f(x) * (1.0 / (s * s))
            }
            Map::Cosine { lo, width } => {
                let x = lo + 0.5 * width * (1.0 - (PI * t).cos());
                f(x) * (0.5 * PI * width * (PI * t).sin())
            }
        }
    }
}

struct Segment<T> {
    map: Map,
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, map: Map, a: f64, b: f64) -> Segment<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = map.eval(f, center);

    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut res_abs = WGK[10] * fc.modulus();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = map.eval(f, center - dx);
        let f2 = map.eval(f, center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[j];
        res_abs += WGK[j] * (f1.modulus() + f2.modulus());
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).modulus();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).modulus() + (fv2[j] - mean).modulus());
    }

    let scale = half.abs();
    let value = kronrod * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((kronrod - gauss) * half).modulus();

    // QUADPACK error rescaling.
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.modulus().is_finite() {
        err = f64::INFINITY;
    }

    Segment {
        map,
        a,
        b,
        value,
        error: err,
    }
}

fn sum_heap<T: QuadValue>(heap: &BinaryHeap<Segment<T>>) -> (T, f64) {
    heap.iter()
        .fold((T::zero(), 0.0), |(v, e), s| (v + s.value, e + s.error))
}

/// Globally adaptive driver over a set of pre-mapped pieces.
fn adaptive<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    pieces: &[(Map, f64, f64)],
    spec: &QuadratureSpec,
) -> QuadratureResult<T> {
    let mut heap = BinaryHeap::with_capacity(pieces.len() + spec.max_subdivisions + 1);
    let mut evaluations = 0;
    for &(map, a, b) in pieces {
        heap.push(gk21(f, map, a, b));
        evaluations += 21;
    }
    let (mut total, mut total_err) = sum_heap(&heap);
    let mut subdivisions = 0;

    while total_err > spec.tolerance(total.modulus()) && subdivisions < spec.max_subdivisions {
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        if !worst.error.is_finite() && !worst.value.modulus().is_finite() {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution.
            heap.push(worst);
            break;
        }
        let left = gk21(f, worst.map, worst.a, mid);
        let right = gk21(f, worst.map, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;

        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        // Periodic resummation keeps drift from the running update in check.
        if subdivisions % 64 == 0 {
            (total, total_err) = sum_heap(&heap);
        }
    }

    let (value, error) = sum_heap(&heap);
    let converged = value.modulus().is_finite() && error <= spec.tolerance(value.modulus());
    QuadratureResult {
        value,
        error,
        converged,
        evaluations,
    }
}

fn finite_pieces(lo: f64, hi: f64, spec: &QuadratureSpec, out: &mut Vec<(Map, f64, f64)>) {
    if spec.endpoint_singular {
        out.push((Map::Cosine { lo, width: hi - lo }, 0.0, 1.0));
    } else {
        out.push((Map::Identity, lo, hi));
    }
}

fn pieces_for(lo: f64, hi: f64, spec: &QuadratureSpec, out: &mut Vec<(Map, f64, f64)>) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => finite_pieces(lo, hi, spec, out),
        (true, false) => {
            if spec.endpoint_singular {
                finite_pieces(lo, lo + 1.0, spec, out);
                out.push((Map::UpperTail { lo: lo + 1.0 }, 0.0, 1.0));
            } else {
                out.push((Map::UpperTail { lo }, 0.0, 1.0));
            }
        }
        (false, true) => {
            if spec.endpoint_singular {
                finite_pieces(hi - 1.0, hi, spec, out);
                out.push((Map::LowerTail { hi: hi - 1.0 }, 0.0, 1.0));
            } else {
                out.push((Map::LowerTail { hi }, 0.0, 1.0));
            }
        }
        (false, false) => {
            out.push((Map::LowerTail { hi: 0.0 }, 0.0, 1.0));
            out.push((Map::UpperTail { lo: 0.0 }, 0.0, 1.0));
        }
    }
}

/// Integrate `f` over `[lo, hi]`; either end may be infinite.
///
/// Non-convergence within `spec.max_subdivisions` is reported through
/// `converged == false`, never hidden. Reversed bounds flip the sign.
pub fn integrate<T, F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_with_breaks(f, &[lo, hi], spec)
}

/// Integrate over consecutive intervals `points[0]..points[1]..points[n]`.
///
/// Interior points are places where `f` has kinks or jumps; only the first and
/// last point may be infinite. All pieces share one global error budget.
pub fn integrate_with_breaks<T, F>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if points.len() < 2 {
        return Err(Error::param("points", "need at least two points"));
    }
    if points.iter().any(|p| p.is_nan()) {
        return Err(Error::param("points", "NaN bound"));
    }
    let n = points.len();
    if points[1..n - 1].iter().any(|p| !p.is_finite()) {
        return Err(Error::param("points", "interior points must be finite"));
    }
    if n == 2 && points[0] > points[1] {
        return Ok(integrate_with_breaks(f, &[points[1], points[0]], spec)?.scale(-1.0));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("points", "must be non-decreasing"));
    }

    let mut pieces = Vec::with_capacity(n);
    for w in points.windows(2) {
        if w[0] < w[1] {
            pieces_for(w[0], w[1], spec, &mut pieces);
        }
    }
    if pieces.is_empty() {
        return Ok(QuadratureResult {
            value: T::zero(),
            error: 0.0,
            converged: true,
            evaluations: 0,
        });
    }
    Ok(adaptive(&f, &pieces, spec))
}

/// `int_0^inf f(k) exp(-eps k) dk` for a single damping value.
///
/// The range is cut where `exp(-eps K) / eps` drops below `1e-17`; the
/// neglected tail of a bounded integrand is smaller than that times `sup |f|`.
pub fn damped_integral<T, F>(f: &F, eps: f64, spec: &QuadratureSpec) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    let cutoff = (39.0 + (1.0 / eps).ln().max(0.0)) / eps;
    let width = spec
        .oscillation_period
        .unwrap_or(cutoff / 256.0)
        .min(cutoff);
    let panels = ((cutoff / width).ceil() as usize).clamp(1, 200_000);
    let step = cutoff / panels as f64;
    let pieces: Vec<_> = (0..panels)
        .map(|i| {
            let a = i as f64 * step;
            let b = if i + 1 == panels { cutoff } else { a + step };
            (Map::Identity, a, b)
        })
        .collect();

    let inner = QuadratureSpec {
        rel_tol: (spec.rel_tol * 1e-3).max(1e-13),
        max_subdivisions: spec.max_subdivisions + 4 * panels,
        ..spec.clone()
    };
    let g = |k: f64| f(k) * (-eps * k).exp();
    Ok(adaptive(&g, &pieces, &inner))
}

/// Lagrange weights for evaluating the interpolant through `xs` at zero.
fn weights_at_zero(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            xs.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| xj / (xj - xs[i]))
                .product()
        })
        .collect()
}

/// Extrapolate samples `(x_i, y_i)` to `x = 0` with the interpolating
/// polynomial through all points. Returns the value and the spread against
/// the interpolant that drops the point farthest from zero.
pub fn extrapolate_to_zero<T: QuadValue>(xs: &[f64], ys: &[T]) -> (T, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let combine = |xs: &[f64], ys: &[T]| {
        weights_at_zero(xs)
            .iter()
            .zip(ys)
            .fold(T::zero(), |acc, (&w, &y)| acc + y * w)
    };
    let full = combine(xs, ys);
    if xs.len() == 1 {
        return (full, f64::INFINITY);
    }
    let far = (0..xs.len())
        .max_by(|&i, &j| xs[i].abs().total_cmp(&xs[j].abs()))
        .unwrap_or(0);
    let (rx, ry): (Vec<f64>, Vec<T>) = xs
        .iter()
        .zip(ys)
        .enumerate()
        .filter(|&(i, _)| i != far)
        .map(|(_, (&x, &y))| (x, y))
        .unzip();
    let reduced = combine(&rx, &ry);
    (full, (full - reduced).modulus())
}

/// Limit `eps -> 0` of `int_0^inf f(k) exp(-eps k) dk`.
///
/// The reported error is the extrapolation spread plus the propagated
/// quadrature error of the damped samples. The result is marked
/// non-converged if that exceeds the spec tolerance.
pub fn integrate_damped_oscillatory<T, F>(f: F, spec: &QuadratureSpec) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if spec.damping.is_empty() {
        return Err(Error::InvalidSpec("empty damping schedule".into()));
    }
    let used = if spec.extrapolation_order == 0 {
        1
    } else {
        spec.extrapolation_order + 1
    };
    let schedule = &spec.damping[spec.damping.len() - used..];

    let mut values = Vec::with_capacity(used);
    let mut evaluations = 0;
    let mut all_converged = true;
    let mut quad_err: f64 = 0.0;
    for &eps in schedule {
        let r = damped_integral(&f, eps, spec)?;
        evaluations += r.evaluations;
        all_converged &= r.converged;
        quad_err = quad_err.max(r.error);
        values.push(r.value);
    }

    if used == 1 {
        return Ok(QuadratureResult {
            value: values[0],
            error: quad_err,
            converged: false,
            evaluations,
        });
    }

    let (value, spread) = extrapolate_to_zero(schedule, &values);
    let lebesgue: f64 = weights_at_zero(schedule).iter().map(|w| w.abs()).sum();
    let error = spread + lebesgue * quad_err;
    let converged = all_converged && value.modulus().is_finite() && error <= spec.tolerance(value.modulus());
    Ok(QuadratureResult {
        value,
        error,
        converged,
        evaluations,
    })
}
