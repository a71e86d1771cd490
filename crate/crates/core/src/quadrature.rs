//! Adaptive Gauss–Kronrod integration.
//!
//! The engine is a globally adaptive bisection scheme built on the 21-point
//! Kronrod extension of the 10-point Gauss rule (QUADPACK `qk21`). Neither
//! rule samples the interval endpoints, so integrable endpoint singularities
//! are tolerated. The core routine is vector valued: several integrals that
//! share one integrand evaluation are refined together, each component with
//! its own tolerance.

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1], descending; the last entry is the centre.
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

/// Weights of the 10-point Gauss rule (abscissae `XGK[1]`, `XGK[3]`, ...).
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
    0.123_491_976_262_065_851_077_715_901_107_568,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Number of integrand evaluations per Gauss–Kronrod panel.
pub const NODES_PER_PANEL: usize = 21;

/// Tolerances and limits for one-dimensional integrals.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Evanescent integrals stop at k_perp · d = `evanescent_cutoff`.
    pub evanescent_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 0.0,
            max_subdivisions: 2000,
            evanescent_cutoff: 35.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be non-negative, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter("max_subdivisions must be at least 1".into()));
        }
        if !(self.evanescent_cutoff > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "evanescent cutoff must be positive, got {}",
                self.evanescent_cutoff
            )));
        }
        Ok(())
    }

    /// Allowed absolute error for an integral whose current estimate is `value`.
    pub fn allowed_error(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Bound on the discarded tail for truncated semi-infinite integrals.
    pub tail_bound: Option<f64>,
}

/// Result of a vector-valued integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorIntegral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

impl<const N: usize> Panel<N> {
    fn splittable(&self) -> bool {
        let mid = 0.5 * (self.a + self.b);
        let scale = self.a.abs().max(self.b.abs()).max(f64::MIN_POSITIVE);
        self.a < mid && mid < self.b && (self.b - self.a) > 1e3 * f64::EPSILON * scale
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

fn checked<const N: usize, F>(f: &mut F, x: f64) -> Result<[f64; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let v = f(x)?;
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteIntegrand { abscissa: x });
    }
    Ok(v)
}

fn gk21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Panel<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = checked(f, center)?;

    let mut resk = [0.0; N];
    let mut resg = [0.0; N];
    let mut resabs = [0.0; N];
    for i in 0..N {
        resk[i] = WGK[10] * fc[i];
        resabs[i] = (WGK[10] * fc[i]).abs();
    }

    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        for i in 0..N {
            let sum = f1[i] + f2[i];
            resk[i] += WGK[j] * sum;
            resabs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                resg[i] += WG[j / 2] * sum;
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * resk[i];
        let mut resasc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        value[i] = resk[i] * half;
        let err = (resk[i] - resg[i]) * half;
        error[i] = rescale_error(err, resabs[i] * half.abs(), resasc * half.abs());
    }
    Ok(Panel { a, b, value, error })
}

/// Adaptive integration of a vector-valued integrand over the union of the
/// intervals delimited by `points` (sorted, at least two entries).
///
/// `tolerance` maps the current value estimates to the allowed absolute
/// error of every component; refinement stops once every component meets
/// its tolerance or `max_panels` panels are in use.
pub fn integrate_vector<const N: usize, F, T>(
    mut f: F,
    points: &[f64],
    tolerance: T,
    max_panels: usize,
) -> Result<VectorIntegral<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
    T: Fn(&[f64; N]) -> [f64; N],
{
    if points.len() < 2 {
        return Err(Error::InvalidParameter("need at least two integration points".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter("integration limits must be finite".into()));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "integration points must be non-decreasing".into(),
        ));
    }

    let mut panels: Vec<Panel<N>> = Vec::with_capacity(points.len() + 16);
    for w in points.windows(2) {
        if w[1] > w[0] {
            panels.push(gk21(&mut f, w[0], w[1])?);
        }
    }
    let mut evaluations = panels.len() * NODES_PER_PANEL;
    if panels.is_empty() {
        return Ok(VectorIntegral {
            value: [0.0; N],
            error: [0.0; N],
            evaluations: 0,
            converged: true,
        });
    }

    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for p in &panels {
            for i in 0..N {
                value[i] += p.value[i];
                error[i] += p.error[i];
            }
        }
        let tol = tolerance(&value);
        if (0..N).all(|i| error[i] <= tol[i]) {
            return Ok(VectorIntegral {
                value,
                error,
                evaluations,
                converged: true,
            });
        }
        if panels.len() >= max_panels {
            return Ok(VectorIntegral {
                value,
                error,
                evaluations,
                converged: false,
            });
        }

        // Bisect the splittable panel with the largest error relative to
        // the tolerance of any component that is still failing.
        let mut worst: Option<(usize, f64)> = None;
        for (idx, p) in panels.iter().enumerate() {
            if !p.splittable() {
                continue;
            }
            let mut score = 0.0_f64;
            for i in 0..N {
                if error[i] > tol[i] {
                    score = score.max(p.error[i] / tol[i].max(f64::MIN_POSITIVE));
                }
            }
            if worst.map_or(true, |(_, s)| score > s) {
                worst = Some((idx, score));
            }
        }
        let Some((idx, _)) = worst else {
            return Ok(VectorIntegral {
                value,
                error,
                evaluations,
                converged: false,
            });
        };
        let p = panels[idx];
        let mid = 0.5 * (p.a + p.b);
        let left = gk21(&mut f, p.a, mid)?;
        let right = gk21(&mut f, mid, p.b)?;
        evaluations += 2 * NODES_PER_PANEL;
        panels[idx] = left;
        panels.insert(idx + 1, right);
    }
}

/// Scalar integral over the breakpoint partition `points`.
pub fn integrate_with_breakpoints<F>(
    mut f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    let r = integrate_vector::<1, _, _>(
        |x| Ok([f(x)]),
        points,
        |v| [spec.allowed_error(v[0])],
        spec.max_subdivisions,
    )?;
    Ok(IntegralResult {
        value: r.value[0],
        error_estimate: r.error[0],
        evaluations: r.evaluations,
        converged: r.converged,
        tail_bound: None,
    })
}

/// ∫_a^b f(x) dx.
pub fn integrate_finite<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    if !(a <= b) {
        return Err(Error::InvalidParameter(format!(
            "integration limits must satisfy a <= b, got [{a}, {b}]"
        )));
    }
    integrate_with_breakpoints(f, &[a, b], spec)
}

/// ∫_a^∞ f(x) dx for an integrand decaying at least like exp(−x/decay_scale).
///
/// The domain is truncated at a + N·decay_scale, starting from N = 40 and
/// growing until the tail estimate |f(b)|·λ (λ the measured local decay
/// length, at least `decay_scale`) is below a tenth of the allowed error.
/// The tail estimate is reported in [`IntegralResult::tail_bound`] and
/// included in the error estimate.
pub fn integrate_semiinfinite<F>(
    mut f: F,
    a: f64,
    decay_scale: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    if !(decay_scale > 0.0) || !decay_scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "decay scale must be positive, got {decay_scale}"
        )));
    }
    let inner = QuadratureSpec {
        rel_tol: 0.5 * spec.rel_tol,
        abs_tol: 0.5 * spec.abs_tol,
        ..*spec
    };
    let mut n = 40.0;
    loop {
        let b = a + n * decay_scale;
        let res = integrate_finite(&mut f, a, b, &inner)?;
        let fb = f(b);
        let fb2 = f(b + decay_scale);
        if !fb.is_finite() || !fb2.is_finite() {
            return Err(Error::NonFiniteIntegrand { abscissa: b });
        }
        let ratio = if fb != 0.0 { (fb2 / fb).abs() } else { 0.0 };
        let length = if ratio > 0.0 && ratio < 1.0 {
            (decay_scale / -ratio.ln()).max(decay_scale)
        } else {
            decay_scale
        };
        let tail = 2.0 * fb.abs() * length;
        let allowed = spec.allowed_error(res.value);
        if tail <= 0.1 * allowed || n > 2000.0 || ratio >= 1.0 && fb == 0.0 {
            let error_estimate = res.error_estimate + tail;
            return Ok(IntegralResult {
                value: res.value,
                error_estimate,
                evaluations: res.evaluations + 2,
                converged: res.converged && error_estimate <= allowed && tail <= 0.1 * allowed,
                tail_bound: Some(tail),
            });
        }
        n *= 1.5;
    }
}
