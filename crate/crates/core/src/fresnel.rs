//! Reflection of plane waves at a vacuum/half-space interface.
//!
//! # Conventions
//!
//! * Time dependence e^{−iωt}; fields e^{i(k_x x + k_y y + k_z z)}.
//! * The reflecting medium fills z > 0 and the incident wave travels
//!   upward from the vacuum side z < 0. Transmitted waves satisfy
//!   Im k_z ≥ 0 (ties broken by Re k_z ≥ 0) so they decay or radiate away
//!   from the interface. Vacuum k_z uses the same branch.
//! * s = ẑ × k̂_⊥ (taken as ŷ when k_⊥ = 0, the limit along k_x), and
//!   p = (k × s)/k_0 for both the incident and the reflected wave. With
//!   this choice an isotropic medium gives
//!   r_pp = (ε k_z − k_zm)/(ε k_z + k_zm).
//! * The reduced magnetic field h = Z_0 H = (k × E)/k_0, so h(s) = p and
//!   h(p) = −s.
//! * [`ReflectionMatrix`] maps incident amplitudes (a_s, a_p) to reflected
//!   amplitudes b = R a, with R = [[r_ss, r_sp], [r_ps, r_pp]].
//!
//! The general solver finds both transmitted modes from the quartic
//! dispersion relation, then matches tangential E and h.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::materials::DielectricTensor;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Roots closer than this (relative) are treated as one degenerate pair.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Boundary systems with a larger 1-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e14;

/// Square root on the branch Im ≥ 0, with Re ≥ 0 on the real axis.
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

/// One in-plane wavevector at a fixed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarMode {
    /// Angular frequency in rad/s.
    pub omega: f64,
    /// Vacuum wavenumber ω/c in 1/m.
    pub k0: f64,
    pub kx: f64,
    pub ky: f64,
}

impl PlanarMode {
    pub fn new(omega: f64, kx: f64, ky: f64, consts: &Constants) -> Self {
        Self {
            omega,
            k0: omega / consts.c_m_s,
            kx,
            ky,
        }
    }

    pub fn from_ev(omega_ev: f64, kx: f64, ky: f64, consts: &Constants) -> Self {
        Self::new(consts.ev_to_rad_s(omega_ev), kx, ky, consts)
    }

    pub fn k_perp(&self) -> f64 {
        self.kx.hypot(self.ky)
    }

    /// In-plane angle θ with k_y = k_⊥ sin θ.
    pub fn theta(&self) -> f64 {
        self.ky.atan2(self.kx)
    }

    pub fn is_propagating(&self) -> bool {
        self.k_perp() < self.k0
    }

    /// Vacuum k_z = √(k_0² − k_⊥²), real for propagating modes and i|k_z|
    /// otherwise.
    pub fn kz(&self) -> Complex64 {
        let kp = self.k_perp();
        if kp < self.k0 {
            Complex64::new(((self.k0 - kp) * (self.k0 + kp)).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, ((kp - self.k0) * (kp + self.k0)).sqrt())
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.k0 > 0.0 && self.k0.is_finite() && self.kx.is_finite() && self.ky.is_finite())
        {
            return Err(Error::InvalidParameter(format!("invalid planar mode {self:?}")));
        }
        Ok(())
    }

    /// Coordinates in the frame rotated about z so that k_⊥ lies along +x,
    /// in units of L = max(k_0, k_⊥).
    fn frame(&self) -> Frame {
        let kp = self.k_perp();
        let l = self.k0.max(kp);
        let (cos, sin) = if kp > 0.0 {
            (self.kx / kp, self.ky / kp)
        } else {
            (1.0, 0.0)
        };
        Frame {
            l,
            a: kp / l,
            w: self.k0 / l,
            kz: self.kz() / l,
            cos,
            sin,
        }
    }
}

#[inline]
fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Rotated, rescaled mode coordinates: k = L·(a, 0, q), k_0 = L·w.
#[derive(Debug, Clone, Copy)]
struct Frame {
    l: f64,
    a: f64,
    w: f64,
    kz: Complex64,
    cos: f64,
    sin: f64,
}

impl Frame {
    fn rotation(&self) -> Matrix3<Complex64> {
        Matrix3::new(
            c(self.cos),
            c(self.sin),
            ZERO,
            c(-self.sin),
            c(self.cos),
            ZERO,
            ZERO,
            ZERO,
            ONE,
        )
    }

    /// Permittivity expressed in the rotated frame.
    fn rotate(&self, eps: &Matrix3<Complex64>) -> Matrix3<Complex64> {
        let r = self.rotation();
        r * eps * r.transpose()
    }

    fn to_lab(&self, v: &Vector3<Complex64>) -> Vector3<Complex64> {
        self.rotation().transpose() * v
    }
}

/// 2×2 reflection matrix in the (s, p) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionMatrix(pub Matrix2<Complex64>);

impl ReflectionMatrix {
    pub fn zero() -> Self {
        Self(Matrix2::zeros())
    }

    pub fn diagonal(rs: Complex64, rp: Complex64) -> Self {
        Self(Matrix2::new(rs, ZERO, ZERO, rp))
    }

    pub fn ss(&self) -> Complex64 {
        self.0[(0, 0)]
    }
    pub fn sp(&self) -> Complex64 {
        self.0[(0, 1)]
    }
    pub fn ps(&self) -> Complex64 {
        self.0[(1, 0)]
    }
    pub fn pp(&self) -> Complex64 {
        self.0[(1, 1)]
    }

    /// S R S with S = diag(1, −1): the same reflection expressed with the
    /// p-vector sign flipped, as seen from the mirrored side.
    pub fn p_flipped(&self) -> Self {
        let mut m = self.0;
        m[(0, 1)] = -m[(0, 1)];
        m[(1, 0)] = -m[(1, 0)];
        Self(m)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Serializable description of the conventions above, for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionRecord {
    pub time_dependence: String,
    pub medium_side: String,
    pub kz_branch: String,
    pub s_vector: String,
    pub p_vector: String,
    pub matrix_layout: String,
    pub lower_plate: String,
}

impl Default for ConventionRecord {
    fn default() -> Self {
        Self {
            time_dependence: "exp(-i omega t)".into(),
            medium_side: "medium fills z > 0, incidence from vacuum travelling +z".into(),
            kz_branch: "Im kz >= 0, Re kz >= 0 on ties".into(),
            s_vector: "z x k_perp / |k_perp|, y-hat at k_perp = 0".into(),
            p_vector: "(k x s) / k0 for incident and reflected waves".into(),
            matrix_layout: "b = R a, R = [[r_ss, r_sp], [r_ps, r_pp]]".into(),
            lower_plate: "mirror z -> -z, R1 = S R(M eps M) S, S = diag(1, -1)".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstrateMode {
    /// Normal wavenumber in 1/m.
    pub kz: Complex64,
    /// Unit electric polarization.
    pub e: Vector3<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstrateModes {
    pub modes: [SubstrateMode; 2],
    /// True when the two roots coincided and the polarizations span the
    /// two-dimensional null space at the common root.
    pub degenerate: bool,
}

fn adjugate(m: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
    };
    // adj[i][j] = cofactor[j][i]
    Matrix3::new(
        cof(1, 2, 1, 2),
        -cof(0, 2, 1, 2),
        cof(0, 1, 1, 2),
        -cof(1, 2, 0, 2),
        cof(0, 2, 0, 2),
        -cof(0, 1, 0, 2),
        cof(1, 2, 0, 1),
        -cof(0, 2, 0, 1),
        cof(0, 1, 0, 1),
    )
}

/// Coefficients (constant, q, q²) of kᵀ m k with k = (a, b, q).
fn quadratic_form(m: &Matrix3<Complex64>, a: f64, b: f64) -> [Complex64; 3] {
    [
        m[(0, 0)] * a * a + (m[(0, 1)] + m[(1, 0)]) * a * b + m[(1, 1)] * b * b,
        (m[(0, 2)] + m[(2, 0)]) * a + (m[(1, 2)] + m[(2, 1)]) * b,
        m[(2, 2)],
    ]
}

/// Coefficients c0..c4 of the dispersion quartic det(k kᵀ − k² + w² ε)/w².
fn dispersion_quartic(eps: &Matrix3<Complex64>, a: f64, b: f64, w: f64) -> [Complex64; 5] {
    let rho = a * a + b * b;
    let w2 = w * w;
    let [a0, a1, a2] = quadratic_form(eps, a, b);
    let [b0, b1, b2] = quadratic_form(&adjugate(eps), a, b);
    let e2 = eps[(0, 0)] * eps[(1, 1)] - eps[(0, 1)] * eps[(1, 0)]
        + eps[(0, 0)] * eps[(2, 2)]
        - eps[(0, 2)] * eps[(2, 0)]
        + eps[(1, 1)] * eps[(2, 2)]
        - eps[(1, 2)] * eps[(2, 1)];
    let det = eps.determinant();
    [
        a0 * rho + (b0 - e2 * rho) * w2 + det * w2 * w2,
        a1 * rho + b1 * w2,
        a0 + a2 * rho + (b2 - e2) * w2,
        a1,
        a2,
    ]
}

fn horner(c: &[Complex64; 5], q: Complex64) -> (Complex64, Complex64) {
    let mut p = c[4];
    let mut dp = ZERO;
    for k in (0..4).rev() {
        dp = dp * q + p;
        p = p * q + c[k];
    }
    (p, dp)
}

fn cbrt_c(z: Complex64) -> Complex64 {
    if z.norm_sqr() == 0.0 {
        ZERO
    } else {
        z.powf(1.0 / 3.0)
    }
}

/// Closed-form roots of the quartic (Ferrari). Accurate to a few ulps of
/// the coefficient scale; callers polish.
fn ferrari_roots(coef: &[Complex64; 5]) -> Option<[Complex64; 4]> {
    let lead = coef[4];
    let b = coef[3] / lead;
    let cc = coef[2] / lead;
    let d = coef[1] / lead;
    let e = coef[0] / lead;
    // q = y − b/4 gives y⁴ + p y² + r y + s.
    let b2 = b * b;
    let p = cc - b2 * 0.375;
    let r = d - b * cc * 0.5 + b2 * b * 0.125;
    let s = e - b * d * 0.25 + b2 * cc / 16.0 - b2 * b2 * 3.0 / 256.0;
    let shift = -b * 0.25;
    let scale = p.norm().max(s.norm().sqrt()).max(r.norm().powf(2.0 / 3.0));
    let ys: [Complex64; 4] = if r.norm() <= 1e-14 * scale.powf(1.5) {
        let disc = (p * p - s * 4.0).sqrt();
        let z1 = (-p + disc) * 0.5;
        let z2 = (-p - disc) * 0.5;
        let (s1, s2) = (z1.sqrt(), z2.sqrt());
        [s1, -s1, s2, -s2]
    } else {
        // Resolvent cubic m³ + p m² + (p²/4 − s) m − r²/8 = 0, through
        // its depressed form m = t − p/3.
        let a2 = p;
        let a1 = p * p * 0.25 - s;
        let a0 = -(r * r) * 0.125;
        let pp = a1 - a2 * a2 / 3.0;
        let qq = a2 * a2 * a2 * (2.0 / 27.0) - a2 * a1 / 3.0 + a0;
        let disc = (qq * qq * 0.25 + pp * pp * pp / 27.0).sqrt();
        let u1 = -qq * 0.5 + disc;
        let u2 = -qq * 0.5 - disc;
        let u = cbrt_c(if u1.norm_sqr() >= u2.norm_sqr() { u1 } else { u2 });
        let omega = Complex64::new(-0.5, 3f64.sqrt() * 0.5);
        let mut best = ZERO;
        let mut rot = ONE;
        for _ in 0..3 {
            let uk = u * rot;
            let t = if uk.norm_sqr() == 0.0 { ZERO } else { uk - pp / (uk * 3.0) };
            let m = t - a2 / 3.0;
            if m.norm_sqr() > best.norm_sqr() {
                best = m;
            }
            rot *= omega;
        }
        let m = best;
        if m.norm_sqr() == 0.0 {
            return None;
        }
        let sq = (m * 2.0).sqrt();
        let half = p * 0.5 + m;
        let corr = r / (sq * 2.0);
        let quad = |lin: Complex64, con: Complex64| {
            let disc = (lin * lin - con * 4.0).sqrt();
            [(-lin + disc) * 0.5, (-lin - disc) * 0.5]
        };
        let [y1, y2] = quad(sq, half - corr);
        let [y3, y4] = quad(-sq, half + corr);
        [y1, y2, y3, y4]
    };
    let roots = ys.map(|y| y + shift);
    roots
        .iter()
        .all(|q| q.re.is_finite() && q.im.is_finite())
        .then_some(roots)
}

/// Residual of p at q relative to the size of its terms.
fn relative_residual(coef: &[Complex64; 5], q: Complex64) -> f64 {
    let (p, _) = horner(coef, q);
    let qn = q.norm_sqr().sqrt();
    let mut scale = 0.0;
    let mut pow = 1.0;
    for ck in coef {
        scale += ck.norm_sqr().sqrt() * pow;
        pow *= qn;
    }
    p.norm_sqr().sqrt() / scale.max(f64::MIN_POSITIVE)
}

/// Simultaneous Aberth iteration on the monic quartic. None if it stalls.
fn aberth_roots(coef: &[Complex64; 5]) -> Option<[Complex64; 4]> {
    let lead = coef[4];
    let m: [Complex64; 5] = std::array::from_fn(|k| coef[k] / lead);
    let radius = 2.0
        * (0..4)
            .map(|k| {
                let v = if k == 0 { m[0].norm() / 2.0 } else { m[k].norm() };
                v.powf(1.0 / (4 - k) as f64)
            })
            .fold(0.0, f64::max);
    if !(radius > 0.0 && radius.is_finite()) {
        return None;
    }
    let mut z: [Complex64; 4] =
        std::array::from_fn(|k| Complex64::from_polar(radius, 0.4 + k as f64 * std::f64::consts::FRAC_PI_2));
    let mut done = [false; 4];
    for _ in 0..100 {
        for i in 0..4 {
            if done[i] {
                continue;
            }
            let (p, dp) = horner(&m, z[i]);
            if p.norm_sqr() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut sum = ZERO;
            for j in 0..4 {
                if j != i {
                    sum += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (ONE - ratio * sum);
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            z[i] -= step;
            done[i] = step.norm_sqr() < 1e-26 * radius * radius;
        }
        if done.iter().all(|&d| d) {
            return Some(z);
        }
    }
    None
}

fn companion_roots(coef: &[Complex64; 5]) -> Option<[Complex64; 4]> {
    let lead = coef[4];
    let mut comp = Matrix4::<Complex64>::zeros();
    for j in 0..4 {
        comp[(0, j)] = -coef[3 - j] / lead;
    }
    for i in 1..4 {
        comp[(i, i - 1)] = ONE;
    }
    let ev = comp.eigenvalues()?;
    Some(std::array::from_fn(|i| ev[i]))
}

fn quartic_roots(coef: &[Complex64; 5]) -> Option<[Complex64; 4]> {
    let lead = coef[4];
    if lead.norm() == 0.0 || !lead.re.is_finite() || !lead.im.is_finite() {
        return None;
    }
    if let Some(r) = ferrari_roots(coef).and_then(|s| polish(coef, &s)) {
        if r.iter().all(|&q| relative_residual(coef, q) < 1e-12) {
            return Some(r);
        }
    }
    let start = aberth_roots(coef).or_else(|| companion_roots(coef))?;
    polish(coef, &start)
}

/// A few damped Newton steps on each root.
fn polish(coef: &[Complex64; 5], start: &[Complex64; 4]) -> Option<[Complex64; 4]> {
    let mut roots = [ZERO; 4];
    for (r, e) in roots.iter_mut().zip(start.iter()) {
        let mut q = *e;
        let (mut p, _) = horner(coef, q);
        for _ in 0..4 {
            let (_, dp) = horner(coef, q);
            if dp.norm_sqr() == 0.0 {
                break;
            }
            let next = q - p / dp;
            let (pn, _) = horner(coef, next);
            if pn.norm_sqr() < p.norm_sqr() {
                q = next;
                p = pn;
            } else {
                break;
            }
        }
        if !q.re.is_finite() || !q.im.is_finite() {
            return None;
        }
        *r = q;
    }
    Some(roots)
}

fn is_upward(q: Complex64) -> bool {
    let tol = 1e-12 * q.norm_sqr().sqrt();
    q.im > tol || (q.im.abs() <= tol && q.re >= 0.0)
}

/// The two transmitted roots (scaled units), ordered deterministically,
/// followed by the two remaining roots.
fn transmitted_roots(roots: &[Complex64; 4]) -> ([Complex64; 2], [Complex64; 2]) {
    // A double root comes back split by about √ε along an arbitrary
    // direction; replace such pairs by their mean before classifying.
    let mut sorted = *roots;
    let big = roots.iter().map(|q| q.norm_sqr().sqrt()).fold(0.0, f64::max);
    for i in 0..4 {
        for j in i + 1..4 {
            if (sorted[i] - sorted[j]).norm_sqr().sqrt() < 1e-6 * big {
                let mean = (sorted[i] + sorted[j]) * 0.5;
                sorted[i] = mean;
                sorted[j] = mean;
            }
        }
    }
    sorted.sort_by(|x, y| {
        (is_upward(*y), y.im, y.re)
            .partial_cmp(&(is_upward(*x), x.im, x.re))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut pair = [sorted[0], sorted[1]];
    pair.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap_or(std::cmp::Ordering::Equal));
    (pair, [sorted[2], sorted[3]])
}

fn dispersion_matrix(k: &Vector3<Complex64>, w: f64, eps: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    let k2 = k.dot(k);
    k * k.transpose() - Matrix3::from_diagonal_element(k2) + eps * c(w * w)
}

/// Reduced tangential field ψ = (E_x, E_y, w h_x, h_y / w) in the rotated
/// frame obeys q ψ = Δ ψ. With this scaling every entry of Δ stays O(1)
/// even when k_⊥ ≫ k_0.
struct Berreman {
    delta: Matrix4<Complex64>,
    /// E_z = ez · ψ.
    ez: [Complex64; 4],
}

fn berreman(e: &Matrix3<Complex64>, a: f64, w: f64) -> Option<Berreman> {
    let e22 = e[(2, 2)];
    if e22.norm() == 0.0 {
        return None;
    }
    let w2 = w * w;
    let ez = [-e[(2, 0)] / e22, -e[(2, 1)] / e22, ZERO, c(-a) / e22];
    let mut d = Matrix4::zeros();
    for j in 0..4 {
        // (εE)_x and (εE)_y expressed through ψ
        let base_x = match j {
            0 => e[(0, 0)],
            1 => e[(0, 1)],
            _ => ZERO,
        };
        let base_y = match j {
            0 => e[(1, 0)],
            1 => e[(1, 1)],
            _ => ZERO,
        };
        let dx = base_x + e[(0, 2)] * ez[j];
        let dy = base_y + e[(1, 2)] * ez[j];
        d[(0, j)] = ez[j] * a + if j == 3 { c(w2) } else { ZERO };
        d[(1, j)] = if j == 2 { -ONE } else { ZERO };
        d[(2, j)] = -dy * w2 + if j == 1 { c(a * a) } else { ZERO };
        d[(3, j)] = dx;
    }
    Some(Berreman { delta: d, ez })
}

fn null_directions4(m: &Matrix4<Complex64>) -> [Vector4<Complex64>; 2] {
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&i, &j| {
        svd.singular_values[i]
            .partial_cmp(&svd.singular_values[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    [
        vt.row(idx[0]).adjoint().into_owned(),
        vt.row(idx[1]).adjoint().into_owned(),
    ]
}

/// Orthonormal basis of a rank-two column space by pivoted Gram-Schmidt.
/// None when the second pivot is too small to trust.
fn range_basis(m: &Matrix4<Complex64>) -> Option<[Vector4<Complex64>; 2]> {
    let cols: [Vector4<Complex64>; 4] = std::array::from_fn(|j| m.column(j).into_owned());
    let norms = cols.map(|v| v.norm());
    let (i0, n0) = norms
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
    if !(n0 > 0.0 && n0.is_finite()) {
        return None;
    }
    let u = cols[i0] / c(n0);
    let mut best = (0, 0.0, Vector4::zeros());
    for (j, v) in cols.iter().enumerate() {
        if j == i0 {
            continue;
        }
        let r = v - u * u.dotc(v);
        let n = r.norm();
        if n > best.1 {
            best = (j, n, r);
        }
    }
    if !(best.1 > 1e-6 * n0) {
        return None;
    }
    let mut v = best.2 / c(best.1);
    // One reorthogonalisation pass.
    v -= u * u.dotc(&v);
    let n = v.norm();
    Some([u, v / c(n)])
}

struct FrameModes {
    kz: [Complex64; 2],
    /// Basis of the transmitted tangential fields.
    psi: [Vector4<Complex64>; 2],
    degenerate: bool,
    ez: [Complex64; 4],
}

fn frame_modes(
    mode: &PlanarMode,
    fr: &Frame,
    eps_frame: &Matrix3<Complex64>,
    individual: bool,
) -> Result<FrameModes> {
    let fail = |reason: &str| Error::QuarticFailure {
        omega: mode.omega,
        kx: mode.kx,
        ky: mode.ky,
        reason: reason.to_string(),
    };
    let coef = dispersion_quartic(eps_frame, fr.a, 0.0, fr.w);
    let roots = quartic_roots(&coef).ok_or_else(|| fail("companion eigenvalue failure"))?;
    let ([q1, q2], [q3, q4]) = transmitted_roots(&roots);
    let br = berreman(eps_frame, fr.a, fr.w).ok_or_else(|| fail("eps_zz vanishes"))?;
    let id = Matrix4::<Complex64>::identity();
    let scale = q1.norm_sqr().sqrt().max(q2.norm_sqr().sqrt()).max(f64::MIN_POSITIVE);
    let degenerate = (q1 - q2).norm_sqr().sqrt() < DEGENERACY_TOL * scale;
    let psi = if individual && !degenerate {
        [
            null_directions4(&(br.delta - id * q1))[0],
            null_directions4(&(br.delta - id * q2))[0],
        ]
    } else {
        // Invariant subspace of the up-going pair. By Cayley-Hamilton it is
        // the range of (Δ − q3)(Δ − q4), which depends only on q3 + q4 and
        // q3 q4 and so is insensitive to how a degenerate pair splits.
        let range = br.delta * br.delta - br.delta * (q3 + q4) + id * (q3 * q4);
        match range_basis(&range) {
            Some(b) => b,
            None => {
                let p2 = br.delta * br.delta - br.delta * (q1 + q2) + id * (q1 * q2);
                null_directions4(&p2)
            }
        }
    };
    Ok(FrameModes {
        kz: [q1, q2],
        psi,
        degenerate,
        ez: br.ez,
    })
}

fn electric_field(fm: &FrameModes, fr: &Frame, psi: &Vector4<Complex64>) -> Vector3<Complex64> {
    let ez: Complex64 = (0..4).map(|j| fm.ez[j] * psi[j]).sum();
    let e = fr.to_lab(&Vector3::new(psi[0], psi[1], ez));
    let n = e.norm();
    e / c(n)
}

/// Both transmitted solutions for the medium `eps` filling z > 0.
pub fn substrate_modes(mode: &PlanarMode, eps: &DielectricTensor) -> Result<SubstrateModes> {
    mode.validate()?;
    let fr = mode.frame();
    let fm = frame_modes(mode, &fr, &fr.rotate(eps.matrix()), true)?;
    let e1 = electric_field(&fm, &fr, &fm.psi[0]);
    let e2 = electric_field(&fm, &fr, &fm.psi[1]);
    let (kz1, kz2) = if fm.degenerate {
        let q = (fm.kz[0] + fm.kz[1]) * 0.5;
        (q, q)
    } else {
        (fm.kz[0], fm.kz[1])
    };
    Ok(SubstrateModes {
        modes: [
            SubstrateMode {
                kz: kz1 * fr.l,
                e: e1,
            },
            SubstrateMode {
                kz: kz2 * fr.l,
                e: e2,
            },
        ],
        degenerate: fm.degenerate,
    })
}

/// Relative residual |M(k) E| / (|M| |E|) of a substrate mode, where
/// M = k kᵀ − k² + k_0² ε.
pub fn dispersion_residual(mode: &PlanarMode, eps: &DielectricTensor, sm: &SubstrateMode) -> f64 {
    let l = mode.k0.max(mode.k_perp());
    let k = Vector3::new(c(mode.kx / l), c(mode.ky / l), sm.kz / l);
    let m = dispersion_matrix(&k, mode.k0 / l, eps.matrix());
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (m * sm.e).norm() / (scale * sm.e.norm()).max(f64::MIN_POSITIVE)
}

fn one_norm(m: &Matrix4<Complex64>) -> f64 {
    (0..4)
        .map(|j| (0..4).map(|i| m[(i, j)].norm_sqr().sqrt()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn solve_boundary(mode: &PlanarMode, fr: &Frame, fm: &FrameModes) -> Result<ReflectionMatrix> {
    let kz = fr.kz;
    // Vacuum waves in reduced variables; p-waves carry amplitude w.
    let s_in = Vector4::new(ZERO, ONE, -kz, ZERO);
    let p_in = Vector4::new(-kz, ZERO, ZERO, -ONE);
    let s_out = Vector4::new(ZERO, ONE, kz, ZERO);
    let p_out = Vector4::new(kz, ZERO, ZERO, -ONE);

    let mut a = Matrix4::<Complex64>::zeros();
    a.set_column(0, &(-s_out));
    a.set_column(1, &(-p_out));
    a.set_column(2, &fm.psi[0]);
    a.set_column(3, &fm.psi[1]);

    let singular = |condition: f64| Error::SingularBoundary {
        omega: mode.omega,
        kx: mode.kx,
        ky: mode.ky,
        condition,
    };
    let mut row = [0.0f64; 4];
    for (i, r) in row.iter_mut().enumerate() {
        *r = (0..4).map(|j| a[(i, j)].norm_sqr().sqrt()).fold(0.0, f64::max);
    }
    if row.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(singular(f64::INFINITY));
    }
    let mut scaled = a;
    for i in 0..4 {
        for j in 0..4 {
            scaled[(i, j)] /= c(row[i]);
        }
    }
    let inv = scaled.try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let condition = one_norm(&scaled) * one_norm(&inv);
    if !(condition <= MAX_CONDITION) {
        return Err(singular(condition));
    }
    let solve = |rhs: &Vector4<Complex64>| {
        let b = Vector4::from_fn(|i, _| rhs[i] / c(row[i]));
        inv * b
    };
    let xs = solve(&s_in);
    let xp = solve(&p_in);
    let w = c(fr.w);
    let r = Matrix2::new(xs[0], xp[0] / w, xs[1] * w, xp[1]);
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(singular(condition));
    }
    Ok(ReflectionMatrix(r))
}

/// Full reflection matrix of the half-space z > 0 filled with `eps`.
pub fn reflection_matrix(mode: &PlanarMode, eps: &DielectricTensor) -> Result<ReflectionMatrix> {
    mode.validate()?;
    let fr = mode.frame();
    let fm = frame_modes(mode, &fr, &fr.rotate(eps.matrix()), false)?;
    solve_boundary(mode, &fr, &fm)
}

/// Reflection seen from above by a wave travelling −z onto the medium
/// `eps` filling z < 0, in the basis s, p = (k × s)/k_0 of the down-going
/// incident and up-going reflected waves.
pub fn reflection_matrix_from_above(
    mode: &PlanarMode,
    eps: &DielectricTensor,
) -> Result<ReflectionMatrix> {
    reflection_matrix(mode, &eps.mirrored_z()).map(|r| r.p_flipped())
}

/// Which reflection solver to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    /// Full mode matching everywhere.
    #[default]
    General,
    /// Closed-form Fresnel coefficients for isotropic tensors, the
    /// electrostatic limit when k_0/k_⊥ is below [`QUASISTATIC_THRESHOLD`],
    /// full mode matching otherwise.
    Auto,
}

/// Below this k_0/k_⊥ the quasistatic limit is accurate to O((k_0/k_⊥)²|ε|).
pub const QUASISTATIC_THRESHOLD: f64 = 3e-5;

pub fn reflection_with(
    mode: &PlanarMode,
    eps: &DielectricTensor,
    choice: SolverChoice,
) -> Result<ReflectionMatrix> {
    if choice == SolverChoice::Auto {
        if eps.is_isotropic(0.0) {
            mode.validate()?;
            let (rs, rp) = isotropic_fresnel(mode, eps.get(0, 0));
            return Ok(ReflectionMatrix::diagonal(rs, rp));
        }
        if mode.k0 < QUASISTATIC_THRESHOLD * mode.k_perp() {
            let rpp = quasistatic_rpp(mode.theta(), eps)?;
            return Ok(ReflectionMatrix::diagonal(ZERO, rpp));
        }
    }
    reflection_matrix(mode, eps)
}

/// Large-k⊥ limit of r_pp for the gyrotropic tensor:
/// ((ε_d − 1) + sin θ ε_f)/((ε_d + 1) + sin θ ε_f).
pub fn r_infinity(theta: f64, eps_d: Complex64, eps_f: Complex64) -> Result<Complex64> {
    let st = theta.sin();
    let den = eps_d + ONE + eps_f * st;
    if den.norm() <= 1e-14 {
        return Err(Error::Domain(format!(
            "quasistatic surface-mode pole at theta = {theta}"
        )));
    }
    Ok((eps_d - ONE + eps_f * st) / den)
}

/// Electrostatic limit of r_pp for an arbitrary tensor.
///
/// The potential in the medium decays as e^{−κ q z}; q solves
/// kᵀ ε k = 0 with k = (cos θ, sin θ, iq), and continuity of the potential
/// and of D_z gives r = (Q − 1)/(Q + 1) with Q = ε_zz q − i(ε_zx cos θ + ε_zy sin θ).
pub fn quasistatic_rpp(theta: f64, eps: &DielectricTensor) -> Result<Complex64> {
    let e = eps.matrix();
    let (ct, st) = (theta.cos(), theta.sin());
    let [a0, a1, a2] = quadratic_form(e, ct, st);
    // kᵀεk with k_z = iq: −a2 q² + i a1 q + a0 = 0
    if a2.norm() == 0.0 {
        return Err(Error::Domain("eps_zz vanishes in the quasistatic limit".into()));
    }
    let disc = (-(a1 * a1) + a0 * a2 * 4.0).sqrt();
    let q1 = (I * a1 + disc) / (a2 * 2.0);
    let q2 = (I * a1 - disc) / (a2 * 2.0);
    let q = if q1.re >= q2.re { q1 } else { q2 };
    let big_q = e[(2, 2)] * q - I * (e[(2, 0)] * ct + e[(2, 1)] * st);
    let den = big_q + ONE;
    if den.norm() <= 1e-14 {
        return Err(Error::Domain(format!(
            "quasistatic surface-mode pole at theta = {theta}"
        )));
    }
    Ok((big_q - ONE) / den)
}

/// Textbook Fresnel coefficients (r_s, r_p) of an isotropic medium.
pub fn isotropic_fresnel(mode: &PlanarMode, eps: Complex64) -> (Complex64, Complex64) {
    let kz = mode.kz();
    let kp = mode.k_perp();
    let kzm = sqrt_upper(eps * (mode.k0 * mode.k0) - c(kp * kp));
    let rs = (kz - kzm) / (kz + kzm);
    let rp = (eps * kz - kzm) / (eps * kz + kzm);
    (rs, rp)
}
