//! Analytic quasinormal modes of a symmetric dielectric slab in vacuum.
//!
//! Fields are E_y(x), H_z(x) with ∂ₓE = iωμ0 H. The slab occupies |x| < L/2.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::consts::{C0, EPS0, MU0};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabGeometry {
    pub n: f64,
    pub l: f64,
}

impl SlabGeometry {
    pub fn new(n: f64, l: f64) -> Result<Self> {
        if !(n > 1.0 && l > 0.0 && n.is_finite() && l.is_finite()) {
            return Err(Error::InvalidInput("slab needs n > 1 and L > 0"));
        }
        Ok(SlabGeometry { n, l })
    }

    /// ln((n+1)/(n−1)), the round-trip loss exponent.
    fn loss(&self) -> f64 {
        ((self.n + 1.0) / (self.n - 1.0)).ln()
    }

    fn inside(&self, x: f64) -> bool {
        x.abs() < 0.5 * self.l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabMode {
    /// Mode index; m ≤ 0 are allowed (m = 0 is the non-oscillating mode, −m is the twin of m).
    pub m: i64,
    pub omega: C64,
    pub parity: Parity,
    /// E = interior_amp·cos(qx) or interior_amp·sin(qx) inside, q = nω/c.
    pub interior_amp: C64,
    /// E(L/2⁺); the exterior field is exterior_amp·exp(ik(|x| − L/2)), sign-flipped on the left for odd modes.
    pub exterior_amp: C64,
    pub norm: Option<C64>,
}

impl SlabMode {
    pub fn q_factor(&self) -> f64 {
        -self.omega.re / (2.0 * self.omega.im)
    }

    /// The mode scaled to unit norm.
    pub fn normalized(&self, geom: &SlabGeometry) -> SlabMode {
        let s = closed_form_norm(self, geom).sqrt();
        SlabMode {
            interior_amp: self.interior_amp / s,
            exterior_amp: self.exterior_amp / s,
            norm: Some(C64::new(1.0, 0.0)),
            ..*self
        }
    }

    /// The Hermitian twin (−ω̃*, conjugated fields).
    pub fn twin(&self) -> SlabMode {
        SlabMode {
            m: -self.m,
            omega: -self.omega.conj(),
            interior_amp: match self.parity {
                Parity::Even => self.interior_amp.conj(),
                Parity::Odd => -self.interior_amp.conj(),
            },
            exterior_amp: self.exterior_amp.conj(),
            norm: self.norm.map(|n| n.conj()),
            ..*self
        }
    }
}

/// Mode of index m (any integer) with unit interior amplitude.
pub fn slab_qnm(geom: &SlabGeometry, m: i64) -> SlabMode {
    let omega = C0 / (geom.n * geom.l) * C64::new(m as f64 * core::f64::consts::PI, -geom.loss());
    let parity = if m.rem_euclid(2) == 0 { Parity::Even } else { Parity::Odd };
    let q = geom.n * omega / C0;
    let half = q * (0.5 * geom.l);
    let exterior_amp = match parity {
        Parity::Even => half.cos(),
        Parity::Odd => half.sin(),
    };
    SlabMode { m, omega, parity, interior_amp: C64::new(1.0, 0.0), exterior_amp, norm: None }
}

/// |r² exp(2inωL/c) − 1| with r = (n−1)/(n+1); zero at every mode.
pub fn slab_dispersion_residual(geom: &SlabGeometry, omega: C64) -> f64 {
    let r = (geom.n - 1.0) / (geom.n + 1.0);
    (r * r * (2.0 * I * geom.n * omega * geom.l / C0).exp() - 1.0).norm()
}

/// Modes m = 1..=m_max, each checked against the round-trip condition.
pub fn slab_qnm_frequencies(geom: &SlabGeometry, m_max: usize) -> Result<Vec<SlabMode>> {
    if m_max == 0 {
        return Err(Error::InvalidInput("m_max must be at least 1"));
    }
    let mut out = Vec::with_capacity(m_max);
    for m in 1..=m_max as i64 {
        let mode = slab_qnm(geom, m);
        if slab_dispersion_residual(geom, mode.omega) > 1e-12 * (1.0 + m as f64 / 100.0) {
            return Err(Error::NoConvergence { iterations: 0 });
        }
        out.push(mode);
    }
    Ok(out)
}

/// (E, H) at a possibly complex coordinate; the region is chosen from Re x.
pub fn slab_field_continued(mode: &SlabMode, geom: &SlabGeometry, x: C64) -> (C64, C64) {
    let w = mode.omega;
    let q = geom.n * w / C0;
    let k = w / C0;
    let half = 0.5 * geom.l;
    let (e, de) = if x.re.abs() < half {
        let a = mode.interior_amp;
        match mode.parity {
            Parity::Even => (a * (q * x).cos(), -a * q * (q * x).sin()),
            Parity::Odd => (a * (q * x).sin(), a * q * (q * x).cos()),
        }
    } else {
        let b = mode.exterior_amp;
        if x.re > 0.0 {
            let e = b * (I * k * (x - half)).exp();
            (e, I * k * e)
        } else {
            let sign = if mode.parity == Parity::Even { 1.0 } else { -1.0 };
            let e = sign * b * (I * k * (-x - half)).exp();
            (e, -I * k * e)
        }
    };
    (e, de / (I * w * MU0))
}

/// (E, H) at real x.
pub fn slab_qnm_field(mode: &SlabMode, geom: &SlabGeometry, x: f64) -> (C64, C64) {
    slab_field_continued(mode, geom, C64::new(x, 0.0))
}

/// ∫(εE² − μH²) over the slab plus both exterior tails integrated along
/// x̃ = ±L/2 ± slope·(s − L/2). The tails converge when Im(k·slope) > 0; modes
/// with Re ω̃ < 0 are taken along the mirrored path (slope conjugated).
pub fn slab_norm_exact_with_path(mode: &SlabMode, geom: &SlabGeometry, slope: C64) -> Result<C64> {
    let tan_theta = slope.im / slope.re;
    let required = 1.0 / (2.0 * mode.q_factor().abs());
    let slope = if mode.omega.re < 0.0 { slope.conj() } else { slope };
    if !(slope.re > 0.0) || !((mode.omega * slope).im > 0.0) {
        return Err(Error::RegularizationAngleTooSmall { tan_theta, required });
    }
    Ok(closed_form_norm(mode, geom))
}

fn closed_form_norm(mode: &SlabMode, geom: &SlabGeometry) -> C64 {
    let w = mode.omega;
    let k = w / C0;
    let n2 = geom.n * geom.n;
    let q = geom.n * k;
    let l = geom.l;
    let a2 = mode.interior_amp * mode.interior_amp;
    let sinc = (q * l).sin() / (2.0 * q);
    let (cos2, sin2) = (0.5 * l + sinc, 0.5 * l - sinc);
    let (ee, dd) = match mode.parity {
        Parity::Even => (cos2, sin2),
        Parity::Odd => (sin2, cos2),
    };
    // −μH² = (E')²/(ω²μ0)
    let interior = a2 * (EPS0 * n2 * ee + q * q / (w * w * MU0) * dd);
    // per side: (ε0 − k²/(ω²μ0))·B²·∫exp(2ik(x̃ − L/2)) = coeff·B²·(−1/(2ik))
    let b2 = mode.exterior_amp * mode.exterior_amp;
    let coeff = EPS0 - k * k / (w * w * MU0);
    interior + 2.0 * coeff * b2 * (-1.0 / (2.0 * I * k))
}

/// Exact norm along the default path slope 1 + i.
pub fn slab_norm_exact(mode: &SlabMode, geom: &SlabGeometry) -> Result<C64> {
    slab_norm_exact_with_path(mode, geom, C64::new(1.0, 1.0))
}

/// Mode with its norm filled in.
pub fn slab_normalize(mode: &SlabMode, geom: &SlabGeometry) -> Result<SlabMode> {
    let n = slab_norm_exact(mode, geom)?;
    Ok(SlabMode { norm: Some(n), ..*mode })
}

/// LK-type volume term ∫_{−R}^{R} E·(ε + ∂(ωε)/∂ω)E dx = 2∫εE² on the real axis,
/// with no complex path and no surface term. Grows like exp(2|Im ω̃|R/c).
pub fn slab_truncated_integral(mode: &SlabMode, geom: &SlabGeometry, r: f64) -> C64 {
    let k = mode.omega / C0;
    let q = geom.n * k;
    let l = geom.l;
    let half = 0.5 * l;
    let a2 = mode.interior_amp * mode.interior_amp;
    let sinc = (q * l).sin() / (2.0 * q);
    let ee = match mode.parity {
        Parity::Even => 0.5 * l + sinc,
        Parity::Odd => 0.5 * l - sinc,
    };
    let mut total = 2.0 * EPS0 * geom.n * geom.n * a2 * ee;
    if r > half {
        let b2 = mode.exterior_amp * mode.exterior_amp;
        let side = b2 * ((2.0 * I * k * (r - half)).exp() - 1.0) / (2.0 * I * k);
        total += 2.0 * 2.0 * EPS0 * side;
    } else {
        // inside: only part of the slab
        let s = (2.0 * q * r).sin() / (2.0 * q);
        let ee_r = match mode.parity {
            Parity::Even => r + s,
            Parity::Odd => r - s,
        };
        total = 2.0 * EPS0 * geom.n * geom.n * a2 * ee_r;
    }
    total
}

fn wave_solution_right(geom: &SlabGeometry, k: C64, x: f64) -> (C64, C64) {
    // outgoing to the right: exp(ik(x − L/2)) for x > L/2
    let half = 0.5 * geom.l;
    let q = geom.n * k;
    let inner = |x: f64| {
        let t = q * (x - half);
        let u = t.cos() + I * k / q * t.sin();
        let du = -q * t.sin() + I * k * t.cos();
        (u, du)
    };
    if x >= half {
        let u = (I * k * (x - half)).exp();
        (u, I * k * u)
    } else if x >= -half {
        inner(x)
    } else {
        let (u0, du0) = inner(-half);
        let c = 0.5 * (u0 + du0 / (I * k));
        let d = 0.5 * (u0 - du0 / (I * k));
        let s = x + half;
        let ep = (I * k * s).exp();
        let em = (-I * k * s).exp();
        (c * ep + d * em, I * k * (c * ep - d * em))
    }
}

/// E at x driven by a unit sheet current at x_src: E'' + n²k²E = −iωμ0 δ(x − x_src).
pub fn slab_green_direct(geom: &SlabGeometry, x: f64, x_src: f64, omega: C64) -> C64 {
    let k = omega / C0;
    let (lo, hi) = if x <= x_src { (x, x_src) } else { (x_src, x) };
    // u_L(x) = u_R(−x)
    let (ul, _) = wave_solution_right(geom, k, -lo);
    let (ur, _) = wave_solution_right(geom, k, hi);
    let (ul0, dul0) = {
        let (u, du) = wave_solution_right(geom, k, 0.0);
        (u, -du)
    };
    let (ur0, dur0) = wave_solution_right(geom, k, 0.0);
    let wr = ul0 * dur0 - dul0 * ur0;
    -I * omega * MU0 * ul * ur / wr
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenExpansion {
    pub value: C64,
    /// Set when x or x_src lies outside the slab, where the pole series is not complete.
    pub warning: Option<Error>,
}

/// Pole expansion of the slab Green function with the poles m = −M..=M
/// (M twin pairs plus the m = 0 pole), written in the twice-subtracted form
/// G(0) + ωG'(0) + Σ Res_m [1/(ω − ω̃_m) + 1/ω̃_m + ω/ω̃_m²].
pub fn slab_green_expansion(
    geom: &SlabGeometry,
    x: f64,
    x_src: f64,
    omega: f64,
    pairs: usize,
) -> Result<GreenExpansion> {
    if pairs == 0 {
        return Err(Error::InvalidInput("need at least one pole pair"));
    }
    let warning = if geom.inside(x) && geom.inside(x_src) {
        None
    } else {
        Some(Error::OutsideCompletenessRegion)
    };
    let w = C64::new(omega, 0.0);
    let g0 = C64::new(-0.5 * MU0 * C0, 0.0);
    let g1 = -I * MU0 * (0.25 * geom.l * (geom.n * geom.n - 1.0) + 0.5 * (x - x_src).abs());
    let mut sum = g0 + w * g1;
    let mut poles: Vec<SlabMode> = (-(pairs as i64)..=pairs as i64).map(|m| slab_qnm(geom, m)).collect();
    poles.sort_by(|a, b| a.omega.re.total_cmp(&b.omega.re));
    for mode in &poles {
        let nrm = closed_form_norm(mode, geom);
        let (ex, _) = slab_qnm_field(mode, geom, x);
        let (es, _) = slab_qnm_field(mode, geom, x_src);
        let res = -I * ex * es / nrm;
        let wm = mode.omega;
        sum += res * (1.0 / (w - wm) + 1.0 / wm + w / (wm * wm));
    }
    Ok(GreenExpansion { value: sum, warning })
}

/// Norm from the residue of the driven response near ω̃ (relative offset 10⁻⁶).
pub fn slab_pole_response_norm(geom: &SlabGeometry, mode: &SlabMode, x_src: f64) -> Result<C64> {
    slab_pole_response_norm_with(geom, mode, x_src, 1e-6, 0.0)
}

/// Same, with explicit |δ|/|ω̃| and a rotation of the δ stencil in the complex plane.
/// The driven field is sampled at ω̃ + δ·{1, i, −1, −i}·e^{iφ}; averaging δ·E
/// cancels the regular part of the response through third order.
pub fn slab_pole_response_norm_with(
    geom: &SlabGeometry,
    mode: &SlabMode,
    x_src: f64,
    rel_delta: f64,
    phase: f64,
) -> Result<C64> {
    if !geom.inside(x_src) {
        return Err(Error::InvalidInput("source must lie inside the slab"));
    }
    let (es, _) = slab_qnm_field(mode, geom, x_src);
    let peak = (0..=200)
        .map(|i| {
            let x = geom.l * (i as f64 / 200.0 - 0.5);
            slab_qnm_field(mode, geom, x).0.norm()
        })
        .fold(0.0f64, f64::max);
    if es.norm() < 1e-8 * peak {
        return Err(Error::SourceOnNodalPoint);
    }
    let d0 = mode.omega.norm() * rel_delta * C64::from_polar(1.0, phase);
    let mut acc = C64::new(0.0, 0.0);
    for s in [C64::new(1.0, 0.0), I, C64::new(-1.0, 0.0), -I] {
        let d = d0 * s;
        acc += d * slab_green_direct(geom, x_src, x_src, mode.omega + d);
    }
    // acc/4 = γ Ẽ(x_src) with γ = −i Ẽ(x_src)/N for a unit sheet source
    let gamma_e = acc / 4.0;
    Ok(-I * es * es / gamma_e)
}
