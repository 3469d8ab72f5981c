//! Normalization of sphere modes: LK, M (exact and finite-difference surface
//! term), PML, and pole response, plus the surface identities that relate them.
//!
//! Angular integrals are done in closed form, radial ones with 32-node
//! Gauss–Legendre panels one local wavelength wide.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::consts::{C0, EPS0, MU0};
use crate::linalg::{CMat, Lu};
use crate::mie::{angular_integrals, mie_radial_profile, MieMode, Polarization, SphereGeometry};
use crate::specfun::{gauss_legendre, sph_bessel_j_d, sph_hankel1_d, QuadratureRule};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const NODES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormMethod {
    LK,
    MExact,
    MFd,
    Pml,
    PoleResponse,
}

impl NormMethod {
    pub fn name(&self) -> &'static str {
        match self {
            NormMethod::LK => "LK",
            NormMethod::MExact => "M_exact",
            NormMethod::MFd => "M_fd",
            NormMethod::Pml => "PML",
            NormMethod::PoleResponse => "PoleResponse",
        }
    }
}

/// Radial map r → R + α(r − R) on R < r < R + T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlMap {
    pub r: f64,
    pub alpha: C64,
    pub t: f64,
}

impl PmlMap {
    pub fn new(r: f64) -> Self {
        PmlMap { r, alpha: C64::new(1.0, 0.5), t: 4e-6 }
    }

    pub fn with_alpha(self, alpha: C64) -> Self {
        PmlMap { alpha, ..self }
    }

    pub fn with_thickness(self, t: f64) -> Self {
        PmlMap { t, ..self }
    }

    pub fn tan_theta(&self) -> f64 {
        self.alpha.im / self.alpha.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormMeta {
    pub alpha: Option<C64>,
    pub thickness: Option<f64>,
    pub fd_step: Option<f64>,
    pub source_radius: Option<f64>,
    pub nodes_per_wavelength: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    pub method: NormMethod,
    pub r: f64,
    pub value: C64,
    pub meta: NormMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeScheme {
    Exact,
    Fd { h: f64 },
}

type V3 = [C64; 3];

/// Radial amplitudes of E and H in (r, θ, φ) order, and their r-derivatives.
struct Amps {
    e: V3,
    h: V3,
    de: V3,
    dh: V3,
}

fn amps(mode: &MieMode, geom: &SphereGeometry, r: C64) -> Result<Amps> {
    let p = mie_radial_profile(mode, geom, r)?;
    let z = C64::new(0.0, 0.0);
    let prim = [z, z, p.phi];
    let sec = [p.rad, p.theta, z];
    let dprim = [z, z, p.d_phi];
    let dsec = [p.d_rad, p.d_theta, z];
    Ok(match mode.pol {
        Polarization::TM => Amps { e: sec, h: prim, de: dsec, dh: dprim },
        Polarization::TE => Amps { e: prim, h: sec, de: dprim, dh: dsec },
    })
}

/// ∫ a·b dΩ for two fields of the same multipole.
fn dot(l: usize, a: &V3, b: &V3) -> C64 {
    let (wp, wt) = angular_integrals(l);
    wp * a[0] * b[0] + wt * (a[1] * b[1] + a[2] * b[2])
}

/// ∫ (a × b)·r̂ dΩ.
fn cross_r(l: usize, a: &V3, b: &V3) -> C64 {
    let (_, wt) = angular_integrals(l);
    wt * (a[1] * b[2] - a[2] * b[1])
}

fn local_wavelength(k: C64) -> f64 {
    2.0 * core::f64::consts::PI / k.norm()
}

fn panels(len: f64, lambda: f64, density: usize) -> usize {
    let p = (len / lambda * density as f64 / NODES as f64).ceil();
    (p as usize).max(1)
}

struct Quad {
    rule: QuadratureRule,
    density: usize,
}

impl Quad {
    fn new(density: usize) -> Self {
        Quad { rule: gauss_legendre(NODES), density }
    }

    /// ∫ r² f(r) dr over [0, R] split at the sphere surface.
    fn ball<F: FnMut(C64) -> Result<C64>>(
        &self,
        mode: &MieMode,
        geom: &SphereGeometry,
        r_max: f64,
        mut f: F,
    ) -> Result<C64> {
        let mut err = None;
        let mut g = |r: f64| match f(C64::new(r, 0.0)) {
            Ok(v) => v * r * r,
            Err(e) => {
                err = Some(e);
                C64::new(0.0, 0.0)
            }
        };
        let a = geom.a.min(r_max);
        let pin = panels(a, local_wavelength(mode.k_in), self.density).max(2);
        let mut total = self.rule.integrate_panels(0.0, a, pin, &mut g);
        if r_max > geom.a {
            let pout = panels(r_max - geom.a, local_wavelength(mode.k_out), self.density);
            total += self.rule.integrate_panels(geom.a, r_max, pout, &mut g);
        }
        match err {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }
}

/// ∫ over the ball of (E·∂(ωε)/∂ω E − H·∂(ωμ)/∂ω H).
fn m_volume(mode: &MieMode, geom: &SphereGeometry, r_max: f64, q: &Quad) -> Result<C64> {
    let w = mode.omega;
    let (dei, dmi) = (geom.interior.d_omega_eps(w)?, geom.interior.d_omega_mu(w)?);
    let (deo, dmo) = (geom.exterior.d_omega_eps(w)?, geom.exterior.d_omega_mu(w)?);
    q.ball(mode, geom, r_max, |r| {
        let a = amps(mode, geom, r)?;
        let (de, dm) = if r.re < geom.a { (dei, dmi) } else { (deo, dmo) };
        Ok(EPS0 * de * dot(mode.l, &a.e, &a.e) - MU0 * dm * dot(mode.l, &a.h, &a.h))
    })
}

fn check_radius(geom: &SphereGeometry, r: f64) -> Result<()> {
    if !(r > geom.a) {
        return Err(Error::InvalidInput("integration radius must exceed the sphere radius"));
    }
    Ok(())
}

/// Surface term (i/ω̃)∮[E × (r·∇)H − (r·∇)E × H]·dS of the M norm.
pub fn m_surface_term(mode: &MieMode, geom: &SphereGeometry, r: f64, scheme: DerivativeScheme) -> Result<C64> {
    check_radius(geom, r)?;
    let rc = C64::new(r, 0.0);
    let a = amps(mode, geom, rc)?;
    let (de, dh) = match scheme {
        DerivativeScheme::Exact => (a.de, a.dh),
        DerivativeScheme::Fd { h } => {
            if !(h > 0.0) || r - h <= geom.a {
                return Err(Error::InvalidInput("finite-difference step must stay outside the sphere"));
            }
            let p = amps(mode, geom, C64::new(r + h, 0.0))?;
            let m = amps(mode, geom, C64::new(r - h, 0.0))?;
            let d = |u: &V3, v: &V3| [0, 1, 2].map(|c| (u[c] - v[c]) / (2.0 * h));
            (d(&p.e, &m.e), d(&p.h, &m.h))
        }
    };
    let rde = de.map(|v| v * r);
    let rdh = dh.map(|v| v * r);
    let flux = cross_r(mode.l, &a.e, &rdh) - cross_r(mode.l, &rde, &a.h);
    Ok(I / mode.omega * r * r * flux)
}

/// M norm: volume term over the ball of radius R plus the (r·∇) surface term.
pub fn m_norm(mode: &MieMode, geom: &SphereGeometry, r: f64, scheme: DerivativeScheme) -> Result<NormResult> {
    m_norm_with_density(mode, geom, r, scheme, NODES)
}

pub fn m_norm_with_density(
    mode: &MieMode,
    geom: &SphereGeometry,
    r: f64,
    scheme: DerivativeScheme,
    density: usize,
) -> Result<NormResult> {
    check_radius(geom, r)?;
    let q = Quad::new(density);
    let value = m_volume(mode, geom, r, &q)? + m_surface_term(mode, geom, r, scheme)?;
    let (method, fd_step) = match scheme {
        DerivativeScheme::Exact => (NormMethod::MExact, None),
        DerivativeScheme::Fd { h } => (NormMethod::MFd, Some(h)),
    };
    Ok(NormResult {
        method,
        r,
        value,
        meta: NormMeta { fd_step, nodes_per_wavelength: density, ..Default::default() },
    })
}

/// Surface term (iε0nc/ω̃)∮E² dS of the LK norm.
pub fn lk_surface_term(mode: &MieMode, geom: &SphereGeometry, r: f64) -> Result<C64> {
    check_radius(geom, r)?;
    let a = amps(mode, geom, C64::new(r, 0.0))?;
    let n = geom.exterior_index();
    Ok(I * EPS0 * n * C0 / mode.omega * r * r * dot(mode.l, &a.e, &a.e))
}

/// LK norm at finite R: ∫E·(ε + ∂(ωε)/∂ω)E over the ball plus the LK surface
/// term. There is no limit in R; the value drifts with R by construction.
pub fn lk_norm(mode: &MieMode, geom: &SphereGeometry, r: f64) -> Result<NormResult> {
    check_radius(geom, r)?;
    let w = mode.omega;
    let q = Quad::new(NODES);
    let (ei, dei) = (geom.interior.permittivity(w)?, geom.interior.d_omega_eps(w)?);
    let (eo, deo) = (geom.exterior.permittivity(w)?, geom.exterior.d_omega_eps(w)?);
    let vol = q.ball(mode, geom, r, |rr| {
        let a = amps(mode, geom, rr)?;
        let f = if rr.re < geom.a { ei + dei } else { eo + deo };
        Ok(EPS0 * f * dot(mode.l, &a.e, &a.e))
    })?;
    Ok(NormResult {
        method: NormMethod::LK,
        r,
        value: vol + lk_surface_term(mode, geom, r)?,
        meta: NormMeta { nodes_per_wavelength: NODES, ..Default::default() },
    })
}

fn check_revealed(mode: &MieMode, map: &PmlMap) -> Result<()> {
    let required = 1.0 / (2.0 * mode.q_factor().abs());
    let alpha = if mode.omega.re < 0.0 { map.alpha.conj() } else { map.alpha };
    if !(map.alpha.re > 0.0) || !((mode.k_out * alpha).im > 0.0) {
        return Err(Error::RegularizationAngleTooSmall { tan_theta: map.tan_theta(), required });
    }
    Ok(())
}

/// ∫ over the PML shell of the continued integrand, and the estimated
/// neglected tail beyond R + T.
fn pml_shell<F: FnMut(&Amps, &Amps) -> C64>(
    mode: &MieMode,
    other: &MieMode,
    geom: &SphereGeometry,
    map: &PmlMap,
    density: usize,
    mut f: F,
) -> Result<(C64, f64)> {
    let q = Quad::new(density);
    let alpha = if mode.omega.re < 0.0 { map.alpha.conj() } else { map.alpha };
    let kmax = if other.k_out.norm() > mode.k_out.norm() { other.k_out } else { mode.k_out };
    let len = map.t * alpha.norm();
    let np = panels(len, local_wavelength(kmax), density);
    let mut err = None;
    let mut g = |s: f64| {
        let rt = map.r + alpha * s;
        let res = amps(mode, geom, rt).and_then(|a| Ok((a, amps(other, geom, rt)?)));
        match res {
            Ok((a, b)) => f(&a, &b) * rt * rt * alpha,
            Err(e) => {
                err = Some(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let value = q.rule.integrate_panels(0.0, map.t, np, &mut g);
    let end = g(map.t);
    if let Some(e) = err {
        return Err(e);
    }
    // the integrand decays like exp(i(k₁ + k₂)α s)
    let decay = ((mode.k_out + other.k_out) * alpha).im;
    let tail = if decay > 0.0 { end.norm() / decay } else { f64::INFINITY };
    Ok((value, tail))
}

fn pml_value(mode: &MieMode, geom: &SphereGeometry, map: &PmlMap, density: usize) -> Result<(C64, f64)> {
    let (eo, mo) = geom.material(false, mode.omega)?;
    let q = Quad::new(density);
    let vol = m_volume(mode, geom, map.r, &q)?;
    let l = mode.l;
    let (shell, tail) = pml_shell(mode, mode, geom, map, density, |a, _| {
        EPS0 * eo * dot(l, &a.e, &a.e) - MU0 * mo * dot(l, &a.h, &a.h)
    })?;
    Ok((vol + shell, tail))
}

/// PML norm: interior volume term plus the same integrand continued along
/// r̃ = R + α(s − R). T is doubled (up to five times) until the neglected tail
/// is below 10⁻¹² of the value.
pub fn pml_norm(mode: &MieMode, geom: &SphereGeometry, map: &PmlMap) -> Result<NormResult> {
    pml_norm_with_density(mode, geom, map, NODES)
}

pub fn pml_norm_with_density(
    mode: &MieMode,
    geom: &SphereGeometry,
    map: &PmlMap,
    density: usize,
) -> Result<NormResult> {
    check_radius(geom, map.r)?;
    check_revealed(mode, map)?;
    let mut m = *map;
    for _ in 0..6 {
        let (value, tail) = pml_value(mode, geom, &m, density)?;
        if tail < 1e-12 * value.norm() {
            return Ok(NormResult {
                method: NormMethod::Pml,
                r: m.r,
                value,
                meta: NormMeta {
                    alpha: Some(m.alpha),
                    thickness: Some(m.t),
                    nodes_per_wavelength: density,
                    ..Default::default()
                },
            });
        }
        m.t *= 2.0;
    }
    Err(Error::TailNotConverged)
}

/// The PML shell integral alone, the M surface term, and their relative difference.
pub fn m_pml_surface_equiv(mode: &MieMode, geom: &SphereGeometry, map: &PmlMap) -> Result<(C64, C64, f64)> {
    check_radius(geom, map.r)?;
    check_revealed(mode, map)?;
    let (eo, mo) = geom.material(false, mode.omega)?;
    let l = mode.l;
    let mut m = *map;
    let mut out = None;
    for _ in 0..6 {
        let (shell, tail) = pml_shell(mode, mode, geom, &m, NODES, |a, _| {
            EPS0 * eo * dot(l, &a.e, &a.e) - MU0 * mo * dot(l, &a.h, &a.h)
        })?;
        if tail < 1e-12 * shell.norm() {
            out = Some(shell);
            break;
        }
        m.t *= 2.0;
    }
    let shell = out.ok_or(Error::TailNotConverged)?;
    let surf = m_surface_term(mode, geom, map.r, DerivativeScheme::Exact)?;
    Ok((shell, surf, (shell - surf).norm() / shell.norm()))
}

/// Exact flux identity on the sphere of radius R:
/// ∮(E×H)·dS − iω̃∫(E·εE + H·μH)dV, returned with the size of the flux term.
pub fn poynting_residual(mode: &MieMode, geom: &SphereGeometry, r: f64) -> Result<(C64, f64)> {
    check_radius(geom, r)?;
    let a = amps(mode, geom, C64::new(r, 0.0))?;
    let flux = r * r * cross_r(mode.l, &a.e, &a.h);
    let vol = eh_volume(mode, geom, r)?;
    Ok((flux - I * mode.omega * vol, flux.norm()))
}

/// ∫(E·εE + H·μH) over the ball of radius R.
fn eh_volume(mode: &MieMode, geom: &SphereGeometry, r: f64) -> Result<C64> {
    let w = mode.omega;
    let (ei, mi) = geom.material(true, w)?;
    let (eo, mo) = geom.material(false, w)?;
    Quad::new(NODES).ball(mode, geom, r, |rr| {
        let a = amps(mode, geom, rr)?;
        let (e, m) = if rr.re < geom.a { (ei, mi) } else { (eo, mo) };
        Ok(EPS0 * e * dot(mode.l, &a.e, &a.e) + MU0 * m * dot(mode.l, &a.h, &a.h))
    })
}

/// I_surf^LK + ∫(E·εE + H·μH)dV and the larger of the two terms in magnitude.
/// Small only in the far field.
pub fn lk_identity_check(mode: &MieMode, geom: &SphereGeometry, r: f64) -> Result<(C64, f64)> {
    let s = lk_surface_term(mode, geom, r)?;
    let v = eh_volume(mode, geom, r)?;
    Ok((s + v, s.norm().max(v.norm())))
}

/// Unconjugated cross product of two modes over the ball and the PML shell,
/// with the dispersive weight (ω₁ε(ω₁) − ω₂ε(ω₂))/(ω₁ − ω₂).
pub fn pml_cross_product(m1: &MieMode, m2: &MieMode, geom: &SphereGeometry, map: &PmlMap) -> Result<C64> {
    if m1.l != m2.l || m1.pol != m2.pol {
        return Ok(C64::new(0.0, 0.0));
    }
    check_radius(geom, map.r)?;
    check_revealed(m1, map)?;
    check_revealed(m2, map)?;
    let (w1, w2) = (m1.omega, m2.omega);
    let weight = |m: &crate::MaterialModel, d: fn(&crate::MaterialModel, C64) -> Result<C64>| -> Result<C64> {
        if (w1 - w2).norm() < 1e-12 * w1.norm() {
            d(m, w1)
        } else {
            Ok((w1 * d(m, w1)? - w2 * d(m, w2)?) / (w1 - w2))
        }
    };
    let we_in = weight(&geom.interior, crate::MaterialModel::permittivity)?;
    let wm_in = weight(&geom.interior, crate::MaterialModel::permeability)?;
    let (eo, mo) = geom.material(false, w1)?;
    let l = m1.l;
    let q = Quad::new(NODES);
    let vol = q.ball(m1, geom, map.r, |r| {
        let a = amps(m1, geom, r)?;
        let b = amps(m2, geom, r)?;
        let (e, m) = if r.re < geom.a { (we_in, wm_in) } else { (eo, mo) };
        Ok(EPS0 * e * dot(l, &a.e, &b.e) - MU0 * m * dot(l, &a.h, &b.h))
    })?;
    let (shell, _) = pml_shell(m1, m2, geom, map, NODES, |a, b| {
        EPS0 * eo * dot(l, &a.e, &b.e) - MU0 * mo * dot(l, &a.h, &b.h)
    })?;
    Ok(vol + shell)
}

/// Radial amplitude of E_θ at `r_obs` driven at ω by the TM shell current
/// J = j0·Θ(θ)·δ(r − r_src) θ̂.
pub fn shell_source_field(
    geom: &SphereGeometry,
    l: usize,
    omega: C64,
    r_src: f64,
    j0: C64,
    r_obs: f64,
) -> Result<C64> {
    let (ei, mi) = geom.material(true, omega)?;
    let (eo, mo) = geom.material(false, omega)?;
    let ki = (ei * mi).sqrt() * omega / C0;
    let ko = (eo * mo).sqrt() * omega / C0;
    // (H_φ, E_θ) radial amplitudes of z(kr)
    let hv = |k: C64, eps: C64, r: f64, regular: bool| -> Result<(C64, C64)> {
        let u = k * r;
        let (z, dz) = if regular { sph_bessel_j_d(l, u)? } else { sph_hankel1_d(l, u)? };
        let et = -I / (omega * EPS0 * eps) * k * (z + u * dz) / u;
        Ok((z, et))
    };
    let a = geom.a;
    let inner_src = r_src < a;
    let (k_mid, e_mid) = if inner_src { (ki, ei) } else { (ko, eo) };
    // unknowns: c1 (core j), c2 j + c3 h (between source and surface), c4 (outer h)
    let (r1, r2) = if inner_src { (r_src, a) } else { (a, r_src) };
    let mut m = CMat::zeros(4, 4);
    let mut rhs = alloc::vec![C64::new(0.0, 0.0); 4];
    let (k_core, e_core) = (ki, ei);
    let c1 = hv(k_core, e_core, r1, true)?;
    let j_1 = hv(k_mid, e_mid, r1, true)?;
    let h_1 = hv(k_mid, e_mid, r1, false)?;
    let j_2 = hv(k_mid, e_mid, r2, true)?;
    let h_2 = hv(k_mid, e_mid, r2, false)?;
    let c4 = hv(ko, eo, r2, false)?;
    // at r1: outer-minus-inner jumps
    let jump_h1 = if inner_src { -j0 } else { C64::new(0.0, 0.0) };
    m[(0, 0)] = -c1.0;
    m[(0, 1)] = j_1.0;
    m[(0, 2)] = h_1.0;
    rhs[0] = jump_h1;
    m[(1, 0)] = -c1.1;
    m[(1, 1)] = j_1.1;
    m[(1, 2)] = h_1.1;
    // at r2
    let jump_h2 = if inner_src { C64::new(0.0, 0.0) } else { -j0 };
    m[(2, 1)] = -j_2.0;
    m[(2, 2)] = -h_2.0;
    m[(2, 3)] = c4.0;
    rhs[2] = jump_h2;
    m[(3, 1)] = -j_2.1;
    m[(3, 2)] = -h_2.1;
    m[(3, 3)] = c4.1;
    let c = Lu::new(m)?.solve(&rhs);
    let value = if r_obs < r1 {
        c[0] * hv(k_core, e_core, r_obs, true)?.1
    } else if r_obs <= r2 {
        c[1] * hv(k_mid, e_mid, r_obs, true)?.1 + c[2] * hv(k_mid, e_mid, r_obs, false)?.1
    } else {
        c[3] * hv(ko, eo, r_obs, false)?.1
    };
    Ok(value)
}

/// Residue coefficient γ of the response to the unit shell source at r_src,
/// i.e. E_θ ≈ γ Ẽ_θ/(ω − ω̃) near the pole, from the 4-point stencil
/// ω̃ + δ{1, i, −1, −i} with |δ| = 10⁻⁶|ω̃|.
pub fn sphere_residue_gamma(mode: &MieMode, geom: &SphereGeometry, r_src: f64) -> Result<C64> {
    let p = mie_radial_profile(mode, geom, C64::new(r_src, 0.0))?;
    let d0 = 1e-6 * mode.omega.norm();
    let mut acc = C64::new(0.0, 0.0);
    for s in [C64::new(1.0, 0.0), I, C64::new(-1.0, 0.0), -I] {
        let d = d0 * s;
        acc += d * shell_source_field(geom, mode.l, mode.omega + d, r_src, C64::new(1.0, 0.0), r_src)?;
    }
    Ok(acc / 4.0 / p.theta)
}

/// Pole-response norm N = −i∫J·Ẽ/γ for a TM shell source at radius r_src.
pub fn pole_response_norm_sphere(mode: &MieMode, geom: &SphereGeometry, r_src: f64) -> Result<NormResult> {
    if mode.pol != Polarization::TM {
        return Err(Error::InvalidInput("pole response is implemented for TM modes"));
    }
    if !(r_src > 0.0) || (r_src - geom.a).abs() < 1e-9 * geom.a {
        return Err(Error::InvalidInput("source radius must be positive and off the surface"));
    }
    let et = |r: f64| mie_radial_profile(mode, geom, C64::new(r, 0.0)).map(|p| p.theta);
    let here = et(r_src)?;
    let mut peak = 0.0f64;
    for i in 1..=100 {
        peak = peak.max(et(2.0 * geom.a * i as f64 / 100.0)?.norm());
    }
    if here.norm() < 1e-8 * peak {
        return Err(Error::SourceOnNodalPoint);
    }
    let gamma = sphere_residue_gamma(mode, geom, r_src)?;
    let (_, wt) = angular_integrals(mode.l);
    let overlap = r_src * r_src * wt * here;
    Ok(NormResult {
        method: NormMethod::PoleResponse,
        r: r_src,
        value: -I * overlap / gamma,
        meta: NormMeta { source_radius: Some(r_src), nodes_per_wavelength: NODES, ..Default::default() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub alpha: C64,
    pub thickness: f64,
    pub fd_step: f64,
    pub source_radius: f64,
}

impl SweepOptions {
    /// Defaults: α = 1 + i/2, T = 4 µm, h = 10⁻⁴a, source at 0.8a.
    pub fn for_sphere(geom: &SphereGeometry) -> Self {
        SweepOptions { alpha: C64::new(1.0, 0.5), thickness: 4e-6, fd_step: 1e-4 * geom.a, source_radius: 0.8 * geom.a }
    }
}

/// One entry per (R, method), radii outermost; failures are kept in place.
pub fn norm_sweep(
    mode: &MieMode,
    geom: &SphereGeometry,
    radii: &[f64],
    methods: &[NormMethod],
    opts: &SweepOptions,
) -> Vec<(f64, NormMethod, Result<NormResult>)> {
    let mut out = Vec::with_capacity(radii.len() * methods.len());
    for &r in radii {
        for &m in methods {
            let res = match m {
                NormMethod::LK => lk_norm(mode, geom, r),
                NormMethod::MExact => m_norm(mode, geom, r, DerivativeScheme::Exact),
                NormMethod::MFd => m_norm(mode, geom, r, DerivativeScheme::Fd { h: opts.fd_step }),
                NormMethod::Pml => {
                    let map = PmlMap::new(r).with_alpha(opts.alpha).with_thickness(opts.thickness);
                    pml_norm(mode, geom, &map)
                }
                NormMethod::PoleResponse => pole_response_norm_sphere(mode, geom, opts.source_radius),
            };
            out.push((r, m, res));
        }
    }
    out
}
