//! Quasinormal modes of a homogeneous sphere (axisymmetric m = 0 multipoles).
//!
//! TM modes carry H = H_φ φ̂ and TE modes E = E_φ φ̂. With u = kr and z a
//! spherical Bessel function,
//!
//! * TM: H_φ = A z(u) Θ(θ), E = ∇×H · i/(ωε)
//! * TE: E_φ = A z(u) Θ(θ), H = ∇×E / (iωμ)
//!
//! where Θ(θ) = sinθ P_l'(cosθ) (Θ = sinθ for l = 1). The interior uses j_l,
//! the exterior h⁽¹⁾_l with A_out = 1.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::consts::{C0, EPS0, MU0};
use crate::materials::MaterialModel;
use crate::specfun::{riccati_psi, riccati_xi, second_derivative, sph_bessel_j_d, sph_hankel1_d};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    TM,
    TE,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGeometry {
    pub a: f64,
    pub interior: MaterialModel,
    pub exterior: MaterialModel,
}

impl SphereGeometry {
    /// Sphere in vacuum.
    pub fn new(a: f64, interior: MaterialModel) -> Result<Self> {
        Self::with_exterior(a, interior, MaterialModel::VACUUM)
    }

    pub fn with_exterior(a: f64, interior: MaterialModel, exterior: MaterialModel) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput("sphere radius must be positive"));
        }
        interior.validate()?;
        exterior.validate()?;
        if exterior.is_dispersive() {
            return Err(Error::InvalidBackground);
        }
        Ok(SphereGeometry { a, interior, exterior })
    }

    /// Relative (ε, μ) at ω on the chosen side.
    pub fn material(&self, inside: bool, omega: C64) -> Result<(C64, C64)> {
        let m = if inside { &self.interior } else { &self.exterior };
        Ok((m.permittivity(omega)?, m.permeability(omega)?))
    }

    pub fn exterior_index(&self) -> C64 {
        self.exterior.index(C64::new(1.0, 0.0)).expect("exterior is non-dispersive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MieMode {
    pub l: usize,
    pub pol: Polarization,
    pub omega: C64,
    pub k_in: C64,
    pub k_out: C64,
    pub a_in: C64,
    pub a_out: C64,
    pub norm: Option<C64>,
}

impl MieMode {
    /// Mode record for a given (converged) eigenfrequency.
    pub fn at(geom: &SphereGeometry, l: usize, pol: Polarization, omega: C64) -> Result<MieMode> {
        if l == 0 {
            return Err(Error::InvalidInput("multipole order must be at least 1"));
        }
        let (ei, mi) = geom.material(true, omega)?;
        let (eo, mo) = geom.material(false, omega)?;
        let k_in = (ei * mi).sqrt() * omega / C0;
        let k_out = (eo * mo).sqrt() * omega / C0;
        let (j, _) = sph_bessel_j_d(l, k_in * geom.a)?;
        let (h, _) = sph_hankel1_d(l, k_out * geom.a)?;
        Ok(MieMode { l, pol, omega, k_in, k_out, a_in: h / j, a_out: C64::new(1.0, 0.0), norm: None })
    }

    pub fn q_factor(&self) -> f64 {
        -self.omega.re / (2.0 * self.omega.im)
    }

    pub fn wavelength(&self) -> C64 {
        crate::consts::wavelength_from_omega(self.omega)
    }

    /// Same mode with all amplitudes divided by √N.
    pub fn scaled_to_norm(&self, n: C64) -> MieMode {
        let s = n.sqrt();
        MieMode { a_in: self.a_in / s, a_out: self.a_out / s, norm: Some(C64::new(1.0, 0.0)), ..*self }
    }
}

/// Mie resonance denominator. TM: (ε_in/n_in)ψ_l(x_in)ξ_l'(x_out) − (ε_out/n_out)ξ_l(x_out)ψ_l'(x_in);
/// TE: the same with μ in place of ε. Zeros are the mode frequencies.
pub fn mie_dispersion(geom: &SphereGeometry, l: usize, pol: Polarization, omega: C64) -> Result<C64> {
    let (ei, mi) = geom.material(true, omega)?;
    let (eo, mo) = geom.material(false, omega)?;
    let ni = (ei * mi).sqrt();
    let no = (eo * mo).sqrt();
    let (wi, wo) = match pol {
        Polarization::TM => (ei / ni, eo / no),
        Polarization::TE => (mi / ni, mo / no),
    };
    let k0a = omega * geom.a / C0;
    let (psi, dpsi) = riccati_psi(l, ni * k0a)?;
    let (xi, dxi) = riccati_xi(l, no * k0a)?;
    Ok(wi * psi * dxi - wo * xi * dpsi)
}

/// Newton iteration on the dispersion function from `guess`.
pub fn find_mie_qnm(geom: &SphereGeometry, l: usize, pol: Polarization, guess: C64) -> Result<MieMode> {
    let pole = |e: Error| match e {
        Error::EvaluationAtMaterialPole => Error::RootAtMaterialPole,
        other => other,
    };
    let mut w = guess;
    for _ in 0..100 {
        let h = 1e-7 * w.norm();
        let d0 = mie_dispersion(geom, l, pol, w).map_err(pole)?;
        let dp = mie_dispersion(geom, l, pol, w + h).map_err(pole)?;
        let dm = mie_dispersion(geom, l, pol, w - h).map_err(pole)?;
        let step = -d0 * 2.0 * h / (dp - dm);
        if !step.is_finite() {
            return Err(Error::NoConvergence { iterations: 100 });
        }
        w += step;
        if step.norm() < 1e-13 * w.norm() {
            if near_material_pole(geom, w) {
                return Err(Error::RootAtMaterialPole);
            }
            return MieMode::at(geom, l, pol, w);
        }
    }
    Err(Error::NoConvergence { iterations: 100 })
}

fn near_material_pole(geom: &SphereGeometry, w: C64) -> bool {
    match geom.interior.permittivity(w) {
        Ok(e) => e.norm() > 1e10,
        Err(_) => true,
    }
}

/// Newton seeds from local minima of |D| on a 60 × 40 grid covering
/// Re ω ∈ [0.3, 1.2]·ω_t and Im ω ∈ [−0.5, 0)·Re ω, with ω_t = 2πc/λ_target.
pub fn mie_scan_seeds(geom: &SphereGeometry, l: usize, pol: Polarization, lambda_target: f64) -> Vec<C64> {
    let (nr, ni) = (60usize, 40usize);
    let wt = 2.0 * core::f64::consts::PI * C0 / lambda_target;
    let point = |i: usize, j: usize| {
        let re = wt * (0.3 + 0.9 * i as f64 / (nr - 1) as f64);
        let im = -0.5 * re * (j as f64 + 0.5) / ni as f64;
        C64::new(re, im)
    };
    let mut vals = alloc::vec![f64::INFINITY; nr * ni];
    for i in 0..nr {
        for j in 0..ni {
            if let Ok(d) = mie_dispersion(geom, l, pol, point(i, j)) {
                if d.is_finite() {
                    vals[i * ni + j] = d.norm();
                }
            }
        }
    }
    let mut seeds = Vec::new();
    for i in 1..nr - 1 {
        for j in 1..ni - 1 {
            let v = vals[i * ni + j];
            let mut is_min = v.is_finite();
            for di in [-1i64, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let w = vals[(i as i64 + di) as usize * ni + (j as i64 + dj) as usize];
                    if w <= v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push(point(i, j));
            }
        }
    }
    seeds
}

/// All distinct roots reachable from the scan seeds, sorted by Re ω.
pub fn find_mie_qnms(
    geom: &SphereGeometry,
    l: usize,
    pol: Polarization,
    lambda_target: f64,
) -> Result<Vec<MieMode>> {
    let mut out: Vec<MieMode> = Vec::new();
    for seed in mie_scan_seeds(geom, l, pol, lambda_target) {
        let Ok(mode) = find_mie_qnm(geom, l, pol, seed) else { continue };
        if mode.omega.im >= 0.0 || mode.omega.re <= 0.0 {
            continue;
        }
        if out.iter().all(|m| (m.omega - mode.omega).norm() > 1e-8 * mode.omega.norm()) {
            out.push(mode);
        }
    }
    if out.is_empty() {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    out.sort_by(|a, b| a.omega.re.total_cmp(&b.omega.re));
    Ok(out)
}

/// Radial amplitudes of one multipole: the field is
/// (r̂·rad + θ̂·theta)·angular + φ̂·phi·Θ with angular = P_l(cosθ) on the r̂
/// component and Θ(θ) on the θ̂ component. For TM, `phi` is H_φ and
/// (`rad`, `theta`) belong to E; for TE, `phi` is E_φ and they belong to H.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub phi: C64,
    pub rad: C64,
    pub theta: C64,
    pub d_phi: C64,
    pub d_rad: C64,
    pub d_theta: C64,
}

/// Radial profile at a possibly complex radius; the region follows Re r.
pub fn mie_radial_profile(mode: &MieMode, geom: &SphereGeometry, r: C64) -> Result<RadialProfile> {
    let inside = r.re < geom.a;
    let (k, amp) = if inside { (mode.k_in, mode.a_in) } else { (mode.k_out, mode.a_out) };
    let (eps, mu) = geom.material(inside, mode.omega)?;
    let u = k * r;
    let (z, dz) = if inside { sph_bessel_j_d(mode.l, u)? } else { sph_hankel1_d(mode.l, u)? };
    let d2z = second_derivative(mode.l, u, z, dz);
    let w = mode.omega;
    // TM: E = (i/(ωε)) ∇×H ; TE: H = (−i/(ωμ)) ∇×E
    let c = match mode.pol {
        Polarization::TM => I / (w * EPS0 * eps),
        Polarization::TE => -I / (w * MU0 * mu),
    };
    let ll = (mode.l * (mode.l + 1)) as f64;
    let phi = amp * z;
    let d_phi = amp * k * dz;
    let rad = c * amp * ll * z / r;
    let d_rad = c * amp * ll * (k * dz / r - z / (r * r));
    // ∂r(r z)/r = k (z + u z')/u
    let g = (z + u * dz) / u;
    let dg = (2.0 * dz + u * d2z) / u - (z + u * dz) / (u * u);
    let theta = -c * amp * k * g;
    let d_theta = -c * amp * k * k * dg;
    Ok(RadialProfile { phi, rad, theta, d_phi, d_rad, d_theta })
}

/// (P_l(cosθ), Θ(θ) = sinθ P_l'(cosθ)).
pub fn angular(l: usize, theta: f64) -> (f64, f64) {
    let x = theta.cos();
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return (1.0, 0.0);
    }
    for n in 1..l {
        let p2 = ((2 * n + 1) as f64 * x * p1 - n as f64 * p0) / (n + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    // sinθ P_l' = l (P_{l−1} − x P_l)/sinθ, written without the division
    let s = theta.sin();
    let dp_sin = if s.abs() > 1e-8 {
        l as f64 * (p0 - x * p1) / s
    } else {
        0.0
    };
    (p1, dp_sin)
}

/// ∫ P_l² dΩ and ∫ Θ² dΩ over the unit sphere.
pub fn angular_integrals(l: usize) -> (f64, f64) {
    let f = 4.0 * core::f64::consts::PI / (2 * l + 1) as f64;
    (f, f * (l * (l + 1)) as f64)
}

type Vec3 = [C64; 3];

fn assemble(mode: &MieMode, p: &RadialProfile, theta: f64, deriv: bool) -> (Vec3, Vec3) {
    let (pl, th) = angular(mode.l, theta);
    let (phi, rad, tht) = if deriv { (p.d_phi, p.d_rad, p.d_theta) } else { (p.phi, p.rad, p.theta) };
    let zero = C64::new(0.0, 0.0);
    let primary = [zero, zero, phi * th];
    let secondary = [rad * pl, tht * th, zero];
    match mode.pol {
        Polarization::TM => (secondary, primary),
        Polarization::TE => (primary, secondary),
    }
}

/// (E, H) in spherical components (r, θ, φ). The fields do not depend on φ.
pub fn mie_field(mode: &MieMode, geom: &SphereGeometry, r: f64, theta: f64, _phi: f64) -> Result<(Vec3, Vec3)> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput("radius must be positive"));
    }
    let p = mie_radial_profile(mode, geom, C64::new(r, 0.0))?;
    Ok(assemble(mode, &p, theta, false))
}

/// (∂E/∂r, ∂H/∂r) in spherical components; at r = a the exterior side is used.
pub fn mie_radial_derivative(
    mode: &MieMode,
    geom: &SphereGeometry,
    r: f64,
    theta: f64,
    _phi: f64,
) -> Result<(Vec3, Vec3)> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput("radius must be positive"));
    }
    let p = mie_radial_profile(mode, geom, C64::new(r, 0.0))?;
    Ok(assemble(mode, &p, theta, true))
}

/// Largest relative jump of the tangential fields across r = a.
pub fn continuity_residual(mode: &MieMode, geom: &SphereGeometry) -> Result<f64> {
    let a = C64::new(geom.a, 0.0);
    let inner = mie_radial_profile(mode, geom, a * (1.0 - 1e-15))?;
    let outer = mie_radial_profile(mode, geom, a)?;
    let r1 = (inner.phi - outer.phi).norm() / outer.phi.norm();
    let r2 = (inner.theta - outer.theta).norm() / outer.theta.norm();
    Ok(r1.max(r2))
}
