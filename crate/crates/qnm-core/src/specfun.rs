//! Spherical Bessel functions of complex argument and Gauss–Legendre quadrature.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest |Im z| for which exp(|Im z|) stays comfortably finite.
const MAX_IM: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫ f over the real interval [a, b].
    pub fn integrate<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, mut f: F) -> C64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        let mut acc = C64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(m + h * x) * *w;
        }
        acc * h
    }

    /// ∫ f over [a, b] split into `panels` equal panels.
    pub fn integrate_panels<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> C64 {
        let panels = panels.max(1);
        let step = (b - a) / panels as f64;
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = a + step * p as f64;
            let hi = if p + 1 == panels { b } else { lo + step };
            acc += self.integrate(lo, hi, &mut f);
        }
        acc
    }
}

/// Legendre P_n and P_n' at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss–Legendre rule on [-1, 1], 1 ≤ n ≤ 10⁴.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!((1..=10_000).contains(&n), "gauss_legendre: n out of range");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

fn check_im(z: C64) -> Result<()> {
    if !(z.im.abs() <= MAX_IM) || !z.re.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(())
}

/// j_0 .. j_lmax at z.
pub fn sph_bessel_j_all(lmax: usize, z: C64) -> Result<Vec<C64>> {
    check_im(z)?;
    let mut out = vec![C64::new(0.0, 0.0); lmax + 1];
    let az = z.norm();
    if az == 0.0 {
        out[0] = C64::new(1.0, 0.0);
        return Ok(out);
    }
    if az < 1e-3 {
        for (l, o) in out.iter_mut().enumerate() {
            *o = series_j(l, z);
        }
        return Ok(out);
    }
    let j0 = z.sin() / z;
    if (lmax as f64) <= az {
        out[0] = j0;
        if lmax >= 1 {
            out[1] = (j0 - z.cos()) / z;
        }
        for l in 1..lmax {
            out[l + 1] = (2 * l + 1) as f64 / z * out[l] - out[l - 1];
        }
        return Ok(out);
    }
    // Miller: downward from well above the turning point, normalized on j_0 or j_1.
    let start = lmax + 20 + (2.0 * az) as usize;
    let mut f = vec![C64::new(0.0, 0.0); start + 2];
    f[start] = C64::new(1.0, 0.0);
    for l in (1..=start).rev() {
        f[l - 1] = (2 * l + 1) as f64 / z * f[l] - f[l + 1];
        // keep magnitudes well inside the range where complex division is safe
        if f[l - 1].norm() > 1e120 {
            for v in f.iter_mut().skip(l - 1) {
                *v *= 1e-120;
            }
        }
    }
    let j1 = (j0 - z.cos()) / z;
    let scale = if j0.norm() >= j1.norm() { j0 / f[0] } else { j1 / f[1] };
    for l in 0..=lmax {
        out[l] = f[l] * scale;
    }
    Ok(out)
}

fn series_j(l: usize, z: C64) -> C64 {
    let mut df = 1.0;
    for k in 0..=l {
        df *= (2 * k + 1) as f64;
    }
    let lead = z.powu(l as u32) / df;
    let q = -0.5 * z * z;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..40 {
        term = term * q / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// h⁽¹⁾_0 .. h⁽¹⁾_lmax at z (upward recurrence).
pub fn sph_hankel1_all(lmax: usize, z: C64) -> Result<Vec<C64>> {
    check_im(z)?;
    if z.norm() == 0.0 {
        return Err(Error::InvalidInput("hankel function at z = 0"));
    }
    let e = (I * z).exp();
    let mut out = vec![C64::new(0.0, 0.0); lmax + 1];
    out[0] = -I * e / z;
    if lmax >= 1 {
        out[1] = -e * (z + I) / (z * z);
    }
    for l in 1..lmax {
        out[l + 1] = (2 * l + 1) as f64 / z * out[l] - out[l - 1];
    }
    Ok(out)
}

pub fn sph_bessel_j(l: usize, z: C64) -> Result<C64> {
    Ok(sph_bessel_j_all(l, z)?[l])
}

pub fn sph_hankel1(l: usize, z: C64) -> Result<C64> {
    Ok(sph_hankel1_all(l, z)?[l])
}

/// y_l = (h⁽¹⁾_l − j_l)/i.
pub fn sph_bessel_y(l: usize, z: C64) -> Result<C64> {
    Ok((sph_hankel1(l, z)? - sph_bessel_j(l, z)?) / I)
}

fn derivative(l: usize, z: C64, f: &[C64]) -> C64 {
    if l == 0 {
        -f[1]
    } else {
        f[l - 1] - (l + 1) as f64 * f[l] / z
    }
}

/// (j_l, j_l') at z.
pub fn sph_bessel_j_d(l: usize, z: C64) -> Result<(C64, C64)> {
    let f = sph_bessel_j_all(l + 1, z)?;
    if z.norm() == 0.0 {
        return Ok((f[l], if l == 1 { C64::new(1.0 / 3.0, 0.0) } else { C64::new(0.0, 0.0) }));
    }
    Ok((f[l], derivative(l, z, &f)))
}

/// (h_l, h_l') at z.
pub fn sph_hankel1_d(l: usize, z: C64) -> Result<(C64, C64)> {
    let f = sph_hankel1_all(l + 1, z)?;
    Ok((f[l], derivative(l, z, &f)))
}

/// Derivatives (j_l', h⁽¹⁾_l').
pub fn sph_bessel_derivatives(l: usize, z: C64) -> Result<(C64, C64)> {
    Ok((sph_bessel_j_d(l, z)?.1, sph_hankel1_d(l, z)?.1))
}

/// Second derivative of any spherical Bessel function from the ODE.
pub fn second_derivative(l: usize, z: C64, f: C64, df: C64) -> C64 {
    let ll = (l * (l + 1)) as f64;
    -2.0 * df / z - (1.0 - ll / (z * z)) * f
}

/// Riccati–Bessel ψ_l = z j_l and ψ_l'.
pub fn riccati_psi(l: usize, z: C64) -> Result<(C64, C64)> {
    let (j, dj) = sph_bessel_j_d(l, z)?;
    Ok((z * j, j + z * dj))
}

/// Riccati–Hankel ξ_l = z h⁽¹⁾_l and ξ_l'.
pub fn riccati_xi(l: usize, z: C64) -> Result<(C64, C64)> {
    let (h, dh) = sph_hankel1_d(l, z)?;
    Ok((z * h, h + z * dh))
}
