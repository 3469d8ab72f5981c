//! Dense complex linear algebra: LU with partial pivoting, Hessenberg + shifted QR
//! eigensolver with right and left eigenvectors, and an O(n²) eigenvalue-only
//! solver for complex symmetric tridiagonal matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ULP: f64 = f64::EPSILON;
const SAFMIN: f64 = f64::MIN_POSITIVE;

#[inline]
fn cabs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(ZERO, |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |entry|.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unconjugated product xᵀy.
pub fn dotu(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a * b)
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMat,
    piv: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl Lu {
    pub fn new(mut a: CMat) -> Result<Lu> {
        let n = a.rows;
        if n != a.cols {
            return Err(Error::InvalidInput("LU of a non-square matrix"));
        }
        let mut piv: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularAtEigenvalue);
            }
            min_pivot = min_pivot.min(best);
            max_pivot = max_pivot.max(best);
            if p != k {
                piv.swap(p, k);
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
            }
            let inv = ONE / a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] * inv;
                if f == ZERO {
                    continue;
                }
                a[(i, k)] = f;
                let (top, bottom) = a.data.split_at_mut(i * n);
                let rk = &top[k * n + k + 1..k * n + n];
                let ri = &mut bottom[k + 1..n];
                for (x, y) in ri.iter_mut().zip(rk) {
                    *x -= f * y;
                }
            }
        }
        Ok(Lu { lu: a, piv, min_pivot, max_pivot })
    }

    /// Ratio of the smallest to the largest pivot, a cheap singularity indicator.
    pub fn pivot_ratio(&self) -> f64 {
        self.min_pivot / self.max_pivot
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.rows;
        let mut x: Vec<C64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let r = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= r[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let r = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= r[j] * x[j];
            }
            x[i] = s / r[i];
        }
        x
    }
}

/// Reduces `a` to upper Hessenberg form by Householder reflections; returns Q with A = Q H Qᴴ.
pub fn hessenberg(a: &mut CMat, want_q: bool) -> Option<CMat> {
    let n = a.rows;
    let mut q = if want_q { Some(CMat::identity(n)) } else { None };
    if n < 3 {
        return q;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        // reflector annihilating a[k+2.., k]
        let alpha = a[(k + 1, k)];
        let mut xnorm2 = 0.0;
        for i in k + 2..n {
            xnorm2 += a[(i, k)].norm_sqr();
        }
        if xnorm2 == 0.0 {
            continue;
        }
        let norm = (alpha.norm_sqr() + xnorm2).sqrt();
        let phase = if alpha.norm() == 0.0 { ONE } else { alpha / alpha.norm() };
        let beta = -phase * norm;
        // v = x - beta e1, H = I - 2 v vᴴ / (vᴴ v)
        v[k + 1] = alpha - beta;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        // left: A ← (I − τ v vᴴ) A over rows k+1.., columns k..
        for j in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * a[(i, j)];
            }
            s *= tau;
            for i in k + 1..n {
                let vi = v[i];
                a[(i, j)] -= s * vi;
            }
        }
        // right: A ← A (I − τ v vᴴ) over all rows, columns k+1..
        for i in 0..n {
            let row = a.row_mut(i);
            let mut s = ZERO;
            for j in k + 1..n {
                s += row[j] * v[j];
            }
            s *= tau;
            for j in k + 1..n {
                row[j] -= s * v[j].conj();
            }
        }
        a[(k + 1, k)] = beta;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let row = q.row_mut(i);
                let mut s = ZERO;
                for j in k + 1..n {
                    s += row[j] * v[j];
                }
                s *= tau;
                for j in k + 1..n {
                    row[j] -= s * v[j].conj();
                }
            }
        }
    }
    q
}

/// Unitary rotation G = [[c, s], [−s̄, c]] with G·[a, b]ᵀ = [r, 0]ᵀ.
#[inline]
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    if b == ZERO {
        return (1.0, ZERO, a);
    }
    if a == ZERO {
        let nb = b.norm();
        return (0.0, b.conj() / nb, C64::new(nb, 0.0));
    }
    let na = a.norm();
    let nb = b.norm();
    let scale = na.max(nb);
    let nu = scale * ((na / scale).powi(2) + (nb / scale).powi(2)).sqrt();
    let phase = a / na;
    (na / nu, phase * b.conj() / nu, phase * nu)
}

/// Schur decomposition of an upper Hessenberg matrix by single-shift complex QR.
/// On return `h` is upper triangular (when `want_t`) and `z` accumulates the
/// unitary factor. Returns the eigenvalues in diagonal order.
pub fn hessenberg_qr(h: &mut CMat, mut z: Option<&mut CMat>, want_t: bool) -> Result<Vec<C64>> {
    let n = h.rows;
    let mut w = vec![ZERO; n];
    if n == 0 {
        return Ok(w);
    }
    let smlnum = SAFMIN * (n as f64 / ULP);
    let itmax = 30 * n.max(10);
    let mut ihi = n as isize - 1;
    let ilo0 = 0usize;
    while ihi >= 0 {
        let i = ihi as usize;
        let mut l = ilo0;
        let mut converged = false;
        for its in 0..=itmax {
            // find a negligible subdiagonal
            let mut k = i;
            while k > l {
                let hk = cabs1(h[(k, k - 1)]);
                if hk <= smlnum {
                    break;
                }
                let mut tst = cabs1(h[(k - 1, k - 1)]) + cabs1(h[(k, k)]);
                if tst == 0.0 {
                    if k >= 2 {
                        tst += cabs1(h[(k - 1, k - 2)]);
                    }
                    if k + 1 < n {
                        tst += cabs1(h[(k + 1, k)]);
                    }
                }
                if hk <= ULP * tst {
                    let ab = hk.max(cabs1(h[(k - 1, k)]));
                    let ba = hk.min(cabs1(h[(k - 1, k)]));
                    let d = h[(k - 1, k - 1)] - h[(k, k)];
                    let aa = cabs1(h[(k, k)]).max(cabs1(d));
                    let bb = cabs1(h[(k, k)]).min(cabs1(d));
                    let s = aa + ab;
                    if ba * (ab / s) <= smlnum.max(ULP * (bb * (aa / s))) {
                        break;
                    }
                }
                k -= 1;
            }
            l = k;
            if l > ilo0 {
                h[(l, l - 1)] = ZERO;
            }
            if l >= i {
                converged = true;
                break;
            }
            if its == itmax {
                break;
            }
            // shift
            let t = if its == 10 {
                h[(l, l)] + 0.75 * cabs1(h[(l + 1, l)])
            } else if its == 20 {
                h[(i, i)] + 0.75 * cabs1(h[(i, i - 1)])
            } else {
                let mut t = h[(i, i)];
                let u = h[(i - 1, i)].sqrt() * h[(i, i - 1)].sqrt();
                let s = cabs1(u);
                if s != 0.0 {
                    let x = 0.5 * (h[(i - 1, i - 1)] - t);
                    let sx = cabs1(x);
                    let s = s.max(cabs1(x));
                    let mut y = s * ((x / s) * (x / s) + (u / s) * (u / s)).sqrt();
                    if sx > 0.0 {
                        let xs = x / sx;
                        if xs.re * y.re + xs.im * y.im < 0.0 {
                            y = -y;
                        }
                    }
                    t -= u * (u / (x + y));
                }
                t
            };
            // single-shift sweep
            let i1 = if want_t { 0 } else { l };
            let i2 = if want_t { n - 1 } else { i };
            for k in l..i {
                let (a, b) = if k == l {
                    (h[(l, l)] - t, h[(l + 1, l)])
                } else {
                    (h[(k, k - 1)], h[(k + 1, k - 1)])
                };
                let (c, s, r) = givens(a, b);
                if k > l {
                    h[(k, k - 1)] = r;
                    h[(k + 1, k - 1)] = ZERO;
                }
                let sc = s.conj();
                // rows k, k+1
                {
                    let cols = h.cols;
                    let (top, bottom) = h.data.split_at_mut((k + 1) * cols);
                    let rk = &mut top[k * cols..];
                    let rk1 = &mut bottom[..cols];
                    for j in k..=i2 {
                        let x = rk[j];
                        let y = rk1[j];
                        rk[j] = c * x + s * y;
                        rk1[j] = c * y - sc * x;
                    }
                }
                // columns k, k+1
                let last = (k + 2).min(i);
                for r in i1..=last {
                    let x = h[(r, k)];
                    let y = h[(r, k + 1)];
                    h[(r, k)] = c * x + sc * y;
                    h[(r, k + 1)] = c * y - s * x;
                }
                if let Some(z) = z.as_deref_mut() {
                    for r in 0..n {
                        let row = z.row_mut(r);
                        let x = row[k];
                        let y = row[k + 1];
                        row[k] = c * x + sc * y;
                        row[k + 1] = c * y - s * x;
                    }
                }
            }
        }
        if !converged {
            return Err(Error::NoConvergence { iterations: itmax });
        }
        w[i] = h[(i, i)];
        ihi = i as isize - 1;
    }
    Ok(w)
}

/// Right and left eigenvectors of an upper triangular T.
/// Right: columns x with T x = λ x. Left: rows u with u T = λ u, returned as columns uᵀ.
fn triangular_vectors(t: &CMat, want_left: bool) -> (CMat, Option<CMat>) {
    let n = t.rows;
    let tnorm = t.max_abs().max(SAFMIN);
    let smin_base = (ULP * tnorm).max(SAFMIN * (n as f64 / ULP));
    let mut x = CMat::zeros(n, n);
    let mut buf = vec![ZERO; n];
    for k in 0..n {
        let lam = t[(k, k)];
        let smin = (ULP * lam.norm()).max(smin_base);
        for v in buf.iter_mut() {
            *v = ZERO;
        }
        buf[k] = ONE;
        for i in (0..k).rev() {
            let row = t.row(i);
            let mut s = ZERO;
            for j in i + 1..=k {
                s += row[j] * buf[j];
            }
            let mut d = row[i] - lam;
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            buf[i] = -s / d;
            let m = buf[i].norm();
            if m > 1e100 {
                for v in buf.iter_mut().take(k + 1) {
                    *v /= m;
                }
            }
        }
        for i in 0..=k {
            x[(i, k)] = buf[i];
        }
    }
    if !want_left {
        return (x, None);
    }
    let mut u = CMat::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        let smin = (ULP * lam.norm()).max(smin_base);
        for v in buf.iter_mut() {
            *v = ZERO;
        }
        buf[k] = ONE;
        for j in k + 1..n {
            let mut s = ZERO;
            for i in k..j {
                s += buf[i] * t[(i, j)];
            }
            let mut d = t[(j, j)] - lam;
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            buf[j] = -s / d;
            let m = buf[j].norm();
            if m > 1e100 {
                for v in buf.iter_mut().skip(k) {
                    *v /= m;
                }
            }
        }
        for j in k..n {
            u[(j, k)] = buf[j];
        }
    }
    (x, Some(u))
}

/// Eigen-decomposition of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Right eigenvectors as columns, unit 2-norm.
    pub right: Option<CMat>,
    /// Left eigenvectors y as columns with yᵀA = λyᵀ, unit 2-norm.
    pub left: Option<CMat>,
}

/// Eigenvalues (and optionally vectors) of a square matrix.
/// `hessenberg_input` skips the reduction when `a` is already upper Hessenberg.
pub fn eig(mut a: CMat, want_vectors: bool, hessenberg_input: bool) -> Result<Eigen> {
    let n = a.rows;
    if n != a.cols {
        return Err(Error::InvalidInput("eigenvalues of a non-square matrix"));
    }
    if !a.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry"));
    }
    let mut q = if hessenberg_input {
        if want_vectors { Some(CMat::identity(n)) } else { None }
    } else {
        hessenberg(&mut a, want_vectors)
    };
    let values = hessenberg_qr(&mut a, q.as_mut(), want_vectors)?;
    if !want_vectors {
        return Ok(Eigen { values, right: None, left: None });
    }
    let z = q.unwrap();
    let (x, u) = triangular_vectors(&a, true);
    let mut right = z.matmul(&x);
    // y = conj(Z) uᵀ
    let zc = CMat::from_fn(n, n, |i, j| z[(i, j)].conj());
    let mut left = zc.matmul(&u.unwrap());
    for m in [&mut right, &mut left] {
        for j in 0..n {
            let c = m.col(j);
            let nr = vec_norm(&c);
            if nr > 0.0 {
                let inv = 1.0 / nr;
                for i in 0..n {
                    m[(i, j)] *= inv;
                }
            }
        }
    }
    Ok(Eigen { values, right: Some(right), left: Some(left) })
}

/// Eigenvalues of the complex symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (e[i] couples i and i+1), by implicit QL with complex
/// orthogonal rotations. Fails with `NoConvergence` on breakdown so callers
/// can fall back to the dense path.
pub fn tridiag_sym_eigenvalues(d: &[C64], e: &[C64]) -> Result<Vec<C64>> {
    let n = d.len();
    assert!(e.len() + 1 == n || (n == 0 && e.is_empty()));
    let mut d = d.to_vec();
    let mut e: Vec<C64> = e.iter().copied().chain(core::iter::once(ZERO)).collect();
    let scale = d.iter().chain(e.iter()).fold(0.0f64, |m, z| m.max(z.norm())).max(SAFMIN);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].norm() + d[m + 1].norm();
                if e[m].norm() <= ULP * dd.max(1e-3 * ULP * scale) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence { iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + ONE).sqrt();
            // choose the sign that maximizes |g ± r|
            let gp = g + r;
            let gm = g - r;
            let denom = if gp.norm() >= gm.norm() { gp } else { gm };
            g = d[m] - d[l] + e[l] / denom;
            let mut s = ONE;
            let mut c = ONE;
            let mut p = ZERO;
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r.norm() <= 1e3 * SAFMIN {
                    d[i + 1] -= p;
                    e[m] = ZERO;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if !(s.norm() < 1e8 && c.norm() < 1e8) {
                    return Err(Error::NoConvergence { iterations: iter });
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = ZERO;
        }
    }
    if !d.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    Ok(d)
}

/// Solves the tridiagonal system with sub-diagonal `dl` (dl[i] at row i+1,
/// column i), diagonal `d` and super-diagonal `du`, by Gaussian elimination
/// with partial pivoting. Exactly zero pivots are replaced by a tiny value,
/// which is what inverse iteration wants.
pub fn tridiag_solve(dl: &[C64], d: &[C64], du: &[C64], rhs: &[C64]) -> Vec<C64> {
    let n = d.len();
    assert!(rhs.len() == n && dl.len() + 1 == n.max(1) && du.len() + 1 == n.max(1));
    let scale = d.iter().chain(dl).chain(du).fold(0.0f64, |m, z| m.max(z.norm())).max(SAFMIN);
    let tiny = C64::new(ULP * scale, 0.0);
    // row i holds (a, b, c) in columns i, i+1, i+2 after elimination
    let mut a = d.to_vec();
    let mut b: Vec<C64> = du.iter().copied().chain(core::iter::once(ZERO)).collect();
    let mut c = vec![ZERO; n];
    let mut x = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        let low = dl[i];
        let last = i + 2 == n;
        if cabs1(low) > cabs1(a[i]) {
            let (ai, bi) = (a[i], b[i]);
            let (d1, u1) = (a[i + 1], if last { ZERO } else { b[i + 1] });
            a[i] = low;
            b[i] = d1;
            c[i] = u1;
            let m = ai / low;
            a[i + 1] = bi - m * d1;
            if !last {
                b[i + 1] = -m * u1;
            }
            x.swap(i, i + 1);
            let xi = x[i];
            x[i + 1] -= m * xi;
        } else {
            if a[i] == ZERO {
                a[i] = tiny;
            }
            let m = low / a[i];
            a[i + 1] -= m * b[i];
            let xi = x[i];
            x[i + 1] -= m * xi;
        }
    }
    if n > 0 && a[n - 1] == ZERO {
        a[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        if i + 1 < n {
            s -= b[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= c[i] * x[i + 2];
        }
        x[i] = s / a[i];
    }
    x
}
