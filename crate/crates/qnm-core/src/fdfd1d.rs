//! Finite-difference frequency-domain modes of a 1D slab between hard walls,
//! with complex-stretched absorbing layers next to the walls.
//!
//! Lengths are scaled by the slab thickness L and frequencies by c/L inside
//! the pencil; every public frequency is in rad/s. E_y sits on the interior
//! primal nodes (E = 0 on the walls) and H_z on the dual nodes, so the pencil
//! has N − 1 + N unknowns, plus P and J on the slab nodes for a Lorentz slab.
//!
//! The pencil (A, B) is complex symmetric with diagonal B, so left and right
//! eigenvectors coincide and the pairing is vᵀBv.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::consts::C0;
use crate::linalg::{eig, tridiag_solve, tridiag_sym_eigenvalues, CMat, Lu};
use crate::materials::MaterialModel;
use crate::slab1d::{slab_qnm, SlabGeometry};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const MAX_DIM: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of primal cells.
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::InvalidInput("grid needs x_max > x_min"));
        }
        if n < 50 {
            return Err(Error::GridTooCoarse);
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    /// Grid centred on a slab of thickness `l`, with `cells_per_slab` cells
    /// across it, a vacuum gap `pad` and an absorbing layer `thickness` on each
    /// side. Gap and layer are rounded to whole cells so that the slab faces
    /// and the layer onsets fall on nodes.
    pub fn symmetric(l: f64, cells_per_slab: usize, pad: f64, thickness: f64) -> Result<Self> {
        if cells_per_slab < 20 {
            return Err(Error::GridTooCoarse);
        }
        if cells_per_slab % 2 != 0 {
            return Err(Error::InvalidInput("cells_per_slab must be even"));
        }
        let dx = l / cells_per_slab as f64;
        let pad_cells = (pad / dx).round() as usize;
        let pml_cells = (thickness / dx).round() as usize;
        let half = cells_per_slab / 2 + pad_cells + pml_cells;
        let x = half as f64 * dx;
        Grid1D::new(-x, x, 2 * half)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    /// Positions of the N − 1 interior primal nodes.
    pub fn e_nodes(&self) -> Vec<f64> {
        (1..self.n).map(|i| self.x_min + i as f64 * self.dx()).collect()
    }

    /// Positions of the N dual nodes.
    pub fn h_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x_min + (i as f64 + 0.5) * self.dx()).collect()
    }
}

/// Absorbing layer of the given thickness against each wall. Inside it
/// d/dx → (1/s) d/dx with s = f; `ramp` > 0 blends s from 1 to f over that
/// distance with a smooth (C∞) step instead of switching abruptly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlProfile1D {
    pub thickness: f64,
    pub stretch: C64,
    pub ramp: f64,
}

impl PmlProfile1D {
    pub fn new(thickness: f64, stretch: C64) -> Self {
        PmlProfile1D { thickness, stretch, ramp: 0.0 }
    }

    pub fn with_ramp(self, ramp: f64) -> Self {
        PmlProfile1D { ramp, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.thickness >= 0.0) || !(self.ramp >= 0.0) || !(self.stretch.re > 0.0) || self.stretch.im < 0.0 {
            return Err(Error::InvalidInput("absorbing layer needs thickness ≥ 0, Re f > 0, Im f ≥ 0"));
        }
        Ok(())
    }
}

fn smooth_step(t: f64) -> f64 {
    let g = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let t = t.clamp(0.0, 1.0);
    g(t) / (g(t) + g(1.0 - t))
}

/// Slab of single-pole Lorentz material, ε(ω) = ε∞ − ε∞ωp²/(ω² − ω0² + iωγ), ω0 > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzSlab {
    pub l: f64,
    pub eps_inf: f64,
    pub omega_p: f64,
    pub omega_0: f64,
    pub gamma: f64,
}

impl LorentzSlab {
    pub fn new(l: f64, material: MaterialModel) -> Result<Self> {
        material.validate()?;
        match material {
            MaterialModel::Lorentz { eps_inf, omega_p, omega_0, gamma } if omega_0 > 0.0 && omega_p > 0.0 => {
                Ok(LorentzSlab { l, eps_inf, omega_p, omega_0, gamma })
            }
            _ => Err(Error::InvalidInput("auxiliary-field slab needs a Lorentz material with ω0 > 0")),
        }
    }

    pub fn material(&self) -> MaterialModel {
        MaterialModel::Lorentz {
            eps_inf: self.eps_inf,
            omega_p: self.omega_p,
            omega_0: self.omega_0,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure1D {
    Slab(SlabGeometry),
    Lorentz(LorentzSlab),
}

impl Structure1D {
    pub fn thickness(&self) -> f64 {
        match self {
            Structure1D::Slab(g) => g.l,
            Structure1D::Lorentz(s) => s.l,
        }
    }
}

/// Discretized problem (A − ωB)x = s in scaled units.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub a: CMat,
    pub b: Vec<C64>,
    pub ne: usize,
    pub nh: usize,
    pub naux: usize,
    /// L/c: multiply a scaled frequency by 1/time_unit to get rad/s.
    pub time_unit: f64,
    pub grid: Grid1D,
    pub pml: PmlProfile1D,
    pub structure: Structure1D,
    /// E-node positions in metres.
    pub x_e: Vec<f64>,
}

impl Pencil {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// Indices of E nodes outside the absorbing layers.
    pub fn unmapped_nodes(&self) -> Vec<usize> {
        let (lo, hi) = unmapped_bounds(&self.grid, &self.pml);
        let tol = 1e-9 * self.grid.dx();
        (0..self.ne).filter(|&i| self.x_e[i] > lo - tol && self.x_e[i] < hi + tol).collect()
    }

    /// Index of the E node nearest to x (metres).
    pub fn nearest_e_node(&self, x: f64) -> usize {
        let i = ((x - self.grid.x_min) / self.grid.dx()).round() as i64 - 1;
        i.clamp(0, self.ne as i64 - 1) as usize
    }

    fn is_reducible(&self) -> bool {
        self.naux == 0
    }
}

fn unmapped_bounds(grid: &Grid1D, pml: &PmlProfile1D) -> (f64, f64) {
    (grid.x_min + pml.thickness, grid.x_max - pml.thickness)
}

fn stretch_at(x: f64, grid: &Grid1D, pml: &PmlProfile1D) -> C64 {
    let (lo, hi) = unmapped_bounds(grid, pml);
    let depth = if x > hi { x - hi } else if x < lo { lo - x } else { 0.0 };
    let f = pml.stretch;
    if pml.ramp > 0.0 {
        return 1.0 + (f - 1.0) * smooth_step(depth / pml.ramp);
    }
    let tol = 1e-9 * grid.dx();
    if (x - hi).abs() < tol || (x - lo).abs() < tol {
        (1.0 + f) * 0.5
    } else if depth > 0.0 {
        f
    } else {
        C64::new(1.0, 0.0)
    }
}

/// Builds (A, B). Slab faces on nodes get the mean permittivity of the two sides.
pub fn assemble(structure: &Structure1D, grid: &Grid1D, pml: &PmlProfile1D) -> Result<Pencil> {
    pml.validate()?;
    let l = structure.thickness();
    let dx_m = grid.dx();
    if l / dx_m < 20.0 - 1e-9 {
        return Err(Error::GridTooCoarse);
    }
    let (lo, hi) = unmapped_bounds(grid, pml);
    if -0.5 * l < lo || 0.5 * l > hi {
        return Err(Error::InvalidInput("slab must lie outside the absorbing layers"));
    }
    let dx = dx_m / l;
    let x_e = grid.e_nodes();
    let x_h = grid.h_nodes();
    let ne = x_e.len();
    let nh = x_h.len();
    let tol = 1e-9 * dx_m;
    // fraction of each E node's cell inside the slab
    let inside: Vec<f64> = x_e
        .iter()
        .map(|&x| {
            if ((x.abs()) - 0.5 * l).abs() < tol {
                0.5
            } else if x.abs() < 0.5 * l {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let eps_slab = match structure {
        Structure1D::Slab(g) => g.n * g.n,
        Structure1D::Lorentz(s) => s.eps_inf,
    };
    let slab_nodes: Vec<usize> = match structure {
        Structure1D::Slab(_) => Vec::new(),
        Structure1D::Lorentz(_) => (0..ne).filter(|&i| inside[i] > 0.0).collect(),
    };
    let ns = slab_nodes.len();
    let dim = ne + nh + 2 * ns;
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim });
    }
    let mut a = CMat::zeros(dim, dim);
    let mut b = vec![C64::new(0.0, 0.0); dim];
    for i in 0..ne {
        // E_i couples to H_{i−½} (index i) and H_{i+½} (index i + 1)
        a[(i, ne + i)] = I;
        a[(ne + i, i)] = I;
        a[(i, ne + i + 1)] = -I;
        a[(ne + i + 1, i)] = -I;
        let eps = inside[i] * eps_slab + (1.0 - inside[i]);
        b[i] = eps * stretch_at(x_e[i], grid, pml) * dx;
    }
    for (j, &x) in x_h.iter().enumerate() {
        b[ne + j] = -stretch_at(x, grid, pml) * dx;
    }
    if let Structure1D::Lorentz(s) = structure {
        let tu = l / C0;
        let (einf, wp, w0, g) = (s.eps_inf, s.omega_p * tu, s.omega_0 * tu, s.gamma * tu);
        let bj = -1.0 / (einf * wp * wp);
        let bp = w0 * w0 / (einf * wp * wp);
        for (k, &e) in slab_nodes.iter().enumerate() {
            let p = ne + nh + k;
            let j = ne + nh + ns + k;
            let h = inside[e] * dx;
            a[(e, j)] = -I * h;
            a[(j, e)] = I * bj * einf * wp * wp * h;
            a[(p, j)] = I * bp * h;
            a[(j, p)] = -I * bj * w0 * w0 * h;
            a[(j, j)] = -I * bj * g * h;
            b[p] = C64::new(bp * h, 0.0);
            b[j] = C64::new(bj * h, 0.0);
        }
    }
    Ok(Pencil { a, b, ne, nh, naux: 2 * ns, time_unit: l / C0, grid: *grid, pml: *pml, structure: *structure, x_e })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    Qnm,
    Numerical,
    Unphysical,
    Unclassified,
}

impl ModeClass {
    pub fn name(&self) -> &'static str {
        match self {
            ModeClass::Qnm => "QNM",
            ModeClass::Numerical => "Numerical",
            ModeClass::Unphysical => "Unphysical",
            ModeClass::Unclassified => "Unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEigenMode {
    /// Eigenfrequency in rad/s.
    pub omega: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    pub class: ModeClass,
    pub excitation: Option<C64>,
}

#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub pencil: Pencil,
    pub modes: Vec<DiscreteEigenMode>,
}

/// Eigenvalues only, with the grid and layer they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: Grid1D,
    pub pml: PmlProfile1D,
    /// rad/s
    pub omegas: Vec<C64>,
}

impl Eigensystem {
    pub fn spectrum(&self) -> Spectrum {
        Spectrum { grid: self.pencil.grid, pml: self.pencil.pml, omegas: self.modes.iter().map(|m| m.omega).collect() }
    }

    /// Max |vₘᵀBvₙ − δₘₙ| over all pairs.
    pub fn pairing_error(&self) -> f64 {
        pairing_error(&self.modes, &self.pencil.b)
    }

    /// Applies a classification computed against another spectrum.
    pub fn set_classes(&mut self, classes: &[ModeClass]) {
        for (m, c) in self.modes.iter_mut().zip(classes) {
            m.class = *c;
        }
    }
}

/// Max |vₘᵀ W vₙ − δₘₙ| with diagonal weight W.
pub fn pairing_error(modes: &[DiscreteEigenMode], w: &[C64]) -> f64 {
    let bv: Vec<Vec<C64>> = modes.iter().map(|m| m.right.iter().zip(w).map(|(v, b)| v * b).collect()).collect();
    let mut worst = 0.0f64;
    for (i, mi) in modes.iter().enumerate() {
        for (j, bj) in bv.iter().enumerate() {
            let p: C64 = mi.left.iter().zip(bj).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p - want).norm());
        }
    }
    worst
}

fn bilinear(u: &[C64], b: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(b).zip(v).map(|((x, w), y)| x * w * y).sum()
}

/// Tridiagonal K = C B_H⁻¹ Cᵀ of the E-only problem K E = ω² B_E E: (diag, offdiag).
fn reduced_operator(p: &Pencil) -> (Vec<C64>, Vec<C64>) {
    let bh = &p.b[p.ne..p.ne + p.nh];
    let diag = (0..p.ne).map(|i| -1.0 / bh[i] - 1.0 / bh[i + 1]).collect();
    let off = (0..p.ne - 1).map(|i| 1.0 / bh[i + 1]).collect();
    (diag, off)
}

#[derive(Debug, Clone, Copy)]
enum BlockKind {
    Full,
    Even(usize),
    Odd(usize),
}

/// Symmetric tridiagonal piece K x = λ W x of the reduced problem.
struct Block {
    kind: BlockKind,
    k_d: Vec<C64>,
    k_e: Vec<C64>,
    w: Vec<C64>,
}

/// Centre E node when the pencil is mirror symmetric about it.
fn mirror_center(p: &Pencil) -> Option<usize> {
    if p.ne % 2 == 0 {
        return None;
    }
    let c = p.ne / 2;
    let same = |a: C64, b: C64| (a - b).norm() <= 1e-12 * a.norm();
    let be = &p.b[..p.ne];
    let bh = &p.b[p.ne..p.ne + p.nh];
    let sym = (1..=c).all(|k| same(be[c + k], be[c - k])) && (0..p.nh).all(|j| same(bh[j], bh[p.nh - 1 - j]));
    sym.then_some(c)
}

/// Splits into even and odd parity when the pencil is mirror symmetric.
/// For even parity the centre row is halved so that the block stays symmetric.
fn reduced_blocks(p: &Pencil) -> Vec<Block> {
    let (k, off) = reduced_operator(p);
    let be = p.b[..p.ne].to_vec();
    let Some(c) = mirror_center(p) else {
        return vec![Block { kind: BlockKind::Full, k_d: k, k_e: off, w: be }];
    };
    let mut ek = k[c..].to_vec();
    ek[0] *= 0.5;
    let mut ew = be[c..].to_vec();
    ew[0] *= 0.5;
    vec![
        Block { kind: BlockKind::Even(c), k_d: ek, k_e: off[c..].to_vec(), w: ew },
        Block { kind: BlockKind::Odd(c), k_d: k[c + 1..].to_vec(), k_e: off[c + 1..].to_vec(), w: be[c + 1..].to_vec() },
    ]
}

impl Block {
    fn values(&self) -> Result<Vec<C64>> {
        let n = self.k_d.len();
        let d: Vec<C64> = (0..n).map(|i| self.k_d[i] / self.w[i]).collect();
        let e: Vec<C64> = (0..n - 1).map(|i| self.k_e[i] / (self.w[i] * self.w[i + 1]).sqrt()).collect();
        match tridiag_sym_eigenvalues(&d, &e) {
            Ok(l) => Ok(l),
            Err(_) => {
                let m = CMat::from_fn(n, n, |i, j| {
                    if i == j {
                        d[i]
                    } else if j == i + 1 {
                        self.k_e[i] / self.w[i]
                    } else if i == j + 1 {
                        self.k_e[j] / self.w[i]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                Ok(eig(m, false, true)?.values)
            }
        }
    }

    /// W⁻¹K as a dense (Hessenberg) matrix.
    fn dense(&self) -> CMat {
        let n = self.k_d.len();
        CMat::from_fn(n, n, |i, j| {
            if i == j {
                self.k_d[i] / self.w[i]
            } else if j == i + 1 {
                self.k_e[i] / self.w[i]
            } else if i == j + 1 {
                self.k_e[j] / self.w[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    fn start_vector(&self) -> Vec<C64> {
        (0..self.k_d.len()).map(|i| C64::new(1.0 + 0.3 * (i as f64 * 0.7).sin(), 0.0)).collect()
    }

    /// Inverse iteration at shift λ followed by the Rayleigh quotient.
    fn polish(&self, lam: C64, mut x: Vec<C64>, steps: usize) -> (C64, Vec<C64>) {
        let n = self.k_d.len();
        let dl: Vec<C64> = (0..n - 1).map(|i| self.k_e[i] / self.w[i + 1]).collect();
        let du: Vec<C64> = (0..n - 1).map(|i| self.k_e[i] / self.w[i]).collect();
        let d: Vec<C64> = (0..n).map(|i| self.k_d[i] / self.w[i] - lam).collect();
        for _ in 0..steps {
            x = tridiag_solve(&dl, &d, &du, &x);
            let m = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for v in x.iter_mut() {
                *v /= m;
            }
        }
        let kx: Vec<C64> = (0..n)
            .map(|i| {
                let mut s = self.k_d[i] * x[i];
                if i + 1 < n {
                    s += self.k_e[i] * x[i + 1];
                }
                if i > 0 {
                    s += self.k_e[i - 1] * x[i - 1];
                }
                s
            })
            .collect();
        let num: C64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
        let den: C64 = x.iter().zip(&self.w).map(|(a, w)| a * a * w).sum();
        (num / den, x)
    }

    /// Eigenpairs: dense QR, then one inverse-iteration step and a Rayleigh
    /// quotient to polish each pair.
    fn pairs(&self) -> Result<Vec<(C64, Vec<C64>)>> {
        let e = eig(self.dense(), true, true)?;
        let right = e.right.expect("vectors requested");
        Ok(e.values.iter().enumerate().map(|(c, &lam)| self.polish(lam, right.col(c), 1)).collect())
    }

    fn expand(&self, x: &[C64], ne: usize) -> Vec<C64> {
        match self.kind {
            BlockKind::Full => x.to_vec(),
            BlockKind::Even(c) => {
                let mut e = vec![C64::new(0.0, 0.0); ne];
                for (k, v) in x.iter().enumerate() {
                    e[c + k] = *v;
                    e[c - k] = *v;
                }
                e
            }
            BlockKind::Odd(c) => {
                let mut e = vec![C64::new(0.0, 0.0); ne];
                for (k, v) in x.iter().enumerate() {
                    e[c + 1 + k] = *v;
                    e[c - 1 - k] = -*v;
                }
                e
            }
        }
    }
}

fn to_si(p: &Pencil, w: C64) -> C64 {
    w / p.time_unit
}

/// Eigenvalues only (rad/s). The non-dispersive case goes through the
/// tridiagonal ω² problem; the static ω = 0 mode is included.
pub fn spectrum(p: &Pencil) -> Result<Spectrum> {
    let mut omegas = Vec::with_capacity(p.dim());
    if p.is_reducible() {
        for blk in reduced_blocks(p) {
            for l in blk.values()? {
                let w = l.sqrt();
                omegas.push(to_si(p, w));
                omegas.push(to_si(p, -w));
            }
        }
        omegas.push(C64::new(0.0, 0.0));
    } else {
        let m = scaled_dense(p);
        for w in eig(m, false, false)?.values {
            omegas.push(to_si(p, w));
        }
    }
    sort_omegas(&mut omegas);
    Ok(Spectrum { grid: p.grid, pml: p.pml, omegas })
}

fn sort_omegas(w: &mut [C64]) {
    w.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn scaled_dense(p: &Pencil) -> CMat {
    let n = p.dim();
    CMat::from_fn(n, n, |i, j| p.a[(i, j)] / p.b[i])
}

/// Full eigendecomposition with vectors normalized to vᵀBv = 1.
pub fn eigensolve(p: &Pencil) -> Result<Eigensystem> {
    let (omegas, vecs) = if p.is_reducible() { reduced_eigen(p)? } else { dense_eigen(p)? };
    finish(p, omegas, vecs)
}

/// Same, always through the dense (A, B) pencil.
pub fn eigensolve_dense(p: &Pencil) -> Result<Eigensystem> {
    let (omegas, vecs) = dense_eigen(p)?;
    finish(p, omegas, vecs)
}

fn dense_eigen(p: &Pencil) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let e = eig(scaled_dense(p), true, false)?;
    let right = e.right.expect("vectors requested");
    let vecs = (0..p.dim()).map(|k| right.col(k)).collect();
    Ok((e.values, vecs))
}

/// Appends H = B_H⁻¹ Cᵀ E / ω to an E vector.
fn full_vector(p: &Pencil, e: &[C64], w: C64) -> Vec<C64> {
    let (ne, nh) = (p.ne, p.nh);
    let bh = &p.b[ne..ne + nh];
    let mut v = e.to_vec();
    v.extend((0..nh).map(|j| {
        let mut s = C64::new(0.0, 0.0);
        if j < ne {
            s += I * e[j];
        }
        if j >= 1 {
            s -= I * e[j - 1];
        }
        s / (bh[j] * w)
    }));
    v
}

fn reduced_eigen(p: &Pencil) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let (ne, nh) = (p.ne, p.nh);
    let mut omegas = Vec::with_capacity(2 * ne + 1);
    let mut vecs = Vec::with_capacity(2 * ne + 1);
    for blk in reduced_blocks(p) {
        for (lam, x) in blk.pairs()? {
            let ev = blk.expand(&x, ne);
            let root = lam.sqrt();
            for w in [root, -root] {
                omegas.push(w);
                vecs.push(full_vector(p, &ev, w));
            }
        }
    }
    let mut v0 = vec![C64::new(0.0, 0.0); ne];
    v0.extend(core::iter::repeat(C64::new(1.0, 0.0)).take(nh));
    omegas.push(C64::new(0.0, 0.0));
    vecs.push(v0);
    Ok((omegas, vecs))
}

/// Normalizes, re-orthogonalizes near-degenerate clusters and sorts.
fn finish(p: &Pencil, omegas: Vec<C64>, mut vecs: Vec<Vec<C64>>) -> Result<Eigensystem> {
    let n = omegas.len();
    let wscale = omegas.iter().map(|w| w.norm()).fold(0.0, f64::max).max(1e-300);
    let mut done = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| omegas[a].re.total_cmp(&omegas[b].re).then(omegas[a].im.total_cmp(&omegas[b].im)));
    for &a in &order {
        if done[a] {
            continue;
        }
        let tol = 1e-6 * omegas[a].norm().max(1e-9 * wscale);
        let cluster: Vec<usize> = order.iter().copied().filter(|&b| !done[b] && (omegas[b] - omegas[a]).norm() < tol).collect();
        for (k, &b) in cluster.iter().enumerate() {
            for &c in &cluster[..k] {
                let proj = bilinear(&vecs[c], &p.b, &vecs[b]);
                let vc = vecs[c].clone();
                for (x, y) in vecs[b].iter_mut().zip(&vc) {
                    *x -= proj * y;
                }
            }
            let nn = bilinear(&vecs[b], &p.b, &vecs[b]);
            let size: f64 = vecs[b].iter().zip(&p.b).map(|(v, w)| v.norm_sqr() * w.norm()).sum();
            if nn.norm() < 1e-8 * size {
                return Err(Error::DefectiveMatrix);
            }
            let s = nn.sqrt();
            for x in vecs[b].iter_mut() {
                *x /= s;
            }
            done[b] = true;
        }
    }
    let modes = order
        .into_iter()
        .map(|k| DiscreteEigenMode {
            omega: to_si(p, omegas[k]),
            right: vecs[k].clone(),
            left: vecs[k].clone(),
            class: ModeClass::Unclassified,
            excitation: None,
        })
        .collect();
    Ok(Eigensystem { pencil: p.clone(), modes })
}

/// Compares two spectra computed with different absorbing layers on grids
/// with the same spacing and the same unmapped window. Eigenvalues of the
/// first spectrum that reappear in the second within `tol` (relative) are
/// QNMs, the rest Numerical; Im ω > 0 is always Unphysical. Matching is
/// greedy on the smallest distance, one-to-one.
pub fn classify_modes(first: &Spectrum, second: &Spectrum, tol: f64) -> Result<Vec<ModeClass>> {
    let (a0, a1) = unmapped_bounds(&first.grid, &first.pml);
    let (b0, b1) = unmapped_bounds(&second.grid, &second.pml);
    let dx = first.grid.dx();
    let same = (dx - second.grid.dx()).abs() < 1e-9 * dx && (a0 - b0).abs() < 1e-6 * dx && (a1 - b1).abs() < 1e-6 * dx;
    if !same {
        return Err(Error::GridMismatch);
    }
    let a = &first.omegas;
    let b = &second.omegas;
    let scale = a.iter().map(|w| w.norm()).fold(0.0, f64::max);
    // candidate pairs, with b sorted by real part for a windowed search
    let mut bi: Vec<usize> = (0..b.len()).collect();
    bi.sort_by(|&x, &y| b[x].re.total_cmp(&b[y].re));
    let b_re: Vec<f64> = bi.iter().map(|&k| b[k].re).collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, w) in a.iter().enumerate() {
        let r = tol * w.norm();
        let start = b_re.partition_point(|&x| x < w.re - r);
        for (pos, &k) in bi.iter().enumerate().skip(start) {
            if b_re[pos] > w.re + r {
                break;
            }
            let d = (b[k] - w).norm();
            if d <= r {
                pairs.push((d, i, k));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    for (_, i, k) in pairs {
        if !used_a[i] && !used_b[k] {
            used_a[i] = true;
            used_b[k] = true;
        }
    }
    Ok(a
        .iter()
        .enumerate()
        .map(|(i, w)| {
            if w.im > 1e-12 * scale {
                ModeClass::Unphysical
            } else if used_a[i] {
                ModeClass::Qnm
            } else {
                ModeClass::Numerical
            }
        })
        .collect())
}

/// Sheet current of the given amplitude at x (metres), on the nearest E node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source1D {
    pub x: f64,
    pub amplitude: C64,
}

impl Source1D {
    pub fn at(x: f64) -> Self {
        Source1D { x, amplitude: C64::new(1.0, 0.0) }
    }

    /// Right-hand side s of (A − ωB)x = s.
    pub fn vector(&self, p: &Pencil) -> Vec<C64> {
        let mut s = vec![C64::new(0.0, 0.0); p.dim()];
        s[p.nearest_e_node(self.x)] = I * self.amplitude;
        s
    }
}

/// Solves (A − ωB)x = s at a real frequency (rad/s).
pub fn direct_solve(p: &Pencil, source: &Source1D, omega: f64) -> Result<Vec<C64>> {
    direct_solve_at(p, source, C64::new(omega, 0.0))
}

/// Same at a complex frequency.
pub fn direct_solve_at(p: &Pencil, source: &Source1D, omega: C64) -> Result<Vec<C64>> {
    let w = omega * p.time_unit;
    let n = p.dim();
    let m = CMat::from_fn(n, n, |i, j| if i == j { p.a[(i, j)] - w * p.b[i] } else { p.a[(i, j)] });
    let lu = Lu::new(m).map_err(|_| Error::SingularAtEigenvalue)?;
    if lu.pivot_ratio() < 1e-12 {
        return Err(Error::SingularAtEigenvalue);
    }
    Ok(lu.solve(&source.vector(p)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub alphas: Vec<C64>,
    pub field: Vec<C64>,
    /// max |x_modal − x_direct| / max |x_direct| over unmapped E nodes.
    pub error_vs_direct: f64,
}

/// Modal expansion x = Σ αₘ vₘ with αₘ = vₘᵀs/(ω̃ₘ − ω), using the modes in
/// `subset` (all modes when None), checked against the direct solve.
pub fn excitation_and_reconstruct(
    sys: &Eigensystem,
    source: &Source1D,
    omega: f64,
    subset: Option<&[usize]>,
) -> Result<Reconstruction> {
    let p = &sys.pencil;
    let s = source.vector(p);
    let k = p.nearest_e_node(source.x);
    let w = omega * p.time_unit;
    let alphas: Vec<C64> = sys
        .modes
        .iter()
        .map(|m| m.left[k] * s[k] / (m.omega * p.time_unit - w))
        .collect();
    let mut field = vec![C64::new(0.0, 0.0); p.dim()];
    let all: Vec<usize>;
    let use_idx = match subset {
        Some(ix) => ix,
        None => {
            all = (0..sys.modes.len()).collect();
            &all
        }
    };
    for &m in use_idx {
        let a = alphas[m];
        for (f, v) in field.iter_mut().zip(&sys.modes[m].right) {
            *f += a * v;
        }
    }
    let direct = direct_solve(p, source, omega)?;
    let nodes = p.unmapped_nodes();
    let num = nodes.iter().map(|&i| (field[i] - direct[i]).norm()).fold(0.0, f64::max);
    let den = nodes.iter().map(|&i| direct[i].norm()).fold(0.0, f64::max);
    Ok(Reconstruction { alphas, field, error_vs_direct: num / den })
}

/// Residue coefficient γ = −i∫J·Ẽ / ∫(Ẽ·∂(ωε)/∂ω Ẽ − H̃·H̃) (+ P, J terms)
/// of `mode`, with the mode scaled to Ẽ = 1 at the source node. Near the pole
/// the driven E field behaves as γẼ/(ω − ω̃) in scaled frequency units.
pub fn residue_gamma(p: &Pencil, mode: &DiscreteEigenMode, source: &Source1D) -> Result<C64> {
    let k = p.nearest_e_node(source.x);
    let peak = mode.right[..p.ne].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let e = mode.right[k];
    if e.norm() < 1e-8 * peak {
        return Err(Error::SourceOnNodalPoint);
    }
    let v: Vec<C64> = mode.right.iter().map(|x| x / e).collect();
    let norm = bilinear(&v, &p.b, &v);
    Ok(-I * source.amplitude / norm)
}

/// The single eigenpair whose frequency is closest to `target` (rad/s),
/// without diagonalizing the whole pencil when it is non-dispersive.
pub fn eigenmode_near(p: &Pencil, target: C64) -> Result<DiscreteEigenMode> {
    let t = target * p.time_unit;
    let (w, v) = if p.is_reducible() {
        let mut best: Option<(f64, usize, C64)> = None;
        let blocks = reduced_blocks(p);
        for (bi, blk) in blocks.iter().enumerate() {
            for lam in blk.values()? {
                let r = lam.sqrt();
                for w in [r, -r] {
                    let d = (w - t).norm();
                    if best.map_or(true, |b| d < b.0) {
                        best = Some((d, bi, w));
                    }
                }
            }
        }
        let (_, bi, w) = best.ok_or(Error::InvalidInput("empty pencil"))?;
        let blk = &blocks[bi];
        let (lam, x) = blk.polish(w * w, blk.start_vector(), 3);
        let w = if (lam.sqrt() - w).norm() <= (-lam.sqrt() - w).norm() { lam.sqrt() } else { -lam.sqrt() };
        (w, full_vector(p, &blk.expand(&x, p.ne), w))
    } else {
        let (ws, vs) = dense_eigen(p)?;
        let k = (0..ws.len())
            .min_by(|&a, &b| (ws[a] - t).norm().total_cmp(&(ws[b] - t).norm()))
            .ok_or(Error::InvalidInput("empty pencil"))?;
        (ws[k], vs[k].clone())
    };
    let nn = bilinear(&v, &p.b, &v);
    let size: f64 = v.iter().zip(&p.b).map(|(x, b)| x.norm_sqr() * b.norm()).sum();
    if nn.norm() < 1e-8 * size {
        return Err(Error::DefectiveMatrix);
    }
    let s = nn.sqrt();
    let v: Vec<C64> = v.iter().map(|x| x / s).collect();
    Ok(DiscreteEigenMode { omega: to_si(p, w), right: v.clone(), left: v, class: ModeClass::Unclassified, excitation: None })
}

/// One row of the revelation study: a layer angle and which slab modes it exposes.
#[derive(Debug, Clone, PartialEq)]
pub struct RevelationRow {
    pub tan_theta: f64,
    /// Slab mode indices m found as stable eigenvalues.
    pub revealed: Vec<i64>,
    /// Slab mode indices with tan θ > 1/(2Q).
    pub predicted: Vec<i64>,
}

/// Stretch f = g(1 + i tan θ) for the main run and g₂(1 + i tan θ) for the stability check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevelationSetting {
    pub tan_theta: f64,
    pub g: f64,
    pub g2: f64,
}

/// For each setting, slab modes 1..=m_max count as revealed when some
/// eigenvalue lies within 5% of ω̃ₘ and moves by less than 10⁻⁶ (relative)
/// when the stretch modulus changes.
pub fn revelation_study(
    geom: &SlabGeometry,
    grid: &Grid1D,
    layer: &PmlProfile1D,
    settings: &[RevelationSetting],
    m_max: usize,
) -> Result<Vec<RevelationRow>> {
    let structure = Structure1D::Slab(*geom);
    let mut rows = Vec::with_capacity(settings.len());
    for st in settings {
        if !(st.tan_theta > 0.0) {
            return Err(Error::InvalidInput("tan θ must be positive"));
        }
        let f = |g: f64| C64::new(g, g * st.tan_theta);
        let s1 = spectrum(&assemble(&structure, grid, &PmlProfile1D { stretch: f(st.g), ..*layer })?)?;
        let s2 = spectrum(&assemble(&structure, grid, &PmlProfile1D { stretch: f(st.g2), ..*layer })?)?;
        let mut revealed = Vec::new();
        let mut predicted = Vec::new();
        for m in 1..=m_max as i64 {
            let mode = slab_qnm(geom, m);
            if st.tan_theta > 1.0 / (2.0 * mode.q_factor()) {
                predicted.push(m);
            }
            let wa = mode.omega;
            let Some(w1) = nearest(&s1.omegas, wa) else { continue };
            let Some(w2) = nearest(&s2.omegas, w1) else { continue };
            if (w1 - wa).norm() < 0.05 * wa.norm() && (w2 - w1).norm() < 1e-6 * wa.norm() {
                revealed.push(m);
            }
        }
        rows.push(RevelationRow { tan_theta: st.tan_theta, revealed, predicted });
    }
    Ok(rows)
}

/// The element of `set` closest to `w`.
pub fn nearest(set: &[C64], w: C64) -> Option<C64> {
    set.iter().copied().min_by(|a, b| (a - w).norm().total_cmp(&(b - w).norm()))
}
