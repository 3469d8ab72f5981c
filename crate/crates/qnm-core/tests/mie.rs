use qnm_core::consts::{omega_from_wavelength, C0, EPS0, MU0};
use qnm_core::mie::*;
use qnm_core::specfun::{riccati_psi, riccati_xi};
use qnm_core::{MaterialModel, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn dielectric() -> SphereGeometry {
    SphereGeometry::new(500e-9, MaterialModel::dielectric(4.0)).unwrap()
}

fn silver() -> SphereGeometry {
    SphereGeometry::new(40e-9, MaterialModel::silver_arc10()).unwrap()
}

fn lowest(geom: &SphereGeometry, lambda: f64, pol: Polarization) -> MieMode {
    find_mie_qnms(geom, 1, pol, lambda).unwrap()[0]
}

/// (1/2πi)∮ ω^p D'/D dω around a rectangle, with D' from a central difference.
fn contour_moment(geom: &SphereGeometry, pol: Polarization, lo: C64, hi: C64, p: i32) -> C64 {
    let corners = [lo, C64::new(hi.re, lo.im), hi, C64::new(lo.re, hi.im), lo];
    let rule = qnm_core::specfun::gauss_legendre(40);
    let mut total = C64::new(0.0, 0.0);
    for s in 0..4 {
        let (a, b) = (corners[s], corners[s + 1]);
        total += rule.integrate_panels(0.0, 1.0, 8, |t| {
            let w = a + (b - a) * t;
            let h = 1e-6 * w.norm();
            let d = mie_dispersion(geom, 1, pol, w).unwrap();
            let dd = (mie_dispersion(geom, 1, pol, w + h).unwrap()
                - mie_dispersion(geom, 1, pol, w - h).unwrap())
                / (2.0 * h);
            w.powi(p) * dd / d * (b - a)
        });
    }
    total / (2.0 * std::f64::consts::PI * I)
}

#[test]
fn dielectric_root_matches_contour_oracle() {
    let g = dielectric();
    let m = lowest(&g, 1400e-9, Polarization::TM);
    let lam = m.wavelength() * 1e9;
    assert!((lam - C64::new(1373.60, 217.00)).norm() < 0.05, "{lam}");
    assert!((m.q_factor() - 3.165).abs() < 2e-3);
    let box_lo = m.omega * C64::new(0.9, 0.0) + C64::new(0.0, -0.1 * m.omega.re);
    let box_hi = m.omega * C64::new(1.1, 0.0) + C64::new(0.0, 0.1 * m.omega.re);
    let count = contour_moment(&g, Polarization::TM, box_lo, box_hi, 0);
    assert!((count - 1.0).norm() < 1e-6, "{count}");
    let centroid = contour_moment(&g, Polarization::TM, box_lo, box_hi, 1);
    assert!((centroid - m.omega).norm() < 1e-8 * m.omega.norm());
    // Newton from a different seed lands on the same root
    let again = find_mie_qnm(&g, 1, Polarization::TM, m.omega * C64::new(1.03, 0.02)).unwrap();
    assert!((again.omega - m.omega).norm() < 1e-13 * m.omega.norm());
}

#[test]
fn silver_dipole_near_calibration_target() {
    let g = silver();
    let m = lowest(&g, 390e-9, Polarization::TM);
    let lam = m.wavelength() * 1e9;
    assert!((lam - C64::new(390.0, 32.0)).norm() < 0.5, "{lam}");
    assert!(m.omega.im < 0.0);
}

#[test]
fn roots_are_roots_and_have_twins() {
    for (g, lam) in [(dielectric(), 1400e-9), (silver(), 390e-9)] {
        let m = lowest(&g, lam, Polarization::TM);
        let (eo, mo) = g.material(false, m.omega).unwrap();
        let (ei, mi) = g.material(true, m.omega).unwrap();
        let ni = (ei * mi).sqrt();
        let no = (eo * mo).sqrt();
        let x = m.omega * g.a / C0;
        let (psi, dpsi) = riccati_psi(1, ni * x).unwrap();
        let (xi, dxi) = riccati_xi(1, no * x).unwrap();
        let scale = (ei / ni * psi * dxi).norm() + (eo / no * xi * dpsi).norm();
        let d = mie_dispersion(&g, 1, Polarization::TM, m.omega).unwrap();
        assert!(d.norm() < 1e-12 * scale);
        let twin = -m.omega.conj();
        assert!(mie_dispersion(&g, 1, Polarization::TM, twin).unwrap().norm() < 1e-12 * scale);
        let t = find_mie_qnm(&g, 1, Polarization::TM, twin * 1.01).unwrap();
        assert!((t.omega - twin).norm() < 1e-12 * twin.norm());
    }
}

#[test]
fn tangential_fields_are_continuous() {
    for (g, lam) in [(dielectric(), 1400e-9), (silver(), 390e-9)] {
        let m = lowest(&g, lam, Polarization::TM);
        assert!(continuity_residual(&m, &g).unwrap() < 1e-10);
        for k in 0..20 {
            let th = 0.05 + 3.0 * k as f64 / 20.0;
            let (ei, hi) = mie_field(&m, &g, g.a * (1.0 - 1e-14), th, 0.0).unwrap();
            let (eo, ho) = mie_field(&m, &g, g.a * (1.0 + 1e-14), th, 0.0).unwrap();
            let s = eo[1].norm() + ho[2].norm() / (C0 * EPS0);
            assert!((ei[1] - eo[1]).norm() < 1e-10 * s);
            assert!((hi[2] - ho[2]).norm() / (C0 * EPS0) < 1e-10 * s);
            // normal D is continuous as well
            let (epi, _) = g.material(true, m.omega).unwrap();
            assert!((epi * ei[0] - eo[0]).norm() < 1e-9 * eo[0].norm().max(1e-30 + s * 1e-3));
        }
    }
}

fn curl_and_div(
    m: &MieMode,
    g: &SphereGeometry,
    r: f64,
    th: f64,
) -> (C64, [C64; 3], [C64; 3], [C64; 3], [C64; 3]) {
    // spherical-coordinate differences, axisymmetric fields
    let hr = 1e-4 * r;
    let ht = 1e-4;
    let f = |r: f64, t: f64| mie_field(m, g, r, t, 0.0).unwrap();
    let (e, h) = f(r, th);
    let (erp, hrp) = f(r + hr, th);
    let (erm, hrm) = f(r - hr, th);
    let (etp, htp) = f(r, th + ht);
    let (etm, htm) = f(r, th - ht);
    let (s, sp, sm) = (th.sin(), (th + ht).sin(), (th - ht).sin());
    let div = ((r + hr).powi(2) * erp[0] - (r - hr).powi(2) * erm[0]) / (2.0 * hr * r * r)
        + (sp * etp[1] - sm * etm[1]) / (2.0 * ht * r * s);
    let curl = |vrp: [C64; 3], vrm: [C64; 3], vtp: [C64; 3], vtm: [C64; 3]| {
        let cr = (sp * vtp[2] - sm * vtm[2]) / (2.0 * ht * r * s);
        let ct = -((r + hr) * vrp[2] - (r - hr) * vrm[2]) / (2.0 * hr * r);
        let cp = ((r + hr) * vrp[1] - (r - hr) * vrm[1]) / (2.0 * hr * r) - (vtp[0] - vtm[0]) / (2.0 * ht * r);
        [cr, ct, cp]
    };
    (div, curl(erp, erm, etp, etm), curl(hrp, hrm, htp, htm), e, h)
}

#[test]
fn fields_solve_maxwell() {
    for pol in [Polarization::TM, Polarization::TE] {
        let g = dielectric();
        let m = lowest(&g, 1400e-9, pol);
        assert!(continuity_residual(&m, &g).unwrap() < 1e-10);
        for &(r, th) in &[(0.3e-6, 0.7), (0.45e-6, 2.0), (0.8e-6, 1.1), (2.0e-6, 0.4)] {
            let (div, ce, ch, e, h) = curl_and_div(&m, &g, r, th);
            let (eps, _) = g.material(r < g.a, m.omega).unwrap();
            let en: f64 = e.iter().map(|v| v.norm()).sum();
            let hn: f64 = h.iter().map(|v| v.norm()).sum();
            assert!(div.norm() < 1e-6 * en / r, "div {div}");
            for c in 0..3 {
                // ∇×E = iωμ0 H, ∇×H = −iωε E
                let want_e = I * m.omega * MU0 * h[c];
                let want_h = -I * m.omega * EPS0 * eps * e[c];
                assert!((ce[c] - want_e).norm() < 1e-6 * (m.omega * MU0).norm() * hn);
                assert!((ch[c] - want_h).norm() < 1e-6 * (m.omega * EPS0 * eps).norm() * en);
            }
        }
    }
}

#[test]
fn radial_derivative_matches_differences() {
    for (g, lam) in [(dielectric(), 1400e-9), (silver(), 390e-9)] {
        let m = lowest(&g, lam, Polarization::TM);
        for &r in &[0.5 * g.a, 1.7 * g.a, 6.0 * g.a] {
            let th = 0.9;
            let h = 1e-6 * g.a;
            let (d_e, d_h) = mie_radial_derivative(&m, &g, r, th, 0.0).unwrap();
            let (ep, hp) = mie_field(&m, &g, r + h, th, 0.0).unwrap();
            let (em, hm) = mie_field(&m, &g, r - h, th, 0.0).unwrap();
            for c in 0..3 {
                let fe = (ep[c] - em[c]) / (2.0 * h);
                let fh = (hp[c] - hm[c]) / (2.0 * h);
                assert!((fe - d_e[c]).norm() <= 1e-7 * d_e.iter().map(|v| v.norm()).fold(0.0, f64::max));
                assert!((fh - d_h[c]).norm() <= 1e-7 * d_h.iter().map(|v| v.norm()).fold(0.0, f64::max));
            }
        }
        // parity: at θ = 0 only E_r survives
        let (d0, _) = mie_radial_derivative(&m, &g, 2.0 * g.a, 0.0, 0.0).unwrap();
        assert!(d0[1].norm() < 1e-14 * d0[0].norm() && d0[2].norm() == 0.0);
    }
}

#[test]
fn exterior_field_depends_on_omega_r() {
    // r ∂/∂r F = ω ∂/∂ω F for the continued outgoing field
    let g = silver();
    let m = lowest(&g, 390e-9, Polarization::TM);
    let r = 2.0 * g.a;
    let th = 0.6;
    let (de, dh) = mie_radial_derivative(&m, &g, r, th, 0.0).unwrap();
    let shifted = |s: f64| {
        let w = m.omega * (1.0 + s);
        let mm = MieMode { omega: w, k_out: w / C0, ..m };
        mie_field(&mm, &g, r, th, 0.0).unwrap()
    };
    let s = 1e-5;
    let (ep, hp) = shifted(s);
    let (em, hm) = shifted(-s);
    for c in 0..2 {
        let dw = (ep[c] - em[c]) / (2.0 * s);
        assert!((dw - r * de[c]).norm() < 1e-8 * (r * de[c]).norm(), "{c}");
    }
    let dw = (hp[2] - hm[2]) / (2.0 * s);
    assert!((dw - r * dh[2]).norm() < 1e-8 * (r * dh[2]).norm());
}

#[test]
fn far_field_grows_exponentially() {
    let g = dielectric();
    let m = lowest(&g, 1400e-9, Polarization::TM);
    let mag = |r: f64| mie_field(&m, &g, r, 1.2, 0.0).unwrap().1[2].norm() * r;
    let (r1, r2) = (20e-6, 40e-6);
    let rate = (mag(r2) / mag(r1)).ln() / (r2 - r1);
    assert!((rate - m.omega.im.abs() / C0).abs() < 1e-3 * rate);
}

#[test]
fn angular_functions() {
    for &th in &[0.3, 1.0, 2.5] {
        let (p, t) = angular(1, th);
        assert!((p - th.cos()).abs() < 1e-15 && (t - th.sin()).abs() < 1e-15);
        let (p2, t2) = angular(2, th);
        let x = th.cos();
        assert!((p2 - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-14);
        assert!((t2 - 3.0 * x * th.sin()).abs() < 1e-14);
    }
    let (a, b) = angular_integrals(1);
    assert!((a - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    assert!((b - 8.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
}

#[test]
fn invalid_setups() {
    assert!(SphereGeometry::new(-1.0, MaterialModel::dielectric(2.0)).is_err());
    let bad = SphereGeometry::with_exterior(1e-7, MaterialModel::dielectric(2.0), MaterialModel::silver_arc10());
    assert_eq!(bad, Err(qnm_core::Error::InvalidBackground));
    let g = silver();
    assert!(mie_dispersion(&g, 1, Polarization::TM, C64::new(0.0, 0.0)).is_err());
    let w = omega_from_wavelength(C64::new(390e-9, 32e-9));
    assert!(w.im < 0.0);
}
