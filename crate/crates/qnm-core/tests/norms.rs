use qnm_core::mie::*;
use qnm_core::norms::*;
use qnm_core::{Error, MaterialModel, C64};

fn dielectric() -> (SphereGeometry, MieMode) {
    let g = SphereGeometry::new(500e-9, MaterialModel::dielectric(4.0)).unwrap();
    let m = find_mie_qnms(&g, 1, Polarization::TM, 1400e-9).unwrap()[0];
    (g, m)
}

fn silver() -> (SphereGeometry, MieMode) {
    let g = SphereGeometry::new(40e-9, MaterialModel::silver_arc10()).unwrap();
    let m = find_mie_qnms(&g, 1, Polarization::TM, 390e-9).unwrap()[0];
    (g, m)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn radii(a: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.5 * a + (hi - 1.5 * a) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn pml_norm_is_invariant() {
    for (g, m) in [dielectric(), silver()] {
        let reference = pml_norm(&m, &g, &PmlMap::new(1.5 * g.a)).unwrap().value;
        for r in radii(g.a, 4e-6, 12) {
            for alpha in [C64::new(1.0, 0.5), C64::new(1.0, 1.0)] {
                let v = pml_norm(&m, &g, &PmlMap::new(r).with_alpha(alpha)).unwrap();
                assert!(rel(v.value, reference) < 1e-10, "R={r} α={alpha}");
                assert_eq!(v.meta.alpha, Some(alpha));
            }
        }
    }
}

#[test]
fn quadrature_density_is_sufficient() {
    for (g, m) in [dielectric(), silver()] {
        let map = PmlMap::new(2.0 * g.a);
        let a = pml_norm_with_density(&m, &g, &map, 32).unwrap().value;
        let b = pml_norm_with_density(&m, &g, &map, 64).unwrap().value;
        assert!(rel(a, b) < 1e-12);
        let a = m_norm_with_density(&m, &g, 3.0 * g.a, DerivativeScheme::Exact, 32).unwrap().value;
        let b = m_norm_with_density(&m, &g, 3.0 * g.a, DerivativeScheme::Exact, 64).unwrap().value;
        assert!(rel(a, b) < 1e-12);
    }
}

#[test]
fn thick_enough_pml_is_found_automatically() {
    // the low-Q dielectric mode needs more than the default 4 µm
    let (g, m) = dielectric();
    let v = pml_norm(&m, &g, &PmlMap::new(1e-6)).unwrap();
    assert!(v.meta.thickness.unwrap() > 4e-6);
}

#[test]
fn exact_m_norm_equals_pml_norm() {
    for (g, m) in [dielectric(), silver()] {
        let reference = pml_norm(&m, &g, &PmlMap::new(1.5 * g.a)).unwrap().value;
        for r in radii(g.a, 10.0 * g.a, 8) {
            let v = m_norm(&m, &g, r, DerivativeScheme::Exact).unwrap().value;
            assert!(rel(v, reference) < 1e-8, "R={r}");
        }
        let (shell, surf, diff) = m_pml_surface_equiv(&m, &g, &PmlMap::new(2.0 * g.a)).unwrap();
        assert!(diff < 1e-8);
        assert!(rel(surf, shell) < 1e-8);
        // the LK surface term is not a substitute
        let lk = lk_surface_term(&m, &g, 2.0 * g.a).unwrap();
        assert!(rel(lk, shell) > 1e-2);
    }
}

#[test]
fn finite_difference_surface_term_error_grows() {
    let (g, m) = silver();
    let reference = pml_norm(&m, &g, &PmlMap::new(1.5 * g.a)).unwrap().value;
    let h = 1e-4 * g.a;
    let err = |r: f64| rel(m_norm(&m, &g, r, DerivativeScheme::Fd { h }).unwrap().value, reference);
    let near = (0..6).map(|i| err(200e-9 + 20e-9 * i as f64)).fold(0.0, f64::max);
    let far = (0..6).map(|i| err(3.5e-6 + 80e-9 * i as f64)).fold(0.0, f64::max);
    assert!(far > 10.0 * near, "near {near} far {far}");
    let fd = m_norm(&m, &g, 780e-9, DerivativeScheme::Fd { h }).unwrap();
    assert_eq!(fd.meta.fd_step, Some(h));
    assert_eq!(fd.method, NormMethod::MFd);
}

#[test]
fn lk_norm_is_not_convergent() {
    let (g, m) = silver();
    let reference = pml_norm(&m, &g, &PmlMap::new(1.5 * g.a)).unwrap().value;
    let lam = m.wavelength().re;
    let lk = |r: f64| rel(lk_norm(&m, &g, r).unwrap().value, reference);
    assert!(lk(0.95 * lam / 5.0) > 0.1);
    let sup = (1..60).map(|i| lk(g.a + 6.0 * lam * i as f64 / 60.0)).fold(0.0, f64::max);
    assert!(sup > 1e-2);
}

#[test]
fn flux_identities() {
    for (g, m) in [dielectric(), silver()] {
        for r in [1.2 * g.a, 2.0 * g.a, 5.0 * g.a, 1e-6, 3e-6] {
            let (res, scale) = poynting_residual(&m, &g, r).unwrap();
            assert!(res.norm() < 1e-10 * scale, "R={r}");
        }
    }
    // far-field version only holds asymptotically
    let (g, m) = silver();
    let lam = m.wavelength().re;
    let at = |r: f64| {
        let (res, scale) = lk_identity_check(&m, &g, r).unwrap();
        res.norm() / scale
    };
    assert!(at(2.0 * lam) < 0.05);
    assert!(at(4.0 * lam) < at(2.0 * lam));
    assert!(at(1.5 * g.a) > 0.2);
}

#[test]
fn pole_response_matches_pml() {
    for (g, m) in [dielectric(), silver()] {
        let reference = pml_norm(&m, &g, &PmlMap::new(1.5 * g.a)).unwrap().value;
        for rs in [0.3 * g.a, 0.8 * g.a, 1.6 * g.a] {
            let v = pole_response_norm_sphere(&m, &g, rs).unwrap();
            assert!(rel(v.value, reference) < 1e-6, "rs={rs}");
            assert_eq!(v.meta.source_radius, Some(rs));
        }
        // γ is what the normalized mode predicts: γ = −i∫J·Ẽ/N
        let n = reference;
        let gamma = sphere_residue_gamma(&m, &g, 0.8 * g.a).unwrap();
        let p = mie_radial_profile(&m, &g, C64::new(0.8 * g.a, 0.0)).unwrap();
        let overlap = (0.8 * g.a).powi(2) * angular_integrals(1).1 * p.theta;
        assert!(rel(gamma, -C64::i() * overlap / n) < 1e-6);
    }
    let (g, m) = silver();
    assert!(pole_response_norm_sphere(&m, &g, g.a).is_err());
}

#[test]
fn driven_field_is_continuous_and_jumps_at_source() {
    // E_θ is continuous everywhere, including across the source shell
    let (g, m) = dielectric();
    let w = m.omega * 0.9;
    let one = C64::new(1.0, 0.0);
    for rs in [0.6 * g.a, 1.4 * g.a] {
        for r in [rs, g.a] {
            let a = shell_source_field(&g, 1, w, rs, one, r * (1.0 - 1e-12)).unwrap();
            let b = shell_source_field(&g, 1, w, rs, one, r * (1.0 + 1e-12)).unwrap();
            assert!((a - b).norm() < 1e-8 * a.norm());
        }
        let f = shell_source_field(&g, 1, w, rs, one, 0.5 * rs).unwrap();
        let f2 = shell_source_field(&g, 1, w, rs, 2.0 * one, 0.5 * rs).unwrap();
        assert!((f2 - 2.0 * f).norm() < 1e-12 * f.norm());
    }
}

#[test]
fn normalized_modes_are_biorthogonal() {
    let (g, _) = dielectric();
    let modes = find_mie_qnms(&g, 1, Polarization::TM, 700e-9).unwrap();
    assert!(modes.len() >= 2);
    let map = PmlMap::new(1.5 * g.a).with_alpha(C64::new(1.0, 1.0));
    let norm: Vec<_> = modes[..2]
        .iter()
        .map(|m| m.scaled_to_norm(pml_norm(m, &g, &map).unwrap().value))
        .collect();
    let cross = pml_cross_product(&norm[0], &norm[1], &g, &map).unwrap();
    assert!(cross.norm() < 1e-8, "{cross}");
    for m in &norm {
        let own = pml_cross_product(m, m, &g, &map).unwrap();
        assert!((own - 1.0).norm() < 1e-10);
    }
}

#[test]
fn revelation_and_tail_errors() {
    let (g, m) = dielectric();
    let need = 1.0 / (2.0 * m.q_factor());
    let bad = PmlMap::new(2.0 * g.a).with_alpha(C64::new(1.0, 0.9 * need));
    assert!(matches!(pml_norm(&m, &g, &bad), Err(Error::RegularizationAngleTooSmall { .. })));
    let slow = PmlMap::new(2.0 * g.a).with_alpha(C64::new(1.0, 1.0001 * need)).with_thickness(1e-7);
    assert_eq!(pml_norm(&m, &g, &slow), Err(Error::TailNotConverged));
    assert!(m_norm(&m, &g, 0.5 * g.a, DerivativeScheme::Exact).is_err());
}

#[test]
fn te_mode_norms_agree() {
    let g = SphereGeometry::new(500e-9, MaterialModel::dielectric(4.0)).unwrap();
    let m = find_mie_qnms(&g, 1, Polarization::TE, 1400e-9).unwrap()[0];
    let p = pml_norm(&m, &g, &PmlMap::new(2.0 * g.a)).unwrap().value;
    let e = m_norm(&m, &g, 3.0 * g.a, DerivativeScheme::Exact).unwrap().value;
    assert!(rel(e, p) < 1e-8);
    assert!(poynting_residual(&m, &g, 2.0 * g.a).map(|(r, s)| r.norm() < 1e-10 * s).unwrap());
}

#[test]
fn sweep_layout() {
    let (g, m) = silver();
    let opts = SweepOptions::for_sphere(&g);
    let methods = [NormMethod::Pml, NormMethod::LK, NormMethod::MExact, NormMethod::MFd, NormMethod::PoleResponse];
    let out = norm_sweep(&m, &g, &[60e-9, 100e-9, 30e-9], &methods, &opts);
    assert_eq!(out.len(), 15);
    for (i, (r, meth, res)) in out.iter().enumerate() {
        assert_eq!(*meth, methods[i % 5]);
        if *r < g.a && *meth != NormMethod::PoleResponse {
            assert!(res.is_err());
        } else {
            assert!(res.is_ok());
        }
    }
    assert!(norm_sweep(&m, &g, &[60e-9], &[], &opts).is_empty());
    assert_eq!(NormMethod::MExact.name(), "M_exact");
}
