//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use qnm_core::consts::{C0, MU0};
use qnm_core::fdfd1d::*;
use qnm_core::linalg::{CMat, Lu};
use qnm_core::mie::*;
use qnm_core::norms::*;
use qnm_core::slab1d::*;
use qnm_core::{MaterialModel, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const L: f64 = 1e-6;
const U: f64 = C0 / L;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

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

fn sweep_radii(a: f64) -> Vec<f64> {
    (0..14).map(|i| 1.5 * a + (4e-6 - 1.5 * a) * i as f64 / 13.0).collect()
}

fn reference(g: &SphereGeometry, m: &MieMode) -> C64 {
    pml_norm(m, g, &PmlMap::new(1.5 * g.a)).unwrap().value
}

fn c1_pml_invariance() -> Outcome {
    let mut spread = 0.0f64;
    for (g, m) in [dielectric(), silver()] {
        let r0 = reference(&g, &m);
        for r in sweep_radii(g.a) {
            for alpha in [C64::new(1.0, 0.5), C64::new(1.0, 1.0)] {
                let v = pml_norm(&m, &g, &PmlMap::new(r).with_alpha(alpha)).map_err(|e| format!("{e}"))?;
                spread = spread.max(rel(v.value, r0));
            }
        }
    }
    check(spread < 1e-10, format!("max relative spread {spread:.2e} over 14 radii x 2 slopes x 2 spheres"))
}

fn c2_exact_equals_pml() -> Outcome {
    let mut worst = 0.0f64;
    for (g, m) in [dielectric(), silver()] {
        for r in sweep_radii(g.a) {
            let p = pml_norm(&m, &g, &PmlMap::new(r)).map_err(|e| format!("{e}"))?.value;
            let e = m_norm(&m, &g, r, DerivativeScheme::Exact).map_err(|e| format!("{e}"))?.value;
            worst = worst.max(rel(e, p));
        }
    }
    check(worst < 1e-6, format!("max |M_exact - PML|/|PML| = {worst:.2e}"))
}

fn c3_lk_failure() -> Outcome {
    let (g, m) = silver();
    let r0 = reference(&g, &m);
    let lam = m.wavelength().re;
    let err = |r: f64| lk_norm(&m, &g, r).map(|v| rel(v.value, r0)).unwrap_or(f64::NAN);
    let near: Vec<(f64, f64)> = (0..400).map(|i| 1.05 * g.a + (3.2 * lam - 1.05 * g.a) * i as f64 / 399.0).map(|r| (r, err(r))).collect();
    let min_below = |x: f64| near.iter().filter(|p| p.0 < x).map(|p| p.1).fold(f64::INFINITY, f64::min);
    let (e5, e2) = (min_below(lam / 5.0), min_below(lam / 2.0));
    let (r_min, e_min) = near.iter().copied().fold((0.0, f64::INFINITY), |a, p| if p.1 < a.1 { p } else { a });
    // envelope of the large-R divergence: least-squares slope of ln(error)
    let far: Vec<(f64, f64)> = (0..200).map(|i| 6e-6 + 6e-6 * i as f64 / 199.0).map(|r| (r, err(r).ln())).collect();
    let n = far.len() as f64;
    let (mx, my) = (far.iter().map(|p| p.0).sum::<f64>() / n, far.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = far.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / far.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let predicted = m.omega.re / (m.q_factor() * C0);
    let ratio = slope / predicted;
    let in_window = r_min >= 1.5 * lam && r_min <= 3.0 * lam;
    check(
        e5 > 0.1 && e2 > 0.01 && e_min <= 0.01 && in_window && (ratio - 1.0).abs() < 0.2,
        format!(
            "min err R<lam/5 {e5:.3}, R<lam/2 {e2:.4}, minimum {e_min:.2e} at R = {:.2} lam, envelope exponent / (Re w/Qc) = {ratio:.3}",
            r_min / lam
        ),
    )
}

fn c4_fd_contrast() -> Outcome {
    let (g, m) = silver();
    let r0 = reference(&g, &m);
    let lam = m.wavelength().re;
    let h = 1e-4 * g.a;
    let rs: Vec<f64> = (0..240).map(|i| 1.5 * g.a + (4e-6 - 1.5 * g.a) * i as f64 / 239.0).collect();
    let fd: Vec<f64> = rs.iter().map(|&r| rel(m_norm(&m, &g, r, DerivativeScheme::Fd { h }).unwrap().value, r0)).collect();
    let exact = rs.iter().map(|&r| rel(m_norm(&m, &g, r, DerivativeScheme::Exact).unwrap().value, r0)).fold(0.0, f64::max);
    let peaks = (1..fd.len() - 1).filter(|&i| fd[i] > fd[i - 1] && fd[i] > fd[i + 1]).count();
    let third = fd.len() / 3;
    let env_near = fd[..third].iter().copied().fold(0.0, f64::max);
    let env_far = fd[2 * third..].iter().copied().fold(0.0, f64::max);
    let at = |r: f64, s: DerivativeScheme| rel(m_norm(&m, &g, r, s).unwrap().value, r0);
    let gap = at(2.0 * lam, DerivativeScheme::Fd { h }) / at(2.0 * lam, DerivativeScheme::Exact).max(1e-300);
    check(
        exact < 1e-6 && peaks >= 3 && env_far > 10.0 * env_near && gap >= 100.0,
        format!(
            "fd envelope {env_near:.1e} -> {env_far:.1e} with {peaks} local maxima, exact max {exact:.1e}, fd/exact at 2 lam = {gap:.1e}"
        ),
    )
}

fn c5_poynting() -> Outcome {
    let mut e1 = 0.0f64;
    for (g, m) in [dielectric(), silver()] {
        for r in [1.2 * g.a, 2.0 * g.a, 5.0 * g.a, 1e-6, 3e-6] {
            let (res, scale) = poynting_residual(&m, &g, r).map_err(|e| format!("{e}"))?;
            e1 = e1.max(res.norm() / scale);
        }
    }
    let (g, m) = silver();
    let lam = m.wavelength().re;
    let e4: Vec<f64> = [2.0, 3.0, 4.0]
        .iter()
        .map(|k| {
            let (res, scale) = lk_identity_check(&m, &g, k * lam).unwrap();
            res.norm() / scale
        })
        .collect();
    check(
        e1 < 1e-10 && e4[0] < 0.05 && e4[1] < e4[0] && e4[2] < e4[1],
        format!("E1 residual {e1:.1e}; E4 residual at 2, 3, 4 lam: {:.2e}, {:.2e}, {:.2e}", e4[0], e4[1], e4[2]),
    )
}

/// Transfer-matrix oracle for the slab Green function with unit sheet current.
fn green_oracle(g: &SlabGeometry, x: f64, xs: f64, w: f64) -> C64 {
    let k = C64::new(w / C0, 0.0);
    let q = g.n * k;
    let h = g.l / 2.0;
    let cs = |x: f64| ((q * x).cos(), (q * x).sin());
    let mut m = CMat::zeros(6, 6);
    let mut rhs = vec![C64::new(0.0, 0.0); 6];
    let eh = (I * k * h).exp();
    let (co, si) = cs(-h);
    m[(0, 0)] = eh;
    m[(0, 1)] = -co;
    m[(0, 2)] = -si;
    m[(1, 0)] = -I * k * eh;
    m[(1, 1)] = q * si;
    m[(1, 2)] = -q * co;
    let (co, si) = cs(xs);
    m[(2, 1)] = co;
    m[(2, 2)] = si;
    m[(2, 3)] = -co;
    m[(2, 4)] = -si;
    m[(3, 1)] = q * si;
    m[(3, 2)] = -q * co;
    m[(3, 3)] = -q * si;
    m[(3, 4)] = q * co;
    rhs[3] = -I * w * MU0;
    let (co, si) = cs(h);
    m[(4, 3)] = co;
    m[(4, 4)] = si;
    m[(4, 5)] = -eh;
    m[(5, 3)] = -q * si;
    m[(5, 4)] = q * co;
    m[(5, 5)] = -I * k * eh;
    let s = Lu::new(m).unwrap().solve(&rhs);
    let (co, si) = cs(x);
    if x < -h {
        s[0] * (-I * k * x).exp()
    } else if x > h {
        s[5] * (I * k * x).exp()
    } else if x <= xs {
        s[1] * co + s[2] * si
    } else {
        s[3] * co + s[4] * si
    }
}

fn c6_slab_completeness() -> Outcome {
    let g = SlabGeometry::new(3.0, L).unwrap();
    let w = 0.7 * slab_qnm(&g, 4).omega.re;
    let xs = 0.11 * L;
    let points: Vec<f64> = (0..10).map(|i| -0.45 * L + 0.9 * L * i as f64 / 9.0).collect();
    let err = |pairs: usize, x: f64| {
        let e = slab_green_expansion(&g, x, xs, w, pairs).unwrap();
        rel(e.value, green_oracle(&g, x, xs, w))
    };
    let ms = [5usize, 10, 20, 40, 60];
    let worst: Vec<f64> = ms.iter().map(|&m| points.iter().map(|&x| err(m, x)).fold(0.0, f64::max)).collect();
    let monotone = worst.windows(2).all(|p| p[1] < p[0]);
    let outside: Vec<f64> = [20usize, 60, 240].iter().map(|&m| err(m, 2.5 * L)).collect();
    check(
        worst[4] < 1e-3 && monotone && outside.iter().all(|e| *e > 0.5),
        format!(
            "interior max error for M = 5..60: {}; exterior (x = 2.5 L) error at M = 20, 60, 240: {}",
            worst.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(", "),
            outside.iter().map(|e| format!("{e:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c7_pole_response() -> Outcome {
    let g = SlabGeometry::new(3.0, L).unwrap();
    let mut slab_worst = 0.0f64;
    for m in [1, 2, 3, 6] {
        let md = slab_qnm(&g, m);
        let exact = slab_norm_exact(&md, &g).map_err(|e| format!("{e}"))?;
        for xs in [0.07 * L, -0.23 * L] {
            slab_worst = slab_worst.max(rel(slab_pole_response_norm(&g, &md, xs).map_err(|e| format!("{e}"))?, exact));
        }
    }
    let mut sphere_worst = 0.0f64;
    for (sg, m) in [dielectric(), silver()] {
        let exact = m_norm(&m, &sg, 2.0 * sg.a, DerivativeScheme::Exact).unwrap().value;
        for rs in [0.3 * sg.a, 0.8 * sg.a, 1.6 * sg.a] {
            sphere_worst = sphere_worst.max(rel(pole_response_norm_sphere(&m, &sg, rs).map_err(|e| format!("{e}"))?.value, exact));
        }
    }
    let sg = SlabGeometry::new(2.0, L).unwrap();
    let grid = Grid1D::symmetric(L, 40, 0.5 * L, 6.0 * L).unwrap();
    let src = Source1D::at(0.1 * L);
    let mut gammas = Vec::new();
    for f in [C64::new(3.0, 3.0), C64::new(5.0, 2.0)] {
        let p = assemble(&Structure1D::Slab(sg), &grid, &PmlProfile1D::new(6.0 * L, f).with_ramp(3.0 * L)).map_err(|e| format!("{e}"))?;
        let mode = eigenmode_near(&p, slab_qnm(&sg, 2).omega).map_err(|e| format!("{e}"))?;
        gammas.push(residue_gamma(&p, &mode, &src).map_err(|e| format!("{e}"))?);
    }
    let dg = rel(gammas[1], gammas[0]);
    check(
        slab_worst < 1e-6 && sphere_worst < 1e-6 && dg < 1e-8,
        format!("slab {slab_worst:.1e}, sphere {sphere_worst:.1e}, gamma change between f = 3+3i and 5+2i {dg:.1e}"),
    )
}

fn criterion8_setup() -> (Eigensystem, Vec<usize>) {
    let g = SlabGeometry::new(2.0, L).unwrap();
    let st = Structure1D::Slab(g);
    let grid = Grid1D::symmetric(L, 40, L, 8.5 * L).unwrap();
    assert_eq!(grid.n, 800);
    let f = C64::new(1.0, 0.3);
    let p = assemble(&st, &grid, &PmlProfile1D::new(8.5 * L, f)).unwrap();
    let sys = eigensolve(&p).unwrap();
    let grid2 = Grid1D::symmetric(L, 40, L, 6.0 * L).unwrap();
    let s2 = spectrum(&assemble(&st, &grid2, &PmlProfile1D::new(6.0 * L, f)).unwrap()).unwrap();
    let cls = classify_modes(&sys.spectrum(), &s2, 1e-6).unwrap();
    let qnms = (0..cls.len()).filter(|&k| cls[k] == ModeClass::Qnm).collect();
    (sys, qnms)
}

fn c8_full_basis(sys: &Eigensystem, qnms: &[usize]) -> Outcome {
    let src = Source1D::at(0.1 * L);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut full = 0.0f64;
    let mut trunc = f64::INFINITY;
    for _ in 0..5 {
        let w = rng.gen_range(0.5..6.0) * U;
        full = full.max(excitation_and_reconstruct(sys, &src, w, None).map_err(|e| format!("{e}"))?.error_vs_direct);
        trunc = trunc.min(excitation_and_reconstruct(sys, &src, w, Some(qnms)).map_err(|e| format!("{e}"))?.error_vs_direct);
    }
    check(
        full < 1e-10 && trunc > 1e-3,
        format!(
            "N = 800, {} modes ({} QNM): full-basis max error {full:.1e}, QNM-only min error {trunc:.2}",
            sys.modes.len(),
            qnms.len()
        ),
    )
}

fn c9_spectral_fidelity() -> Outcome {
    let g = SlabGeometry::new(2.0, L).unwrap();
    let st = Structure1D::Slab(g);
    let layer = |f: C64| PmlProfile1D::new(6.0 * L, f).with_ramp(3.0 * L);
    let mut errs = [[0.0; 3]; 3];
    for (k, cells) in [20usize, 40, 80].into_iter().enumerate() {
        let grid = Grid1D::symmetric(L, cells, 0.5 * L, 6.0 * L).unwrap();
        let s = spectrum(&assemble(&st, &grid, &layer(C64::new(3.0, 3.0))).unwrap()).unwrap();
        for m in 1..=3 {
            let wa = slab_qnm(&g, m).omega;
            errs[k][m as usize - 1] = rel(nearest(&s.omegas, wa).unwrap(), wa);
        }
    }
    let orders: Vec<f64> = (0..3).flat_map(|m| (0..2).map(move |k| (m, k))).map(|(m, k)| (errs[k][m] / errs[k + 1][m]).log2()).collect();
    let orders_ok = orders.iter().all(|o| (o - 2.0).abs() < 0.3);

    let grid = Grid1D::symmetric(L, 40, 0.5 * L, 6.0 * L).unwrap();
    let s1 = spectrum(&assemble(&st, &grid, &layer(C64::new(3.0, 3.0))).unwrap()).unwrap();
    let s2 = spectrum(&assemble(&st, &grid, &layer(C64::new(4.5, 4.5))).unwrap()).unwrap();
    let cls = classify_modes(&s1, &s2, 1e-6).unwrap();
    let mut qnm_shift = 0.0f64;
    let mut num_shift = 0.0f64;
    for (k, w) in s1.omegas.iter().enumerate() {
        if w.norm() == 0.0 {
            continue;
        }
        let shift = rel(nearest(&s2.omegas, *w).unwrap(), *w);
        match cls[k] {
            ModeClass::Qnm => qnm_shift = qnm_shift.max(shift),
            ModeClass::Numerical => num_shift = num_shift.max(shift),
            _ => {}
        }
    }
    let analytic_found = (1..=6).all(|m| {
        let wa = slab_qnm(&g, m).omega;
        let k = (0..s1.omegas.len()).min_by(|&a, &b| (s1.omegas[a] - wa).norm().total_cmp(&(s1.omegas[b] - wa).norm())).unwrap();
        cls[k] == ModeClass::Qnm
    });
    check(
        orders_ok && qnm_shift < 1e-6 && num_shift > 1e-2 && analytic_found,
        format!(
            "orders {}; QNM max shift {qnm_shift:.1e}, numerical max shift {num_shift:.2}, slab modes 1..6 classified QNM: {analytic_found}",
            orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn c10_revelation() -> Outcome {
    let g = SlabGeometry::new(3.0, L).unwrap();
    let grid = Grid1D::symmetric(L, 40, 0.5 * L, 20.0 * L).unwrap();
    let layer = PmlProfile1D::new(20.0 * L, C64::new(1.0, 1.0)).with_ramp(L);
    let settings = [
        RevelationSetting { tan_theta: 0.05, g: 5.0, g2: 6.0 },
        RevelationSetting { tan_theta: 0.2, g: 2.0, g2: 3.0 },
        RevelationSetting { tan_theta: 1.0, g: 1.0, g2: 1.5 },
    ];
    let rows = revelation_study(&g, &grid, &layer, &settings, 8).map_err(|e| format!("{e}"))?;
    let monotone = rows.windows(2).all(|w| w[0].revealed.iter().all(|m| w[1].revealed.contains(m)) && w[1].revealed.len() >= w[0].revealed.len());
    let discrepancies: Vec<usize> =
        rows.iter().map(|r| (1..=8).filter(|m| r.revealed.contains(m) != r.predicted.contains(m)).count()).collect();
    let detail = rows
        .iter()
        .map(|r| format!("tan {}: revealed {:?} predicted {:?}", r.tan_theta, r.revealed, r.predicted))
        .collect::<Vec<_>>()
        .join("; ");
    check(monotone && discrepancies.iter().all(|d| *d <= 1), detail)
}

fn c11_biorthogonality(sys: &Eigensystem) -> Outcome {
    let slab_pairing = sys.pairing_error();
    let u = U;
    let mat = MaterialModel::Lorentz { eps_inf: 2.0, omega_p: 2.0 * u, omega_0: 3.0 * u, gamma: 0.3 * u };
    let st = Structure1D::Lorentz(LorentzSlab::new(L, mat).map_err(|e| format!("{e}"))?);
    let grid = Grid1D::symmetric(L, 40, 0.5 * L, 3.0 * L).unwrap();
    let p = assemble(&st, &grid, &PmlProfile1D::new(3.0 * L, C64::new(1.0, 0.3))).map_err(|e| format!("{e}"))?;
    let lsys = eigensolve(&p).map_err(|e| format!("{e}"))?;
    let lorentz_pairing = lsys.pairing_error();
    let mut without = p.b.clone();
    for w in without.iter_mut().skip(p.ne + p.nh) {
        *w = C64::new(0.0, 0.0);
    }
    let negative = pairing_error(&lsys.modes, &without);
    check(
        slab_pairing < 1e-8 && lorentz_pairing < 1e-8 && negative > 1e-2,
        format!("slab {slab_pairing:.1e}, Lorentz {lorentz_pairing:.1e}, Lorentz without P, J terms {negative:.2}"),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, start: Instant, out: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS {n:>2} {name} ({secs:.1} s): {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {n:>2} {name} ({secs:.1} s): {d}");
            }
        }
    };
    let t = Instant::now();
    report(1, "PML-norm invariance", t, c1_pml_invariance());
    let t = Instant::now();
    report(2, "M(exact) equals PML norm", t, c2_exact_equals_pml());
    let t = Instant::now();
    report(3, "LK-norm failure", t, c3_lk_failure());
    let t = Instant::now();
    report(4, "exact vs finite-difference surface term", t, c4_fd_contrast());
    let t = Instant::now();
    report(5, "Poynting identities", t, c5_poynting());
    let t = Instant::now();
    report(6, "slab completeness inside", t, c6_slab_completeness());
    let t = Instant::now();
    report(7, "pole response and gamma invariance", t, c7_pole_response());
    let t = Instant::now();
    let (sys, qnms) = criterion8_setup();
    report(8, "fdfd full-basis completeness", t, c8_full_basis(&sys, &qnms));
    let t = Instant::now();
    report(9, "fdfd spectral fidelity", t, c9_spectral_fidelity());
    let t = Instant::now();
    report(10, "revelation condition", t, c10_revelation());
    let t = Instant::now();
    report(11, "biorthogonality", t, c11_biorthogonality(&sys));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
