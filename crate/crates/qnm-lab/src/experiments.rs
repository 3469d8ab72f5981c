//! The named experiments. Each one turns a config into datasets.

use qnm_core::fdfd1d::{
    assemble, classify_modes, eigensolve, excitation_and_reconstruct, revelation_study, spectrum, Eigensystem, Grid1D,
    LorentzSlab, ModeClass, Pencil, PmlProfile1D, RevelationSetting, Source1D, Structure1D,
};
use qnm_core::mie::find_mie_qnms;
use qnm_core::norms::{norm_sweep, pml_norm, NormMethod, NormResult, PmlMap, SweepOptions};
use qnm_core::slab1d::{slab_green_direct, slab_green_expansion, slab_qnm};
use qnm_core::{MaterialModel, MieMode, SlabGeometry, SphereGeometry, C64};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{key, section, Config, FdfdSection};
use crate::output::{Cell, Dataset};
use crate::LabError;

const NM: f64 = 1e-9;

pub struct Outcome {
    pub datasets: Vec<Dataset>,
    pub warnings: Vec<String>,
}

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    pub run: fn(&Config) -> Result<Outcome, LabError>,
}

pub const EXPERIMENTS: [Experiment; 6] = [
    Experiment {
        name: "sphere-norms",
        description: "sphere mode norm by LK, M (exact and finite-difference), PML and pole response versus R",
        run: sphere_norms,
    },
    Experiment {
        name: "slab-complete",
        description: "slab Green function from M pole pairs against the direct solution, inside and outside",
        run: slab_complete,
    },
    Experiment {
        name: "fdfd-spectrum",
        description: "full discrete spectrum of the 1D PML problem with classes and excitation strengths",
        run: fdfd_spectrum,
    },
    Experiment {
        name: "fdfd-reconstruct",
        description: "driven 1D field rebuilt from all discrete modes and from the QNMs alone",
        run: fdfd_reconstruct,
    },
    Experiment {
        name: "invariance",
        description: "sphere PML norm over layer radius and stretch slope",
        run: invariance,
    },
    Experiment {
        name: "revelation",
        description: "slab modes exposed by the 1D layer versus stretch angle, with the Q-factor prediction",
        run: revelation,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, LabError> {
    Err(LabError::Config(msg.into()))
}

fn c(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn failure(what: String, e: &qnm_core::Error) -> String {
    let msg = e.to_string();
    if msg == e.name() {
        format!("{what}: {msg}")
    } else {
        format!("{what}: {}: {msg}", e.name())
    }
}

fn material_json(m: &MaterialModel) -> Value {
    match *m {
        MaterialModel::NonDispersive { eps_r, mu_r } => {
            json!({ "model": "nondispersive", "eps": [eps_r.re, eps_r.im], "mu": [mu_r.re, mu_r.im] })
        }
        MaterialModel::Drude { eps_inf, omega_p, gamma } => {
            json!({ "model": "drude", "eps_inf": eps_inf, "omega_p_rad_s": omega_p, "gamma_rad_s": gamma })
        }
        MaterialModel::Lorentz { eps_inf, omega_p, omega_0, gamma } => json!({
            "model": "lorentz", "eps_inf": eps_inf, "omega_p_rad_s": omega_p,
            "omega_0_rad_s": omega_0, "gamma_rad_s": gamma,
        }),
    }
}

struct SphereSetup {
    geom: SphereGeometry,
    mode: MieMode,
    info: Map<String, Value>,
}

fn sphere_setup(cfg: &Config) -> Result<SphereSetup, LabError> {
    let s = section(&cfg.sphere, "sphere")?;
    let mat = cfg.material(&s.material)?;
    let geom = SphereGeometry::new(s.radius_nm * NM, mat)?;
    let target = s.target_wavelength_nm * NM;
    let modes = find_mie_qnms(&geom, s.l, s.polarization.into(), target)?;
    let mode = *modes
        .iter()
        .min_by(|a, b| (a.wavelength().re - target).abs().total_cmp(&(b.wavelength().re - target).abs()))
        .expect("at least one mode");
    let lam = mode.wavelength();
    let info = json!({
        "radius_nm": s.radius_nm,
        "material": material_json(&mat),
        "l": s.l,
        "polarization": format!("{:?}", s.polarization),
        "omega_rad_s": [mode.omega.re, mode.omega.im],
        "wavelength_nm": [lam.re / NM, lam.im / NM],
        "q_factor": mode.q_factor(),
    });
    let Value::Object(info) = info else { unreachable!() };
    Ok(SphereSetup { geom, mode, info })
}

fn parse_method(s: &str) -> Result<NormMethod, LabError> {
    [NormMethod::LK, NormMethod::MExact, NormMethod::MFd, NormMethod::Pml, NormMethod::PoleResponse]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| LabError::Config(format!("unknown norm method `{s}`")))
}

fn row_meta(r: &NormResult) -> Value {
    let mut m = Map::new();
    m.insert("R_nm".into(), json!(r.r / NM));
    m.insert("method".into(), json!(r.method.name()));
    if let Some(a) = r.meta.alpha {
        m.insert("alpha".into(), json!([a.re, a.im]));
    }
    if let Some(t) = r.meta.thickness {
        m.insert("pml_thickness_nm".into(), json!(t / NM));
    }
    if let Some(h) = r.meta.fd_step {
        m.insert("fd_step_nm".into(), json!(h / NM));
    }
    if let Some(rs) = r.meta.source_radius {
        m.insert("source_radius_nm".into(), json!(rs / NM));
    }
    m.insert("nodes_per_wavelength".into(), json!(r.meta.nodes_per_wavelength));
    Value::Object(m)
}

fn reference_norm(setup: &SphereSetup, r_ref: f64, alpha: C64, t: f64) -> Result<NormResult, LabError> {
    let map = PmlMap::new(r_ref).with_alpha(alpha).with_thickness(t);
    Ok(pml_norm(&setup.mode, &setup.geom, &map)?)
}

fn sphere_norms(cfg: &Config) -> Result<Outcome, LabError> {
    let setup = sphere_setup(cfg)?;
    let sw = section(&cfg.sweep, "sweep")?;
    let methods = sw.methods.iter().map(|m| parse_method(m)).collect::<Result<Vec<_>, _>>()?;
    if sw.pml_alphas.len() != 1 {
        return config_err("sphere-norms takes exactly one entry in `pml_alphas`");
    }
    let g = &setup.geom;
    let mut opts = SweepOptions::for_sphere(g);
    opts.alpha = c(sw.pml_alphas[0]);
    opts.thickness = sw.pml_thickness_nm * NM;
    if let Some(h) = sw.fd_step_nm {
        opts.fd_step = h * NM;
    }
    if let Some(rs) = sw.source_radius_nm {
        opts.source_radius = rs * NM;
    }
    let r_ref = sw.reference_radius_nm.map_or(1.5 * g.a, |r| r * NM);
    let reference = reference_norm(&setup, r_ref, opts.alpha, opts.thickness)?;

    let per_r: Vec<_> =
        sw.radii_nm.par_iter().map(|&r| norm_sweep(&setup.mode, g, &[r * NM], &methods, &opts)).collect();

    let mut d = Dataset::new("sphere_norms.csv", &["R_nm", "method", "re_norm", "im_norm", "rel_err_vs_pml"]);
    let mut rows_meta = Vec::new();
    let mut warnings = Vec::new();
    let tagged = sw.radii_nm.iter().zip(per_r).flat_map(|(&r_nm, rows)| rows.into_iter().map(move |(_, m, res)| (r_nm, m, res)));
    for (r, m, res) in tagged {
        match res {
            Ok(v) => {
                d.rows.push(vec![
                    Cell::F(r),
                    Cell::S(m.name()),
                    Cell::F(v.value.re),
                    Cell::F(v.value.im),
                    Cell::F(rel(v.value, reference.value)),
                ]);
                rows_meta.push(row_meta(&v));
            }
            Err(e) => warnings.push(failure(format!("R_nm={r} method={}", m.name()), &e)),
        }
    }
    d.method_parameters = setup.info;
    d.param("reference", json!({ "method": "PML", "value": [reference.value.re, reference.value.im], "parameters": row_meta(&reference) }));
    d.param("norm_units", "SI, field amplitude squared times volume");
    d.row_parameters = Some(rows_meta);
    Ok(Outcome { datasets: vec![d], warnings })
}

fn invariance(cfg: &Config) -> Result<Outcome, LabError> {
    let setup = sphere_setup(cfg)?;
    let sw = section(&cfg.sweep, "sweep")?;
    if sw.pml_alphas.is_empty() {
        return config_err("`pml_alphas` is empty");
    }
    let g = &setup.geom;
    let t = sw.pml_thickness_nm * NM;
    let r_ref = sw.reference_radius_nm.map_or(1.5 * g.a, |r| r * NM);
    let reference = reference_norm(&setup, r_ref, c(sw.pml_alphas[0]), t)?;
    let points: Vec<(f64, [f64; 2])> =
        sw.radii_nm.iter().flat_map(|&r| sw.pml_alphas.iter().map(move |&a| (r, a))).collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(r, a)| pml_norm(&setup.mode, g, &PmlMap::new(r * NM).with_alpha(c(a)).with_thickness(t)))
        .collect();

    let mut d = Dataset::new(
        "invariance.csv",
        &["R_nm", "alpha_re", "alpha_im", "pml_thickness_nm", "re_norm", "im_norm", "rel_dev"],
    );
    let mut warnings = Vec::new();
    let mut spread = 0.0f64;
    for (&(r, a), res) in points.iter().zip(results) {
        match res {
            Ok(v) => {
                let dev = rel(v.value, reference.value);
                spread = spread.max(dev);
                d.rows.push(vec![
                    Cell::F(r),
                    Cell::F(a[0]),
                    Cell::F(a[1]),
                    Cell::F(v.meta.thickness.unwrap_or(t) / NM),
                    Cell::F(v.value.re),
                    Cell::F(v.value.im),
                    Cell::F(dev),
                ]);
            }
            Err(e) => warnings.push(failure(format!("R_nm={r} alpha={a:?}"), &e)),
        }
    }
    d.method_parameters = setup.info;
    d.param("reference", json!({ "value": [reference.value.re, reference.value.im], "parameters": row_meta(&reference) }));
    d.param("requested_pml_thickness_nm", sw.pml_thickness_nm);
    d.param("nodes_per_wavelength", reference.meta.nodes_per_wavelength);
    d.param("max_rel_dev", spread);
    Ok(Outcome { datasets: vec![d], warnings })
}

fn slab_geometry(cfg: &Config) -> Result<SlabGeometry, LabError> {
    let s = section(&cfg.slab, "slab")?;
    if s.material.is_some() {
        return config_err("this experiment needs a non-dispersive slab: give `index`, not `material`");
    }
    let n = key(s.index, "slab", "index")?;
    Ok(SlabGeometry::new(n, s.thickness_nm * NM)?)
}

fn slab_complete(cfg: &Config) -> Result<Outcome, LabError> {
    let g = slab_geometry(cfg)?;
    let e = section(&cfg.expansion, "expansion")?;
    let xs = e.source_x_nm * NM;
    let w = e.omega_rad_s;
    let points: Vec<(usize, f64)> = e.pairs.iter().flat_map(|&m| e.x_nm.iter().map(move |&x| (m, x))).collect();
    let direct: Vec<C64> = e.x_nm.iter().map(|&x| slab_green_direct(&g, x * NM, xs, C64::new(w, 0.0))).collect();
    let results: Vec<_> = points.par_iter().map(|&(m, x)| slab_green_expansion(&g, x * NM, xs, w, m)).collect();

    let mut d = Dataset::new("slab_complete.csv", &["M", "x_nm", "abs_err"]);
    let mut warnings = Vec::new();
    for (k, (&(m, x), res)) in points.iter().zip(results).enumerate() {
        let exp = res?;
        if let (Some(err), true) = (&exp.warning, k < e.x_nm.len()) {
            warnings.push(failure(format!("x_nm={x}"), err));
        }
        d.rows.push(vec![Cell::I(m as i64), Cell::F(x), Cell::F((exp.value - direct[k % e.x_nm.len()]).norm())]);
    }
    d.param("slab", json!({ "index": g.n, "thickness_nm": g.l / NM }));
    d.param("source_x_nm", e.source_x_nm);
    d.param("omega_rad_s", w);
    d.param("error_units", "ohm (E field per unit sheet current)");
    d.param("poles", "m = -M..M, twice-subtracted");
    d.param(
        "direct",
        json!({
            "x_nm": e.x_nm,
            "abs": direct.iter().map(|v| v.norm()).collect::<Vec<_>>(),
        }),
    );
    Ok(Outcome { datasets: vec![d], warnings })
}

fn structure(cfg: &Config) -> Result<(Structure1D, Value), LabError> {
    let s = section(&cfg.slab, "slab")?;
    let l = s.thickness_nm * NM;
    match (&s.material, s.index) {
        (Some(_), Some(_)) => config_err("give either `index` or `material` in [slab], not both"),
        (Some(name), None) => {
            let m = cfg.material(name)?;
            let st = LorentzSlab::new(l, m)?;
            Ok((Structure1D::Lorentz(st), json!({ "thickness_nm": s.thickness_nm, "material": material_json(&m) })))
        }
        (None, Some(n)) => {
            Ok((Structure1D::Slab(SlabGeometry::new(n, l)?), json!({ "thickness_nm": s.thickness_nm, "index": n })))
        }
        (None, None) => config_err("missing key `index` in [slab]"),
    }
}

fn grid_for(st: &Structure1D, f: &FdfdSection, thickness_nm: f64) -> Result<Grid1D, LabError> {
    Ok(Grid1D::symmetric(st.thickness(), f.cells_per_slab, f.pad_nm * NM, thickness_nm * NM)?)
}

fn layer(f: &FdfdSection, stretch: [f64; 2], thickness_nm: f64) -> PmlProfile1D {
    PmlProfile1D::new(thickness_nm * NM, c(stretch)).with_ramp(f.ramp_nm * NM)
}

fn grid_json(p: &Pencil) -> Value {
    json!({
        "x_min_nm": p.grid.x_min / NM,
        "x_max_nm": p.grid.x_max / NM,
        "nodes": p.grid.n,
        "dx_nm": p.grid.dx() / NM,
        "dimension": p.dim(),
    })
}

struct Classified {
    sys: Eigensystem,
    classes: Vec<ModeClass>,
    params: Map<String, Value>,
}

fn classified_system(cfg: &Config) -> Result<Classified, LabError> {
    let f = section(&cfg.fdfd, "fdfd")?;
    let (st, slab) = structure(cfg)?;
    let stretch = key(f.stretch, "fdfd", "stretch")?;
    let stretch2 = f.classify_stretch.unwrap_or(stretch);
    let t2 = f.classify_pml_thickness_nm.unwrap_or(f.pml_thickness_nm);
    if stretch2 == stretch && t2 == f.pml_thickness_nm {
        return config_err("set `classify_stretch` or `classify_pml_thickness_nm` to a second layer");
    }
    let p = assemble(&st, &grid_for(&st, f, f.pml_thickness_nm)?, &layer(f, stretch, f.pml_thickness_nm))?;
    let p2 = assemble(&st, &grid_for(&st, f, t2)?, &layer(f, stretch2, t2))?;
    let (sys, s2) = rayon::join(|| eigensolve(&p), || spectrum(&p2));
    let sys = sys?;
    let classes = classify_modes(&sys.spectrum(), &s2?, f.classify_tol)?;
    let params = json!({
        "slab": slab,
        "grid": grid_json(&p),
        "pml": { "thickness_nm": f.pml_thickness_nm, "stretch": stretch, "ramp_nm": f.ramp_nm },
        "classification": {
            "second_pml": { "thickness_nm": t2, "stretch": stretch2, "ramp_nm": f.ramp_nm },
            "second_grid": grid_json(&p2),
            "tolerance": f.classify_tol,
        },
    });
    let Value::Object(params) = params else { unreachable!() };
    Ok(Classified { sys, classes, params })
}

fn fdfd_spectrum(cfg: &Config) -> Result<Outcome, LabError> {
    let f = section(&cfg.fdfd, "fdfd")?;
    let xs = key(f.source_x_nm, "fdfd", "source_x_nm")?;
    let w = key(f.drive_omega_rad_s, "fdfd", "drive_omega_rad_s")?;
    let cl = classified_system(cfg)?;
    let src = Source1D::at(xs * NM);
    let rec = excitation_and_reconstruct(&cl.sys, &src, w, None)?;
    let mut order: Vec<usize> = (0..cl.sys.modes.len()).collect();
    let om = |k: usize| cl.sys.modes[k].omega;
    order.sort_by(|&a, &b| om(a).re.total_cmp(&om(b).re).then(om(a).im.total_cmp(&om(b).im)));

    let mut d = Dataset::new("fdfd_spectrum.csv", &["re_omega", "im_omega", "class", "alpha_abs"]);
    for k in order {
        let w = om(k);
        d.rows.push(vec![Cell::F(w.re), Cell::F(w.im), Cell::S(cl.classes[k].name()), Cell::F(rec.alphas[k].norm())]);
    }
    d.method_parameters = cl.params;
    d.param("source", json!({ "x_nm": xs, "amplitude": [1.0, 0.0] }));
    d.param("drive_omega_rad_s", w);
    d.param("omega_units", "rad/s");
    d.param("full_basis_error", rec.error_vs_direct);
    let count = |c: ModeClass| cl.classes.iter().filter(|&&k| k == c).count();
    d.param("qnm_count", count(ModeClass::Qnm));
    d.param("numerical_count", count(ModeClass::Numerical));
    Ok(Outcome { datasets: vec![d], warnings: Vec::new() })
}

fn fdfd_reconstruct(cfg: &Config) -> Result<Outcome, LabError> {
    let f = section(&cfg.fdfd, "fdfd")?;
    let xs = key(f.source_x_nm, "fdfd", "source_x_nm")?;
    if f.omegas_rad_s.is_empty() {
        return config_err("missing key `omegas_rad_s` in [fdfd]");
    }
    let cl = classified_system(cfg)?;
    let src = Source1D::at(xs * NM);
    let qnms: Vec<usize> = (0..cl.classes.len()).filter(|&k| cl.classes[k] == ModeClass::Qnm).collect();
    let results: Vec<_> = f
        .omegas_rad_s
        .par_iter()
        .map(|&w| -> qnm_core::Result<(f64, f64)> {
            let full = excitation_and_reconstruct(&cl.sys, &src, w, None)?.error_vs_direct;
            let part = excitation_and_reconstruct(&cl.sys, &src, w, Some(&qnms))?.error_vs_direct;
            Ok((full, part))
        })
        .collect();

    let mut d = Dataset::new("fdfd_reconstruct.csv", &["omega_rad_s", "basis", "modes", "rel_err"]);
    let mut warnings = Vec::new();
    for (&w, res) in f.omegas_rad_s.iter().zip(results) {
        match res {
            Ok((full, part)) => {
                d.rows.push(vec![Cell::F(w), Cell::S("full"), Cell::I(cl.sys.modes.len() as i64), Cell::F(full)]);
                d.rows.push(vec![Cell::F(w), Cell::S("qnm"), Cell::I(qnms.len() as i64), Cell::F(part)]);
            }
            Err(e) => warnings.push(failure(format!("omega_rad_s={w}"), &e)),
        }
    }
    d.method_parameters = cl.params;
    d.param("source", json!({ "x_nm": xs, "amplitude": [1.0, 0.0] }));
    d.param("error_measure", "max |modal - direct| / max |direct| over E nodes outside the layer");
    Ok(Outcome { datasets: vec![d], warnings })
}

fn revelation(cfg: &Config) -> Result<Outcome, LabError> {
    let g = slab_geometry(cfg)?;
    let f = section(&cfg.fdfd, "fdfd")?;
    let r = section(&cfg.revelation, "revelation")?;
    let st = Structure1D::Slab(g);
    let grid = grid_for(&st, f, f.pml_thickness_nm)?;
    let base = layer(f, [1.0, 0.0], f.pml_thickness_nm);
    let rows: Vec<_> = r
        .settings
        .par_iter()
        .map(|s| revelation_study(&g, &grid, &base, &[RevelationSetting { tan_theta: s.tan_theta, g: s.g, g2: s.g2 }], r.m_max))
        .collect();

    let mut d = Dataset::new("revelation.csv", &["tan_theta", "m", "q_factor", "predicted", "revealed"]);
    for row in rows {
        let row = row?.remove(0);
        for m in 1..=r.m_max as i64 {
            d.rows.push(vec![
                Cell::F(row.tan_theta),
                Cell::I(m),
                Cell::F(slab_qnm(&g, m).q_factor()),
                Cell::I(row.predicted.contains(&m) as i64),
                Cell::I(row.revealed.contains(&m) as i64),
            ]);
        }
    }
    d.param("slab", json!({ "index": g.n, "thickness_nm": g.l / NM }));
    d.param(
        "grid",
        json!({ "x_min_nm": grid.x_min / NM, "x_max_nm": grid.x_max / NM, "nodes": grid.n, "dx_nm": grid.dx() / NM }),
    );
    d.param("pml", json!({ "thickness_nm": f.pml_thickness_nm, "ramp_nm": f.ramp_nm }));
    d.param(
        "settings",
        r.settings.iter().map(|s| json!({ "tan_theta": s.tan_theta, "stretch": [s.g, s.g * s.tan_theta], "stability_stretch": [s.g2, s.g2 * s.tan_theta] })).collect::<Vec<_>>(),
    );
    d.param("revealed_when", "an eigenvalue within 5% of the slab mode moves by less than 1e-6 between the two stretches");
    d.param("predicted_when", "tan_theta > 1/(2Q)");
    Ok(Outcome { datasets: vec![d], warnings: Vec::new() })
}
