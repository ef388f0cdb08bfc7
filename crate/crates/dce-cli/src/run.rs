use std::fmt::Write as _;

use dce_core::circuit::circuit_to_cavity;
use dce_core::couplings::{coupling_matrices, coupling_matrices_with_step, DEFAULT_STEP};
use dce_core::dynamics::{photon_number_series_with, DynamicsConfig, EquationVariant, OccupationVector, Setup, WallTrajectory};
use dce_core::entanglement::{protocol_dce, protocol_static, protocol_zeroth, EntanglementOptions, NegativityMap};
use dce_core::msa::{
    closed_form_difference, closed_form_resonance, closed_form_sum, evolve_msa, zeroth_mode_geometry, zeroth_mode_photon_series, MsaOptions,
};
use dce_core::spectrum::{dk_dDeltaL, solve_spectrum, ModeLabel, SolveOptions, WaveNumberSpectrum};
use dce_core::CavityGeometry;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::*;
use crate::error::{CliError, Context};
use crate::svg;

pub struct OutFile {
    pub name: String,
    pub contents: String,
}

/// Files and run diagnostics, before anything touches the disk.
pub struct RunOutput {
    pub files: Vec<OutFile>,
    pub tolerances: Value,
    pub truncation: Value,
    pub diagnostics: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    fn new(tolerances: Value, truncation: Value) -> Self {
        Self { files: Vec::new(), tolerances, truncation, diagnostics: Map::new(), warnings: Vec::new() }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push(OutFile { name: name.to_string(), contents });
    }
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.command.validate()?;
    let svg = cfg.output.svg;
    match &cfg.command {
        Command::Spectrum(p) => spectrum(p, svg),
        Command::Couplings(p) => couplings(p),
        Command::Evolve(p) => evolve(p, svg),
        Command::Msa(p) => msa(p, svg),
        Command::Entangle(p) => entangle(p, svg),
        Command::CircuitMap(p) => circuit_map(p),
    }
}

fn solver_tolerances() -> Value {
    let o = SolveOptions::default();
    json!({ "root_tol": o.root_tol, "scan_step": o.scan_step, "tol_accept": o.tol_accept })
}

/// Shortest round-trip form, in exponent notation when very small or large.
struct F(f64);

impl std::fmt::Display for F {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn geometry(alpha: f64, dl: f64, v: f64) -> Result<CavityGeometry, CliError> {
    CavityGeometry::new(1.0, dl, alpha, v).context("geometry")
}

fn spectrum(p: &SpectrumParams, with_svg: bool) -> Result<RunOutput, CliError> {
    let base_dl = p.dl.or(p.l1.map(|l| 2.0 * l - 1.0));
    let points: Vec<(Option<f64>, CavityGeometry)> = match (&p.scan, &p.range) {
        (Some(axis), Some(r)) => parse_grid("range", r)?
            .into_iter()
            .map(|x| {
                let g = match axis {
                    ScanAxis::Dl => geometry(p.alpha, x, p.v),
                    ScanAxis::Alpha => geometry(x, base_dl.unwrap_or(0.0), p.v),
                };
                g.map(|g| (Some(x), g))
            })
            .collect::<Result<_, _>>()?,
        _ => vec![(None, geometry(p.alpha, base_dl.unwrap_or(0.0), p.v)?)],
    };
    let opts = SolveOptions::with_modes(p.n_modes);
    let spectra: Vec<WaveNumberSpectrum> = points.par_iter().map(|(_, g)| solve_spectrum(g, &opts)).collect::<Result<_, _>>().context("spectrum")?;

    let lead = p.scan.map(|a| match a {
        ScanAxis::Dl => "dl,",
        ScanAxis::Alpha => "alpha,",
    });
    let mut csv = format!("{}m,label,k*L,omega*L,dk_dDL\n", lead.unwrap_or(""));
    let mut diff = format!("{}m,label,dk*L\n", lead.unwrap_or(""));
    let mut singular = 0;
    for ((x, g), s) in points.iter().zip(&spectra) {
        let prefix = x.map(|x| format!("{},", F(x))).unwrap_or_default();
        for (m, (&k, label)) in s.k.iter().zip(&s.labels).enumerate() {
            let slope = dk_dDeltaL(g, k).unwrap_or_else(|_| {
                singular += 1;
                f64::NAN
            });
            writeln!(csv, "{prefix}{m},{label},{},{},{}", F(k), F(s.omega(m)), F(slope)).unwrap();
            if m > 0 {
                writeln!(diff, "{prefix}{m},{label},{}", F(k - s.k[m - 1])).unwrap();
            }
        }
    }
    let mut out = RunOutput::new(solver_tolerances(), json!({ "n_modes": p.n_modes }));
    out.diagnostics.insert("points".into(), json!(points.len()));
    if singular > 0 {
        out.warnings.push(format!("{singular} slopes are singular and written as NaN"));
    }
    out.add("spectrum.csv", csv);
    if p.differences {
        out.add("spectrum_differences.csv", diff);
    }
    if with_svg && p.scan.is_some() {
        let series: Vec<(String, Vec<(f64, f64)>)> = (0..p.n_modes)
            .map(|m| (format!("m={m}"), points.iter().zip(&spectra).map(|((x, _), s)| (x.unwrap(), s.k[m])).collect()))
            .collect();
        let axis = if p.scan == Some(ScanAxis::Dl) { "dL/L" } else { "alpha/L" };
        out.add("spectrum.svg", svg::line_plot("wavenumbers", axis, "kL", &series));
    }
    Ok(out)
}

fn matrix_csv(rows: usize, cols: usize, at: impl Fn(usize, usize) -> f64) -> String {
    let mut s = String::from("n");
    for l in 0..cols {
        write!(s, ",{l}").unwrap();
    }
    s.push('\n');
    for n in 0..rows {
        write!(s, "{n}").unwrap();
        for l in 0..cols {
            write!(s, ",{}", F(at(n, l))).unwrap();
        }
        s.push('\n');
    }
    s
}

fn couplings(p: &CouplingsParams) -> Result<RunOutput, CliError> {
    let g = geometry(p.alpha, p.l0, p.v)?;
    let spec = solve_spectrum(&g, &SolveOptions::with_modes(p.n_modes)).context("spectrum")?;
    let c = coupling_matrices(&g, &spec, p.n_modes).context("couplings")?;
    let mut tol = solver_tolerances();
    tol["fd_step"] = json!(DEFAULT_STEP);
    let mut out = RunOutput::new(tol, json!({ "n_modes": p.n_modes }));
    out.add("couplings_g.csv", matrix_csv(c.g.nrows(), c.g.ncols(), |n, l| c.g[(n, l)]));
    out.add("couplings_h.csv", matrix_csv(c.h.nrows(), c.h.ncols(), |n, l| c.h[(n, l)]));
    if p.check {
        let half = coupling_matrices_with_step(&g, &spec, p.n_modes, 0.5 * DEFAULT_STEP).context("couplings")?;
        let dg = (&c.g - &half.g).amax();
        let dh = (&c.h - &half.h).amax();
        let report = format!("matrix,max_abs_change,max_abs_value\ng,{},{}\nh,{},{}\n", F(dg), F(c.g.amax()), F(dh), F(c.h.amax()));
        out.diagnostics.insert("step_change".into(), json!({ "g": dg, "h": dh }));
        out.add("couplings_check.csv", report);
    }
    Ok(out)
}

struct Drive {
    setup: Setup,
    omega: f64,
    grid: Vec<f64>,
    n0: Vec<f64>,
    cfg: DynamicsConfig,
}

fn drive(p: &DriveParams) -> Result<Drive, CliError> {
    let g = geometry(p.alpha, p.l0, p.v)?;
    let setup = Setup::new(&g, p.n_modes).context("dynamics setup")?;
    let omega = FrequencyExpr::parse(&p.omega)?.eval(&setup.spectrum.k)?;
    if !(omega > 0.0) {
        return Err(CliError::config("omega", format!("resolves to {omega}, must be positive")));
    }
    let cfg = DynamicsConfig {
        n_modes: p.n_modes,
        dt_fraction: p.dt_fraction,
        variant: match p.variant {
            Variant::A => EquationVariant::A,
            Variant::B => EquationVariant::B,
        },
        ..Default::default()
    };
    Ok(Drive { setup, omega, grid: parse_grid("tf_grid", &p.tf_grid)?, n0: parse_occupations(&p.n0, p.n_modes)?, cfg })
}

fn photon_csv(t: &[f64], modes: &[usize], labels: &[String], n: &[Vec<f64>]) -> String {
    let mut s = String::from("t_f,mode,label,N\n");
    for (i, &tf) in t.iter().enumerate() {
        for (j, &m) in modes.iter().enumerate() {
            writeln!(s, "{},{m},{},{}", F(tf), labels[j], F(n[i][j])).unwrap();
        }
    }
    s
}

fn photon_svg(t: &[f64], labels: &[String], n: &[Vec<f64>]) -> String {
    let series: Vec<(String, Vec<(f64, f64)>)> =
        labels.iter().enumerate().map(|(j, l)| (l.clone(), t.iter().zip(n).map(|(&x, v)| (x, v[j])).collect())).collect();
    svg::line_plot("photon numbers", "t_f/L", "N", &series)
}

fn drive_record(out: &mut RunOutput, d: &Drive) {
    out.diagnostics.insert("omega".into(), json!(d.omega));
    out.diagnostics.insert("k".into(), json!(d.setup.spectrum.k));
    out.diagnostics.insert("labels".into(), json!(d.setup.spectrum.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>()));
}

fn evolve(p: &DriveParams, with_svg: bool) -> Result<RunOutput, CliError> {
    let d = drive(p)?;
    let t_end = d.grid.iter().cloned().fold(0.0, f64::max);
    let traj = WallTrajectory { l0: p.l0, epsilon: p.epsilon, omega: d.omega, t_f: t_end };
    let mut tol = solver_tolerances();
    tol["dynamics"] = serde_json::to_value(d.cfg).expect("config serializes");
    let mut out = RunOutput::new(tol, json!({ "n_modes": p.n_modes }));
    if !traj.amplitude_ok(&d.setup.geometry) {
        out.warnings.push("drive amplitude is not small against the sub-cavities".into());
    }
    let n0 = OccupationVector::new(d.n0.clone()).context("occupations")?;
    let s = photon_number_series_with(&d.setup, &traj, &n0, &d.grid, &d.cfg).context("dynamics")?;
    drive_record(&mut out, &d);
    out.diagnostics.insert("max_symplectic_defect".into(), json!(s.defect.iter().cloned().fold(0.0, f64::max)));
    let modes: Vec<usize> = (0..p.n_modes).collect();
    out.add("evolve.csv", photon_csv(&s.t_f, &modes, &s.labels, &s.n));
    if with_svg {
        out.add("evolve.svg", photon_svg(&s.t_f, &s.labels, &s.n));
    }
    Ok(out)
}

/// Index pair `(lo, hi)` whose combination `f(k_lo, k_hi)` is closest to `w`.
fn closest_pair(k: &[f64], w: f64, f: impl Fn(f64, f64) -> f64) -> (usize, usize) {
    let mut best = (0, 1, f64::INFINITY);
    for lo in 0..k.len() {
        for hi in lo + 1..k.len() {
            let d = (f(k[lo], k[hi]) - w).abs();
            if d < best.2 {
                best = (lo, hi, d);
            }
        }
    }
    (best.0, best.1)
}

fn msa(p: &MsaParams, with_svg: bool) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::new(solver_tolerances(), json!({ "n_modes": p.drive.n_modes }));
    let eps = p.drive.epsilon;
    let (t, modes, labels, n): (Vec<f64>, Vec<usize>, Vec<String>, Vec<Vec<f64>>) = if p.closed_form == Some(ClosedForm::Zeroth) {
        let l0 = zeroth_mode_geometry(p.drive.alpha, 1.0).context("zeroth mode")?;
        let g = geometry(p.drive.alpha, l0, 0.0)?;
        let spec = solve_spectrum(&g, &SolveOptions::with_modes(6)).context("spectrum")?;
        let grid = parse_grid("tf_grid", &p.drive.tf_grid)?;
        let s = zeroth_mode_photon_series(&spec, eps, &grid, p.matched).context("zeroth mode")?;
        let found: Vec<usize> = [ModeLabel::Zeroth, ModeLabel::LeftLocalized(1), ModeLabel::RightLocalized(1)]
            .iter()
            .map(|&l| spec.find(l).ok_or_else(|| CliError::config("alpha", format!("no {l} mode at this susceptibility"))))
            .collect::<Result<_, _>>()?;
        out.diagnostics.insert("resolved_l0".into(), json!(l0));
        out.diagnostics.insert("omega".into(), json!(s.omega[0] + s.omega[1]));
        out.diagnostics.insert("zeroth_couplings".into(), json!([s.couplings.0, s.couplings.1]));
        let labels = found.iter().map(|&i| spec.labels[i].to_string()).collect();
        (s.t_f, found, labels, s.n.iter().map(|v| v.to_vec()).collect())
    } else {
        let d = drive(&p.drive)?;
        drive_record(&mut out, &d);
        let k = &d.setup.spectrum.k;
        let label = |i: usize| d.setup.spectrum.labels[i].to_string();
        let closed = |m: &[usize], f: &dyn Fn(f64) -> Result<Vec<f64>, CliError>| -> Result<_, CliError> {
            let n = d.grid.iter().map(|&t| f(t)).collect::<Result<Vec<_>, _>>()?;
            Ok((d.grid.clone(), m.to_vec(), m.iter().map(|&i| label(i)).collect(), n))
        };
        match p.closed_form {
            None => {
                let amps = evolve_msa(&d.setup.couplings, d.omega, eps, &d.grid, &MsaOptions::default()).context("msa")?;
                out.diagnostics.insert("conditions".into(), serde_json::to_value(&amps.conditions).expect("conditions serialize"));
                let defect = (0..amps.t.len()).map(|i| amps.bogoliubov(i).symplectic_defect()).fold(0.0, f64::max);
                out.diagnostics.insert("max_symplectic_defect".into(), json!(defect));
                let n = amps.photon_numbers(&OccupationVector::new(d.n0.clone()).context("occupations")?).context("msa")?;
                let modes: Vec<usize> = (0..p.drive.n_modes).collect();
                (d.grid.clone(), modes.clone(), modes.iter().map(|&i| label(i)).collect(), n)
            }
            Some(ClosedForm::Resonance) => {
                let m = (0..k.len()).min_by(|&a, &b| (2.0 * k[a] - d.omega).abs().total_cmp(&(2.0 * k[b] - d.omega).abs())).unwrap();
                closed(&[m], &|t| Ok(vec![closed_form_resonance(&d.setup.geometry, &d.setup.spectrum, m, eps, t).context("closed form")?]))?
            }
            Some(ClosedForm::Sum) => {
                let (lo, hi) = closest_pair(k, d.omega, |a, b| a + b);
                closed(&[lo, hi], &|t| {
                    let n = closed_form_sum(&d.setup.couplings, lo, hi, eps, t);
                    Ok(vec![n, n])
                })?
            }
            Some(ClosedForm::Difference) => {
                let (lo, hi) = closest_pair(k, d.omega, |a, b| b - a);
                let start = d.n0[lo];
                closed(&[lo, hi], &|t| {
                    let (a, b) = closed_form_difference(&d.setup.couplings, lo, hi, start, eps, t);
                    Ok(vec![a, b])
                })?
            }
            Some(ClosedForm::Zeroth) => unreachable!(),
        }
    };
    out.add("msa.csv", photon_csv(&t, &modes, &labels, &n));
    if with_svg {
        out.add("msa.svg", photon_svg(&t, &labels, &n));
    }
    Ok(out)
}

fn entangle(p: &EntangleParams, with_svg: bool) -> Result<RunOutput, CliError> {
    let opts = EntanglementOptions { n_local: p.n_local, n_global: p.n_global, dt: p.dt, ..Default::default() };
    let mut out = RunOutput::new(
        json!({ "physicality_tol": opts.physicality_tol, "solver": solver_tolerances() }),
        json!({ "n_local": p.n_local, "n_global": p.n_global }),
    );
    let maps: Vec<NegativityMap> = match p.protocol {
        Protocol::Static => vec![protocol_static(&geometry(p.alpha, p.l0, 0.0)?, &opts).context("entanglement")?],
        Protocol::Dce => {
            let grid = parse_grid("tf_grid", p.tf_grid.as_deref().unwrap_or_default())?;
            protocol_dce(&geometry(p.alpha, p.l0, 0.0)?, p.epsilon, &grid, &opts).context("entanglement")?
        }
        Protocol::Zeroth => {
            let grid = parse_grid("tf_grid", p.tf_grid.as_deref().unwrap_or_default())?;
            let (maps, series) = protocol_zeroth(p.alpha, p.epsilon, &grid, p.matched, &opts).context("entanglement")?;
            out.diagnostics.insert("resolved_l0".into(), json!(series.l0));
            maps
        }
    };
    let timed = p.protocol != Protocol::Static;
    let mut csv = String::from(if timed { "n,m,negativity,t_f\n" } else { "n,m,negativity\n" });
    for map in &maps {
        for n in 1..=map.values.nrows() {
            for m in 1..=map.values.ncols() {
                if timed {
                    writeln!(csv, "{n},{m},{},{}", F(map.get(n, m)), F(map.t_f)).unwrap();
                } else {
                    writeln!(csv, "{n},{m},{}", F(map.get(n, m))).unwrap();
                }
            }
        }
    }
    let min = maps.iter().map(|m| m.min_symplectic).fold(f64::INFINITY, f64::min);
    out.diagnostics.insert("min_symplectic_eigenvalue".into(), json!(min));
    out.add("entangle.csv", csv);
    if with_svg {
        for (i, map) in maps.iter().enumerate() {
            let name = if timed { format!("entangle_{i:03}.svg") } else { "entangle.svg".into() };
            out.add(&name, svg::heatmap(&format!("log negativity, t_f = {}", map.t_f), map.values.nrows(), map.values.ncols(), |n, m| map.values[(n, m)]));
        }
    }
    Ok(out)
}

fn circuit_map(p: &CircuitMapParams) -> Result<RunOutput, CliError> {
    let m = circuit_to_cavity(&p.circuit).context("circuit mapping")?;
    let mut out = RunOutput::new(json!({ "max_fit_residual": 0.01 }), json!({}));
    out.warnings.extend(m.warnings.iter().cloned());
    out.diagnostics.insert("fit_residual".into(), json!(m.fit_residual));
    out.diagnostics.insert("dirichlet_ratio".into(), json!(m.dirichlet_ratio));
    let report = format!(
        "quantity,value\nalpha,{}\nv,{}\nl0,{}\nepsilon,{}\nomega,{}\nfit_residual,{}\ndirichlet_ratio,{}\n",
        F(m.geometry.alpha),
        F(m.geometry.v),
        F(m.geometry.dl),
        F(m.trajectory.epsilon),
        F(m.trajectory.omega),
        F(m.fit_residual),
        F(m.dirichlet_ratio)
    );
    out.add("circuit_map.csv", report);
    out.add("cavity.json", serde_json::to_string_pretty(&m).expect("mapping serializes") + "\n");
    Ok(out)
}
