use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use resonance::dynamics::{decompose, discrete_spectrum, evolve_survival, fit_decay_rate};
use resonance::feshbach::{
    default_kappa_window, lattice_siegert_poles, lead_self_energy, seed_grid, solve_from_seeds, solve_nonlinear_eig,
};
use resonance::hermiticity::{build_wavefunction, expanding_norm, five_point_derivative};
use resonance::poles::find_poles;
use resonance::series::{symmetric_grid, uniform_grid};
use resonance::transfer::scattering_amplitudes;
use resonance::{
    Branch, ComplexPole, Error, LatticeModel, ModelFile, PendulumPair, PoleClass, Potential1D, SearchWindow, TimeSeries,
};

use crate::output::{Cell, Format, Table};

/// Continuum window used when `--window` is absent.
pub const DEFAULT_WINDOW: [f64; 4] = [-8.0, 8.0, -2.5, 6.0];

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// Result of one subcommand: the payload is written even when `failure` is set.
#[derive(Debug)]
pub struct Outcome {
    pub subcommand: &'static str,
    pub model_sha256: Option<String>,
    pub parameters: Vec<(&'static str, Cell)>,
    pub table: Table,
    pub default_format: Format,
    pub summary: String,
    pub failure: Option<Failure>,
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// Resolves `preset:NAME` or a JSON model file.
pub fn load_model(source: &str) -> Result<ModelFile, Failure> {
    let Some(name) = source.strip_prefix("preset:") else {
        return Ok(ModelFile::load(source)?);
    };
    let continuum = match name {
        "well" => Some(Potential1D::square_well(1.0, 1.0)?),
        "deep-well" => Some(Potential1D::square_well(25.0, 1.0)?),
        "barrier" => Some(Potential1D::square_barrier(1.0, 1.0)?),
        "free" => Some(Potential1D::free()),
        _ => None,
    };
    if let Some(p) = continuum {
        return Ok(ModelFile::Continuum(p));
    }
    LatticeModel::preset(name).map(ModelFile::Lattice).ok_or_else(|| {
        invalid(format!(
            "unknown preset {name:?} (continuum: well, deep-well, barrier, free; lattice: impurity, chain, double-dot)"
        ))
    })
}

fn model_hash(model: &ModelFile) -> String {
    Sha256::digest(model.to_canonical_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn label<T: serde::Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

fn window_from(values: Option<&[f64]>, fallback: [f64; 4]) -> Result<[f64; 4], Failure> {
    let w = match values {
        None => fallback,
        Some(&[a, b, c, d]) => [a, b, c, d],
        Some(v) => return Err(invalid(format!("--window takes 4 numbers, got {}", v.len()))),
    };
    if !(w[0] < w[1] && w[2] < w[3]) {
        return Err(invalid(format!("empty window {w:?}")));
    }
    Ok(w)
}

fn check_positive(name: &str, x: f64) -> Result<(), Failure> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(text: &str) -> Result<Complex64, Failure> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || invalid(format!("cannot parse complex number {text:?}"));
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(num(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => num(t),
    };
    match split {
        Some(i) => Ok(Complex64::new(num(&body[..i])?, imag(&body[i..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn scatter(model: &str, emin: f64, emax: f64, samples: usize) -> Result<Outcome, Failure> {
    let file = load_model(model)?;
    let p = file.continuum()?;
    check_positive("emin", emin)?;
    check_positive("emax", emax)?;
    if emax < emin || samples == 0 {
        return Err(invalid("need 0 < emin <= emax and at least one sample"));
    }
    let mut table = Table::new(vec!["E", "R", "T", "G"]);
    let mut worst: f64 = 0.0;
    for e in uniform_grid(emin, emax, samples) {
        let s = scattering_amplitudes(p, e)?;
        worst = worst.max((s.reflection + s.transmission - 1.0).abs());
        table.push(vec![e.into(), s.reflection.into(), s.transmission.into(), s.transmission.into()]);
    }
    Ok(Outcome {
        subcommand: "scatter",
        model_sha256: Some(model_hash(&file)),
        parameters: vec![
            ("model", model.into()),
            ("emin", emin.into()),
            ("emax", emax.into()),
            ("samples", samples.into()),
        ],
        table,
        default_format: Format::Csv,
        summary: format!("{samples} energies, max |R+T-1| = {worst:.3e}"),
        failure: None,
    })
}

fn pole_table(poles: &[ComplexPole]) -> Table {
    let mut table = Table::new(vec![
        "k_re",
        "k_im",
        "E_re",
        "E_im",
        "sheet",
        "class",
        "residual",
        "newton_iterations",
        "certified",
        "winding",
    ]);
    for p in poles {
        table.push(vec![
            p.k.re.into(),
            p.k.im.into(),
            p.energy.re.into(),
            p.energy.im.into(),
            label(&p.sheet).into(),
            label(&p.class).into(),
            p.residual.into(),
            p.newton_iterations.into(),
            p.certified.into(),
            p.winding.into(),
        ]);
    }
    table
}

fn class_counts(poles: &[ComplexPole]) -> String {
    let classes = [
        PoleClass::Bound,
        PoleClass::AntiBound,
        PoleClass::Resonant,
        PoleClass::AntiResonant,
        PoleClass::Unphysical,
    ];
    classes
        .iter()
        .map(|c| (c, poles.iter().filter(|p| p.class == *c).count()))
        .filter(|(_, n)| *n > 0)
        .map(|(c, n)| format!("{n} {}", label(c)))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn poles(model: &str, window: Option<&[f64]>, max_depth: usize, axis_tolerance: f64) -> Result<Outcome, Failure> {
    let file = load_model(model)?;
    check_positive("axis tolerance", axis_tolerance)?;
    let (found, subdivisions, additive, total) = match &file {
        ModelFile::Continuum(p) => {
            let w = window_from(window, DEFAULT_WINDOW)?;
            let sw = SearchWindow {
                max_depth,
                axis_tolerance,
                ..SearchWindow::new((w[0], w[1]), (w[2], w[3]))
            };
            let s = find_poles(p, &sw)?;
            let additive = s.subdivisions.iter().all(|d| d.is_additive());
            (s.poles, s.subdivisions.len(), additive, s.total_count)
        }
        ModelFile::Lattice(m) => {
            let d = default_kappa_window();
            let w = window_from(window, [d.re_k.0, d.re_k.1, d.im_k.0, d.im_k.1])?;
            let sw = SearchWindow {
                max_depth,
                axis_tolerance,
                ..SearchWindow::new((w[0], w[1]), (w[2], w[3]))
            };
            let s = lattice_siegert_poles(m, &sw)?;
            let additive = s.subdivisions.iter().all(|d| d.is_additive());
            (s.poles, s.subdivisions.len(), additive, s.total_count)
        }
    };
    let uncertified = found.iter().filter(|p| !p.certified).count();
    let failure = if uncertified > 0 {
        Some(Failure::Numerical(format!("{uncertified} pole(s) failed certification")))
    } else if !additive {
        Some(Failure::Numerical("winding counts are not additive under subdivision".into()))
    } else {
        None
    };
    let mut parameters = vec![("model", model.into())];
    if let Some(w) = window {
        for (name, v) in ["re_min", "re_max", "im_min", "im_max"].into_iter().zip(w) {
            parameters.push((name, (*v).into()));
        }
    }
    parameters.push(("max_depth", max_depth.into()));
    parameters.push(("axis_tolerance", axis_tolerance.into()));
    let counts = class_counts(&found);
    Ok(Outcome {
        subcommand: "poles",
        model_sha256: Some(model_hash(&file)),
        parameters,
        summary: format!(
            "{} pole(s){}{}, winding total {total}, {subdivisions} subdivisions",
            found.len(),
            if counts.is_empty() { "" } else { ": " },
            counts
        ),
        table: pole_table(&found),
        default_format: Format::Json,
        failure,
    })
}

pub struct NormCheck<'a> {
    pub model: &'a str,
    pub pole_index: Option<usize>,
    pub window: Option<&'a [f64]>,
    pub l0: f64,
    pub tmax: Option<f64>,
    pub points: usize,
    pub threshold: f64,
    pub grid_step: f64,
}

pub fn norm_check(args: &NormCheck) -> Result<Outcome, Failure> {
    let file = load_model(args.model)?;
    let p = file.continuum()?;
    check_positive("threshold", args.threshold)?;
    if args.points < 5 {
        return Err(invalid("norm-check needs at least 5 time points"));
    }
    let w = window_from(args.window, DEFAULT_WINDOW)?;
    let search = find_poles(p, &SearchWindow::new((w[0], w[1]), (w[2], w[3])))?;
    let pole = match args.pole_index {
        Some(i) => *search
            .poles
            .get(i)
            .ok_or_else(|| invalid(format!("pole index {i} out of range ({} poles)", search.poles.len())))?,
        None => *search
            .poles
            .iter()
            .filter(|p| p.class == PoleClass::Resonant)
            .min_by(|a, b| a.k.re.total_cmp(&b.k.re))
            .ok_or_else(|| invalid("no resonant pole in the search window"))?,
    };
    if !pole.certified {
        return Err(Failure::Numerical(format!("pole k = {} is not certified", pole.k)));
    }
    let tmax = match args.tmax {
        Some(t) => t,
        None if pole.energy.im != 0.0 => 5.0 / pole.energy.im.abs(),
        None => 10.0,
    };
    check_positive("tmax", tmax)?;
    let grid = if pole.class == PoleClass::AntiResonant {
        uniform_grid(-tmax, 0.0, args.points)
    } else {
        uniform_grid(0.0, tmax, args.points)
    };
    let wf = build_wavefunction(p, &pole, args.grid_step)?;
    let n: TimeSeries<f64> = expanding_norm(&wf, args.l0, &grid)?;
    let dn = five_point_derivative(&n)?;
    let origin = if pole.class == PoleClass::AntiResonant { n.len() - 1 } else { 0 };
    let n0 = n.values[origin];
    let deviation = n.values.iter().map(|v| (v / n0 - 1.0).abs()).fold(0.0, f64::max);
    let mut table = Table::new(vec!["t", "N", "dN/dt"]);
    for ((t, v), d) in n.iter().zip(&dn) {
        table.push(vec![t.into(), (*v).into(), (*d).into()]);
    }
    let failure = (deviation >= args.threshold).then(|| {
        Failure::Numerical(format!(
            "max |N(t)/N(0) - 1| = {deviation:.3e} exceeds threshold {:.1e}",
            args.threshold
        ))
    });
    let mut parameters = vec![("model", args.model.into())];
    if let Some(i) = args.pole_index {
        parameters.push(("pole_index", i.into()));
    }
    for (name, v) in ["re_min", "re_max", "im_min", "im_max"].into_iter().zip(w) {
        parameters.push((name, v.into()));
    }
    parameters.extend([
        ("L0", args.l0.into()),
        ("tmax", tmax.into()),
        ("points", args.points.into()),
        ("threshold", args.threshold.into()),
        ("grid_step", args.grid_step.into()),
    ]);
    Ok(Outcome {
        subcommand: "norm-check",
        model_sha256: Some(model_hash(&file)),
        parameters,
        table,
        default_format: Format::Csv,
        summary: format!(
            "pole k = {:.10}{:+.10}i ({}), max deviation {deviation:.3e} (threshold {:.1e})",
            pole.k.re,
            pole.k.im,
            label(&pole.class),
            args.threshold
        ),
        failure,
    })
}

/// Reads `re im` pairs, one per line; blank lines and `#` comments are skipped.
pub fn read_seeds(path: &Path) -> Result<Vec<Complex64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut seeds = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| invalid(format!("{}:{}: expected `re im`", path.display(), n + 1)))?;
        match parts[..] {
            [re, im] if re.is_finite() && im.is_finite() => seeds.push(Complex64::new(re, im)),
            _ => return Err(invalid(format!("{}:{}: expected `re im`", path.display(), n + 1))),
        }
    }
    if seeds.is_empty() {
        return Err(invalid(format!("{} contains no seeds", path.display())));
    }
    Ok(seeds)
}

pub fn feshbach(model: &str, branch: &str, seeds: &str) -> Result<Outcome, Failure> {
    let file = load_model(model)?;
    let m = file.lattice()?;
    let branch: Branch = branch.parse().map_err(|_| invalid(format!("unknown branch {branch:?} (ret or adv)")))?;
    let seed_list = match seeds {
        "grid" => seed_grid(m, branch),
        path => read_seeds(Path::new(path))?,
    };
    let sweep = solve_from_seeds(m, branch, &seed_list);
    if sweep.poles.is_empty() {
        let first = solve_nonlinear_eig(m, branch, seed_list[0])
            .err()
            .map(|e| e.to_string())
            .unwrap_or_default();
        return Err(Failure::Numerical(format!(
            "all {} seed(s) failed on the {branch} branch; first seed {}: {first}",
            seed_list.len(),
            seed_list[0]
        )));
    }
    let mut table = Table::new(vec![
        "E_re",
        "E_im",
        "branch",
        "sigma_re",
        "sigma_im",
        "kappa_re",
        "kappa_im",
        "class",
        "residual",
        "iterations",
    ]);
    for p in &sweep.poles {
        table.push(vec![
            p.energy.re.into(),
            p.energy.im.into(),
            p.branch.to_string().into(),
            p.self_energy.re.into(),
            p.self_energy.im.into(),
            p.kappa.re.into(),
            p.kappa.im.into(),
            label(&p.class).into(),
            p.residual.into(),
            p.iterations.into(),
        ]);
    }
    let cps: Vec<ComplexPole> = sweep.poles.iter().map(|p| p.to_complex_pole()).collect();
    Ok(Outcome {
        subcommand: "feshbach",
        model_sha256: Some(model_hash(&file)),
        parameters: vec![
            ("model", model.into()),
            ("branch", branch.to_string().into()),
            ("seeds", seeds.into()),
        ],
        table,
        default_format: Format::Json,
        summary: format!(
            "{} pole(s) on the {branch} branch ({}) from {} seeds, {} failed",
            sweep.poles.len(),
            class_counts(&cps),
            seed_list.len(),
            sweep.failed_seeds
        ),
        failure: None,
    })
}

pub fn sigma(energy: &str, j: f64) -> Result<Outcome, Failure> {
    let e = parse_complex(energy)?;
    let mut table = Table::new(vec![
        "branch", "E_re", "E_im", "sigma_re", "sigma_im", "kappa_re", "kappa_im", "identity_residual",
    ]);
    let mut parts = Vec::new();
    for branch in [Branch::Retarded, Branch::Advanced] {
        let s = lead_self_energy(e, j, branch)?.value;
        let kappa = resonance::feshbach::kappa_from_self_energy(s, j);
        let identity = (s - j * j / (e - s)).norm();
        parts.push(format!("{branch} {:.12}{:+.12}i", s.re, s.im));
        table.push(vec![
            branch.to_string().into(),
            e.re.into(),
            e.im.into(),
            s.re.into(),
            s.im.into(),
            kappa.re.into(),
            kappa.im.into(),
            identity.into(),
        ]);
    }
    Ok(Outcome {
        subcommand: "sigma",
        model_sha256: None,
        parameters: vec![("E_re", e.re.into()), ("E_im", e.im.into()), ("J", j.into())],
        table,
        default_format: Format::Csv,
        summary: format!("E = {e}: {}", parts.join(", ")),
        failure: None,
    })
}

pub fn dynamics(
    model: &str,
    sites: usize,
    tmax: f64,
    steps: usize,
    fit_window: Option<&[f64]>,
) -> Result<Outcome, Failure> {
    let file = load_model(model)?;
    let m = file.lattice()?;
    check_positive("tmax", tmax)?;
    if steps == 0 {
        return Err(invalid("steps must be at least 1"));
    }
    let grid = symmetric_grid(tmax, steps);
    let survival = evolve_survival(m, sites, &grid)?;
    let d = decompose(m, &survival, &discrete_spectrum(m))?;
    let n = d.t.len();
    let asymmetry = (0..n).map(|i| (d.survival[i] - d.survival[n - 1 - i]).abs()).fold(0.0, f64::max);
    let mut table = Table::new(vec!["t", "P", "P_res", "P_antires", "P_bound", "residual"]);
    for i in 0..n {
        table.push(vec![
            d.t[i].into(),
            d.survival[i].into(),
            d.resonant[i].into(),
            d.anti_resonant[i].into(),
            d.bound[i].into(),
            d.residual[i].into(),
        ]);
    }
    let mut parameters = vec![
        ("model", model.into()),
        ("sites", sites.into()),
        ("tmax", tmax.into()),
        ("steps", steps.into()),
    ];
    let mut summary = format!("{} poles in the expansion, max |P(t) - P(-t)| = {asymmetry:.3e}", d.terms.len());
    if let Some(w) = fit_window {
        let [lo, hi] = w[..] else {
            return Err(invalid("--fit-window takes 2 numbers"));
        };
        let forward = TimeSeries::new("P", d.t[n / 2..].to_vec(), d.survival[n / 2..].to_vec());
        let fit = fit_decay_rate(&forward, lo, hi)?;
        parameters.push(("fit_lo", lo.into()));
        parameters.push(("fit_hi", hi.into()));
        summary.push_str(&format!(", decay rate {:.6} from {} maxima in [{lo}, {hi}]", fit.rate, fit.maxima));
        if let Some(res) = d
            .terms
            .iter()
            .filter(|t| t.pole.class == PoleClass::Resonant)
            .min_by(|a, b| b.pole.energy.im.total_cmp(&a.pole.energy.im))
        {
            summary.push_str(&format!(" (2|Im E| = {:.6})", 2.0 * res.pole.energy.im.abs()));
        }
    }
    Ok(Outcome {
        subcommand: "dynamics",
        model_sha256: Some(model_hash(&file)),
        parameters,
        table,
        default_format: Format::Csv,
        summary,
        failure: None,
    })
}

pub fn pendulum(
    omega: f64,
    alpha: f64,
    x0: [f64; 2],
    v0: [f64; 2],
    tmax: f64,
    points: usize,
) -> Result<Outcome, Failure> {
    let pair = PendulumPair::new(omega, alpha)?;
    check_positive("tmax", tmax)?;
    if points < 2 {
        return Err(invalid("pendulum needs at least 2 time points"));
    }
    let grid = uniform_grid(0.0, tmax, points);
    let series = pair.evolve(x0, v0, &grid)?;
    let mut table = Table::new(vec!["t", "x1", "x2"]);
    for (t, x) in series.iter() {
        table.push(vec![t.into(), x[0].into(), x[1].into()]);
    }
    let [slow, fast] = pair.modes();
    Ok(Outcome {
        subcommand: "pendulum",
        model_sha256: None,
        parameters: vec![
            ("omega", omega.into()),
            ("alpha", alpha.into()),
            ("x1_0", x0[0].into()),
            ("x2_0", x0[1].into()),
            ("v1_0", v0[0].into()),
            ("v2_0", v0[1].into()),
            ("tmax", tmax.into()),
            ("points", points.into()),
        ],
        table,
        default_format: Format::Csv,
        summary: format!(
            "mode frequencies {:.12} and {:.12}, beat period {:.6}",
            slow.frequency,
            fast.frequency,
            2.0 * std::f64::consts::PI / (fast.frequency - slow.frequency)
        ),
        failure: None,
    })
}
