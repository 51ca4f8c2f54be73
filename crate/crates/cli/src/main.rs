mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use stargen::io;
use stargen::moyal::star_product;
use stargen::spectral::{
    eigensolve, quadratic_spectrum, stargen_from_eigen, stargen_residual, williamson, HamiltonianSpec, StarPath,
    WindowLabel,
};
use stargen::verify;
use stargen::wigner::WindowedTransform;
use stargen::{Error, PhaseField, PhaseGrid, Result, C64};

use config::{GridConfig, RunConfig, WindowSpec};

#[derive(Parser)]
#[command(name = "stargen", version, about = "Star-genvalue problems on discretized phase space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    hbar: Option<f64>,
    /// XMIN:XMAX:N
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    /// Hermite index or path to an SGF1 wave field; repeatable.
    #[arg(long)]
    window: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Harmonic oscillator pipeline (the Hamiltonian in the config is ignored).
    Oscillator(RunArgs),
    /// Eigenpairs and star-genfunctions of the configured Hamiltonian.
    Solve(RunArgs),
    /// Moyal product of two SGF1 phase fields.
    Star {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also report the star commutator a★b − b★a.
        #[arg(long)]
        verify: bool,
    },
    /// Cross-Wigner transform W_φψ of an SGF1 wave field.
    Wigner {
        psi: PathBuf,
        #[arg(long, default_value = "0")]
        window: String,
        /// .sgf or .csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Williamson normal form of a quadratic_nd Hamiltonian.
    Williamson(RunArgs),
    /// Run an invariant suite: fourier, wigner, star, spectral, williamson, decay or all.
    Verify { suite: String },
}

enum Failure {
    Lib(Error),
    Contract(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Unsupported(_) => 2,
        Error::Shape(_) | Error::OffGrid(_) | Error::Io(_) => 3,
        Error::Numerical(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    if let Ok(n) = std::env::var("STARGEN_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: STARGEN_THREADS must be a positive integer, got '{n}'");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Contract(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}

fn run(cmd: Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Oscillator(a) => {
            let mut cfg = resolve(&a)?;
            cfg.hamiltonian = Some(HamiltonianSpec::oscillator());
            solve(&cfg)
        }
        Command::Solve(a) => {
            let cfg = resolve(&a)?;
            if cfg.hamiltonian.is_none() {
                return Err(Error::Config("solve needs a hamiltonian in --config".into()).into());
            }
            solve(&cfg)
        }
        Command::Star { a, b, out, verify } => star(&a, &b, &out, verify),
        Command::Wigner { psi, window, out } => wigner(&psi, &window, &out),
        Command::Williamson(a) => williamson_cmd(&resolve(&a)?),
        Command::Verify { suite } => {
            let checks = verify::run_suite(&suite)?;
            print!("{}", verify::report(&checks));
            match checks.iter().filter(|c| !c.passed()).count() {
                0 => Ok(()),
                n => Err(Failure::Contract(format!("{n} verification checks failed"))),
            }
        }
    }
}

fn resolve(a: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(a.config.as_deref())?;
    if let Some(h) = a.hbar {
        cfg.hbar = h;
    }
    if let Some(g) = &a.grid {
        cfg.grid = GridConfig::parse(g)?;
    }
    if let Some(c) = a.count {
        cfg.count = c;
    }
    if !a.window.is_empty() {
        cfg.windows = a.window.iter().map(|w| WindowSpec::parse(w)).collect();
    }
    if let Some(o) = &a.out {
        cfg.output_dir = o.clone();
    }
    cfg.grid.build()?;
    cfg.hbar()?;
    Ok(cfg)
}

fn window_transform(spec: &WindowSpec, grid: PhaseGrid) -> Result<(WindowedTransform, WindowLabel)> {
    match spec {
        WindowSpec::Hermite(k) => Ok((WindowedTransform::hermite(*k, grid)?, WindowLabel::Hermite(*k))),
        WindowSpec::File(path) => {
            let (phi, _) = io::read_wave(path)?;
            if !phi.grid().same_as(grid.x_axis()) {
                return Err(Error::Shape(format!("window {} is not on the solver grid", path.display())));
            }
            Ok((WindowedTransform::new(phi, grid)?, WindowLabel::Custom))
        }
    }
}

#[derive(Serialize)]
struct StarGenRecord {
    j: usize,
    window: String,
    lambda: f64,
    residual: f64,
    field: String,
}

#[derive(Serialize)]
struct EigenReport<'a> {
    hamiltonian: &'a HamiltonianSpec,
    grid: GridConfig,
    hbar: f64,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    states: Vec<String>,
    stargen: Vec<StarGenRecord>,
}

fn window_name(label: WindowLabel, i: usize) -> String {
    match label {
        WindowLabel::Hermite(k) => k.to_string(),
        WindowLabel::Custom => format!("custom{i}"),
    }
}

fn solve(cfg: &RunConfig) -> std::result::Result<(), Failure> {
    let h = cfg.hamiltonian.as_ref().expect("hamiltonian resolved");
    let hbar = cfg.hbar()?;
    let xg = cfg.grid.build()?;
    let pairs = eigensolve(h, xg, hbar, cfg.count)?;
    let pg = PhaseGrid::from_x_axis(xg, hbar)?;
    let windows = cfg
        .windows
        .iter()
        .map(|w| window_transform(w, pg))
        .collect::<Result<Vec<_>>>()?;

    let out = &cfg.output_dir;
    fs::create_dir_all(out).map_err(Error::from)?;
    let mut csv = String::from("j,k_window,lambda,residual\n");
    let mut states = Vec::new();
    let mut records = Vec::new();
    for (j, pair) in pairs.iter().enumerate() {
        let name = format!("psi_{j}.sgf");
        io::write_wave(&out.join(&name), &pair.psi, hbar)?;
        states.push(name);
        for (i, (t, label)) in windows.iter().enumerate() {
            let sg = stargen_from_eigen(pair, t, *label)?;
            let residual = stargen_residual(h, &sg, StarPath::Auto)?;
            let wname = window_name(*label, i);
            let field = format!("stargen_{j}_w{wname}.sgf");
            io::write_phase(&out.join(&field), &sg.psi)?;
            csv.push_str(&format!("{j},{wname},{},{}\n", io::fmt_f64(sg.lambda), io::fmt_f64(residual)));
            records.push(StarGenRecord { j, window: wname, lambda: sg.lambda, residual, field });
        }
    }
    let report = EigenReport {
        hamiltonian: h,
        grid: cfg.grid,
        hbar: hbar.value(),
        eigenvalues: pairs.iter().map(|p| p.lambda).collect(),
        residuals: pairs.iter().map(|p| p.residual).collect(),
        states,
        stargen: records,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(out.join("eigenvalues.json"), json + "\n").map_err(Error::from)?;
    fs::write(out.join("residuals.csv"), csv).map_err(Error::from)?;
    for (j, p) in pairs.iter().enumerate() {
        println!("{j} {}", io::fmt_f64(p.lambda));
    }
    Ok(())
}

fn write_field(path: &Path, f: &PhaseField) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        Ok(fs::write(path, io::phase_csv(f))?)
    } else {
        io::write_phase(path, f)
    }
}

fn star(a: &Path, b: &Path, out: &Path, verify: bool) -> std::result::Result<(), Failure> {
    let fa = io::read_phase(a)?;
    let fb = io::read_phase(b)?;
    if !fa.grid().same_as(fb.grid()) {
        return Err(Error::Shape(format!("{} and {} are on different grids", a.display(), b.display())).into());
    }
    let ab = star_product(&fa, &fb)?;
    write_field(out, &ab)?;
    println!("norm {}", io::fmt_f64(ab.norm()));
    if verify {
        let comm = ab.sub(&star_product(&fb, &fa)?)?;
        let n = comm.values().len() as f64;
        let mean: C64 = comm.values().iter().sum::<C64>() / n;
        let spread = comm.values().iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
        println!("commutator mean {} {} spread {}", io::fmt_f64(mean.re), io::fmt_f64(mean.im), io::fmt_f64(spread));
    }
    Ok(())
}

fn wigner(psi: &Path, window: &str, out: &Path) -> std::result::Result<(), Failure> {
    let (f, hbar) = io::read_wave(psi)?;
    let grid = PhaseGrid::from_x_axis(*f.grid(), hbar)?;
    let (t, _) = window_transform(&WindowSpec::parse(window), grid)?;
    let w = t.apply(&f)?;
    write_field(out, &w)?;
    println!("norm {}", io::fmt_f64(w.norm()));
    Ok(())
}

#[derive(Serialize)]
struct Level {
    index: Vec<usize>,
    energy: f64,
}

#[derive(Serialize)]
struct WilliamsonReport {
    omegas: Vec<f64>,
    s: Vec<Vec<f64>>,
    levels: Vec<Level>,
}

/// Multi-indices with total quantum number at most `max`, in lexicographic order.
fn multi_indices(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for idx in &out {
            let used: usize = idx.iter().sum();
            for k in 0..=max - used {
                let mut v = idx.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn williamson_cmd(cfg: &RunConfig) -> std::result::Result<(), Failure> {
    let h = cfg
        .hamiltonian
        .as_ref()
        .ok_or_else(|| Error::Config("williamson needs a quadratic_nd hamiltonian in --config".into()))?;
    let m = h.nd_matrix()?;
    let hbar = cfg.hbar()?;
    let dec = williamson(&m)?;
    let n = dec.omegas.len();
    let idx = multi_indices(n, cfg.count.max(1));
    let energies = quadratic_spectrum(&m, &idx, hbar)?;
    let mut levels: Vec<Level> = idx.into_iter().zip(energies).map(|(index, energy)| Level { index, energy }).collect();
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.index.cmp(&b.index)));
    levels.truncate(cfg.count);
    let report = WilliamsonReport {
        omegas: dec.omegas.clone(),
        s: (0..2 * n).map(|i| dec.s.row(i).iter().copied().collect()).collect(),
        levels,
    };
    fs::create_dir_all(&cfg.output_dir).map_err(Error::from)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(cfg.output_dir.join("williamson.json"), json + "\n").map_err(Error::from)?;
    for w in &dec.omegas {
        println!("omega {}", io::fmt_f64(*w));
    }
    Ok(())
}
