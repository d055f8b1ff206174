//! Batch command-line front end.
//!
//! Every subcommand reads one TOML file, writes CSV (and optionally SVG)
//! files into the output directory and prints a short summary. Exit codes:
//! 0 on success, 2 for configuration errors, 3 for numerical failures.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{EchoCase, RunConfig};
use crate::crystal::{
    analytic_equilibrium, find_equilibrium, lowest_stable_equilibrium, metropolis_search, Constraint,
    EquilibriumResult, IonConfiguration, MetropolisSchedule, SearchOutcome, StructureKind,
};
use crate::error::{Error, Result};
use crate::gaussian::{echo_models, loschmidt_echo, time_grid, EchoMetadata, OverlapSeries, QuadraticModel};
use crate::io::{config_hash, line_plot_svg, read_csv, write_csv, write_text, Metadata};
use crate::modes::normal_modes;
use crate::ramsey::{ramsey_p1, ramsey_p2, revival_times, spectrum, Window, REVIVAL_THRESHOLD};
use crate::stability::{render_svg, scan_diagram, CurveSource, ScanSettings};

#[derive(Debug, Parser)]
#[command(name = "ion-crystal", version, about = "Structures, modes, stability and echoes of trapped-ion crystals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Overrides the seed of the configuration file.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Equilibrium configuration and its classification.
    Equilibrium,
    /// Normal-mode frequencies along an α sweep.
    Modes,
    /// Stability diagram over (α, δα).
    Stability,
    /// Loschmidt echo I(t).
    Echo,
    /// Fourier spectra of |I(t)|.
    Spectrum,
    /// Ramsey probabilities P1 and P2.
    Ramsey,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Modes => "modes",
            Command::Stability => "stability",
            Command::Echo => "echo",
            Command::Spectrum => "spectrum",
            Command::Ramsey => "ramsey",
        }
    }
}

struct Context {
    cfg: RunConfig,
    hash: String,
    out: PathBuf,
    seed: u64,
    command: Command,
    written: Vec<PathBuf>,
}

impl Context {
    fn meta(&self) -> Metadata {
        Metadata::new(self.command.name(), &self.hash)
            .with("n_ions", self.cfg.n_ions)
            .with("seed", self.seed)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn csv<C: std::fmt::Display>(&mut self, name: &str, meta: &Metadata, cols: &[&str], rows: Vec<Vec<C>>) -> Result<()> {
        let p = self.path(name);
        write_csv(&p, meta, cols, rows)?;
        self.written.push(p);
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        write_text(&p, text)?;
        self.written.push(p);
        Ok(())
    }
}

/// Runs one command and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let (cfg, text) = RunConfig::load(path)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let mut ctx = Context { cfg, hash: config_hash(&text), out: cli.out.clone(), seed, command: cli.command, written: Vec::new() };
    match cli.command {
        Command::Equilibrium => cmd_equilibrium(&mut ctx)?,
        Command::Modes => cmd_modes(&mut ctx)?,
        Command::Stability => cmd_stability(&mut ctx)?,
        Command::Echo => cmd_echo(&mut ctx)?,
        Command::Spectrum => cmd_spectrum(&mut ctx)?,
        Command::Ramsey => cmd_ramsey(&mut ctx)?,
    }
    Ok(ctx.written)
}

fn missing(section: &str) -> Error {
    Error::Config(format!("configuration has no [{section}] section"))
}

fn cmd_equilibrium(ctx: &mut Context) -> Result<()> {
    let sec = ctx.cfg.equilibrium.clone().ok_or_else(|| missing("equilibrium"))?;
    let trap = ctx.cfg.trap(sec.alpha, sec.delta_alpha)?;
    let spins = ctx.cfg.spins(&sec.spins)?;
    let refine = |kind: StructureKind| -> Result<EquilibriumResult> {
        find_equilibrium(&trap, &spins, &analytic_equilibrium(kind, &trap, &spins)?)
    };
    let result = match sec.guess.as_deref().unwrap_or("lowest") {
        "lowest" => lowest_stable_equilibrium(&trap, &spins)?,
        "linear" => refine(StructureKind::LinX)?,
        "zigzag_x" => refine(StructureKind::ZigzagX)?,
        "zigzag_y" => refine(StructureKind::ZigzagY)?,
        "positions" => {
            let p = sec.positions.clone().unwrap_or_default();
            find_equilibrium(&trap, &spins, &IonConfiguration::new(p))?
        }
        _ => {
            let constraint = sec.min_asymmetry.map_or(Constraint::None, Constraint::MinAsymmetry);
            match metropolis_search(&trap, &spins, ctx.seed, &MetropolisSchedule::default(), constraint)? {
                SearchOutcome::Found { result, .. } => result,
                SearchOutcome::Exhausted { candidates, .. } => {
                    return Err(Error::Unstable(format!(
                        "Metropolis search exhausted: {candidates} refined candidates, none stable and admissible"
                    )))
                }
            }
        }
    };
    let modes = normal_modes(&result, &trap, &spins)?;
    let meta = ctx
        .meta()
        .with("alpha", trap.alpha)
        .with("delta_alpha", trap.delta_alpha)
        .with("spins", &spins)
        .with("kind", result.kind)
        .with("energy", result.energy)
        .with("gradient_norm", result.gradient_norm)
        .with("min_eigenvalue", result.min_eigenvalue)
        .with("stable", result.stable);
    let rows = result
        .config
        .positions
        .iter()
        .enumerate()
        .map(|(k, p)| vec![k.to_string(), p[0].to_string(), p[1].to_string()])
        .collect();
    ctx.csv("equilibrium.csv", &meta, &["index", "x", "y"], rows)?;
    let record = json!({
        "alpha": trap.alpha,
        "delta_alpha": trap.delta_alpha,
        "spins": spins.to_string(),
        "result": result,
        "frequencies": modes.frequencies,
        "config_sha256": ctx.hash,
    });
    ctx.text("equilibrium.json", &serde_json::to_string_pretty(&record).expect("serializable record"))?;
    println!(
        "{} at alpha = {}, delta_alpha = {}: energy {:.12}, gradient {:.2e}, stable {}",
        result.kind, trap.alpha, trap.delta_alpha, result.energy, result.gradient_norm, result.stable
    );
    for (k, p) in result.config.positions.iter().enumerate() {
        println!("  ion {k}: ({:+.12}, {:+.12})", p[0], p[1]);
    }
    Ok(())
}

fn cmd_modes(ctx: &mut Context) -> Result<()> {
    let sec = ctx.cfg.modes.clone().ok_or_else(|| missing("modes"))?;
    let spins = ctx.cfg.spins(&sec.spins)?;
    let n = 2 * ctx.cfg.n_ions;
    let alphas: Vec<f64> = (0..sec.points)
        .map(|k| sec.alpha_min + (sec.alpha_max - sec.alpha_min) * k as f64 / (sec.points - 1) as f64)
        .collect();
    let cfg = &ctx.cfg;
    let rows: Vec<Vec<String>> = alphas
        .par_iter()
        .map(|&alpha| -> Result<Vec<String>> {
            let trap = cfg.trap(alpha, sec.delta_alpha)?;
            let mut row = vec![alpha.to_string(), sec.delta_alpha.to_string()];
            match lowest_stable_equilibrium(&trap, &spins) {
                Ok(eq) => {
                    let m = normal_modes(&eq, &trap, &spins)?;
                    row.push(eq.kind.label().to_string());
                    row.extend(m.frequencies.iter().map(|w| w.to_string()));
                }
                Err(Error::Unstable(_)) => {
                    row.push("none".into());
                    row.extend((0..n).map(|_| "NaN".to_string()));
                }
                Err(e) => return Err(e),
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let names: Vec<String> = (1..=n).map(|k| format!("omega_{k}")).collect();
    let mut cols = vec!["alpha", "delta_alpha", "kind"];
    cols.extend(names.iter().map(|s| s.as_str()));
    let meta = ctx.meta().with("spins", &spins).with("frequencies", "signed sqrt of Hessian eigenvalues, ascending");
    if let Some(svgs) = modes_svg(&rows, n) {
        ctx.text("modes.svg", &svgs)?;
    }
    ctx.csv("modes.csv", &meta, &cols, rows)?;
    println!("{} alpha samples of {} mode frequencies", alphas.len(), n);
    Ok(())
}

fn modes_svg(rows: &[Vec<String>], n: usize) -> Option<String> {
    let x: Vec<f64> = rows.iter().map(|r| r[0].parse().ok()).collect::<Option<_>>()?;
    let series = (0..n)
        .map(|k| {
            let y = rows.iter().map(|r| r[3 + k].parse().unwrap_or(f64::NAN)).collect();
            (format!("mode {}", k + 1), x.clone(), y)
        })
        .collect::<Vec<_>>();
    Some(line_plot_svg("α", "ω / ν_x", &series))
}

fn cmd_stability(ctx: &mut Context) -> Result<()> {
    let sec = ctx.cfg.stability.clone().ok_or_else(|| missing("stability"))?;
    let spins = ctx.cfg.spins(&sec.spins)?;
    let mut settings = ScanSettings::new(spins.clone()).with_resolution(sec.resolution[0], sec.resolution[1]);
    settings.alpha_range = (sec.alpha_range[0], sec.alpha_range[1]);
    settings.delta_alpha_range = (sec.delta_alpha_range[0], sec.delta_alpha_range[1]);
    settings.seed = ctx.seed;
    settings.boundaries = sec.boundaries;
    let d = scan_diagram(&settings).map_err(|e| match e {
        Error::Invalid(m) | Error::Unsupported(m) => Error::Config(m),
        other => other,
    })?;
    let mut meta = ctx
        .meta()
        .with("spins", &spins)
        .with("resolution", format!("{} x {}", sec.resolution[0], sec.resolution[1]))
        .with("mask_bits", "LIN X = 1, ZZ X = 2, ZZ Y = 4, LIN X* = 8, TRIA* = 16, other = 32")
        .with("shape_mask", "same bits for the geometric class of each stable structure")
        .with(
            "residual_signs",
            "zzy_boundary_residual > 0 where ZZ Y is stable; outer_excited_linear_boundary_residual > 0 where LIN X* is stable (above the upper pole)",
        )
        .with("poles", format!("{:?}", d.excluded_alphas));
    for k in StructureKind::ALL {
        meta.push(&format!("cells_{}", k.label().replace(' ', "_")), d.count(k));
    }
    meta.push("overlap_cells", d.overlap_count());
    for c in d.curves.iter().filter(|c| c.source == CurveSource::Analytic) {
        if let Some(off) = d.analytic_offset(&c.label) {
            meta.push(&format!("offset_cells {}", c.label), off);
        }
    }
    let rows = d
        .cells
        .iter()
        .map(|c| {
            let kinds: Vec<&str> = c.kinds().iter().map(|k| k.label()).collect();
            vec![
                c.alpha.to_string(),
                c.delta_alpha.to_string(),
                c.mask.to_string(),
                c.shape_mask.to_string(),
                u8::from(c.unknown).to_string(),
                format!("\"{}\"", kinds.join("|")),
            ]
        })
        .collect();
    ctx.csv("stability.csv", &meta, &["alpha", "delta_alpha", "mask", "shape_mask", "unknown", "kinds"], rows)?;
    let rows = d
        .curves
        .iter()
        .flat_map(|c| {
            let src = match c.source {
                CurveSource::Analytic => "analytic",
                CurveSource::Numeric => "numeric",
            };
            c.points
                .iter()
                .map(move |p| vec![format!("\"{}\"", c.label), src.to_string(), p[0].to_string(), p[1].to_string()])
        })
        .collect();
    ctx.csv("boundaries.csv", &meta, &["curve", "source", "alpha", "delta_alpha"], rows)?;
    if sec.svg {
        ctx.text("stability.svg", &render_svg(&d))?;
    }
    println!("{} cells, {} with overlapping stable structures", d.cells.len(), d.overlap_count());
    for k in StructureKind::ALL {
        if d.count(k) > 0 {
            println!("  {:7} {}", k.label(), d.count(k));
        }
    }
    Ok(())
}

/// One computed echo with the context needed for its outputs.
struct EchoRun {
    case: EchoCase,
    series: OverlapSeries,
    g: QuadraticModel,
    e: QuadraticModel,
}

fn compute_echoes(ctx: &Context) -> Result<Vec<EchoRun>> {
    let sec = ctx.cfg.echo.clone().ok_or_else(|| missing("echo"))?;
    let times = time_grid(sec.t_max, sec.samples);
    sec.cases
        .iter()
        .map(|case| {
            let phys = case.physical_trap()?;
            let trap = ctx.cfg.trap(phys.alpha(), phys.delta_alpha())?;
            let spins = ctx.cfg.spins(&case.spins)?;
            let (g, e) = echo_models(&trap, &spins, phys.fluctuation_scale())?;
            let mut series = loschmidt_echo(&g, &e, &times)?;
            series.metadata = EchoMetadata {
                alpha: trap.alpha,
                delta_alpha: trap.delta_alpha,
                species: Some(phys.species.name.clone()),
                nu_x: Some(phys.nu_x),
            };
            Ok(EchoRun { case: case.clone(), series, g, e })
        })
        .collect()
}

fn echo_meta(ctx: &Context, r: &EchoRun) -> Metadata {
    let c = &r.case;
    ctx.meta()
        .with("label", &c.label)
        .with("species", r.series.metadata.species.as_deref().unwrap_or(""))
        .with("nu_x_khz", c.nu_x_khz)
        .with("nu_y_khz", c.nu_y_khz)
        .with("delta_nu_y_khz", c.delta_nu_y_khz)
        .with("alpha", r.series.metadata.alpha)
        .with("delta_alpha", r.series.metadata.delta_alpha)
        .with("spins", &c.spins)
        .with("sigma", r.g.sigma)
        .with("ground_frequencies", format!("{:?}", r.g.modes.frequencies))
        .with("excited_frequencies", format!("{:?}", r.e.modes.frequencies))
}

fn file_label(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn cmd_echo(ctx: &mut Context) -> Result<()> {
    let runs = compute_echoes(ctx)?;
    let mut curves = Vec::new();
    for r in &runs {
        let us = r.series.times_us().unwrap_or_else(|| r.series.times.clone());
        let rows = r
            .series
            .times
            .iter()
            .zip(&us)
            .zip(&r.series.values)
            .map(|((t, u), z)| vec![*t, *u, z.re, z.im, z.norm()])
            .collect();
        let meta = echo_meta(ctx, r);
        ctx.csv(&format!("echo_{}.csv", file_label(&r.case.label)), &meta, &["t", "t_us", "re", "im", "abs"], rows)?;
        let a = r.series.moduli();
        println!(
            "{}: |I| in [{:.3e}, {:.6}], lowest excited frequency {:.6}",
            r.case.label,
            a.iter().copied().fold(f64::INFINITY, f64::min),
            a.iter().copied().fold(0.0, f64::max),
            r.e.modes.lowest()
        );
        curves.push((r.case.label.clone(), us, a));
    }
    if ctx.cfg.echo.as_ref().is_some_and(|e| e.svg) {
        ctx.text("echo.svg", &line_plot_svg("t (µs)", "|I(t)|", &curves))?;
    }
    Ok(())
}

fn series_from_csv(path: &Path) -> Result<(String, OverlapSeries, f64)> {
    let t = read_csv(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let bad = || Error::Config(format!("{}: expected columns t, t_us, abs", path.display()));
    let times = t.column("t").ok_or_else(bad)?;
    let us = t.column("t_us").ok_or_else(bad)?;
    let abs = t.column("abs").ok_or_else(bad)?;
    let nu_x = if times.len() > 1 && us[1] > 0.0 { times[1] / (us[1] * 1e-6) } else { f64::NAN };
    let values = abs.iter().map(|a| num_complex::Complex64::new(*a, 0.0)).collect();
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let meta = EchoMetadata { nu_x: Some(nu_x), ..Default::default() };
    Ok((label, OverlapSeries { times, values, metadata: meta }, nu_x))
}

fn cmd_spectrum(ctx: &mut Context) -> Result<()> {
    let sec = ctx.cfg.spectrum.clone().ok_or_else(|| missing("spectrum"))?;
    let window = sec.window.as_deref().map(Window::parse).transpose()?.unwrap_or_default();
    let mut inputs: Vec<(String, OverlapSeries, f64, Metadata)> = Vec::new();
    if sec.inputs.is_empty() {
        for r in compute_echoes(ctx)? {
            let meta = echo_meta(ctx, &r);
            let nu = r.series.metadata.nu_x.unwrap_or(f64::NAN);
            inputs.push((r.case.label.clone(), r.series, nu, meta));
        }
    } else {
        for p in &sec.inputs {
            let (label, s, nu) = series_from_csv(p)?;
            let meta = ctx.meta().with("input", p.display());
            inputs.push((label, s, nu, meta));
        }
    }
    let mut curves = Vec::new();
    for (label, s, nu, meta) in inputs {
        let spec = spectrum(&s, window).map_err(|e| Error::Config(e.to_string()))?;
        let khz = |w: f64| w * nu / (2.0 * std::f64::consts::PI) / 1e3;
        let peak = spec.dominant_peak();
        let meta = meta
            .with("window", window)
            .with("normalization", "unnormalized |DFT| of |I(t)|, one-sided, DC retained")
            .with("bin_width", spec.bin_width())
            .with("dominant_peak", peak.map_or("none".into(), |p| format!("{p} +- {}", spec.bin_width())));
        let rows = spec
            .frequencies
            .iter()
            .zip(&spec.magnitudes)
            .map(|(w, m)| vec![*w, khz(*w), *m])
            .collect();
        ctx.csv(&format!("spectrum_{}.csv", file_label(&label)), &meta, &["omega", "f_khz", "magnitude"], rows)?;
        match peak {
            Some(p) => println!("{label}: dominant peak at omega = {p:.5} +- {:.5} ({:.3} kHz)", spec.bin_width(), khz(p)),
            None => println!("{label}: no peak above DC"),
        }
        let cut = spec.frequencies.iter().position(|w| *w > 8.0).unwrap_or(spec.frequencies.len());
        curves.push((label, spec.frequencies[1..cut].to_vec(), spec.magnitudes[1..cut].to_vec()));
    }
    if ctx.cfg.echo.as_ref().is_none_or(|e| e.svg) {
        ctx.text("spectrum.svg", &line_plot_svg("ω / ν_x", "|F[|I|]|", &curves))?;
    }
    Ok(())
}

fn cmd_ramsey(ctx: &mut Context) -> Result<()> {
    let threshold = ctx.cfg.ramsey.as_ref().and_then(|r| r.revival_threshold).unwrap_or(REVIVAL_THRESHOLD);
    for r in compute_echoes(ctx)? {
        let p1 = ramsey_p1(&r.series);
        let p2 = ramsey_p2(&r.series);
        let revivals = revival_times(&r.series, threshold)?;
        let us = r.series.times_us().unwrap_or_else(|| r.series.times.clone());
        let meta = echo_meta(ctx, &r)
            .with("revival_threshold", threshold)
            .with("revival_times", format!("{revivals:?}"));
        let rows = r
            .series
            .times
            .iter()
            .zip(&us)
            .zip(p1.iter().zip(&p2))
            .map(|((t, u), (a, b))| vec![*t, *u, *a, *b])
            .collect();
        ctx.csv(&format!("ramsey_{}.csv", file_label(&r.case.label)), &meta, &["t", "t_us", "p1", "p2"], rows)?;
        println!("{}: {} revivals above {threshold}", r.case.label, revivals.len());
    }
    Ok(())
}
