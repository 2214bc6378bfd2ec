use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use lightcone::export::{write_curves_csv, write_indicatrix_csv, write_pedal_csv};
use lightcone::frame::{connection_forms, fundamental_coeffs};
use lightcone::generic::{genericity_sample, GenericOptions};
use lightcone::indicatrix::{indicatrix, label_for, IndicatrixOptions};
use lightcone::lightcone::{constancy_analysis, kl_value};
use lightcone::loci::{
    gauss_fold_cusp, parabolic_set, parallel_pair_search, pedal_mesh, regular_curve_check, swallowtail_points,
    PairMode, PairOptions,
};
use lightcone::surface::{load_spec, validate_lorentzian, BUILTIN_NAMES};
use lightcone::verify::{verify_surface, VerifyOptions};
use lightcone::{adapted_frame, classify_contact, Error, GaussSign, SingClass, SurfacePatch, Tolerances};

const EXIT_SPEC: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "lightcone", version, about = "Lightcone Gauss maps and contact singularities of Lorentzian surfaces in R^4_2")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Causal classification threshold.
    #[arg(long, global = true)]
    tol_zero: Option<f64>,
    /// Hessian rank threshold, relative to the Hessian norm.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Cubic discriminator threshold (relative).
    #[arg(long, global = true)]
    tol_d3: Option<f64>,
    /// Quartic discriminator threshold (relative).
    #[arg(long, global = true)]
    tol_d4: Option<f64>,
    /// Componentwise matching tolerance for hyperplanes.
    #[arg(long, global = true)]
    match_tol: Option<f64>,
    /// Half-width of the parabolic band |K_l| < band.
    #[arg(long, global = true)]
    band: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for GaussSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => GaussSign::Plus,
            SignArg::Minus => GaussSign::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Parallel,
    Equal,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that the patch is an immersed Lorentzian surface on a grid.
    Validate {
        spec: String,
        #[arg(long, default_value_t = 21)]
        grid: usize,
    },
    /// Adapted frame, connection forms and Cartan coefficients at a point.
    Frame {
        spec: String,
        #[arg(long, value_parser = parse_point)]
        at: (f64, f64),
    },
    /// Lightlike Gauss-Kronecker curvature on a grid, with constancy analysis.
    Curvature {
        spec: String,
        #[arg(long, value_enum)]
        sign: SignArg,
        #[arg(long, default_value_t = 21)]
        grid: usize,
    },
    /// Trace the lightlike parabolic set and its swallowtail points.
    TraceParabolic {
        spec: String,
        #[arg(long, value_enum)]
        sign: SignArg,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        /// Resolution of the branch-point check.
        #[arg(long, default_value_t = 1e-3)]
        resolution: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contact class of the height function at a point.
    Classify {
        spec: String,
        #[arg(long, value_parser = parse_point)]
        at: (f64, f64),
        #[arg(long, value_enum)]
        sign: SignArg,
    },
    /// Trace the tangent lightlike hyperplane indicatrix.
    Indicatrix {
        spec: String,
        #[arg(long, value_parser = parse_point)]
        at: (f64, f64),
        #[arg(long, value_enum)]
        sign: SignArg,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 720)]
        rays: usize,
        #[arg(long, default_value_t = 100)]
        rings: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lightcone pedal surface sampled on a grid.
    Pedal {
        spec: String,
        #[arg(long, value_enum)]
        sign: SignArg,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search a disk for points with parallel or equal tangent hyperplanes.
    Pairs {
        spec: String,
        #[arg(long, value_parser = parse_point)]
        at: (f64, f64),
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "plus")]
        sign: SignArg,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        max_results: usize,
    },
    /// Run the invariant suites; `builtin:all` runs every built-in surface.
    Verify {
        spec: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 21)]
        grid: usize,
    },
    /// Parabolic-set statistics over random polynomial Monge surfaces.
    SampleGeneric {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        degree: u32,
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let (x, y) = (p(a)?, p(b)?);
    if !(x.is_finite() && y.is_finite()) {
        return Err(format!("non-finite point {s:?}"));
    }
    Ok((x, y))
}

#[derive(Serialize)]
struct Envelope {
    schema_version: &'static str,
    command: String,
    surface: Option<String>,
    payload: Value,
    diagnostics: Vec<String>,
}

/// Result of a subcommand before serialization.
struct Outcome {
    surface: Option<String>,
    payload: Value,
    diagnostics: Vec<String>,
    exit: u8,
}

impl Outcome {
    fn new(surface: &SurfacePatch, payload: Value) -> Self {
        Self { surface: Some(surface.label.clone()), payload, diagnostics: Vec::new(), exit: 0 }
    }
}

/// Prints floats with 17 significant digits.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    // non-finite floats become null here
    serde_json::to_value(v).expect("report types serialize")
}

fn render(env: &Envelope) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    to_json(env).serialize(&mut ser).expect("in-memory write");
    buf.push(b'\n');
    buf
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::OutsideDomain { .. } => EXIT_USAGE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_SPEC,
    }
}

fn tolerances(c: &ConfigArgs) -> Result<Tolerances, Error> {
    let mut t = Tolerances::default();
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut t.zero, c.tol_zero);
    set(&mut t.rank_rel, c.tol_rank);
    set(&mut t.d3_rel, c.tol_d3);
    set(&mut t.d4_rel, c.tol_d4);
    set(&mut t.matching, c.match_tol);
    set(&mut t.band, c.band);
    t.validate()?;
    Ok(t)
}

fn check_grid(n: usize) -> Result<(), Error> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid size must be at least 2, got {n}")));
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Frame { .. } => "frame",
        Command::Curvature { .. } => "curvature",
        Command::TraceParabolic { .. } => "trace-parabolic",
        Command::Classify { .. } => "classify",
        Command::Indicatrix { .. } => "indicatrix",
        Command::Pedal { .. } => "pedal",
        Command::Pairs { .. } => "pairs",
        Command::Verify { .. } => "verify",
        Command::SampleGeneric { .. } => "sample-generic",
    }
}

fn execute(cmd: Command, tol: &Tolerances) -> Result<Outcome, Error> {
    match cmd {
        Command::Validate { spec, grid } => {
            check_grid(grid)?;
            let patch = load_spec(&spec)?;
            let rep = validate_lorentzian(&patch, &patch.default_grid(grid)?);
            let mut out = Outcome::new(&patch, json!({ "passed": rep.passed(), "report": to_json(&rep) }));
            for f in &rep.failures {
                out.diagnostics.push(format!("node ({}, {}): {}", f.x, f.y, f.reason));
            }
            if !rep.passed() {
                out.exit = EXIT_SPEC;
            }
            Ok(out)
        }
        Command::Frame { spec, at } => {
            let patch = load_spec(&spec)?;
            let f = adapted_frame(&patch, at.0, at.1, None, tol)?;
            let payload = json!({
                "at": at,
                "frame": to_json(&f),
                "gram": f.gram(),
                "connection_forms": to_json(&connection_forms(&patch, at.0, at.1, tol)?),
                "coefficients": to_json(&fundamental_coeffs(&patch, at.0, at.1, tol)?),
                "kl_plus": kl_value(&patch, at.0, at.1, GaussSign::Plus, tol)?,
                "kl_minus": kl_value(&patch, at.0, at.1, GaussSign::Minus, tol)?,
            });
            Ok(Outcome::new(&patch, payload))
        }
        Command::Curvature { spec, sign, grid } => {
            check_grid(grid)?;
            let patch = load_spec(&spec)?;
            let g = patch.default_grid(grid)?;
            let sign = GaussSign::from(sign);
            let mut nodes = Vec::with_capacity(g.len());
            let mut max_abs: f64 = 0.0;
            for (x, y) in g.nodes() {
                let k = kl_value(&patch, x, y, sign, tol)?;
                max_abs = max_abs.max(k.abs());
                nodes.push(json!({ "x": x, "y": y, "kl": k }));
            }
            let constancy = constancy_analysis(&patch, &g, tol)?;
            let payload = json!({
                "sign": sign,
                "nx": g.nx,
                "ny": g.ny,
                "max_abs_kl": max_abs,
                "nodes": nodes,
                "constancy": to_json(&constancy),
            });
            Ok(Outcome::new(&patch, payload))
        }
        Command::TraceParabolic { spec, sign, grid, resolution, out } => {
            check_grid(grid)?;
            if !(resolution > 0.0) {
                return Err(Error::InvalidArgument(format!("resolution must be positive, got {resolution}")));
            }
            let patch = load_spec(&spec)?;
            let sign = GaussSign::from(sign);
            let set = parabolic_set(&patch, &patch.default_grid(grid)?, sign, tol)?;
            let regularity = regular_curve_check(&patch, &set, resolution, tol)?;
            let mut swallowtails = Vec::new();
            let mut diagnostics = Vec::new();
            for (id, c) in set.curves.iter().enumerate() {
                for s in swallowtail_points(&patch, c, tol)? {
                    if !s.confirmed {
                        diagnostics.push(format!("curve {id}: unconfirmed swallowtail at {:?}", s.location));
                    }
                    swallowtails.push(json!({ "curve_id": id, "point": to_json(&s) }));
                }
            }
            if !set.flagged_cells.is_empty() {
                diagnostics.push(format!("{} cells flagged as degenerate", set.flagged_cells.len()));
            }
            if let Some(path) = &out {
                write_curves_csv(create(path)?, &set.curves)?;
            }
            let payload = json!({ "set": to_json(&set), "swallowtails": swallowtails, "regularity": to_json(&regularity) });
            let mut o = Outcome::new(&patch, payload);
            o.diagnostics = diagnostics;
            Ok(o)
        }
        Command::Classify { spec, at, sign } => {
            let patch = load_spec(&spec)?;
            let sign = GaussSign::from(sign);
            let rep = classify_contact(&patch, at.0, at.1, sign, tol)?;
            let fc = gauss_fold_cusp(&patch, at, sign, tol)?;
            let mut payload = to_json(&rep);
            payload["indicatrix_label"] = to_json(&label_for(&rep));
            payload["gauss_map"] = to_json(&fc);
            let mut o = Outcome::new(&patch, payload);
            if rep.sing_class == SingClass::Degenerate {
                o.diagnostics.push("germ is not of type A1, A2 or A3".into());
            }
            Ok(o)
        }
        Command::Indicatrix { spec, at, sign, radius, rays, rings, out } => {
            let patch = load_spec(&spec)?;
            let opts = IndicatrixOptions { rays, rings, ..IndicatrixOptions::default() };
            let r = indicatrix(&patch, at, sign.into(), radius, &opts, tol)?;
            if let Some(path) = &out {
                write_indicatrix_csv(create(path)?, &r)?;
            }
            Ok(Outcome::new(&patch, to_json(&r)))
        }
        Command::Pedal { spec, sign, grid, out } => {
            check_grid(grid)?;
            let patch = load_spec(&spec)?;
            let mesh = pedal_mesh(&patch, &patch.default_grid(grid)?, sign.into(), tol)?;
            if let Some(path) = &out {
                write_pedal_csv(create(path)?, &mesh)?;
            }
            Ok(Outcome::new(&patch, to_json(&mesh)))
        }
        Command::Pairs { spec, at, eps, mode, sign, samples, max_results } => {
            let patch = load_spec(&spec)?;
            let mode = match mode {
                ModeArg::Parallel => PairMode::Parallel,
                ModeArg::Equal => PairMode::Equal,
            };
            let opts = PairOptions { samples, max_results };
            let r = parallel_pair_search(&patch, at, eps, sign.into(), mode, &opts, tol)?;
            let mut o = Outcome::new(&patch, to_json(&r));
            if r.truncated {
                o.diagnostics.push(format!("result list truncated at {max_results} pairs"));
            }
            Ok(o)
        }
        Command::Verify { spec, seed, grid } => {
            check_grid(grid)?;
            let opts = VerifyOptions { seed, grid, ..VerifyOptions::default() };
            let patches: Vec<SurfacePatch> = if spec == "builtin:all" {
                BUILTIN_NAMES.iter().map(|n| SurfacePatch::builtin(n)).collect::<Result<_, _>>()?
            } else {
                vec![load_spec(&spec)?]
            };
            let mut reports = Vec::new();
            let mut diagnostics = Vec::new();
            for p in &patches {
                let r = verify_surface(p, &opts, tol)?;
                for c in r.checks.iter().filter(|c| !c.passed) {
                    diagnostics.push(format!("{}: {} failed ({:e} vs {:e})", r.surface, c.name, c.value, c.threshold));
                }
                reports.push(r);
            }
            let passed = reports.iter().all(|r| r.passed);
            let surface = if patches.len() == 1 { Some(patches[0].label.clone()) } else { Some(spec) };
            Ok(Outcome {
                surface,
                payload: json!({ "passed": passed, "seed": seed, "reports": to_json(&reports) }),
                diagnostics,
                exit: if passed { 0 } else { EXIT_NUMERICAL },
            })
        }
        Command::SampleGeneric { seed, trials, degree, grid } => {
            check_grid(grid)?;
            let opts = GenericOptions { grid, ..GenericOptions::default() };
            let r = genericity_sample(seed, trials, degree, &opts, tol)?;
            let mut diagnostics = Vec::new();
            if r.excluded > 0 {
                diagnostics.push(format!("{} wholly degenerate trials excluded", r.excluded));
            }
            Ok(Outcome { surface: None, payload: to_json(&r), diagnostics, exit: 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let name = command_name(&cli.command);
    let result = tolerances(&cli.config).and_then(|tol| execute(cli.command, &tol));
    match result {
        Ok(out) => {
            let env = Envelope {
                schema_version: "1",
                command: name.into(),
                surface: out.surface,
                payload: out.payload,
                diagnostics: out.diagnostics,
            };
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(&render(&env)).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_SPEC);
            }
            ExitCode::from(out.exit)
        }
        Err(e) => {
            eprintln!("lightcone {name}: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
