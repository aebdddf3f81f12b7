//! `cohomgh` command-line interface.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 numerical-consistency error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cohomgh::complex::{build_alpha, build_vr, jitter_cloud, ComplexKind, SimplicialComplex};
use cohomgh::genmetric::{generator_metric_space, MetricKind, MASS_EPS};
use cohomgh::hodge::{harmonic_generators, hodge_laplacian, spectrum, Tolerance};
use cohomgh::ingest::{load_inputs, to_xyz, PointCloud};
use cohomgh::pipeline::synthetic::lattice_benchmark;
use cohomgh::pipeline::{matrix_csv, run_pipeline, Jitter, RunConfig};
use cohomgh::ultra::{
    parse_newick, subdominant_from_matrix, to_newick, ugh, ugh_bruteforce, Dendrogram, Ultrametric,
    BRUTEFORCE_MAX,
};
use cohomgh::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(name = "cohomgh", version, about = "Cohomology generators, ultrametrics and u_GH clustering for 3D point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build simplicial complexes
    #[command(subcommand)]
    Complex(ComplexCmd),
    /// Hodge Laplacian spectra and harmonic generators
    #[command(subcommand)]
    Hodge(HodgeCmd),
    /// Distance matrix between the harmonic generators of one structure
    Distmat(DistmatArgs),
    /// Ultrametric transform and Gromov-Hausdorff ultrametric
    #[command(subcommand)]
    Ultra(UltraCmd),
    /// Full clustering runs
    #[command(subcommand)]
    Pipeline(PipelineCmd),
    /// Synthetic benchmark data
    #[command(subcommand)]
    Synth(SynthCmd),
}

#[derive(Args)]
struct StructureArgs {
    /// XYZ file, or a directory of *.xyz files
    #[arg(long)]
    input: PathBuf,
    /// Frame index across all loaded frames
    #[arg(long, default_value_t = 0)]
    frame: usize,
    #[arg(long, default_value = "alpha")]
    kind: ComplexKind,
    /// Filtration threshold in Å
    #[arg(long)]
    threshold: f64,
    /// Highest simplex dimension
    #[arg(long, default_value_t = 2)]
    pmax: usize,
    /// Gaussian coordinate noise as sigma,seed
    #[arg(long)]
    jitter: Option<Jitter>,
}

#[derive(Subcommand)]
enum ComplexCmd {
    /// Emit the complex as JSON
    Build {
        #[command(flatten)]
        s: StructureArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum HodgeCmd {
    /// Harmonic generators as JSON
    Generators {
        #[command(flatten)]
        s: StructureArgs,
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Zero-eigenvalue tolerance: auto or a positive number
        #[arg(long, default_value = "auto")]
        tol: Tolerance,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Laplacian eigenvalues as CSV
    Spectrum {
        #[command(flatten)]
        s: StructureArgs,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DistmatArgs {
    #[command(flatten)]
    s: StructureArgs,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value = "l1")]
    metric: MetricKind,
    /// Write <out>.csv and <out>.json; otherwise CSV on stdout, metadata on stderr
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum UltraCmd {
    /// Subdominant ultrametric of a CSV dissimilarity matrix
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// Write <out>.csv and <out>.nwk; otherwise both go to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// u_GH between two spaces given as Newick dendrograms or CSV matrices
    Ugh {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Also run the exhaustive correspondence search (at most 5 points per side)
        #[arg(long)]
        check: bool,
    },
}

#[derive(Subcommand)]
enum PipelineCmd {
    /// Run every stage from a JSON config
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum SynthCmd {
    /// Jittered 3×3×3 cubic lattices, one XYZ file per lattice constant
    Lattice {
        #[arg(long, value_delimiter = ',', default_values_t = [2.8, 3.0, 3.2])]
        constants: Vec<f64>,
        #[arg(long, default_value_t = 30)]
        frames: usize,
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(io_err(p)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn load_frame(s: &StructureArgs) -> Result<PointCloud> {
    if !s.input.exists() {
        return Err(Error::Config(format!("input {} does not exist", s.input.display())));
    }
    let mut frames: Vec<PointCloud> = load_inputs(&s.input)?.into_iter().flat_map(|t| t.frames).collect();
    if s.frame >= frames.len() {
        return Err(Error::Config(format!(
            "frame {} requested but only {} loaded",
            s.frame,
            frames.len()
        )));
    }
    let cloud = frames.swap_remove(s.frame);
    match s.jitter {
        Some(j) if j.sigma > 0.0 => jitter_cloud(&cloud, j.sigma, j.seed),
        _ => Ok(cloud),
    }
}

fn build(s: &StructureArgs) -> Result<SimplicialComplex> {
    if !(1..=3).contains(&s.pmax) {
        return Err(Error::Config(format!("--pmax must lie in 1..=3, got {}", s.pmax)));
    }
    if !(s.threshold.is_finite() && s.threshold >= 0.0) {
        return Err(Error::Config(format!("bad --threshold {}", s.threshold)));
    }
    let cloud = load_frame(s)?;
    match s.kind {
        ComplexKind::Vr => build_vr(&cloud, s.threshold, s.pmax),
        ComplexKind::Alpha => Ok(build_alpha(&cloud, s.threshold)?.skeleton(s.pmax)),
    }
}

fn check_p(p: usize, s: &StructureArgs) -> Result<()> {
    if p > s.pmax {
        return Err(Error::Config(format!("--p {p} exceeds --pmax {}", s.pmax)));
    }
    Ok(())
}

/// Square numeric matrix; a non-numeric first row or column is taken as labels.
fn read_matrix(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        if rec.iter().any(|f| !f.is_empty()) {
            rows.push(rec.iter().map(str::to_string).collect());
        }
    }
    let numeric = |s: &str| s.parse::<f64>().is_ok();
    let header = rows.first().is_some_and(|r| r.iter().any(|f| !numeric(f)));
    let mut labels = Vec::new();
    if header {
        let h = rows.remove(0);
        let skip = usize::from(h.len() > rows.len());
        labels = h[skip..].to_vec();
    }
    let label_col = rows.first().is_some_and(|r| !numeric(&r[0]) || r.len() == rows.len() + 1);
    let mut m = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let cells = if label_col { &r[1..] } else { &r[..] };
        let row = cells
            .iter()
            .map(|c| {
                c.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1 + usize::from(header),
                    message: format!("'{c}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        m.push(row);
    }
    if labels.is_empty() {
        labels = (0..m.len()).map(|i| i.to_string()).collect();
    }
    if labels.len() != m.len() {
        return Err(Error::Shape(format!("{} labels for {} rows", labels.len(), m.len())));
    }
    Ok((labels, m))
}

fn read_space(path: &Path) -> Result<Ultrametric> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let (_, m) = read_matrix(path)?;
        subdominant_from_matrix(&m)
    } else {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_newick(&text).map(|(u, _)| u)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Complex(ComplexCmd::Build { s, out }) => {
            let k = build(&s)?;
            emit(out.as_deref(), &to_json(&k.to_export()))
        }
        Command::Hodge(HodgeCmd::Generators { s, p, tol, out }) => {
            check_p(p, &s)?;
            let k = build(&s)?;
            let g = harmonic_generators(&k, p, tol)?;
            for w in &g.warnings {
                eprintln!("warning: {w}");
            }
            emit(out.as_deref(), &to_json(&g))
        }
        Command::Hodge(HodgeCmd::Spectrum { s, p, out }) => {
            check_p(p, &s)?;
            let k = build(&s)?;
            let spec = spectrum(&hodge_laplacian(&k, p)?)?;
            let mut csv = String::from("index,eigenvalue\n");
            for (i, l) in spec.eigenvalues.iter().enumerate() {
                csv.push_str(&format!("{i},{l}\n"));
            }
            emit(out.as_deref(), &csv)
        }
        Command::Distmat(a) => {
            check_p(a.p, &a.s)?;
            let k = build(&a.s)?;
            let g = harmonic_generators(&k, a.p, Tolerance::Auto)?;
            let mut m = generator_metric_space(&g, a.metric, &k)?;
            m.provenance.structure = a.s.input.display().to_string();
            let ids: Vec<String> = (0..m.len()).map(|i| format!("g{i}")).collect();
            let csv = matrix_csv(&ids, &m.dmatrix);
            let meta = to_json(&json!({
                "metric_kind": m.metric_kind,
                "provenance": m.provenance,
                "generators": m.len(),
                "empty": m.is_empty(),
                "truncation": {
                    "mass_threshold": MASS_EPS,
                    "max_dropped_mass": m.max_truncated_mass,
                },
                "warnings": g.warnings,
            }));
            match a.out {
                Some(prefix) => {
                    emit(Some(&with_ext(&prefix, "csv")), &csv)?;
                    emit(Some(&with_ext(&prefix, "json")), &meta)
                }
                None => {
                    eprint!("{meta}");
                    emit(None, &csv)
                }
            }
        }
        Command::Ultra(UltraCmd::Transform { input, out }) => {
            let (labels, m) = read_matrix(&input)?;
            let u = subdominant_from_matrix(&m)?;
            let csv = matrix_csv(&labels, &u.dmatrix);
            let nwk = if u.is_empty() {
                ";\n".to_string()
            } else {
                to_newick(&Dendrogram::new(&u)?, Some(&labels)) + "\n"
            };
            match out {
                Some(prefix) => {
                    emit(Some(&with_ext(&prefix, "csv")), &csv)?;
                    emit(Some(&with_ext(&prefix, "nwk")), &nwk)
                }
                None => emit(None, &format!("{csv}{nwk}")),
            }
        }
        Command::Ultra(UltraCmd::Ugh { a, b, check }) => {
            let (x, y) = (read_space(&a)?, read_space(&b)?);
            let value = ugh(&x, &y)?;
            if check {
                if x.len() > BRUTEFORCE_MAX || y.len() > BRUTEFORCE_MAX {
                    return Err(Error::Config(format!(
                        "--check needs at most {BRUTEFORCE_MAX} points per side"
                    )));
                }
                let oracle = ugh_bruteforce(&x, &y)?;
                if oracle != value {
                    return Err(Error::Consistency(format!(
                        "quotient scan gives {value} but exhaustive search gives {oracle}"
                    )));
                }
            }
            emit(None, &format!("{value}\n"))
        }
        Command::Pipeline(PipelineCmd::Run { config, out }) => {
            let cfg = RunConfig::load(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let run = run_pipeline(&cfg, base)?;
            let files = run.write(&out)?;
            for w in run.report.thresholds.iter().flat_map(|t| &t.warnings) {
                eprintln!("warning: {w}");
            }
            let empty: usize = run.report.thresholds.iter().map(|t| t.substituted_entries).sum();
            if empty > 0 {
                eprintln!("note: {empty} u_GH entries involve an empty generator space and were substituted");
            }
            match run.ari {
                Some(a) => println!("ARI {a}"),
                None => println!("clustered {} structures", run.ids.len()),
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Synth(SynthCmd::Lattice {
            constants,
            frames,
            sigma,
            seed,
            out,
        }) => {
            if frames == 0 || constants.is_empty() {
                return Err(Error::Config("need at least one constant and one frame".into()));
            }
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            for set in lattice_benchmark(&constants, frames, sigma, seed)? {
                let path = out.join(format!("{}.xyz", set.group_label));
                emit(Some(&path), &to_xyz(&set))?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            })
        }
    }
}
