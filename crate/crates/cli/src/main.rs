//! `blockcoh`: build block frames, measure their coherence, and run the
//! random-subspace, flipping and block-sparse recovery experiments.
//!
//! Every command writes its files into `--out-dir` together with a
//! `<command>.manifest.json` recording the parameters, seed, version and
//! outputs. Exit status is 0 on success, 2 when an input fails validation,
//! 3 when a numerical routine does not converge, and 1 for anything else.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use blockcoh::blockcs::{run_flipping_table, run_ndp_experiment, FrameSource, NdpConfig};
use blockcoh::bounds::{self, BoundInputs};
use blockcoh::constructions::{kerdock_from_set, Family, FrameRecipe, KerdockSet, KronFactor};
use blockcoh::flipping::{flip, random_flip_search, FlipConfig, NormVariant};
use blockcoh::format::{gram_map_csv, mu_curve_csv, ndp_csv, read_bfm, threshold_csv, write_bfm};
use blockcoh::random::{default_r_grid, empirical_mu_curve, BlockCountRule};
use blockcoh::{Field, Frame};

use output::{to_json, Outputs, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "blockcoh", version, about = "Block coherence of frames and block-sparse recovery experiments")]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Monte-Carlo trials (each command has its own default).
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Directory receiving all output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads; falls back to BLOCKFRAME_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Encoding of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a deterministic frame; writes `<name>.bfm` and `<name>.report.json`.
    Construct(ConstructArgs),
    /// Coherence report and gram map of a BFM frame file.
    Analyze(AnalyzeArgs),
    /// Every closed-form bound for (m, n, r, field).
    Bounds(BoundsArgs),
    /// Threshold â(β) on a grid of β.
    Threshold(ThresholdArgs),
    /// Worst-case coherence of random subspace unions against √(â(β)β).
    RandomMu(RandomMuArgs),
    /// Greedy (or random-search) block sign flipping of a BFM frame.
    Flip(FlipArgs),
    /// Average coherence before and after flipping for random frames.
    FlipTable(FlipTableArgs),
    /// Non-discovery proportion of one-step group thresholding.
    Cs(CsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyName {
    Steiner,
    Harmonic,
    Alltop,
    Chirp,
    IdHadamard,
    Kerdock,
    File,
}

#[derive(Args, Debug, Serialize)]
struct RecipeArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Steiner parameter v.
    #[arg(long)]
    v: Option<usize>,
    /// Prime for harmonic, alltop and chirp.
    #[arg(long)]
    p: Option<usize>,
    /// Order parameter for id-hadamard (n = 2^k) and kerdock (n = 2^k).
    #[arg(long)]
    k: Option<u32>,
    /// Base matrix for `--family file`, as a BFM file with r = 1.
    #[arg(long)]
    path: Option<PathBuf>,
    /// Kerdock set to use instead of the generated one.
    #[arg(long)]
    kerdock_set: Option<PathBuf>,
    /// Second factor: none, hadamard:<k>, dft:<r> or default:<r>.
    #[arg(long, default_value = "none")]
    kron: String,
}

#[derive(Args, Debug, Serialize)]
struct ConstructArgs {
    #[command(flatten)]
    recipe: RecipeArgs,
    /// Stem of the output files.
    #[arg(long, default_value = "frame")]
    name: String,
}

#[derive(Args, Debug, Serialize)]
struct AnalyzeArgs {
    file: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value = "complex")]
    field: String,
    /// Also evaluate the tail bound G at these λ₁ values.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct ThresholdArgs {
    /// Explicit β values; overrides `--points`.
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    /// Evenly spaced β in [0.05, 0.45].
    #[arg(long, default_value_t = 9)]
    points: usize,
}

#[derive(Args, Debug, Serialize)]
struct RandomMuArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Subspace dimensions; defaults to β = 0.05, 0.10, …, 0.45.
    #[arg(long, value_delimiter = ',')]
    r_grid: Vec<usize>,
    /// Upper limit on m = (n/r)².
    #[arg(long, default_value_t = 400)]
    m_cap: usize,
}

#[derive(Args, Debug, Serialize)]
struct FlipArgs {
    file: PathBuf,
    #[arg(long, default_value = "spectral")]
    variant: String,
    /// Use the best of this many random sign patterns instead of the greedy pass.
    #[arg(long)]
    search_trials: Option<usize>,
    /// Stem of the output files.
    #[arg(long, default_value = "flipped")]
    name: String,
}

#[derive(Args, Debug, Serialize)]
struct FlipTableArgs {
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 2048)]
    m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3])]
    r_set: Vec<usize>,
}

#[derive(Args, Debug, Serialize)]
struct CsArgs {
    /// Deterministic frame as a BFM file; defaults to Steiner(4) ⊗ H(1).
    #[arg(long)]
    frame: Option<PathBuf>,
    /// Number of random-subspace comparison series.
    #[arg(long, default_value_t = 1)]
    random_series: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 4, 5, 6])]
    k_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 100.0])]
    dynamic_range: Vec<f64>,
    /// Additive Gaussian noise at this SNR in dB (noiseless when absent).
    #[arg(long)]
    snr_db: Option<f64>,
}

fn parse_kron(spec: &str) -> Result<KronFactor> {
    if spec == "none" {
        return Ok(KronFactor::None);
    }
    let (kind, size) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("--kron expects none, hadamard:<k>, dft:<r> or default:<r>, got `{spec}`"))?;
    let size: usize = size
        .parse()
        .with_context(|| format!("--kron size `{size}` is not a non-negative integer"))?;
    Ok(match kind {
        "hadamard" => KronFactor::Hadamard(u32::try_from(size)?),
        "dft" => KronFactor::Dft(size),
        "default" => KronFactor::Default(size),
        other => bail!(blockcoh::Error::Domain(format!("unknown Kronecker factor `{other}`"))),
    })
}

fn require<T>(value: Option<T>, flag: &str, family: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!(blockcoh::Error::Domain(format!("--family {family} needs --{flag}"))))
}

fn build_frame(args: &RecipeArgs) -> Result<Frame> {
    let kron = parse_kron(&args.kron)?;
    let family = match args.family {
        FamilyName::Steiner => Family::SteinerPairsEtf { v: require(args.v, "v", "steiner")? },
        FamilyName::Harmonic => Family::HarmonicQrEtf { p: require(args.p, "p", "harmonic")? },
        FamilyName::Alltop => Family::AlltopGabor { p: require(args.p, "p", "alltop")? },
        FamilyName::Chirp => Family::DiscreteChirp { p: require(args.p, "p", "chirp")? },
        FamilyName::IdHadamard => Family::IdHadamardUnion { k: require(args.k, "k", "id-hadamard")? },
        FamilyName::Kerdock => Family::KerdockReal { k: args.k.unwrap_or(0) },
        FamilyName::File => Family::ExternalFile {
            path: require(args.path.as_ref(), "path", "file")?.display().to_string(),
        },
    };
    let recipe = FrameRecipe { family, kron };
    match (&recipe.family, &args.kerdock_set) {
        (Family::ExternalFile { path }, _) => {
            let base = read_frame(Path::new(path))?;
            if base.r() != 1 {
                bail!(blockcoh::Error::Domain(format!(
                    "base matrix file must have r=1, found r={}",
                    base.r()
                )));
            }
            Ok(recipe.assemble(base.matrix())?)
        }
        (Family::KerdockReal { .. }, Some(set_path)) => {
            let text = fs::read_to_string(set_path).with_context(|| format!("reading {}", set_path.display()))?;
            let set = KerdockSet::parse(&text)?;
            set.validate()?;
            Ok(recipe.assemble(&kerdock_from_set::<f64>(&set)?)?)
        }
        (Family::KerdockReal { .. }, None) if args.k.is_none() => {
            bail!(blockcoh::Error::Domain("--family kerdock needs --k or --kerdock-set".into()))
        }
        _ => Ok(recipe.build()?),
    }
}

fn read_frame(path: &Path) -> Result<Frame> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_bfm(&text).with_context(|| format!("parsing {}", path.display()))
}

fn table<T: Serialize>(format: TableFormat, rows: &T, csv: impl FnOnce() -> String) -> Result<(String, &'static str)> {
    Ok(match format {
        TableFormat::Csv => (csv(), "csv"),
        TableFormat::Json => (to_json(rows)?, "json"),
    })
}

fn beta_grid(args: &ThresholdArgs) -> Vec<f64> {
    if !args.beta.is_empty() {
        return args.beta.clone();
    }
    match args.points {
        0 => Vec::new(),
        1 => vec![0.05],
        k => (0..k).map(|i| 0.05 + 0.4 * i as f64 / (k - 1) as f64).collect(),
    }
}

#[derive(Serialize)]
struct BoundsReport {
    m: usize,
    n: usize,
    r: usize,
    field: Field,
    welch_block_lower: f64,
    orthobases_lower: Option<f64>,
    rankin_chordal: f64,
    rankin_chordal_tight: f64,
    spectral_distance_upper: f64,
    max_equiisoclinic: u64,
    max_blocks_orthobases: u64,
    tail_bound: Vec<TailPoint>,
}

#[derive(Serialize)]
struct TailPoint {
    lambda1: f64,
    g: f64,
}

/// Runs one command, returning the manifest parameters and a value to print.
fn run(cli: &Cli, out: &mut Outputs) -> Result<(serde_json::Value, Option<bool>)> {
    let mut valid = None;
    let params = match &cli.command {
        Command::Construct(args) => {
            let frame = build_frame(&args.recipe)?;
            let report = frame.coherence_report()?;
            out.write(&format!("{}.bfm", args.name), &write_bfm(&frame))?;
            let json = to_json(&report)?;
            out.write(&format!("{}.report.json", args.name), &json)?;
            print!("{json}");
            serde_json::to_value(args)?
        }
        Command::Analyze(args) => {
            let frame = read_frame(&args.file)?;
            let report = frame.coherence_report()?;
            let stem = args
                .file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "frame".into());
            let json = to_json(&report)?;
            out.write(&format!("{stem}.report.json"), &json)?;
            out.write(&format!("{stem}.gram.csv"), &gram_map_csv(&report.gram_map))?;
            valid = Some(report.validation.unit_columns && report.validation.block_orthonormal);
            print!("{json}");
            serde_json::to_value(args)?
        }
        Command::Bounds(args) => {
            let field: Field = args.field.parse()?;
            let b = BoundInputs::new(args.m, args.n, args.r, field)?;
            let tail_bound = args
                .lambda
                .iter()
                .map(|&l| Ok(TailPoint { lambda1: l, g: bounds::tail_bound_g(l, args.n, args.r)? }))
                .collect::<Result<Vec<_>>>()?;
            let report = BoundsReport {
                m: args.m,
                n: args.n,
                r: args.r,
                field,
                welch_block_lower: bounds::welch_block_lower(&b)?,
                orthobases_lower: bounds::orthobases_lower(args.n, args.r).ok(),
                rankin_chordal: bounds::rankin_chordal(&b)?,
                rankin_chordal_tight: bounds::rankin_chordal_tight(args.n, args.r)?,
                spectral_distance_upper: bounds::spectral_distance_upper(&b)?,
                max_equiisoclinic: bounds::max_equiisoclinic(args.n, args.r, field)?,
                max_blocks_orthobases: bounds::max_blocks_orthobases(args.n, field)?,
                tail_bound,
            };
            let json = to_json(&report)?;
            out.write("bounds.json", &json)?;
            print!("{json}");
            serde_json::to_value(args)?
        }
        Command::Threshold(args) => {
            let rows = beta_grid(args)
                .into_iter()
                .map(bounds::solve_a_hat)
                .collect::<blockcoh::Result<Vec<_>>>()?;
            let (text, ext) = table(cli.format, &rows, || threshold_csv(&rows))?;
            out.write(&format!("threshold.{ext}"), &text)?;
            print!("{text}");
            serde_json::to_value(args)?
        }
        Command::RandomMu(args) => {
            let grid = if args.r_grid.is_empty() { default_r_grid(args.n) } else { args.r_grid.clone() };
            let trials = cli.trials.unwrap_or(50);
            let rows = empirical_mu_curve(args.n, &grid, BlockCountRule { cap: args.m_cap }, trials, cli.seed)?;
            let (text, ext) = table(cli.format, &rows, || mu_curve_csv(&rows))?;
            out.write(&format!("random_mu.{ext}"), &text)?;
            print!("{text}");
            let mut p = serde_json::to_value(args)?;
            p["r_grid"] = serde_json::to_value(&grid)?;
            p["trials"] = trials.into();
            p
        }
        Command::Flip(args) => {
            let frame = read_frame(&args.file)?;
            let variant: NormVariant = args.variant.parse()?;
            let result = match args.search_trials {
                Some(t) => random_flip_search(&frame, t, cli.seed)?,
                None => flip(&frame, &FlipConfig { norm_variant: variant, ..FlipConfig::default() })?,
            };
            out.write(&format!("{}.bfm", args.name), &write_bfm(&result.flipped))?;
            let json = to_json(&result.summary())?;
            out.write(&format!("{}.flip.json", args.name), &json)?;
            print!("{json}");
            serde_json::to_value(args)?
        }
        Command::FlipTable(args) => {
            let realizations = cli.trials.unwrap_or(10);
            let t = run_flipping_table(args.n, args.m, &args.r_set, realizations, cli.seed)?;
            let json = to_json(&t)?;
            out.write("flip_table.json", &json)?;
            let mut csv = String::from("r,nu_before,nu_after,improvement_pct,decreased_runs,lemma2_bound\n");
            for row in &t.rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.r, row.nu_before_mean, row.nu_after_mean, row.improvement_pct, row.decreased_runs, t.lemma2_bound
                ));
            }
            out.write("flip_table.csv", &csv)?;
            print!("{}", if cli.format == TableFormat::Json { &json } else { &csv });
            valid = Some(t.rows.iter().all(|r| r.runs.iter().all(|x| x.gram_map_preserved)));
            let mut p = serde_json::to_value(args)?;
            p["realizations"] = realizations.into();
            p
        }
        Command::Cs(args) => {
            let frame = match &args.frame {
                Some(path) => read_frame(path)?,
                None => FrameRecipe {
                    family: Family::SteinerPairsEtf { v: 4 },
                    kron: KronFactor::Hadamard(1),
                }
                .build()?,
            };
            let (n, r, m) = (frame.n(), frame.r(), frame.m());
            let mut sources = vec![FrameSource::Fixed { label: "deterministic".into(), frame }];
            for s in 0..args.random_series {
                let label = if args.random_series == 1 { "random".to_string() } else { format!("random-{s}") };
                sources.push(FrameSource::RandomSubspaces { label, n, r, m });
            }
            let trials = cli.trials.unwrap_or(500);
            let cfg = NdpConfig {
                k_grid: args.k_grid.clone(),
                dynamic_ranges: args.dynamic_range.clone(),
                trials,
                seed: cli.seed,
                snr_db: args.snr_db,
            };
            let rows = run_ndp_experiment(&sources, &cfg)?;
            let (text, ext) = table(cli.format, &rows, || ndp_csv(&rows))?;
            out.write(&format!("ndp.{ext}"), &text)?;
            print!("{text}");
            let mut p = serde_json::to_value(args)?;
            p["trials"] = trials.into();
            p
        }
    };
    Ok((params, valid))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Construct(_) => "construct",
        Command::Analyze(_) => "analyze",
        Command::Bounds(_) => "bounds",
        Command::Threshold(_) => "threshold",
        Command::RandomMu(_) => "random-mu",
        Command::Flip(_) => "flip",
        Command::FlipTable(_) => "flip-table",
        Command::Cs(_) => "cs",
    }
}

fn configure_threads(requested: Option<usize>) -> Result<()> {
    let threads = match requested {
        Some(t) => Some(t),
        None => match std::env::var("BLOCKFRAME_THREADS") {
            Ok(v) => Some(v.trim().parse().with_context(|| format!("BLOCKFRAME_THREADS=`{v}` is not a number"))?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<blockcoh::Error>() {
            return match e {
                blockcoh::Error::Convergence(_) => 3,
                blockcoh::Error::Io(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = (|| -> Result<bool> {
        configure_threads(cli.threads)?;
        let start = Instant::now();
        let mut out = Outputs::new(&cli.out_dir)?;
        let (params, valid) = run(&cli, &mut out)?;
        let name = command_name(&cli.command);
        let mut params = params;
        params["format"] = serde_json::to_value(cli.format)?;
        let manifest = RunManifest::new(name, params, cli.seed, &out, start.elapsed());
        let path = out.dir().join(format!("{name}.manifest.json"));
        fs::write(&path, to_json(&manifest)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(valid.unwrap_or(true))
    })();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: frame failed validation");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
