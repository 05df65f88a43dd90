use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depsketch_core::graph::Family;
use depsketch_core::processes::{ConditionalLaw, DependentMatrixConfig, LatentLaw, ProcessConfig};
use depsketch_core::transforms::CountSketchPattern;
use depsketch_core::verify::{BuiltinAdversary, ScalarMap};
use serde::{Deserialize, Serialize};

use crate::formats::load_toml;
use crate::{Error, Result};

/// Dependent-entry sketches: generators, bounds and Monte-Carlo checks.
#[derive(Debug, Parser)]
#[command(name = "depsketch", version)]
pub struct Cli {
    /// Directory for reports and the manifest [default: depsketch-out;
    /// for `replay`, <manifest dir>/replay].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Master seed, decimal or 0x-hex [default: $DEPSKETCH_SEED, else 0xDEC0DE].
    #[arg(long, global = true, value_parser = parse_seed)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

pub fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| format!("`{s}` is not a decimal or 0x-hex u64"))
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// d-separation queries and SP-2 verification on templates or DAG files.
    Dsep(DsepArgs),
    /// Sample process paths or dependent-entry matrices to CSV.
    Gen(GenArgs),
    /// Radii, Gaussian width and γ₂ surrogate of a matrix set.
    Width(WidthArgs),
    /// M/V/U and the tail-bound table over an ε grid.
    Bound(BoundArgs),
    /// Johnson-Lindenstrauss distortion of a sketch family.
    Jl(JlArgs),
    /// Restricted isometry constant of a dependent-entry design.
    Rip(RipArgs),
    /// FFT against dense Toeplitz products.
    Toeplitz(ToeplitzArgs),
    /// CountSketch structure and unbiasedness.
    Countsketch(CountsketchArgs),
    /// Smoothed greedy contextual bandit: minimum-eigenvalue growth.
    Bandit(BanditArgs),
    /// Monte-Carlo checks of the moment inequalities.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Apply a stored operator to vectors read from CSV.
    Apply(ApplyArgs),
    /// Rerun a manifest and compare every output byte for byte.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Dsep(_) => "dsep".into(),
            Command::Gen(_) => "gen".into(),
            Command::Width(_) => "width".into(),
            Command::Bound(_) => "bound".into(),
            Command::Jl(_) => "jl".into(),
            Command::Rip(_) => "rip".into(),
            Command::Toeplitz(_) => "toeplitz".into(),
            Command::Countsketch(_) => "countsketch".into(),
            Command::Bandit(_) => "bandit".into(),
            Command::Verify(v) => format!("verify-{}", v.name()),
            Command::Apply(_) => "apply".into(),
            Command::Replay(_) => "replay".into(),
        }
    }

    /// Every input file the command reads.
    pub fn input_paths_mut(&mut self) -> Vec<&mut PathBuf> {
        let mut v: Vec<&mut Option<PathBuf>> = Vec::new();
        match self {
            Command::Dsep(a) => v.push(&mut a.dag),
            Command::Gen(a) => v.push(&mut a.process.process_config),
            Command::Width(a) => v.push(&mut a.set.set_file),
            Command::Bound(a) => v.push(&mut a.set.set_file),
            Command::Jl(a) => {
                v.push(&mut a.points_file);
                v.push(&mut a.process.process_config);
            }
            Command::Verify(c) => match c {
                VerifyCommand::Decoupling(a) => {
                    v.push(&mut a.process.process_config);
                    v.push(&mut a.bset);
                }
                VerifyCommand::Tangent(a) => {
                    v.push(&mut a.process.process_config);
                    v.push(&mut a.mask);
                }
                VerifyCommand::Cbd(a) => {
                    v.push(&mut a.process.process_config);
                    v.push(&mut a.set.set_file);
                }
                VerifyCommand::Symmetrization(a) => v.push(&mut a.process.process_config),
                VerifyCommand::Offdiag(a) => v.push(&mut a.process.process_config),
                VerifyCommand::Contraction(a) => v.push(&mut a.process.process_config),
            },
            Command::Apply(a) => return vec![&mut a.operator, &mut a.input],
            Command::Replay(a) => return vec![&mut a.manifest],
            Command::Rip(_) | Command::Toeplitz(_) | Command::Countsketch(_) | Command::Bandit(_) => {}
        }
        v.into_iter().filter_map(Option::as_mut).collect()
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DsepArgs {
    /// Built-in template family (gm1, gm2, gm3).
    #[arg(long, conflicts_with = "dag")]
    pub template: Option<Family>,
    /// DAG file with one `parent -> child` edge per line.
    #[arg(long)]
    pub dag: Option<PathBuf>,
    /// Template length.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// identity, shift1 or a comma list ϱ(1),…,ϱ(n) [default: family's own].
    #[arg(long)]
    pub varrho: Option<String>,
    /// Add tangent nodes and check the DTS claims.
    #[arg(long)]
    pub tangent: bool,
    /// `X ; Y | Z` query; repeatable. Queries replace SP-2 verification.
    #[arg(long)]
    pub query: Vec<String>,
    /// Also check the path factorization by exact enumeration on binary CPTs.
    #[arg(long)]
    pub factorization: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Gm1,
    Gm2,
    Gm3,
    Gm3Feedback,
    Iid,
}

/// Process selection shared by sampling and verification commands.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ProcessOpts {
    #[arg(long, value_enum, default_value = "gm1")]
    pub family: FamilyArg,
    /// gaussian, rademacher or bernoulli:P [default: family's own].
    #[arg(long)]
    pub law: Option<String>,
    /// AR(1) or feedback latent coefficient.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Disable history-dependent scaling.
    #[arg(long)]
    pub unmodulated: bool,
    /// Keep the conditional mean (negative control).
    #[arg(long)]
    pub uncentered: bool,
    /// TOML process config; overrides the flags above.
    #[arg(long)]
    pub process_config: Option<PathBuf>,
}

fn parse_law(s: &str) -> Result<ConditionalLaw> {
    match s.trim().to_ascii_lowercase().as_str() {
        "gaussian" | "normal" => Ok(ConditionalLaw::Gaussian),
        "rademacher" => Ok(ConditionalLaw::rademacher()),
        other => match other.strip_prefix("bernoulli:") {
            Some(p) => {
                let p: f64 = p.parse().map_err(|_| Error::Usage(format!("bad Bernoulli parameter in `{s}`")))?;
                Ok(ConditionalLaw::bernoulli(p))
            }
            None => Err(Error::Usage(format!("unknown law `{s}`"))),
        },
    }
}

impl ProcessOpts {
    /// Builds and validates a process of length `n` (a config file keeps its own length).
    pub fn build(&self, n: usize) -> Result<ProcessConfig> {
        if let Some(path) = &self.process_config {
            let cfg: ProcessConfig = load_toml(path)?;
            cfg.validate()?;
            return Ok(cfg);
        }
        let mut cfg = match self.family {
            FamilyArg::Gm1 => ProcessConfig::gm1(n),
            FamilyArg::Gm2 => ProcessConfig::gm2(n),
            FamilyArg::Gm3 => ProcessConfig::gm3(n),
            FamilyArg::Gm3Feedback => ProcessConfig::gm3_feedback(n, ConditionalLaw::Gaussian, 0.7, 0.5, 0.5),
            FamilyArg::Iid => ProcessConfig::iid(n),
        };
        if let Some(law) = &self.law {
            cfg = cfg.with_law(parse_law(law)?);
        }
        if let Some(rho) = self.rho {
            cfg = match cfg.latent {
                LatentLaw::Feedback { beta, noise, .. } => {
                    cfg.latent = LatentLaw::Feedback { rho, beta, noise };
                    cfg
                }
                _ => cfg.with_rho(rho),
            };
        }
        if self.unmodulated {
            cfg = cfg.with_modulation(false);
        }
        if self.uncentered {
            cfg = cfg.uncentered();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenLaw {
    Iid,
    Variance,
    Shape,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GeneratorOpts {
    /// Entry law of the dependent-entry matrix generator.
    #[arg(long = "gen", value_enum, default_value = "iid")]
    pub generator: GenLaw,
    #[arg(long, default_value_t = 0.9)]
    pub gen_rho: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gen_beta: f64,
}

impl GeneratorOpts {
    pub fn build(&self, rows: usize, cols: usize) -> DependentMatrixConfig {
        match self.generator {
            GenLaw::Iid => DependentMatrixConfig::iid(rows, cols),
            GenLaw::Variance => DependentMatrixConfig::variance_modulated(rows, cols, self.gen_rho, self.gen_beta),
            GenLaw::Shape => DependentMatrixConfig::shape_modulated(rows, cols, self.gen_rho, self.gen_beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    VthetaSphere,
    VthetaSparse,
    ToeplitzBand,
}

/// Matrix-set selection.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SetOpts {
    #[arg(long, value_enum, default_value = "vtheta-sphere")]
    pub set: SetKind,
    /// Blocks (V_θ sets) or band rows.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub p: usize,
    /// Sparsity of θ.
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    /// TOML set descriptor, or a matrix text file read as a finite set.
    #[arg(long)]
    pub set_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenWhat {
    Paths,
    Matrix,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "paths")]
    pub what: GenWhat,
    /// Number of paths or matrices.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Path length.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Also draw decoupled tangent sequences.
    #[arg(long)]
    pub tangent: bool,
    #[command(flatten)]
    pub process: ProcessOpts,
    #[arg(long, default_value_t = 8)]
    pub rows: usize,
    #[arg(long, default_value_t = 8)]
    pub cols: usize,
    #[command(flatten)]
    pub generator: GeneratorOpts,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WidthArgs {
    #[command(flatten)]
    pub set: SetOpts,
    /// Monte-Carlo draws for the Gaussian width.
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    /// Constant C in γ₂ ≤ C·w.
    #[arg(long, default_value_t = 1.0)]
    pub gamma2_c: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoundArgs {
    #[command(flatten)]
    pub set: SetOpts,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma2_c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    /// start:stop:count, endpoints included.
    #[arg(long, default_value = "0.1:1.0:10")]
    pub eps_grid: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SketchKind {
    Dense,
    Countsketch,
    Toeplitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternArg {
    Uniform,
    Adaptive,
}

impl From<PatternArg> for CountSketchPattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Uniform => CountSketchPattern::Uniform,
            PatternArg::Adaptive => CountSketchPattern::Adaptive,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct JlArgs {
    /// Number of random Gaussian points N.
    #[arg(long, default_value_t = 32)]
    pub points: usize,
    /// Ambient dimension p.
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Headerless CSV of points (one per row); replaces --points/--dim.
    #[arg(long)]
    pub points_file: Option<PathBuf>,
    /// Sketch rows; a comma list runs a sweep and fits the log-log slope.
    #[arg(long, value_delimiter = ',', default_value = "64")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "dense")]
    pub sketch: SketchKind,
    /// CountSketch non-zeros per column.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub pattern: PatternArg,
    #[command(flatten)]
    pub generator: GeneratorOpts,
    /// Toeplitz sketches draw ξ from this process.
    #[command(flatten)]
    pub process: ProcessOpts,
    /// Exit 2 when the fraction of trials with distortion > eps exceeds this.
    #[arg(long)]
    pub max_failure_rate: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RipArgs {
    /// Enumerate every support (guarded at 1e5 supports).
    #[arg(long, conflicts_with = "mc_trials")]
    pub exact: bool,
    /// Random sparse directions instead of enumeration.
    #[arg(long)]
    pub mc_trials: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub p: usize,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    #[command(flatten)]
    pub generator: GeneratorOpts,
    /// Row counts for a median-δ scaling sweep (exact mode).
    #[arg(long, value_delimiter = ',')]
    pub scaling_ns: Vec<usize>,
    /// Designs per row count in the sweep.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ToeplitzArgs {
    /// Sizes as `a:b` (inclusive range) or a comma list.
    #[arg(long, default_value = "2:64")]
    pub p: String,
    /// Random (ξ, u) pairs per size.
    #[arg(long, default_value_t = 20)]
    pub inputs: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Also write a partial Toeplitz operator with this many rows (largest p).
    #[arg(long)]
    pub dump_rows: Option<usize>,
    /// Write dumped operators with hex floats.
    #[arg(long)]
    pub hex: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CountsketchArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub p: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub pattern: PatternArg,
    #[arg(long, default_value_t = 10_000)]
    pub sketches: usize,
    /// Also write the first sketch in operator text format.
    #[arg(long)]
    pub dump: bool,
    #[arg(long)]
    pub hex: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BanditArgs {
    #[arg(long, default_value_t = 8)]
    pub p: usize,
    /// Arms per round.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Context perturbation scale.
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 2000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    #[arg(long, default_value_t = 50)]
    pub pilot_runs: usize,
    /// Round at which κ̂ is read off the pilot runs [default: horizon].
    #[arg(long)]
    pub reference_t: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub c_sample: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ridge: f64,
    /// zero, repeater, rotating or anti-greedy.
    #[arg(long, default_value = "anti-greedy")]
    pub adversary: BuiltinAdversary,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCommand {
    /// E h(Σ b_jk ξ_j ξ_k) against 4·E h(Σ b_jk ξ_j ξ'_k).
    Decoupling(DecouplingArgs),
    /// Factor-2 symmetrization and factor-½ de-symmetrization.
    Symmetrization(SymmetrizationArgs),
    /// Two-sample KS test of the tangent equivalence on a bipartite mask.
    Tangent(TangentArgs),
    /// Off-diagonal products have mean zero.
    Offdiag(OffdiagArgs),
    /// C/B/D decomposition over a matrix set.
    Cbd(CbdArgs),
    /// Tail-ratio contraction with an estimated K.
    Contraction(ContractionArgs),
}

impl VerifyCommand {
    pub fn name(&self) -> &'static str {
        match self {
            VerifyCommand::Decoupling(_) => "decoupling",
            VerifyCommand::Symmetrization(_) => "symmetrization",
            VerifyCommand::Tangent(_) => "tangent",
            VerifyCommand::Offdiag(_) => "offdiag",
            VerifyCommand::Cbd(_) => "cbd",
            VerifyCommand::Contraction(_) => "contraction",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DecouplingArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[command(flatten)]
    pub process: ProcessOpts,
    /// Matrix text file of symmetric zero-diagonal matrices.
    #[arg(long)]
    pub bset: Option<PathBuf>,
    /// Random matrices drawn when no file is given.
    #[arg(long, default_value_t = 4)]
    pub bset_count: usize,
    /// 1 for h = |x|, 2 for h = x².
    #[arg(long, default_value_t = 2)]
    pub p_norm: u32,
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SymmetrizationArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[command(flatten)]
    pub process: ProcessOpts,
    /// Comma list of weights [default: all ones].
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    /// Comma list from identity, abs, square, clip, tanh, relu.
    #[arg(long, value_delimiter = ',', default_value = "abs,tanh")]
    pub maps: Vec<ScalarMap>,
    #[arg(long, default_value_t = 2)]
    pub p_norm: u32,
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TangentArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[command(flatten)]
    pub process: ProcessOpts,
    /// Matrix text file holding one n × n mask [default: random bipartite].
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Samples per side.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OffdiagArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[command(flatten)]
    pub process: ProcessOpts,
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CbdArgs {
    #[command(flatten)]
    pub set: SetOpts,
    /// Process length is taken from the set's column count.
    #[command(flatten)]
    pub process: ProcessOpts,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ContractionArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[command(flatten)]
    pub process: ProcessOpts,
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub p_norm: u32,
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ApplyArgs {
    /// Operator text file.
    #[arg(long)]
    pub operator: PathBuf,
    /// Headerless CSV, one input vector per row.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
