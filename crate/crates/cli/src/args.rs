use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser, Debug, Serialize)]
#[command(name = "urnflow", version, about = "Urn, tree, walk and Stein-bound experiments")]
pub struct Cli {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory for the output artifact and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run the command's self-checks; exit 3 if any fails.
    #[arg(long, global = true)]
    pub check: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Urns with periodic immigration.
    Urn {
        #[command(subcommand)]
        cmd: UrnCmd,
    },
    /// Generalized gamma distributions.
    Gg {
        #[command(subcommand)]
        cmd: GgCmd,
    },
    /// Decorated binary trees grown by Rémy's algorithm.
    Tree {
        #[command(subcommand)]
        cmd: TreeCmd,
    },
    /// Lattice paths and their tree bijections.
    Walk {
        #[command(subcommand)]
        cmd: WalkCmd,
    },
    /// Stein solutions, bound audits and Kolmogorov bounds.
    Stein {
        #[command(subcommand)]
        cmd: SteinCmd,
    },
    /// Power-bias and equilibrium transforms and the coupling chain.
    Transform {
        #[command(subcommand)]
        cmd: TransformCmd,
    },
    /// Exact Kolmogorov distances over an n-grid with a log-log fit.
    Rate(RateArgs),
    /// Exact distributional identity check (same as `urn identity`).
    Identity(IdentityArgs),
}

#[derive(Args, Debug, Serialize, Clone, Copy)]
pub struct UrnArgs {
    /// Initial black balls.
    #[arg(long, default_value_t = 1)]
    pub b: u64,
    /// Initial white balls.
    #[arg(long, default_value_t = 1)]
    pub w: u64,
    /// One black immigrant after every l-th draw.
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    /// Number of draws.
    #[arg(long)]
    pub n: u64,
}

#[derive(ValueEnum, Debug, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum UrnCmd {
    /// Exact law of the white count.
    Pmf {
        #[command(flatten)]
        urn: UrnArgs,
        /// Exact rational arithmetic.
        #[arg(long)]
        rational: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Simulated white counts, summarized as an empirical law.
    Sample {
        #[command(flatten)]
        urn: UrnArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Rising factorial moments from the product formula.
    Moments {
        #[command(flatten)]
        urn: UrnArgs,
        /// Highest order.
        #[arg(long, default_value_t = 4)]
        m: u32,
    },
    /// Exact distributional identity check.
    Identity(IdentityArgs),
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct IdentityArgs {
    /// bias-shift, first-period, green-ball, classical-mixture or
    /// polya-representation (also lemma4.2, lemma4.7, lemma4.8, lemma4.9,
    /// lemma4.10).
    #[arg(long)]
    pub name: String,
    #[arg(long, default_value_t = 1)]
    pub j: u64,
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    #[arg(long)]
    pub n: u64,
    /// Green balls for green-ball.
    #[arg(long, default_value_t = 0)]
    pub i: u64,
    /// Black balls for bias-shift (white balls are j).
    #[arg(long, default_value_t = 1)]
    pub b: u64,
    /// Added white balls for bias-shift.
    #[arg(long, default_value_t = 1)]
    pub shift: u64,
    /// Floating point instead of rational arithmetic.
    #[arg(long)]
    pub float: bool,
}

#[derive(Args, Debug, Serialize, Clone, Copy)]
pub struct GgShape {
    #[arg(long)]
    pub k: f64,
    #[arg(long)]
    pub r: f64,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum GgCmd {
    /// Density at the given points.
    Pdf {
        #[command(flatten)]
        shape: GgShape,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// Distribution function at the given points.
    Cdf {
        #[command(flatten)]
        shape: GgShape,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// Moment of the given order.
    Moment {
        #[command(flatten)]
        shape: GgShape,
        #[arg(long)]
        order: f64,
    },
    /// Samples, summarized by the Kolmogorov distance to the target.
    Sample {
        #[command(flatten)]
        shape: GgShape,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Print the sampled values as CSV instead of the summary.
        #[arg(long)]
        values: bool,
    },
}

#[derive(ValueEnum, Debug, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TreeStatName {
    SpanningLeaves,
    NodePath,
    PlaneSpanning,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum TreeCmd {
    /// Grow one tree and show its plane tree and paths.
    Grow {
        /// Leaves.
        #[arg(long)]
        n: usize,
    },
    /// Every decorated tree with n leaves and its construction probability.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Simulated law of a tree statistic against its exact law.
    Stat {
        #[arg(long, value_enum)]
        stat: TreeStatName,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(ValueEnum, Debug, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ClassName {
    Walk,
    Bridge,
    Excursion,
    Meander,
}

#[derive(ValueEnum, Debug, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum WalkStatName {
    ExcursionHeight,
    BridgeLocalTime,
    MeanderFinalHeight,
    MeanderFinalHeightEven,
    WalkLocalTime,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum WalkCmd {
    /// Map a tree (given or grown) to a path of the chosen class.
    Map {
        #[arg(long, value_enum)]
        class: ClassName,
        /// Tree in `(L R)` notation; grown at random when absent.
        #[arg(long)]
        tree: Option<String>,
        /// Size parameter for the random tree.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// All paths of a class and length.
    Enumerate {
        #[arg(long, value_enum)]
        class: ClassName,
        #[arg(long)]
        len: usize,
    },
    /// Simulated law of a path statistic against its exact law.
    Stat {
        #[arg(long, value_enum)]
        stat: WalkStatName,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(ValueEnum, Debug, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Indicator,
    Ramp,
    Tent,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum SteinCmd {
    /// Stein solution on a grid, with residuals.
    Solve {
        #[command(flatten)]
        shape: GgShape,
        #[arg(long, value_enum, default_value_t = TestKind::Indicator)]
        test: TestKind,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Grid points on (0, xmax].
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 4.0)]
        xmax: f64,
    },
    /// Numerical audit of the Stein solution bounds.
    Audit {
        /// Shape k; with r, audits one pair instead of the full grid.
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        /// Largest integer k and r of the full grid.
        #[arg(long, default_value_t = 6)]
        max: u32,
        #[arg(long, default_value_t = 50)]
        thresholds: usize,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Kolmogorov bound from closeness β and the exceedance probability,
    /// or measured on the urn coupling chain when n is given.
    Bound {
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        beta: Option<f64>,
        /// E W^{r-1}.
        #[arg(long, default_value_t = 1.0)]
        ew: f64,
        #[arg(long, default_value_t = 0.0)]
        exceedance: f64,
        #[arg(long, default_value_t = 1)]
        j: u64,
        #[arg(long, default_value_t = 1)]
        l: u64,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
pub enum TransformCmd {
    /// Power-biased (or rising-factorial-biased) urn law.
    Bias {
        #[command(flatten)]
        urn: UrnArgs,
        #[arg(long, default_value_t = 1)]
        order: u32,
        /// Bias by rising factorials instead of powers.
        #[arg(long)]
        rising: bool,
        #[arg(long)]
        rational: bool,
    },
    /// Fixed point of the equilibrium transform for GG(k, r).
    Equilibrium {
        #[command(flatten)]
        shape: GgShape,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Exceedance of the coupling chain of W_n and W*.
    Couple {
        #[arg(long, default_value_t = 1)]
        j: u64,
        #[arg(long, default_value_t = 1)]
        l: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(ValueEnum, Debug, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RateStat {
    SpanningLeaves,
    NodePath,
    PlaneSpanning,
    ExcursionHeight,
    BridgeLocalTime,
    MeanderFinalHeight,
    MeanderFinalHeightEven,
    WalkLocalTime,
}

#[derive(Args, Debug, Serialize)]
pub struct RateArgs {
    #[arg(long, default_value_t = 1)]
    pub j: u64,
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    /// Statistic instead of the urn.
    #[arg(long, value_enum)]
    pub stat: Option<RateStat>,
    /// k for spanning statistics.
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    #[arg(long, default_value_t = 32)]
    pub nmin: u64,
    #[arg(long, default_value_t = 16_384)]
    pub nmax: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}
