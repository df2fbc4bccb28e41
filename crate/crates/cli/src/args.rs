use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ribbonflow", version, about = "Renormalization of infinite interval exchanges from ribbon graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; each subcommand has a default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for sampled starting points; recorded in every header.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Number of circles an orbit may lay out before giving up.
    #[arg(long, global = true, env = "RIBBONFLOW_BUDGET", default_value_t = 100_000)]
    pub budget: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Shrinking sequence, sign sequence and critical times of a direction.
    Shrink {
        #[arg(long)]
        lambda: String,
        /// Direction "x, y" with exact entries.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Classify the skew-rotation direction (alpha - 1/n, 1/n).
    Omega {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 40)]
        depth: usize,
    },
    /// Dump an eigenfunction on a ball and check its residual.
    Eigen {
        #[command(flatten)]
        family: FamilyArgs,
        /// Radius of the dumped ball.
        #[arg(long, default_value_t = 4)]
        window: u32,
        /// Radius of the residual check.
        #[arg(long, default_value_t = 12)]
        depth: u32,
    },
    /// Orbit of the first return map to the horizontal circles, or of a skew rotation.
    Simulate {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        direction: DirectionArgs,
        /// Simulate the skew rotation by this angle over --group/--generators instead.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Double-double arithmetic instead of exact.
        #[arg(long)]
        float: bool,
        /// Emit visits per unit cell instead of the orbit.
        #[arg(long)]
        histogram: bool,
    },
    /// Check that P_{w2}(theta2) stays in the sign quadrants along the shrinking sequence of theta1.
    Survivor {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Radius of the vertex window around the root.
        #[arg(long, default_value_t = 12)]
        window: u32,
    },
    /// |Upsilon^{g_n}(f)(v)| along the shrinking sequence.
    Decay {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        window: u32,
    },
    /// Boundary lengths of the cylinder balls X_n.
    Growth {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Images of the bottom sides of rectangles under the conjugacy between two surfaces.
    Conjugate {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        window: u32,
    },
    /// SVG of a truncated surface, or of the complementary-interval endpoints.
    Render {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = RenderTarget::Surface)]
        target: RenderTarget,
        /// Eigenvalue for the limit-set picture.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 2)]
        window: u32,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RenderTarget {
    Surface,
    LimitSet,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    /// Line graph, constant function.
    Gz,
    /// Line graph, t^n.
    GzExp,
    /// Three rays from a center.
    Tripod,
    /// Regular tree, constant function.
    Ntree,
    /// Regular tree, horocyclic function q^-h.
    NtreeHoro,
    /// Skew graph over a group, character lift.
    Skew,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = FamilyName::Gz)]
    pub family: FamilyName,
    /// Growth parameter for gz-exp and tripod.
    #[arg(long)]
    pub t: Option<String>,
    /// Valence for ntree and ntree-horo.
    #[arg(long, default_value_t = 3)]
    pub n: u8,
    /// Base of the horocyclic function.
    #[arg(long)]
    pub q: Option<String>,
    /// Z, Z^d, Z/m, F<k> or H.
    #[arg(long, default_value = "Z")]
    pub group: String,
    /// Generator tuple, e.g. "1,-1" or "x,X,y,Y".
    #[arg(long, default_value = "1,-1", allow_hyphen_values = true)]
    pub generators: String,
    /// Character values, one per group coordinate.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub chi: String,
}

#[derive(Args, Debug, Clone)]
pub struct DirectionArgs {
    /// Direction "x, y"; defaults to the direction of --ray.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Increment sequence, a period in parentheses, e.g. "h (h^-1 v^-1)".
    #[arg(long, default_value = "(h^-1 v^-1)")]
    pub ray: String,
}

/// Two eigenfunctions on the same graph and the directions with matching shrinking sequences.
#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Family of w2; defaults to --family.
    #[arg(long, value_enum)]
    pub family2: Option<FamilyName>,
    #[arg(long)]
    pub t2: Option<String>,
    #[arg(long)]
    pub q2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub chi2: Option<String>,
    #[arg(long, default_value = "(h^-1 v^-1)")]
    pub ray: String,
    /// Added to the slope of theta2, to test sensitivity.
    #[arg(long, allow_hyphen_values = true)]
    pub perturb: Option<String>,
}
