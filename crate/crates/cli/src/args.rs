use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "equistate", version, about = "Certified pressure, equilibrium states and their verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Certified,
    Empirical,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Primary output file; defaults to `<command>.json` under $EQUISTATE_OUT_DIR or the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// A rational map or a subdivision rule.
#[derive(Args, Debug, Clone)]
pub struct Target {
    /// Rational map, e.g. `z^2-2` or `(z^2+1)/(2z)`.
    #[arg(long, conflicts_with = "rule")]
    pub map: Option<String>,
    /// Subdivision rule: g1 or g2.
    #[arg(long)]
    pub rule: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Topological pressure with a certified error bound.
    Pressure {
        #[arg(long)]
        map: String,
        #[arg(long, default_value = "const:0")]
        potential: String,
        #[arg(long, default_value = "1")]
        alpha: String,
        /// Hölder bound of the potential; defaults to its computed bound times --visual-constant.
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long)]
        c0: Option<String>,
        /// Factor converting chordal Hölder bounds to the visual metric.
        #[arg(long, default_value = "1")]
        visual_constant: String,
        #[arg(long, default_value_t = 8)]
        n: i64,
        #[arg(long, value_enum, default_value_t = Mode::Certified)]
        mode: Mode,
        #[command(flatten)]
        output: Output,
    },
    /// Equilibrium-state approximation: backward-orbit measure or tile measure.
    Mme {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "const:0")]
        potential: String,
        #[arg(long, alias = "level", default_value_t = 8)]
        depth: usize,
        /// Root of the backward orbit; defaults to the first admissible ideal point.
        #[arg(long)]
        anchor: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Equilibrium-state checks.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Certified roots of a polynomial in z.
    Roots {
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 53)]
        bits: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Preimages of a point with local degrees.
    Preimages {
        #[arg(long)]
        map: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 53)]
        bits: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Kantorovich distance between two measure files.
    Wasserstein {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[arg(long, default_value_t = 40)]
        n: i64,
        #[command(flatten)]
        output: Output,
    },
    /// The level-n tile complex of a subdivision rule.
    Tiles {
        #[arg(long)]
        rule: String,
        #[arg(long, alias = "depth", default_value_t = 1)]
        level: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Birkhoff sum along an exact orbit.
    Birkhoff {
        #[arg(long)]
        map: String,
        #[arg(long)]
        potential: String,
        #[arg(long)]
        point: String,
        #[arg(long = "steps", alias = "depth")]
        steps: usize,
        #[arg(long, default_value_t = 40)]
        n: i64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum Check {
    /// Residuals of `sum 1/J(y) = 1` at regular ideal points.
    Jacobian {
        #[arg(long)]
        map: String,
        #[arg(long = "J", default_value = "const:2")]
        j: String,
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[arg(long, default_value = "1/1048576")]
        tol: String,
        #[arg(long, default_value_t = 40)]
        n: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Hat-test residuals of the Jacobian membership conditions.
    Membership {
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long = "J")]
        j: String,
        /// Number of ideal points used as hat centers (sphere) or vertices (tiles).
        #[arg(long, default_value_t = 16)]
        centers: usize,
        /// Comma-separated hat widths.
        #[arg(long, default_value = "1/2,1/4,1/8")]
        widths: String,
        #[arg(long, default_value = "1/1024")]
        tol: String,
        #[arg(long, default_value_t = 30)]
        n: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Tangent-functional test against witness potentials.
    Tangent {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value = "const:0")]
        phi: String,
        /// JSON list of {"potential": .., "upper": "q"}.
        #[arg(long)]
        witnesses: PathBuf,
        /// Lower bound on the pressure of phi.
        #[arg(long)]
        p_lower: String,
        #[arg(long, default_value = "1/1024")]
        tol: String,
        #[arg(long, default_value_t = 40)]
        n: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Integral of log J, a lower bound on the entropy.
    Rokhlin {
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long = "J")]
        j: String,
        #[arg(long, default_value_t = 40)]
        n: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Distance between a measure and its pushforward.
    Invariance {
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "1/1024")]
        tol: String,
        #[arg(long, default_value_t = 40)]
        n: i64,
        #[command(flatten)]
        output: Output,
    },
}
