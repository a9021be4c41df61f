use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "capwater",
    version,
    about = "Gaussian capacity of bosonic channels with correlated additive noise",
    after_help = "Exit codes: 0 success, 1 domain/model/I-O error, 2 numerical failure, 3 failed verification.\n\
                  CAPWATER_THREADS bounds the worker pool (0 or unset = all cores)."
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file; written atomically. Standard output when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Quadrature panels on [0, pi].
    #[arg(long, global = true, default_value_t = 2048)]
    pub grid_size: usize,

    /// Tolerance of inner root finding.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub root_tol: f64,

    /// Tolerance on the Lagrange multiplier.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub mu_tol: f64,

    /// Iteration cap of every solver loop.
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iter: usize,
}

/// Mean photon number or total energy of one mode.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct EnergyArgs {
    /// Mean photon number per mode; lambda = 2 nbar + 1.
    #[arg(long)]
    pub nbar: Option<f64>,

    /// Input energy lambda (at least 1 per mode).
    #[arg(long)]
    pub lambda: Option<f64>,
}

/// Noise model given as a JSON file or as inline Gauss-Markov parameters.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ModelArgs {
    /// JSON noise model, e.g. {"type": "gauss_markov", "N": 1.0, "phi": 0.85}.
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Inline Gauss-Markov noise as N,phi.
    #[arg(long, value_name = "N,PHI")]
    pub gm: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Channel {
    Infinite,
    TwoMode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal input and modulation of one mode.
    ///
    /// Columns: gq,gp,lambda,nbar,regime,gin_q,gin_p,gmod_q,gmod_p,mu,nu_bar,nu_out,chi.
    OneMode {
        #[arg(long)]
        gq: f64,
        #[arg(long)]
        gp: f64,
        #[command(flatten)]
        energy: EnergyArgs,
    },

    /// Optimal allocation over a finite set of diagonal modes.
    ///
    /// Per-mode columns: index,gq,gp,set,lambda,gin_q,gin_p,gmod_q,gmod_p,mu,chi.
    /// With --summary: modes,lambda,mu,c1,c1_per_mode,n1,n2,n3.
    Finite {
        /// Modes as gq:gp pairs separated by commas, e.g. 1.5:0.5,0.5:1.5.
        #[arg(long, required_unless_present = "model", conflicts_with = "model")]
        modes: Option<String>,

        /// JSON model of type "modes".
        #[arg(long)]
        model: Option<PathBuf>,

        /// Mean photon number per mode; total energy n (2 nbar + 1).
        #[arg(long, required_unless_present = "lambda", conflicts_with = "lambda")]
        nbar: Option<f64>,

        /// Total input energy over all modes.
        #[arg(long)]
        lambda: Option<f64>,

        /// Emit one summary record instead of one record per mode.
        #[arg(long)]
        summary: bool,
    },

    /// Capacity of a stationary noise spectrum.
    ///
    /// Summary columns: phi,nbar,mu,capacity,frac_n1,frac_n2,frac_n3,global_wf.
    /// With --spectra: x,weight,gq,gp,gin_q,gin_p,gmod_q,gmod_p,nu_bar,nu_out,set.
    Spectral {
        #[command(flatten)]
        model: ModelArgs,

        #[arg(long)]
        nbar: f64,

        /// Emit the optimal spectra node by node.
        #[arg(long)]
        spectra: bool,
    },

    /// Gain of optimal inputs over coherent states on an nbar grid.
    ///
    /// Columns: nbar,snr,phi,capacity,rate,gain.
    Gain {
        #[command(flatten)]
        model: ModelArgs,

        /// Grid lo:hi:steps of mean photon numbers.
        #[arg(long, value_name = "LO:HI:STEPS")]
        nbar_grid: String,

        /// Logarithmic spacing of the grid.
        #[arg(long)]
        log: bool,

        /// Fix nbar/N; the noise strength then follows each grid point
        /// (Gauss-Markov models only).
        #[arg(long)]
        snr: Option<f64>,

        /// Infinitely many modes or two diagonalized modes.
        #[arg(long, value_enum, default_value_t = Channel::Infinite)]
        channel: Channel,
    },

    /// Toeplitz diagonals of the optimal input covariance.
    ///
    /// Columns: k,q,p. Truncation error and the entanglement witness go to
    /// standard error.
    InputCov {
        #[command(flatten)]
        model: ModelArgs,

        #[arg(long)]
        nbar: f64,

        /// Largest diagonal index.
        #[arg(long, default_value_t = 64)]
        k_max: usize,
    },

    /// Spectral capacity over an nbar grid, optionally also over phi.
    ///
    /// Columns: phi,nbar,mu,capacity,frac_n1,frac_n2,frac_n3,global_wf.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,

        #[arg(long, value_name = "LO:HI:STEPS")]
        nbar_grid: String,

        #[arg(long)]
        log: bool,

        /// Correlation grid lo:hi:steps replacing the model's phi (Gauss-Markov only).
        #[arg(long, value_name = "LO:HI:STEPS")]
        phi_grid: Option<String>,
    },

    /// Brute-force and analytic checks of the one-mode solution.
    ///
    /// Columns: check,value,limit,passed. Exits with 3 if a check fails.
    Verify {
        #[arg(long)]
        gq: f64,
        #[arg(long)]
        gp: f64,
        #[command(flatten)]
        energy: EnergyArgs,

        /// Oracle grid resolution per axis.
        #[arg(long, default_value_t = 64)]
        grid_points: usize,
    },
}
