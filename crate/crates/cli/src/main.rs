//! `polyrigid` — rigidity verdicts and numerical harnesses for
//! triangulated polyhedra.
//!
//! Every subcommand reads an instance file (the JSON schema with
//! `vertices`, `triangles`, optional `cells` and `ellipsoid`, or an
//! ASCII OFF surface mesh), writes one JSON verdict document to stdout,
//! and reports diagnostics on stderr. Exit codes: 0 for rigid/pass,
//! 2 for flexible/fail, 3 for inconclusive, 1 for errors.

mod commands;
mod document;
mod rng;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "polyrigid",
    version,
    about = "Infinitesimal rigidity of triangulated polyhedra via hyperbolic geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full rigidity pipeline: ellipsoid hypothesis, normalization,
    /// hyperideal checks, and hyperbolic length/angle verdicts.
    TheoremB {
        /// Instance file (.json with cells; ellipsoid given or fitted).
        instance: std::path::PathBuf,
        /// Ellipsoid source: "given" (from the file) or "auto"
        /// (least-squares fit through the vertices, then shrunk).
        #[arg(long, default_value = "given")]
        ellipsoid: String,
        /// Shrink factor applied to the fitted ellipsoid in auto mode.
        #[arg(long, default_value_t = 0.99)]
        shrink: f64,
        /// Relative singular-value threshold for rank decisions.
        #[arg(long, default_value_t = 1e-8)]
        sigma_tol: f64,
        /// Write the truncated cell polytopes of the normalized
        /// triangulation as an OFF file.
        #[arg(long)]
        emit_off: Option<std::path::PathBuf>,
        /// Omit wall-clock timings for byte-identical reruns.
        #[arg(long)]
        no_timings: bool,
    },
    /// Euclidean edge-length rigidity of the surface mesh.
    CheckEuclidean {
        /// Instance file (.json or .off).
        instance: std::path::PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        sigma_tol: f64,
        #[arg(long)]
        no_timings: bool,
    },
    /// Validate a mesh (and cellulation, when present).
    Validate {
        instance: std::path::PathBuf,
        #[arg(long)]
        no_timings: bool,
    },
    /// Subdivide the instance cellulation into tetrahedra.
    Triangulate {
        instance: std::path::PathBuf,
        #[arg(long)]
        no_timings: bool,
    },
    /// Hyperbolic volumes of the (hyperideal) instance cells.
    Volume {
        instance: std::path::PathBuf,
        /// Relative quadrature accuracy.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the truncated cell polytopes as an OFF file.
        #[arg(long)]
        emit_off: Option<std::path::PathBuf>,
        #[arg(long)]
        no_timings: bool,
    },
    /// Finite-difference consistency of the volume gradient on every
    /// cell (second-order convergence report).
    SchlafliTest {
        instance: std::path::PathBuf,
        /// Base finite-difference step in radians.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        /// Base refinement level of the fixed-level volume evaluations.
        #[arg(long, default_value_t = 6)]
        level: usize,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        #[arg(long)]
        no_timings: bool,
    },
    /// Recover the critical angle assignment on the edge-sum fiber of
    /// the instance's geometric angles.
    AngleSolve {
        instance: std::path::PathBuf,
        /// In-fiber perturbation applied before re-maximizing.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// Relative quadrature accuracy for the reported volume.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        no_timings: bool,
    },
    /// Killing-transfer and metric-scaling residuals of the tangent
    /// transformation between de Sitter space and the ball exterior.
    PogorelovTest {
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Finite-difference step per unit of local scale.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long)]
        no_timings: bool,
    },
    /// Least-squares ellipsoid through the instance vertices.
    FitEllipsoid {
        instance: std::path::PathBuf,
        /// Also report the ellipsoid shrunk by this factor.
        #[arg(long)]
        shrink: Option<f64>,
        #[arg(long)]
        no_timings: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::TheoremB {
            instance,
            ellipsoid,
            shrink,
            sigma_tol,
            emit_off,
            no_timings,
        } => commands::theorem_b(
            &instance,
            &ellipsoid,
            shrink,
            sigma_tol,
            emit_off.as_deref(),
            no_timings,
        ),
        Command::CheckEuclidean {
            instance,
            sigma_tol,
            no_timings,
        } => commands::check_euclidean(&instance, sigma_tol, no_timings),
        Command::Validate {
            instance,
            no_timings,
        } => commands::validate(&instance, no_timings),
        Command::Triangulate {
            instance,
            no_timings,
        } => commands::triangulate(&instance, no_timings),
        Command::Volume {
            instance,
            tol,
            emit_off,
            no_timings,
        } => commands::volume(&instance, tol, emit_off.as_deref(), no_timings),
        Command::SchlafliTest {
            instance,
            step,
            level,
            seed,
            no_timings,
        } => commands::schlafli_test(&instance, step, level, seed, no_timings),
        Command::AngleSolve {
            instance,
            perturb,
            seed,
            tol,
            no_timings,
        } => commands::angle_solve(&instance, perturb, seed, tol, no_timings),
        Command::PogorelovTest {
            samples,
            seed,
            step,
            no_timings,
        } => commands::pogorelov_test(samples, seed, step, no_timings),
        Command::FitEllipsoid {
            instance,
            shrink,
            no_timings,
        } => commands::fit_ellipsoid(&instance, shrink, no_timings),
    };

    match outcome {
        Ok(doc) => {
            println!("{}", doc.render());
            std::process::exit(doc.exit_code());
        }
        Err(err) => {
            eprintln!("error: {err}");
            println!("{}", document::VerdictDocument::error(&err).render());
            std::process::exit(1);
        }
    }
}
