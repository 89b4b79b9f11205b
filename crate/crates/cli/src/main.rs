use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use billiards_cli::{
    cmd_compare, cmd_constants, cmd_fronts, cmd_trace, cmd_travel, load_scene, Artifacts,
    CliError, FrontSpec, RunConfig,
};
use billiards_core::billiard::SamplerKind;

/// Billiard dynamics laboratory: travelling times, wavefront curvature and
/// scattering comparison probes on scenes of strictly convex obstacles.
#[derive(Parser)]
#[command(name = "billiards", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scene file.
    #[arg(long)]
    scene: PathBuf,
    /// Number of sampled rays.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Sampler seed, recorded in every output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampler kind: grid or random.
    #[arg(long, default_value = "random")]
    sampler: String,
    /// Time budget per ray (default: 100 x scene diameter).
    #[arg(long)]
    t_max: Option<f64>,
    /// Reflection budget per ray (default: 50 x reflection window).
    #[arg(long)]
    max_reflections: Option<usize>,
    /// Tangency threshold on |<v, n>| at obstacle hits.
    #[arg(long)]
    tangency_tol: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sample travelling times into a CSV with a metadata sidecar.
    Travel(CommonArgs),
    /// Compare the travelling-time data of two scenes over the same rays.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Second scene file.
        #[arg(long)]
        scene_b: PathBuf,
        /// Travelling-time discrepancy tolerance.
        #[arg(long, default_value_t = 1e-7)]
        time_tol: f64,
        /// Pointwise position tolerance for the tangency-equivalence check.
        #[arg(long, default_value_t = 1e-6)]
        pos_tol: f64,
    },
    /// Estimate the scene constants and evaluate the curvature conditions.
    Constants {
        #[command(flatten)]
        common: CommonArgs,
        /// Use the variant reading of the positive-curvature inequality as
        /// the headline verdict.
        #[arg(long)]
        cond2_variant: bool,
    },
    /// Build and propagate a front patch; emit dumps, series and an SVG.
    Fronts {
        #[command(flatten)]
        common: CommonArgs,
        /// Front kind: tangent or circle.
        #[arg(long, default_value = "tangent")]
        front: String,
        /// Obstacle label for a tangent front.
        #[arg(long, default_value_t = 1)]
        front_obstacle: usize,
        /// Boundary direction angle selecting the footpoint.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        front_angle: f64,
        /// Circle front: center coordinates "x y".
        #[arg(long, default_value = "0 0", allow_hyphen_values = true)]
        circle_center: String,
        /// Circle front radius.
        #[arg(long, default_value_t = 0.5)]
        circle_radius: f64,
        /// Circle front arc "start end" in radians.
        #[arg(long, default_value = "-0.3 0.3", allow_hyphen_values = true)]
        circle_arc: String,
        /// Samples per patch.
        #[arg(long, default_value_t = 65)]
        front_samples: usize,
        /// Snapshot count in the front dump.
        #[arg(long, default_value_t = 8)]
        snapshots: usize,
    },
    /// Trace a single ray and print its events.
    Trace {
        #[command(flatten)]
        common: CommonArgs,
        /// Entry boundary parameters (arc length in 2D; "polar azimuth" in 3D).
        #[arg(long, allow_hyphen_values = true)]
        entry: String,
        /// Direction angles from the inward normal.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        angle: String,
    },
}

fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| CliError::BadArgument(format!("not a number: {t}"))))
        .collect()
}

fn run_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let sampler = match common.sampler.as_str() {
        "grid" => SamplerKind::Grid,
        "random" => SamplerKind::Random,
        other => return Err(CliError::BadArgument(format!("unknown sampler: {other}"))),
    };
    Ok(RunConfig {
        samples: common.samples,
        seed: common.seed,
        sampler,
        t_max: common.t_max,
        max_reflections: common.max_reflections,
        tangency_tol: common.tangency_tol,
    })
}

fn write_artifacts(out_dir: &PathBuf, artifacts: &Artifacts) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io { path: out_dir.clone(), message: e.to_string() })?;
    for (name, contents) in &artifacts.files {
        let path = out_dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io { path: path.clone(), message: e.to_string() })?;
    }
    Ok(())
}

fn run() -> Result<(Artifacts, PathBuf), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Travel(common) => {
            let loaded = load_scene(&common.scene)?;
            let cfg = run_config(&common)?;
            Ok((cmd_travel(&loaded, &cfg)?, common.out))
        }
        Command::Compare { common, scene_b, time_tol, pos_tol } => {
            let a = load_scene(&common.scene)?;
            let b = load_scene(&scene_b)?;
            let cfg = run_config(&common)?;
            let (artifacts, _) = cmd_compare(&a, &b, &cfg, time_tol, pos_tol)?;
            Ok((artifacts, common.out))
        }
        Command::Constants { common, cond2_variant } => {
            let loaded = load_scene(&common.scene)?;
            Ok((cmd_constants(&loaded, Some(common.seed), cond2_variant)?, common.out))
        }
        Command::Fronts {
            common,
            front,
            front_obstacle,
            front_angle,
            circle_center,
            circle_radius,
            circle_arc,
            front_samples,
            snapshots,
        } => {
            let loaded = load_scene(&common.scene)?;
            let cfg = run_config(&common)?;
            let spec = match front.as_str() {
                "tangent" => FrontSpec::Tangent {
                    obstacle: front_obstacle,
                    boundary_dir: front_angle,
                    tangent_sign: 1.0,
                },
                "circle" => {
                    let arc = parse_floats(&circle_arc)?;
                    if arc.len() != 2 {
                        return Err(CliError::BadArgument("circle_arc needs two numbers".into()));
                    }
                    FrontSpec::Circle {
                        center: parse_floats(&circle_center)?,
                        radius: circle_radius,
                        arc: (arc[0], arc[1]),
                        samples: front_samples,
                        sign: 1.0,
                    }
                }
                other => return Err(CliError::BadArgument(format!("unknown front kind: {other}"))),
            };
            Ok((cmd_fronts(&loaded, &spec, &cfg, snapshots)?, common.out))
        }
        Command::Trace { common, entry, angle } => {
            let loaded = load_scene(&common.scene)?;
            let cfg = run_config(&common)?;
            let entry = parse_floats(&entry)?;
            let angle = parse_floats(&angle)?;
            Ok((cmd_trace(&loaded, &entry, &angle, &cfg)?, common.out))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok((artifacts, out_dir)) => {
            if let Err(e) = write_artifacts(&out_dir, &artifacts) {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
            println!("{}", artifacts.summary);
            for (name, _) in &artifacts.files {
                println!("wrote {}", out_dir.join(name).display());
            }
            ExitCode::from(artifacts.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
