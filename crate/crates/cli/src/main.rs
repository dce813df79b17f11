//! Command line front end for the razrlite renderer.
//!
//! Four subcommands: `render` a scene to a WAV impulse response (plus a
//! JSON sidecar that records the resolved design, enough to reproduce the
//! file bit for bit), `analyze` an impulse response into a metrics CSV,
//! `convolve` a dry signal with a response, and `info` to inspect a
//! scene's derived parameters without rendering.
//!
//! Exit codes: 0 success, 10 an input file failed to parse, 11 inputs
//! parsed but failed validation, 12 filesystem trouble, 1 anything else.
//! (clap itself exits 2 on usage errors.)

mod wav;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use razrlite_core::analysis::{compute_metrics, write_metrics_csv};
use razrlite_core::apc::{self, SurfaceScatterParams};
use razrlite_core::engine::{self, RenderOptions};
use razrlite_core::fdn;
use razrlite_core::ism;
use razrlite_core::model::{
    derive_geometry, validate_scene, wall_areas, OutputMode, Scene, WALL_NAMES,
};

#[derive(Parser)]
#[command(
    name = "razrlite",
    version,
    about = "Offline room impulse response renderer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene description to an impulse response WAV file.
    Render {
        /// Scene description (JSON).
        #[arg(long)]
        scene: PathBuf,
        /// Output WAV path; a `<out>.meta.json` sidecar lands next to it.
        #[arg(long)]
        out: PathBuf,
        /// Override the scene's output mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Worker threads for the image source stage.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        threads: u32,
    },
    /// Measure decay, echo density, and spectrum of an impulse response.
    Analyze {
        /// Impulse response WAV (channels are summed before analysis).
        #[arg(long)]
        ir: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Convolve a dry mono WAV with an impulse response.
    Convolve {
        /// Impulse response WAV.
        #[arg(long)]
        ir: PathBuf,
        /// Dry input WAV; must be mono and at the response's sample rate.
        #[arg(long)]
        dry: PathBuf,
        /// Output WAV path, one channel per response channel.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a scene's derived design parameters without rendering.
    Info {
        /// Scene description (JSON).
        #[arg(long)]
        scene: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Mono,
    Vrs,
}

impl From<ModeArg> for OutputMode {
    fn from(arg: ModeArg) -> OutputMode {
        match arg {
            ModeArg::Mono => OutputMode::Mono,
            ModeArg::Vrs => OutputMode::Vrs,
        }
    }
}

/// Failure classes behind the documented exit codes.
enum Failure {
    Parse(anyhow::Error),
    Validation(anyhow::Error),
    Io(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 10,
            Failure::Validation(_) => 11,
            Failure::Io(_) => 12,
            Failure::Other(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (label, inner) = match self {
            Failure::Parse(e) => ("parse", e),
            Failure::Validation(e) => ("validation", e),
            Failure::Io(e) => ("io", e),
            Failure::Other(e) => ("", e),
        };
        if label.is_empty() {
            write!(f, "{inner:#}")
        } else {
            write!(f, "{label}: {inner:#}")
        }
    }
}

fn io_failure(err: std::io::Error, what: &str, path: &Path) -> Failure {
    Failure::Io(anyhow!(err).context(format!("{what} {}", path.display())))
}

fn wav_failure(err: hound::Error, what: &str, path: &Path) -> Failure {
    let context = format!("{what} {}", path.display());
    match err {
        hound::Error::IoError(io) => Failure::Io(anyhow!(io).context(context)),
        other => Failure::Parse(anyhow!(other).context(context)),
    }
}

fn load_scene(path: &Path) -> Result<Scene, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| io_failure(e, "cannot read scene file", path))?;
    let scene: Scene = serde_json::from_str(&text)
        .map_err(|e| Failure::Parse(anyhow!(e).context(format!("in {}", path.display()))))?;
    validate_scene(scene).map_err(|e| Failure::Validation(anyhow!(e)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error ({}): {failure}", failure.code());
            ExitCode::from(failure.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Render {
            scene,
            out,
            mode,
            threads,
        } => run_render(&scene, &out, mode, threads as usize),
        Command::Analyze { ir, out } => run_analyze(&ir, &out),
        Command::Convolve { ir, dry, out } => run_convolve(&ir, &dry, &out),
        Command::Info { scene } => run_info(&scene),
    }
}

/// Everything needed to audit or exactly reproduce a rendered file.
#[derive(serde::Serialize)]
#[serde(rename_all = "camelCase")]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    threads: usize,
    /// The scene as rendered, with any command line overrides applied.
    scene: &'a Scene,
    resolved: &'a razrlite_core::engine::RenderMetadata,
}

fn run_render(
    scene_path: &Path,
    out: &Path,
    mode: Option<ModeArg>,
    threads: usize,
) -> Result<(), Failure> {
    let mut scene = load_scene(scene_path)?;
    if let Some(mode) = mode {
        scene.config.output_mode = mode.into();
    }
    let options = RenderOptions {
        threads,
        object_apc_enabled: true,
    };
    let ir = engine::render_with_options(&scene, &options)
        .map_err(|e| Failure::Validation(anyhow!(e)))?;

    wav::write_f32(out, ir.sample_rate_hz, &ir.channels)
        .map_err(|e| wav_failure(e, "cannot write", out))?;

    let sidecar = Sidecar {
        tool: "razrlite",
        version: env!("CARGO_PKG_VERSION"),
        threads,
        scene: &scene,
        resolved: &ir.metadata,
    };
    let meta_path = sidecar_path(out);
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Failure::Other(anyhow!(e)))?;
    fs::write(&meta_path, json).map_err(|e| io_failure(e, "cannot write", &meta_path))?;

    println!(
        "wrote {} ({} channels, {} samples at {} Hz) and {}",
        out.display(),
        ir.channels.len(),
        ir.num_samples(),
        ir.sample_rate_hz,
        meta_path.display()
    );
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn run_analyze(ir_path: &Path, out: &Path) -> Result<(), Failure> {
    let data = wav::read(ir_path).map_err(|e| wav_failure(e, "cannot read", ir_path))?;
    let mut mono = vec![0.0; data.num_samples()];
    for channel in &data.channels {
        for (m, v) in mono.iter_mut().zip(channel) {
            *m += v;
        }
    }
    let metrics = compute_metrics(&mono, data.sample_rate_hz).map_err(|e| {
        Failure::Validation(anyhow!(e).context(format!("in {}", ir_path.display())))
    })?;

    let mut file = fs::File::create(out).map_err(|e| io_failure(e, "cannot create", out))?;
    write_metrics_csv(&metrics, &mut file).map_err(|e| io_failure(e, "cannot write", out))?;

    match metrics.t60_seconds {
        Some(t60) => println!("t60: {t60:.3} s"),
        None => println!("note: insufficient decay range for a t60 fit"),
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn run_convolve(ir_path: &Path, dry_path: &Path, out: &Path) -> Result<(), Failure> {
    let ir = wav::read(ir_path).map_err(|e| wav_failure(e, "cannot read", ir_path))?;
    let dry = wav::read(dry_path).map_err(|e| wav_failure(e, "cannot read", dry_path))?;
    if dry.channels.len() != 1 {
        return Err(Failure::Validation(anyhow!(
            "dry input must be mono, {} has {} channels",
            dry_path.display(),
            dry.channels.len()
        )));
    }
    let wet = engine::convolve_channels(
        &ir.channels,
        ir.sample_rate_hz,
        &dry.channels[0],
        dry.sample_rate_hz,
    )
    .map_err(|e| Failure::Validation(anyhow!(e)))?;
    wav::write_f32(out, ir.sample_rate_hz, &wet)
        .map_err(|e| wav_failure(e, "cannot write", out))?;
    println!(
        "wrote {} ({} channels, {} samples)",
        out.display(),
        wet.len(),
        wet.first().map_or(0, Vec::len)
    );
    Ok(())
}

fn run_info(scene_path: &Path) -> Result<(), Failure> {
    let scene = load_scene(scene_path)?;
    let cfg = scene.config;
    let geometry = derive_geometry(&scene.room, scene.receiver_pos);
    let [lx, ly, lz] = scene.room.dimensions;
    println!(
        "room: {lx} x {ly} x {lz} m, volume {} m^3, surface {} m^2",
        geometry.volume, geometry.surface_area
    );
    println!(
        "mean free path: {:.3} m, mean wall distance: {:.3} m",
        geometry.mean_free_path, geometry.mean_wall_distance
    );
    for (name, wall) in WALL_NAMES.iter().zip(&scene.room.walls) {
        println!(
            "wall {name}: absorption {}, scattering {}, crossover {} Hz",
            wall.absorption, wall.scattering, wall.crossover_hz
        );
    }

    let eyring = fdn::eyring_t60(&geometry, &scene.room.walls, &wall_areas(&scene.room))
        .map_err(|e| Failure::Validation(anyhow!(e)))?;
    println!("eyring t60: {eyring:.3} s");

    let sources = ism::generate_image_sources(&scene, cfg.ism_order);
    let latest = sources
        .iter()
        .map(|s| ism::make_tap(s.clone(), &scene).delay_samples)
        .max()
        .unwrap_or(0);
    println!(
        "image sources to order {}: {} (latest arrival {:.4} s)",
        cfg.ism_order,
        sources.len(),
        latest as f64 / cfg.sample_rate_hz
    );

    let t_s =
        apc::estimate_local_decay_time(&geometry, cfg.surface_decay_scale, scene.speed_of_sound);
    if t_s > 0.0 {
        let surface = apc::design_surface_apc(
            &SurfaceScatterParams {
                local_decay_time: t_s,
            },
            cfg.sample_rate_hz,
        )
        .map_err(|e| Failure::Validation(anyhow!(e)))?;
        let delays: Vec<usize> = surface.stages.iter().map(|s| s.delay_samples).collect();
        println!(
            "surface cascade: T_s {:.2} ms, stage delays {delays:?}",
            t_s * 1000.0
        );
    } else {
        println!("surface cascade: bypassed (surfaceDecayScale 0)");
    }

    let spec = fdn::design_fdn(
        &geometry,
        eyring,
        cfg.sample_rate_hz,
        scene.speed_of_sound,
        cfg.fdn_lines,
    )
    .map_err(|e| Failure::Validation(anyhow!(e)))?;
    println!("network lines: {:?}", spec.line_delays);
    let gains: Vec<String> = spec.line_gains.iter().map(|g| format!("{g:.4}")).collect();
    println!("line gains: [{}]", gains.join(", "));

    let mode = match cfg.output_mode {
        OutputMode::Mono => "mono",
        OutputMode::Vrs => "vrs",
    };
    println!(
        "output: {mode}, {} s at {} Hz, geometric deviation {}",
        cfg.ir_length_seconds, cfg.sample_rate_hz, scene.geometric_deviation
    );
    Ok(())
}
