//! `tiui`: local-space server, trace record/replay, scripted scenarios and
//! frame rendering.

mod config;
mod server;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use tiui_core::latency::LatencyConfig;
use tiui_core::raster::render_ppm;
use tiui_core::scenario::{self, RunMetrics, ScenarioScript};
use tiui_core::space::{LocalSpace, SpaceConfig};
use tiui_core::view::{compose_frame, CameraRig};
use tiui_core::world::{Command, WorldFile, WorldState};

use crate::config::{FileConfig, DEFAULT_PORT};
use crate::server::{Server, ServerOptions};

#[derive(Parser)]
#[command(name = "tiui", version, about = "Touch-the-live-image telepresence simulator")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "TIUI_CONFIG")]
    config: Option<PathBuf>,
    /// Directory holding the bundled worlds/, scenarios/ and traces/.
    #[arg(long, global = true, env = "TIUI_ASSETS")]
    assets: Option<PathBuf>,
    /// Seed for the world and the latency generator.
    #[arg(long, global = true, env = "TIUI_SEED")]
    seed: Option<u64>,
    /// Mean injected one-way latency in ms.
    #[arg(long, global = true)]
    latency_mean: Option<f64>,
    /// Latency jitter in ms (uniform, ± around the mean).
    #[arg(long, global = true)]
    latency_jitter: Option<f64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct NetArgs {
    /// World description file.
    #[arg(long)]
    world: Option<PathBuf>,
    #[arg(long, env = "TIUI_PORT")]
    port: Option<u16>,
    #[arg(long)]
    bind: Option<String>,
    /// Directory of the browser client bundle (default: the built-in viewer in `<assets>/web`).
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Marker save file, loaded at start and rewritten on change.
    #[arg(long)]
    session_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the local-space server.
    Serve(NetArgs),
    /// Serve until the first control session ends, saving its pointer stream.
    Record {
        #[command(flatten)]
        net: NetArgs,
        /// Trace file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Feed a trace through an in-process session and print metrics.
    Replay {
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run a bundled scenario by name, or a scenario file by path.
    Scenario {
        name: String,
        /// Print metrics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write the current frame of a world as a PPM image.
    Render {
        #[arg(long)]
        world: Option<PathBuf>,
        /// Apply this trace before rendering.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

struct Ctx {
    file: FileConfig,
    assets: PathBuf,
    seed: Option<u64>,
    latency: LatencyConfig,
}

impl Ctx {
    fn world_path(&self, flag: Option<&PathBuf>) -> PathBuf {
        flag.cloned()
            .or_else(|| self.file.world.clone())
            .unwrap_or_else(|| self.assets.join("worlds/smart_home.toml"))
    }

    fn load_world(&self, path: &Path) -> Result<WorldState> {
        let mut w = WorldFile::load(path)?.build()?;
        if let Some(s) = self.seed {
            w.rng_seed = s;
        }
        Ok(w)
    }
}

fn default_assets() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets"))
}

fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed);
    let ctx = Ctx {
        assets: cli
            .assets
            .clone()
            .or_else(|| file.assets.clone())
            .unwrap_or_else(default_assets),
        latency: config::latency(cli.latency_mean, cli.latency_jitter, seed.unwrap_or(0), &file),
        seed,
        file,
    };
    match cli.command {
        Cmd::Serve(net) => serve(&ctx, &net, None),
        Cmd::Record { net, out } => serve(&ctx, &net, Some(out)),
        Cmd::Replay { world, trace } => replay(&ctx, world.as_ref(), &trace),
        Cmd::Scenario { name, json } => run_named_scenario(&ctx, &name, json),
        Cmd::Render { world, trace, out } => render(&ctx, world.as_ref(), trace.as_ref(), &out),
    }
}

fn serve(ctx: &Ctx, net: &NetArgs, record_to: Option<PathBuf>) -> Result<bool> {
    let world_path = ctx.world_path(net.world.as_ref());
    let world = ctx.load_world(&world_path)?;
    let port = net.port.or(ctx.file.port).unwrap_or(DEFAULT_PORT);
    let bind = net
        .bind
        .clone()
        .or_else(|| ctx.file.bind.clone())
        .unwrap_or_else(|| "127.0.0.1".into());
    let opts = ServerOptions {
        latency: ctx.latency,
        static_dir: net
            .static_dir
            .clone()
            .or_else(|| ctx.file.static_dir.clone())
            .or_else(|| Some(ctx.assets.join("web")).filter(|d| d.is_dir())),
        session_file: net.session_file.clone().or_else(|| ctx.file.session_file.clone()),
        record_to,
    };
    let recording = opts.record_to.is_some();
    let server = Server::bind(
        &format!("{bind}:{port}"),
        LocalSpace::new(world, SpaceConfig::default()),
        opts,
    )?;
    let addr = server.local_addr()?;
    // Machine-readable so scripts can discover an ephemeral port.
    println!("listening on {addr}");
    info!(
        "world {} latency {}±{} ms",
        world_path.display(),
        ctx.latency.mean_ms,
        ctx.latency.jitter_ms
    );
    server.run()?;
    if recording {
        info!("recording written");
    }
    Ok(true)
}

#[derive(Serialize)]
struct ReplayReport<'a> {
    metrics: &'a RunMetrics,
    commands: Vec<Command>,
}

fn replay(ctx: &Ctx, world: Option<&PathBuf>, trace: &Path) -> Result<bool> {
    let mut script = ScenarioScript::replay(ctx.world_path(world), trace.to_path_buf());
    script.seed = ctx.seed;
    script.latency = Some(ctx.latency);
    let prepared = scenario::prepare(&script)?;
    let (metrics, commands) = scenario::run_prepared_with_log(prepared, SpaceConfig::default())?;
    let report = ReplayReport {
        metrics: &metrics,
        commands,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(metrics.success)
}

fn scenario_path(ctx: &Ctx, name: &str) -> PathBuf {
    let p = PathBuf::from(name);
    if p.extension().is_some() || p.components().count() > 1 {
        p
    } else {
        ctx.assets.join("scenarios").join(format!("{name}.toml"))
    }
}

fn run_named_scenario(ctx: &Ctx, name: &str, json: bool) -> Result<bool> {
    let path = scenario_path(ctx, name);
    let mut script = ScenarioScript::load(&path)?;
    if ctx.seed.is_some() {
        script.seed = ctx.seed;
    }
    if ctx.latency.mean_ms > 0.0 || ctx.latency.jitter_ms > 0.0 {
        script.latency = Some(ctx.latency);
    }
    let metrics = scenario::run_scenario(&script)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&metrics)?);
    } else {
        for a in &metrics.assertions {
            let mark = if a.passed { "ok  " } else { "FAIL" };
            println!("{mark} step {:>3}: {} ({})", a.step, a.description, a.detail);
        }
        println!(
            "{}: success={} ticks={} commands={} collisions={}",
            name, metrics.success, metrics.completion_ticks, metrics.commands_issued, metrics.collision_count
        );
    }
    Ok(metrics.success)
}

fn render(ctx: &Ctx, world: Option<&PathBuf>, trace: Option<&PathBuf>, out: &Path) -> Result<bool> {
    let world_path = ctx.world_path(world);
    let frame = match trace {
        None => compose_frame(&ctx.load_world(&world_path)?, &CameraRig::default(), 0),
        Some(t) => {
            let mut script = ScenarioScript::replay(world_path, t.clone());
            script.seed = ctx.seed;
            let prepared = scenario::prepare(&script)?;
            match scenario::final_frame(prepared, SpaceConfig::default())? {
                Some(f) => f,
                None => bail!("no frame was produced"),
            }
        }
    };
    std::fs::write(out, render_ppm(&frame)).with_context(|| format!("writing {}", out.display()))?;
    info!("wrote {}", out.display());
    Ok(true)
}
