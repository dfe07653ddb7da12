//! `simstyle`: stress-aware stylization of 3D-printable meshes.
//!
//! Subcommands expose each stage on its own (`tetmesh`, `simulate`,
//! `analyze`, `thickness`, `stylize`) plus the full feedback loop (`run`) and
//! the grid harness (`evaluate`). Exit codes: 0 success, 1 domain errors
//! (bad mesh, unknown material, unstable simulation), 2 usage errors.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use config::{pick, FileConfig, StressJson};
use simstyle::control::ControlStrategy;
use simstyle::failure::{critical_stress, normalized_stress, viability_verdict, Viability};
use simstyle::material::MaterialDb;
use simstyle::mesh::{load_mesh, save_colored_mesh, MeshFormat, SurfaceMesh};
use simstyle::pipeline::{
    batch_evaluate, heatmap_color, run_pipeline_with_db, write_aggregate_csv, PipelineConfig,
};
use simstyle::schedule::{ScheduleConfig, ScheduleStrategy};
use simstyle::simulate::{drop_test_traced, element_to_vertex_stress, SimConfig};
use simstyle::stylize::StyleConfig;
use simstyle::tet::{build_correspondence, save_tetgen, voxel_tetrahedralize};
use simstyle::thickness::local_thickness;

#[derive(Parser)]
#[command(
    name = "simstyle",
    version,
    about = "Stylize 3D-printable meshes while drop-test simulation keeps them structurally viable"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// JSON config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input surface mesh (.obj or .ply).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Uniform scale applied at load (model units to meters).
    #[arg(long)]
    scale: Option<f64>,
    /// Material name (builtin: pla, abs, petg; extend via config `materials`).
    #[arg(long)]
    material: Option<String>,
}

#[derive(Args, Default)]
struct StyleArgs {
    /// Style field seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Style amplitude as a fraction of the bounding-box diagonal.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Style field frequency in cycles per bounding-box diagonal.
    #[arg(long)]
    frequency: Option<f64>,
    /// Stylization iteration count.
    #[arg(long)]
    iterations: Option<usize>,
}

#[derive(Args, Default)]
struct SimArgs {
    /// Drop height in meters.
    #[arg(long)]
    drop_height: Option<f64>,
    /// Safety factor: critical stress = factor x yield strength.
    #[arg(long)]
    safety_lambda: Option<f64>,
    /// Voxel edge length for tetrahedralization (meters).
    #[arg(long)]
    voxel_size: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Voxel-tetrahedralize a surface mesh and write TetGen .node/.ele files.
    Tetmesh {
        #[command(flatten)]
        common: CommonArgs,
        /// Voxel edge length (meters); defaults to diagonal / 40.
        #[arg(long)]
        voxel_size: Option<f64>,
        /// Output basename (writes <out>.node and <out>.ele).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drop-test a mesh once and emit a stress heatmap mesh plus stress JSON.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Heatmap-colored mesh output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stress JSON output path.
        #[arg(long)]
        stress_out: Option<PathBuf>,
        /// Binary per-frame stress trace output path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Grade a stress JSON against a material's yield strength.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Stress JSON produced by `simulate` (or `run`).
        #[arg(long)]
        stress: Option<PathBuf>,
    },
    /// Per-vertex local thickness: heatmap mesh plus JSON stats.
    Thickness {
        #[command(flatten)]
        common: CommonArgs,
        /// Thickness-colored mesh output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stats JSON output path (stdout when omitted).
        #[arg(long)]
        stats_out: Option<PathBuf>,
    },
    /// Stylize without simulation feedback (free stylization).
    Stylize {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        style: StyleArgs,
        /// Stylized mesh output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full loop: stylize with drop-test feedback, write report and mesh.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        style: StyleArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Stylization control strategy: linear|exponential|frozen|none.
        #[arg(long)]
        control: Option<String>,
        /// Simulation schedule:
        /// linear-temporal|quadratic-temporal|geometry|stress.
        #[arg(long)]
        schedule: Option<String>,
        /// Simulation budget for the temporal schedules.
        #[arg(long)]
        sim_budget: Option<usize>,
        /// Geometry-trigger threshold as a fraction of local thickness.
        #[arg(long)]
        geometry_fraction: Option<f64>,
        /// Output directory for the report and stylized mesh.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid evaluation over meshes x seeds x controls x schedules.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        style: StyleArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Comma-separated mesh paths.
        #[arg(long, value_delimiter = ',')]
        meshes: Option<Vec<PathBuf>>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Comma-separated control strategies (default: all four).
        #[arg(long, value_delimiter = ',')]
        controls: Option<Vec<String>>,
        /// Comma-separated schedules (default: all four).
        #[arg(long, value_delimiter = ',')]
        schedules: Option<Vec<String>>,
        /// Simulation budget for the temporal schedules.
        #[arg(long)]
        sim_budget: Option<usize>,
        /// Geometry-trigger threshold as a fraction of local thickness.
        #[arg(long)]
        geometry_fraction: Option<f64>,
        /// Aggregate CSV output path.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Directory for per-cell report JSON files (skipped when omitted).
        #[arg(long)]
        reports_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Tetmesh {
            common,
            voxel_size,
            out,
        } => cmd_tetmesh(common, voxel_size, out),
        Command::Simulate {
            common,
            sim,
            out,
            stress_out,
            trace,
        } => cmd_simulate(common, sim, out, stress_out, trace),
        Command::Analyze { common, stress } => cmd_analyze(common, stress),
        Command::Thickness {
            common,
            out,
            stats_out,
        } => cmd_thickness(common, out, stats_out),
        Command::Stylize { common, style, out } => cmd_stylize(common, style, out),
        Command::Run {
            common,
            style,
            sim,
            control,
            schedule,
            sim_budget,
            geometry_fraction,
            out,
        } => cmd_run(
            common,
            style,
            sim,
            control,
            schedule,
            sim_budget,
            geometry_fraction,
            out,
        ),
        Command::Evaluate {
            common,
            style,
            sim,
            meshes,
            seeds,
            controls,
            schedules,
            sim_budget,
            geometry_fraction,
            out_csv,
            reports_dir,
        } => cmd_evaluate(
            common,
            style,
            sim,
            meshes,
            seeds,
            controls,
            schedules,
            sim_budget,
            geometry_fraction,
            out_csv,
            reports_dir,
        ),
    }
}

fn load_file_config(common: &CommonArgs) -> anyhow::Result<FileConfig> {
    match &common.config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

fn path_str(p: impl AsRef<Path>) -> String {
    p.as_ref().display().to_string()
}

fn load_input_mesh(
    common: &CommonArgs,
    file: &FileConfig,
) -> anyhow::Result<(SurfaceMesh, PathBuf, MeshFormat)> {
    let mesh_path = pick(
        "mesh",
        common.mesh.as_ref().map(path_str),
        file.mesh.clone(),
    )
    .ok_or_else(|| anyhow!("no input mesh given (--mesh or config `mesh`)"))?;
    let path = PathBuf::from(&mesh_path);
    let format = MeshFormat::from_path(&path)
        .ok_or_else(|| anyhow!("cannot infer mesh format from `{mesh_path}` (.obj or .ply)"))?;
    let mut mesh =
        load_mesh(&path, format).with_context(|| format!("loading mesh {mesh_path}"))?;
    if let Some(s) = pick("scale", common.scale, file.scale) {
        if !(s > 0.0) {
            bail!("--scale must be positive, got {s}");
        }
        mesh = mesh.scaled(s);
    }
    Ok((mesh, path, format))
}

fn material_db(file: &FileConfig) -> MaterialDb {
    match &file.materials {
        Some(overrides) => MaterialDb::default().with_overrides(overrides.clone()),
        None => MaterialDb::default(),
    }
}

/// Assemble the pipeline config from flags and file, defaults elsewhere.
#[allow(clippy::too_many_arguments)]
fn build_pipeline_config(
    common: &CommonArgs,
    style: &StyleArgs,
    sim: &SimArgs,
    control: Option<String>,
    schedule: Option<String>,
    sim_budget: Option<usize>,
    geometry_fraction: Option<f64>,
    file: &FileConfig,
) -> anyhow::Result<PipelineConfig> {
    let defaults = PipelineConfig::default();
    let style_cfg = StyleConfig {
        seed: pick("seed", style.seed, file.seed).unwrap_or(defaults.style.seed),
        amplitude: pick("amplitude", style.amplitude, file.amplitude)
            .unwrap_or(defaults.style.amplitude),
        frequency: pick("frequency", style.frequency, file.frequency)
            .unwrap_or(defaults.style.frequency),
        octaves: file.octaves.unwrap_or(defaults.style.octaves),
        iterations: pick("iterations", style.iterations, file.iterations)
            .unwrap_or(defaults.style.iterations),
        per_iter_cap: file.per_iter_cap.unwrap_or(defaults.style.per_iter_cap),
    };
    let control = pick("control", control, file.control.clone())
        .map(|s| s.parse::<ControlStrategy>())
        .transpose()
        .map_err(|e| anyhow!(e))?
        .unwrap_or(defaults.control);
    let schedule_cfg = ScheduleConfig {
        strategy: pick("schedule", schedule, file.schedule.clone())
            .map(|s| s.parse::<ScheduleStrategy>())
            .transpose()
            .map_err(|e| anyhow!(e))?
            .unwrap_or(defaults.schedule.strategy),
        sim_budget: pick("sim-budget", sim_budget, file.sim_budget)
            .unwrap_or(defaults.schedule.sim_budget),
        geometry_fraction: pick(
            "geometry-fraction",
            geometry_fraction,
            file.geometry_fraction,
        )
        .unwrap_or(defaults.schedule.geometry_fraction),
        stress_floor: file.stress_floor.unwrap_or(defaults.schedule.stress_floor),
    };
    let sim_cfg = SimConfig {
        drop_height: pick("drop-height", sim.drop_height, file.drop_height)
            .unwrap_or(defaults.sim.drop_height),
        gravity: file.gravity.unwrap_or(defaults.sim.gravity),
        timestep: file.timestep.or(defaults.sim.timestep),
        duration: file.duration.unwrap_or(defaults.sim.duration),
        contact_stiffness: file.contact_stiffness.or(defaults.sim.contact_stiffness),
        damping: file.damping.unwrap_or(defaults.sim.damping),
        substeps_per_frame: file
            .substeps_per_frame
            .unwrap_or(defaults.sim.substeps_per_frame),
    };
    Ok(PipelineConfig {
        style: style_cfg,
        control,
        schedule: schedule_cfg,
        sim: sim_cfg,
        material: pick(
            "material",
            common.material.clone(),
            file.material.clone(),
        )
        .unwrap_or(defaults.material),
        voxel_size: pick("voxel-size", sim.voxel_size, file.voxel_size).or(defaults.voxel_size),
        safety_lambda: pick("safety-lambda", sim.safety_lambda, file.safety_lambda)
            .unwrap_or(defaults.safety_lambda),
    })
}

fn resolve_voxel_size(mesh: &SurfaceMesh, requested: Option<f64>) -> f64 {
    requested.unwrap_or_else(|| {
        simstyle::mesh::bbox_diagonal(mesh) / simstyle::pipeline::DEFAULT_VOXEL_DIVISOR
    })
}

fn cmd_tetmesh(
    common: CommonArgs,
    voxel_size: Option<f64>,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = load_file_config(&common)?;
    let (mesh, mesh_path, _) = load_input_mesh(&common, &file)?;
    let h = resolve_voxel_size(&mesh, pick("voxel-size", voxel_size, file.voxel_size));
    let tm = voxel_tetrahedralize(&mesh, h)?;
    let out = pick("out", out.as_ref().map(path_str), file.out.clone())
        .map(PathBuf::from)
        .unwrap_or_else(|| mesh_path.with_extension(""));
    let node = out.with_extension("node");
    let ele = out.with_extension("ele");
    save_tetgen(&tm, &node, &ele)?;
    println!(
        "{}",
        serde_json::json!({
            "nodes": tm.node_count(),
            "tets": tm.tet_count(),
            "boundary_nodes": tm.boundary_nodes().len(),
            "voxel_size": h,
            "total_volume_m3": tm.total_volume(),
            "node_file": path_str(&node),
            "ele_file": path_str(&ele),
        })
    );
    Ok(())
}

fn cmd_simulate(
    common: CommonArgs,
    sim: SimArgs,
    out: Option<PathBuf>,
    stress_out: Option<PathBuf>,
    trace: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = load_file_config(&common)?;
    let (mesh, mesh_path, format) = load_input_mesh(&common, &file)?;
    let db = material_db(&file);
    let cfg = build_pipeline_config(&common, &StyleArgs::default(), &sim, None, None, None, None, &file)?;
    let material = db.lookup(&cfg.material)?;
    let sigma_c = critical_stress(&material, cfg.safety_lambda)?;
    let h = resolve_voxel_size(&mesh, cfg.voxel_size);

    let tm = voxel_tetrahedralize(&mesh, h)?;
    let corr = build_correspondence(&mesh, &tm);
    let trace_path = pick("trace", trace.as_ref().map(path_str), file.trace.clone());
    let sf = drop_test_traced(&tm, &material, &cfg.sim, trace_path.as_deref().map(Path::new))?;
    let vertex_vm = element_to_vertex_stress(&sf, &tm, &corr)?;
    let s_norm = normalized_stress(&vertex_vm, sigma_c);
    let verdict = viability_verdict(&vertex_vm, &material)?;

    if let Some(out) = pick("out", out.as_ref().map(path_str), file.out.clone()) {
        let out = PathBuf::from(out);
        let out_format = MeshFormat::from_path(&out).unwrap_or(format);
        let colors: Vec<[f64; 3]> = s_norm.values().iter().map(|&s| heatmap_color(s)).collect();
        let colored = mesh.clone().with_colors(Some(colors))?;
        save_colored_mesh(&colored, &out, out_format)?;
        println!("heatmap mesh: {}", out.display());
    }
    let stress_json = StressJson {
        mesh: Some(path_str(&mesh_path)),
        material: Some(material.name.clone()),
        sigma_c_pa: Some(sigma_c),
        max_vertex_vm_pa: verdict.max_stress,
        per_vertex_vm_pa: vertex_vm,
        per_element_max_vm_pa: sf.per_element_max_vm,
    };
    if let Some(path) = pick(
        "stress-out",
        stress_out.as_ref().map(path_str),
        file.stress_out.clone(),
    ) {
        std::fs::write(&path, serde_json::to_string_pretty(&stress_json)?)
            .with_context(|| format!("writing {path}"))?;
        println!("stress json: {path}");
    }
    println!(
        "max vertex stress: {:.4} MPa ({} at yield {:.1} MPa)",
        verdict.max_stress / 1e6,
        verdict_word(verdict.verdict),
        material.yield_strength / 1e6
    );
    Ok(())
}

fn verdict_word(v: Viability) -> &'static str {
    match v {
        Viability::Viable => "viable",
        Viability::Broken => "broken",
    }
}

fn cmd_analyze(common: CommonArgs, stress: Option<PathBuf>) -> anyhow::Result<()> {
    let file = load_file_config(&common)?;
    let stress_path = pick(
        "stress",
        stress.as_ref().map(path_str),
        file.stress.clone(),
    )
    .ok_or_else(|| anyhow!("no stress JSON given (--stress)"))?;
    let text = std::fs::read_to_string(&stress_path)
        .with_context(|| format!("reading {stress_path}"))?;
    let stress: StressJson = serde_json::from_str(&text)
        .with_context(|| format!("parsing stress json {stress_path}"))?;
    let db = material_db(&file);
    let name = pick("material", common.material.clone(), file.material.clone())
        .or(stress.material.clone())
        .ok_or_else(|| anyhow!("no material given (--material)"))?;
    let material = db.lookup(&name)?;
    let verdict = viability_verdict(&stress.per_vertex_vm_pa, &material)?;
    println!(
        "{} (max stress {:.4} MPa at vertex {}, yield {:.1} MPa)",
        verdict_word(verdict.verdict),
        verdict.max_stress / 1e6,
        verdict.worst_vertex,
        material.yield_strength / 1e6
    );
    Ok(())
}

fn cmd_thickness(
    common: CommonArgs,
    out: Option<PathBuf>,
    stats_out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = load_file_config(&common)?;
    let (mesh, _, format) = load_input_mesh(&common, &file)?;
    let field = local_thickness(&mesh)?;
    let (min, max) = (field.min(), field.max());
    let mean = field.values().iter().sum::<f64>() / field.len() as f64;
    let stats = serde_json::json!({
        "vertices": field.len(),
        "min_thickness": min,
        "max_thickness": max,
        "mean_thickness": mean,
    });
    if let Some(out) = pick("out", out.as_ref().map(path_str), file.out.clone()) {
        let out = PathBuf::from(out);
        let out_format = MeshFormat::from_path(&out).unwrap_or(format);
        let span = (max - min).max(1e-30);
        let colors: Vec<[f64; 3]> = field
            .values()
            .iter()
            // thin = red, thick = blue
            .map(|&t| heatmap_color(1.5 * (1.0 - (t - min) / span)))
            .collect();
        let colored = mesh.clone().with_colors(Some(colors))?;
        save_colored_mesh(&colored, &out, out_format)?;
        println!("thickness mesh: {}", out.display());
    }
    match pick(
        "stats-out",
        stats_out.as_ref().map(path_str),
        file.stats_out.clone(),
    ) {
        Some(path) => {
            std::fs::write(&path, serde_json::to_string_pretty(&stats)?)
                .with_context(|| format!("writing {path}"))?;
            println!("stats json: {path}");
        }
        None => println!("{stats}"),
    }
    Ok(())
}

fn cmd_stylize(common: CommonArgs, style: StyleArgs, out: Option<PathBuf>) -> anyhow::Result<()> {
    let file = load_file_config(&common)?;
    let (mesh, mesh_path, format) = load_input_mesh(&common, &file)?;
    let cfg = build_pipeline_config(&common, &style, &SimArgs::default(), None, None, None, None, &file)?;
    cfg.style.validate()?;

    let mut target = simstyle::stylize::style_field(&mesh, &cfg.style)?;
    let mut current = mesh;
    for i in 1..=cfg.style.iterations {
        let step = simstyle::stylize::displacement_step(&target, i, &cfg.style)?;
        current = simstyle::mesh::apply_displacement(&current, &step)?;
        target.record(&step);
    }
    let out = pick("out", out.as_ref().map(path_str), file.out.clone())
        .map(PathBuf::from)
        .unwrap_or_else(|| stem_suffixed(&mesh_path, "_stylized"));
    let out_format = MeshFormat::from_path(&out).unwrap_or(format);
    save_colored_mesh(&current, &out, out_format)?;
    println!(
        "stylized mesh: {} (attainment {:.6})",
        out.display(),
        simstyle::pipeline::style_attainment(&target)
    );
    Ok(())
}

fn stem_suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "mesh".into());
    let ext = path
        .extension()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "ply".into());
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    common: CommonArgs,
    style: StyleArgs,
    sim: SimArgs,
    control: Option<String>,
    schedule: Option<String>,
    sim_budget: Option<usize>,
    geometry_fraction: Option<f64>,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = load_file_config(&common)?;
    let (mesh, mesh_path, format) = load_input_mesh(&common, &file)?;
    let db = material_db(&file);
    let cfg = build_pipeline_config(
        &common,
        &style,
        &sim,
        control,
        schedule,
        sim_budget,
        geometry_fraction,
        &file,
    )?;

    let (styled, report) = run_pipeline_with_db(&mesh, &cfg, &db)?;

    let out_dir = pick("out", out.as_ref().map(path_str), file.out.clone())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let stem = mesh_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "mesh".into());
    let mesh_out = out_dir.join(format!(
        "{stem}_stylized.{}",
        match format {
            MeshFormat::Obj => "obj",
            MeshFormat::Ply => "ply",
        }
    ));
    save_colored_mesh(&styled, &mesh_out, format)?;
    let report_path = out_dir.join(format!("{stem}_report.json"));
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)
        .with_context(|| format!("writing {}", report_path.display()))?;

    println!("report: {}", report_path.display());
    println!("stylized mesh: {}", mesh_out.display());
    println!(
        "verdict: {} (max stress {:.4} MPa, sigma_c {:.4} MPa, yield {:.1} MPa, \
         sims {}, attainment {:.4})",
        verdict_word(report.verdict),
        report.max_stress_pa / 1e6,
        report.sigma_c_pa / 1e6,
        report.yield_strength_pa / 1e6,
        report.sim_count,
        report.style_attainment
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    common: CommonArgs,
    style: StyleArgs,
    sim: SimArgs,
    meshes: Option<Vec<PathBuf>>,
    seeds: Option<Vec<u64>>,
    controls: Option<Vec<String>>,
    schedules: Option<Vec<String>>,
    sim_budget: Option<usize>,
    geometry_fraction: Option<f64>,
    out_csv: Option<PathBuf>,
    reports_dir: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = load_file_config(&common)?;
    let db = material_db(&file);
    let base = build_pipeline_config(
        &common,
        &style,
        &sim,
        None,
        None,
        sim_budget,
        geometry_fraction,
        &file,
    )?;

    let mesh_paths: Vec<String> = pick(
        "meshes",
        meshes.map(|v| v.iter().map(|p| path_str(p)).collect::<Vec<_>>()),
        file.meshes.clone(),
    )
    .ok_or_else(|| anyhow!("no meshes given (--meshes a.obj,b.obj,...)"))?;
    let seeds = pick("seeds", seeds, file.seeds.clone()).unwrap_or_else(|| vec![1, 2]);

    let parse_controls = |names: Vec<String>| -> anyhow::Result<Vec<ControlStrategy>> {
        names
            .iter()
            .map(|s| s.parse::<ControlStrategy>().map_err(|e| anyhow!(e)))
            .collect()
    };
    let parse_schedules = |names: Vec<String>| -> anyhow::Result<Vec<ScheduleStrategy>> {
        names
            .iter()
            .map(|s| s.parse::<ScheduleStrategy>().map_err(|e| anyhow!(e)))
            .collect()
    };
    let controls = match pick("controls", controls, file.controls.clone()) {
        Some(names) => parse_controls(names)?,
        None => ControlStrategy::ALL.to_vec(),
    };
    let schedules = match pick("schedules", schedules, file.schedules.clone()) {
        Some(names) => parse_schedules(names)?,
        None => ScheduleStrategy::ALL.to_vec(),
    };

    let mut loaded = Vec::new();
    for p in &mesh_paths {
        let path = PathBuf::from(p);
        let format = MeshFormat::from_path(&path)
            .ok_or_else(|| anyhow!("cannot infer mesh format from `{p}`"))?;
        let mut m = load_mesh(&path, format).with_context(|| format!("loading mesh {p}"))?;
        if let Some(s) = pick("scale", common.scale, file.scale) {
            m = m.scaled(s);
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| p.clone());
        loaded.push((name, m));
    }

    let (cells, rows) = batch_evaluate(&loaded, &seeds, &controls, &schedules, &base, &db);

    if let Some(dir) = pick(
        "reports-dir",
        reports_dir.as_ref().map(path_str),
        file.reports_dir.clone(),
    ) {
        let dir = PathBuf::from(dir);
        std::fs::create_dir_all(&dir)?;
        for cell in &cells {
            let name = format!(
                "{}_s{}_{}_{}.json",
                cell.mesh, cell.seed, cell.control, cell.schedule
            );
            std::fs::write(dir.join(&name), serde_json::to_string_pretty(cell)?)?;
        }
    }
    let csv_path = pick(
        "out-csv",
        out_csv.as_ref().map(path_str),
        file.out_csv.clone(),
    )
    .unwrap_or_else(|| "evaluate.csv".into());
    write_aggregate_csv(&rows, &csv_path)?;

    let failed = cells.iter().filter(|c| c.error.is_some()).count();
    println!(
        "evaluated {} cells ({} failed); aggregate rows: {}",
        cells.len(),
        failed,
        rows.len()
    );
    println!("aggregate csv: {csv_path}");
    for row in &rows {
        println!(
            "  {:<12} {:<18} viable {:>5.1}%  sims {:>5.2}  attainment {:.4}",
            row.control, row.schedule, row.viable_pct, row.mean_sim_count, row.mean_style_attainment
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    /// Every long flag (other than --config and --help) must have a
    /// snake_case key in the JSON config schema.
    #[test]
    fn every_flag_has_a_config_key() {
        let sample = serde_json::to_value(FileConfig::sample()).unwrap();
        let keys: Vec<String> = sample
            .as_object()
            .unwrap()
            .keys()
            .cloned()
            .collect();
        let cmd = Cli::command();
        for sub in cmd.get_subcommands() {
            for arg in sub.get_arguments() {
                let Some(long) = arg.get_long() else {
                    continue;
                };
                if long == "config" || long == "help" || long == "version" {
                    continue;
                }
                let key = long.replace('-', "_");
                assert!(
                    keys.contains(&key),
                    "flag --{long} of `{}` has no config key `{key}`",
                    sub.get_name()
                );
            }
        }
    }

    #[test]
    fn cli_structure_is_valid() {
        Cli::command().debug_assert();
    }
}
