//! Subcommand implementations. Every command echoes its configuration to
//! config.json in the output directory and writes results atomically.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};

use raydist::decoding::{decode_volume, DecoderKind, SurfaceSet};
use raydist::expectation::{
    drdf_zero_crossing, expected_derivative, expected_field_over_hits, expected_plane_udf,
    expected_urdf_isolated, expected_urdf_isolated_derivative, expected_value, mc_expected,
    orf_expected_derivative, ExpectationCurve, McEstimate, NoiseModel,
};
use raydist::geometry::{
    frustum_grid, ray_intersections, Bvh, Camera, Mat3, RigidTransform, TriangleMesh, Vec3,
};
use raydist::metrics::{
    chamfer_curve, chamfer_l1, ray_prf, scene_prf, subsample, surface_points, MetricsReport,
    PrfScores, RayMode, ThresholdScores,
};
use raydist::ray_fields::{
    evaluate_field, hit_histogram, miss_value, FieldKind, FieldVolume, Truncation,
};
use raydist::scene_io::{
    demo_room_spec, export_json, export_pairs_csv, fmt_float, gen_scene, layered_rooms_spec,
    load_obj, load_volume, save_volume, write_atomic, SceneSpec,
};

pub struct Ctx {
    pub seed: u64,
    pub out: PathBuf,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_config(&self, command: &str, args: serde_json::Value) -> Result<()> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        let cfg = json!({ "command": command, "seed": self.seed, "args": args });
        export_json(&cfg, self.path("config.json"))?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// shared argument parsing

/// Camera description accepted on the command line (JSON file).
#[derive(Clone, Debug, Serialize, Deserialize)]
struct CameraSpec {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
    #[serde(default = "default_near")]
    near: f64,
    #[serde(default = "default_far")]
    far: f64,
    position: Option<[f64; 3]>,
    look_at: Option<[f64; 3]>,
    up: Option<[f64; 3]>,
}

fn default_near() -> f64 {
    0.1
}
fn default_far() -> f64 {
    8.0
}

fn look_at_pose(position: Vec3, target: Vec3, up: Vec3) -> RigidTransform {
    let forward = (target - position).normalized();
    let x = up.cross(forward).normalized();
    let y = forward.cross(x);
    RigidTransform {
        rotation: Mat3::from_columns(x, y, forward),
        translation: position,
    }
}

fn load_camera(path: Option<&str>) -> Result<Camera> {
    let Some(path) = path else {
        return Ok(Camera::simple(128, 50.0, 0.1, 8.0));
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let spec: CameraSpec = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let pose = match (spec.position, spec.look_at) {
        (Some(p), Some(t)) => {
            let up = spec.up.map_or(Vec3::new(0.0, 1.0, 0.0), |u| Vec3::new(u[0], u[1], u[2]));
            look_at_pose(Vec3::new(p[0], p[1], p[2]), Vec3::new(t[0], t[1], t[2]), up)
        }
        (Some(p), None) => RigidTransform {
            rotation: Mat3::IDENTITY,
            translation: Vec3::new(p[0], p[1], p[2]),
        },
        _ => RigidTransform::IDENTITY,
    };
    Ok(Camera::new(
        spec.fx, spec.fy, spec.cx, spec.cy, spec.width, spec.height, pose, spec.near, spec.far,
    )?)
}

/// `--scene` accepts `layered[:seed]`, `demo-room[:seed]`, or a SceneSpec
/// JSON path.
fn load_scene_spec(arg: &str, default_seed: u64) -> Result<SceneSpec> {
    let (name, seed) = match arg.split_once(':') {
        Some((n, s)) => (n, s.parse::<u64>().with_context(|| format!("scene seed '{s}'"))?),
        None => (arg, default_seed),
    };
    match name {
        "layered" => Ok(layered_rooms_spec(seed)),
        "demo-room" => Ok(demo_room_spec(seed)),
        path => {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("reading scene {path}"))?;
            Ok(serde_json::from_str(&text).with_context(|| format!("parsing scene {path}"))?)
        }
    }
}

fn load_geometry(mesh: Option<&str>, scene: Option<&str>, seed: u64) -> Result<TriangleMesh> {
    match (mesh, scene) {
        (Some(path), None) => Ok(load_obj(path)?),
        (None, Some(spec)) => Ok(gen_scene(&load_scene_spec(spec, seed)?)?),
        _ => bail!("exactly one of --mesh and --scene is required"),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        bail!("grid must look like HxWxD, got '{s}'");
    }
    let h = parts[0].parse().context("grid H")?;
    let w = parts[1].parse().context("grid W")?;
    let d = parts[2].parse().context("grid D")?;
    if h < 2 || w < 2 || d < 2 {
        bail!("grid dims must be at least 2");
    }
    Ok((h, w, d))
}

fn parse_kind(s: &str) -> Result<FieldKind> {
    Ok(match s {
        "udf" => FieldKind::SceneUdf,
        "urdf" => FieldKind::Urdf,
        "srdf" => FieldKind::Srdf,
        "drdf" => FieldKind::Drdf,
        other => match other.strip_prefix("orf:") {
            Some(r) => FieldKind::Orf { radius: r.parse().context("orf radius")? },
            None => bail!("unknown field kind '{s}' (udf|urdf|srdf|drdf|orf:R)"),
        },
    })
}

fn parse_decoder(s: &str) -> Result<DecoderKind> {
    let mut it = s.split(':');
    let name = it.next().unwrap_or_default();
    let mut num = |what: &str| -> Result<f64> {
        it.next()
            .ok_or_else(|| anyhow!("decoder '{name}' needs {what}"))?
            .parse::<f64>()
            .with_context(|| format!("{what} in '{s}'"))
    };
    Ok(match name {
        "drdf" => DecoderKind::DrdfZeroCross,
        "sal" => DecoderKind::SalZeroCross,
        "grad" => DecoderKind::UrdfGradientZero,
        "minima" => DecoderKind::UdfLocalMinima { window: num("window")? },
        "nms" => DecoderKind::UrdfNms { tau: num("tau")? },
        "th" => DecoderKind::UrdfThreshold { tau: num("tau")? },
        "orf" => DecoderKind::OrfPairing { level: num("level")?, pair_gap: num("pair gap")? },
        "ldi" => DecoderKind::LdiConfidence { level: num("level")? },
        other => bail!("unknown decoder '{other}' (drdf|sal|grad|minima:W|nms:T|th:T|orf:L:G|ldi:L)"),
    })
}

fn parse_sigma_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| tok.trim().parse::<f64>().with_context(|| format!("sigma '{tok}'")))
        .collect()
}

fn parse_z_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("z-range must look like lo:hi:count, got '{s}'");
    }
    let lo: f64 = parts[0].parse().context("z lo")?;
    let hi: f64 = parts[1].parse().context("z hi")?;
    let count: usize = parts[2].parse().context("z count")?;
    if count < 2 || !(lo < hi) {
        bail!("need lo < hi and count >= 2");
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

/// Ground-truth surfaces: one sorted hit list per grid ray.
fn ground_truth_surfaces(
    mesh: &TriangleMesh,
    bvh: &Bvh,
    camera: &Camera,
    h: usize,
    w: usize,
) -> SurfaceSet {
    let grid = frustum_grid(camera, h, w, 2);
    let hits = grid
        .rays
        .iter()
        .map(|ray| ray_intersections(mesh, bvh, ray, camera.far).hits().to_vec())
        .collect();
    SurfaceSet::new(h, w, hits)
}

// ---------------------------------------------------------------------------
// intersect

#[derive(Args)]
pub struct IntersectArgs {
    /// OBJ mesh path.
    #[arg(long)]
    mesh: Option<String>,
    /// Synthetic scene: layered[:seed], demo-room[:seed], or a JSON spec path.
    #[arg(long)]
    scene: Option<String>,
    /// Camera JSON path (defaults to a 128 px, 50 deg camera at the origin).
    #[arg(long)]
    camera: Option<String>,
    /// Ray/depth grid, HxWxD.
    #[arg(long, default_value = "64x64x128")]
    grid: String,
}

pub fn cmd_intersect(ctx: &Ctx, args: IntersectArgs) -> Result<()> {
    ctx.write_config(
        "intersect",
        json!({ "mesh": args.mesh, "scene": args.scene, "camera": args.camera, "grid": args.grid }),
    )?;
    let mesh = load_geometry(args.mesh.as_deref(), args.scene.as_deref(), ctx.seed)?;
    let camera = load_camera(args.camera.as_deref())?;
    let (h, w, _) = parse_grid(&args.grid)?;
    let bvh = Bvh::build(&mesh);

    let surfaces = ground_truth_surfaces(&mesh, &bvh, &camera, h, w);
    export_json(&surfaces, ctx.path("hits.json"))?;

    let grid = frustum_grid(&camera, h, w, 2);
    let hist = hit_histogram(&mesh, &bvh, &grid.rays, camera.far);
    let pairs: Vec<(f64, f64)> = hist
        .iter()
        .enumerate()
        .map(|(k, &c)| (k as f64, c as f64))
        .collect();
    export_pairs_csv(("hits", "rays"), &pairs, ctx.path("hit_histogram.csv"))?;
    println!("wrote hits.json and hit_histogram.csv ({} rays)", h * w);
    Ok(())
}

// ---------------------------------------------------------------------------
// field

#[derive(Args)]
pub struct FieldArgs {
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    scene: Option<String>,
    #[arg(long)]
    camera: Option<String>,
    /// Field kind: udf|urdf|srdf|drdf|orf:R.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value = "64x64x128")]
    grid: String,
    /// Truncation bound in meters.
    #[arg(long, default_value_t = 1.0)]
    trunc: f64,
    /// Use log-space truncation beyond the bound instead of clamping.
    #[arg(long)]
    log_trunc: bool,
    /// Output file name (relative to --out).
    #[arg(long, default_value = "field.rdfv")]
    output: String,
}

pub fn cmd_field(ctx: &Ctx, args: FieldArgs) -> Result<()> {
    ctx.write_config(
        "field",
        json!({
            "mesh": args.mesh, "scene": args.scene, "camera": args.camera,
            "kind": args.kind, "grid": args.grid, "trunc": args.trunc,
            "log_trunc": args.log_trunc, "output": args.output,
        }),
    )?;
    let mesh = load_geometry(args.mesh.as_deref(), args.scene.as_deref(), ctx.seed)?;
    let camera = load_camera(args.camera.as_deref())?;
    let (h, w, d) = parse_grid(&args.grid)?;
    let kind = parse_kind(&args.kind)?;
    let truncation = if args.log_trunc {
        Truncation::log(args.trunc)
    } else {
        Truncation::hard(args.trunc)
    };
    let bvh = Bvh::build(&mesh);
    let vol = evaluate_field(&mesh, &bvh, &camera, h, w, d, kind, truncation);
    save_volume(&vol, ctx.path(&args.output))?;
    println!("wrote {} ({}x{}x{} {:?})", args.output, h, w, d, kind);
    Ok(())
}

// ---------------------------------------------------------------------------
// expect

#[derive(Args)]
pub struct ExpectArgs {
    /// srdf|urdf|urdf-isolated|drdf|orf:R|plane-udf.
    #[arg(long)]
    kind: String,
    /// Comma-separated sigma values.
    #[arg(long, default_value = "0.05,0.1,0.2,0.3")]
    sigma: String,
    /// Gap to the next intersection, meters.
    #[arg(long, default_value_t = 1.0)]
    n: f64,
    /// Curve support lo:hi:count.
    #[arg(long, default_value = "-1:2:101")]
    z_range: String,
    /// Add Monte-Carlo columns with this many samples per point.
    #[arg(long)]
    mc: Option<usize>,
    /// Also emit the sigma -> zero-crossing-location curve.
    #[arg(long)]
    zero_crossing: bool,
}

pub fn cmd_expect(ctx: &Ctx, args: ExpectArgs) -> Result<()> {
    ctx.write_config(
        "expect",
        json!({
            "kind": args.kind, "sigma": args.sigma, "n": args.n,
            "z_range": args.z_range, "mc": args.mc, "zero_crossing": args.zero_crossing,
        }),
    )?;
    let sigmas = parse_sigma_list(&args.sigma)?;
    let zs = parse_z_range(&args.z_range)?;

    for &sigma in &sigmas {
        let m = NoiseModel::centered(sigma, args.n);
        let (analytic, derivative, mc): (Vec<f64>, Vec<f64>, Option<Vec<McEstimate>>) =
            match args.kind.as_str() {
                "urdf-isolated" => (
                    zs.iter().map(|&z| expected_urdf_isolated(z, 0.0, sigma)).collect(),
                    zs.iter()
                        .map(|&z| expected_urdf_isolated_derivative(z, 0.0, sigma))
                        .collect(),
                    None,
                ),
                "plane-udf" => {
                    // z acts as the signed point-plane distance
                    let normal = Vec3::new(0.0, 0.0, 1.0);
                    (
                        zs.iter()
                            .map(|&z| expected_plane_udf(Vec3::new(0.0, 0.0, z), normal, 0.0, sigma))
                            .collect(),
                        zs.iter()
                            .map(|&z| expected_urdf_isolated_derivative(z.abs(), 0.0, sigma))
                            .collect(),
                        None,
                    )
                }
                other => {
                    let kind = parse_kind(other)?;
                    let analytic: Vec<f64> = zs
                        .iter()
                        .map(|&z| expected_value(kind, z, &m))
                        .collect::<Result<_, _>>()?;
                    let derivative: Vec<f64> = match kind {
                        FieldKind::Orf { radius } => {
                            zs.iter().map(|&z| orf_expected_derivative(z, radius, &m)).collect()
                        }
                        _ => zs
                            .iter()
                            .map(|&z| expected_derivative(kind, z, &m))
                            .collect::<Result<_, _>>()?,
                    };
                    let mc = match args.mc {
                        Some(n) => Some(mc_expected(kind, &zs, &m, n, ctx.seed)?),
                        None => None,
                    };
                    (analytic, derivative, mc)
                }
            };

        let curve = ExpectationCurve {
            label: format!("{}_sigma{}", args.kind, fmt_float(sigma)),
            zs: zs.clone(),
            analytic,
            derivative: Some(derivative),
            mc,
        };
        let file = format!("expect_{}.csv", curve.label.replace([':', '.'], "_"));
        raydist::scene_io::export_curve_csv(&curve, ctx.path(&file))?;
        println!("wrote {file}");
    }

    if args.zero_crossing {
        let mut pairs = Vec::new();
        let mut sigma = 0.01;
        while sigma < 0.4 * args.n {
            let m = NoiseModel::centered(sigma, args.n);
            match drdf_zero_crossing(&m) {
                Ok(z) => pairs.push((sigma, z)),
                Err(_) => break,
            }
            sigma += 0.005 * args.n;
        }
        export_pairs_csv(("sigma", "z_hat"), &pairs, ctx.path("zero_crossing.csv"))?;
        println!("wrote zero_crossing.csv ({} rows)", pairs.len());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// decode

#[derive(Args)]
pub struct DecodeArgs {
    /// Volume file produced by `field`.
    #[arg(long)]
    volume: String,
    /// drdf|sal|grad|minima:W|nms:T|th:T|orf:L:G.
    #[arg(long)]
    decoder: String,
    #[arg(long, default_value = "surfaces.json")]
    output: String,
}

pub fn cmd_decode(ctx: &Ctx, args: DecodeArgs) -> Result<()> {
    ctx.write_config(
        "decode",
        json!({ "volume": args.volume, "decoder": args.decoder, "output": args.output }),
    )?;
    let vol = load_volume(&args.volume)?;
    let decoder = parse_decoder(&args.decoder)?;
    let surfaces = decode_volume(&vol, &decoder)?;
    export_json(&surfaces, ctx.path(&args.output))?;
    let total: usize = surfaces.hits.iter().map(Vec::len).sum();
    println!("wrote {} ({} hits over {} rays)", args.output, total, surfaces.hits.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

#[derive(Args)]
pub struct EvalArgs {
    /// Predicted surfaces (JSON from `decode`).
    #[arg(long)]
    pred: String,
    /// Ground truth: surfaces JSON or an OBJ mesh (cast with --camera/--grid).
    #[arg(long)]
    gt: String,
    #[arg(long)]
    camera: Option<String>,
    #[arg(long, default_value = "64x64x128")]
    grid: String,
    /// Ray matching threshold, meters.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Scene-level threshold, meters.
    #[arg(long, default_value_t = 0.5)]
    scene_t: f64,
}

fn load_surfaces(path: &str) -> Result<SurfaceSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?)
}

pub fn cmd_eval(ctx: &Ctx, args: EvalArgs) -> Result<()> {
    ctx.write_config(
        "eval",
        json!({
            "pred": args.pred, "gt": args.gt, "camera": args.camera,
            "grid": args.grid, "t": args.t, "scene_t": args.scene_t,
        }),
    )?;
    let pred = load_surfaces(&args.pred)?;
    let camera = load_camera(args.camera.as_deref())?;
    let gt = if args.gt.ends_with(".obj") {
        let mesh = load_obj(&args.gt)?;
        let bvh = Bvh::build(&mesh);
        ground_truth_surfaces(&mesh, &bvh, &camera, pred.h, pred.w)
    } else {
        load_surfaces(&args.gt)?
    };

    let report = build_report(&pred, &gt, &camera, args.t, args.scene_t, ctx.seed)?;
    export_json(&report, ctx.path("report.json"))?;
    export_pairs_csv(("t", "fraction"), &report.chamfer_curve, ctx.path("chamfer_curve.csv"))?;
    println!(
        "chamfer {:.4} m | scene F1 {:.1} | ray-all F1 {:.1} | ray-occluded F1 {:.1}",
        report.chamfer_mean, report.scene.f1, report.ray_all.f1, report.ray_occluded.f1
    );
    Ok(())
}

fn build_report(
    pred: &SurfaceSet,
    gt: &SurfaceSet,
    camera: &Camera,
    ray_t: f64,
    scene_t: f64,
    seed: u64,
) -> Result<MetricsReport> {
    let pred_cloud = subsample(&surface_points(pred, camera), 30_000, seed);
    let gt_cloud = subsample(&surface_points(gt, camera), 30_000, seed.wrapping_add(1));
    let chamfer = match chamfer_l1(&pred_cloud, &gt_cloud) {
        Ok(c) => c,
        // empty prediction (or truth): report the far plane as the error
        Err(_) => camera.far,
    };
    let ts: Vec<f64> = (0..=50).map(|i| i as f64 * 0.02).collect();
    let curve = chamfer_curve(&[chamfer], &ts);
    let scene = if pred_cloud.is_empty() && gt_cloud.is_empty() {
        PrfScores { acc: 100.0, cmp: 100.0, f1: 100.0 }
    } else {
        scene_prf(&pred_cloud, &gt_cloud, scene_t)
    };
    Ok(MetricsReport {
        chamfer_mean: chamfer,
        chamfer_curve: curve,
        scene: ThresholdScores::from_prf(scene_t, scene),
        ray_all: ThresholdScores::from_prf(ray_t, ray_prf(pred, gt, ray_t, RayMode::All)?),
        ray_occluded: ThresholdScores::from_prf(
            ray_t,
            ray_prf(pred, gt, ray_t, RayMode::Occluded)?,
        ),
    })
}

// ---------------------------------------------------------------------------
// demo

#[derive(Args)]
pub struct DemoArgs {
    /// Synthetic scene (layered[:seed], demo-room[:seed], or JSON path).
    #[arg(long, default_value = "layered")]
    scene: String,
    /// Comma-separated uncertainty levels.
    #[arg(long, default_value = "0.05,0.1,0.2")]
    sigma: String,
    #[arg(long, default_value = "32x32x128")]
    grid: String,
    #[arg(long)]
    camera: Option<String>,
    /// Ray matching threshold for the table, meters.
    #[arg(long, default_value_t = 0.1)]
    t: f64,
}

#[derive(Serialize)]
struct DemoRow {
    sigma: f64,
    field: String,
    decoder: String,
    ray_all: PrfScores,
    ray_occluded: PrfScores,
    chamfer: f64,
}

/// Expected-field volume over real per-ray hit sets: each ray's hits share a
/// rigid Gaussian offset, so the exact closed form applies for any hit count.
fn expected_volume(
    gt: &SurfaceSet,
    camera: &Camera,
    d: usize,
    kind: FieldKind,
    sigma: f64,
) -> FieldVolume {
    let depths: Vec<f64> = (0..d).map(|k| camera.far * (k + 1) as f64 / d as f64).collect();
    let bound = 1.0;
    let mut values = Vec::with_capacity(gt.hits.len() * d);
    for hits in &gt.hits {
        if hits.is_empty() {
            values.extend(std::iter::repeat(miss_value(kind, bound) as f32).take(d));
        } else {
            for &z in &depths {
                let v = expected_field_over_hits(kind, z, hits, sigma).expect("ray kind");
                values.push(v as f32);
            }
        }
    }
    FieldVolume {
        kind,
        camera: camera.resampled(gt.w as u32, gt.h as u32),
        h: gt.h,
        w: gt.w,
        d,
        depths,
        values,
        truncation: Truncation::hard(bound),
    }
}

pub fn cmd_demo(ctx: &Ctx, args: DemoArgs) -> Result<()> {
    ctx.write_config(
        "demo",
        json!({
            "scene": args.scene, "sigma": args.sigma, "grid": args.grid,
            "camera": args.camera, "t": args.t,
        }),
    )?;
    let spec = load_scene_spec(&args.scene, ctx.seed)?;
    let mesh = gen_scene(&spec)?;
    let camera = load_camera(args.camera.as_deref())?;
    let (h, w, d) = parse_grid(&args.grid)?;
    let sigmas = parse_sigma_list(&args.sigma)?;
    let bvh = Bvh::build(&mesh);
    let gt = ground_truth_surfaces(&mesh, &bvh, &camera, h, w);

    let mut rows: Vec<DemoRow> = Vec::new();
    for &sigma in &sigmas {
        let table: Vec<(FieldKind, DecoderKind, &str, &str)> = vec![
            (FieldKind::Drdf, DecoderKind::DrdfZeroCross, "drdf", "zero-cross"),
            (FieldKind::Srdf, DecoderKind::SalZeroCross, "srdf", "sal"),
            (FieldKind::Urdf, DecoderKind::UrdfNms { tau: 0.15 }, "urdf", "nms(0.15)"),
            (FieldKind::Urdf, DecoderKind::UrdfGradientZero, "urdf", "gradient"),
            (FieldKind::Urdf, DecoderKind::UdfLocalMinima { window: 1.0 }, "urdf", "minima(1m)"),
            (
                FieldKind::Orf { radius: sigma / 2.0 },
                DecoderKind::OrfPairing { level: 0.5, pair_gap: 1.0 },
                "orf(s/2)",
                "pair(0.5)",
            ),
        ];
        for (kind, decoder, field_name, decoder_name) in table {
            let vol = expected_volume(&gt, &camera, d, kind, sigma);
            let decoded = decode_volume(&vol, &decoder)?;
            let all = ray_prf(&decoded, &gt, args.t, RayMode::All)?;
            let occ = ray_prf(&decoded, &gt, args.t, RayMode::Occluded)?;
            let pred_cloud = subsample(&surface_points(&decoded, &camera), 30_000, ctx.seed);
            let gt_cloud = subsample(&surface_points(&gt, &camera), 30_000, ctx.seed);
            let chamfer = chamfer_l1(&pred_cloud, &gt_cloud).unwrap_or(camera.far);
            rows.push(DemoRow {
                sigma,
                field: field_name.to_string(),
                decoder: decoder_name.to_string(),
                ray_all: all,
                ray_occluded: occ,
                chamfer,
            });
        }
    }

    // best decodings first within each sigma
    rows.sort_by(|a, b| {
        a.sigma
            .total_cmp(&b.sigma)
            .then(b.ray_all.f1.total_cmp(&a.ray_all.f1))
            .then(a.field.cmp(&b.field))
    });

    let mut csv = String::from(
        "sigma,field,decoder,ray_all_acc,ray_all_cmp,ray_all_f1,ray_occ_acc,ray_occ_cmp,ray_occ_f1,chamfer\n",
    );
    println!(
        "{:>6} {:>9} {:>11} {:>8} {:>8} {:>8} {:>9}",
        "sigma", "field", "decoder", "allF1", "occF1", "chamfer", ""
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_float(r.sigma),
            r.field,
            r.decoder,
            fmt_float(r.ray_all.acc),
            fmt_float(r.ray_all.cmp),
            fmt_float(r.ray_all.f1),
            fmt_float(r.ray_occluded.acc),
            fmt_float(r.ray_occluded.cmp),
            fmt_float(r.ray_occluded.f1),
            fmt_float(r.chamfer),
        ));
        println!(
            "{:>6} {:>9} {:>11} {:>8.1} {:>8.1} {:>8.3} {:>9}",
            r.sigma, r.field, r.decoder, r.ray_all.f1, r.ray_occluded.f1, r.chamfer, ""
        );
    }
    write_atomic(&ctx.path("demo_table.csv"), csv.as_bytes())?;
    export_json(&rows, ctx.path("demo_table.json"))?;
    println!("wrote demo_table.csv and demo_table.json");
    Ok(())
}

// ---------------------------------------------------------------------------
// plot

#[derive(Args)]
pub struct PlotArgs {
    /// Input CSV (first column = x, remaining columns = series).
    #[arg(long)]
    csv: String,
    /// Output SVG path (relative to --out).
    #[arg(long, default_value = "plot.svg")]
    svg: String,
}

pub fn cmd_plot(ctx: &Ctx, args: PlotArgs) -> Result<()> {
    ctx.write_config("plot", json!({ "csv": args.csv, "svg": args.svg }))?;
    let text = std::fs::read_to_string(&args.csv).with_context(|| format!("reading {}", args.csv))?;
    let svg = crate::plot::csv_to_svg(&text).map_err(|e| anyhow!("{e}"))?;
    write_atomic(&ctx.path(&args.svg), svg.as_bytes())?;
    println!("wrote {}", args.svg);
    Ok(())
}
