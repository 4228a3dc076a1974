//! Mesh ingestion (OBJ), synthetic scene generation, binary volume
//! persistence, and CSV/JSON export.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

use crate::expectation::ExpectationCurve;
use crate::geometry::{Camera, GeometryError, RigidTransform, TriangleMesh, Vec3};
use crate::math::{round_sig, splitmix64};
use crate::ray_fields::{FieldKind, FieldVolume, Truncation};

#[derive(Debug, Error)]
pub enum SceneIoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    ObjParse { line: usize, msg: String },
    #[error("not a volume file")]
    NotAVolumeFile,
    #[error("unsupported volume version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated payload")]
    TruncatedPayload,
    #[error("invalid scene: {0}")]
    BadScene(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path, source: std::io::Error) -> SceneIoError {
    SceneIoError::Io { path: path.display().to_string(), source }
}

// ---------------------------------------------------------------------------
// OBJ

/// Parse Wavefront OBJ text: `v` and `f` records only, polygon faces fan
/// triangulated, 1-based and negative indices supported.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, SceneIoError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coord = |name: &str| -> Result<f64, SceneIoError> {
                    tokens
                        .next()
                        .ok_or_else(|| SceneIoError::ObjParse {
                            line,
                            msg: format!("missing {name} coordinate"),
                        })?
                        .parse::<f64>()
                        .map_err(|e| SceneIoError::ObjParse { line, msg: e.to_string() })
                };
                let (x, y, z) = (coord("x")?, coord("y")?, coord("z")?);
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in tokens {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| SceneIoError::ObjParse {
                            line,
                            msg: format!("malformed index '{tok}'"),
                        })?;
                    let resolved: usize = if i > 0 {
                        (i - 1) as usize
                    } else if i < 0 {
                        let n = vertices.len() as i64 + i;
                        if n < 0 {
                            return Err(SceneIoError::ObjParse {
                                line,
                                msg: format!("negative index {i} out of range"),
                            });
                        }
                        n as usize
                    } else {
                        return Err(SceneIoError::ObjParse {
                            line,
                            msg: "index 0 is not valid in OBJ".into(),
                        });
                    };
                    if resolved >= vertices.len() {
                        return Err(SceneIoError::ObjParse {
                            line,
                            msg: format!("vertex {i} does not exist"),
                        });
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(SceneIoError::ObjParse {
                        line,
                        msg: "face needs at least 3 vertices".into(),
                    });
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {} // vt/vn/comments/materials ignored
        }
    }
    Ok(TriangleMesh::new(vertices, triangles)?)
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriangleMesh, SceneIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_obj(&text)
}

/// OBJ text for a mesh; floats print in shortest round-trip form so
/// write-then-load is the identity.
pub fn obj_string(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        out.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
    }
    for t in mesh.triangles() {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    out
}

pub fn write_obj(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), SceneIoError> {
    write_atomic(path.as_ref(), obj_string(mesh).as_bytes())
}

// ---------------------------------------------------------------------------
// Synthetic scenes

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WallSide {
    NegZ,
    PosZ,
    NegX,
    PosX,
    NegY,
    PosY,
}

/// Rectangular hole in a room wall, in normalized wall coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutout {
    pub wall: WallSide,
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    AxisBox {
        center: Vec3,
        size: Vec3,
    },
    Plane {
        normal: Vec3,
        offset: f64,
        extent: f64,
    },
    Room {
        center: Vec3,
        size: Vec3,
        cutouts: Vec<Cutout>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub primitives: Vec<Primitive>,
    pub seed: u64,
}

struct MeshBuilder {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl MeshBuilder {
    fn new() -> Self {
        MeshBuilder { vertices: Vec::new(), triangles: Vec::new() }
    }

    fn quad(&mut self, a: Vec3, b: Vec3, c: Vec3, d: Vec3) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&[a, b, c, d]);
        self.triangles.push([base, base + 1, base + 2]);
        self.triangles.push([base, base + 2, base + 3]);
    }

    /// Axis rectangle parameterized by (u, v) in [0, 1]^2, with an optional
    /// rectangular hole. The ring around the hole decomposes into four
    /// strips; empty strips collapse and are filtered as degenerate.
    fn panel(&mut self, map: &dyn Fn(f64, f64) -> Vec3, hole: Option<(f64, f64, f64, f64)>) {
        let mut rect = |u0: f64, v0: f64, u1: f64, v1: f64| {
            if u1 - u0 <= 0.0 || v1 - v0 <= 0.0 {
                return;
            }
            self.quad(map(u0, v0), map(u1, v0), map(u1, v1), map(u0, v1));
        };
        match hole {
            None => rect(0.0, 0.0, 1.0, 1.0),
            Some((hu0, hv0, hu1, hv1)) => {
                rect(0.0, 0.0, 1.0, hv0); // bottom strip
                rect(0.0, hv1, 1.0, 1.0); // top strip
                rect(0.0, hv0, hu0, hv1); // left strip
                rect(hu1, hv0, 1.0, hv1); // right strip
            }
        }
    }
}

/// 12-triangle axis-aligned box. `size` holds full side lengths.
pub fn axis_box_mesh(center: Vec3, size: Vec3) -> TriangleMesh {
    let h = size * 0.5;
    let mut b = MeshBuilder::new();
    for side in [
        WallSide::NegZ,
        WallSide::PosZ,
        WallSide::NegX,
        WallSide::PosX,
        WallSide::NegY,
        WallSide::PosY,
    ] {
        b.panel(&wall_map(center, h, side), None);
    }
    TriangleMesh::new(b.vertices, b.triangles).expect("box mesh is valid")
}

/// Maps normalized wall coordinates to 3-D for one face of a box shell.
fn wall_map(center: Vec3, half: Vec3, side: WallSide) -> impl Fn(f64, f64) -> Vec3 {
    move |u: f64, v: f64| {
        let su = 2.0 * u - 1.0;
        let sv = 2.0 * v - 1.0;
        match side {
            WallSide::NegZ => center + Vec3::new(su * half.x, sv * half.y, -half.z),
            WallSide::PosZ => center + Vec3::new(su * half.x, sv * half.y, half.z),
            WallSide::NegX => center + Vec3::new(-half.x, sv * half.y, su * half.z),
            WallSide::PosX => center + Vec3::new(half.x, sv * half.y, su * half.z),
            WallSide::NegY => center + Vec3::new(su * half.x, -half.y, sv * half.z),
            WallSide::PosY => center + Vec3::new(su * half.x, half.y, sv * half.z),
        }
    }
}

/// Build the triangle mesh for a scene spec. Deterministic: identical specs
/// produce identical vertex arrays.
pub fn gen_scene(spec: &SceneSpec) -> Result<TriangleMesh, SceneIoError> {
    let mut b = MeshBuilder::new();
    for prim in &spec.primitives {
        match prim {
            Primitive::AxisBox { center, size } => {
                if size.x <= 0.0 || size.y <= 0.0 || size.z <= 0.0 {
                    return Err(SceneIoError::BadScene("box size must be positive".into()));
                }
                let box_mesh = axis_box_mesh(*center, *size);
                let base = b.vertices.len() as u32;
                b.vertices.extend_from_slice(box_mesh.vertices());
                b.triangles.extend(
                    box_mesh.triangles().iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]),
                );
            }
            Primitive::Plane { normal, offset, extent } => {
                if *extent <= 0.0 {
                    return Err(SceneIoError::BadScene("plane extent must be positive".into()));
                }
                if normal.norm() == 0.0 {
                    return Err(SceneIoError::BadScene("plane normal must be non-zero".into()));
                }
                let n = normal.normalized();
                let center = n * -*offset;
                let helper = if n.x.abs() < 0.9 {
                    Vec3::new(1.0, 0.0, 0.0)
                } else {
                    Vec3::new(0.0, 1.0, 0.0)
                };
                let t1 = n.cross(helper).normalized();
                let t2 = n.cross(t1);
                let e = *extent;
                b.quad(
                    center - t1 * e - t2 * e,
                    center + t1 * e - t2 * e,
                    center + t1 * e + t2 * e,
                    center - t1 * e + t2 * e,
                );
            }
            Primitive::Room { center, size, cutouts } => {
                if size.x <= 0.0 || size.y <= 0.0 || size.z <= 0.0 {
                    return Err(SceneIoError::BadScene("room size must be positive".into()));
                }
                for c in cutouts {
                    let ok = 0.0 <= c.u0 && c.u0 < c.u1 && c.u1 <= 1.0 && 0.0 <= c.v0
                        && c.v0 < c.v1
                        && c.v1 <= 1.0;
                    if !ok {
                        return Err(SceneIoError::BadScene(
                            "cutout must be a non-empty rect inside its wall".into(),
                        ));
                    }
                }
                let half = *size * 0.5;
                for side in [
                    WallSide::NegZ,
                    WallSide::PosZ,
                    WallSide::NegX,
                    WallSide::PosX,
                    WallSide::NegY,
                    WallSide::PosY,
                ] {
                    let hole = cutouts
                        .iter()
                        .find(|c| c.wall == side)
                        .map(|c| (c.u0, c.v0, c.u1, c.v1));
                    b.panel(&wall_map(*center, half, side), hole);
                }
            }
        }
    }
    Ok(TriangleMesh::new(b.vertices, b.triangles)?)
}

/// Randomized stack of wide rooms along +z for a camera at the origin
/// looking down the z axis.
///
/// Every wall is perpendicular to z with at least `min_gap` meters between
/// consecutive walls, and walls stay within [1.5, 6.5] m, so along any ray
/// with direction.z >= 0.8 consecutive hits are at least `min_gap` apart and
/// all hits land strictly inside a [0, 8] m depth ladder. Window cutouts are
/// placed inside the central frustum zone to vary per-ray hit counts.
pub fn layered_rooms_spec(seed: u64) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x726f_6f6d));
    let min_gap = 1.0;
    let mut primitives = Vec::new();
    let mut z = rng.random_range(1.5..2.3);
    for _ in 0..rng.random_range(1..=2u32) {
        let depth = rng.random_range(min_gap..1.9);
        if z + depth > 6.5 {
            break;
        }
        let mut cutouts = Vec::new();
        for wall in [WallSide::NegZ, WallSide::PosZ] {
            // window inside the frustum zone (walls are 40 m wide, the
            // frustum covers roughly the central sixth)
            if rng.random_range(0..3) > 0 {
                let w = rng.random_range(0.02..0.10);
                let h = rng.random_range(0.02..0.10);
                let u0 = rng.random_range(0.42..0.56 - w);
                let v0 = rng.random_range(0.42..0.56 - h);
                cutouts.push(Cutout { wall, u0, v0, u1: u0 + w, v1: v0 + h });
            }
        }
        primitives.push(Primitive::Room {
            center: Vec3::new(0.0, 0.0, z + depth / 2.0),
            size: Vec3::new(40.0, 40.0, depth),
            cutouts,
        });
        z += depth + rng.random_range(min_gap..1.6);
    }
    if primitives.is_empty() {
        primitives.push(Primitive::Room {
            center: Vec3::new(0.0, 0.0, 3.0),
            size: Vec3::new(40.0, 40.0, 1.5),
            cutouts: vec![],
        });
    }
    SceneSpec { primitives, seed }
}

/// Small room with a box inside; from a camera at the origin the center ray
/// crosses the near wall, both box faces, and the far wall (4 hits).
pub fn demo_room_spec(seed: u64) -> SceneSpec {
    SceneSpec {
        primitives: vec![
            Primitive::Room {
                center: Vec3::new(0.0, 0.0, 3.5),
                size: Vec3::new(4.0, 4.0, 3.0),
                cutouts: vec![Cutout { wall: WallSide::NegZ, u0: 0.6, v0: 0.0, u1: 0.8, v1: 0.5 }],
            },
            Primitive::AxisBox {
                center: Vec3::new(0.0, 0.0, 3.5),
                size: Vec3::new(1.0, 1.0, 1.0),
            },
        ],
        seed,
    }
}

// ---------------------------------------------------------------------------
// Volume files

const VOLUME_MAGIC: &[u8; 4] = b"RDFV";
const VOLUME_VERSION: u32 = 1;

fn kind_code(kind: FieldKind) -> u32 {
    match kind {
        FieldKind::SceneUdf => 0,
        FieldKind::Urdf => 1,
        FieldKind::Srdf => 2,
        FieldKind::Drdf => 3,
        FieldKind::Orf { .. } => 4,
    }
}

/// Binary volume format, little-endian:
/// magic "RDFV" | version u32 | kind u32 | H W D u32 | near far f32 |
/// fx fy cx cy f32 | truncation f32 | H*W*D payload f32.
/// For ORF volumes the truncation slot carries the radius (their values are
/// indicators and are never truncated).
pub fn save_volume(vol: &FieldVolume, path: impl AsRef<Path>) -> Result<(), SceneIoError> {
    let mut buf = Vec::with_capacity(52 + vol.values.len() * 4);
    buf.extend_from_slice(VOLUME_MAGIC);
    buf.extend_from_slice(&VOLUME_VERSION.to_le_bytes());
    buf.extend_from_slice(&kind_code(vol.kind).to_le_bytes());
    for dim in [vol.h, vol.w, vol.d] {
        buf.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for f in [vol.camera.near, vol.camera.far, vol.camera.fx, vol.camera.fy, vol.camera.cx, vol.camera.cy] {
        buf.extend_from_slice(&(f as f32).to_le_bytes());
    }
    let trunc_slot = match vol.kind {
        FieldKind::Orf { radius } => radius as f32,
        _ => vol.truncation.bound as f32,
    };
    buf.extend_from_slice(&trunc_slot.to_le_bytes());
    for v in &vol.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path.as_ref(), &buf)
}

pub fn load_volume(path: impl AsRef<Path>) -> Result<FieldVolume, SceneIoError> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| io_err(path, e))?;
    if buf.len() < 52 || &buf[0..4] != VOLUME_MAGIC {
        return Err(SceneIoError::NotAVolumeFile);
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    let f32_at = |o: usize| f32::from_le_bytes(buf[o..o + 4].try_into().unwrap());

    let version = u32_at(4);
    if version != VOLUME_VERSION {
        return Err(SceneIoError::UnsupportedVersion(version));
    }
    let code = u32_at(8);
    let (h, w, d) = (u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize);
    let near = f32_at(24) as f64;
    let far = f32_at(28) as f64;
    let (fx, fy, cx, cy) = (
        f32_at(32) as f64,
        f32_at(36) as f64,
        f32_at(40) as f64,
        f32_at(44) as f64,
    );
    let trunc_slot = f32_at(48) as f64;

    let kind = match code {
        0 => FieldKind::SceneUdf,
        1 => FieldKind::Urdf,
        2 => FieldKind::Srdf,
        3 => FieldKind::Drdf,
        4 => FieldKind::Orf { radius: trunc_slot },
        _ => return Err(SceneIoError::NotAVolumeFile),
    };
    let truncation = match kind {
        FieldKind::Orf { .. } => Truncation::default(),
        _ => Truncation::hard(trunc_slot),
    };

    let expected = h * w * d * 4;
    if buf.len() - 52 != expected {
        return Err(SceneIoError::TruncatedPayload);
    }
    let values: Vec<f32> = buf[52..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();

    let camera = Camera::new(fx, fy, cx, cy, w as u32, h as u32, RigidTransform::IDENTITY, near, far)?;
    let depths = (0..d).map(|k| far * (k + 1) as f64 / d as f64).collect();
    Ok(FieldVolume { kind, camera, h, w, d, depths, values, truncation })
}

// ---------------------------------------------------------------------------
// CSV / JSON export

/// Shortest decimal form after rounding to 9 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{}", round_sig(x, 9))
}

/// Write bytes via a temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SceneIoError> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// CSV with header z,analytic[,derivative][,mc,mc_se].
pub fn curve_csv_string(curve: &ExpectationCurve) -> String {
    let mut header = vec!["z", "analytic"];
    if curve.derivative.is_some() {
        header.push("derivative");
    }
    if curve.mc.is_some() {
        header.push("mc");
        header.push("mc_se");
    }
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..curve.zs.len() {
        let mut fields = vec![fmt_float(curve.zs[i]), fmt_float(curve.analytic[i])];
        if let Some(der) = &curve.derivative {
            fields.push(fmt_float(der[i]));
        }
        if let Some(mc) = &curve.mc {
            fields.push(fmt_float(mc[i].mean));
            fields.push(fmt_float(mc[i].se));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn export_curve_csv(curve: &ExpectationCurve, path: impl AsRef<Path>) -> Result<(), SceneIoError> {
    write_atomic(path.as_ref(), curve_csv_string(curve).as_bytes())
}

/// Generic two-column CSV (t, fraction) used for the Chamfer curve.
pub fn export_pairs_csv(
    header: (&str, &str),
    pairs: &[(f64, f64)],
    path: impl AsRef<Path>,
) -> Result<(), SceneIoError> {
    let mut out = format!("{},{}\n", header.0, header.1);
    for &(a, b) in pairs {
        out.push_str(&format!("{},{}\n", fmt_float(a), fmt_float(b)));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    return Value::Number(
                        serde_json::Number::from_f64(round_sig(f, 9)).unwrap_or(n),
                    );
                }
            }
            Value::Number(n)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

/// Serialize with floats rounded to 9 significant digits and keys in stable
/// (sorted) order.
pub fn json_string<T: Serialize>(value: &T) -> Result<String, SceneIoError> {
    let v = round_json(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn export_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<(), SceneIoError> {
    write_atomic(path.as_ref(), json_string(value)?.as_bytes())
}
