//! Plain-text scene description: parsing, validation and serialization.
//!
//! The format is a sequence of named blocks holding one `key value...` pair
//! per line. `#` starts a comment. Times are in nanoseconds, lengths in
//! meters, coefficients in 1/m.
//!
//! ```text
//! camera {
//!   position 0 0 -3
//!   look_at 0 0 0
//!   up 0 1 0
//!   fov 30
//!   resolution 64 64
//! }
//! medium {
//!   sigma_a 0.1
//!   sigma_s 0.4
//!   shape global
//! }
//! light {
//!   position 0 0 0
//!   power 1 1 1
//! }
//! ```

use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDescription {
    pub camera: CameraDesc,
    pub film: FilmDesc,
    pub media: Vec<MediumDesc>,
    pub surfaces: Vec<SurfaceDesc>,
    pub lights: Vec<LightDesc>,
    pub integrator: IntegratorDesc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraDesc {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    /// Vertical field of view in degrees.
    pub fov: f64,
    pub resolution: (u32, u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilmDesc {
    pub t_min_ns: f64,
    pub t_max_ns: f64,
    pub bins: u32,
}

impl Default for FilmDesc {
    fn default() -> Self {
        Self {
            t_min_ns: 0.0,
            t_max_ns: 20.0,
            bins: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeDesc {
    Sphere { center: [f64; 3], radius: f64 },
    Cuboid { min: [f64; 3], max: [f64; 3] },
    Plane { point: [f64; 3], normal: [f64; 3] },
    Mesh { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MediumBound {
    Global,
    Shape(ShapeDesc),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumDesc {
    pub sigma_a: f64,
    pub sigma_s: f64,
    pub g: f64,
    pub eta: f64,
    pub bound: MediumBound,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialDesc {
    Diffuse([f64; 3]),
    Mirror([f64; 3]),
    Dielectric(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDesc {
    pub shape: ShapeDesc,
    pub material: MaterialDesc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmissionDesc {
    Delta,
    Heaviside,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LightDesc {
    pub position: [f64; 3],
    /// Radiant intensity per channel [W/sr].
    pub power: [f64; 3],
    pub emission: EmissionDesc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorDesc {
    pub mode: String,
    pub alpha: f64,
    pub beta_t: f64,
    /// Initial beam radius [m]; `None` selects 1% of the scene diagonal.
    pub radius: Option<f64>,
    /// Initial temporal bandwidth [ns]; `None` selects four bin widths.
    pub time_bandwidth: Option<f64>,
    pub photons: u64,
    pub iterations: u32,
    pub seed: u64,
    pub unwarp: bool,
    pub spp: u32,
    pub kernel: String,
    pub max_vertices: u32,
    pub rr_depth: u32,
    pub max_bounces: u32,
}

impl Default for IntegratorDesc {
    fn default() -> Self {
        Self {
            mode: "beams1d".into(),
            alpha: 2.0 / 3.0,
            beta_t: 0.5,
            radius: None,
            time_bandwidth: None,
            photons: 10_000,
            iterations: 64,
            seed: 0,
            unwarp: false,
            spp: 16,
            kernel: "epanechnikov".into(),
            max_vertices: 64,
            rr_depth: 4,
            max_bounces: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    args: Vec<&'a str>,
}

struct Block<'a> {
    name: &'a str,
    line: usize,
    entries: Vec<Line<'a>>,
}

fn tokenize<'a>(text: &'a str, errors: &mut Vec<ParseError>) -> Vec<Block<'a>> {
    let mut blocks = Vec::new();
    let mut current: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match (&mut current, tokens.as_slice()) {
            (None, [name, "{"]) => {
                current = Some(Block {
                    name,
                    line: number,
                    entries: Vec::new(),
                })
            }
            (None, _) => errors.push(ParseError {
                line: number,
                message: format!("expected `<block> {{`, found `{line}`"),
            }),
            (Some(_), ["}"]) => blocks.push(current.take().unwrap()),
            (Some(block), [key, args @ ..]) => block.entries.push(Line {
                number,
                key,
                args: args.to_vec(),
            }),
            (Some(_), []) => unreachable!(),
        }
    }
    if let Some(b) = current {
        errors.push(ParseError {
            line: b.line,
            message: format!("block `{}` is not closed", b.name),
        });
    }
    blocks
}

struct Ctx<'e> {
    errors: &'e mut Vec<ParseError>,
}

impl Ctx<'_> {
    fn err(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(ParseError {
            line,
            message: message.into(),
        });
    }

    fn floats<const N: usize>(&mut self, l: &Line) -> Option<[f64; N]> {
        if l.args.len() != N {
            self.err(
                l.number,
                format!("`{}` expects {N} number(s), got {}", l.key, l.args.len()),
            );
            return None;
        }
        let mut out = [0.0; N];
        for (o, a) in out.iter_mut().zip(&l.args) {
            match a.parse::<f64>() {
                Ok(v) if v.is_finite() => *o = v,
                _ => {
                    self.err(l.number, format!("`{}`: `{a}` is not a finite number", l.key));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn float(&mut self, l: &Line) -> Option<f64> {
        self.floats::<1>(l).map(|[v]| v)
    }

    fn nonneg(&mut self, l: &Line) -> Option<f64> {
        let v = self.float(l)?;
        if v < 0.0 {
            self.err(l.number, format!("`{}` must be >= 0, got {v}", l.key));
            return None;
        }
        Some(v)
    }

    fn int<T: std::str::FromStr>(&mut self, l: &Line) -> Option<T> {
        match l.args.as_slice() {
            [a] => match a.parse::<T>() {
                Ok(v) => Some(v),
                Err(_) => {
                    self.err(
                        l.number,
                        format!("`{}`: `{a}` is not a valid non-negative integer", l.key),
                    );
                    None
                }
            },
            _ => {
                self.err(l.number, format!("`{}` expects one integer", l.key));
                None
            }
        }
    }

    fn word<'a>(&mut self, l: &Line<'a>) -> Option<&'a str> {
        match l.args.as_slice() {
            [a] => Some(a),
            _ => {
                self.err(l.number, format!("`{}` expects one word", l.key));
                None
            }
        }
    }

    fn shape(&mut self, l: &Line, allow_global: bool) -> Option<MediumBound> {
        let Some((&kind, rest)) = l.args.split_first() else {
            self.err(l.number, "`shape` needs a kind");
            return None;
        };
        let sub = Line {
            number: l.number,
            key: kind,
            args: rest.to_vec(),
        };
        let shape = match kind {
            "global" if allow_global => {
                if !rest.is_empty() {
                    self.err(l.number, "`shape global` takes no arguments");
                    return None;
                }
                return Some(MediumBound::Global);
            }
            "sphere" => {
                let v = self.floats::<4>(&sub)?;
                if v[3] <= 0.0 {
                    self.err(l.number, "sphere radius must be > 0");
                    return None;
                }
                ShapeDesc::Sphere {
                    center: [v[0], v[1], v[2]],
                    radius: v[3],
                }
            }
            "box" => {
                let v = self.floats::<6>(&sub)?;
                if !(v[0] < v[3] && v[1] < v[4] && v[2] < v[5]) {
                    self.err(l.number, "box min corner must be strictly below max corner");
                    return None;
                }
                ShapeDesc::Cuboid {
                    min: [v[0], v[1], v[2]],
                    max: [v[3], v[4], v[5]],
                }
            }
            "plane" => {
                let v = self.floats::<6>(&sub)?;
                if v[3] == 0.0 && v[4] == 0.0 && v[5] == 0.0 {
                    self.err(l.number, "plane normal must be non-zero");
                    return None;
                }
                ShapeDesc::Plane {
                    point: [v[0], v[1], v[2]],
                    normal: [v[3], v[4], v[5]],
                }
            }
            "mesh" => match rest {
                [p] => ShapeDesc::Mesh {
                    path: p.trim_matches('"').to_string(),
                },
                _ => {
                    self.err(l.number, "`shape mesh` expects one path");
                    return None;
                }
            },
            other => {
                self.err(l.number, format!("unknown shape kind `{other}`"));
                return None;
            }
        };
        if !allow_global || shape_is_closed(&shape) {
            Some(MediumBound::Shape(shape))
        } else {
            self.err(l.number, "a medium can only be bounded by a sphere or a box");
            None
        }
    }

    fn bool(&mut self, l: &Line) -> Option<bool> {
        match self.word(l)? {
            "true" | "yes" | "1" => Some(true),
            "false" | "no" | "0" => Some(false),
            w => {
                self.err(l.number, format!("`{}`: expected true/false, got `{w}`", l.key));
                None
            }
        }
    }

    fn opt_float(&mut self, l: &Line) -> Option<Option<f64>> {
        if l.args.as_slice() == ["auto"] {
            return Some(None);
        }
        let v = self.float(l)?;
        if v <= 0.0 {
            self.err(l.number, format!("`{}` must be > 0", l.key));
            return None;
        }
        Some(Some(v))
    }
}

fn shape_is_closed(s: &ShapeDesc) -> bool {
    matches!(s, ShapeDesc::Sphere { .. } | ShapeDesc::Cuboid { .. })
}

fn unknown_key(ctx: &mut Ctx, block: &str, l: &Line) {
    ctx.err(l.number, format!("unknown key `{}` in `{block}` block", l.key));
}

/// Parse and validate a scene description.
pub fn parse_scene(text: &str) -> Result<SceneDescription, ParseErrors> {
    let mut errors = Vec::new();
    let blocks = tokenize(text, &mut errors);
    let mut ctx = Ctx { errors: &mut errors };

    let mut camera: Option<CameraDesc> = None;
    let mut film: Option<FilmDesc> = None;
    let mut integrator: Option<IntegratorDesc> = None;
    let mut media = Vec::new();
    let mut surfaces = Vec::new();
    let mut lights = Vec::new();
    let mut global_media = 0;

    for block in &blocks {
        match block.name {
            "camera" => {
                if camera.is_some() {
                    ctx.err(block.line, "exactly one camera is allowed");
                }
                let mut c = CameraDesc {
                    position: [0.0; 3],
                    look_at: [0.0, 0.0, 1.0],
                    up: [0.0, 1.0, 0.0],
                    fov: 40.0,
                    resolution: (64, 64),
                };
                for l in &block.entries {
                    match l.key {
                        "position" => c.position = ctx.floats(l).unwrap_or(c.position),
                        "look_at" => c.look_at = ctx.floats(l).unwrap_or(c.look_at),
                        "up" => c.up = ctx.floats(l).unwrap_or(c.up),
                        "fov" => {
                            if let Some(v) = ctx.float(l) {
                                if v > 0.0 && v < 180.0 {
                                    c.fov = v;
                                } else {
                                    ctx.err(l.number, "fov must lie in (0, 180) degrees");
                                }
                            }
                        }
                        "resolution" => match l.args.as_slice() {
                            [w, h] => match (w.parse::<u32>(), h.parse::<u32>()) {
                                (Ok(w), Ok(h)) if w > 0 && h > 0 => c.resolution = (w, h),
                                _ => ctx.err(l.number, "resolution must be two positive integers"),
                            },
                            _ => ctx.err(l.number, "resolution expects width and height"),
                        },
                        _ => unknown_key(&mut ctx, "camera", l),
                    }
                }
                let fwd = sub3(c.look_at, c.position);
                if norm3(fwd) == 0.0 {
                    ctx.err(block.line, "camera look_at must differ from position");
                } else if norm3(cross3(fwd, c.up)) < 1e-12 * norm3(fwd) * norm3(c.up).max(1e-300) {
                    ctx.err(
                        block.line,
                        "camera up vector must not be parallel to the view direction",
                    );
                }
                camera = Some(c);
            }
            "film" => {
                if film.is_some() {
                    ctx.err(block.line, "duplicate `film` block");
                }
                let mut f = FilmDesc::default();
                for l in &block.entries {
                    match l.key {
                        "t_min" => f.t_min_ns = ctx.float(l).unwrap_or(f.t_min_ns),
                        "t_max" => f.t_max_ns = ctx.float(l).unwrap_or(f.t_max_ns),
                        "bins" => match ctx.int::<u32>(l) {
                            Some(0) => ctx.err(l.number, "bins must be >= 1"),
                            Some(b) => f.bins = b,
                            None => {}
                        },
                        _ => unknown_key(&mut ctx, "film", l),
                    }
                }
                if f.t_max_ns <= f.t_min_ns {
                    ctx.err(block.line, "film t_max must be greater than t_min");
                }
                film = Some(f);
            }
            "medium" => {
                let mut m = MediumDesc {
                    sigma_a: 0.0,
                    sigma_s: 0.0,
                    g: 0.0,
                    eta: 1.0,
                    bound: MediumBound::Global,
                };
                let mut has_shape = false;
                for l in &block.entries {
                    match l.key {
                        "sigma_a" => m.sigma_a = ctx.nonneg(l).unwrap_or(m.sigma_a),
                        "sigma_s" => m.sigma_s = ctx.nonneg(l).unwrap_or(m.sigma_s),
                        "g" => {
                            if let Some(g) = ctx.float(l) {
                                if g > -1.0 && g < 1.0 {
                                    m.g = g;
                                } else {
                                    ctx.err(l.number, "g must lie in (-1, 1)");
                                }
                            }
                        }
                        "eta" => {
                            if let Some(e) = ctx.float(l) {
                                if e >= 1.0 {
                                    m.eta = e;
                                } else {
                                    ctx.err(l.number, "eta must be >= 1");
                                }
                            }
                        }
                        "shape" => {
                            has_shape = true;
                            if let Some(b) = ctx.shape(l, true) {
                                m.bound = b;
                            }
                        }
                        _ => unknown_key(&mut ctx, "medium", l),
                    }
                }
                if !has_shape {
                    ctx.err(
                        block.line,
                        "medium needs a `shape` (use `shape global` for an unbounded medium)",
                    );
                }
                if m.bound == MediumBound::Global {
                    global_media += 1;
                    if global_media > 1 {
                        ctx.err(block.line, "at most one global medium is allowed");
                    }
                }
                media.push(m);
            }
            "surface" => {
                let mut shape = None;
                let mut material = None;
                for l in &block.entries {
                    match l.key {
                        "shape" => {
                            if let Some(MediumBound::Shape(s)) = ctx.shape(l, false) {
                                shape = Some(s);
                            }
                        }
                        "material" => material = parse_material(&mut ctx, l),
                        _ => unknown_key(&mut ctx, "surface", l),
                    }
                }
                match (shape, material) {
                    (Some(shape), Some(material)) => {
                        if matches!(material, MaterialDesc::Dielectric(_)) && !shape_is_closed(&shape) {
                            ctx.err(block.line, "dielectric surfaces must be a sphere or a box");
                        }
                        surfaces.push(SurfaceDesc { shape, material })
                    }
                    _ => ctx.err(block.line, "surface needs both `shape` and `material`"),
                }
            }
            "light" => {
                let mut light = LightDesc {
                    position: [0.0; 3],
                    power: [1.0; 3],
                    emission: EmissionDesc::Delta,
                };
                let mut has_position = false;
                for l in &block.entries {
                    match l.key {
                        "position" => {
                            has_position = true;
                            light.position = ctx.floats(l).unwrap_or(light.position)
                        }
                        "power" => {
                            if let Some(p) = ctx.floats::<3>(l) {
                                if p.iter().all(|&c| c >= 0.0) {
                                    light.power = p;
                                } else {
                                    ctx.err(l.number, "power channels must be >= 0");
                                }
                            }
                        }
                        "emission" => match ctx.word(l) {
                            Some("delta") => light.emission = EmissionDesc::Delta,
                            Some("heaviside") => light.emission = EmissionDesc::Heaviside,
                            Some(w) => ctx.err(l.number, format!("unknown emission profile `{w}`")),
                            None => {}
                        },
                        _ => unknown_key(&mut ctx, "light", l),
                    }
                }
                if !has_position {
                    ctx.err(block.line, "light needs a `position`");
                }
                lights.push(light);
            }
            "integrator" => {
                if integrator.is_some() {
                    ctx.err(block.line, "duplicate `integrator` block");
                }
                let mut it = IntegratorDesc::default();
                for l in &block.entries {
                    match l.key {
                        "mode" => it.mode = ctx.word(l).map(str::to_string).unwrap_or(it.mode),
                        "alpha" => {
                            if let Some(a) = ctx.float(l) {
                                if a > 0.0 && a <= 1.0 {
                                    it.alpha = a;
                                } else {
                                    ctx.err(l.number, "alpha must lie in (0, 1]");
                                }
                            }
                        }
                        "beta_t" => {
                            if let Some(b) = ctx.float(l) {
                                if (0.0..=1.0).contains(&b) {
                                    it.beta_t = b;
                                } else {
                                    ctx.err(l.number, "beta_t must lie in [0, 1]");
                                }
                            }
                        }
                        "radius" => it.radius = ctx.opt_float(l).unwrap_or(it.radius),
                        "time_bandwidth" => it.time_bandwidth = ctx.opt_float(l).unwrap_or(it.time_bandwidth),
                        "photons" => match ctx.int::<u64>(l) {
                            Some(0) => ctx.err(l.number, "photons must be >= 1"),
                            Some(v) => it.photons = v,
                            None => {}
                        },
                        "iterations" => match ctx.int::<u32>(l) {
                            Some(0) => ctx.err(l.number, "iterations must be >= 1"),
                            Some(v) => it.iterations = v,
                            None => {}
                        },
                        "seed" => it.seed = ctx.int(l).unwrap_or(it.seed),
                        "unwarp" => it.unwarp = ctx.bool(l).unwrap_or(it.unwarp),
                        "spp" => match ctx.int::<u32>(l) {
                            Some(0) => ctx.err(l.number, "spp must be >= 1"),
                            Some(v) => it.spp = v,
                            None => {}
                        },
                        "kernel" => it.kernel = ctx.word(l).map(str::to_string).unwrap_or(it.kernel),
                        "max_vertices" => match ctx.int::<u32>(l) {
                            Some(v) if v >= 2 => it.max_vertices = v,
                            Some(_) => ctx.err(l.number, "max_vertices must be >= 2"),
                            None => {}
                        },
                        "rr_depth" => it.rr_depth = ctx.int(l).unwrap_or(it.rr_depth),
                        "max_bounces" => match ctx.int::<u32>(l) {
                            Some(0) => ctx.err(l.number, "max_bounces must be >= 1"),
                            Some(v) => it.max_bounces = v,
                            None => {}
                        },
                        _ => unknown_key(&mut ctx, "integrator", l),
                    }
                }
                integrator = Some(it);
            }
            other => ctx.err(block.line, format!("unknown block `{other}`")),
        }
    }

    if camera.is_none() {
        ctx.err(0, "missing required `camera` block");
    }
    if lights.is_empty() {
        ctx.err(0, "missing required `light` block");
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line);
        return Err(ParseErrors(errors));
    }
    Ok(SceneDescription {
        camera: camera.unwrap(),
        film: film.unwrap_or_default(),
        media,
        surfaces,
        lights,
        integrator: integrator.unwrap_or_default(),
    })
}

fn parse_material(ctx: &mut Ctx, l: &Line) -> Option<MaterialDesc> {
    let Some((&kind, rest)) = l.args.split_first() else {
        ctx.err(l.number, "`material` needs a kind");
        return None;
    };
    let sub = Line {
        number: l.number,
        key: kind,
        args: rest.to_vec(),
    };
    let albedo = |ctx: &mut Ctx, sub: &Line| -> Option<[f64; 3]> {
        let v = ctx.floats::<3>(sub)?;
        if v.iter().all(|&c| (0.0..=1.0).contains(&c)) {
            Some(v)
        } else {
            ctx.err(sub.number, "reflectance channels must lie in [0, 1]");
            None
        }
    };
    match kind {
        "diffuse" => albedo(ctx, &sub).map(MaterialDesc::Diffuse),
        "mirror" => albedo(ctx, &sub).map(MaterialDesc::Mirror),
        "dielectric" => {
            let eta = ctx.float(&sub)?;
            if eta < 1.0 {
                ctx.err(l.number, "dielectric eta must be >= 1");
                return None;
            }
            Some(MaterialDesc::Dielectric(eta))
        }
        other => {
            ctx.err(l.number, format!("unknown material `{other}`"));
            None
        }
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

// `{:?}` prints the shortest representation that parses back to the same f64.
fn v3(v: [f64; 3]) -> String {
    format!("{:?} {:?} {:?}", v[0], v[1], v[2])
}

fn shape_line(s: &ShapeDesc) -> String {
    match s {
        ShapeDesc::Sphere { center, radius } => format!("shape sphere {} {:?}", v3(*center), radius),
        ShapeDesc::Cuboid { min, max } => format!("shape box {} {}", v3(*min), v3(*max)),
        ShapeDesc::Plane { point, normal } => format!("shape plane {} {}", v3(*point), v3(*normal)),
        ShapeDesc::Mesh { path } => format!("shape mesh {path}"),
    }
}

/// Serialize to the text format; `parse_scene` of the output yields an equal description.
pub fn serialize_scene(d: &SceneDescription) -> String {
    let mut out = String::new();
    let c = &d.camera;
    let _ = writeln!(
        out,
        "camera {{\n  position {}\n  look_at {}\n  up {}\n  fov {:?}\n  resolution {} {}\n}}",
        v3(c.position),
        v3(c.look_at),
        v3(c.up),
        c.fov,
        c.resolution.0,
        c.resolution.1
    );
    let f = &d.film;
    let _ = writeln!(
        out,
        "film {{\n  t_min {:?}\n  t_max {:?}\n  bins {}\n}}",
        f.t_min_ns, f.t_max_ns, f.bins
    );
    for m in &d.media {
        let shape = match &m.bound {
            MediumBound::Global => "shape global".to_string(),
            MediumBound::Shape(s) => shape_line(s),
        };
        let _ = writeln!(
            out,
            "medium {{\n  sigma_a {:?}\n  sigma_s {:?}\n  g {:?}\n  eta {:?}\n  {shape}\n}}",
            m.sigma_a, m.sigma_s, m.g, m.eta
        );
    }
    for s in &d.surfaces {
        let material = match s.material {
            MaterialDesc::Diffuse(a) => format!("diffuse {}", v3(a)),
            MaterialDesc::Mirror(a) => format!("mirror {}", v3(a)),
            MaterialDesc::Dielectric(e) => format!("dielectric {e:?}"),
        };
        let _ = writeln!(out, "surface {{\n  {}\n  material {material}\n}}", shape_line(&s.shape));
    }
    for l in &d.lights {
        let emission = match l.emission {
            EmissionDesc::Delta => "delta",
            EmissionDesc::Heaviside => "heaviside",
        };
        let _ = writeln!(
            out,
            "light {{\n  position {}\n  power {}\n  emission {emission}\n}}",
            v3(l.position),
            v3(l.power)
        );
    }
    let it = &d.integrator;
    let opt = |v: Option<f64>| v.map_or("auto".to_string(), |x| format!("{x:?}"));
    let _ = writeln!(
        out,
        "integrator {{\n  mode {}\n  alpha {:?}\n  beta_t {:?}\n  radius {}\n  time_bandwidth {}\n  photons {}\n  iterations {}\n  seed {}\n  unwarp {}\n  spp {}\n  kernel {}\n  max_vertices {}\n  rr_depth {}\n  max_bounces {}\n}}",
        it.mode,
        it.alpha,
        it.beta_t,
        opt(it.radius),
        opt(it.time_bandwidth),
        it.photons,
        it.iterations,
        it.seed,
        it.unwarp,
        it.spp,
        it.kernel,
        it.max_vertices,
        it.rr_depth,
        it.max_bounces
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
camera {
  position 0 0 -3
  look_at 0 0 0
  resolution 8 8
}
medium {
  sigma_a 0.1
  sigma_s 0.4
  shape global
}
light {
  position 0 0 0
  power 1 1 1
}
";

    #[test]
    fn minimal_scene_parses() {
        let d = parse_scene(MINIMAL).unwrap();
        assert_eq!(d.camera.resolution, (8, 8));
        assert_eq!(d.media.len(), 1);
        assert_eq!(d.media[0].bound, MediumBound::Global);
        assert_eq!(d.film, FilmDesc::default());
        assert_eq!(d.integrator, IntegratorDesc::default());
    }

    #[test]
    fn negative_sigma_names_the_field() {
        let text = MINIMAL.replace("sigma_s 0.4", "sigma_s -1");
        let err = parse_scene(&text).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert!(err.0[0].message.contains("sigma_s"), "{}", err);
        assert_eq!(err.0[0].line, 9);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = MINIMAL.replace("power 1 1 1", "power 1 1 1\n  colour red");
        let err = parse_scene(&text).unwrap_err();
        assert!(err.0[0].message.contains("unknown key `colour`"));
    }

    #[test]
    fn missing_blocks_reported() {
        let err = parse_scene("film {\n t_min 0\n t_max 10\n}\n").unwrap_err();
        let msgs: Vec<_> = err.0.iter().map(|e| e.message.as_str()).collect();
        assert!(msgs.iter().any(|m| m.contains("camera")));
        assert!(msgs.iter().any(|m| m.contains("light")));
    }

    #[test]
    fn reports_several_errors_with_lines() {
        let text = "camera {\n fov 400\n}\nlight {\n position 0 0\n}\nbogus {\n}\n";
        let err = parse_scene(text).unwrap_err();
        let lines: Vec<_> = err.0.iter().map(|e| e.line).collect();
        assert!(lines.contains(&2) && lines.contains(&5) && lines.contains(&7), "{err}");
    }

    #[test]
    fn film_range_validated() {
        let text = format!("{MINIMAL}film {{\n t_min 5\n t_max 5\n}}\n");
        assert!(parse_scene(&text).is_err());
    }

    #[test]
    fn round_trip_full_scene() {
        let text = format!(
            "{MINIMAL}
medium {{
  sigma_a 0.3333333333333333
  sigma_s 0.1
  g -0.25
  eta 1.33
  shape sphere 0.1 0.2 0.3 0.5
}}
surface {{
  shape box -1 -1 -1 1 1 1
  material dielectric 1.5
}}
surface {{
  shape plane 0 -1 0 0 1 0
  material mirror 0.9 0.8 0.7
}}
surface {{
  shape mesh meshes/bunny.obj
  material diffuse 0.5 0.5 0.5
}}
light {{
  position 0.5 0.5 0.5
  power 2 3 4
  emission heaviside
}}
integrator {{
  mode reference
  alpha 0.7
  radius 0.01
  time_bandwidth auto
  seed 42
  unwarp true
}}
"
        );
        let d1 = parse_scene(&text).unwrap();
        let s1 = serialize_scene(&d1);
        let d2 = parse_scene(&s1).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(serialize_scene(&d2), s1);
    }
}
