//! Synthetic tubular volumes with known topology.
//!
//! Every phantom is a set of centerline curves, digitized into face-connected
//! voxel paths and dilated by a Euclidean ball. Random vessel trees grow
//! branches as bounded-curvature random walks and reject any step that would
//! bring two tubes into contact away from their junction, so the tree stays
//! contractible.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BinaryVolume, Dims, Voxel};
use crate::topology::BettiTriple;

/// Empty voxels kept between the structure and the grid border.
pub const MARGIN: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhantomKind {
    StraightTube,
    Torus,
    YBranch,
    MultiTube(usize),
    RandomVesselTree { seed: u64, branches: usize },
}

impl PhantomKind {
    /// Closed-form topology of the kind.
    pub fn expected_topology(&self) -> BettiTriple {
        match *self {
            PhantomKind::StraightTube | PhantomKind::YBranch => BettiTriple::new(1, 0, 0),
            PhantomKind::Torus => BettiTriple::new(1, 1, 0),
            PhantomKind::MultiTube(n) => BettiTriple::new(n, 0, 0),
            PhantomKind::RandomVesselTree { .. } => BettiTriple::new(1, 0, 0),
        }
    }
}

/// Declarative phantom description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    kind: PhantomKind,
    dims: Dims,
    radius: f64,
    expected: BettiTriple,
}

impl PhantomSpec {
    pub fn new(kind: PhantomKind, dims: Dims, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 1.0 {
            return Err(Error::InvalidSpec(format!("radius must be >= 1, got {radius}")));
        }
        if let PhantomKind::MultiTube(0) = kind {
            return Err(Error::InvalidSpec("multitube needs n >= 1".into()));
        }
        Ok(PhantomSpec {
            kind,
            dims,
            radius,
            expected: kind.expected_topology(),
        })
    }

    pub fn kind(&self) -> PhantomKind {
        self.kind
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn expected(&self) -> BettiTriple {
        self.expected
    }
}

impl FromStr for PhantomSpec {
    type Err = Error;

    /// Parses `kind=torus radius=2 dims=64,64,64 seed=7` style text.
    fn from_str(s: &str) -> Result<Self> {
        let mut kind = None;
        let mut radius = 2.0;
        let mut dims = Dims::cube(64)?;
        let mut seed = 0u64;
        let mut n = None;
        let mut branches = 8usize;
        let bad = |key: &str, value: &str| Error::InvalidSpec(format!("bad value for {key}: {value:?}"));
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got {token:?}")))?;
            match key {
                "kind" => kind = Some(value.to_ascii_lowercase()),
                "radius" | "r" => radius = value.parse().map_err(|_| bad(key, value))?,
                "seed" => seed = value.parse().map_err(|_| bad(key, value))?,
                "n" => n = Some(value.parse().map_err(|_| bad(key, value))?),
                "branches" => branches = value.parse().map_err(|_| bad(key, value))?,
                "dims" => {
                    let parts: Vec<usize> = value
                        .split(',')
                        .map(|p| p.parse().map_err(|_| bad(key, value)))
                        .collect::<Result<_>>()?;
                    dims = match parts[..] {
                        [s] => Dims::cube(s)?,
                        [x, y, z] => Dims::new(x, y, z)?,
                        _ => return Err(bad(key, value)),
                    };
                }
                _ => return Err(Error::InvalidSpec(format!("unknown key {key:?}"))),
            }
        }
        let kind = match kind.as_deref() {
            Some("straight" | "straighttube" | "tube") => PhantomKind::StraightTube,
            Some("torus") => PhantomKind::Torus,
            Some("ybranch" | "y") => PhantomKind::YBranch,
            Some("multitube") => PhantomKind::MultiTube(n.unwrap_or(2)),
            Some("tree" | "vesseltree" | "randomvesseltree") => {
                PhantomKind::RandomVesselTree { seed, branches }
            }
            Some(other) => return Err(Error::InvalidSpec(format!("unknown kind {other:?}"))),
            None => return Err(Error::InvalidSpec("missing kind".into())),
        };
        PhantomSpec::new(kind, dims, radius)
    }
}

impl fmt::Display for PhantomSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            PhantomKind::StraightTube => "kind=straight".to_string(),
            PhantomKind::Torus => "kind=torus".to_string(),
            PhantomKind::YBranch => "kind=ybranch".to_string(),
            PhantomKind::MultiTube(n) => format!("kind=multitube n={n}"),
            PhantomKind::RandomVesselTree { seed, branches } => {
                format!("kind=tree seed={seed} branches={branches}")
            }
        };
        let Dims { nx, ny, nz } = self.dims;
        write!(f, "{kind} radius={} dims={nx},{ny},{nz}", self.radius)
    }
}

/// A generated phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub volume: BinaryVolume,
    pub expected: BettiTriple,
    /// Digitized centerline voxels (with repeats at junctions).
    pub centerline: Vec<Voxel>,
}

/// 64-bit linear congruential generator.
#[derive(Debug, Clone)]
pub struct Lcg(u64);

impl Lcg {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(Self::MULTIPLIER).wrapping_add(Self::INCREMENT);
        self.0
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}

type P3 = [f64; 3];

fn add(a: P3, b: P3) -> P3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: P3, s: f64) -> P3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: P3) -> P3 {
    scale(a, 1.0 / norm(a))
}

fn dist2(a: P3, b: P3) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

/// Face-connected digital path through the rounded points of `curve`.
fn digitize(curve: &[P3]) -> Vec<[i64; 3]> {
    let mut path: Vec<[i64; 3]> = Vec::with_capacity(curve.len() * 2);
    for p in curve {
        let target = [p[0].round() as i64, p[1].round() as i64, p[2].round() as i64];
        match path.last().copied() {
            None => path.push(target),
            Some(mut cur) => {
                for axis in 0..3 {
                    while cur[axis] != target[axis] {
                        cur[axis] += (target[axis] - cur[axis]).signum();
                        path.push(cur);
                    }
                }
            }
        }
    }
    path
}

fn ball_offsets(radius: f64) -> Vec<[i64; 3]> {
    let r = radius.floor() as i64;
    let r2 = radius * radius;
    let mut out = Vec::new();
    for z in -r..=r {
        for y in -r..=r {
            for x in -r..=r {
                if (x * x + y * y + z * z) as f64 <= r2 {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

fn rasterize(dims: Dims, radius: f64, paths: &[Vec<[i64; 3]>]) -> Result<Phantom> {
    let r = radius.floor() as i64;
    let hi = [dims.nx as i64, dims.ny as i64, dims.nz as i64];
    for p in paths.iter().flatten() {
        for axis in 0..3 {
            if p[axis] - r < MARGIN || p[axis] + r > hi[axis] - 1 - MARGIN {
                return Err(Error::PhantomDoesNotFit(format!(
                    "radius {radius} tube at {p:?} leaves the {MARGIN}-voxel margin of {}x{}x{}",
                    dims.nx, dims.ny, dims.nz
                )));
            }
        }
    }
    let offsets = ball_offsets(radius);
    let mut vol = BinaryVolume::zeros(dims);
    let mut centerline = Vec::new();
    for p in paths.iter().flatten() {
        for o in &offsets {
            let v = Voxel::new((p[0] + o[0]) as usize, (p[1] + o[1]) as usize, (p[2] + o[2]) as usize);
            vol.set(v, true);
        }
        centerline.push(Voxel::new(p[0] as usize, p[1] as usize, p[2] as usize));
    }
    Ok(Phantom {
        volume: vol,
        expected: BettiTriple::EMPTY,
        centerline,
    })
}

fn does_not_fit(what: &str, dims: Dims, radius: f64) -> Error {
    Error::PhantomDoesNotFit(format!(
        "{what} of radius {radius} needs a larger grid than {}x{}x{}",
        dims.nx, dims.ny, dims.nz
    ))
}

/// Rasterizes `spec`; identical specs give identical volumes.
pub fn generate(spec: &PhantomSpec) -> Result<Phantom> {
    let dims = spec.dims;
    let r = spec.radius;
    let lo = r.floor() + MARGIN as f64;
    let hi = |n: usize| n as f64 - 1.0 - lo;
    let center = [
        (dims.nx / 2) as f64,
        (dims.ny / 2) as f64,
        (dims.nz / 2) as f64,
    ];

    let curves: Vec<Vec<P3>> = match spec.kind {
        PhantomKind::StraightTube => {
            if hi(dims.nx) - lo < 1.0 {
                return Err(does_not_fit("straight tube", dims, r));
            }
            vec![vec![[lo, center[1], center[2]], [hi(dims.nx), center[1], center[2]]]]
        }
        PhantomKind::Torus => vec![torus_curve(dims, r)?],
        PhantomKind::YBranch => y_branch_curves(dims, r)?,
        PhantomKind::MultiTube(n) => {
            let spacing = 2.0 * r.floor() + 4.0;
            let cols = ((hi(dims.ny) - lo) / spacing).floor() as usize + 1;
            let rows = ((hi(dims.nz) - lo) / spacing).floor() as usize + 1;
            if hi(dims.nx) - lo < 1.0 || hi(dims.ny) < lo || hi(dims.nz) < lo || cols * rows < n {
                return Err(does_not_fit("multitube", dims, r));
            }
            (0..n)
                .map(|i| {
                    let y = lo + (i % cols) as f64 * spacing;
                    let z = lo + (i / cols) as f64 * spacing;
                    vec![[lo, y, z], [hi(dims.nx), y, z]]
                })
                .collect()
        }
        PhantomKind::RandomVesselTree { seed, branches } => {
            TreeGrower::new(dims, r, seed).grow(branches)?
        }
    };

    let paths: Vec<Vec<[i64; 3]>> = curves.iter().map(|c| digitize(&densify(c))).collect();
    let mut phantom = rasterize(dims, r, &paths)?;
    phantom.expected = spec.expected;
    Ok(phantom)
}

/// Resamples a polyline so consecutive points are at most 0.5 apart.
fn densify(curve: &[P3]) -> Vec<P3> {
    let mut out = Vec::new();
    for w in curve.windows(2) {
        let steps = (norm(sub(w[1], w[0])) / 0.5).ceil().max(1.0) as usize;
        for k in 0..steps {
            out.push(add(w[0], scale(sub(w[1], w[0]), k as f64 / steps as f64)));
        }
    }
    if let Some(&last) = curve.last() {
        out.push(last);
    }
    out
}

fn torus_curve(dims: Dims, r: f64) -> Result<Vec<P3>> {
    let lo = r.floor() + MARGIN as f64;
    let half = (dims.nx.min(dims.ny) as f64 - 1.0) / 2.0;
    // Hole radius major - r must clear the tube diameter.
    let major = (half - lo - 1.0).min(4.0 * r + 8.0).floor();
    if major < 3.0 * r.floor() + 3.0 || (dims.nz as f64) < 2.0 * lo + 1.0 {
        return Err(does_not_fit("torus", dims, r));
    }
    let c = [
        (dims.nx / 2) as f64,
        (dims.ny / 2) as f64,
        (dims.nz / 2) as f64,
    ];
    let samples = (2.0 * std::f64::consts::PI * major * 4.0).ceil() as usize;
    Ok((0..=samples)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k % samples) as f64 / samples as f64;
            [c[0] + major * t.cos(), c[1] + major * t.sin(), c[2]]
        })
        .collect())
}

fn y_branch_curves(dims: Dims, r: f64) -> Result<Vec<Vec<P3>>> {
    let lo = r.floor() + MARGIN as f64;
    let hi_x = dims.nx as f64 - 1.0 - lo;
    let cy = (dims.ny / 2) as f64;
    let cz = (dims.nz / 2) as f64;
    let jx = ((lo + hi_x) / 2.0).floor();
    // Arms at +-45 degrees in the xy plane.
    let arm = (hi_x - jx).min(cy - lo).min(dims.ny as f64 - 1.0 - lo - cy).floor();
    if jx - lo < 2.0 * r + 4.0 || arm < 2.0 * r + 4.0 || (dims.nz as f64) < 2.0 * lo + 1.0 {
        return Err(does_not_fit("y-branch", dims, r));
    }
    let j = [jx, cy, cz];
    Ok(vec![
        vec![[lo, cy, cz], j],
        vec![j, [jx + arm, cy + arm, cz]],
        vec![j, [jx + arm, cy - arm, cz]],
    ])
}

/// One grown centerline: unit-spaced points, plus where it attaches.
struct Segment {
    points: Vec<P3>,
    parent: Option<usize>,
    junction: P3,
}

struct TreeGrower {
    dims: Dims,
    radius: f64,
    rng: Lcg,
    segments: Vec<Segment>,
    /// Tubes whose centerlines come closer than this touch or nearly touch.
    clearance: f64,
    lo: f64,
}

impl TreeGrower {
    const ATTEMPTS: usize = 24;
    const TURN: f64 = 0.08;

    fn new(dims: Dims, radius: f64, seed: u64) -> Self {
        TreeGrower {
            dims,
            radius,
            rng: Lcg::new(seed),
            segments: Vec::new(),
            clearance: 2.0 * radius.floor() + 5.0,
            lo: radius.floor() + MARGIN as f64 + 1.5,
        }
    }

    fn inside(&self, p: P3) -> bool {
        let hi = [self.dims.nx, self.dims.ny, self.dims.nz];
        (0..3).all(|a| p[a] >= self.lo && p[a] <= hi[a] as f64 - 1.0 - self.lo)
    }

    fn grace_steps(&self) -> usize {
        self.clearance.ceil() as usize + 1
    }

    /// Whether `p`, the `step`-th point of a new segment, keeps clear of
    /// everything grown so far and of its own earlier points.
    fn clear(&self, p: P3, step: usize, own: &[P3], parent: Option<usize>, junction: P3) -> bool {
        let c2 = self.clearance * self.clearance;
        let grace = step < self.grace_steps();
        let junction_zone2 = (self.clearance + 1.0).powi(2);
        for (si, seg) in self.segments.iter().enumerate() {
            let near_parent = grace && Some(si) == parent;
            for q in &seg.points {
                if near_parent && dist2(*q, junction) <= junction_zone2 {
                    continue;
                }
                if dist2(p, *q) <= c2 {
                    return false;
                }
            }
        }
        // Own points within a few clearances of arc length are neighbors along the curve.
        let skip = (2.0 * self.clearance).ceil() as usize;
        if own.len() > skip {
            for q in &own[..own.len() - skip] {
                if dist2(p, *q) <= c2 {
                    return false;
                }
            }
        }
        true
    }

    fn random_unit(&mut self) -> P3 {
        loop {
            let v = [
                self.rng.uniform(-1.0, 1.0),
                self.rng.uniform(-1.0, 1.0),
                self.rng.uniform(-1.0, 1.0),
            ];
            let n = norm(v);
            if n > 1e-3 && n <= 1.0 {
                return scale(v, 1.0 / n);
            }
        }
    }

    /// Random walk from `start` with bounded turning; `None` when the walk
    /// collides or ends too short.
    fn walk(&mut self, start: P3, dir: P3, length: usize, parent: Option<usize>) -> Option<Vec<P3>> {
        let mut points = vec![start];
        let mut d = dir;
        let grace = if parent.is_some() { self.grace_steps() } else { 0 };
        for step in 1..=length {
            if step > grace {
                let w = [
                    self.rng.uniform(-1.0, 1.0),
                    self.rng.uniform(-1.0, 1.0),
                    self.rng.uniform(-1.0, 1.0),
                ];
                d = normalize(add(d, scale(w, Self::TURN)));
            }
            let p = add(*points.last().unwrap(), d);
            if !self.inside(p) {
                break;
            }
            if !self.clear(p, step, &points, parent, start) {
                return None;
            }
            points.push(p);
        }
        if points.len() < grace + 4 {
            return None;
        }
        Some(points)
    }

    fn grow(mut self, branches: usize) -> Result<Vec<Vec<P3>>> {
        let Dims { nx, ny, nz } = self.dims;
        let c = [(ny / 2) as f64, (nz / 2) as f64];
        let trunk_start = [self.lo, c[0], c[1]];
        if !self.inside(trunk_start) || (nx as f64) < 2.0 * self.lo + 8.0 {
            return Err(does_not_fit("vessel tree", self.dims, self.radius));
        }
        let trunk_len = (2 * nx).max(8);
        let mut trunk = None;
        for _ in 0..Self::ATTEMPTS {
            if let Some(t) = self.walk(trunk_start, [1.0, 0.0, 0.0], trunk_len, None) {
                trunk = Some(t);
                break;
            }
        }
        let trunk = trunk.ok_or_else(|| does_not_fit("vessel tree", self.dims, self.radius))?;
        self.segments.push(Segment {
            points: trunk,
            parent: None,
            junction: trunk_start,
        });

        let min_dim = nx.min(ny).min(nz) as f64;
        let grace = self.grace_steps();
        for _ in 0..branches {
            for _ in 0..Self::ATTEMPTS {
                let si = self.rng.below(self.segments.len());
                let n = self.segments[si].points.len();
                let guard = grace + 2;
                if n <= 2 * guard {
                    continue;
                }
                let k = guard + self.rng.below(n - 2 * guard);
                let pts = &self.segments[si].points;
                let junction = pts[k];
                let tangent = normalize(sub(pts[k + 1], pts[k - 1]));
                let u = self.random_unit();
                let perp = sub(u, scale(tangent, dot(u, tangent)));
                if norm(perp) < 0.2 {
                    continue;
                }
                let dir = normalize(perp);
                let len = self.rng.uniform(min_dim / 4.0, min_dim / 1.5).round() as usize;
                if let Some(points) = self.walk(junction, dir, len.max(grace + 4), Some(si)) {
                    self.segments.push(Segment {
                        points,
                        parent: Some(si),
                        junction,
                    });
                    break;
                }
            }
        }
        debug_assert!(self.segments.iter().all(|s| s.parent.is_none() || s.points[0] == s.junction));
        Ok(self.segments.into_iter().map(|s| s.points).collect())
    }
}
