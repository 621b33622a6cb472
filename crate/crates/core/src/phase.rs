//! Tiles, wave packets, trees and sizes on the periodic square.
//!
//! A tile pairs a dyadic arc `ω = [l/2^m, (l+1)/2^m)` of directions (in
//! turns) and an annulus `ann = 4^a` (cycles per unit) with a rectangle of
//! the rotated dyadic grid: in coordinates along `e = e^{2πi c(ω)}` and
//! `e⊥`, `R = [l₁A, (l₁+1)A) × [l₂B, (l₂+1)B)` with `A = 1/ann` and
//! `B = 1/(|ω|·ann)`. Rectangles live in the plane; only tiles whose centre
//! lies in the ambient square are built. Packets are periodized onto the
//! grid by taking grid points inside one period of the window support.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directions::{wrap_turns, Direction, DirectionSet};
use crate::error::{Error, Result};
use crate::geometry::{oriented_rect, union_area_quads, Quad};
use crate::grid::GridField;
use crate::operators::windows::bump;

/// Largest tile family `build_tile_set` produces.
pub const MAX_TILES: usize = 1 << 20;
/// Tile sets up to this many tiles get exact size enumeration.
pub const EXACT_TREE_LIMIT: usize = 12;
/// Finest arc scale accepted.
pub const MAX_ARC_SCALE: u32 = 60;
/// Minimum number of grid cells a rectangle side must span.
pub const MIN_CELLS: f64 = 4.0;

/// Dyadic arc `[l/2^m, (l+1)/2^m)` of the circle `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicArc {
    pub m: u32,
    pub l: u64,
}

impl DyadicArc {
    pub fn new(m: u32, l: u64) -> Result<Self> {
        if m > MAX_ARC_SCALE || l >> m != 0 {
            return Err(Error::InvalidArgument(format!("no dyadic arc ({m}, {l})")));
        }
        Ok(Self { m, l })
    }

    pub fn left(&self) -> Self {
        Self { m: self.m + 1, l: 2 * self.l }
    }

    pub fn right(&self) -> Self {
        Self { m: self.m + 1, l: 2 * self.l + 1 }
    }

    pub fn len(&self) -> f64 {
        0.5f64.powi(self.m as i32)
    }

    pub fn start(&self) -> f64 {
        self.l as f64 * self.len()
    }

    pub fn center(&self) -> f64 {
        (self.l as f64 + 0.5) * self.len()
    }

    /// `(start, end)` as exact rationals.
    pub fn bounds(&self) -> (BigRational, BigRational) {
        let den = BigInt::one() << self.m;
        (
            BigRational::new(BigInt::from(self.l), den.clone()),
            BigRational::new(BigInt::from(self.l + 1), den),
        )
    }

    pub fn contains(&self, other: &DyadicArc) -> bool {
        self.m <= other.m && other.l >> (other.m - self.m) == self.l
    }

    /// Dyadic arcs are nested or disjoint.
    pub fn intersects(&self, other: &DyadicArc) -> bool {
        self.contains(other) || other.contains(self)
    }

    pub fn contains_angle(&self, theta: &BigRational) -> bool {
        let t = wrap_turns(theta);
        let (a, b) = self.bounds();
        a <= t && t < b
    }
}

/// Smallest arc of the family when all arcs share a point.
pub fn common_arc(arcs: impl IntoIterator<Item = DyadicArc>) -> Option<DyadicArc> {
    let arcs: Vec<DyadicArc> = arcs.into_iter().collect();
    let smallest = *arcs.iter().max_by_key(|a| a.m)?;
    arcs.iter().all(|a| a.contains(&smallest)).then_some(smallest)
}

/// A tile `s = R_s × Ω_s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tile {
    /// `ann = 4^a`.
    pub a: i32,
    pub arc: DyadicArc,
    pub l1: i64,
    pub l2: i64,
}

fn pow2_rational(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

impl Tile {
    pub fn ann(&self) -> f64 {
        4f64.powi(self.a)
    }

    pub fn omega1(&self) -> DyadicArc {
        self.arc.left()
    }

    pub fn omega2(&self) -> DyadicArc {
        self.arc.right()
    }

    /// `|ω|`.
    pub fn ecc(&self) -> f64 {
        self.arc.len()
    }

    /// Side along `e`: `ann⁻¹`.
    pub fn len_e(&self) -> f64 {
        4f64.powi(-self.a)
    }

    /// Side along `e⊥`: `(|ω|·ann)⁻¹`.
    pub fn len_perp(&self) -> f64 {
        2f64.powi(self.arc.m as i32) * 4f64.powi(-self.a)
    }

    /// Both sides as exact dyadic rationals.
    pub fn sides_exact(&self) -> (BigRational, BigRational) {
        let a = -2 * self.a as i64;
        (pow2_rational(a), pow2_rational(a + self.arc.m as i64))
    }

    pub fn area(&self) -> f64 {
        self.len_e() * self.len_perp()
    }

    pub fn axis(&self) -> [f64; 2] {
        let t = TAU * self.arc.center();
        [t.cos(), t.sin()]
    }

    pub fn center(&self) -> [f64; 2] {
        let e = self.axis();
        let u = (self.l1 as f64 + 0.5) * self.len_e();
        let w = (self.l2 as f64 + 0.5) * self.len_perp();
        [u * e[0] - w * e[1], u * e[1] + w * e[0]]
    }

    pub fn quad(&self) -> Quad {
        self.dilated_quad(1.0)
    }

    pub fn dilated_quad(&self, k: f64) -> Quad {
        oriented_rect(self.center(), self.axis(), k * self.len_e(), k * self.len_perp())
    }

    /// Radial range of the annular sector `Ω_s` in cycles per unit.
    pub fn sector_radii(&self) -> (f64, f64) {
        (0.75 * self.ann(), 1.75 * self.ann())
    }

    /// Packet frequency: radius `5/4·ann` at the centre of `ω₁`.
    pub fn packet_frequency(&self) -> [f64; 2] {
        let r = 1.25 * self.ann();
        let t = TAU * self.omega1().center();
        [r * t.cos(), r * t.sin()]
    }

    /// `(u, w)` coordinates of `p − centre` along `(e, e⊥)`.
    fn local(&self, p: [f64; 2]) -> (f64, f64) {
        let c = self.center();
        let e = self.axis();
        let d = [p[0] - c[0], p[1] - c[1]];
        (d[0] * e[0] + d[1] * e[1], -d[0] * e[1] + d[1] * e[0])
    }

    /// `R_self ⊆ k·R_outer`, with a relative slack of `1e-9`.
    pub fn rect_within(&self, outer: &Tile, k: f64) -> bool {
        let ha = 0.5 * k * outer.len_e() * (1.0 + 1e-9);
        let hb = 0.5 * k * outer.len_perp() * (1.0 + 1e-9);
        self.quad().iter().all(|&p| {
            let (u, w) = outer.local(p);
            u.abs() <= ha && w.abs() <= hb
        })
    }

    /// Half extents along `x` and `y` of `k·R`.
    fn half_extents(&self, k: f64) -> [f64; 2] {
        let e = self.axis();
        let (a, b) = (0.5 * k * self.len_e(), 0.5 * k * self.len_perp());
        [a * e[0].abs() + b * e[1].abs(), a * e[1].abs() + b * e[0].abs()]
    }
}

/// A tile family on an ambient periodic square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileSet {
    pub n: usize,
    pub side: f64,
    pub tiles: Vec<Tile>,
}

impl TileSet {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let set: TileSet = serde_json::from_str(s)?;
        for t in &set.tiles {
            DyadicArc::new(t.arc.m, t.arc.l)?;
        }
        Ok(set)
    }
}

/// All tiles with `a ∈ anns`, `m ∈ arc_scales`, every arc at scale `m`, and
/// every rotated-grid rectangle whose centre lies in `[0, side)²`. Sorted.
pub fn build_tile_set(anns: &[i32], arc_scales: &[u32], n: usize, side: f64) -> Result<TileSet> {
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::InvalidGrid(format!("side must be positive, got {side}")));
    }
    let mut tiles = Vec::new();
    let mut anns = anns.to_vec();
    anns.sort_unstable();
    anns.dedup();
    let mut scales = arc_scales.to_vec();
    scales.sort_unstable();
    scales.dedup();
    let corners = [[0.0, 0.0], [side, 0.0], [0.0, side], [side, side]];
    for &a in &anns {
        for &m in &scales {
            if m > MAX_ARC_SCALE || (1u64 << m) as usize > MAX_TILES {
                return Err(Error::SizeOverflow(format!("arc scale {m} has too many arcs")));
            }
            for l in 0..1u64 << m {
                let proto = Tile { a, arc: DyadicArc { m, l }, l1: 0, l2: 0 };
                let e = proto.axis();
                let (la, lb) = (proto.len_e(), proto.len_perp());
                let us = corners.map(|p| p[0] * e[0] + p[1] * e[1]);
                let ws = corners.map(|p| -p[0] * e[1] + p[1] * e[0]);
                let range = |vals: [f64; 4], len: f64| {
                    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    ((lo / len - 0.5).floor() as i64, (hi / len - 0.5).ceil() as i64)
                };
                let (u0, u1) = range(us, la);
                let (w0, w1) = range(ws, lb);
                let estimate = (u1 - u0 + 1) as f64 * (w1 - w0 + 1) as f64;
                if tiles.len() as f64 + estimate / 4.0 > MAX_TILES as f64 {
                    return Err(Error::SizeOverflow(format!("more than {MAX_TILES} tiles")));
                }
                for l1 in u0..=u1 {
                    for l2 in w0..=w1 {
                        let t = Tile { l1, l2, ..proto };
                        let c = t.center();
                        if (0.0..side).contains(&c[0]) && (0.0..side).contains(&c[1]) {
                            tiles.push(t);
                        }
                    }
                }
                if tiles.len() > MAX_TILES {
                    return Err(Error::SizeOverflow(format!("more than {MAX_TILES} tiles")));
                }
            }
        }
    }
    tiles.sort();
    Ok(TileSet { n, side, tiles })
}

/// Grid samples `(index, value)` of a realized packet.
#[derive(Clone, Debug, PartialEq)]
pub struct Packet {
    pub support: Vec<(usize, Complex64)>,
}

/// Why a tile has no packet on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedTile {
    pub id: usize,
    pub reason: String,
}

/// Packets of a tile set realized on an `n × n` grid of the given side.
pub struct PacketBank {
    n: usize,
    side: f64,
    packets: Vec<Option<Packet>>,
    skipped: Vec<SkippedTile>,
}

/// Half-open membership `[−h, h)` shifted by `1e-9·h` so that grid points
/// on an edge are classified the same way under rounding.
pub fn in_half_open(x: f64, half: f64) -> bool {
    let d = 1e-9 * half;
    -half - d <= x && x < half - d
}

/// Grid cells whose points lie in `k·R` (half-open in local coordinates),
/// with their local coordinates. `None` when `k·R` does not fit in one period.
fn cells_in(t: &Tile, k: f64, n: usize, side: f64) -> Option<Vec<(usize, f64, f64)>> {
    let h = side / n as f64;
    let ext = t.half_extents(k);
    // Axis-aligned boxes pick up round-off from the rotation.
    let fits = |e: f64| 2.0 * e <= side * (1.0 + 1e-12);
    if !fits(ext[0]) || !fits(ext[1]) {
        return None;
    }
    let c = t.center();
    let (ha, hb) = (0.5 * k * t.len_e(), 0.5 * k * t.len_perp());
    let mut out = Vec::new();
    // One spare cell on each side absorbs rounding of the box corners.
    // Boxes reaching a full period use the period centred on the tile.
    let span = |c: f64, ext: f64| {
        let lo = ((c - ext) / h).floor() as i64 - 1;
        let hi = ((c + ext) / h).ceil() as i64 + 1;
        if hi - lo + 1 >= n as i64 {
            let mid = (c / h).round() as i64 - n as i64 / 2;
            (mid, mid + n as i64 - 1)
        } else {
            (lo, hi)
        }
    };
    let (i0, i1) = span(c[0], ext[0]);
    let (j0, j1) = span(c[1], ext[1]);
    for i in i0..=i1 {
        for j in j0..=j1 {
            let (u, w) = t.local([i as f64 * h, j as f64 * h]);
            if in_half_open(u, ha) && in_half_open(w, hb) {
                let idx = i.rem_euclid(n as i64) as usize * n + j.rem_euclid(n as i64) as usize;
                out.push((idx, u, w));
            }
        }
    }
    Some(out)
}

fn realize(t: &Tile, n: usize, side: f64) -> std::result::Result<Packet, String> {
    let h = side / n as f64;
    if t.len_e() / h < MIN_CELLS || t.len_perp() / h < MIN_CELLS {
        return Err(format!("rectangle spans fewer than {MIN_CELLS} cells"));
    }
    if 1.25 * t.ann() >= n as f64 / (2.0 * side) {
        return Err("packet frequency at or above Nyquist".into());
    }
    let cells = cells_in(t, 2.0, n, side).ok_or_else(|| "window exceeds one period".to_string())?;
    let nu = t.packet_frequency();
    let e = t.axis();
    let (la, lb) = (t.len_e(), t.len_perp());
    let mut support: Vec<(usize, Complex64)> = cells
        .into_iter()
        .filter_map(|(idx, u, w)| {
            let amp = bump(u / la) * bump(w / lb);
            if amp == 0.0 {
                return None;
            }
            let d = [u * e[0] - w * e[1], u * e[1] + w * e[0]];
            let phase = TAU * (nu[0] * d[0] + nu[1] * d[1]);
            Some((idx, Complex64::from_polar(amp, phase)))
        })
        .collect();
    let norm = (support.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>() * h * h).sqrt();
    if norm == 0.0 {
        return Err("window has no grid samples".into());
    }
    for (_, z) in &mut support {
        *z /= norm;
    }
    support.sort_by_key(|(i, _)| *i);
    Ok(Packet { support })
}

impl PacketBank {
    pub fn new(set: &TileSet) -> Result<Self> {
        if set.n == 0 || !(set.side > 0.0) {
            return Err(Error::InvalidGrid("tile set needs a grid".into()));
        }
        let results: Vec<std::result::Result<Packet, String>> =
            set.tiles.par_iter().map(|t| realize(t, set.n, set.side)).collect();
        let mut packets = Vec::with_capacity(results.len());
        let mut skipped = Vec::new();
        for (id, r) in results.into_iter().enumerate() {
            match r {
                Ok(p) => packets.push(Some(p)),
                Err(reason) => {
                    skipped.push(SkippedTile { id, reason });
                    packets.push(None);
                }
            }
        }
        Ok(Self {
            n: set.n,
            side: set.side,
            packets,
            skipped,
        })
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn packet(&self, id: usize) -> Option<&Packet> {
        self.packets.get(id).and_then(|p| p.as_ref())
    }

    pub fn skipped(&self) -> &[SkippedTile] {
        &self.skipped
    }

    fn check(&self, f: &GridField) -> Result<()> {
        if f.n() != self.n || f.side() != self.side {
            return Err(Error::GridMismatch(format!(
                "packets realized on n={} side={}, field has n={} side={}",
                self.n,
                self.side,
                f.n(),
                f.side()
            )));
        }
        Ok(())
    }

    /// `φ_s` as a field.
    pub fn packet_field(&self, id: usize) -> Result<GridField> {
        let mut data = vec![Complex64::new(0.0, 0.0); self.n * self.n];
        if let Some(p) = self.packet(id) {
            for &(i, z) in &p.support {
                data[i] = z;
            }
        }
        GridField::new(self.n, self.side, data)
    }

    /// `⟨f, φ_s⟩` for every tile; skipped tiles get `0`.
    pub fn coefficients(&self, f: &GridField) -> Result<Vec<Complex64>> {
        self.check(f)?;
        let h2 = f.cell_area();
        let d = f.data();
        Ok(self
            .packets
            .par_iter()
            .map(|p| match p {
                Some(p) => p.support.iter().map(|&(i, z)| d[i] * z.conj()).sum::<Complex64>() * h2,
                None => Complex64::new(0.0, 0.0),
            })
            .collect())
    }

    /// `Σ_{s ∈ subset} c_s φ_s`.
    pub fn synthesize(&self, coeffs: &[Complex64], subset: &[usize]) -> Result<GridField> {
        let mut data = vec![Complex64::new(0.0, 0.0); self.n * self.n];
        for &s in subset {
            if let Some(p) = self.packet(s) {
                for &(i, z) in &p.support {
                    data[i] += coeffs[s] * z;
                }
            }
        }
        GridField::new(self.n, self.side, data)
    }

    /// Largest `|⟨φ_s₀, φ_s⟩|` over tiles at the same annulus whose arcs are
    /// disjoint from that of `s₀`.
    pub fn sector_leakage(&self, set: &TileSet, s0: usize) -> Result<f64> {
        let f = self.packet_field(s0)?;
        let c = self.coefficients(&f)?;
        let t0 = set.tiles[s0];
        Ok(set
            .tiles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.a == t0.a && !t.arc.intersects(&t0.arc))
            .map(|(i, _)| c[i].norm())
            .fold(0.0, f64::max))
    }
}

/// Packet coefficients with the tiles that could not be realized.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketCoefficients {
    pub values: Vec<Complex64>,
    pub skipped: Vec<SkippedTile>,
}

pub fn packet_coefficients(f: &GridField, set: &TileSet) -> Result<PacketCoefficients> {
    if f.n() != set.n || f.side() != set.side {
        return Err(Error::GridMismatch("field and tile set ambient differ".into()));
    }
    let bank = PacketBank::new(set)?;
    Ok(PacketCoefficients {
        values: bank.coefficients(f)?,
        skipped: bank.skipped().to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeKind {
    Lacunary,
    Overlapping,
    Conical,
}

impl TreeKind {
    pub fn name(&self) -> &'static str {
        match self {
            TreeKind::Lacunary => "lacunary",
            TreeKind::Overlapping => "overlapping",
            TreeKind::Conical => "conical",
        }
    }
}

/// A tree: tile ids, its class and a top arc lying in the defining
/// intersection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub tiles: Vec<usize>,
    pub kind: TreeKind,
    pub top: DyadicArc,
}

/// Strongest class of the family: conical (all `ω₂` equal), else lacunary
/// (`∩ω₂ ≠ ∅`), else overlapping (`∩ω₁ ≠ ∅`). The witness is the common
/// arc, or the smallest arc in the intersection.
pub fn classify_tree(tiles: &[Tile]) -> Option<(TreeKind, DyadicArc)> {
    let first = tiles.first()?;
    if tiles.iter().all(|t| t.arc == first.arc) {
        return Some((TreeKind::Conical, first.omega2()));
    }
    if let Some(w) = common_arc(tiles.iter().map(|t| t.omega2())) {
        return Some((TreeKind::Lacunary, w));
    }
    common_arc(tiles.iter().map(|t| t.omega1())).map(|w| (TreeKind::Overlapping, w))
}

/// Whether the family satisfies the defining property of `kind` with `top`
/// in the intersection. Conical trees satisfy all three.
pub fn satisfies(tiles: &[Tile], kind: TreeKind, top: &DyadicArc) -> bool {
    !tiles.is_empty()
        && match kind {
            TreeKind::Conical => tiles.iter().all(|t| t.omega2() == *top),
            TreeKind::Lacunary => tiles.iter().all(|t| t.omega2().contains(top)),
            TreeKind::Overlapping => tiles.iter().all(|t| t.omega1().contains(top)),
        }
}

fn pick(tiles: &[Tile], ids: &[usize]) -> Vec<Tile> {
    ids.iter().map(|&i| tiles[i]).collect()
}

impl Tree {
    pub fn from_tiles(all: &[Tile], ids: Vec<usize>) -> Option<Tree> {
        let (kind, top) = classify_tree(&pick(all, &ids))?;
        Some(Tree { tiles: ids, kind, top })
    }

    pub fn is_valid(&self, all: &[Tile]) -> bool {
        let ts = pick(all, &self.tiles);
        classify_tree(&ts).map(|(k, _)| k) == Some(self.kind) && satisfies(&ts, self.kind, &self.top)
    }
}

/// `|sh(subset)|`, the area of the union of the rectangles.
pub fn shadow_area(tiles: &[Tile], subset: &[usize]) -> f64 {
    let quads: Vec<Quad> = subset.iter().map(|&i| tiles[i].quad()).collect();
    union_area_quads(&quads)
}

fn mass(coeffs: &[Complex64], subset: &[usize]) -> f64 {
    subset.iter().map(|&i| coeffs[i].norm_sqr()).sum()
}

/// `(Σ_{s∈T} |c_s|² / |sh(T)|)^{1/2}`.
pub fn tree_size(tiles: &[Tile], tree: &[usize], coeffs: &[Complex64]) -> f64 {
    if tree.is_empty() {
        return 0.0;
    }
    (mass(coeffs, tree) / shadow_area(tiles, tree)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeMode {
    Lacunary,
    Conical,
}

/// A size value with the tree attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSize {
    pub value: f64,
    /// `true` when every admissible subtree was examined.
    pub exact: bool,
    pub witness: Vec<usize>,
}

/// Memoized shadow areas keyed by sorted tile ids.
#[derive(Default)]
pub struct ShadowCache {
    map: Mutex<HashMap<Vec<usize>, f64>>,
}

impl ShadowCache {
    pub fn area(&self, tiles: &[Tile], subset: &[usize]) -> f64 {
        if let Some(a) = self.map.lock().unwrap().get(subset) {
            return *a;
        }
        let a = shadow_area(tiles, subset);
        self.map.lock().unwrap().insert(subset.to_vec(), a);
        a
    }
}

fn admissible(tiles: &[Tile], sub: &[usize], mode: SizeMode) -> bool {
    let ts = pick(tiles, sub);
    match mode {
        SizeMode::Conical => ts.iter().all(|t| t.arc == ts[0].arc),
        SizeMode::Lacunary => common_arc(ts.iter().map(|t| t.omega2())).is_some(),
    }
}

/// Candidate trees inside `subset`. Up to `exact_limit` tiles, every
/// admissible subset; otherwise, per column `{s : ω₂ₛ ⊇ ω*}` (lacunary) or
/// `{s : ω₂ₛ = ω*}` (conical), the full column, the singletons and the
/// down-sets `{s : R_s ⊆ R_s₀}`.
fn candidates(tiles: &[Tile], subset: &[usize], mode: SizeMode, exact_limit: usize) -> (Vec<Vec<usize>>, bool) {
    let mut sub = subset.to_vec();
    sub.sort_unstable();
    let k = sub.len();
    if k <= exact_limit {
        let out = (1u32..1 << k)
            .map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).map(|i| sub[i]).collect::<Vec<_>>())
            .filter(|s| admissible(tiles, s, mode))
            .collect();
        return (out, true);
    }
    let mut tops: Vec<DyadicArc> = sub.iter().map(|&i| tiles[i].omega2()).collect();
    tops.sort_unstable();
    tops.dedup();
    let mut out: Vec<Vec<usize>> = sub.iter().map(|&i| vec![i]).collect();
    for top in tops {
        let column: Vec<usize> = sub
            .iter()
            .copied()
            .filter(|&i| match mode {
                SizeMode::Lacunary => tiles[i].omega2().contains(&top),
                SizeMode::Conical => tiles[i].omega2() == top,
            })
            .collect();
        for &s0 in &column {
            let down: Vec<usize> = column
                .iter()
                .copied()
                .filter(|&j| tiles[j].rect_within(&tiles[s0], 1.0))
                .collect();
            if down.len() > 1 {
                out.push(down);
            }
        }
        out.push(column);
    }
    out.sort();
    out.dedup();
    (out, false)
}

fn better(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> bool {
    b.0 > a.0 || (b.0 == a.0 && b.1 < a.1)
}

fn set_size_with(
    tiles: &[Tile],
    subset: &[usize],
    coeffs: &[Complex64],
    mode: SizeMode,
    exact_limit: usize,
    cache: &ShadowCache,
) -> TreeSize {
    if subset.is_empty() {
        return TreeSize { value: 0.0, exact: true, witness: Vec::new() };
    }
    let (cands, exact) = candidates(tiles, subset, mode, exact_limit);
    let scored: Vec<(f64, Vec<usize>)> = cands
        .into_par_iter()
        .map(|c| ((mass(coeffs, &c) / cache.area(tiles, &c)).sqrt(), c))
        .collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for s in scored {
        if better(&best, &s) {
            best = s;
        }
    }
    TreeSize { value: best.0, exact, witness: best.1 }
}

/// Size of a tile set: sup of `tree_size` over lacunary (or conical)
/// subtrees. Exact up to [`EXACT_TREE_LIMIT`] tiles, a lower bound beyond.
pub fn set_size(tiles: &[Tile], subset: &[usize], coeffs: &[Complex64], mode: SizeMode) -> TreeSize {
    set_size_with(tiles, subset, coeffs, mode, EXACT_TREE_LIMIT, &ShadowCache::default())
}

/// [`set_size`] with an explicit enumeration threshold.
pub fn set_size_limited(
    tiles: &[Tile],
    subset: &[usize],
    coeffs: &[Complex64],
    mode: SizeMode,
    exact_limit: usize,
) -> TreeSize {
    set_size_with(tiles, subset, coeffs, mode, exact_limit, &ShadowCache::default())
}

pub fn lacunary_size(tiles: &[Tile], subset: &[usize], coeffs: &[Complex64]) -> TreeSize {
    set_size(tiles, subset, coeffs, SizeMode::Lacunary)
}

pub fn conical_size(tiles: &[Tile], subset: &[usize], coeffs: &[Complex64]) -> TreeSize {
    set_size(tiles, subset, coeffs, SizeMode::Conical)
}

/// Stored evidence that a tree passed the selection test at level `sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub sigma: f64,
    pub mass: f64,
    pub shadow: f64,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.mass >= self.sigma * self.sigma / 4.0 * self.shadow
    }

    /// Recomputes mass and shadow of `selected` and checks the inequality.
    pub fn verify(&self, tiles: &[Tile], coeffs: &[Complex64], selected: &[usize]) -> bool {
        self.holds() && mass(coeffs, selected) == self.mass && shadow_area(tiles, selected) == self.shadow
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestTree {
    pub tree: Tree,
    /// The conical tree that was saturated, when saturation is on.
    pub seed: Option<Vec<usize>>,
    /// Certificate of the selected tree (the seed, when present).
    pub certificate: Certificate,
}

impl ForestTree {
    pub fn selected(&self) -> &[usize] {
        self.seed.as_deref().unwrap_or(&self.tree.tiles)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub sigma: f64,
    pub trees: Vec<ForestTree>,
    /// Tiles left after this round.
    pub residual: Vec<usize>,
    /// Size of the residual under the same estimator.
    pub residual_size: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub mode: SizeMode,
    pub saturate: bool,
    pub sigma0: f64,
    pub rounds: Vec<Round>,
    pub residual: Vec<usize>,
    /// Whether every size evaluation was exhaustive.
    pub exact: bool,
}

impl Forest {
    pub fn trees(&self) -> impl Iterator<Item = &ForestTree> {
        self.rounds.iter().flat_map(|r| r.trees.iter())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Options for [`greedy_size_decompose`].
#[derive(Clone, Copy, Debug)]
pub struct GreedyOptions {
    pub mode: SizeMode,
    /// Conical mode only: remove the saturation of each selected tree.
    pub saturate: bool,
    pub exact_limit: usize,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            mode: SizeMode::Lacunary,
            saturate: false,
            exact_limit: EXACT_TREE_LIMIT,
        }
    }
}

/// Halving-σ extraction. `σ₀` is the size of the full set rounded up to a
/// power of two; at each level the qualifying candidate with the largest
/// mass (ties: lexicographically smallest ids) is removed until none
/// qualifies; stops once `σ < 2⁻²⁰·σ₀` or no tiles remain.
pub fn greedy_size_decompose(
    tiles: &[Tile],
    subset: &[usize],
    coeffs: &[Complex64],
    opts: GreedyOptions,
) -> Result<Forest> {
    if opts.saturate && opts.mode != SizeMode::Conical {
        return Err(Error::InvalidArgument("saturation needs conical mode".into()));
    }
    let cache = ShadowCache::default();
    let mut stock: Vec<usize> = subset.to_vec();
    stock.sort_unstable();
    stock.dedup();
    let top = set_size_with(tiles, &stock, coeffs, opts.mode, opts.exact_limit, &cache);
    let mut exact = top.exact;
    let mut forest = Forest {
        mode: opts.mode,
        saturate: opts.saturate,
        sigma0: 0.0,
        rounds: Vec::new(),
        residual: stock.clone(),
        exact,
    };
    if !(top.value > 0.0) {
        return Ok(forest);
    }
    let sigma0 = 2f64.powi(top.value.log2().ceil() as i32);
    forest.sigma0 = sigma0;
    let mut sigma = sigma0;
    while sigma >= sigma0 * 2f64.powi(-20) && !stock.is_empty() {
        let mut trees = Vec::new();
        loop {
            let (cands, ex) = candidates(tiles, &stock, opts.mode, opts.exact_limit);
            exact &= ex;
            let scored: Vec<(f64, f64, Vec<usize>)> = cands
                .into_par_iter()
                .map(|c| (mass(coeffs, &c), cache.area(tiles, &c), c))
                .collect();
            let mut best: Option<(f64, f64, Vec<usize>)> = None;
            for (m, a, c) in scored {
                if m < sigma * sigma / 4.0 * a {
                    continue;
                }
                let wins = match &best {
                    None => true,
                    Some((bm, _, bc)) => m > *bm || (m == *bm && c < *bc),
                };
                if wins {
                    best = Some((m, a, c));
                }
            }
            let Some((m, a, chosen)) = best else { break };
            let certificate = Certificate { sigma, mass: m, shadow: a };
            let (tree_ids, seed) = if opts.saturate {
                let sat = saturate_conical(tiles, &chosen, &stock)?;
                (sat.tree.tiles, Some(chosen))
            } else {
                (chosen, None)
            };
            let tree = Tree::from_tiles(tiles, tree_ids).expect("candidates are trees");
            stock.retain(|s| tree.tiles.binary_search(s).is_err());
            trees.push(ForestTree { tree, seed, certificate });
        }
        let rs = set_size_with(tiles, &stock, coeffs, opts.mode, opts.exact_limit, &cache);
        exact &= rs.exact;
        forest.rounds.push(Round {
            sigma,
            trees,
            residual: stock.clone(),
            residual_size: rs.value.max(0.0),
        });
        sigma /= 2.0;
    }
    forest.residual = stock;
    forest.exact = exact;
    Ok(forest)
}

/// Result of saturating a conical tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub tree: Tree,
    pub seed_shadow: f64,
    pub shadow: f64,
    /// `|sh(T)| / |sh(t)|`.
    pub ratio: f64,
}

/// Tiles of `t` whose rectangle is not strictly inside another one of `t`.
pub fn maximal_tiles(tiles: &[Tile], t: &[usize]) -> Vec<usize> {
    t.iter()
        .copied()
        .filter(|&s| {
            !t.iter()
                .any(|&o| o != s && tiles[s].rect_within(&tiles[o], 1.0) && !tiles[o].rect_within(&tiles[s], 1.0))
        })
        .collect()
}

/// Membership test of the saturation: `ω₁ₛ′ ⊇ ω₁` of the conical tree and
/// `R_s′ ⊆ 10·R_s` (each side dilated tenfold) for a maximal `s`.
pub fn saturation_predicate(tiles: &[Tile], maxima: &[usize], omega1: &DyadicArc, cand: usize) -> bool {
    tiles[cand].omega1().contains(omega1) && maxima.iter().any(|&s| tiles[cand].rect_within(&tiles[s], 10.0))
}

/// `T(t) = t ∪ {s′ ∈ ambient : ω₁ₛ′ ⊇ ω₁ₜ, R_s′ ⊆ 10·R_s, s ∈ t_max}`.
pub fn saturate_conical(tiles: &[Tile], t: &[usize], ambient: &[usize]) -> Result<Saturation> {
    let ts = pick(tiles, t);
    match classify_tree(&ts) {
        Some((TreeKind::Conical, _)) => {}
        _ => return Err(Error::NotConical),
    }
    let omega1 = ts[0].omega1();
    let maxima = maximal_tiles(tiles, t);
    let mut ids: Vec<usize> = t.to_vec();
    ids.extend(
        ambient
            .iter()
            .copied()
            .filter(|&s| saturation_predicate(tiles, &maxima, &omega1, s)),
    );
    ids.sort_unstable();
    ids.dedup();
    let tree = Tree::from_tiles(tiles, ids).expect("saturation shares ω₁");
    let seed_shadow = shadow_area(tiles, t);
    let shadow = shadow_area(tiles, &tree.tiles);
    Ok(Saturation {
        ratio: shadow / seed_shadow,
        tree,
        seed_shadow,
        shadow,
    })
}

/// Measured Bessel constant of a packet family: `λ_max` of `f ↦ Σ ⟨f,φ_s⟩φ_s`
/// by power iteration, and the best Rayleigh ratio over random fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameConstant {
    pub power: f64,
    pub random_max: f64,
    pub trials: usize,
    pub iterations: usize,
}

impl FrameConstant {
    pub fn value(&self) -> f64 {
        self.power
    }
}

fn random_field(n: usize, side: f64, rng: &mut ChaCha8Rng) -> Result<GridField> {
    GridField::from_fn(n, side, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn frame_constant(bank: &PacketBank, subset: &[usize], seed: u64, trials: usize) -> Result<FrameConstant> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio = |f: &GridField| -> Result<f64> {
        let c = bank.coefficients(f)?;
        Ok(mass(&c, subset) / f.norm_l2().powi(2))
    };
    let mut random_max = 0.0f64;
    for _ in 0..trials {
        random_max = random_max.max(ratio(&random_field(bank.n, bank.side, &mut rng)?)?);
    }
    let mut f = random_field(bank.n, bank.side, &mut rng)?;
    let mut power = 0.0;
    let mut iterations = 0;
    for it in 1..=500 {
        iterations = it;
        let c = bank.coefficients(&f)?;
        let g = bank.synthesize(&c, subset)?;
        let nf = f.norm_l2();
        let ng = g.norm_l2();
        if ng == 0.0 {
            power = 0.0;
            break;
        }
        let next = ratio(&f)?;
        let done = (next - power).abs() <= 1e-13 * next.max(1e-300);
        power = power.max(next);
        f = g.scale(Complex64::new(nf / ng, 0.0));
        if done {
            break;
        }
    }
    Ok(FrameConstant {
        power,
        random_max,
        trials,
        iterations,
    })
}

fn direction_in(arc: &DyadicArc, v: &Direction) -> bool {
    arc.contains_angle(v.angle())
}

/// Per-direction model fields and their pointwise maximum modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSum {
    pub per_direction: Vec<GridField>,
    pub maximal: GridField,
}

fn maximal_of(fields: &[GridField], n: usize, side: f64) -> Result<GridField> {
    let mut m = vec![0.0f64; n * n];
    for f in fields {
        for (a, z) in m.iter_mut().zip(f.data()) {
            *a = a.max(z.norm());
        }
    }
    GridField::from_real(n, side, &m)
}

/// `H_S f(x, v) = Σ_s c_s φ_s(x) 1_{ω₂ₛ}(v)`, one tile at a time.
pub fn model_sum_from_coeffs(
    bank: &PacketBank,
    coeffs: &[Complex64],
    tiles: &[Tile],
    subset: &[usize],
    v: &DirectionSet,
) -> Result<ModelSum> {
    let per_direction = v
        .dirs()
        .par_iter()
        .map(|d| {
            let active: Vec<usize> = subset.iter().copied().filter(|&s| direction_in(&tiles[s].omega2(), d)).collect();
            bank.synthesize(coeffs, &active)
        })
        .collect::<Result<Vec<_>>>()?;
    let maximal = maximal_of(&per_direction, bank.n, bank.side)?;
    Ok(ModelSum { per_direction, maximal })
}

/// Same sum, first grouping tiles by `ω₂` and adding the group fields.
pub fn model_sum_grouped(
    bank: &PacketBank,
    coeffs: &[Complex64],
    tiles: &[Tile],
    subset: &[usize],
    v: &DirectionSet,
) -> Result<ModelSum> {
    let mut groups: BTreeMap<DyadicArc, Vec<usize>> = BTreeMap::new();
    for &s in subset {
        groups.entry(tiles[s].omega2()).or_default().push(s);
    }
    let fields = groups
        .par_iter()
        .map(|(arc, ids)| Ok((*arc, bank.synthesize(coeffs, ids)?)))
        .collect::<Result<Vec<_>>>()?;
    let per_direction = v
        .dirs()
        .iter()
        .map(|d| {
            let mut acc = GridField::zeros(bank.n, bank.side)?;
            for (arc, g) in &fields {
                if direction_in(arc, d) {
                    acc = acc.add(g)?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let maximal = maximal_of(&per_direction, bank.n, bank.side)?;
    Ok(ModelSum { per_direction, maximal })
}

pub fn model_sum(bank: &PacketBank, f: &GridField, tiles: &[Tile], subset: &[usize], v: &DirectionSet) -> Result<ModelSum> {
    let c = bank.coefficients(f)?;
    model_sum_from_coeffs(bank, &c, tiles, subset, v)
}

/// `SQ` and `SC` from given coefficients. Tiles whose rectangle does not
/// fit in one period contribute only when their coefficient vanishes.
pub fn square_ops_from_coeffs(
    n: usize,
    side: f64,
    coeffs: &[Complex64],
    tiles: &[Tile],
    subset: &[usize],
    v: &DirectionSet,
) -> Result<(GridField, GridField)> {
    let mut cells: HashMap<usize, Vec<usize>> = HashMap::new();
    for &s in subset {
        if coeffs[s] == Complex64::zero() {
            continue;
        }
        let c = cells_in(&tiles[s], 1.0, n, side).ok_or_else(|| {
            Error::InvalidArgument(format!("tile {s} has a rectangle wider than one period"))
        })?;
        cells.insert(s, c.into_iter().map(|(i, _, _)| i).collect());
    }
    let per_dir: Vec<(Vec<f64>, Vec<f64>)> = v
        .dirs()
        .par_iter()
        .map(|d| {
            let mut groups: BTreeMap<DyadicArc, Vec<f64>> = BTreeMap::new();
            let mut total = vec![0.0; n * n];
            for &s in subset {
                let Some(cs) = cells.get(&s) else { continue };
                if !direction_in(&tiles[s].omega2(), d) {
                    continue;
                }
                let w = coeffs[s].norm_sqr() / tiles[s].area();
                let g = groups.entry(tiles[s].arc).or_insert_with(|| vec![0.0; n * n]);
                for &i in cs {
                    total[i] += w;
                    g[i] += w;
                }
            }
            let mut single = vec![0.0f64; n * n];
            for g in groups.values() {
                for (a, b) in single.iter_mut().zip(g) {
                    *a = a.max(*b);
                }
            }
            (total, single)
        })
        .collect();
    let mut sq = vec![0.0f64; n * n];
    let mut sc = vec![0.0f64; n * n];
    for (t, s) in &per_dir {
        for i in 0..n * n {
            sq[i] = sq[i].max(t[i]);
            sc[i] = sc[i].max(s[i]);
        }
    }
    let root = |v: Vec<f64>| v.into_iter().map(f64::sqrt).collect::<Vec<_>>();
    Ok((GridField::from_real(n, side, &root(sq))?, GridField::from_real(n, side, &root(sc))?))
}

pub fn square_ops(
    bank: &PacketBank,
    f: &GridField,
    tiles: &[Tile],
    subset: &[usize],
    v: &DirectionSet,
) -> Result<(GridField, GridField)> {
    let c = bank.coefficients(f)?;
    square_ops_from_coeffs(bank.n, bank.side, &c, tiles, subset, v)
}

/// Splits tiles by the parity of the arc scale and of the arc index. Within
/// a part, distinct scales differ by a factor of at least four and arcs of
/// one scale are never adjacent.
pub fn two_sparse_split(tiles: &[Tile], subset: &[usize]) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(); 4];
    for &s in subset {
        let a = tiles[s].arc;
        parts[(a.m % 2) as usize * 2 + (a.l % 2) as usize].push(s);
    }
    parts
}

/// Writes `tile_id,re,im` rows.
pub fn write_coefficients_csv<W: Write>(w: W, coeffs: &[Complex64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["tile_id", "re", "im"]).map_err(|e| Error::Format(e.to_string()))?;
    for (i, c) in coeffs.iter().enumerate() {
        wtr.write_record([i.to_string(), c.re.to_string(), c.im.to_string()])
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `tile_id,re,im` rows into a dense vector of length `len`.
pub fn read_coefficients_csv<R: Read>(r: R, len: usize) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let mut rdr = csv::Reader::from_reader(r);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let field = |k: usize| rec.get(k).ok_or_else(|| Error::Format("short coefficient row".into()));
        let id: usize = field(0)?.parse().map_err(|_| Error::Format("bad tile id".into()))?;
        let re: f64 = field(1)?.parse().map_err(|_| Error::Format("bad real part".into()))?;
        let im: f64 = field(2)?.parse().map_err(|_| Error::Format("bad imaginary part".into()))?;
        if id >= len {
            return Err(Error::Format(format!("tile id {id} out of range")));
        }
        out[id] = Complex64::new(re, im);
    }
    Ok(out)
}

/// Random tiles with coefficients for experiments: arcs at scales `0..=3`,
/// annuli `a ∈ {−1, 0}`, rectangles near the origin.
pub fn random_instance(seed: u64, count: usize) -> (Vec<Tile>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tiles = Vec::with_capacity(count);
    while tiles.len() < count {
        let m = rng.gen_range(0..=3u32);
        let t = Tile {
            a: rng.gen_range(-1..=0),
            arc: DyadicArc { m, l: rng.gen_range(0..1u64 << m) },
            l1: rng.gen_range(-2..=2),
            l2: rng.gen_range(-2..=2),
        };
        if !tiles.contains(&t) {
            tiles.push(t);
        }
    }
    let coeffs = (0..count)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    (tiles, coeffs)
}
