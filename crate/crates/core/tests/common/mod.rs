//! Independent brute-force oracles shared by integration tests.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use maxdir::bmo::{DyadicRect, ProductCoefficients};
use maxdir::directions::{circular_distance, is_lacunary_with_node, Direction, DirectionSet};
use maxdir::grid::GridField;
use maxdir::phase::Tile;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_field(n: usize, side: f64, seed: u64) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridField::from_fn(n, side, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .unwrap()
}

pub fn random_real(n: usize, side: f64, seed: u64) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridField::from_fn(n, side, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).unwrap()
}

fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Displacement of `p` from `c` reduced to the nearest periodic image.
fn min_image(p: f64, c: f64, side: f64) -> f64 {
    let d = (p - c).rem_euclid(side);
    if d >= side / 2.0 {
        d - side
    } else {
        d
    }
}

/// Tile frame recomputed from the arc indices.
fn frame(t: &Tile) -> ([f64; 2], [f64; 2], f64, f64) {
    let m = t.arc.m as i32;
    let c = (t.arc.l as f64 + 0.5) / 2f64.powi(m);
    let e = [(TAU * c).cos(), (TAU * c).sin()];
    let a = 0.25f64.powi(t.a);
    let b = 2f64.powi(m) * a;
    let u = (t.l1 as f64 + 0.5) * a;
    let w = (t.l2 as f64 + 0.5) * b;
    ([u * e[0] - w * e[1], u * e[1] + w * e[0]], e, a, b)
}

fn local(t: &Tile, x: [f64; 2], side: f64) -> (f64, f64) {
    let (c, e, _, _) = frame(t);
    let d = [min_image(x[0], c[0], side), min_image(x[1], c[1], side)];
    (d[0] * e[0] + d[1] * e[1], -d[0] * e[1] + d[1] * e[0])
}

/// Packet from its defining formula, evaluated at every grid point.
pub fn packet_oracle(t: &Tile, n: usize, side: f64) -> Vec<Complex64> {
    let h = side / n as f64;
    let (_, e, a, b) = frame(t);
    let m1 = t.arc.m as i32 + 1;
    let c1 = (2.0 * t.arc.l as f64 + 0.5) / 2f64.powi(m1);
    let r = 1.25 * 4f64.powi(t.a);
    let nu = [r * (TAU * c1).cos(), r * (TAU * c1).sin()];
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let (u, w) = local(t, [i as f64 * h, j as f64 * h], side);
            let d = [u * e[0] - w * e[1], u * e[1] + w * e[0]];
            let amp = bump(u / a) * bump(w / b);
            v[i * n + j] = Complex64::from_polar(amp, 2.0 * PI * (nu[0] * d[0] + nu[1] * d[1]));
        }
    }
    let norm: f64 = (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * h * h).sqrt();
    v.iter().map(|z| z / norm).collect()
}

/// `1_{R}(x)` at every grid point.
pub fn rect_indicator(t: &Tile, n: usize, side: f64) -> Vec<bool> {
    let h = side / n as f64;
    let (_, _, a, b) = frame(t);
    let mut v = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let (u, w) = local(t, [i as f64 * h, j as f64 * h], side);
            let d = [1e-9 * a / 2.0, 1e-9 * b / 2.0];
            v[i * n + j] = -a / 2.0 - d[0] <= u && u < a / 2.0 - d[0] && -b / 2.0 - d[1] <= w && w < b / 2.0 - d[1];
        }
    }
    v
}

/// Whether the angle `theta` (turns, in `[0, 1)`) lies in `ω₂` of the tile.
pub fn in_omega2(t: &Tile, theta: f64) -> bool {
    let len = 0.5f64.powi(t.arc.m as i32 + 1);
    let start = (2 * t.arc.l + 1) as f64 * len;
    start <= theta && theta < start + len
}

pub fn inner(f: &[Complex64], g: &[Complex64], cell_area: f64) -> Complex64 {
    f.iter().zip(g).map(|(a, b)| a * b.conj()).sum::<Complex64>() * cell_area
}

/// Sutherland–Hodgman clip of a convex polygon by a convex polygon.
pub fn clip(subject: &[[f64; 2]], clipper: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    let k = clipper.len();
    let orient = signed_area(clipper).signum();
    for i in 0..k {
        let (a, b) = (clipper[i], clipper[(i + 1) % k]);
        let inside = |p: [f64; 2]| orient * ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) >= 0.0;
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let cross = |p: [f64; 2], q: [f64; 2]| {
                let d1 = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                let d2 = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
                let s = d1 / (d1 - d2);
                [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
            };
            match (inside(p), inside(q)) {
                (true, true) => out.push(q),
                (true, false) => out.push(cross(p, q)),
                (false, true) => {
                    out.push(cross(p, q));
                    out.push(q);
                }
                (false, false) => {}
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

pub fn signed_area(p: &[[f64; 2]]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    s / 2.0
}

/// Areas of `∩_{i ∈ mask} quads[i]` for every nonempty mask.
pub fn intersection_areas(quads: &[[[f64; 2]; 4]]) -> Vec<f64> {
    let k = quads.len();
    let mut polys: Vec<Vec<[f64; 2]>> = vec![Vec::new(); 1 << k];
    let mut areas = vec![0.0; 1 << k];
    for mask in 1usize..1 << k {
        let hi = usize::BITS - 1 - mask.leading_zeros();
        let rest = mask & !(1 << hi);
        let poly = if rest == 0 {
            quads[hi as usize].to_vec()
        } else if polys[rest].len() < 3 {
            Vec::new()
        } else {
            clip(&polys[rest], &quads[hi as usize])
        };
        areas[mask] = if poly.len() < 3 { 0.0 } else { signed_area(&poly).abs() };
        polys[mask] = poly;
    }
    areas
}

/// Union area of the quads in `set` by inclusion–exclusion.
pub fn union_from_intersections(areas: &[f64], set: usize) -> f64 {
    let mut total = 0.0;
    let mut sub = set;
    while sub != 0 {
        if sub.count_ones() % 2 == 1 {
            total += areas[sub];
        } else {
            total -= areas[sub];
        }
        sub = (sub - 1) & set;
    }
    total
}

pub fn corners(t: &Tile) -> [[f64; 2]; 4] {
    let (c, e, a, b) = frame(t);
    let p = |s: f64, r: f64| {
        [c[0] + s * a / 2.0 * e[0] - r * b / 2.0 * e[1], c[1] + s * a / 2.0 * e[1] + r * b / 2.0 * e[0]]
    };
    [p(-1.0, -1.0), p(1.0, -1.0), p(1.0, 1.0), p(-1.0, 1.0)]
}

/// Arc `[l/2^m, (l+1)/2^m)` as a float interval.
fn arc_interval(m: u32, l: u64) -> (f64, f64) {
    let len = 0.5f64.powi(m as i32);
    (l as f64 * len, (l + 1) as f64 * len)
}

/// Exhaustive size: every subset whose right-child arcs share a point
/// (lacunary) or whose arcs coincide (conical), tested on float intervals.
pub fn brute_size(tiles: &[Tile], coeffs: &[Complex64], conical: bool) -> f64 {
    let quads: Vec<[[f64; 2]; 4]> = tiles.iter().map(corners).collect();
    let areas = intersection_areas(&quads);
    let mut best = 0.0f64;
    for mask in 1usize..1 << tiles.len() {
        let ids: Vec<usize> = (0..tiles.len()).filter(|i| mask >> i & 1 == 1).collect();
        let ok = if conical {
            ids.iter().all(|&i| tiles[i].arc == tiles[ids[0]].arc)
        } else {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for &i in &ids {
                let (a, b) = arc_interval(tiles[i].arc.m + 1, 2 * tiles[i].arc.l + 1);
                lo = lo.max(a);
                hi = hi.min(b);
            }
            lo < hi
        };
        if ok {
            let m: f64 = ids.iter().map(|&i| coeffs[i].norm_sqr()).sum();
            best = best.max((m / union_from_intersections(&areas, mask)).sqrt());
        }
    }
    best
}

/// Unitary DFT by direct summation.
pub fn dft_direct(f: &GridField) -> Vec<Complex64> {
    let n = f.n();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for k1 in 0..n {
        for k2 in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let ph = -TAU * ((k1 * i + k2 * j) % n) as f64 / n as f64;
                    acc += f.get(i, j) * Complex64::from_polar(1.0, ph);
                }
            }
            out[k1 * n + k2] = acc / n as f64;
        }
    }
    out
}

fn centered(k: usize, n: usize) -> i64 {
    if 2 * k >= n {
        k as i64 - n as i64
    } else {
        k as i64
    }
}

/// `Σ_k σ(k̃) F[k] e^{2πi k·x/n} / n` by direct summation, `k̃` centred.
pub fn symbol_direct(f: &GridField, sigma: impl Fn([i64; 2]) -> Complex64) -> Vec<Complex64> {
    let n = f.n();
    let spec = dft_direct(f);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k1 in 0..n {
                for k2 in 0..n {
                    let s = sigma([centered(k1, n), centered(k2, n)]);
                    if s == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let ph = TAU * ((k1 * i + k2 * j) % n) as f64 / n as f64;
                    acc += s * spec[k1 * n + k2] * Complex64::from_polar(1.0, ph);
                }
            }
            out[i * n + j] = acc / n as f64;
        }
    }
    out
}

/// `ξ·v` from a floating angle; `None` on the line through the origin
/// perpendicular to `v`, detected with a relative threshold (a rational
/// direction off the eight axis/diagonal angles has no lattice point there).
pub fn dot_oracle(turns: f64, k: [i64; 2], side: f64) -> Option<f64> {
    let u = [(TAU * turns).cos(), (TAU * turns).sin()];
    let d = k[0] as f64 * u[0] + k[1] as f64 * u[1];
    let norm = (k[0] as f64).hypot(k[1] as f64);
    if norm == 0.0 || d.abs() < 1e-9 * norm {
        None
    } else {
        Some(TAU / side * d)
    }
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Explicit Haar function on `n` cells: `None` is the normalised constant,
/// `Some((start, width))` the `±|I|^{−1/2}` step on that interval.
fn haar_values(kind: Option<(usize, usize)>, n: usize, side: f64) -> Vec<f64> {
    let h = side / n as f64;
    match kind {
        None => vec![1.0 / side.sqrt(); n],
        Some((s, w)) => {
            let c = 1.0 / (w as f64 * h).sqrt();
            (0..n)
                .map(|i| {
                    if i < s || i >= s + w {
                        0.0
                    } else if i < s + w / 2 {
                        c
                    } else {
                        -c
                    }
                })
                .collect()
        }
    }
}

fn haar_family(n: usize) -> Vec<Option<(usize, usize)>> {
    let mut out = vec![None];
    let mut w = n;
    while w >= 2 {
        for s in (0..n).step_by(w) {
            out.push(Some((s, w)));
        }
        w /= 2;
    }
    out
}

/// `Δ₁₂f` from explicitly built tensor Haar functions, constants included.
pub fn haar_delta12_oracle(f: &GridField) -> Vec<f64> {
    let n = f.n();
    let side = f.side();
    let h = side / n as f64;
    let fam = haar_family(n);
    let mut acc = vec![0.0; n * n];
    for a in &fam {
        for b in &fam {
            if a.is_none() && b.is_none() {
                continue;
            }
            let ha = haar_values(*a, n, side);
            let hb = haar_values(*b, n, side);
            let mut c = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    c += f.get(i, j) * ha[i] * hb[j] * h * h;
                }
            }
            let (ia, wa) = a.unwrap_or((0, n));
            let (ib, wb) = b.unwrap_or((0, n));
            let q = (wa * wb) as f64 * h * h;
            for i in ia..ia + wa {
                for j in ib..ib + wb {
                    acc[i * n + j] += c.norm_sqr() / q;
                }
            }
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

/// `SB` at cell centres by testing membership in every rectangle
/// (unshifted grid only).
pub fn sb_oracle(entries: &[(DyadicRect, Complex64)], n: usize, side: f64) -> Vec<f64> {
    let h = side / n as f64;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let mut s = 0.0;
            for (r, b) in entries {
                assert_eq!(r.shift, 0);
                let (wi, wj) = (2f64.powi(r.i.scale), 2f64.powi(r.j.scale));
                let inside = |p: f64, w: f64, l: i64| p >= l as f64 * w && p < (l + 1) as f64 * w;
                if inside(x, wi, r.i.offset) && inside(y, wj, r.j.offset) {
                    s += b.norm_sqr() / (wi * wj);
                }
            }
            out[i * n + j] = s.sqrt();
        }
    }
    out
}

/// Per-direction model sums `Σ_{s: v∈ω₂ₛ} ⟨f,φ_s⟩φ_s` with packets from
/// their formula.
pub fn model_sum_oracle(tiles: &[Tile], ids: &[usize], f: &GridField, angles: &[f64]) -> Vec<Vec<Complex64>> {
    let (n, side) = (f.n(), f.side());
    let h2 = f.cell_area();
    let packets: Vec<Vec<Complex64>> = ids.iter().map(|&s| packet_oracle(&tiles[s], n, side)).collect();
    angles
        .iter()
        .map(|&theta| {
            let mut want = vec![Complex64::new(0.0, 0.0); n * n];
            for (k, &s) in ids.iter().enumerate() {
                if in_omega2(&tiles[s], theta) {
                    let c = inner(f.data(), &packets[k], h2);
                    for (w, p) in want.iter_mut().zip(&packets[k]) {
                        *w += c * p;
                    }
                }
            }
            want
        })
        .collect()
}

/// `SQ² = max_v Σ_{s: v∈ω₂ₛ} |c_s|²/|R_s| 1_{R_s}`.
pub fn sq_oracle(tiles: &[Tile], ids: &[usize], coeffs: &[Complex64], n: usize, side: f64, angles: &[f64]) -> Vec<f64> {
    let n2 = n * n;
    let mut want = vec![0.0f64; n2];
    for &theta in angles {
        let mut acc = vec![0.0f64; n2];
        for &s in ids {
            if in_omega2(&tiles[s], theta) {
                let ind = rect_indicator(&tiles[s], n, side);
                for i in 0..n2 {
                    if ind[i] {
                        acc[i] += coeffs[s].norm_sqr() / tiles[s].area();
                    }
                }
            }
        }
        for i in 0..n2 {
            want[i] = want[i].max(acc[i]);
        }
    }
    want
}

/// Area of the union of unshifted rectangles with scales `≥ −depth`, by
/// marking cells of side `2^{−depth}`.
pub fn union_by_cells(entries: &[(DyadicRect, Complex64)], subset: &[usize], depth: i32) -> f64 {
    let n = 1usize << depth;
    let mut mark = vec![false; n * n];
    for &k in subset {
        let r = entries[k].0;
        let (wi, wj) = (1usize << (r.i.scale + depth), 1usize << (r.j.scale + depth));
        let (i0, j0) = (r.i.offset as usize * wi, r.j.offset as usize * wj);
        for i in i0..i0 + wi {
            for j in j0..j0 + wj {
                mark[i * n + j] = true;
            }
        }
    }
    mark.iter().filter(|&&m| m).count() as f64 / (n * n) as f64
}

pub fn brute_product_size(b: &ProductCoefficients, depth: i32) -> f64 {
    let e = b.entries();
    let mut best: f64 = 0.0;
    for mask in 1u32..(1 << e.len()) {
        let subset: Vec<usize> = (0..e.len()).filter(|i| mask >> i & 1 == 1).collect();
        let mass: f64 = subset.iter().map(|&i| e[i].1.norm_sqr()).sum();
        best = best.max((mass / union_by_cells(e, &subset, depth)).sqrt());
    }
    best
}

/// Exhaustive oracle: largest subset that, ordered by decreasing distance to
/// `node`, is lacunary.
pub fn brute_longest(set: &DirectionSet, node: &BigRational) -> usize {
    let n = set.len();
    let mut best = 0;
    for mask in 1u32..(1 << n) {
        let mut chosen: Vec<Direction> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| set.dirs()[i].clone())
            .collect();
        chosen.sort_by(|a, b| {
            circular_distance(b.angle(), node).cmp(&circular_distance(a.angle(), node))
        });
        if is_lacunary_with_node(&chosen, node) {
            best = best.max(chosen.len());
        }
    }
    best
}

/// Littlewood–Paley profile rebuilt from its definition.
pub fn lp_oracle(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let t = r.log2();
    let total: f64 = (-4..=4).map(|j| bump(t.fract() - j as f64)).sum();
    bump(t) / total
}
